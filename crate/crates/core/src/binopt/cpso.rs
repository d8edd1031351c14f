//! Real-valued PSO over a box.
//!
//! Velocities use the standard inertia form and are clamped to `±v_max`;
//! positions are clamped to the bounds after every move.

use alloc::vec::Vec;

use rand::Rng;

use super::{argmin, SwarmConfig};
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousResult {
    pub best: Vec<f64>,
    pub best_fitness: f64,
    pub trajectory: Vec<f64>,
    pub evaluations: usize,
}

/// Minimises `fitness` over `bounds` (inclusive `(lo, hi)` per dimension).
///
/// Initial positions are uniform in the box, initial velocities uniform in
/// `±min(v_max, hi - lo)`.
pub fn run_cpso<F>(bounds: &[(f64, f64)], config: &SwarmConfig, mut fitness: F) -> ContinuousResult
where
    F: FnMut(&[f64]) -> f64,
{
    assert!(!bounds.is_empty() && config.population >= 1);
    assert!(bounds.iter().all(|(lo, hi)| lo <= hi));
    let mut rng = rng::seeded(config.seed);
    let dim = bounds.len();
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let f = fitness(x);
        if f.is_nan() {
            f64::INFINITY
        } else {
            f
        }
    };

    let mut pos: Vec<Vec<f64>> = Vec::with_capacity(config.population);
    let mut vel: Vec<Vec<f64>> = Vec::with_capacity(config.population);
    for _ in 0..config.population {
        pos.push(
            bounds
                .iter()
                .map(|&(lo, hi)| lo + rng.random::<f64>() * (hi - lo))
                .collect(),
        );
        vel.push(
            bounds
                .iter()
                .map(|&(lo, hi)| rng.random_range(-1.0..=1.0) * config.v_max.min(hi - lo))
                .collect(),
        );
    }
    let mut pbest = pos.clone();
    let mut pbest_f: Vec<f64> = pos.iter().map(|x| eval(x)).collect();
    let (g, gf) = argmin(pbest_f.iter().copied()).expect("population >= 1");
    let mut gbest = pbest[g].clone();
    let mut gbest_f = gf;
    let mut trajectory = alloc::vec![gbest_f];

    for t in 0..config.iterations {
        let w = config.inertia(t);
        for i in 0..config.population {
            for d in 0..dim {
                let r1: f64 = rng.random();
                let r2: f64 = rng.random();
                let v = w * vel[i][d]
                    + config.c1 * r1 * (pbest[i][d] - pos[i][d])
                    + config.c2 * r2 * (gbest[d] - pos[i][d]);
                vel[i][d] = v.clamp(-config.v_max, config.v_max);
                pos[i][d] = (pos[i][d] + vel[i][d]).clamp(bounds[d].0, bounds[d].1);
            }
        }
        for i in 0..config.population {
            let f = eval(&pos[i]);
            if f < pbest_f[i] {
                pbest_f[i] = f;
                pbest[i].clone_from(&pos[i]);
            }
        }
        if let Some((g, gf)) = argmin(pbest_f.iter().copied()) {
            if gf < gbest_f {
                gbest_f = gf;
                gbest.clone_from(&pbest[g]);
            }
        }
        trajectory.push(gbest_f);
    }

    ContinuousResult {
        best: gbest,
        best_fitness: gbest_f,
        trajectory,
        evaluations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stays_in_bounds() {
        let bounds = [(0.0, 1.0), (-2.0, -1.0)];
        let cfg = SwarmConfig {
            iterations: 50,
            ..SwarmConfig::default()
        };
        let r = run_cpso(&bounds, &cfg, |x| {
            assert!((0.0..=1.0).contains(&x[0]) && (-2.0..=-1.0).contains(&x[1]));
            -(x[0] + x[1])
        });
        assert_eq!(r.best, vec![1.0, -1.0]);
        assert!(r.trajectory.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn one_dimensional_absolute_value() {
        for seed in 0..20 {
            let cfg = SwarmConfig::default().with_seed(seed);
            let r = run_cpso(&[(0.0, 1.0)], &cfg, |x| (x[0] - 0.3).abs());
            assert!((r.best[0] - 0.3).abs() < 1e-3, "seed {seed}: {:?}", r.best);
        }
    }

    #[test]
    fn deterministic() {
        let cfg = SwarmConfig::default().with_seed(4);
        let f = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        let b = [(-5.0, 5.0); 3];
        assert_eq!(run_cpso(&b, &cfg, f), run_cpso(&b, &cfg, f));
    }
}
