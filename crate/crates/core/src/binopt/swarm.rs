//! Real-velocity binary swarms: classic DPSO and the modified (MDPSO) rule.
//!
//! Draw order per run: for each particle, `n` position bits then `n`
//! velocities in `[-v_max, v_max]`. Per iteration, for each particle and each
//! dimension: `r1`, `r2`, then the position uniform `u`.

use alloc::vec::Vec;

use rand::Rng;

use super::{argmin, position_match, sigmoid, BitVector, Counted, OptimizerResult, SwarmConfig};
use crate::rng::{self, ChaCha8Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateRule {
    /// Velocity pulled by `pbest - x`; the sigmoid gives P(bit = 1).
    Dpso,
    /// Velocity driven by `pbest ⊕ x`; the sigmoid gives P(bit kept).
    Mdpso,
}

/// `w·v + φ1·(pbest − x) + φ2·(gbest − x)`, clamped to `±v_max`.
#[allow(clippy::too_many_arguments)]
pub fn dpso_velocity(
    v: f64,
    x: bool,
    pbest: bool,
    gbest: bool,
    w: f64,
    phi1: f64,
    phi2: f64,
    v_max: f64,
) -> f64 {
    let b = |bit: bool| if bit { 1.0 } else { 0.0 };
    let raw = w * v + phi1 * (b(pbest) - b(x)) + phi2 * (b(gbest) - b(x));
    raw.clamp(-v_max, v_max)
}

/// New bit: 1 iff `u < S(v)`.
pub fn dpso_position(v: f64, u: f64) -> bool {
    u < sigmoid(v)
}

/// `w·v + φ1·(pbest ⊕ x) + φ2·(gbest ⊕ x)`, clamped to `±v_max`.
#[allow(clippy::too_many_arguments)]
pub fn mdpso_velocity(
    v: f64,
    x: bool,
    pbest: bool,
    gbest: bool,
    w: f64,
    phi1: f64,
    phi2: f64,
    v_max: f64,
) -> f64 {
    let raw = w * v + phi1 * position_match(pbest, x) + phi2 * position_match(gbest, x);
    raw.clamp(-v_max, v_max)
}

/// Keeps `x` iff `u < S(v)`, otherwise negates it. `v` is the freshly
/// updated velocity.
pub fn mdpso_position(x: bool, v: f64, u: f64) -> bool {
    if u < sigmoid(v) {
        x
    } else {
        !x
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: BitVector,
    pub velocity: Vec<f64>,
    pub pbest: BitVector,
    pub pbest_fitness: f64,
}

/// A DPSO or MDPSO swarm that can be advanced one iteration at a time.
#[derive(Debug)]
pub struct BinarySwarm {
    rule: UpdateRule,
    config: SwarmConfig,
    particles: Vec<Particle>,
    gbest: BitVector,
    gbest_fitness: f64,
    rng: ChaCha8Rng,
    iteration: usize,
    evaluations: usize,
    trajectory: Vec<f64>,
}

impl BinarySwarm {
    /// Samples and evaluates the initial population.
    pub fn new<F>(rule: UpdateRule, n_bits: usize, config: &SwarmConfig, fitness: F) -> Self
    where
        F: FnMut(&BitVector) -> f64,
    {
        assert!(n_bits >= 1 && config.population >= 1);
        let mut rng = rng::seeded(config.seed);
        let mut fitness = Counted::new(fitness);
        let particles: Vec<Particle> = (0..config.population)
            .map(|_| {
                let position = BitVector::random(n_bits, &mut rng);
                let velocity = (0..n_bits)
                    .map(|_| rng.random_range(-1.0..=1.0) * config.v_max)
                    .collect();
                let f = fitness.eval(&position);
                Particle {
                    pbest: position.clone(),
                    position,
                    velocity,
                    pbest_fitness: f,
                }
            })
            .collect();
        let (g, gf) = argmin(particles.iter().map(|p| p.pbest_fitness)).expect("population >= 1");
        Self {
            rule,
            config: config.clone(),
            gbest: particles[g].pbest.clone(),
            gbest_fitness: gf,
            particles,
            rng,
            iteration: 0,
            evaluations: fitness.calls,
            trajectory: alloc::vec![gf],
        }
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn gbest(&self) -> (&BitVector, f64) {
        (&self.gbest, self.gbest_fitness)
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Moves every particle, then evaluates them in index order and updates
    /// the bests. `gbest` is held fixed while the swarm moves.
    pub fn step<F>(&mut self, fitness: F)
    where
        F: FnMut(&BitVector) -> f64,
    {
        let w = self.config.inertia(self.iteration);
        let (c1, c2, v_max) = (self.config.c1, self.config.c2, self.config.v_max);
        for p in &mut self.particles {
            for d in 0..p.position.len() {
                let phi1 = c1 * self.rng.random::<f64>();
                let phi2 = c2 * self.rng.random::<f64>();
                let u: f64 = self.rng.random();
                let x = p.position.get(d);
                let (pb, gb) = (p.pbest.get(d), self.gbest.get(d));
                let (v, bit) = match self.rule {
                    UpdateRule::Dpso => {
                        let v = dpso_velocity(p.velocity[d], x, pb, gb, w, phi1, phi2, v_max);
                        (v, dpso_position(v, u))
                    }
                    UpdateRule::Mdpso => {
                        let v = mdpso_velocity(p.velocity[d], x, pb, gb, w, phi1, phi2, v_max);
                        (v, mdpso_position(x, v, u))
                    }
                };
                p.velocity[d] = v;
                p.position.set(d, bit);
            }
        }

        let mut fitness = Counted::new(fitness);
        for p in &mut self.particles {
            let f = fitness.eval(&p.position);
            if f < p.pbest_fitness {
                p.pbest_fitness = f;
                p.pbest = p.position.clone();
            }
        }
        self.evaluations += fitness.calls;
        if let Some((g, gf)) = argmin(self.particles.iter().map(|p| p.pbest_fitness)) {
            if gf < self.gbest_fitness {
                self.gbest_fitness = gf;
                self.gbest = self.particles[g].pbest.clone();
            }
        }
        self.iteration += 1;
        self.trajectory.push(self.gbest_fitness);
    }

    pub fn finish(self) -> OptimizerResult {
        OptimizerResult {
            best_mask: self.gbest,
            best_fitness: self.gbest_fitness,
            trajectory: self.trajectory,
            evaluations: self.evaluations,
        }
    }
}

fn run_swarm<F>(
    rule: UpdateRule,
    n_bits: usize,
    config: &SwarmConfig,
    mut fitness: F,
) -> OptimizerResult
where
    F: FnMut(&BitVector) -> f64,
{
    let mut swarm = BinarySwarm::new(rule, n_bits, config, &mut fitness);
    for _ in 0..config.iterations {
        swarm.step(&mut fitness);
    }
    swarm.finish()
}

/// Kennedy–Eberhart discrete binary PSO.
pub fn run_dpso<F>(n_bits: usize, config: &SwarmConfig, fitness: F) -> OptimizerResult
where
    F: FnMut(&BitVector) -> f64,
{
    run_swarm(UpdateRule::Dpso, n_bits, config, fitness)
}

/// Modified discrete PSO: agreement-driven velocity, keep-or-negate position.
pub fn run_mdpso<F>(n_bits: usize, config: &SwarmConfig, fitness: F) -> OptimizerResult
where
    F: FnMut(&BitVector) -> f64,
{
    run_swarm(UpdateRule::Mdpso, n_bits, config, fitness)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binopt::sigmoid;

    fn onemax(b: &BitVector) -> f64 {
        b.count_ones() as f64
    }

    #[test]
    fn velocity_rules() {
        // x = pbest = gbest: DPSO only decays, MDPSO accelerates.
        assert_eq!(
            dpso_velocity(2.0, true, true, true, 0.5, 1.0, 1.0, 4.0),
            1.0
        );
        assert_eq!(
            mdpso_velocity(2.0, true, true, true, 0.5, 1.0, 1.0, 4.0),
            3.0
        );
        assert_eq!(
            mdpso_velocity(2.0, false, true, true, 0.5, 1.0, 1.0, 4.0),
            -1.0
        );
        assert_eq!(
            dpso_velocity(0.0, false, true, true, 0.5, 3.0, 3.0, 4.0),
            4.0
        );
        assert_eq!(
            mdpso_velocity(-4.0, false, true, true, 1.0, 3.0, 3.0, 4.0),
            -4.0
        );
    }

    #[test]
    fn position_rules() {
        assert!(dpso_position(0.0, 0.49));
        assert!(!dpso_position(0.0, 0.51));
        assert!(mdpso_position(true, 4.0, 0.5));
        assert!(!mdpso_position(true, 4.0, 0.99));
        assert!(mdpso_position(false, -4.0, 0.5));
    }

    #[test]
    fn single_bit_problem() {
        let f = |b: &BitVector| if b.get(0) { 1.0 } else { 0.0 };
        for seed in 0..10 {
            let cfg = SwarmConfig::default().with_seed(seed);
            assert_eq!(run_dpso(1, &cfg, f).best_fitness, 0.0);
            assert_eq!(run_mdpso(1, &cfg, f).best_fitness, 0.0);
        }
    }

    #[test]
    fn velocities_stay_clamped() {
        for rule in [UpdateRule::Dpso, UpdateRule::Mdpso] {
            let cfg = SwarmConfig {
                iterations: 50,
                ..SwarmConfig::default()
            }
            .with_seed(3);
            let mut swarm = BinarySwarm::new(rule, 8, &cfg, onemax);
            for _ in 0..cfg.iterations {
                for p in swarm.particles() {
                    assert!(p.velocity.iter().all(|v| v.abs() <= cfg.v_max));
                }
                swarm.step(onemax);
            }
        }
    }

    #[test]
    fn trajectory_and_bookkeeping() {
        let cfg = SwarmConfig {
            iterations: 40,
            ..SwarmConfig::default()
        }
        .with_seed(11);
        let weights = [3.0, -1.0, 2.0, -2.0, 0.5, 1.0, -0.5];
        let f = |b: &BitVector| b.set_bits().map(|i| weights[i]).sum::<f64>();
        for r in [run_dpso(7, &cfg, f), run_mdpso(7, &cfg, f)] {
            assert_eq!(r.trajectory.len(), 41);
            assert!(r.trajectory.windows(2).all(|w| w[1] <= w[0]));
            assert_eq!(r.best_fitness, *r.trajectory.last().unwrap());
            assert_eq!(r.best_fitness, f(&r.best_mask));
            assert_eq!(r.evaluations, 20 * 41);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = SwarmConfig::default().with_seed(42);
        assert_eq!(run_mdpso(10, &cfg, onemax), run_mdpso(10, &cfg, onemax));
        assert_eq!(run_dpso(10, &cfg, onemax), run_dpso(10, &cfg, onemax));
    }

    #[test]
    fn infinite_fitness_is_tolerated() {
        let cfg = SwarmConfig {
            iterations: 30,
            ..SwarmConfig::default()
        };
        let f = |b: &BitVector| {
            if b.is_all_zero() {
                f64::INFINITY
            } else {
                b.count_ones() as f64
            }
        };
        let r = run_mdpso(5, &cfg, f);
        assert_eq!(r.best_fitness, 1.0);
        let nan = run_dpso(3, &cfg, |_: &BitVector| f64::NAN);
        assert_eq!(nan.best_fitness, f64::INFINITY);
    }

    // Frozen inertia w = 1 and no acceleration: the velocity never changes and
    // each MDPSO step is an independent Bernoulli flip with P = 1 - S(v0).
    #[test]
    fn constant_velocity_flip_rate() {
        let v0 = 0.8;
        let cfg = SwarmConfig {
            population: 1,
            iterations: 100_000,
            c1: 0.0,
            c2: 0.0,
            w_start: 1.0,
            w_end: 1.0,
            ..SwarmConfig::default()
        };
        let mut swarm = BinarySwarm::new(UpdateRule::Mdpso, 1, &cfg, |_: &BitVector| 0.0);
        swarm.particles[0].velocity[0] = v0;
        let mut flips = 0usize;
        for _ in 0..cfg.iterations {
            let before = swarm.particles[0].position.get(0);
            swarm.step(|_: &BitVector| 0.0);
            assert_eq!(swarm.particles[0].velocity[0], v0);
            flips += usize::from(before != swarm.particles[0].position.get(0));
        }
        let p = 1.0 - sigmoid(v0);
        let n = cfg.iterations as f64;
        let se = (p * (1.0 - p) / n).sqrt();
        assert!(
            (flips as f64 / n - p).abs() < 3.0 * se,
            "{flips} flips, p = {p}"
        );
    }
}
