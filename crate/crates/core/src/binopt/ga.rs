//! Generational binary GA.
//!
//! Selection is roulette-wheel on inverted fitness, `1 / (1 + f - f_best)`
//! with `f_best` the population minimum, so infinite fitness gets weight 0.
//! Each offspring pair comes from single-point crossover (probability
//! `p_crossover`) followed by per-bit mutation. The `elitism` best individuals
//! are copied unchanged and are not re-evaluated.

use alloc::vec::Vec;

use rand::Rng;

use super::{BitVector, Counted, GaConfig, OptimizerResult};
use crate::rng;

fn weights(fitness: &[f64]) -> Vec<f64> {
    let best = fitness.iter().copied().fold(f64::INFINITY, f64::min);
    fitness
        .iter()
        .map(|&f| {
            if f.is_finite() {
                1.0 / (1.0 + f - best)
            } else {
                0.0
            }
        })
        .collect()
}

fn roulette<R: Rng + ?Sized>(weights: &[f64], total: f64, rng: &mut R) -> usize {
    if total.is_nan() || total <= 0.0 {
        return rng.random_range(0..weights.len());
    }
    let mut target = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if target < w {
            return i;
        }
        target -= w;
    }
    // Rounding can leave a sliver past the last positive weight.
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// Sort key: fitness ascending, index ascending.
fn ranked(fitness: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..fitness.len()).collect();
    idx.sort_by(|&a, &b| fitness[a].total_cmp(&fitness[b]).then(a.cmp(&b)));
    idx
}

pub fn run_ga<F>(n_bits: usize, config: &GaConfig, fitness: F) -> OptimizerResult
where
    F: FnMut(&BitVector) -> f64,
{
    assert!(n_bits >= 1 && config.population >= 1);
    let mut rng = rng::seeded(config.seed);
    let population = (0..config.population)
        .map(|_| BitVector::random(n_bits, &mut rng))
        .collect();
    evolve(population, config, &mut rng, fitness)
}

/// Runs the GA from a given initial population; `config.population` is
/// ignored in favour of its size.
pub fn run_ga_from<F>(population: Vec<BitVector>, config: &GaConfig, fitness: F) -> OptimizerResult
where
    F: FnMut(&BitVector) -> f64,
{
    assert!(!population.is_empty());
    let mut rng = rng::seeded(config.seed);
    evolve(population, config, &mut rng, fitness)
}

fn evolve<F, R>(
    mut population: Vec<BitVector>,
    config: &GaConfig,
    rng: &mut R,
    fitness: F,
) -> OptimizerResult
where
    F: FnMut(&BitVector) -> f64,
    R: Rng + ?Sized,
{
    let mut fitness = Counted::new(fitness);
    let n = population.len();
    let n_bits = population[0].len();
    let elites = config.elitism.min(n);

    let mut scores: Vec<f64> = population.iter().map(|b| fitness.eval(b)).collect();

    let order = ranked(&scores);
    let mut best = (population[order[0]].clone(), scores[order[0]]);
    let mut trajectory = alloc::vec![best.1];

    for _ in 0..config.iterations {
        let order = ranked(&scores);
        let mut next: Vec<BitVector> = order[..elites]
            .iter()
            .map(|&i| population[i].clone())
            .collect();
        let mut next_scores: Vec<f64> = order[..elites].iter().map(|&i| scores[i]).collect();

        let w = weights(&scores);
        let total: f64 = w.iter().sum();
        while next.len() < n {
            let a = &population[roulette(&w, total, rng)];
            let b = &population[roulette(&w, total, rng)];
            let (mut c1, mut c2) = (a.clone(), b.clone());
            if n_bits > 1 && rng.random_bool(config.p_crossover) {
                let cut = rng.random_range(1..n_bits);
                for d in cut..n_bits {
                    c1.set(d, b.get(d));
                    c2.set(d, a.get(d));
                }
            }
            for child in [&mut c1, &mut c2] {
                for d in 0..n_bits {
                    if rng.random_bool(config.p_mutation) {
                        child.flip(d);
                    }
                }
            }
            for child in [c1, c2] {
                if next.len() < n {
                    next_scores.push(fitness.eval(&child));
                    next.push(child);
                }
            }
        }
        population = next;
        scores = next_scores;

        let top = ranked(&scores)[0];
        if scores[top] < best.1 {
            best = (population[top].clone(), scores[top]);
        }
        trajectory.push(best.1);
    }

    OptimizerResult {
        best_mask: best.0,
        best_fitness: best.1,
        trajectory,
        evaluations: fitness.calls,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn onemax(b: &BitVector) -> f64 {
        b.count_ones() as f64
    }

    #[test]
    fn roulette_prefers_heavy_weights() {
        let mut rng = rng::seeded(1);
        let w = weights(&[0.0, 9.0, f64::INFINITY]);
        assert_eq!(w[2], 0.0);
        let total: f64 = w.iter().sum();
        let hits = (0..10_000)
            .filter(|_| roulette(&w, total, &mut rng) == 0)
            .count();
        // weights 1 and 0.1 -> P(0) = 10/11
        assert!((hits as f64 / 10_000.0 - 10.0 / 11.0).abs() < 0.02);
    }

    #[test]
    fn no_mutation_uniform_population_is_frozen() {
        let cfg = GaConfig {
            p_mutation: 0.0,
            iterations: 50,
            ..GaConfig::default()
        };
        let x: BitVector = "0110100111".parse().unwrap();
        let mut seen = alloc::collections::BTreeSet::new();
        let r = run_ga_from(alloc::vec![x.clone(); 20], &cfg, |b: &BitVector| {
            seen.insert(b.clone());
            onemax(b)
        });
        assert_eq!(seen.into_iter().collect::<Vec<_>>(), alloc::vec![x.clone()]);
        assert_eq!(r.best_mask, x);
        assert_eq!(r.trajectory.len(), 51);
    }

    #[test]
    fn elitism_keeps_trajectory_monotone() {
        let weights = [2.0, -3.0, 1.0, -1.0, 0.5, -0.5, 3.0, -2.0];
        let f = |b: &BitVector| b.set_bits().map(|i| weights[i]).sum::<f64>();
        for seed in 0..5 {
            let r = run_ga(8, &GaConfig::default().with_seed(seed), f);
            assert!(r.trajectory.windows(2).all(|w| w[1] <= w[0]));
            assert_eq!(r.best_fitness, *r.trajectory.last().unwrap());
            assert_eq!(r.best_fitness, f(&r.best_mask));
        }
    }

    #[test]
    fn deterministic() {
        let cfg = GaConfig::default().with_seed(77);
        assert_eq!(run_ga(10, &cfg, onemax), run_ga(10, &cfg, onemax));
    }
}
