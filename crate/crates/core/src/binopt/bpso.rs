//! Boolean PSO: velocities are bitstrings combined with AND/OR/XOR.
//!
//! Per bit the velocity update is
//! `v = (W ∧ v) ∨ (R1 ∧ (pbest ⊕ x)) ∨ (R2 ∧ (gbest ⊕ x))` and the move is
//! `x ← x ⊕ v`, where `W`, `R1`, `R2` are Bernoulli bits with success
//! probabilities `w`, `min(1, c1/2)` and `min(1, c2/2)`. A velocity with more
//! than `⌈n/3⌉` set bits has randomly chosen bits cleared until it fits.
//!
//! Draw order per run: for each particle, `n` position bits then `n`
//! velocity bits, then the truncation draws. Per iteration, per particle and
//! dimension: `W`, `R1`, `R2`; then the particle's truncation draws.

use alloc::vec::Vec;

use rand::Rng;

use super::{argmin, BitVector, Counted, OptimizerResult, SwarmConfig};
use crate::rng::{self, ChaCha8Rng};

#[derive(Debug, Clone, PartialEq)]
pub struct BooleanParticle {
    pub position: BitVector,
    pub velocity: BitVector,
    pub pbest: BitVector,
    pub pbest_fitness: f64,
}

/// Maximum number of set bits in a velocity of length `n`.
pub fn velocity_cap(n: usize) -> usize {
    n.div_ceil(3)
}

fn truncate<R: Rng + ?Sized>(v: &mut BitVector, cap: usize, rng: &mut R) {
    let mut set: Vec<usize> = v.set_bits().collect();
    while set.len() > cap {
        let k = rng.random_range(0..set.len());
        v.set(set.swap_remove(k), false);
    }
}

#[derive(Debug)]
pub struct BooleanSwarm {
    config: SwarmConfig,
    particles: Vec<BooleanParticle>,
    gbest: BitVector,
    gbest_fitness: f64,
    cap: usize,
    rng: ChaCha8Rng,
    iteration: usize,
    evaluations: usize,
    trajectory: Vec<f64>,
}

impl BooleanSwarm {
    pub fn new<F>(n_bits: usize, config: &SwarmConfig, fitness: F) -> Self
    where
        F: FnMut(&BitVector) -> f64,
    {
        assert!(n_bits >= 1 && config.population >= 1);
        let mut rng = rng::seeded(config.seed);
        let mut fitness = Counted::new(fitness);
        let cap = velocity_cap(n_bits);
        let particles: Vec<BooleanParticle> = (0..config.population)
            .map(|_| {
                let position = BitVector::random(n_bits, &mut rng);
                let mut velocity = BitVector::random(n_bits, &mut rng);
                truncate(&mut velocity, cap, &mut rng);
                let f = fitness.eval(&position);
                BooleanParticle {
                    pbest: position.clone(),
                    position,
                    velocity,
                    pbest_fitness: f,
                }
            })
            .collect();
        let (g, gf) = argmin(particles.iter().map(|p| p.pbest_fitness)).expect("population >= 1");
        Self {
            config: config.clone(),
            gbest: particles[g].pbest.clone(),
            gbest_fitness: gf,
            particles,
            cap,
            rng,
            iteration: 0,
            evaluations: fitness.calls,
            trajectory: alloc::vec![gf],
        }
    }

    pub fn particles(&self) -> &[BooleanParticle] {
        &self.particles
    }

    pub fn particles_mut(&mut self) -> &mut [BooleanParticle] {
        &mut self.particles
    }

    pub fn set_gbest(&mut self, gbest: BitVector, fitness: f64) {
        self.gbest = gbest;
        self.gbest_fitness = fitness;
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn step<F>(&mut self, fitness: F)
    where
        F: FnMut(&BitVector) -> f64,
    {
        let w = self.config.inertia(self.iteration).clamp(0.0, 1.0);
        let p1 = (self.config.c1 * 0.5).clamp(0.0, 1.0);
        let p2 = (self.config.c2 * 0.5).clamp(0.0, 1.0);
        for p in &mut self.particles {
            for d in 0..p.position.len() {
                let keep = self.rng.random_bool(w);
                let r1 = self.rng.random_bool(p1);
                let r2 = self.rng.random_bool(p2);
                let x = p.position.get(d);
                let v = (keep && p.velocity.get(d))
                    || (r1 && (p.pbest.get(d) ^ x))
                    || (r2 && (self.gbest.get(d) ^ x));
                p.velocity.set(d, v);
            }
            truncate(&mut p.velocity, self.cap, &mut self.rng);
            for d in p.velocity.set_bits().collect::<Vec<_>>() {
                p.position.flip(d);
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

pub fn run_bpso<F>(n_bits: usize, config: &SwarmConfig, mut fitness: F) -> OptimizerResult
where
    F: FnMut(&BitVector) -> f64,
{
    let mut swarm = BooleanSwarm::new(n_bits, config, &mut fitness);
    for _ in 0..config.iterations {
        swarm.step(&mut fitness);
    }
    swarm.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn onemax(b: &BitVector) -> f64 {
        b.count_ones() as f64
    }

    #[test]
    fn cap_is_third_rounded_up() {
        assert_eq!(velocity_cap(14), 5);
        assert_eq!(velocity_cap(6), 2);
        assert_eq!(velocity_cap(1), 1);
    }

    #[test]
    fn settled_particle_never_moves() {
        let cfg = SwarmConfig {
            population: 1,
            iterations: 50,
            ..SwarmConfig::default()
        };
        let mut swarm = BooleanSwarm::new(6, &cfg, onemax);
        let x: BitVector = "101100".parse().unwrap();
        {
            let p = &mut swarm.particles_mut()[0];
            p.position = x.clone();
            p.pbest = x.clone();
            p.pbest_fitness = f64::NEG_INFINITY;
            p.velocity = BitVector::zeros(6);
        }
        swarm.set_gbest(x.clone(), f64::NEG_INFINITY);
        for _ in 0..cfg.iterations {
            swarm.step(onemax);
            assert!(swarm.particles()[0].velocity.is_all_zero());
            assert_eq!(swarm.particles()[0].position, x);
        }
    }

    #[test]
    fn velocity_respects_cap() {
        let cfg = SwarmConfig {
            iterations: 60,
            ..SwarmConfig::default()
        }
        .with_seed(9);
        let mut swarm = BooleanSwarm::new(14, &cfg, onemax);
        for _ in 0..cfg.iterations {
            for p in swarm.particles() {
                assert!(p.velocity.count_ones() <= swarm.cap());
            }
            swarm.step(onemax);
        }
    }

    #[test]
    fn bookkeeping() {
        let cfg = SwarmConfig {
            iterations: 30,
            ..SwarmConfig::default()
        }
        .with_seed(5);
        let r = run_bpso(8, &cfg, onemax);
        assert_eq!(r.trajectory.len(), 31);
        assert!(r.trajectory.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(r.best_fitness, onemax(&r.best_mask));
        assert_eq!(r, run_bpso(8, &cfg, onemax));
    }
}
