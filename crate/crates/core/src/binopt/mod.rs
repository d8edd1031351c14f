//! Bitstring metaheuristics over feature masks.
//!
//! All optimizers minimise a fitness `FnMut(&BitVector) -> f64`. The fitness
//! may return `f64::INFINITY` for infeasible masks; `NaN` is treated the same
//! way. Personal and global bests move only on strict improvement, so ties
//! keep the incumbent and the lowest particle index wins among equals.
//!
//! | optimizer | velocity | position |
//! |---|---|---|
//! | [`run_dpso`] | real, pulled by `pbest - x` | bit is 1 with probability `S(v)` |
//! | [`run_mdpso`] | real, pushed by agreement `pbest ⊕ x` | bit kept with probability `S(v)`, else negated |
//! | [`run_bpso`] | bitstring, `(W∧v) ∨ (R1∧(pbest⊕x)) ∨ (R2∧(gbest⊕x))` | `x ⊕ v` |
//! | [`run_ga`] | - | roulette, one-point crossover, bit mutation, elitism |
//!
//! [`run_cpso`] is the real-valued counterpart used to tune Holt–Winters.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

mod bpso;
mod cpso;
mod ga;
mod swarm;

pub use bpso::{run_bpso, BooleanParticle, BooleanSwarm};
pub use cpso::{run_cpso, ContinuousResult};
pub use ga::{run_ga, run_ga_from};
pub use swarm::{
    dpso_position, dpso_velocity, mdpso_position, mdpso_velocity, run_dpso, run_mdpso, BinarySwarm,
    Particle, UpdateRule,
};

/// A fixed-length feature mask. Bit `j` set means candidate `j` is selected.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitVector(Vec<bool>);

impl BitVector {
    pub fn zeros(n: usize) -> Self {
        Self(alloc::vec![false; n])
    }

    pub fn ones(n: usize) -> Self {
        Self(alloc::vec![true; n])
    }

    pub fn from_bools(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    /// Each bit independently set with probability one half.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self((0..n).map(|_| rng.random_bool(0.5)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        self.0[i] = bit;
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = !self.0[i];
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn is_all_zero(&self) -> bool {
        !self.0.iter().any(|&b| b)
    }

    /// Indices of set bits, ascending.
    pub fn set_bits(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i)
    }

    pub fn complement(&self) -> Self {
        Self(self.0.iter().map(|b| !b).collect())
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid bit string `{0}`")]
pub struct ParseBitsError(String);

impl FromStr for BitVector {
    type Err = ParseBitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(ParseBitsError(s.into())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Self)
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for BitVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for BitVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = <String as serde::Deserialize>::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Swarm settings shared by DPSO, MDPSO, Boolean PSO and the continuous PSO.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SwarmConfig {
    pub population: usize,
    pub iterations: usize,
    pub c1: f64,
    pub c2: f64,
    pub w_start: f64,
    pub w_end: f64,
    pub v_max: f64,
    pub seed: u64,
}

impl Default for SwarmConfig {
    fn default() -> Self {
        Self {
            population: 20,
            iterations: 200,
            c1: 2.0,
            c2: 2.0,
            w_start: 0.9,
            w_end: 0.4,
            v_max: 4.0,
            seed: 0,
        }
    }
}

impl SwarmConfig {
    /// Inertia weight at iteration `t`, linear from `w_start` to `w_end`.
    pub fn inertia(&self, t: usize) -> f64 {
        if self.iterations <= 1 {
            return self.w_start;
        }
        self.w_start - (self.w_start - self.w_end) * t as f64 / (self.iterations - 1) as f64
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GaConfig {
    pub population: usize,
    pub iterations: usize,
    pub p_crossover: f64,
    pub p_mutation: f64,
    pub elitism: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 20,
            iterations: 200,
            p_crossover: 0.90,
            p_mutation: 0.09,
            elitism: 1,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Outcome of one optimizer run.
///
/// `trajectory[0]` is the best fitness of the initial population and entry
/// `t + 1` the best after iteration `t`, so it has `iterations + 1` entries.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OptimizerResult {
    pub best_mask: BitVector,
    pub best_fitness: f64,
    pub trajectory: Vec<f64>,
    /// Number of fitness calls, cached or not.
    pub evaluations: usize,
}

/// Logistic transfer function.
pub fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-v))
}

/// The position operation `x ⊕ y`: +1 when the bits agree, -1 otherwise.
pub fn position_match(x: bool, y: bool) -> f64 {
    if x == y {
        1.0
    } else {
        -1.0
    }
}

fn sanitize(f: f64) -> f64 {
    if f.is_nan() {
        f64::INFINITY
    } else {
        f
    }
}

/// Evaluates and counts.
struct Counted<F> {
    fitness: F,
    calls: usize,
}

impl<F: FnMut(&BitVector) -> f64> Counted<F> {
    fn new(fitness: F) -> Self {
        Self { fitness, calls: 0 }
    }

    fn eval(&mut self, mask: &BitVector) -> f64 {
        self.calls += 1;
        sanitize((self.fitness)(mask))
    }
}

/// Index of the strictly smallest value, first index on ties.
fn argmin(values: impl Iterator<Item = f64>) -> Option<(usize, f64)> {
    values.enumerate().fold(None, |best, (i, v)| match best {
        Some((_, b)) if v >= b => best,
        None if v.is_nan() => None,
        _ => Some((i, v)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_values() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!((sigmoid(6.0) - 0.9975).abs() < 1e-4);
        assert!((sigmoid(-6.0) - 0.0025).abs() < 1e-4);
        assert!((sigmoid(0.2) - 0.5498).abs() < 1e-4);
        assert!((sigmoid(-0.2) - 0.4502).abs() < 1e-4);
        assert!((sigmoid(4.0) - 0.9820).abs() < 1e-4);
        let mut prev = 0.0;
        for i in -100..=100 {
            let s = sigmoid(i as f64 * 0.1);
            assert!(s > prev && s < 1.0);
            prev = s;
        }
    }

    #[test]
    fn position_match_table() {
        assert_eq!(position_match(true, true), 1.0);
        assert_eq!(position_match(false, false), 1.0);
        assert_eq!(position_match(false, true), -1.0);
        assert_eq!(position_match(true, false), -1.0);
        for x in [false, true] {
            for y in [false, true] {
                assert_eq!(position_match(x, y), position_match(y, x));
            }
        }
    }

    #[test]
    fn inertia_schedule() {
        let cfg = SwarmConfig::default();
        assert_eq!(cfg.inertia(0), 0.9);
        assert!((cfg.inertia(199) - 0.4).abs() < 1e-15);
        assert!((cfg.inertia(99) - (0.9 - 0.5 * 99.0 / 199.0)).abs() < 1e-15);
    }

    #[test]
    fn bit_strings() {
        let b: BitVector = "10010".parse().unwrap();
        assert_eq!(b.len(), 5);
        assert_eq!(b.set_bits().collect::<Vec<_>>(), vec![0, 3]);
        assert_eq!(b.to_string(), "10010");
        assert_eq!(b.complement().to_string(), "01101");
        assert!("10a".parse::<BitVector>().is_err());
    }

    #[test]
    fn argmin_keeps_first() {
        assert_eq!(argmin([3.0, 1.0, 1.0].into_iter()), Some((1, 1.0)));
        assert_eq!(
            argmin([f64::INFINITY, f64::INFINITY].into_iter()),
            Some((0, f64::INFINITY))
        );
    }
}
