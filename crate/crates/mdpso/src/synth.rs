//! The bundled synthetic benchmark: `y(t) = 0.6·y(t−1) + 0.4·y(t−12) + e(t)`
//! with Gaussian noise, seeded by a sinusoidal first year.

use mdpso_core::rng;
use mdpso_core::timeseries::{MonthlySeries, YearMonth};
use rand_distr::{Distribution, Normal};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub start: YearMonth,
    pub months: usize,
    pub level: f64,
    pub amplitude: f64,
    pub noise_sd: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            start: YearMonth {
                year: 2005,
                month: 1,
            },
            months: 150,
            level: 100.0,
            amplitude: 10.0,
            noise_sd: 1.0,
            seed: 2005,
        }
    }
}

pub fn lag_series(config: &SynthConfig) -> MonthlySeries {
    let mut rng = rng::seeded(config.seed);
    let noise = Normal::new(0.0, config.noise_sd).expect("finite noise sd");
    let mut y: Vec<f64> = (0..12)
        .map(|m| {
            config.level + config.amplitude * (2.0 * std::f64::consts::PI * m as f64 / 12.0).sin()
        })
        .collect();
    while y.len() < config.months {
        let t = y.len();
        y.push(0.6 * y[t - 1] + 0.4 * y[t - 12] + noise.sample(&mut rng));
    }
    y.truncate(config.months);
    // Rounding keeps the CSV short and exactly reproducible.
    let y = y.into_iter().map(|v| (v * 1e4).round() / 1e4).collect();
    MonthlySeries::new(config.start, y).expect("level keeps the series positive")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::series_to_csv;

    #[test]
    fn bundled_file_matches_generator() {
        let csv = series_to_csv(&lag_series(&SynthConfig::default()));
        if std::env::var_os("MDPSO_REGENERATE").is_some() {
            std::fs::write(
                concat!(env!("CARGO_MANIFEST_DIR"), "/data/synthetic.csv"),
                &csv,
            )
            .unwrap();
        }
        assert_eq!(csv, include_str!("../data/synthetic.csv"));
    }

    #[test]
    fn follows_the_recursion() {
        let cfg = SynthConfig {
            noise_sd: 1e-12,
            ..SynthConfig::default()
        };
        let y = lag_series(&cfg);
        let v = y.values();
        assert_eq!(v.len(), 150);
        for t in 12..v.len() {
            assert!((v[t] - 0.6 * v[t - 1] - 0.4 * v[t - 12]).abs() < 2e-4);
        }
    }
}
