//! Additive Holt–Winters.
//!
//! The first season initialises the state: level is its mean, trend is the
//! difference between the second and first season means divided by the season
//! length, and seasonal terms are the first season's deviations from its
//! mean. Recursions then run from the second season onward, so one-step
//! forecasts exist for every point after the first season.

use alloc::vec::Vec;

use super::BaselineError;
use crate::binopt::{run_cpso, SwarmConfig};
use crate::stats::mape;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HoltWintersParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub season_length: usize,
}

impl HoltWintersParams {
    /// Monthly seasonality.
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self, BaselineError> {
        Self::with_season(alpha, beta, gamma, 12)
    }

    pub fn with_season(
        alpha: f64,
        beta: f64,
        gamma: f64,
        season_length: usize,
    ) -> Result<Self, BaselineError> {
        for (name, value) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(BaselineError::ParamOutOfRange { name, value });
            }
        }
        if season_length < 2 {
            return Err(BaselineError::SeasonLength(season_length));
        }
        Ok(Self {
            alpha,
            beta,
            gamma,
            season_length,
        })
    }
}

/// `seasonal[j]` is the component for points whose index is `j` modulo the
/// season length, counted from the start of the fitted data.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HoltWintersState {
    pub level: f64,
    pub trend: f64,
    pub seasonal: Vec<f64>,
}

impl HoltWintersState {
    pub fn initial(values: &[f64], season_length: usize) -> Result<Self, BaselineError> {
        let m = season_length;
        if m < 2 {
            return Err(BaselineError::SeasonLength(m));
        }
        if values.len() < 2 * m {
            return Err(BaselineError::TooShort {
                needed: 2 * m,
                found: values.len(),
            });
        }
        let mean1 = values[..m].iter().sum::<f64>() / m as f64;
        let mean2 = values[m..2 * m].iter().sum::<f64>() / m as f64;
        let mut seasonal: Vec<f64> = values[..m].iter().map(|y| y - mean1).collect();
        let drift = seasonal.iter().sum::<f64>() / m as f64;
        seasonal.iter_mut().for_each(|s| *s -= drift);
        Ok(Self {
            level: mean1,
            trend: (mean2 - mean1) / m as f64,
            seasonal,
        })
    }

    /// Forecast `h ≥ 1` steps past index `t`, the last point absorbed.
    pub fn forecast(&self, t: usize, h: usize) -> f64 {
        let m = self.seasonal.len();
        self.level + h as f64 * self.trend + self.seasonal[(t + h) % m]
    }

    fn update(&mut self, t: usize, y: f64, p: &HoltWintersParams) {
        let j = t % self.seasonal.len();
        let prev = self.level;
        self.level = p.alpha * (y - self.seasonal[j]) + (1.0 - p.alpha) * (prev + self.trend);
        self.trend = p.beta * (self.level - prev) + (1.0 - p.beta) * self.trend;
        self.seasonal[j] = p.gamma * (y - self.level) + (1.0 - p.gamma) * self.seasonal[j];
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HoltWintersFit {
    /// State after the last point.
    pub state: HoltWintersState,
    /// One-step forecasts for points `season_length..n`.
    pub one_step: Vec<f64>,
}

/// Runs the recursions over `values`.
pub fn hw_smooth(
    values: &[f64],
    params: &HoltWintersParams,
) -> Result<HoltWintersFit, BaselineError> {
    let m = params.season_length;
    let mut state = HoltWintersState::initial(values, m)?;
    let mut one_step = Vec::with_capacity(values.len() - m);
    for (t, &y) in values.iter().enumerate().skip(m) {
        one_step.push(state.forecast(t - 1, 1));
        state.update(t, y, params);
    }
    Ok(HoltWintersFit { state, one_step })
}

/// Forecasts `horizon` points past the end of `train`.
pub fn hw_fit_forecast(
    train: &[f64],
    params: &HoltWintersParams,
    horizon: usize,
) -> Result<Vec<f64>, BaselineError> {
    let fit = hw_smooth(train, params)?;
    let last = train.len() - 1;
    Ok((1..=horizon).map(|h| fit.state.forecast(last, h)).collect())
}

/// In-sample one-step-ahead MAPE (percent) over the points after the first
/// season. Non-finite if the data contain zeros.
pub fn hw_one_step_mape(train: &[f64], params: &HoltWintersParams) -> Result<f64, BaselineError> {
    let fit = hw_smooth(train, params)?;
    let m = params.season_length;
    Ok(mape(&train[m..], &fit.one_step).unwrap_or(f64::INFINITY))
}

/// Swarm settings for the smoothing-constant search. The velocity clamp is
/// scaled to the unit box.
pub fn default_hw_swarm() -> SwarmConfig {
    SwarmConfig {
        v_max: 0.2,
        ..SwarmConfig::default()
    }
}

/// Minimises one-step training MAPE over `(α, β, γ) ∈ [0, 1]³`.
pub fn hw_optimize(
    train: &[f64],
    season_length: usize,
    config: &SwarmConfig,
) -> Result<HoltWintersParams, BaselineError> {
    // Validate length once so the objective can't fail.
    HoltWintersState::initial(train, season_length)?;
    let result = run_cpso(&[(0.0, 1.0); 3], config, |x| {
        HoltWintersParams::with_season(x[0], x[1], x[2], season_length)
            .and_then(|p| hw_one_step_mape(train, &p))
            .unwrap_or(f64::INFINITY)
    });
    let b = &result.best;
    HoltWintersParams::with_season(b[0], b[1], b[2], season_length)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    const PATTERN: [f64; 12] = [5.0, 7.0, 9.0, 8.0, 6.0, 4.0, 3.0, 4.0, 6.0, 8.0, 10.0, 6.0];

    fn repeated(seasons: usize) -> Vec<f64> {
        (0..seasons * 12).map(|t| PATTERN[t % 12] + 100.0).collect()
    }

    #[test]
    fn frozen_pattern_is_reproduced() {
        let y = repeated(4);
        let p = HoltWintersParams::new(0.0, 0.0, 0.0).unwrap();
        let fc = hw_fit_forecast(&y, &p, 24).unwrap();
        for (h, f) in fc.iter().enumerate() {
            assert!((f - (PATTERN[h % 12] + 100.0)).abs() < 1e-12);
        }
        assert!(hw_one_step_mape(&y, &p).unwrap() < 1e-12);
    }

    #[test]
    fn constant_series_is_a_fixed_point() {
        let y = vec![42.0; 40];
        for (a, b, g) in [(0.0, 0.0, 0.0), (0.3, 0.1, 0.9), (1.0, 1.0, 1.0)] {
            let p = HoltWintersParams::new(a, b, g).unwrap();
            for f in hw_fit_forecast(&y, &p, 15).unwrap() {
                assert!((f - 42.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn initial_seasonals_sum_to_zero() {
        let y: Vec<f64> = (0..36).map(|t| 50.0 + t as f64 + PATTERN[t % 12]).collect();
        let s = HoltWintersState::initial(&y, 12).unwrap();
        assert!(s.seasonal.iter().sum::<f64>().abs() < 1e-12);
        assert!((s.trend - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_gamma_keeps_seasonals() {
        let y: Vec<f64> = (0..48)
            .map(|t| 20.0 + 0.5 * t as f64 + PATTERN[(t * 7) % 12])
            .collect();
        let init = HoltWintersState::initial(&y, 12).unwrap();
        let fit = hw_smooth(&y, &HoltWintersParams::new(0.4, 0.2, 0.0).unwrap()).unwrap();
        assert_eq!(fit.state.seasonal, init.seasonal);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            HoltWintersParams::new(1.5, 0.0, 0.0),
            Err(BaselineError::ParamOutOfRange { name: "alpha", .. })
        ));
        let p = HoltWintersParams::new(0.5, 0.5, 0.5).unwrap();
        assert_eq!(
            hw_fit_forecast(&[1.0; 23], &p, 1),
            Err(BaselineError::TooShort {
                needed: 24,
                found: 23
            })
        );
    }

    #[test]
    fn optimizer_stays_in_box_and_is_deterministic() {
        let y: Vec<f64> = (0..60)
            .map(|t| 100.0 + t as f64 + 5.0 * PATTERN[t % 12])
            .collect();
        let cfg = SwarmConfig {
            iterations: 30,
            ..default_hw_swarm()
        };
        let p = hw_optimize(&y, 12, &cfg).unwrap();
        for v in [p.alpha, p.beta, p.gamma] {
            assert!((0.0..=1.0).contains(&v));
        }
        assert_eq!(p, hw_optimize(&y, 12, &cfg).unwrap());
    }
}
