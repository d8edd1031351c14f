//! Wrapper feature selection for monthly electricity-consumption forecasting.
//!
//! A lag-feature mask over the candidate set `{1..12, 24, 36}` is searched by a
//! bitstring metaheuristic (MDPSO, DPSO, Boolean PSO or a binary GA), each mask
//! being scored by the in-sample MAPE of an ε-SVR trained on the selected lags.
//! The crate also carries the comparison baselines (additive Holt–Winters with
//! PSO-tuned smoothing, a one-hidden-layer network) and the evaluation
//! statistics (MAPE/RMSE/NRMSE, one-way ANOVA, Tukey HSD).
//!
//! The crate is `no_std` and only needs `alloc`. File IO, configuration and the
//! command-line runner live in the companion `mdpso` crate.
//!
//! ## Crate features
//!
//! - `serde` - derives `Serialize`/`Deserialize` for models and reports.

#![cfg_attr(not(test), no_std)]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod baselines;
pub mod binopt;
pub mod rng;
pub mod stats;
pub mod svr;
pub mod timeseries;
pub mod wrapper;

pub use binopt::{BitVector, GaConfig, OptimizerResult, SwarmConfig};
pub use stats::MetricTriple;
pub use svr::{SvrModel, SvrParams};
pub use timeseries::{LagSpec, MonthlySeries, SplitSpec, SupervisedMatrix, YearMonth};
pub use wrapper::{ForecastReport, ModelKind, PipelineConfig, RunStatistics};
