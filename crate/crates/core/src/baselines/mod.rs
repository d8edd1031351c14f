//! Comparison forecasters: additive Holt–Winters with PSO-tuned smoothing
//! constants, and a one-hidden-layer feedforward network.

mod holt_winters;
mod mlp;

pub use holt_winters::{
    default_hw_swarm, hw_fit_forecast, hw_one_step_mape, hw_optimize, hw_smooth, HoltWintersFit,
    HoltWintersParams, HoltWintersState,
};
pub use mlp::{
    mlp_gradient, mlp_loss, mlp_numerical_gradient, mlp_predict, mlp_train, MlpConfig, MlpModel,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BaselineError {
    #[error("smoothing parameter {name} = {value} is outside [0, 1]")]
    ParamOutOfRange { name: &'static str, value: f64 },
    #[error("season length must be at least 2, got {0}")]
    SeasonLength(usize),
    #[error("need at least two seasons ({needed} points), got {found}")]
    TooShort { needed: usize, found: usize },
    #[error("network needs at least one hidden unit and one input")]
    EmptyNetwork,
    #[error("input has {found} features, network expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("training diverged: non-finite loss at epoch {0}")]
    Diverged(usize),
    #[error("training set is empty")]
    NoData,
}
