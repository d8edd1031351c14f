//! Forecast accuracy metrics and the group-comparison tests used to rank
//! models: one-way ANOVA and Tukey's HSD.

mod anova;
mod metrics;
pub mod special;
mod tukey;

pub use anova::{anova_from_sums, anova_oneway, AnovaResult};
pub use metrics::{mape, mean, metric_triple, nrmse, rmse, sample_std, MetricTriple};
pub use tukey::{ptukey, qtukey, tukey_hsd, PairComparison, TukeyResult};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("length mismatch: {0} actual vs {1} predicted")]
    LengthMismatch(usize, usize),
    #[error("empty input")]
    Empty,
    #[error("actual value is zero at index {0}")]
    ZeroActual(usize),
    #[error("mean of actual values is zero")]
    ZeroMean,
    #[error("need at least 2 groups, got {0}")]
    TooFewGroups(usize),
    #[error("group {0} is empty")]
    EmptyGroup(usize),
    #[error("unequal group sizes ({0} vs {1}); the design must be balanced")]
    Unbalanced(usize, usize),
    #[error("significance level must lie in (0, 1), got {0}")]
    BadAlpha(f64),
    #[error("no within-group degrees of freedom")]
    NoResidualDf,
}
