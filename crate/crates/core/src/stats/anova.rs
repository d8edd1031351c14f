use super::special::f_survival;
use super::StatsError;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AnovaResult {
    pub ssa: f64,
    pub sse: f64,
    pub df_between: usize,
    pub df_within: usize,
    pub f_stat: f64,
    pub p_value: f64,
    /// Set when the within-group sum of squares is zero, so the F ratio is
    /// not a proper statistic.
    pub degenerate: bool,
}

/// One-way ANOVA from precomputed sums of squares for `k` groups and `n`
/// observations in total.
///
/// With `sse == 0` the result is flagged degenerate: `F = +∞, p = 0` if the
/// group means differ, `F = 0, p = 1` if they do not.
pub fn anova_from_sums(ssa: f64, sse: f64, k: usize, n: usize) -> Result<AnovaResult, StatsError> {
    if k < 2 {
        return Err(StatsError::TooFewGroups(k));
    }
    if n <= k {
        return Err(StatsError::NoResidualDf);
    }
    let df_between = k - 1;
    let df_within = n - k;
    let (f_stat, p_value) = if ssa <= 0.0 {
        (0.0, 1.0)
    } else if sse <= 0.0 {
        (f64::INFINITY, 0.0)
    } else {
        let f = (ssa / df_between as f64) / (sse / df_within as f64);
        (
            f,
            f_survival(f, df_between as f64, df_within as f64).clamp(0.0, 1.0),
        )
    };
    Ok(AnovaResult {
        ssa,
        sse,
        df_between,
        df_within,
        f_stat,
        p_value,
        degenerate: sse <= 0.0,
    })
}

pub fn anova_oneway(groups: &[&[f64]]) -> Result<AnovaResult, StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::TooFewGroups(groups.len()));
    }
    if let Some(i) = groups.iter().position(|g| g.is_empty()) {
        return Err(StatsError::EmptyGroup(i));
    }
    let n: usize = groups.iter().map(|g| g.len()).sum();
    let grand = groups.iter().flat_map(|g| g.iter()).sum::<f64>() / n as f64;
    let mut ssa = 0.0;
    let mut sse = 0.0;
    for g in groups {
        let m = g.iter().sum::<f64>() / g.len() as f64;
        ssa += g.len() as f64 * (m - grand) * (m - grand);
        sse += g.iter().map(|x| (x - m) * (x - m)).sum::<f64>();
    }
    anova_from_sums(ssa, sse, groups.len(), n)
}
