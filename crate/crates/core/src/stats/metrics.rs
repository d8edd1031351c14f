use super::StatsError;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricTriple {
    /// Percent.
    pub mape: f64,
    /// Same units as the series.
    pub rmse: f64,
    pub nrmse: f64,
}

impl MetricTriple {
    pub fn as_array(&self) -> [f64; 3] {
        [self.mape, self.rmse, self.nrmse]
    }
}

fn check(actual: &[f64], predicted: &[f64]) -> Result<(), StatsError> {
    if actual.len() != predicted.len() {
        return Err(StatsError::LengthMismatch(actual.len(), predicted.len()));
    }
    if actual.is_empty() {
        return Err(StatsError::Empty);
    }
    Ok(())
}

/// Mean absolute percentage error, in percent.
pub fn mape(actual: &[f64], predicted: &[f64]) -> Result<f64, StatsError> {
    check(actual, predicted)?;
    let mut total = 0.0;
    for (i, (&y, &p)) in actual.iter().zip(predicted).enumerate() {
        if y == 0.0 {
            return Err(StatsError::ZeroActual(i));
        }
        total += ((y - p) / y).abs();
    }
    Ok(total / actual.len() as f64 * 100.0)
}

pub fn rmse(actual: &[f64], predicted: &[f64]) -> Result<f64, StatsError> {
    check(actual, predicted)?;
    let sse: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(y, p)| (y - p) * (y - p))
        .sum();
    Ok(libm::sqrt(sse / actual.len() as f64))
}

/// RMSE divided by the mean of the actual values.
pub fn nrmse(actual: &[f64], predicted: &[f64]) -> Result<f64, StatsError> {
    let r = rmse(actual, predicted)?;
    let m = mean(actual);
    if m == 0.0 {
        return Err(StatsError::ZeroMean);
    }
    Ok(r / m)
}

pub fn metric_triple(actual: &[f64], predicted: &[f64]) -> Result<MetricTriple, StatsError> {
    Ok(MetricTriple {
        mape: mape(actual, predicted)?,
        rmse: rmse(actual, predicted)?,
        nrmse: nrmse(actual, predicted)?,
    })
}

/// Arithmetic mean; `NaN` for an empty slice.
pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (`n − 1` denominator); 0 for fewer than two values.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    libm::sqrt(ss / (xs.len() - 1) as f64)
}
