//! Monthly series, lag matrices, min-max scaling and the train/test split.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

use crate::binopt::BitVector;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("invalid month `{0}`, expected YYYY-MM")]
    BadDate(String),
    #[error("calendar gap: missing {missing} (next observation is {found})")]
    Gap {
        missing: YearMonth,
        found: YearMonth,
    },
    #[error("months out of order at {0}")]
    NotIncreasing(YearMonth),
    #[error("non-positive value {value} at {month}")]
    NonPositive { month: YearMonth, value: f64 },
    #[error("series is empty")]
    Empty,
    #[error("series of length {len} is too short for maximum lag {max_lag}")]
    TooShort { len: usize, max_lag: usize },
    #[error("invalid lag set: {0}")]
    InvalidLags(&'static str),
    #[error("mask has {found} bits but the matrix has {expected} columns")]
    MaskLength { expected: usize, found: usize },
    #[error("empty feature set")]
    EmptyFeatureSet,
    #[error("matrix has {found} columns, scaling was fitted on {expected}")]
    ColumnMismatch { expected: usize, found: usize },
    #[error("{0} partition is empty")]
    EmptyPartition(&'static str),
}

/// A calendar month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct YearMonth {
    pub year: i32,
    /// 1..=12
    pub month: u8,
}

impl YearMonth {
    pub fn new(year: i32, month: u8) -> Option<Self> {
        (1..=12).contains(&month).then_some(Self { year, month })
    }

    /// Months since year 0, used for offset arithmetic.
    fn ordinal(self) -> i64 {
        i64::from(self.year) * 12 + i64::from(self.month) - 1
    }

    fn from_ordinal(ord: i64) -> Self {
        Self {
            year: ord.div_euclid(12) as i32,
            month: (ord.rem_euclid(12) + 1) as u8,
        }
    }

    pub fn succ(self) -> Self {
        self.offset(1)
    }

    pub fn offset(self, months: i64) -> Self {
        Self::from_ordinal(self.ordinal() + months)
    }

    /// Signed number of months from `self` to `later`.
    pub fn months_until(self, later: YearMonth) -> i64 {
        later.ordinal() - self.ordinal()
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for YearMonth {
    type Err = SeriesError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SeriesError::BadDate(s.into());
        let (y, m) = s.trim().split_once('-').ok_or_else(bad)?;
        if y.len() != 4 || m.len() != 2 {
            return Err(bad());
        }
        let year: i32 = y.parse().map_err(|_| bad())?;
        let month: u8 = m.parse().map_err(|_| bad())?;
        YearMonth::new(year, month).ok_or_else(bad)
    }
}

/// Consecutive monthly observations, all strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct MonthlySeries {
    start: YearMonth,
    values: Vec<f64>,
}

impl MonthlySeries {
    pub fn new(start: YearMonth, values: Vec<f64>) -> Result<Self, SeriesError> {
        if values.is_empty() {
            return Err(SeriesError::Empty);
        }
        for (i, &value) in values.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(SeriesError::NonPositive {
                    month: start.offset(i as i64),
                    value,
                });
            }
        }
        Ok(Self { start, values })
    }

    /// Builds a series from dated points, rejecting gaps and disorder.
    pub fn from_points<I>(points: I) -> Result<Self, SeriesError>
    where
        I: IntoIterator<Item = (YearMonth, f64)>,
    {
        let mut iter = points.into_iter();
        let (start, first) = iter.next().ok_or(SeriesError::Empty)?;
        let mut values = alloc::vec![first];
        let mut prev = start;
        for (month, value) in iter {
            if month <= prev {
                return Err(SeriesError::NotIncreasing(month));
            }
            if month != prev.succ() {
                return Err(SeriesError::Gap {
                    missing: prev.succ(),
                    found: month,
                });
            }
            values.push(value);
            prev = month;
        }
        Self::new(start, values)
    }

    pub fn start(&self) -> YearMonth {
        self.start
    }

    pub fn end(&self) -> YearMonth {
        self.start.offset(self.values.len() as i64 - 1)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn month_at(&self, index: usize) -> YearMonth {
        self.start.offset(index as i64)
    }

    pub fn iter(&self) -> impl Iterator<Item = (YearMonth, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| (self.month_at(i), v))
    }

    /// Splits into (through `boundary`, after `boundary`). Either side may be empty
    /// only if the boundary lies outside the series, which is reported as an error.
    pub fn split_at(&self, boundary: YearMonth) -> Result<(Vec<f64>, Vec<f64>), SeriesError> {
        let cut = self.start.months_until(boundary) + 1;
        if cut <= 0 {
            return Err(SeriesError::EmptyPartition("train"));
        }
        let cut = cut as usize;
        if cut >= self.values.len() {
            return Err(SeriesError::EmptyPartition("test"));
        }
        Ok((self.values[..cut].to_vec(), self.values[cut..].to_vec()))
    }
}

/// Ordered set of positive month offsets used as candidate inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LagSpec {
    lags: Vec<usize>,
}

impl LagSpec {
    /// Sorts the lags; rejects zero and duplicates.
    pub fn new(mut lags: Vec<usize>) -> Result<Self, SeriesError> {
        if lags.is_empty() {
            return Err(SeriesError::InvalidLags("no lags"));
        }
        lags.sort_unstable();
        if lags[0] == 0 {
            return Err(SeriesError::InvalidLags("lag 0"));
        }
        if lags.windows(2).any(|w| w[0] == w[1]) {
            return Err(SeriesError::InvalidLags("duplicate lag"));
        }
        Ok(Self { lags })
    }

    pub fn lags(&self) -> &[usize] {
        &self.lags
    }

    pub fn len(&self) -> usize {
        self.lags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lags.is_empty()
    }

    pub fn max_lag(&self) -> usize {
        *self.lags.last().expect("non-empty by construction")
    }
}

impl Default for LagSpec {
    /// The previous twelve months plus the same month one and two years back.
    fn default() -> Self {
        let mut lags: Vec<usize> = (1..=12).collect();
        lags.extend([24, 36]);
        Self { lags }
    }
}

/// Rows of (lagged inputs, target) with the target's month as origin.
///
/// Features are stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SupervisedMatrix {
    features: Vec<f64>,
    targets: Vec<f64>,
    origins: Vec<YearMonth>,
    lags: Vec<usize>,
}

impl SupervisedMatrix {
    /// Assembles a matrix from raw parts. `features.len()` must equal
    /// `targets.len() * lags.len()`.
    pub fn from_parts(
        features: Vec<f64>,
        targets: Vec<f64>,
        origins: Vec<YearMonth>,
        lags: Vec<usize>,
    ) -> Self {
        assert_eq!(features.len(), targets.len() * lags.len());
        assert_eq!(origins.len(), targets.len());
        Self {
            features,
            targets,
            origins,
            lags,
        }
    }

    /// Unlabelled-origin constructor for toy data (origins start at 2000-01).
    pub fn from_rows(rows: &[(&[f64], f64)]) -> Self {
        let n_cols = rows.first().map_or(0, |r| r.0.len());
        let mut features = Vec::with_capacity(rows.len() * n_cols);
        let mut targets = Vec::with_capacity(rows.len());
        for (x, y) in rows {
            assert_eq!(x.len(), n_cols);
            features.extend_from_slice(x);
            targets.push(*y);
        }
        let base = YearMonth {
            year: 2000,
            month: 1,
        };
        let origins = (0..rows.len()).map(|i| base.offset(i as i64)).collect();
        Self::from_parts(features, targets, origins, (1..=n_cols).collect())
    }

    pub fn n_rows(&self) -> usize {
        self.targets.len()
    }

    pub fn n_cols(&self) -> usize {
        self.lags.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.n_cols();
        &self.features[i * c..(i + 1) * c]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.n_rows()).map(move |i| self.row(i))
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn origins(&self) -> &[YearMonth] {
        &self.origins
    }

    /// The lag carried by each column.
    pub fn column_lags(&self) -> &[usize] {
        &self.lags
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows().map(move |r| r[j])
    }

    /// Keeps the columns whose mask bit is set, in order.
    pub fn apply_mask(&self, mask: &BitVector) -> Result<SupervisedMatrix, SeriesError> {
        if mask.len() != self.n_cols() {
            return Err(SeriesError::MaskLength {
                expected: self.n_cols(),
                found: mask.len(),
            });
        }
        let keep: Vec<usize> = mask.set_bits().collect();
        if keep.is_empty() {
            return Err(SeriesError::EmptyFeatureSet);
        }
        let mut features = Vec::with_capacity(self.n_rows() * keep.len());
        for row in self.rows() {
            features.extend(keep.iter().map(|&j| row[j]));
        }
        Ok(SupervisedMatrix {
            features,
            targets: self.targets.clone(),
            origins: self.origins.clone(),
            lags: keep.iter().map(|&j| self.lags[j]).collect(),
        })
    }

    fn select_rows(&self, range: core::ops::Range<usize>) -> SupervisedMatrix {
        let c = self.n_cols();
        SupervisedMatrix {
            features: self.features[range.start * c..range.end * c].to_vec(),
            targets: self.targets[range.clone()].to_vec(),
            origins: self.origins[range].to_vec(),
            lags: self.lags.clone(),
        }
    }
}

/// Lays out one row per target month whose every lag is available.
///
/// Row `r` targets series position `max_lag + r`; its feature `j` is the
/// value `lags[j]` months earlier.
pub fn build_supervised(
    series: &MonthlySeries,
    spec: &LagSpec,
) -> Result<SupervisedMatrix, SeriesError> {
    let max_lag = spec.max_lag();
    if series.len() <= max_lag {
        return Err(SeriesError::TooShort {
            len: series.len(),
            max_lag,
        });
    }
    let values = series.values();
    let n_rows = series.len() - max_lag;
    let mut features = Vec::with_capacity(n_rows * spec.len());
    let mut targets = Vec::with_capacity(n_rows);
    let mut origins = Vec::with_capacity(n_rows);
    for t in max_lag..series.len() {
        features.extend(spec.lags().iter().map(|&lag| values[t - lag]));
        targets.push(values[t]);
        origins.push(series.month_at(t));
    }
    Ok(SupervisedMatrix {
        features,
        targets,
        origins,
        lags: spec.lags().to_vec(),
    })
}

/// Per-column min and max for features and target, fitted on training rows.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScalingParams {
    pub feature_min: Vec<f64>,
    pub feature_max: Vec<f64>,
    pub target_min: f64,
    pub target_max: f64,
}

fn scale(x: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        (x - lo) / (hi - lo)
    } else {
        0.5
    }
}

fn unscale(s: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        lo + s * (hi - lo)
    } else {
        lo
    }
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

impl ScalingParams {
    /// Fits min-max scaling. Call with the training partition only.
    pub fn fit(train: &SupervisedMatrix) -> Self {
        let (feature_min, feature_max) = (0..train.n_cols())
            .map(|j| min_max(train.column(j)))
            .unzip();
        let (target_min, target_max) = min_max(train.targets().iter().copied());
        Self {
            feature_min,
            feature_max,
            target_min,
            target_max,
        }
    }

    pub fn n_cols(&self) -> usize {
        self.feature_min.len()
    }

    fn check(&self, m: &SupervisedMatrix) -> Result<(), SeriesError> {
        if m.n_cols() != self.n_cols() {
            return Err(SeriesError::ColumnMismatch {
                expected: self.n_cols(),
                found: m.n_cols(),
            });
        }
        Ok(())
    }

    pub fn scale_features(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(j, &v)| scale(v, self.feature_min[j], self.feature_max[j]))
            .collect()
    }

    pub fn scale_target(&self, y: f64) -> f64 {
        scale(y, self.target_min, self.target_max)
    }

    pub fn unscale_target(&self, s: f64) -> f64 {
        unscale(s, self.target_min, self.target_max)
    }

    pub fn transform(&self, m: &SupervisedMatrix) -> Result<SupervisedMatrix, SeriesError> {
        self.check(m)?;
        let mut features = Vec::with_capacity(m.features.len());
        for row in m.rows() {
            features.extend(self.scale_features(row));
        }
        Ok(SupervisedMatrix {
            features,
            targets: m.targets.iter().map(|&y| self.scale_target(y)).collect(),
            origins: m.origins.clone(),
            lags: m.lags.clone(),
        })
    }

    pub fn inverse_transform(&self, m: &SupervisedMatrix) -> Result<SupervisedMatrix, SeriesError> {
        self.check(m)?;
        let c = m.n_cols();
        let features = m
            .features
            .iter()
            .enumerate()
            .map(|(k, &s)| unscale(s, self.feature_min[k % c], self.feature_max[k % c]))
            .collect();
        Ok(SupervisedMatrix {
            features,
            targets: m.targets.iter().map(|&s| self.unscale_target(s)).collect(),
            origins: m.origins.clone(),
            lags: m.lags.clone(),
        })
    }
}

/// Rows whose origin is at or before `boundary` train; the rest test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SplitSpec {
    pub boundary: YearMonth,
}

impl SplitSpec {
    pub fn new(boundary: YearMonth) -> Self {
        Self { boundary }
    }

    pub fn split(
        &self,
        m: &SupervisedMatrix,
    ) -> Result<(SupervisedMatrix, SupervisedMatrix), SeriesError> {
        let cut = m.origins.partition_point(|&o| o <= self.boundary);
        if cut == 0 {
            return Err(SeriesError::EmptyPartition("train"));
        }
        if cut == m.n_rows() {
            return Err(SeriesError::EmptyPartition("test"));
        }
        Ok((m.select_rows(0..cut), m.select_rows(cut..m.n_rows())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ym(s: &str) -> YearMonth {
        s.parse().unwrap()
    }

    fn series(values: &[f64]) -> MonthlySeries {
        MonthlySeries::new(ym("2005-01"), values.to_vec()).unwrap()
    }

    #[test]
    fn parses_months() {
        assert_eq!(
            ym("2016-12"),
            YearMonth {
                year: 2016,
                month: 12
            }
        );
        assert!("2016-13".parse::<YearMonth>().is_err());
        assert!("2016-1".parse::<YearMonth>().is_err());
        assert!("201612".parse::<YearMonth>().is_err());
        assert_eq!(ym("2016-12").succ(), ym("2017-01"));
        assert_eq!(ym("2017-01").offset(-13), ym("2015-12"));
        assert_eq!(ym("2005-01").months_until(ym("2016-12")), 143);
    }

    #[test]
    fn from_points_length_three() {
        let s = MonthlySeries::from_points([
            (ym("2005-01"), 10.0),
            (ym("2005-02"), 11.0),
            (ym("2005-03"), 12.0),
        ])
        .unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.values(), &[10.0, 11.0, 12.0]);
        assert_eq!(s.end(), ym("2005-03"));
    }

    #[test]
    fn gap_names_missing_month() {
        let err =
            MonthlySeries::from_points([(ym("2005-01"), 1.0), (ym("2005-03"), 1.0)]).unwrap_err();
        assert_eq!(
            err,
            SeriesError::Gap {
                missing: ym("2005-02"),
                found: ym("2005-03")
            }
        );
        assert!(err.to_string().contains("2005-02"));
    }

    #[test]
    fn rejects_non_positive() {
        let err =
            MonthlySeries::from_points([(ym("2010-05"), 3.0), (ym("2010-06"), 0.0)]).unwrap_err();
        assert!(matches!(err, SeriesError::NonPositive { month, .. } if month == ym("2010-06")));
    }

    #[test]
    fn lag_spec_rules() {
        assert_eq!(LagSpec::default().len(), 14);
        assert_eq!(LagSpec::default().max_lag(), 36);
        assert_eq!(LagSpec::new(vec![12, 1]).unwrap().lags(), &[1, 12]);
        assert!(LagSpec::new(vec![1, 1]).is_err());
        assert!(LagSpec::new(vec![0, 3]).is_err());
        assert!(LagSpec::new(vec![]).is_err());
    }

    #[test]
    fn default_spec_on_forty_months() {
        let values: Vec<f64> = (1..=40).map(f64::from).collect();
        let m = build_supervised(&series(&values), &LagSpec::default()).unwrap();
        assert_eq!(m.n_rows(), 4);
        // First row targets position 36, i.e. the value 37.
        assert_eq!(m.targets()[0], 37.0);
        assert_eq!(m.row(0)[0], 36.0);
        assert_eq!(m.row(0)[13], 1.0);
        assert_eq!(m.origins()[0], ym("2008-01"));
    }

    #[test]
    fn single_lag() {
        let spec = LagSpec::new(vec![1]).unwrap();
        let m = build_supervised(&series(&[5.0, 7.0, 9.0]), &spec).unwrap();
        assert_eq!(m.n_rows(), 2);
        assert_eq!((m.row(0), m.targets()[0]), (&[5.0][..], 7.0));
        assert_eq!((m.row(1), m.targets()[1]), (&[7.0][..], 9.0));
    }

    #[test]
    fn too_short() {
        let err = build_supervised(&series(&[1.0; 36]), &LagSpec::default()).unwrap_err();
        assert_eq!(
            err,
            SeriesError::TooShort {
                len: 36,
                max_lag: 36
            }
        );
    }

    #[test]
    fn masks() {
        let values: Vec<f64> = (1..=40).map(f64::from).collect();
        let m = build_supervised(&series(&values), &LagSpec::default()).unwrap();
        assert_eq!(m.apply_mask(&BitVector::ones(14)).unwrap(), m);

        let mut bits = BitVector::zeros(14);
        bits.set(0, true);
        bits.set(11, true);
        let sel = m.apply_mask(&bits).unwrap();
        assert_eq!(sel.column_lags(), &[1, 12]);
        assert_eq!(sel.row(0), &[36.0, 25.0]);
        assert_eq!(sel.targets(), m.targets());

        assert_eq!(
            m.apply_mask(&BitVector::zeros(14)),
            Err(SeriesError::EmptyFeatureSet)
        );
        assert!(matches!(
            m.apply_mask(&BitVector::ones(3)),
            Err(SeriesError::MaskLength {
                expected: 14,
                found: 3
            })
        ));
    }

    #[test]
    fn scaling_examples() {
        let m = SupervisedMatrix::from_rows(&[
            (&[2.0, 3.0], 1.0),
            (&[4.0, 3.0], 2.0),
            (&[6.0, 3.0], 3.0),
        ]);
        let p = ScalingParams::fit(&m);
        let s = p.transform(&m).unwrap();
        assert_eq!(s.column(0).collect::<Vec<_>>(), vec![0.0, 0.5, 1.0]);
        assert_eq!(s.column(1).collect::<Vec<_>>(), vec![0.5, 0.5, 0.5]);
        assert_eq!(s.targets(), &[0.0, 0.5, 1.0]);
        assert_eq!(p.inverse_transform(&s).unwrap(), m);
    }

    #[test]
    fn split_partitions() {
        let values: Vec<f64> = (1..=48).map(f64::from).collect();
        let m = build_supervised(&series(&values), &LagSpec::default()).unwrap();
        // origins 2008-01 .. 2008-12
        let (train, test) = SplitSpec::new(ym("2008-08")).split(&m).unwrap();
        assert_eq!(train.n_rows(), 8);
        assert_eq!(test.n_rows(), 4);
        assert!(train.origins().iter().all(|&o| o <= ym("2008-08")));
        assert!(test.origins().iter().all(|&o| o > ym("2008-08")));
        assert!(SplitSpec::new(ym("2008-12")).split(&m).is_err());
        assert!(SplitSpec::new(ym("2007-12")).split(&m).is_err());
    }

    proptest! {
        #[test]
        fn features_reconstruct_series(
            values in proptest::collection::vec(1.0f64..1000.0, 37..80),
            lag_bits in 1u64..(1 << 14),
        ) {
            let all = LagSpec::default();
            let lags: Vec<usize> = all.lags().iter().enumerate()
                .filter(|(j, _)| lag_bits >> j & 1 == 1).map(|(_, &l)| l).collect();
            let spec = LagSpec::new(lags).unwrap();
            let s = series(&values);
            let m = build_supervised(&s, &spec).unwrap();
            prop_assert_eq!(m.n_rows(), values.len() - spec.max_lag());
            for r in 0..m.n_rows() {
                let origin = m.origins()[r];
                let t = s.start().months_until(origin) as usize;
                prop_assert_eq!(m.targets()[r], values[t]);
                for (j, &lag) in spec.lags().iter().enumerate() {
                    prop_assert_eq!(m.row(r)[j], values[t - lag]);
                }
            }
        }

        #[test]
        fn scaling_round_trip(
            rows in proptest::collection::vec(proptest::collection::vec(-1e3f64..1e3, 4), 2..20),
        ) {
            let data: Vec<(&[f64], f64)> = rows.iter().map(|r| (&r[..3], r[3])).collect();
            let m = SupervisedMatrix::from_rows(&data);
            let p = ScalingParams::fit(&m);
            let s = p.transform(&m).unwrap();
            for row in s.rows() {
                prop_assert!(row.iter().all(|&v| (0.0..=1.0).contains(&v)));
            }
            let back = p.inverse_transform(&s).unwrap();
            for (a, b) in m.rows().zip(back.rows()) {
                for (x, y) in a.iter().zip(b) {
                    prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
                }
            }
            for (x, y) in m.targets().iter().zip(back.targets()) {
                prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
            }
        }

        #[test]
        fn split_is_exhaustive_and_disjoint(cut in 0usize..12) {
            let values: Vec<f64> = (1..=48).map(f64::from).collect();
            let m = build_supervised(&series(&values), &LagSpec::default()).unwrap();
            let boundary = m.origins()[cut];
            match SplitSpec::new(boundary).split(&m) {
                Ok((train, test)) => {
                    prop_assert_eq!(train.n_rows() + test.n_rows(), m.n_rows());
                    prop_assert_eq!(train.origins().last().copied(), Some(boundary));
                    prop_assert!(test.origins()[0] > boundary);
                }
                Err(e) => prop_assert_eq!(e, SeriesError::EmptyPartition("test")),
            }
        }
    }
}
