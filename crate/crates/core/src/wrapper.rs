//! The wrapper pipeline: a lag mask is scored by training the forecaster on
//! the masked training rows and measuring its in-sample MAPE, the best mask
//! found by the optimizer is refitted, and the refitted model is evaluated on
//! the held-out rows.
//!
//! Scaling is always fitted on the training partition after masking, so
//! nothing from the test rows reaches a fitted model or a fitness value.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

use crate::baselines::{
    default_hw_swarm, hw_one_step_mape, hw_optimize, hw_smooth, mlp_predict, mlp_train,
    BaselineError, HoltWintersParams, MlpConfig, MlpModel,
};
use crate::binopt::{
    run_bpso, run_dpso, run_ga, run_mdpso, BitVector, GaConfig, OptimizerResult, SwarmConfig,
};
use crate::stats::{mean, metric_triple, sample_std, MetricTriple, StatsError};
use crate::svr::{train_svr_with, SolverOptions, SvrError, SvrModel, SvrParams};
use crate::timeseries::{
    build_supervised, LagSpec, MonthlySeries, ScalingParams, SeriesError, SplitSpec,
    SupervisedMatrix, YearMonth,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WrapperError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Svr(#[from] SvrError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("model {0} has no feature-selection step")]
    NoOptimizer(ModelKind),
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("run {index} failed: {source}")]
    Run {
        index: usize,
        source: Box<WrapperError>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum OptimizerKind {
    None,
    Dpso,
    Mdpso,
    Bpso,
    Ga,
}

/// Which forecaster a model trains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LearnerKind {
    Svr,
    Mlp,
    HoltWinters,
}

/// The eight compared models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModelKind {
    Svr,
    DpsoSvr,
    BpsoSvr,
    GaSvr,
    MdpsoSvr,
    HoltWinters,
    Bpnn,
    MdpsoBpnn,
}

impl ModelKind {
    pub const ALL: [ModelKind; 8] = [
        ModelKind::Svr,
        ModelKind::DpsoSvr,
        ModelKind::BpsoSvr,
        ModelKind::GaSvr,
        ModelKind::MdpsoSvr,
        ModelKind::HoltWinters,
        ModelKind::Bpnn,
        ModelKind::MdpsoBpnn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Svr => "SVR",
            ModelKind::DpsoSvr => "DPSO-SVR",
            ModelKind::BpsoSvr => "BPSO-SVR",
            ModelKind::GaSvr => "GA-SVR",
            ModelKind::MdpsoSvr => "MDPSO-SVR",
            ModelKind::HoltWinters => "Holt-Winters",
            ModelKind::Bpnn => "BPNN",
            ModelKind::MdpsoBpnn => "MDPSO-BPNN",
        }
    }

    pub fn optimizer(self) -> OptimizerKind {
        match self {
            ModelKind::Svr | ModelKind::HoltWinters | ModelKind::Bpnn => OptimizerKind::None,
            ModelKind::DpsoSvr => OptimizerKind::Dpso,
            ModelKind::BpsoSvr => OptimizerKind::Bpso,
            ModelKind::GaSvr => OptimizerKind::Ga,
            ModelKind::MdpsoSvr | ModelKind::MdpsoBpnn => OptimizerKind::Mdpso,
        }
    }

    pub fn learner(self) -> LearnerKind {
        match self {
            ModelKind::HoltWinters => LearnerKind::HoltWinters,
            ModelKind::Bpnn | ModelKind::MdpsoBpnn => LearnerKind::Mlp,
            _ => LearnerKind::Svr,
        }
    }

    /// Whether two runs with different seeds give the same report.
    pub fn is_deterministic(self) -> bool {
        self == ModelKind::Svr
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown model `{0}`")]
pub struct UnknownModel(pub alloc::string::String);

impl FromStr for ModelKind {
    type Err = UnknownModel;

    /// Case-insensitive; `Holt-Winter` is accepted as an alias.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("Holt-Winter") {
            return Ok(ModelKind::HoltWinters);
        }
        ModelKind::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownModel(s.into()))
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for ModelKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for ModelKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = <alloc::string::String as serde::Deserialize>::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Forecaster settings used to score a mask and to fit the final model.
#[derive(Debug, Clone, PartialEq)]
pub enum Backend {
    /// `params = None` uses [`SvrParams::defaults_for`] the selected column count.
    Svr {
        params: Option<SvrParams>,
        solver: SolverOptions,
    },
    Mlp(MlpConfig),
}

impl Backend {
    pub fn svr_defaults() -> Self {
        Backend::Svr {
            params: None,
            solver: SolverOptions::default(),
        }
    }
}

/// A forecaster fitted on original-scale rows, predicting on the original scale.
#[derive(Debug, Clone, PartialEq)]
pub enum FittedModel {
    /// The model's `scaling` is always set.
    Svr(SvrModel),
    Mlp {
        model: MlpModel,
        scaling: ScalingParams,
    },
}

impl FittedModel {
    pub fn predict(&self, x: &[f64]) -> Result<f64, WrapperError> {
        match self {
            FittedModel::Svr(model) => {
                let scaling = model.scaling.as_ref().ok_or(WrapperError::InvalidConfig(
                    "SVR model carries no scaling parameters",
                ))?;
                let s = model.predict(&scaling.scale_features(x))?;
                Ok(scaling.unscale_target(s))
            }
            FittedModel::Mlp { model, scaling } => {
                let s = mlp_predict(model, &scaling.scale_features(x))?;
                Ok(scaling.unscale_target(s))
            }
        }
    }

    pub fn predict_matrix(&self, m: &SupervisedMatrix) -> Result<Vec<f64>, WrapperError> {
        m.rows().map(|x| self.predict(x)).collect()
    }
}

/// Fits on `train` (original scale, already masked). The flag reports solver
/// convergence and is always true for the network.
pub fn fit_backend(
    train: &SupervisedMatrix,
    backend: &Backend,
) -> Result<(FittedModel, bool), WrapperError> {
    let scaling = ScalingParams::fit(train);
    let scaled = scaling.transform(train)?;
    match backend {
        Backend::Svr { params, solver } => {
            let params = params.unwrap_or_else(|| SvrParams::defaults_for(train.n_cols()));
            let (mut model, report) = train_svr_with(&scaled, &params, solver)?;
            model.scaling = Some(scaling);
            Ok((FittedModel::Svr(model), report.converged))
        }
        Backend::Mlp(config) => {
            let model = mlp_train(&scaled, config)?;
            Ok((FittedModel::Mlp { model, scaling }, true))
        }
    }
}

/// In-sample training MAPE (percent, original scale) of the forecaster
/// trained on the columns selected by `mask`.
///
/// An all-zero mask, a non-converged SVR, or any training failure yields
/// `f64::INFINITY`.
pub fn mask_fitness(mask: &BitVector, train: &SupervisedMatrix, backend: &Backend) -> f64 {
    if mask.is_all_zero() {
        return f64::INFINITY;
    }
    let score = || -> Result<f64, WrapperError> {
        let masked = train.apply_mask(mask)?;
        let (model, converged) = fit_backend(&masked, backend)?;
        if !converged {
            log::warn!("mask {mask}: solver did not converge, fitness set to +inf");
            return Ok(f64::INFINITY);
        }
        let predicted = model.predict_matrix(&masked)?;
        Ok(crate::stats::mape(masked.targets(), &predicted)?)
    };
    match score() {
        Ok(f) if f.is_nan() => f64::INFINITY,
        Ok(f) => f,
        Err(e) => {
            log::warn!("mask {mask}: {e}, fitness set to +inf");
            f64::INFINITY
        }
    }
}

/// Mask → fitness memo. Valid only while the training rows and backend stay
/// fixed.
#[derive(Debug, Clone, Default)]
pub struct FitnessCache {
    map: BTreeMap<BitVector, f64>,
    hits: usize,
}

impl FitnessCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get_or_insert_with(&mut self, mask: &BitVector, f: impl FnOnce() -> f64) -> f64 {
        if let Some(&v) = self.map.get(mask) {
            self.hits += 1;
            return v;
        }
        let v = f();
        self.map.insert(mask.clone(), v);
        v
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn hits(&self) -> usize {
        self.hits
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub model: ModelKind,
    pub lags: LagSpec,
    pub split: SplitSpec,
    pub swarm: SwarmConfig,
    pub ga: GaConfig,
    /// `None` means the defaults for the selected column count.
    pub svr: Option<SvrParams>,
    pub solver: SolverOptions,
    pub mlp: MlpConfig,
    pub hw_swarm: SwarmConfig,
    pub repetitions: usize,
    /// Run `r` uses seed `seed + r`.
    pub seed: u64,
}

impl PipelineConfig {
    pub fn new(model: ModelKind, split: SplitSpec) -> Self {
        Self {
            model,
            lags: LagSpec::default(),
            split,
            swarm: SwarmConfig::default(),
            ga: GaConfig::default(),
            svr: None,
            solver: SolverOptions::default(),
            mlp: MlpConfig::default(),
            hw_swarm: default_hw_swarm(),
            repetitions: 50,
            seed: 0,
        }
    }

    /// The backend for this model with the network seeded by `seed`.
    pub fn backend(&self, seed: u64) -> Backend {
        match self.model.learner() {
            LearnerKind::Mlp => Backend::Mlp(MlpConfig {
                seed,
                ..self.mlp.clone()
            }),
            _ => Backend::Svr {
                params: self.svr,
                solver: self.solver,
            },
        }
    }
}

/// Result of one run on the held-out rows.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ForecastReport {
    pub model: ModelKind,
    pub seed: u64,
    /// `None` for Holt–Winters, all ones for the full-input models.
    pub selected_mask: Option<BitVector>,
    pub selected_lags: Vec<usize>,
    pub origins: Vec<YearMonth>,
    pub actuals: Vec<f64>,
    pub predictions: Vec<f64>,
    pub metrics: MetricTriple,
    /// In-sample training MAPE of the final model, in percent.
    pub train_fitness: f64,
    pub optimizer: Option<OptimizerResult>,
    pub hw_params: Option<HoltWintersParams>,
    #[cfg_attr(feature = "serde", serde(skip))]
    pub svr_model: Option<SvrModel>,
}

/// Runs the configured feature-selection optimizer over `train`.
pub fn select_features(
    config: &PipelineConfig,
    train: &SupervisedMatrix,
) -> Result<OptimizerResult, WrapperError> {
    select_features_cached(config, train, config.seed, &mut FitnessCache::new())
}

/// Like [`select_features`] with an explicit seed and a caller-owned cache.
pub fn select_features_cached(
    config: &PipelineConfig,
    train: &SupervisedMatrix,
    seed: u64,
    cache: &mut FitnessCache,
) -> Result<OptimizerResult, WrapperError> {
    let n_bits = train.n_cols();
    if n_bits == 0 {
        return Err(WrapperError::InvalidConfig("no candidate features"));
    }
    let backend = config.backend(seed);
    let fitness = |m: &BitVector| cache.get_or_insert_with(m, || mask_fitness(m, train, &backend));
    let swarm = config.swarm.clone().with_seed(seed);
    Ok(match config.model.optimizer() {
        OptimizerKind::None => return Err(WrapperError::NoOptimizer(config.model)),
        OptimizerKind::Dpso => run_dpso(n_bits, &swarm, fitness),
        OptimizerKind::Mdpso => run_mdpso(n_bits, &swarm, fitness),
        OptimizerKind::Bpso => run_bpso(n_bits, &swarm, fitness),
        OptimizerKind::Ga => run_ga(n_bits, &config.ga.clone().with_seed(seed), fitness),
    })
}

/// Builds the supervised matrix and splits it at the configured boundary.
pub fn prepare(
    config: &PipelineConfig,
    series: &MonthlySeries,
) -> Result<(SupervisedMatrix, SupervisedMatrix), WrapperError> {
    let full = build_supervised(series, &config.lags)?;
    Ok(config.split.split(&full)?)
}

/// One run with seed `config.seed`.
pub fn run_pipeline(
    config: &PipelineConfig,
    series: &MonthlySeries,
) -> Result<ForecastReport, WrapperError> {
    run_with_seed(config, series, config.seed, &mut FitnessCache::new())
}

/// One run with an explicit seed. `cache` must only be shared between runs
/// whose fitness does not depend on the seed.
pub fn run_with_seed(
    config: &PipelineConfig,
    series: &MonthlySeries,
    seed: u64,
    cache: &mut FitnessCache,
) -> Result<ForecastReport, WrapperError> {
    let (train, test) = prepare(config, series)?;
    if config.model.learner() == LearnerKind::HoltWinters {
        return run_holt_winters(config, series, &test, seed);
    }

    let (mask, optimizer) = match config.model.optimizer() {
        OptimizerKind::None => (BitVector::ones(train.n_cols()), None),
        _ => {
            let r = select_features_cached(config, &train, seed, cache)?;
            (r.best_mask.clone(), Some(r))
        }
    };
    if mask.is_all_zero() {
        return Err(WrapperError::Series(SeriesError::EmptyFeatureSet));
    }
    let backend = config.backend(seed);
    let train_m = train.apply_mask(&mask)?;
    let test_m = test.apply_mask(&mask)?;
    let (model, converged) = fit_backend(&train_m, &backend)?;
    if !converged {
        log::warn!("final {} model did not converge", config.model);
    }
    let train_fitness = crate::stats::mape(train_m.targets(), &model.predict_matrix(&train_m)?)?;
    let predictions = model.predict_matrix(&test_m)?;
    let metrics = metric_triple(test_m.targets(), &predictions)?;

    Ok(ForecastReport {
        model: config.model,
        seed,
        selected_lags: train_m.column_lags().to_vec(),
        selected_mask: Some(mask),
        origins: test_m.origins().to_vec(),
        actuals: test_m.targets().to_vec(),
        predictions,
        metrics,
        train_fitness,
        optimizer,
        hw_params: None,
        svr_model: match model {
            FittedModel::Svr(m) => Some(m),
            FittedModel::Mlp { .. } => None,
        },
    })
}

/// Holt–Winters fits its smoothing parameters on every observation up to the
/// split boundary, then predicts each test month from the months before it.
fn run_holt_winters(
    config: &PipelineConfig,
    series: &MonthlySeries,
    test: &SupervisedMatrix,
    seed: u64,
) -> Result<ForecastReport, WrapperError> {
    let (history, _) = series.split_at(config.split.boundary)?;
    let m = 12;
    let params = hw_optimize(&history, m, &config.hw_swarm.clone().with_seed(seed))?;
    let train_fitness = hw_one_step_mape(&history, &params)?;
    // One step ahead over the test months: parameters stay fixed, the state
    // absorbs each observed value, as the lag models see actual lags.
    let fit = hw_smooth(series.values(), &params)?;
    let predictions = test
        .origins()
        .iter()
        .map(|&o| {
            let t = series.start().months_until(o) as usize;
            fit.one_step[t - m]
        })
        .collect::<Vec<f64>>();
    let metrics = metric_triple(test.targets(), &predictions)?;
    Ok(ForecastReport {
        model: config.model,
        seed,
        selected_mask: None,
        selected_lags: Vec::new(),
        origins: test.origins().to_vec(),
        actuals: test.targets().to_vec(),
        predictions,
        metrics,
        train_fitness,
        optimizer: None,
        hw_params: Some(params),
        svr_model: None,
    })
}

/// Aggregate over repetitions.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunStatistics {
    pub model: ModelKind,
    pub runs: Vec<MetricTriple>,
    pub mean: MetricTriple,
    /// Sample standard deviation.
    pub std: MetricTriple,
    pub best_run: usize,
    pub worst_run: usize,
}

impl RunStatistics {
    pub fn from_runs(model: ModelKind, runs: Vec<MetricTriple>) -> Result<Self, WrapperError> {
        if runs.is_empty() {
            return Err(WrapperError::InvalidConfig("no runs to aggregate"));
        }
        let col = |k: usize| runs.iter().map(|t| t.as_array()[k]).collect::<Vec<f64>>();
        let (m, s): (Vec<f64>, Vec<f64>) = (0..3)
            .map(|k| {
                let c = col(k);
                (mean(&c), sample_std(&c))
            })
            .unzip();
        let mapes = col(0);
        let best_run = (0..mapes.len())
            .min_by(|&a, &b| mapes[a].total_cmp(&mapes[b]))
            .unwrap_or(0);
        let worst_run = (0..mapes.len())
            .max_by(|&a, &b| mapes[a].total_cmp(&mapes[b]).then(b.cmp(&a)))
            .unwrap_or(0);
        Ok(Self {
            model,
            mean: MetricTriple {
                mape: m[0],
                rmse: m[1],
                nrmse: m[2],
            },
            std: MetricTriple {
                mape: s[0],
                rmse: s[1],
                nrmse: s[2],
            },
            runs,
            best_run,
            worst_run,
        })
    }

    /// Per-run MAPE sequence.
    pub fn mape_series(&self) -> Vec<f64> {
        self.runs.iter().map(|t| t.mape).collect()
    }
}

/// `config.repetitions` runs with seeds `config.seed + r`.
pub fn repeat_experiment(
    config: &PipelineConfig,
    series: &MonthlySeries,
) -> Result<RunStatistics, WrapperError> {
    repeat_experiment_with(config, series, |_, _| {})
}

/// Like [`repeat_experiment`], handing each report to `on_run` as it completes.
///
/// SVR fitness depends only on the mask, so SVR-backed models share one
/// fitness cache across runs; network-backed models get a fresh one per run.
pub fn repeat_experiment_with<F>(
    config: &PipelineConfig,
    series: &MonthlySeries,
    mut on_run: F,
) -> Result<RunStatistics, WrapperError>
where
    F: FnMut(usize, &ForecastReport),
{
    if config.repetitions == 0 {
        return Err(WrapperError::InvalidConfig(
            "repetitions must be at least 1",
        ));
    }
    let shared = config.model.learner() == LearnerKind::Svr;
    let mut cache = FitnessCache::new();
    let mut runs = Vec::with_capacity(config.repetitions);
    for r in 0..config.repetitions {
        if !shared {
            cache = FitnessCache::new();
        }
        let seed = config.seed.wrapping_add(r as u64);
        let report =
            run_with_seed(config, series, seed, &mut cache).map_err(|e| WrapperError::Run {
                index: r,
                source: Box::new(e),
            })?;
        on_run(r, &report);
        runs.push(report.metrics);
    }
    RunStatistics::from_runs(config.model, runs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeseries::YearMonth;

    fn ym(s: &str) -> YearMonth {
        s.parse().unwrap()
    }

    /// Smooth positive series with yearly seasonality and mild trend.
    fn series(n: usize) -> MonthlySeries {
        let values = (0..n)
            .map(|t| {
                let t = t as f64;
                100.0 + 0.2 * t + 10.0 * libm::sin(2.0 * core::f64::consts::PI * t / 12.0)
            })
            .collect();
        MonthlySeries::new(ym("2005-01"), values).unwrap()
    }

    #[test]
    fn model_names_round_trip() {
        for m in ModelKind::ALL {
            assert_eq!(m.name().parse::<ModelKind>().unwrap(), m);
        }
        assert_eq!(
            "mdpso-svr".parse::<ModelKind>().unwrap(),
            ModelKind::MdpsoSvr
        );
        assert!("SVM".parse::<ModelKind>().is_err());
    }

    #[test]
    fn all_zero_mask_is_infinite() {
        let (train, _) = prepare(
            &PipelineConfig::new(ModelKind::Svr, SplitSpec::new(ym("2012-12"))),
            &series(120),
        )
        .unwrap();
        assert_eq!(
            mask_fitness(&BitVector::zeros(14), &train, &Backend::svr_defaults()),
            f64::INFINITY
        );
    }

    #[test]
    fn constant_targets_stay_in_tube() {
        // Every prediction lies within ε of the scaled constant, and a constant
        // target scales to 0.5 with zero span, so the error is exactly zero.
        let s = MonthlySeries::new(ym("2000-01"), alloc::vec![50.0; 80]).unwrap();
        let cfg = PipelineConfig::new(ModelKind::Svr, SplitSpec::new(ym("2005-01")));
        let (train, _) = prepare(&cfg, &s).unwrap();
        let mut mask = BitVector::zeros(14);
        mask.set(2, true);
        assert_eq!(mask_fitness(&mask, &train, &Backend::svr_defaults()), 0.0);
    }

    #[test]
    fn optimizer_none_is_rejected() {
        let cfg = PipelineConfig::new(ModelKind::Bpnn, SplitSpec::new(ym("2012-12")));
        let (train, _) = prepare(&cfg, &series(120)).unwrap();
        assert_eq!(
            select_features(&cfg, &train),
            Err(WrapperError::NoOptimizer(ModelKind::Bpnn))
        );
    }

    #[test]
    fn full_input_svr_is_deterministic_across_seeds() {
        let mut cfg = PipelineConfig::new(ModelKind::Svr, SplitSpec::new(ym("2012-12")));
        cfg.repetitions = 3;
        let stats = repeat_experiment(&cfg, &series(120)).unwrap();
        assert_eq!(
            stats.std,
            MetricTriple {
                mape: 0.0,
                rmse: 0.0,
                nrmse: 0.0
            }
        );
        assert_eq!(stats.runs[0], stats.runs[2]);
    }

    #[test]
    fn single_repetition_statistics() {
        let t = MetricTriple {
            mape: 1.5,
            rmse: 2.0,
            nrmse: 0.1,
        };
        let s = RunStatistics::from_runs(ModelKind::Svr, alloc::vec![t]).unwrap();
        assert_eq!(s.mean, t);
        assert_eq!(
            s.std,
            MetricTriple {
                mape: 0.0,
                rmse: 0.0,
                nrmse: 0.0
            }
        );
        assert!(RunStatistics::from_runs(ModelKind::Svr, alloc::vec![]).is_err());
    }

    #[test]
    fn selection_report_is_consistent() {
        let mut cfg = PipelineConfig::new(ModelKind::MdpsoSvr, SplitSpec::new(ym("2012-12")));
        cfg.swarm.iterations = 5;
        cfg.swarm.population = 6;
        let s = series(120);
        let r = run_pipeline(&cfg, &s).unwrap();
        let opt = r.optimizer.as_ref().unwrap();
        assert_eq!(opt.trajectory.len(), 6);
        assert_eq!(r.predictions.len(), r.actuals.len());
        let (train, _) = prepare(&cfg, &s).unwrap();
        let mask = r.selected_mask.as_ref().unwrap();
        let again = mask_fitness(mask, &train, &cfg.backend(r.seed));
        assert!((again - opt.best_fitness).abs() <= 1e-10);
        assert!((r.train_fitness - opt.best_fitness).abs() <= 1e-10);
        assert_eq!(r, run_pipeline(&cfg, &s).unwrap());
    }

    #[test]
    fn test_period_values_do_not_reach_selection_or_training() {
        let mut cfg = PipelineConfig::new(ModelKind::MdpsoSvr, SplitSpec::new(ym("2012-12")));
        cfg.swarm.iterations = 5;
        cfg.swarm.population = 6;
        let s = series(120);
        let mut v = s.values().to_vec();
        for x in &mut v[96..] {
            *x *= 1.5;
        }
        let shifted = MonthlySeries::new(s.start(), v).unwrap();
        let a = run_pipeline(&cfg, &s).unwrap();
        let b = run_pipeline(&cfg, &shifted).unwrap();
        assert_eq!(a.selected_mask, b.selected_mask);
        assert_eq!(a.optimizer, b.optimizer);
        assert_eq!(a.svr_model, b.svr_model);
        assert_eq!(a.train_fitness, b.train_fitness);
        assert_ne!(a.actuals, b.actuals);
    }

    proptest::proptest! {
        #[test]
        fn mask_and_complement_partition_columns(bits in proptest::collection::vec(proptest::bool::ANY, 14)) {
            let cfg = PipelineConfig::new(ModelKind::Svr, SplitSpec::new(ym("2012-12")));
            let (train, _) = prepare(&cfg, &series(120)).unwrap();
            let mask = BitVector::from_bools(bits);
            let cols = |m: &BitVector| train.apply_mask(m).map(|x| x.n_cols()).unwrap_or(0);
            proptest::prop_assert_eq!(cols(&mask) + cols(&mask.complement()), 14);
        }
    }

    #[test]
    fn holt_winters_forecasts_test_months() {
        let mut cfg = PipelineConfig::new(ModelKind::HoltWinters, SplitSpec::new(ym("2012-12")));
        cfg.hw_swarm.iterations = 20;
        let r = run_pipeline(&cfg, &series(120)).unwrap();
        assert_eq!(r.origins.first(), Some(&ym("2013-01")));
        assert_eq!(r.predictions.len(), 24);
        assert!(r.metrics.mape < 5.0, "{:?}", r.metrics);
    }

    #[test]
    fn holt_winters_test_predictions_ignore_later_months() {
        let mut cfg = PipelineConfig::new(ModelKind::HoltWinters, SplitSpec::new(ym("2012-12")));
        cfg.hw_swarm.iterations = 20;
        let s = series(120);
        let base = run_pipeline(&cfg, &s).unwrap();
        let mut v = s.values().to_vec();
        *v.last_mut().unwrap() *= 3.0;
        let bumped = run_pipeline(&cfg, &MonthlySeries::new(s.start(), v).unwrap()).unwrap();
        let n = base.predictions.len();
        assert_eq!(base.predictions, bumped.predictions);
        assert_ne!(base.actuals[n - 1], bumped.actuals[n - 1]);
    }
}
