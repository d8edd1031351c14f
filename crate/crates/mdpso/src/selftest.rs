//! Release checks on the bundled synthetic data. Each criterion is a plain
//! function so the acceptance test target can call them one by one.

use std::fs;
use std::path::Path;
use std::time::Instant;

use mdpso_core::baselines::{mlp_gradient, mlp_numerical_gradient, MlpModel};
use mdpso_core::binopt::{
    dpso_position, dpso_velocity, mdpso_position, mdpso_velocity, sigmoid, SwarmConfig,
};
use mdpso_core::rng;
use mdpso_core::stats::{anova_from_sums, anova_oneway, mape, mean, nrmse, qtukey, rmse};
use mdpso_core::svr::{kkt_max_violation, train_svr, train_svr_with, SolverOptions, SvrParams};
use mdpso_core::timeseries::{MonthlySeries, SplitSpec};
use mdpso_core::wrapper::{repeat_experiment_with, ModelKind};
use mdpso_core::SupervisedMatrix;
use rand::Rng;

use crate::config::ExperimentConfig;
use crate::data::{load_series, parse_series, series_to_csv};
use crate::error::{Error, Result};
use crate::qp_oracle;
use crate::run::{cmd_run, pipeline_config, run_model, ModelOutcome, RunOptions};

pub const BUNDLED_SERIES: &str = include_str!("../data/synthetic.csv");
pub const BUNDLED_CONFIG: &str = include_str!("../data/experiment.toml");
pub const SERIES_FILE: &str = "synthetic.csv";
pub const CONFIG_FILE: &str = "experiment.toml";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    /// Fewer repetitions and random instances; finishes in well under a minute.
    Quick,
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Criterion {
    fn new(id: u8, name: &'static str, passed: bool, detail: String) -> Self {
        Self {
            id,
            name,
            passed,
            detail,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "[{}] criterion {:>2} {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail
        )
    }
}

/// The benchmark series with its experiment configuration.
#[derive(Debug, Clone)]
pub struct Benchmark {
    pub series: MonthlySeries,
    pub config: ExperimentConfig,
}

impl Benchmark {
    /// The copy compiled into the binary.
    pub fn bundled() -> Result<Self> {
        let series = parse_series(BUNDLED_SERIES, Path::new(SERIES_FILE))?;
        let config = ExperimentConfig::parse(BUNDLED_CONFIG, Path::new("")).map_err(|message| {
            Error::Config {
                path: CONFIG_FILE.into(),
                message,
            }
        })?;
        Ok(Self { series, config })
    }

    /// `experiment.toml` and the dataset it names, read from `dir`.
    pub fn from_dir(dir: &Path) -> Result<Self> {
        let config = ExperimentConfig::load(&dir.join(CONFIG_FILE))?;
        let series = load_series(&config.dataset)?;
        Ok(Self { series, config })
    }

    pub fn split(&self) -> SplitSpec {
        SplitSpec::new(self.config.split)
    }
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

pub fn anova_fidelity() -> Criterion {
    // Balanced groups built to hit the published sums exactly: means spaced
    // by ±a around 10, members at mean ± s.
    let groups_for = |ssa: f64, sse: f64| -> Vec<Vec<f64>> {
        let a = (ssa / 500.0).sqrt();
        let s = (sse / 250.0).sqrt();
        (-2..=2)
            .map(|g| {
                let m = 10.0 + g as f64 * a;
                (0..50)
                    .map(|i| if i % 2 == 0 { m + s } else { m - s })
                    .collect()
            })
            .collect()
    };
    let mut ok = true;
    let mut detail = Vec::new();
    for (ssa, sse, f) in [(340.207, 145.726, 142.992), (937.483, 414.286, 138.602)] {
        let from_sums = anova_from_sums(ssa, sse, 5, 250).expect("valid shape");
        let groups = groups_for(ssa, sse);
        let refs: Vec<&[f64]> = groups.iter().map(|g| g.as_slice()).collect();
        let from_data = anova_oneway(&refs).expect("valid groups");
        for r in [&from_sums, &from_data] {
            ok &= within(r.f_stat, f, 0.01) && (r.df_between, r.df_within) == (4, 245);
        }
        detail.push(format!(
            "F = {:.3}/{:.3} (expected {f}), df ({}, {})",
            from_sums.f_stat, from_data.f_stat, from_data.df_between, from_data.df_within
        ));
    }
    Criterion::new(1, "ANOVA fidelity", ok, detail.join("; "))
}

pub fn sigmoid_bounds() -> Criterion {
    let cases = [(6.0, 0.9975), (-6.0, 0.0025), (0.2, 0.5498), (-0.2, 0.4502)];
    let ok = cases.iter().all(|&(v, s)| within(sigmoid(v), s, 1e-4));
    let detail = cases
        .iter()
        .map(|&(v, _)| format!("S({v}) = {:.4}", sigmoid(v)))
        .collect::<Vec<_>>()
        .join(", ");
    Criterion::new(2, "sigmoid bounds", ok, detail)
}

/// Position, pbest and gbest all fixed at bit 1, inertia 0.729, c1 = c2 = 2,
/// velocity started uniformly in `±v_max` and advanced 50 steps.
pub fn divergence_dichotomy(trials: usize) -> Criterion {
    let started = Instant::now();
    const W: f64 = 0.729;
    const STEPS: usize = 50;
    let cfg = SwarmConfig::default();
    let v_max = cfg.v_max;

    // Mean-field recursions (φ at its mean c/2).
    let mut v_d = v_max;
    let mut v_m = 0.0;
    for _ in 0..STEPS {
        v_d = dpso_velocity(v_d, true, true, true, W, cfg.c1 / 2.0, cfg.c2 / 2.0, v_max);
        v_m = mdpso_velocity(v_m, true, true, true, W, cfg.c1 / 2.0, cfg.c2 / 2.0, v_max);
    }
    let dpso_p = sigmoid(v_d);
    let mdpso_stay = sigmoid(v_m);
    let mut ok = within(dpso_p, 0.5, 0.01)
        && within(mdpso_stay, sigmoid(4.0), 1e-3)
        && within(mdpso_stay, 0.9820, 1e-3);

    // Monte Carlo: the simulated outcome frequencies against the sigmoid of
    // the realised velocities.
    let mut rng = rng::seeded(0x5eed);
    let (mut ones, mut p_sum, mut max_dev) = (0usize, 0.0, 0.0f64);
    let (mut stays, mut stay_p_sum) = (0usize, 0.0);
    let (mut clamp_n, mut clamp_stays) = (0usize, 0usize);
    for _ in 0..trials {
        let mut vd = rng.random_range(-1.0..=1.0) * v_max;
        let mut vm = rng.random_range(-1.0..=1.0) * v_max;
        for _ in 0..STEPS {
            let (r1, r2): (f64, f64) = (rng.random(), rng.random());
            vd = dpso_velocity(vd, true, true, true, W, cfg.c1 * r1, cfg.c2 * r2, v_max);
            let (r1, r2): (f64, f64) = (rng.random(), rng.random());
            vm = mdpso_velocity(vm, true, true, true, W, cfg.c1 * r1, cfg.c2 * r2, v_max);
        }
        let p = sigmoid(vd);
        max_dev = max_dev.max((p - 0.5).abs());
        p_sum += p;
        ones += usize::from(dpso_position(vd, rng.random()));
        let stay = mdpso_position(true, vm, rng.random());
        stay_p_sum += sigmoid(vm);
        stays += usize::from(stay);
        if vm == v_max {
            clamp_n += 1;
            clamp_stays += usize::from(stay);
        }
    }
    let n = trials as f64;
    let se = |p: f64, n: f64| (p * (1.0 - p) / n).sqrt();
    let p_bar = p_sum / n;
    let freq_one = ones as f64 / n;
    let stay_bar = stay_p_sum / n;
    let freq_stay = stays as f64 / n;
    let s4 = sigmoid(v_max);
    let freq_clamp = clamp_stays as f64 / clamp_n.max(1) as f64;
    ok &= max_dev < 0.01
        && (freq_one - p_bar).abs() <= 3.0 * se(p_bar, n)
        && (freq_stay - stay_bar).abs() <= 3.0 * se(stay_bar, n)
        && clamp_n > 0
        && (freq_clamp - s4).abs() <= 3.0 * se(s4, clamp_n as f64);
    let secs = started.elapsed().as_secs_f64();
    ok &= secs < 10.0;
    let detail = format!(
        "DPSO P(bit=1) = {dpso_p:.4} (simulated {freq_one:.4}); MDPSO stay = {mdpso_stay:.5} \
         (simulated {freq_clamp:.5} over {clamp_n} clamped trials, {freq_stay:.5} vs {stay_bar:.5} over all {trials}); {secs:.2}s"
    );
    Criterion::new(3, "divergence dichotomy", ok, detail)
}

pub fn svr_correctness(instances: usize) -> Criterion {
    let started = Instant::now();
    let mut rng = rng::seeded(404);
    let (mut worst_rel, mut worst_kkt, mut failures) = (0.0f64, 0.0f64, 0usize);
    let tight = SolverOptions {
        tolerance: 1e-10,
        ..SolverOptions::default()
    };
    for _ in 0..instances {
        let n = rng.random_range(2..=8);
        let d = rng.random_range(1..=3);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.random()).collect())
            .collect();
        let z: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let c = [0.1, 1.0, 10.0][rng.random_range(0..3)];
        let eps = [0.0, 0.05, 0.1, 0.3][rng.random_range(0..4)];
        let gamma = rng.random_range(0.1..3.0);
        let rows: Vec<(&[f64], f64)> = x
            .iter()
            .map(|r| r.as_slice())
            .zip(z.iter().copied())
            .collect();
        let m = SupervisedMatrix::from_rows(&rows);
        let params = SvrParams::new(c, eps, gamma).expect("valid parameters");

        let (model, report) = train_svr(&m, &params).expect("trainable instance");
        let kkt = kkt_max_violation(&model, &m);
        let (_, exact) = train_svr_with(&m, &params, &tight).expect("trainable instance");
        let oracle = qp_oracle::solve_dual(&x, &z, c, eps, gamma);
        let rel = (exact.objective - oracle.objective).abs() / oracle.objective.abs().max(1e-12);
        worst_rel = worst_rel.max(rel);
        worst_kkt = worst_kkt.max(kkt);
        if rel > 1e-6 || kkt > 1e-3 || !report.converged || !exact.converged {
            failures += 1;
        }
    }
    let secs = started.elapsed().as_secs_f64();
    Criterion::new(
        4,
        "SVR correctness",
        failures == 0 && secs < 5.0,
        format!(
            "{instances} instances, worst objective gap {worst_rel:.2e} (relative), worst KKT violation {worst_kkt:.2e}, {secs:.2}s"
        ),
    )
}

/// Runs MDPSO-SVR `runs` times and counts masks holding lags 1 and 12.
pub fn lag_recovery(bench: &Benchmark, runs: usize, required: usize) -> Criterion {
    let cfg = pipeline_config(ModelKind::MdpsoSvr, bench.split(), runs, bench.config.seed);
    let mut hits = 0;
    let result = repeat_experiment_with(&cfg, &bench.series, |_, r| {
        if r.selected_lags.contains(&1) && r.selected_lags.contains(&12) {
            hits += 1;
        }
    });
    let (ok, detail) = match result {
        Ok(_) => (
            hits >= required,
            format!("{hits}/{runs} masks contain lags 1 and 12 (need {required})"),
        ),
        Err(e) => (false, format!("run failed: {e}")),
    };
    Criterion::new(5, "lag recovery", ok, detail)
}

/// Mean test MAPE of MDPSO-SVR no worse than full-input SVR, and MDPSO's
/// run-to-run MAPE spread no larger than DPSO's or GA's.
pub fn qualitative_ranking(bench: &Benchmark, runs: usize) -> Criterion {
    let roster = [
        ModelKind::Svr,
        ModelKind::MdpsoSvr,
        ModelKind::DpsoSvr,
        ModelKind::GaSvr,
    ];
    let outcomes: Result<Vec<ModelOutcome>> = roster
        .iter()
        .map(|&m| {
            run_model(
                &pipeline_config(m, bench.split(), runs, bench.config.seed),
                &bench.series,
            )
        })
        .collect();
    let outcomes = match outcomes {
        Ok(o) => o,
        Err(e) => {
            return Criterion::new(6, "qualitative ranking", false, format!("run failed: {e}"))
        }
    };
    let [svr, md, dp, ga] = [0, 1, 2, 3].map(|i| &outcomes[i].stats);
    let ok =
        md.mean.mape <= svr.mean.mape && md.std.mape <= dp.std.mape && md.std.mape <= ga.std.mape;
    let detail = format!(
        "{runs} runs; mean MAPE SVR {:.4}, MDPSO {:.4}; MAPE std MDPSO {:.4}, DPSO {:.4}, GA {:.4}",
        svr.mean.mape, md.mean.mape, md.std.mape, dp.std.mape, ga.std.mape
    );
    Criterion::new(6, "qualitative ranking", ok, detail)
}

pub fn metric_identities(samples: usize) -> Criterion {
    let mut ok = mape(&[100.0, 200.0], &[110.0, 180.0]) == Ok(10.0)
        && mape(&[50.0], &[60.0]) == Ok(20.0)
        && mape(&[3.0, 4.0], &[3.0, 4.0]) == Ok(0.0)
        && rmse(&[1.0, 1.0], &[2.0, 0.0]) == Ok(1.0)
        && nrmse(&[1.0, 1.0], &[2.0, 0.0]) == Ok(1.0)
        && rmse(&[3.0, 3.0, 3.0], &[4.0, 3.0, 2.0]) == Ok((2.0f64 / 3.0).sqrt())
        && nrmse(&[3.0, 3.0, 3.0], &[4.0, 3.0, 2.0]) == Ok((2.0f64 / 3.0).sqrt() / 3.0);
    let exact = ok;
    let mut rng = rng::seeded(77);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let n = rng.random_range(1..50);
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..1e4)).collect();
        let p: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..1e4)).collect();
        let lhs = nrmse(&a, &p).expect("valid input");
        let rhs = rmse(&a, &p).expect("valid input") / mean(&a);
        worst = worst.max((lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE));
    }
    ok &= worst <= 1e-12;
    Criterion::new(
        7,
        "metric identities",
        ok,
        format!("hand examples exact: {exact}; worst NRMSE vs RMSE/mean over {samples} vectors {worst:.1e}"),
    )
}

pub fn gradient_check() -> Criterion {
    let data =
        SupervisedMatrix::from_rows(&[(&[0.1, 0.9], 0.3), (&[0.5, 0.2], 0.7), (&[0.8, 0.6], 0.4)]);
    let mut worst = 0.0f64;
    for seed in 0..5 {
        let model = MlpModel::random(2, 10, &mut rng::seeded(seed));
        let analytic = mlp_gradient(&model, &data).expect("matching dimensions");
        let numeric = mlp_numerical_gradient(&model, &data, 1e-5).expect("matching dimensions");
        for (a, n) in analytic.iter().zip(&numeric) {
            // Relative error, with an absolute floor for near-zero components.
            worst = worst.max((a - n).abs() / a.abs().max(1e-3));
        }
    }
    Criterion::new(
        8,
        "gradient check",
        worst <= 1e-5,
        format!("worst relative error {worst:.2e} over 5 initialisations"),
    )
}

/// Two `cmd_run` invocations with the same seed into separate directories,
/// compared file by file.
pub fn determinism(bench: &Benchmark, roster: &[ModelKind], runs: usize) -> Criterion {
    let attempt = || -> Result<(usize, Vec<String>)> {
        let scratch = tempfile::tempdir().map_err(|e| Error::io(std::env::temp_dir(), e))?;
        let dataset = scratch.path().join(SERIES_FILE);
        fs::write(&dataset, series_to_csv(&bench.series)).map_err(|e| Error::io(&dataset, e))?;
        let config = ExperimentConfig {
            dataset,
            models: roster.to_vec(),
            ..bench.config.clone()
        };
        let mut outputs = Vec::new();
        for name in ["a", "b"] {
            let options = RunOptions {
                reps: Some(runs),
                out: Some(scratch.path().join(name)),
                save_model: true,
                ..RunOptions::default()
            };
            let (_, written) = cmd_run(&config, &options)?;
            let mut files = Vec::new();
            for path in written {
                let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
                let name = path
                    .file_name()
                    .unwrap_or_default()
                    .to_string_lossy()
                    .into_owned();
                files.push((name, bytes));
            }
            files.sort();
            outputs.push(files);
        }
        let (a, b) = (&outputs[0], &outputs[1]);
        let names: Vec<&String> = a.iter().map(|f| &f.0).collect();
        if names != b.iter().map(|f| &f.0).collect::<Vec<_>>() {
            return Ok((a.len(), vec!["<file sets differ>".into()]));
        }
        let differ = a
            .iter()
            .zip(b)
            .filter(|(x, y)| x.1 != y.1)
            .map(|(x, _)| x.0.clone())
            .collect();
        Ok((a.len(), differ))
    };
    let (ok, detail) = match attempt() {
        Ok((n, differ)) => (
            n > 0 && differ.is_empty(),
            format!(
                "{n} files from {} models compared, {} differ {differ:?}",
                roster.len(),
                differ.len()
            ),
        ),
        Err(e) => (false, format!("run failed: {e}")),
    };
    Criterion::new(9, "determinism", ok, detail)
}

pub fn tukey_quantile() -> Criterion {
    // Published 5% points of the studentized range.
    let table = [(3, 12.0, 3.773), (5, 20.0, 4.232)];
    let mut ok = true;
    let mut detail = Vec::new();
    for (k, df, q) in table {
        let got = qtukey(0.95, k, df);
        ok &= within(got, q, 0.01);
        detail.push(format!("q(0.05; {k}, {df}) = {got:.4} (table {q})"));
    }
    Criterion::new(10, "Tukey quantile", ok, detail.join(", "))
}

/// Runs every criterion, reporting each as it finishes.
pub fn run_all(
    bench: &Benchmark,
    scale: Scale,
    mut report: impl FnMut(&Criterion),
) -> Vec<Criterion> {
    let quick = scale == Scale::Quick;
    let (trials, instances, lag_runs, lag_need, table_runs) = if quick {
        (100_000, 50, 5, 4, 5)
    } else {
        (100_000, 500, 100, 80, 50)
    };
    let det_roster: &[ModelKind] = if quick {
        &[
            ModelKind::Svr,
            ModelKind::MdpsoSvr,
            ModelKind::HoltWinters,
            ModelKind::Bpnn,
        ]
    } else {
        &ModelKind::ALL
    };
    let det_runs = 2;
    let checks: Vec<Box<dyn Fn() -> Criterion + '_>> = vec![
        Box::new(anova_fidelity),
        Box::new(sigmoid_bounds),
        Box::new(move || divergence_dichotomy(trials)),
        Box::new(move || svr_correctness(instances)),
        Box::new(move || lag_recovery(bench, lag_runs, lag_need)),
        Box::new(move || qualitative_ranking(bench, table_runs)),
        Box::new(|| metric_identities(1000)),
        Box::new(gradient_check),
        Box::new(move || determinism(bench, det_roster, det_runs)),
        Box::new(tukey_quantile),
    ];
    checks
        .iter()
        .map(|check| {
            let c = check();
            report(&c);
            c
        })
        .collect()
}
