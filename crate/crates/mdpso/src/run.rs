//! The `run` command: every model in the roster for the configured number of
//! repetitions, then summary, per-run, forecast and trajectory files.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use mdpso_core::stats::MetricTriple;
use mdpso_core::timeseries::{MonthlySeries, SplitSpec};
use mdpso_core::wrapper::{
    repeat_experiment_with, ForecastReport, ModelKind, PipelineConfig, RunStatistics,
};

use crate::config::ExperimentConfig;
use crate::data::load_series;
use crate::error::{Error, Result};
use crate::output::{num, Csv, OutputSet};

/// Repetitions used by `--quick`.
pub const QUICK_REPETITIONS: usize = 5;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub reps: Option<usize>,
    pub out: Option<PathBuf>,
    pub quick: bool,
    pub save_model: bool,
    /// Also write `timing.csv`. Off by default so that outputs are
    /// reproducible byte for byte.
    pub timing: bool,
}

/// Everything recorded for one model.
#[derive(Debug, Clone)]
pub struct ModelOutcome {
    pub model: ModelKind,
    pub stats: RunStatistics,
    pub seeds: Vec<u64>,
    pub train_mape: Vec<f64>,
    pub lags: Vec<Vec<usize>>,
    pub trajectories: Vec<Vec<f64>>,
    /// Report of the run with the smallest test MAPE.
    pub best: ForecastReport,
    pub elapsed: Duration,
}

pub fn pipeline_config(
    model: ModelKind,
    split: SplitSpec,
    repetitions: usize,
    seed: u64,
) -> PipelineConfig {
    PipelineConfig {
        repetitions,
        seed,
        ..PipelineConfig::new(model, split)
    }
}

pub fn run_model(config: &PipelineConfig, series: &MonthlySeries) -> Result<ModelOutcome> {
    let started = Instant::now();
    let mut seeds = Vec::new();
    let mut train_mape = Vec::new();
    let mut lags = Vec::new();
    let mut trajectories = Vec::new();
    let mut best: Option<ForecastReport> = None;
    let stats = repeat_experiment_with(config, series, |_, r| {
        seeds.push(r.seed);
        train_mape.push(r.train_fitness);
        lags.push(r.selected_lags.clone());
        if let Some(o) = &r.optimizer {
            trajectories.push(o.trajectory.clone());
        }
        if best
            .as_ref()
            .is_none_or(|b| r.metrics.mape < b.metrics.mape)
        {
            best = Some(r.clone());
        }
    })
    .map_err(|source| Error::Model {
        model: config.model.to_string(),
        source,
    })?;
    Ok(ModelOutcome {
        model: config.model,
        stats,
        seeds,
        train_mape,
        lags,
        trajectories,
        best: best.expect("at least one repetition"),
        elapsed: started.elapsed(),
    })
}

/// Runs the roster without touching the filesystem.
pub fn execute(
    config: &ExperimentConfig,
    series: &MonthlySeries,
    repetitions: usize,
    seed: u64,
) -> Result<Vec<ModelOutcome>> {
    config
        .models
        .iter()
        .map(|&m| {
            log::info!("running {m} ({repetitions} repetitions)");
            run_model(
                &pipeline_config(m, SplitSpec::new(config.split), repetitions, seed),
                series,
            )
        })
        .collect()
}

fn join_lags(lags: &[usize]) -> String {
    lags.iter()
        .map(|l| l.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn metric_cells(t: &MetricTriple) -> [String; 3] {
    [num(t.mape), num(t.rmse), num(t.nrmse)]
}

pub fn render(outcomes: &[ModelOutcome], save_model: bool, timing: bool) -> Result<OutputSet> {
    let mut set = OutputSet::new();
    let mut summary = Csv::new(&[
        "model",
        "runs",
        "mape_mean",
        "mape_std",
        "rmse_mean",
        "rmse_std",
        "nrmse_mean",
        "nrmse_std",
    ]);
    for o in outcomes {
        let s = &o.stats;
        summary.row([
            o.model.to_string(),
            s.runs.len().to_string(),
            num(s.mean.mape),
            num(s.std.mape),
            num(s.mean.rmse),
            num(s.std.rmse),
            num(s.mean.nrmse),
            num(s.std.nrmse),
        ]);

        let mut runs = Csv::new(&["run", "seed", "mape", "rmse", "nrmse", "train_mape", "lags"]);
        for (i, t) in s.runs.iter().enumerate() {
            let [a, b, c] = metric_cells(t);
            runs.row([
                i.to_string(),
                o.seeds[i].to_string(),
                a,
                b,
                c,
                num(o.train_mape[i]),
                join_lags(&o.lags[i]),
            ]);
        }
        set.add(format!("runs_{}.csv", o.model), runs.finish());

        let mut fc = Csv::new(&["month", "actual", "predicted"]);
        for ((m, a), p) in o
            .best
            .origins
            .iter()
            .zip(&o.best.actuals)
            .zip(&o.best.predictions)
        {
            fc.row([m.to_string(), num(*a), num(*p)]);
        }
        set.add(format!("forecast_{}.csv", o.model), fc.finish());

        if !o.trajectories.is_empty() {
            let mut tr = Csv::new(&["run", "iteration", "best_fitness"]);
            for (run, traj) in o.trajectories.iter().enumerate() {
                for (it, f) in traj.iter().enumerate() {
                    tr.row([run.to_string(), it.to_string(), num(*f)]);
                }
            }
            set.add(format!("trajectory_{}.csv", o.model), tr.finish());
        }

        if save_model {
            if let Some(m) = &o.best.svr_model {
                let json = serde_json::to_string_pretty(m).expect("model serializes");
                set.add(format!("model_{}.json", o.model), json + "\n");
            }
        }
    }
    set.add("summary.csv", summary.finish());
    if timing {
        let mut t = Csv::new(&["model", "elapsed_seconds"]);
        for o in outcomes {
            t.row([
                o.model.to_string(),
                format!("{:.3}", o.elapsed.as_secs_f64()),
            ]);
        }
        set.add("timing.csv", t.finish());
    }
    Ok(set)
}

/// Loads the dataset, runs every model and writes the outputs.
pub fn cmd_run(
    config: &ExperimentConfig,
    options: &RunOptions,
) -> Result<(Vec<ModelOutcome>, Vec<PathBuf>)> {
    let reps = match (options.reps, options.quick) {
        (Some(0), _) => return Err(Error::Invalid("--reps must be at least 1".into())),
        (Some(n), _) => n,
        (None, true) => QUICK_REPETITIONS,
        (None, false) => config.repetitions,
    };
    let seed = options.seed.unwrap_or(config.seed);
    let out = options.out.clone().unwrap_or_else(|| config.output.clone());
    let series = load_series(&config.dataset)?;
    let outcomes = execute(config, &series, reps, seed)?;
    let written = render(&outcomes, options.save_model, options.timing)?.write_to(&out)?;
    Ok((outcomes, written))
}

/// Human-readable table for stdout.
pub fn format_table(outcomes: &[ModelOutcome]) -> String {
    let mut s = format!(
        "{:<14} {:>16} {:>18} {:>18} {:>10}\n",
        "model", "MAPE (%)", "RMSE", "NRMSE", "elapsed"
    );
    for o in outcomes {
        let (m, d) = (&o.stats.mean, &o.stats.std);
        s.push_str(&format!(
            "{:<14} {:>16} {:>18} {:>18} {:>9.2}s\n",
            o.model.to_string(),
            format!("{:.3} ± {:.3}", m.mape, d.mape),
            format!("{:.4} ± {:.4}", m.rmse, d.rmse),
            format!("{:.5} ± {:.5}", m.nrmse, d.nrmse),
            o.elapsed.as_secs_f64()
        ));
    }
    s
}
