use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mdpso::config::ExperimentConfig;
use mdpso::run::{cmd_run, format_table, RunOptions};
use mdpso::selftest::{run_all, Benchmark, Scale};
use mdpso::stats_cmd::{cmd_stats, format_reports, model_name};
use mdpso::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "mdpso",
    version,
    about = "Wrapper feature selection for monthly load forecasting"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every model in the configured roster and write result files.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Base seed; run r uses seed + r.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        reps: Option<usize>,
        /// Output directory (defaults to the config's `output`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Five repetitions unless --reps is given.
        #[arg(long)]
        quick: bool,
        /// Also write the best run's SVR model as JSON.
        #[arg(long)]
        save_model: bool,
        /// Also write timing.csv with wall-clock seconds per model.
        #[arg(long)]
        timing: bool,
    },
    /// One-way ANOVA and Tukey HSD over per-run result files.
    Stats {
        /// `runs_<model>.csv` files written by `run`.
        runs: Vec<PathBuf>,
        /// Read the runs files of every model in this config's output directory.
        #[arg(long, conflicts_with = "runs")]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the acceptance criteria on the bundled benchmark.
    Selftest {
        #[arg(long)]
        quick: bool,
        /// Directory holding experiment.toml and its dataset, used instead
        /// of the bundled copy.
        #[arg(long)]
        data_dir: Option<PathBuf>,
    },
}

fn stats_inputs(
    runs: Vec<PathBuf>,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
) -> Result<(Vec<PathBuf>, PathBuf)> {
    match config {
        Some(path) => {
            let cfg = ExperimentConfig::load(&path)?;
            let files = cfg
                .models
                .iter()
                .map(|m| cfg.output.join(format!("runs_{m}.csv")))
                .collect();
            Ok((files, out.unwrap_or(cfg.output)))
        }
        None if runs.is_empty() => Err(Error::Invalid("give runs files or --config".into())),
        None => Ok((runs, out.unwrap_or_else(|| PathBuf::from(".")))),
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run {
            config,
            seed,
            reps,
            out,
            quick,
            save_model,
            timing,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            let options = RunOptions {
                seed,
                reps,
                out,
                quick,
                save_model,
                timing,
            };
            let (outcomes, written) = cmd_run(&cfg, &options)?;
            print!("{}", format_table(&outcomes));
            for p in written {
                log::info!("wrote {}", p.display());
            }
            Ok(())
        }
        Command::Stats {
            runs,
            config,
            alpha,
            out,
        } => {
            let (files, out) = stats_inputs(runs, config, out)?;
            let reports = cmd_stats(&files, alpha, &out)?;
            let names: Vec<String> = files.iter().map(|p| model_name(p)).collect();
            print!("{}", format_reports(&names, &reports));
            Ok(())
        }
        Command::Selftest { quick, data_dir } => {
            let bench = match data_dir {
                Some(dir) => Benchmark::from_dir(&dir)?,
                None => Benchmark::bundled()?,
            };
            let scale = if quick { Scale::Quick } else { Scale::Full };
            let results = run_all(&bench, scale, |c| println!("{}", c.line()));
            let failed = results.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                return Err(Error::SelfTest(failed, results.len()));
            }
            println!("all {} criteria passed", results.len());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage errors are validation errors; --help and --version are not errors.
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
