//! The `stats` command: one-way ANOVA and Tukey HSD per metric over the
//! per-run files of two or more models.

use std::fs;
use std::path::{Path, PathBuf};

use mdpso_core::stats::{anova_oneway, tukey_hsd, AnovaResult, TukeyResult};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::output::{num, Csv, OutputSet};

pub const METRICS: [&str; 3] = ["mape", "rmse", "nrmse"];

/// Per-run metrics of one model as read from `runs_<model>.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunsFile {
    pub model: String,
    /// Indexed like [`METRICS`].
    pub columns: [Vec<f64>; 3],
}

pub fn model_name(path: &Path) -> String {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("model");
    stem.strip_prefix("runs_").unwrap_or(stem).to_string()
}

pub fn read_runs(path: &Path) -> Result<RunsFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: u64, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    let idx: Vec<usize> = METRICS
        .iter()
        .map(|m| {
            headers
                .iter()
                .position(|h| h == *m)
                .ok_or_else(|| parse_err(1, format!("missing column `{m}`")))
        })
        .collect::<Result<_>>()?;
    let mut columns: [Vec<f64>; 3] = Default::default();
    for record in reader.records() {
        let record =
            record.map_err(|e| parse_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        for (k, &i) in idx.iter().enumerate() {
            let cell = record.get(i).unwrap_or("");
            let v: f64 = cell
                .parse()
                .map_err(|_| parse_err(line, format!("invalid {} `{cell}`", METRICS[k])))?;
            columns[k].push(v);
        }
    }
    if columns[0].is_empty() {
        return Err(parse_err(1, "no runs".into()));
    }
    Ok(RunsFile {
        model: model_name(path),
        columns,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricReport {
    pub metric: &'static str,
    pub anova: AnovaResult,
    pub tukey: TukeyResult,
}

/// ANOVA and Tukey HSD for each metric. Needs at least two models with the
/// same number of runs.
pub fn analyze(files: &[RunsFile], alpha: f64) -> Result<Vec<MetricReport>> {
    if files.len() < 2 {
        return Err(Error::Invalid(format!(
            "need run files for at least 2 models, got {}",
            files.len()
        )));
    }
    let n = files[0].columns[0].len();
    if let Some(f) = files.iter().find(|f| f.columns[0].len() != n) {
        return Err(Error::Invalid(format!(
            "unequal run counts: {} has {n}, {} has {}",
            files[0].model,
            f.model,
            f.columns[0].len()
        )));
    }
    METRICS
        .iter()
        .enumerate()
        .map(|(k, &metric)| {
            let groups: Vec<&[f64]> = files.iter().map(|f| f.columns[k].as_slice()).collect();
            let invalid =
                |e: mdpso_core::stats::StatsError| Error::Invalid(format!("{metric}: {e}"));
            Ok(MetricReport {
                metric,
                anova: anova_oneway(&groups).map_err(invalid)?,
                tukey: tukey_hsd(&groups, alpha).map_err(invalid)?,
            })
        })
        .collect()
}

pub fn render(files: &[RunsFile], reports: &[MetricReport]) -> OutputSet {
    let mut anova = Csv::new(&[
        "metric",
        "ssa",
        "sse",
        "df_between",
        "df_within",
        "f_stat",
        "p_value",
        "degenerate",
    ]);
    let mut tukey = Csv::new(&[
        "metric",
        "model_a",
        "model_b",
        "mean_diff",
        "p_value",
        "significant",
    ]);
    let mut ranking = Csv::new(&["metric", "rank", "model", "mean"]);
    for r in reports {
        let a = &r.anova;
        anova.row([
            r.metric.to_string(),
            num(a.ssa),
            num(a.sse),
            a.df_between.to_string(),
            a.df_within.to_string(),
            num(a.f_stat),
            num(a.p_value),
            a.degenerate.to_string(),
        ]);
        for p in &r.tukey.pairs {
            tukey.row([
                r.metric.to_string(),
                files[p.a].model.clone(),
                files[p.b].model.clone(),
                num(p.mean_diff),
                num(p.p_value),
                p.significant.to_string(),
            ]);
        }
        for (rank, &g) in r.tukey.ranking.iter().enumerate() {
            ranking.row([
                r.metric.to_string(),
                (rank + 1).to_string(),
                files[g].model.clone(),
                num(r.tukey.means[g]),
            ]);
        }
    }
    let mut set = OutputSet::new();
    set.add("anova.csv", anova.finish());
    set.add("tukey.csv", tukey.finish());
    set.add("ranking.csv", ranking.finish());
    let json = serde_json::to_string_pretty(reports).expect("reports serialize");
    set.add("anova.json", json + "\n");
    set
}

pub fn cmd_stats(paths: &[PathBuf], alpha: f64, out: &Path) -> Result<Vec<MetricReport>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Invalid(format!(
            "--alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let files: Vec<RunsFile> = paths.iter().map(|p| read_runs(p)).collect::<Result<_>>()?;
    let reports = analyze(&files, alpha)?;
    render(&files, &reports).write_to(out)?;
    Ok(reports)
}

/// Human-readable summary for stdout.
pub fn format_reports(files: &[String], reports: &[MetricReport]) -> String {
    let mut s = String::new();
    for r in reports {
        let a = &r.anova;
        s.push_str(&format!(
            "{}: F({}, {}) = {:.3}, p = {:.3e}{}\n",
            r.metric.to_uppercase(),
            a.df_between,
            a.df_within,
            a.f_stat,
            a.p_value,
            if a.degenerate { " (degenerate)" } else { "" }
        ));
        let order: Vec<&str> = r.tukey.ranking.iter().map(|&g| files[g].as_str()).collect();
        s.push_str(&format!("  ranking: {}\n", order.join(" < ")));
        for p in r.tukey.pairs.iter().filter(|p| p.significant) {
            s.push_str(&format!(
                "  {} vs {}: diff {:.4}\n",
                files[p.a], files[p.b], p.mean_diff
            ));
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn runs(model: &str, mape: Vec<f64>) -> RunsFile {
        RunsFile {
            model: model.into(),
            columns: [mape.clone(), mape.clone(), mape],
        }
    }

    #[test]
    fn identical_files_give_zero_f() {
        let a = runs("A", vec![1.0, 2.0, 3.0]);
        let r = analyze(&[a.clone(), runs("B", a.columns[0].clone())], 0.05).unwrap();
        assert!(r.iter().all(|m| m.anova.f_stat == 0.0));
    }

    #[test]
    fn validation_errors() {
        let a = runs("A", vec![1.0, 2.0]);
        assert_eq!(
            analyze(std::slice::from_ref(&a), 0.05)
                .unwrap_err()
                .exit_code(),
            1
        );
        assert_eq!(
            analyze(&[a, runs("B", vec![1.0])], 0.05)
                .unwrap_err()
                .exit_code(),
            1
        );
    }

    #[test]
    fn model_name_from_path() {
        assert_eq!(model_name(Path::new("out/runs_MDPSO-SVR.csv")), "MDPSO-SVR");
        assert_eq!(model_name(Path::new("x.csv")), "x");
    }
}
