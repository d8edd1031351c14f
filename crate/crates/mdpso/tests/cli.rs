use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mdpso::selftest::{BUNDLED_CONFIG, BUNDLED_SERIES};

fn mdpso(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mdpso"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, models: &str) -> String {
    fs::write(dir.join("synthetic.csv"), BUNDLED_SERIES).unwrap();
    let text = BUNDLED_CONFIG
        .lines()
        .map(|l| {
            if l.starts_with("models") {
                format!("models = [{models}]")
            } else {
                l.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join("\n");
    let path = dir.join("experiment.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_then_stats() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#""SVR", "MDPSO-SVR", "Holt-Winters""#);
    let out = dir.path().join("out");
    let out_s = out.to_str().unwrap();
    let r = mdpso(&[
        "run",
        "--config",
        &cfg,
        "--reps",
        "3",
        "--seed",
        "9",
        "--out",
        out_s,
        "--save-model",
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));

    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    let mut lines = summary.lines();
    assert_eq!(
        lines.next(),
        Some("model,runs,mape_mean,mape_std,rmse_mean,rmse_std,nrmse_mean,nrmse_std")
    );
    assert_eq!(lines.count(), 3);
    assert!(!summary.contains('\r'));

    let runs = fs::read_to_string(out.join("runs_MDPSO-SVR.csv")).unwrap();
    assert!(runs.lines().nth(1).unwrap().starts_with("0,9,"));
    assert_eq!(runs.lines().count(), 4);

    let model: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("model_MDPSO-SVR.json")).unwrap())
            .unwrap();
    for key in [
        "support_vectors",
        "dual_coefs",
        "bias",
        "C",
        "epsilon",
        "gamma",
    ] {
        assert!(model.get(key).is_some(), "missing {key}");
    }
    assert!(!out.join("timing.csv").exists());

    let s = mdpso(&["stats", "--config", &cfg, "--out", out_s]);
    // --config reads the config's own output directory, which is absent here.
    assert_eq!(
        s.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&s.stderr)
    );

    let files: Vec<String> = ["SVR", "MDPSO-SVR", "Holt-Winters"]
        .iter()
        .map(|m| {
            out.join(format!("runs_{m}.csv"))
                .to_str()
                .unwrap()
                .to_string()
        })
        .collect();
    let mut args = vec!["stats", "--out", out_s];
    args.extend(files.iter().map(String::as_str));
    let s = mdpso(&args);
    assert!(s.status.success(), "{}", String::from_utf8_lossy(&s.stderr));
    let anova = fs::read_to_string(out.join("anova.csv")).unwrap();
    assert_eq!(anova.lines().count(), 4);
    assert!(out.join("tukey.csv").exists() && out.join("ranking.csv").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.toml");
    assert_eq!(
        mdpso(&["run", "--config", missing.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, BUNDLED_CONFIG.replace("\"BPNN\"", "\"Prophet\"")).unwrap();
    let r = mdpso(&["run", "--config", bad.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stderr).contains("Prophet"));

    let cfg = write_config(dir.path(), r#""SVR""#);
    assert_eq!(
        mdpso(&["run", "--config", &cfg, "--reps", "0"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        mdpso(&["stats", "--alpha", "2", &cfg]).status.code(),
        Some(1)
    );
    assert_eq!(mdpso(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(mdpso(&["--help"]).status.code(), Some(0));
}

#[test]
fn quick_run_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#""SVR", "BPNN""#);
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let r = mdpso(&[
            "run",
            "--config",
            &cfg,
            "--quick",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&out)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (
                    e.file_name().to_string_lossy().into_owned(),
                    fs::read(e.path()).unwrap(),
                )
            })
            .collect();
        files.sort();
        outputs.push(files);
    }
    assert_eq!(outputs[0], outputs[1]);
    let runs = &outputs[0]
        .iter()
        .find(|f| f.0 == "runs_BPNN.csv")
        .unwrap()
        .1;
    assert_eq!(String::from_utf8_lossy(runs).lines().count(), 6);
}

#[test]
fn selftest_rejects_a_missing_data_dir() {
    let dir = tempfile::tempdir().unwrap();
    let r = mdpso(&[
        "selftest",
        "--quick",
        "--data-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stderr).contains("experiment.toml"));
}
