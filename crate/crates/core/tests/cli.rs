use std::path::Path;
use std::process::{Command, Output};

use volcollapse::estimation::GammaFit;
use volcollapse::io::{read_json, read_series, RunManifest};
use volcollapse::simulate::SimTruth;

fn volcollapse(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_volcollapse"))
        .args(args)
        .current_dir(dir)
        .env_remove("VOLCOLLAPSE_OUTPUT_DIR")
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn simulate(dir: &Path, extra: &[&str]) {
    let mut args = vec!["simulate"];
    args.extend_from_slice(extra);
    let o = volcollapse(dir, &args);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn missing_input_exits_2_and_names_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = volcollapse(dir.path(), &["ingest", "no_such_quotes.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no_such_quotes.csv"), "{}", stderr(&o));
}

#[test]
fn too_many_malformed_lines_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("timestamp,bid,ask\n");
    for i in 0..100 {
        text += &format!(
            "{},{},{}\n",
            1_000_000_000i64 * (i + 1),
            100.0 + 0.01 * (i % 7) as f64,
            100.02 + 0.01 * (i % 7) as f64
        );
        if i == 10 || i == 50 {
            text += "oops\n";
        }
    }
    std::fs::write(dir.path().join("q.csv"), text).unwrap();
    let o = volcollapse(dir.path(), &["ingest", "q.csv"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("malformed"));
}

#[test]
fn ten_days_are_too_few_to_fit() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), &["--days", "10", "--events-per-day", "200"]);
    assert!(
        volcollapse(dir.path(), &["ingest", "ibm_quotes.csv", "--input-format", "mid"])
            .status
            .success()
    );
    let o = volcollapse(dir.path(), &["fit", "ibm.series.csv"]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn simulate_is_byte_identical_and_truth_has_one_beta_per_day() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--days", "30", "--events-per-day", "300", "--seed", "42"];
    for sub in ["a", "b"] {
        std::fs::create_dir_all(dir.path().join(sub)).unwrap();
    }
    simulate(&dir.path().join("a"), &args);
    let first = std::fs::read(dir.path().join("a/ibm_quotes.csv")).ok();
    assert!(first.is_some());
    simulate(&dir.path().join("b"), &args);
    assert_eq!(first, std::fs::read(dir.path().join("b/ibm_quotes.csv")).ok());
    let truth: SimTruth = read_json(&dir.path().join("b/ibm_truth.json")).unwrap();
    assert_eq!(truth.day_betas.len(), 30);
    let manifest: RunManifest = read_json(&dir.path().join("b/simulate.manifest.json")).unwrap();
    assert_eq!(manifest.rng_seed, Some(42));
    assert_eq!(manifest.artifacts, vec!["ibm_quotes.csv", "ibm_truth.json"]);
}

#[test]
fn round_trip_recovers_parameters() {
    let dir = tempfile::tempdir().unwrap();
    simulate(
        dir.path(),
        &["--days", "500", "--events-per-day", "1000", "--seed", "42"],
    );
    assert!(
        volcollapse(dir.path(), &["ingest", "ibm_quotes.csv", "--input-format", "mid"])
            .status
            .success()
    );
    assert!(volcollapse(dir.path(), &["fit", "ibm.series.csv"]).status.success());
    let fit: GammaFit = read_json(&dir.path().join("gamma_fit.json")).unwrap();
    assert_eq!(fit.n_days, 500);
    assert!((fit.n / 4.40 - 1.0).abs() <= 0.15, "n = {}", fit.n);
    assert!((fit.beta0 / 1.28e7 - 1.0).abs() <= 0.05, "beta0 = {}", fit.beta0);
    let series = read_series(&dir.path().join("ibm.series.csv")).unwrap();
    assert_eq!((series.len(), series.n_days()), (500_000, 500));
    for f in [
        "daily_beta.csv",
        "beta_ccd.csv",
        "fit.manifest.json",
        "ingest.manifest.json",
    ] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("stocks.json"),
        r#"[{"label": "a", "n": 3.0, "beta0": 1e6, "days": 5, "events_per_day": 50, "rng_seed": 1},
            {"label": "b", "n": 5.0, "beta0": 1e8, "days": 5, "events_per_day": 50, "rng_seed": 2}]"#,
    )
    .unwrap();
    simulate(dir.path(), &["--config", "stocks.json", "--days", "7"]);
    for label in ["a", "b"] {
        let truth: SimTruth = read_json(&dir.path().join(format!("{label}_truth.json"))).unwrap();
        assert_eq!(truth.day_betas.len(), 7);
    }
}

#[test]
fn invalid_config_is_rejected_field_by_field() {
    let dir = tempfile::tempdir().unwrap();
    let o = volcollapse(dir.path(), &["simulate", "--n", "-1", "--days", "0"]);
    assert_eq!(o.status.code(), Some(1));
    let msg = stderr(&o);
    assert!(msg.contains("n must be") && msg.contains("days must be"), "{msg}");
    std::fs::write(dir.path().join("bad.json"), r#"{"n": 3.0, "colour": "red"}"#).unwrap();
    let o = volcollapse(dir.path(), &["simulate", "--config", "bad.json"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn ccd_warns_and_continues_past_long_horizons() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), &["--days", "40", "--events-per-day", "500"]);
    assert!(
        volcollapse(dir.path(), &["ingest", "ibm_quotes.csv", "--input-format", "mid"])
            .status
            .success()
    );
    assert!(volcollapse(dir.path(), &["fit", "ibm.series.csv"]).status.success());
    let o = volcollapse(
        dir.path(),
        &["ccd", "ibm.series.csv", "--fit", "gamma_fit.json", "--tau", "10,1000"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("tau=1000"));
    assert!(dir.path().join("ccd_tau10.csv").exists());
    assert!(!dir.path().join("ccd_tau1000.csv").exists());
    assert!(dir.path().join("ccd_model.csv").exists());
}

#[test]
fn tail_names_the_short_horizon() {
    let dir = tempfile::tempdir().unwrap();
    // 70 days of 1000 events leave enough returns up to tau=160 but not at 320.
    simulate(dir.path(), &["--days", "70", "--events-per-day", "1000"]);
    assert!(
        volcollapse(dir.path(), &["ingest", "ibm_quotes.csv", "--input-format", "mid"])
            .status
            .success()
    );
    assert!(volcollapse(dir.path(), &["fit", "ibm.series.csv"]).status.success());
    let o = volcollapse(
        dir.path(),
        &["tail", "--series", "ibm.series.csv", "--fit", "gamma_fit.json"],
    );
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("tau=320"), "{}", stderr(&o));
}

#[test]
fn collapse_needs_a_fit_per_stock() {
    let dir = tempfile::tempdir().unwrap();
    let o = volcollapse(
        dir.path(),
        &[
            "collapse",
            "--series",
            "a.series.csv",
            "--series",
            "b.series.csv",
            "--fit",
            "a.json",
        ],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("fit"));
}

#[test]
fn output_dir_from_environment_and_json_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("from_env");
    let o = Command::new(env!("CARGO_BIN_EXE_volcollapse"))
        .args(["simulate", "--days", "40", "--events-per-day", "200"])
        .current_dir(dir.path())
        .env("VOLCOLLAPSE_OUTPUT_DIR", &out)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(out.join("ibm_quotes.csv").exists());
    let o = volcollapse(
        dir.path(),
        &[
            "--format",
            "json",
            "--output-dir",
            "j",
            "ingest",
            "from_env/ibm_quotes.csv",
            "--input-format",
            "mid",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let o = volcollapse(
        dir.path(),
        &["--format", "json", "--output-dir", "j", "fit", "j/ibm.series.json"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("j/daily_beta.json").exists());
}

#[test]
fn pipeline_writes_every_stage_and_one_manifest() {
    let dir = tempfile::tempdir().unwrap();
    simulate(
        dir.path(),
        &["--days", "100", "--events-per-day", "2000", "--seed", "3"],
    );
    let o = volcollapse(
        dir.path(),
        &[
            "--output-dir",
            "run",
            "pipeline",
            "ibm_quotes.csv",
            "--input-format",
            "mid",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest: RunManifest = read_json(&dir.path().join("run/pipeline.manifest.json")).unwrap();
    for f in [
        "ibm.series.csv",
        "gamma_fit.json",
        "ccd_tau640.csv",
        "collapse_ibm.csv",
        "master_curve.csv",
        "tail_ibm.json",
    ] {
        assert!(
            manifest.artifacts.iter().any(|a| a == f),
            "{f} missing from {:?}",
            manifest.artifacts
        );
        assert!(dir.path().join("run").join(f).exists(), "{f}");
    }
    let manifests = std::fs::read_dir(dir.path().join("run"))
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .file_name()
                .to_string_lossy()
                .ends_with(".manifest.json")
        })
        .count();
    assert_eq!(manifests, 1);
}
