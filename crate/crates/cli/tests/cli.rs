//! End-to-end tests of the command-line binary: every command runs against
//! synthetic data in a temp directory, reports land where promised, reruns
//! are byte-identical, and failures exit with the documented codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_adaptive-pinn")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .arg("--out")
        .arg(dir)
        .env_remove("ADAPTIVE_PINN_SEED")
        .output()
        .expect("binary should spawn")
}

fn run_ok(dir: &Path, args: &[&str]) -> Output {
    let out = run_in(dir, args);
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read(path: &PathBuf) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

fn dir_snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut entries: Vec<_> = std::fs::read_dir(dir)
        .expect("output dir should exist")
        .map(|e| {
            let e = e.expect("dir entry");
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).expect("file readable"),
            )
        })
        .collect();
    entries.sort();
    entries
}

#[test]
fn gen_data_writes_dataset_and_reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().expect("tempdir");
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    run_ok(&a, &["gen-data", "--domain", "sodium", "--seed", "7"]);
    let csv = read(&a.join("sodium.csv"));
    assert_eq!(csv.lines().count(), 88, "header plus 87 rows");
    assert!(csv.starts_with("pe,ar,nu\n"));
    run_ok(&b, &["gen-data", "--domain", "sodium", "--seed", "7"]);
    assert_eq!(dir_snapshot(&a), dir_snapshot(&b));
}

#[test]
fn gen_data_rejects_degenerate_size() {
    let tmp = tempfile::tempdir().expect("tempdir");
    let out = run_in(tmp.path(), &["gen-data", "--n", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn train_emits_all_reports_and_is_deterministic() {
    let tmp = tempfile::tempdir().expect("tempdir");
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let args = [
        "train",
        "--synth",
        "convdiff",
        "--peclet",
        "1",
        "--n",
        "30",
        "--noise",
        "0",
        "--arch",
        "1-[8]-1",
        "--epochs",
        "60",
        "--seed",
        "21",
    ];
    run_ok(&a, &args);
    for name in [
        "config-resolved.json",
        "train_epochs.csv",
        "train_summary.json",
        "model.json",
        "lambda_p_hist.csv",
    ] {
        assert!(a.join(name).exists(), "missing {name}");
    }
    let epochs = read(&a.join("train_epochs.csv"));
    assert!(epochs.starts_with("epoch,total_loss,data_loss,physics_loss,lambda_p,val_mape\n"));
    let hist = read(&a.join("lambda_p_hist.csv"));
    assert_eq!(hist.lines().count(), 21, "header plus 20 bins");
    run_ok(&b, &args);
    assert_eq!(dir_snapshot(&a), dir_snapshot(&b));
}

#[test]
fn train_accepts_deep_architecture_string() {
    let tmp = tempfile::tempdir().expect("tempdir");
    run_ok(
        tmp.path(),
        &[
            "train", "--synth", "convdiff", "--n", "30", "--noise", "0", "--arch",
            "1-[20,20,12]-1", "--mode", "data", "--epochs", "15", "--seed", "1",
        ],
    );
    let resolved = read(&tmp.path().join("config-resolved.json"));
    assert!(resolved.contains("\"arch\": \"1-[20,20,12]-1\""));
}

#[test]
fn train_rejects_arch_not_matching_data() {
    let tmp = tempfile::tempdir().expect("tempdir");
    let out = run_in(
        tmp.path(),
        &["train", "--synth", "convdiff", "--arch", "2-[4]-1", "--epochs", "5"],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn from_config_reproduces_a_run_byte_for_byte() {
    let tmp = tempfile::tempdir().expect("tempdir");
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    run_ok(
        &a,
        &[
            "train", "--synth", "sodium", "--n", "40", "--mode", "data", "--epochs", "25",
            "--seed", "13",
        ],
    );
    let cfg = a.join("config-resolved.json");
    run_ok(&b, &["train", "--from-config", cfg.to_str().expect("utf-8 path")]);
    assert_eq!(dir_snapshot(&a), dir_snapshot(&b));
}

#[test]
fn seed_falls_back_to_environment_variable() {
    let tmp = tempfile::tempdir().expect("tempdir");
    let out = Command::new(bin())
        .args(["gen-data", "--domain", "water", "--n", "12", "--out"])
        .arg(tmp.path())
        .env("ADAPTIVE_PINN_SEED", "99")
        .output()
        .expect("binary should spawn");
    assert!(out.status.success());
    let resolved = read(&tmp.path().join("config-resolved.json"));
    assert!(resolved.contains("\"seed\": 99"));
}

#[test]
fn transfer_fine_tunes_a_checkpoint_and_sweeps_layers() {
    let tmp = tempfile::tempdir().expect("tempdir");
    let src = tmp.path().join("src");
    run_ok(
        &src,
        &[
            "train", "--synth", "water", "--n", "40", "--mode", "data", "--epochs", "40",
            "--seed", "11",
        ],
    );
    let ckpt = src.join("model.json");
    let ckpt = ckpt.to_str().expect("utf-8 path");

    let ft = tmp.path().join("ft");
    run_ok(
        &ft,
        &[
            "transfer", "--source", ckpt, "--synth", "sodium", "--n", "40", "--epochs", "40",
            "--seed", "12",
        ],
    );
    for name in ["model.json", "train_epochs.csv", "train_summary.json"] {
        assert!(ft.join(name).exists(), "missing {name}");
    }

    let sweep = tmp.path().join("sweep");
    run_ok(
        &sweep,
        &[
            "transfer", "--source", ckpt, "--synth", "sodium", "--n", "40", "--sweep",
            "--sweep-seeds", "2", "--epochs", "25", "--seed", "12",
        ],
    );
    let rows = read(&sweep.join("transfer_sweep.csv"));
    // Default training architecture has two hidden layers: header + 2 rows.
    assert_eq!(rows.lines().count(), 3);
    assert!(rows.starts_with("layer_index,"));
}

#[test]
fn transfer_without_source_is_a_usage_error() {
    let tmp = tempfile::tempdir().expect("tempdir");
    let out = run_in(tmp.path(), &["transfer", "--synth", "sodium"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn hyperopt_history_matches_budget_and_best_config_feeds_train() {
    let tmp = tempfile::tempdir().expect("tempdir");
    let ho = tmp.path().join("ho");
    run_ok(
        &ho,
        &[
            "hyperopt", "--method", "random", "--budget", "6", "--epochs", "20", "--n", "40",
            "--seed", "2",
        ],
    );
    let hist = read(&ho.join("hyperopt_history.csv"));
    assert_eq!(hist.lines().count(), 7, "header plus one row per evaluation");
    assert!(hist.starts_with("iter,objective,learning_rate,hidden_width,n_layers\n"));

    let tr = tmp.path().join("tr");
    let cfg = ho.join("best_config.json");
    run_ok(
        &tr,
        &[
            "train",
            "--config",
            cfg.to_str().expect("utf-8 path"),
            "--synth",
            "sodium",
            "--n",
            "40",
            "--mode",
            "data",
            "--epochs",
            "10",
            "--seed",
            "2",
        ],
    );
    let best: serde_json::Value =
        serde_json::from_str(&read(&cfg)).expect("best config parses");
    let resolved = read(&tr.join("config-resolved.json"));
    let width = best["hidden_width"].as_i64().expect("integer width");
    let layers = best["n_layers"].as_i64().expect("integer depth");
    let hidden: Vec<String> = (0..layers).map(|_| width.to_string()).collect();
    assert!(
        resolved.contains(&format!("\"arch\": \"2-[{}]-1\"", hidden.join(","))),
        "searched architecture should be adopted: {resolved}"
    );
}

#[test]
fn hyperopt_ga_writes_generation_history() {
    let tmp = tempfile::tempdir().expect("tempdir");
    run_ok(
        tmp.path(),
        &[
            "hyperopt", "--method", "ga", "--population", "4", "--generations", "2", "--epochs",
            "10", "--n", "30", "--seed", "3",
        ],
    );
    let hist = read(&tmp.path().join("ga_history.csv"));
    assert_eq!(hist.lines().count(), 3, "header plus one row per generation");
    let best = read(&tmp.path().join("best_config.json"));
    assert!(best.contains("\"hidden\""));
    assert!(best.contains("\"learning_rate\""));
}

#[test]
fn benchmark_quick_emits_all_six_rows_in_order() {
    let tmp = tempfile::tempdir().expect("tempdir");
    run_ok(tmp.path(), &["benchmark", "--preset", "quick", "--seed", "5"]);
    let rows = read(&tmp.path().join("benchmark.csv"));
    let models: Vec<&str> = rows
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().expect("model column"))
        .collect();
    assert_eq!(models, ["TL-NN", "NN", "PINN", "GP", "SVR-RS", "SVR-Bayesian"]);
}

#[test]
fn mc_validate_quick_reports_three_models_deterministically() {
    let tmp = tempfile::tempdir().expect("tempdir");
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let args = [
        "mc-validate", "--preset", "quick", "--trials", "8", "--n", "40", "--seed", "4",
    ];
    run_ok(&a, &args);
    let rows = read(&a.join("robustness.csv"));
    let models: Vec<&str> = rows
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').next().expect("model column"))
        .collect();
    assert_eq!(models, ["TL-NN", "NN", "PINN"]);
    run_ok(&b, &args);
    assert_eq!(dir_snapshot(&a), dir_snapshot(&b));
}

#[test]
fn stats_reports_separated_domains_and_histograms_a_trace() {
    let tmp = tempfile::tempdir().expect("tempdir");
    let tr = tmp.path().join("tr");
    run_ok(
        &tr,
        &[
            "train", "--synth", "convdiff", "--peclet", "1", "--n", "30", "--noise", "0",
            "--arch", "1-[8]-1", "--epochs", "50", "--seed", "6",
        ],
    );
    let st = tmp.path().join("st");
    let trace = tr.join("train_epochs.csv");
    run_ok(
        &st,
        &[
            "stats",
            "--lambda-trace",
            trace.to_str().expect("utf-8 path"),
            "--bins",
            "10",
            "--seed",
            "9",
        ],
    );
    let utest: serde_json::Value =
        serde_json::from_str(&read(&st.join("utest.json"))).expect("utest json parses");
    assert!(utest["p"].as_f64().expect("p value") < 0.05);
    for name in ["kde_water.csv", "kde_sodium.csv"] {
        let kde = read(&st.join(name));
        assert!(kde.starts_with("# bandwidth: "));
        assert!(kde.lines().nth(1).expect("header line") == "x,density");
    }
    let hist = read(&st.join("lambda_p_hist.csv"));
    assert_eq!(hist.lines().count(), 11, "header plus 10 bins");
}

#[test]
fn usage_and_data_errors_use_distinct_exit_codes() {
    let tmp = tempfile::tempdir().expect("tempdir");
    let unknown = run_in(tmp.path(), &["train", "--bogus-flag"]);
    assert_eq!(unknown.status.code(), Some(1));
    let missing = run_in(tmp.path(), &["train", "--data", "/nonexistent/data.csv"]);
    assert_eq!(missing.status.code(), Some(2));
    let help = run_in(tmp.path(), &["--help"]);
    assert_eq!(help.status.code(), Some(0));
}
