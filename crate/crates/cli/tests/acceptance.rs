//! Release gate, criterion 10: the Monte Carlo robustness study produces a
//! complete, reproducible report through the command-line binary. (Criteria
//! 1–9 cover the library and live in the core crate's acceptance test.)
//!
//! Checks: `mc-validate --trials 100` emits a robustness table with one row
//! per model (TL-NN, NN, PINN) carrying prediction variance, MAPE variance,
//! and average epochs; an identically seeded rerun is byte-for-byte
//! identical; the prediction-variance comparison between PINN and NN is a
//! soft check that can only warn, never fail the run; and the whole study
//! fits the time budget.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

const C10_TRIALS: usize = 100;
const C10_SEED: &str = "77";
const C10_BUDGET_SECS: f64 = 600.0;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_adaptive-pinn")
}

fn run_mc(out_dir: &Path) -> std::process::Output {
    Command::new(bin())
        .args([
            "mc-validate",
            "--preset",
            "full",
            "--trials",
            "100",
            "--seed",
            C10_SEED,
            "--out",
        ])
        .arg(out_dir)
        .env_remove("ADAPTIVE_PINN_SEED")
        .output()
        .expect("binary runs")
}

/// Sorted (name, bytes) pairs for every file in a directory.
fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut entries: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    entries.sort();
    entries
}

#[test]
fn criterion_10_mc_validate_report_is_deterministic_and_complete() {
    let t0 = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let dir_a = tmp.path().join("a");
    let dir_b = tmp.path().join("b");

    let out = run_mc(&dir_a);
    let stderr = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(
        out.status.success(),
        "mc-validate failed (status {:?}): {stderr}",
        out.status.code()
    );

    // Report shape: comment line, header, then exactly one row per model in
    // a fixed order, each with finite non-negative statistics over all trials.
    let text = std::fs::read_to_string(dir_a.join("robustness.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# "), "missing comment line");
    assert_eq!(
        lines.next().unwrap(),
        "model,max_var_pred,max_var_mape,avg_epochs,trials,failed"
    );
    let rows: Vec<Vec<String>> = lines
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect();
    assert_eq!(
        rows.iter().map(|r| r[0].as_str()).collect::<Vec<_>>(),
        ["TL-NN", "NN", "PINN"]
    );
    let mut var_pred = std::collections::HashMap::new();
    for row in &rows {
        assert_eq!(row.len(), 6, "malformed row {row:?}");
        let max_var_pred: f64 = row[1].parse().unwrap();
        let max_var_mape: f64 = row[2].parse().unwrap();
        let avg_epochs: f64 = row[3].parse().unwrap();
        let trials: usize = row[4].parse().unwrap();
        let failed: usize = row[5].parse().unwrap();
        assert!(max_var_pred.is_finite() && max_var_pred >= 0.0);
        assert!(max_var_mape.is_finite() && max_var_mape >= 0.0);
        assert!(avg_epochs.is_finite() && avg_epochs > 0.0);
        assert_eq!(trials, C10_TRIALS);
        assert_eq!(failed, 0, "{} had failed trials", row[0]);
        var_pred.insert(row[0].clone(), max_var_pred);
    }

    // The variance comparison is advisory only: whenever the blended model's
    // prediction variance is not below the plain network's, the run must
    // still succeed and merely say so on stderr.
    let pinn_not_better = var_pred["PINN"] >= var_pred["NN"];
    assert_eq!(
        stderr.contains("warning:"),
        pinn_not_better,
        "variance warning inconsistent with the report (PINN {}, NN {}): {stderr}",
        var_pred["PINN"],
        var_pred["NN"]
    );

    // Identically seeded rerun reproduces every output byte for byte.
    let out_b = run_mc(&dir_b);
    assert!(out_b.status.success());
    assert_eq!(snapshot(&dir_a), snapshot(&dir_b), "rerun outputs differ");

    let secs = t0.elapsed().as_secs_f64();
    assert!(
        secs < C10_BUDGET_SECS,
        "robustness study took {secs:.1} s (budget {C10_BUDGET_SECS} s)"
    );
    println!(
        "PASS criterion 10 — robustness table complete for TL-NN/NN/PINN over {C10_TRIALS} \
         trials each, reruns byte-identical, variance check advisory \
         (PINN {:.3e} vs NN {:.3e}, warned: {pinn_not_better}), {secs:.1} s",
        var_pred["PINN"], var_pred["NN"]
    );
}
