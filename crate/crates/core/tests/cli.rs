use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use equicalib::dataset::load_dataset;
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_equicalib"))
        .arg("--out-dir")
        .arg(dir)
        .args(args)
        .env("EQUICALIB_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

/// Data rows of a CSV table: skips `#` provenance lines and the header.
fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    lines.next().expect("header");
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn csv_header(path: &Path) -> String {
    let text = fs::read_to_string(path).unwrap();
    text.lines().find(|l| !l.starts_with('#')).unwrap().to_string()
}

// ─── gen ─────────────────────────────────────────────────────────────────────

#[test]
fn gen_circle20_writes_twenty_records() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["gen", "circle20"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let ds = load_dataset(dir.path().join("circle20.jsonl")).unwrap();
    assert_eq!(ds.len(), 20);
    assert!(dir.path().join("run_manifest.json").exists());
}

#[test]
fn gen_swiss_has_four_samples_per_arm_point() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("s.jsonl");
    let o = run(dir.path(), &["gen", "swiss", "--ratio", "0.5", "--n", "500", "-o", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(load_dataset(&path).unwrap().len(), 2000);
}

#[test]
fn gen_unknown_kind_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["gen", "bogus"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("circle20"));
}

#[test]
fn gen_is_deterministic_for_a_seed() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    run(dir.path(), &["--seed", "9", "gen", "spiral", "--n", "50", "-o", a.to_str().unwrap()]);
    run(dir.path(), &["--seed", "9", "gen", "spiral", "--n", "50", "-o", b.to_str().unwrap()]);
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
}

// ─── example and bound ───────────────────────────────────────────────────────

/// Bound values from a report record.
fn report_values(path: &Path) -> Vec<f64> {
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    v["record"].as_array().unwrap().iter().map(|r| r["value"].as_f64().unwrap()).collect()
}

#[test]
fn example_fiber_counts() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["example", "--id", "4.2"]);
    assert_eq!(code(&o), 0);
    let v = report_values(&dir.path().join("example_4_2.json"));
    assert!((v[0] - 0.9).abs() < 1e-12 && (v[1] - 0.7).abs() < 1e-12, "{v:?}");
}

#[test]
fn example_lipschitz_lower_bound() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run(dir.path(), &["example", "--id", "4.4"])), 0);
    let v = report_values(&dir.path().join("example_4_4.json"));
    assert!((v[0] - 0.25).abs() < 1e-12);
    assert!((v[1] - 0.0009375).abs() < 1e-12);
    assert!((v[2] - 2.55e-4).abs() < 5e-7);
}

#[test]
fn example_gence_bound_depends_on_s1() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run(dir.path(), &["example", "--id", "5.1", "--s1", "2"])), 0);
    let v = report_values(&dir.path().join("example_5_1.json"));
    let pi2 = std::f64::consts::PI.powi(2);
    assert!((v[0] - (1.0 + pi2 / 32.0)).abs() < 1e-12);
    assert!((v[1] - (1.0 + pi2 / 64.0)).abs() < 1e-12);
}

#[test]
fn example_errors_map_to_usage() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run(dir.path(), &["example", "--id", "9.9"])), 2);
    assert_eq!(code(&run(dir.path(), &["example", "--id", "4.1"])), 2);
}

#[test]
fn bound_naive_truncnorm() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["bound", "ece-upper", "--density", "truncnorm:0.5,0.1,0,1"]);
    assert_eq!(code(&o), 0);
    let v = report_values(&dir.path().join("bound.json"));
    assert!((v[0] - 0.58).abs() < 0.01, "{v:?}");
    assert!(dir.path().join("bound.json").exists());
}

#[test]
fn bound_hoeffding_prints_n() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["bound", "hoeffding", "--epsilon", "0.1", "--delta", "0.05"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("n = 185"), "{}", stdout(&o));
}

#[test]
fn bound_rejects_out_of_range_input() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run(dir.path(), &["bound", "ece-upper-binary", "--m", "1.5"])), 2);
    assert_eq!(code(&run(dir.path(), &["bound", "ece-upper", "--density", "gamma:1"])), 2);
}

// ─── metric ──────────────────────────────────────────────────────────────────

#[test]
fn metric_ece_of_perfect_predictions_is_zero() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("c.jsonl");
    run(dir.path(), &["gen", "circle20", "-o", data.to_str().unwrap()]);
    let ds = load_dataset(&data).unwrap();
    let preds: String = ds.labels().unwrap().iter().map(|l| format!("{{\"label\":{l},\"confidence\":1.0}}\n")).collect();
    let pred_path = dir.path().join("p.jsonl");
    fs::write(&pred_path, preds).unwrap();
    let o = run(dir.path(), &["metric", "ece", "--predictions", pred_path.to_str().unwrap(), "--truth", data.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("ece = 0"), "{}", stdout(&o));
}

#[test]
fn metric_schema_mismatch_is_a_data_error() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("c.jsonl");
    run(dir.path(), &["gen", "circle20", "-o", data.to_str().unwrap()]);
    let pred_path = dir.path().join("p.jsonl");
    fs::write(&pred_path, "{\"label\":0,\"score\":0.5}\n").unwrap();
    let o = run(dir.path(), &["metric", "ece", "--predictions", pred_path.to_str().unwrap(), "--truth", data.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
}

#[test]
fn metric_bleed_against_zero_truth() {
    let dir = TempDir::new().unwrap();
    let pred_path = dir.path().join("p.jsonl");
    fs::write(&pred_path, "{\"mean\":[0,0],\"variance\":[0.5,0.5]}\n{\"mean\":[1,0],\"variance\":[0.5,0.5]}\n").unwrap();
    let o = run(dir.path(), &["metric", "bleed", "--predictions", pred_path.to_str().unwrap(), "--zero-truth"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("bleed = 5.0000000000000000e-1"), "{}", stdout(&o));
}

// ─── analyze ─────────────────────────────────────────────────────────────────

#[test]
fn analyze_writes_orbit_table() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("c.jsonl");
    run(dir.path(), &["gen", "circle20", "-o", data.to_str().unwrap()]);
    let o = run(dir.path(), &["analyze", "--data", data.to_str().unwrap(), "--group", "reflect-x"]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&dir.path().join("orbits.csv"));
    let sizes: usize = rows.iter().map(|r| r[1].parse::<usize>().unwrap()).sum();
    assert_eq!(sizes, 20);
    assert!(dir.path().join("analysis.json").exists());
    assert_eq!(code(&run(dir.path(), &["analyze", "--data", data.to_str().unwrap(), "--group", "klein:4"])), 2);
}

// ─── experiments ─────────────────────────────────────────────────────────────

#[test]
fn swiss_experiment_tables_and_rerun() {
    let dir = TempDir::new().unwrap();
    let args = ["experiment", "swiss", "--ratios", "0,1", "--seeds", "2", "--n-per-arm", "20", "--epochs", "3"];
    assert_eq!(code(&run(dir.path(), &args)), 0);
    let results = dir.path().join("swiss_results.csv");
    assert_eq!(csv_header(&results), "ratio,seed,model,acc,ece,lb,ub");
    assert_eq!(csv_rows(&results).len(), 2 * 2 * 2);
    let first = fs::read(&results).unwrap();
    let summary = fs::read(dir.path().join("swiss_summary.csv")).unwrap();
    assert_eq!(code(&run(dir.path(), &args)), 0);
    assert_eq!(fs::read(&results).unwrap(), first);
    assert_eq!(fs::read(dir.path().join("swiss_summary.csv")).unwrap(), summary);
}

#[test]
fn vectorfield_experiment_tables_and_rerun() {
    let dir = TempDir::new().unwrap();
    let args = ["experiment", "vectorfield", "--kind", "spiral", "--seeds", "1", "--n", "100", "--epochs", "2"];
    assert_eq!(code(&run(dir.path(), &args)), 0);
    let per_angle = dir.path().join("vectorfield_spiral_per_angle.csv");
    let rows = csv_rows(&per_angle);
    for model in ["unconstrained", "radial"] {
        assert_eq!(rows.iter().filter(|r| r[0] == model).count(), 16, "{model}");
    }
    let first = fs::read(dir.path().join("vectorfield_spiral_results.csv")).unwrap();
    assert_eq!(code(&run(dir.path(), &args)), 0);
    assert_eq!(fs::read(dir.path().join("vectorfield_spiral_results.csv")).unwrap(), first);
    assert!(dir.path().join("vectorfield_spiral_summary.json").exists());
}

#[test]
fn jsonl_format_switch() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["--format", "jsonl", "bound", "hoeffding", "--epsilon", "0.05", "--delta", "0.1"]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(dir.path().join("hoeffding.jsonl")).unwrap();
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert!(first.get("provenance").is_some());
}

#[test]
fn help_and_missing_subcommand() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run(dir.path(), &["--help"])), 0);
    assert_eq!(code(&run(dir.path(), &[])), 2);
}
