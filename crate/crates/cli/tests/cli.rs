use std::path::Path;
use std::process::{Command, Output};

use gaussrisk::harness::{parse_report, parse_trace};

fn gaussrisk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gaussrisk"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = gaussrisk(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn eval_value(stdout: &str, key: &str) -> f64 {
    stdout
        .lines()
        .find_map(|l| l.strip_prefix(key).map(|v| v.trim().parse().unwrap()))
        .unwrap_or_else(|| panic!("no {key} in {stdout}"))
}

#[test]
fn gen_train_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("train.svm");
    let moments = dir.path().join("train.moments");
    ok(&[
        "gen", "--d", "5", "--n", "600", "--seed", "3", "--out", p(&data), "--moments", p(&moments),
    ]);
    let text = std::fs::read_to_string(&data).unwrap();
    assert_eq!(text.lines().count(), 600);

    for method in ["error-direct", "auc-direct", "logistic", "hinge", "lda"] {
        let model = dir.path().join(format!("{method}.model"));
        ok(&["train", "--method", method, "--data", p(&data), "--model", p(&model)]);
        let out = ok(&["eval", "--model", p(&model), "--data", p(&data)]);
        assert!(out.contains(&format!("method {method}")));
        assert_eq!(eval_value(&out, "n_pos ") + eval_value(&out, "n_neg "), 600.0);
        let acc = eval_value(&out, "accuracy ");
        let auc = eval_value(&out, "auc ");
        assert!(acc > 0.6 && acc <= 1.0, "{method}: accuracy {acc}");
        assert!(auc > 0.6 && auc <= 1.0, "{method}: auc {auc}");
    }
}

#[test]
fn train_with_sidecar_moments_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.svm");
    let moments = dir.path().join("d.moments");
    let model = dir.path().join("m.model");
    let trace = dir.path().join("t.csv");
    ok(&["gen", "--d", "4", "--n", "300", "--out", p(&data), "--moments", p(&moments)]);
    ok(&[
        "train", "--method", "auc-direct", "--data", p(&data), "--moments", p(&moments),
        "--model", p(&model), "--trace", p(&trace), "--max-iters", "7", "--grad-tol-rel", "1e-300",
    ]);
    let rows = parse_trace(std::fs::File::open(&trace).unwrap()).unwrap();
    assert!(!rows.is_empty() && rows.len() <= 7);
    for pair in rows.windows(2) {
        assert!(pair[1].objective <= pair[0].objective);
    }
}

#[test]
fn cv_reports_every_run_and_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("cv.csv");
    let traces = dir.path().join("traces");
    ok(&[
        "cv", "--method", "error-direct", "--moment-source", "exact", "--d", "3", "--n", "400",
        "--folds", "3", "--repeats", "2", "--seed", "9", "--no-timing", "--trace-dir", p(&traces),
        "--report", p(&report),
    ]);
    let parsed = parse_report(std::fs::File::open(&report).unwrap()).unwrap();
    assert_eq!(parsed.rows.len(), 6);
    assert_eq!(parsed.summary.completed, 6);
    assert!(parsed.rows.iter().all(|r| r.method == "error-direct" && r.moment_source == "exact"));
    assert_eq!(std::fs::read_dir(&traces).unwrap().count(), 6);
}

#[test]
fn cv_is_reproducible_on_stdout() {
    let args = [
        "cv", "--method", "logistic", "--d", "3", "--n", "300", "--folds", "2", "--repeats", "2",
        "--seed", "5", "--no-timing",
    ];
    assert_eq!(ok(&args), ok(&args));
}

#[test]
fn bench_writes_one_header_and_a_summary_per_block() {
    let out = ok(&[
        "bench", "--methods", "error-direct,lda", "--moment-sources", "empirical,exact", "--d", "3",
        "--n", "300", "--folds", "2", "--repeats", "1", "--no-timing",
    ]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.iter().filter(|l| l.starts_with("method,")).count(), 1);
    // error-direct × {empirical, exact} + lda, each 2 runs and a summary row
    assert_eq!(lines.len(), 1 + 3 * 3);
    assert_eq!(lines.iter().filter(|l| l.split(',').any(|f| f == "summary")).count(), 3);
}

#[test]
fn cv_on_a_file_source() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.svm");
    let moments = dir.path().join("d.moments");
    ok(&["gen", "--d", "4", "--n", "400", "--out", p(&data), "--moments", p(&moments)]);
    for norm in ["none", "dataset", "per-fold"] {
        let out = ok(&[
            "cv", "--method", "hinge", "--data", p(&data), "--folds", "2", "--repeats", "1",
            "--normalization", norm,
        ]);
        let parsed = parse_report(out.as_bytes()).unwrap();
        assert_eq!(parsed.summary.completed, 2, "{norm}");
    }
}

#[test]
fn errors_exit_nonzero_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.svm");
    let model = dir.path().join("m.model");
    let out = gaussrisk(&["train", "--method", "lda", "--data", p(&missing), "--model", p(&model)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.svm"));

    // exact moments need a direct method
    let out = gaussrisk(&[
        "cv", "--method", "lda", "--moment-source", "exact", "--d", "3", "--n", "100",
    ]);
    assert!(!out.status.success());

    let out = gaussrisk(&["cv", "--method", "lda", "--d", "3", "--n", "100", "--folds", "1"]);
    assert!(!out.status.success());

    let out = gaussrisk(&["train", "--method", "nonsense", "--data", "x", "--model", "y"]);
    assert!(!out.status.success());
}

#[test]
fn optimizer_flags_reach_the_optimizer() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.svm");
    let moments = dir.path().join("d.moments");
    ok(&["gen", "--d", "6", "--n", "500", "--out", p(&data), "--moments", p(&moments)]);
    let model = dir.path().join("m.model");
    let trace = dir.path().join("t.csv");
    ok(&[
        "train", "--method", "logistic", "--data", p(&data), "--model", p(&model), "--trace",
        p(&trace), "--max-iters", "3", "--grad-tol-rel", "1e-300",
    ]);
    let rows = parse_trace(std::fs::File::open(&trace).unwrap()).unwrap();
    assert_eq!(rows.len(), 3);

    let out = gaussrisk(&[
        "train", "--method", "logistic", "--data", p(&data), "--model", p(&model), "--beta", "1.5",
    ]);
    assert!(!out.status.success());
}
