use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fcmwdtw"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn line_value<'a>(report: &'a str, key: &str) -> &'a str {
    report
        .lines()
        .find_map(|l| l.strip_prefix(key).and_then(|l| l.strip_prefix('=')))
        .unwrap_or_else(|| panic!("no {key} line in {report:?}"))
}

fn make_data(dir: &Path) -> PathBuf {
    run_ok(
        dir,
        &[
            "synth",
            "--out",
            "data.csv",
            "--length",
            "400",
            "--anomalies",
            "3",
            "--anomaly-length",
            "16",
            "--seed",
            "1",
        ],
    );
    dir.join("data.csv")
}

const FIT: &[&str] = &[
    "fit",
    "--input",
    "data.csv",
    "--window-length",
    "8",
    "--stride",
    "2",
    "--clusters",
    "3",
    "--max-iters",
    "8",
];

#[test]
fn same_seed_gives_byte_identical_models() {
    let dir = tempfile::tempdir().unwrap();
    make_data(dir.path());
    let mut first = FIT.to_vec();
    first.extend(["--seed", "4", "--model-out", "a.json"]);
    let mut second = FIT.to_vec();
    second.extend(["--seed", "4", "--model-out", "b.json"]);
    run_ok(dir.path(), &first);
    run_ok(dir.path(), &second);
    let a = std::fs::read(dir.path().join("a.json")).unwrap();
    let b = std::fs::read(dir.path().join("b.json")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn model_round_trip_scores_identically() {
    let dir = tempfile::tempdir().unwrap();
    make_data(dir.path());
    let mut fit = FIT.to_vec();
    fit.extend(["--model-out", "model.json"]);
    run_ok(dir.path(), &fit);
    run_ok(
        dir.path(),
        &[
            "score",
            "--model",
            "model.json",
            "--input",
            "data.csv",
            "--scores-out",
            "first.csv",
        ],
    );
    run_ok(
        dir.path(),
        &[
            "score",
            "--model",
            "model.json",
            "--input",
            "data.csv",
            "--scores-out",
            "second.csv",
        ],
    );
    let first = std::fs::read(dir.path().join("first.csv")).unwrap();
    let second = std::fs::read(dir.path().join("second.csv")).unwrap();
    assert_eq!(first, second);

    // scoring the training input with stride 1 covers everything
    let report = run_ok(
        dir.path(),
        &[
            "fit",
            "--input",
            "data.csv",
            "--window-length",
            "8",
            "--clusters",
            "3",
            "--max-iters",
            "4",
            "--model-out",
            "dense.json",
        ],
    );
    assert_eq!(line_value(&report, "model"), "dense.json");
    let report = run_ok(
        dir.path(),
        &[
            "score",
            "--model",
            "dense.json",
            "--input",
            "data.csv",
            "--scores-out",
            "dense.csv",
        ],
    );
    assert!(report.contains(" uncovered=0 "), "{report}");
}

#[test]
fn evaluate_reports_known_areas() {
    let dir = tempfile::tempdir().unwrap();
    let scores = "index,score,coverage,label\n0,0.1,1,0\n1,0.4,1,0\n2,0.35,1,1\n3,0.8,1,1\n";
    std::fs::write(dir.path().join("scores.csv"), scores).unwrap();
    let report = run_ok(dir.path(), &["evaluate", "--scores", "scores.csv"]);
    assert_eq!(line_value(&report, "roc_auc"), "0.75");
    let pr: f64 = line_value(&report, "pr_auc").parse().unwrap();
    assert!((pr - 5.0 / 6.0).abs() < 1e-12);

    let perfect = "index,score,coverage,label\n0,0.1,1,0\n1,0.2,1,0\n2,0.8,1,1\n";
    std::fs::write(dir.path().join("perfect.csv"), perfect).unwrap();
    let report = run_ok(dir.path(), &["evaluate", "--scores", "perfect.csv"]);
    assert_eq!(line_value(&report, "roc_auc"), "1");
    assert_eq!(line_value(&report, "pr_auc"), "1");
}

#[test]
fn user_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let data = make_data(dir.path());

    let missing = run(dir.path(), &["fit", "--input", "absent.csv"]);
    assert_eq!(missing.status.code(), Some(2));

    let too_many = run(
        dir.path(),
        &[
            "fit",
            "--input",
            data.to_str().unwrap(),
            "--window-length",
            "8",
            "--clusters",
            "999",
        ],
    );
    assert_eq!(too_many.status.code(), Some(2));
    let message = String::from_utf8_lossy(&too_many.stderr).to_string();
    assert!(message.contains("insufficient data"), "stderr: {message}");

    let bad_m = run(
        dir.path(),
        &["fit", "--input", "data.csv", "--fuzziness", "3.0"],
    );
    assert_eq!(bad_m.status.code(), Some(2));

    std::fs::write(
        dir.path().join("unlabeled.csv"),
        "index,score,coverage\n0,1.0,1\n",
    )
    .unwrap();
    let no_labels = run(dir.path(), &["evaluate", "--scores", "unlabeled.csv"]);
    assert_eq!(no_labels.status.code(), Some(2));
}

#[test]
fn one_cell_grid_matches_manual_runs() {
    let dir = tempfile::tempdir().unwrap();
    make_data(dir.path());
    let grid = run_ok(
        dir.path(),
        &[
            "grid",
            "--input",
            "data.csv",
            "--window-length",
            "8",
            "--stride",
            "2",
            "--max-iters",
            "8",
            "--seed",
            "4",
            "--c-grid",
            "3",
            "--m-grid",
            "1.7",
            "--q-grid",
            "2",
        ],
    );
    let best = grid
        .lines()
        .find(|l| l.starts_with("best:"))
        .expect("best line");

    let mut fit = FIT.to_vec();
    fit.extend(["--seed", "4", "--model-out", "cell.json"]);
    run_ok(dir.path(), &fit);
    run_ok(
        dir.path(),
        &[
            "score",
            "--model",
            "cell.json",
            "--input",
            "data.csv",
            "--scores-out",
            "cell.csv",
        ],
    );
    let eval = run_ok(dir.path(), &["evaluate", "--scores", "cell.csv"]);
    let roc = line_value(&eval, "roc_auc");
    let pr = line_value(&eval, "pr_auc");
    assert!(best.contains(&format!("roc_auc={roc}")), "{best} vs {roc}");
    assert!(best.contains(&format!("pr_auc={pr}")), "{best} vs {pr}");
}

#[test]
fn bench_single_size_has_no_slope() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_ok(
        dir.path(),
        &[
            "bench",
            "--sizes",
            "12",
            "--windows",
            "16",
            "--clusters",
            "2",
            "--iters",
            "2",
            "--repeats",
            "1",
        ],
    );
    assert_eq!(line_value(&report, "loglog_slope"), "n/a");
    assert_eq!(report.lines().count(), 3);
}

#[test]
fn synth_is_deterministic_and_labeled() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(
        dir.path(),
        &[
            "synth",
            "--out",
            "a.csv",
            "--length",
            "200",
            "--anomalies",
            "2",
            "--anomaly-length",
            "12",
            "--seed",
            "3",
        ],
    );
    run_ok(
        dir.path(),
        &[
            "synth",
            "--out",
            "b.csv",
            "--length",
            "200",
            "--anomalies",
            "2",
            "--anomaly-length",
            "12",
            "--seed",
            "3",
        ],
    );
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("dim_0,dim_1,label\n"));

    let rejected = run(
        dir.path(),
        &[
            "synth",
            "--out",
            "c.csv",
            "--dims",
            "1",
            "--kind",
            "dimension-flip",
        ],
    );
    assert_eq!(rejected.status.code(), Some(2));
}

#[test]
fn config_file_applies_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    make_data(dir.path());
    std::fs::write(
        dir.path().join("run.toml"),
        "input = \"data.csv\"\nwindow_length = 8\nclusters = 4\nmax_iters = 5\nseed = 7\nmodel_out = \"file.json\"\n",
    )
    .unwrap();
    let report = run_ok(
        dir.path(),
        &["fit", "--config", "run.toml", "--clusters", "2"],
    );
    assert!(report.contains("clusters=2 "), "{report}");
    assert!(report.contains("seed=7 "), "{report}");
    assert!(dir.path().join("file.json").exists());

    std::fs::write(dir.path().join("bad.toml"), "window_size = 3\n").unwrap();
    let rejected = run(dir.path(), &["fit", "--config", "bad.toml"]);
    assert_eq!(rejected.status.code(), Some(2));
}
