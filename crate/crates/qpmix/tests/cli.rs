//! End-to-end behavior of the `qpmix` binary: exit codes, file formats,
//! reproducibility, and the config-file override.

use std::path::Path;
use std::process::{Command, Output};

fn qpmix(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpmix"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn qpmix")
}

fn assert_code(out: &Output, want: i32, what: &str) {
    assert_eq!(
        out.status.code(),
        Some(want),
        "{what}: stdout={} stderr={}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn simulate_is_reproducible_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "simulate", "--p", "50", "--d", "3", "--discrete", "2", "--rho", "0.6",
        "--sigma-h", "3", "--n", "25", "--seed", "1",
    ];
    let run1 = qpmix(dir.path(), &[&args[..], &["--out-prefix", "a-"]].concat());
    assert_code(&run1, 0, "first simulate");
    let run2 = qpmix(dir.path(), &[&args[..], &["--out-prefix", "b-"]].concat());
    assert_code(&run2, 0, "second simulate");
    for name in ["graph.txt", "model.txt", "data.csv"] {
        let a = std::fs::read(dir.path().join(format!("a-{name}"))).unwrap();
        let b = std::fs::read(dir.path().join(format!("b-{name}"))).unwrap();
        assert_eq!(a, b, "{name} differs between identically seeded runs");
        assert!(!a.is_empty());
    }
    // the dataset really is 25 rows of 50 columns, discrete first
    let csv = std::fs::read_to_string(dir.path().join("a-data.csv")).unwrap();
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("x0:d,x1:d,x2:c"));
    assert_eq!(header.split(',').count(), 50);
    assert_eq!(lines.count(), 25);
}

#[test]
fn rho_out_of_range_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = qpmix(
        dir.path(),
        &[
            "simulate", "--p", "10", "--d", "2", "--discrete", "2", "--rho", "1.5",
            "--sigma-h", "1", "--n", "10", "--seed", "1",
        ],
    );
    assert_code(&out, 1, "rho out of range");
    assert!(String::from_utf8_lossy(&out.stderr).contains("outside the admissible range"));
    // atomicity: nothing was written
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn impossible_degree_constraint_reports_retry_exhaustion() {
    let dir = tempfile::tempdir().unwrap();
    let out = qpmix(
        dir.path(),
        &[
            "simulate", "--p", "3", "--d", "2", "--discrete", "2", "--rho", "0.5",
            "--sigma-h", "1", "--n", "10", "--seed", "1",
        ],
    );
    assert_ne!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exhausted"));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn nrr_writes_header_and_respects_q_constraint() {
    let dir = tempfile::tempdir().unwrap();
    assert_code(
        &qpmix(
            dir.path(),
            &[
                "simulate", "--p", "12", "--d", "3", "--discrete", "2", "--rho", "0.6",
                "--sigma-h", "3", "--n", "25", "--seed", "1", "--out-prefix", "s-",
            ],
        ),
        0,
        "simulate",
    );
    let out = qpmix(
        dir.path(),
        &[
            "nrr", "s-data.csv", "--q", "3", "--subsets", "100", "--alpha", "0.05",
            "--seed", "1", "--out", "n.tsv",
        ],
    );
    assert_code(&out, 0, "nrr");
    let text = std::fs::read_to_string(dir.path().join("n.tsv")).unwrap();
    for needle in ["# q 3", "# subsets 100", "# alpha 0.05", "# seed 1", "# p 12 2"] {
        assert!(text.contains(needle), "missing `{needle}` in
{text}");
    }

    // q too large for n = 25
    let out = qpmix(dir.path(), &["nrr", "s-data.csv", "--q", "30", "--out", "x.tsv"]);
    assert_code(&out, 1, "q + 2 >= n");
    assert!(String::from_utf8_lossy(&out.stderr).contains("q + 2"));
}

#[test]
fn nrr_q_averaging_unions_orders() {
    let dir = tempfile::tempdir().unwrap();
    assert_code(
        &qpmix(
            dir.path(),
            &[
                "simulate", "--p", "10", "--d", "2", "--discrete", "2", "--rho", "0.5",
                "--sigma-h", "2", "--n", "30", "--seed", "2", "--out-prefix", "s-",
            ],
        ),
        0,
        "simulate",
    );
    let out = qpmix(
        dir.path(),
        &[
            "nrr", "s-data.csv", "--q", "1", "--q", "2", "--q", "3", "--q", "4",
            "--subsets", "25", "--seed", "3", "--out", "avg.tsv",
        ],
    );
    assert_code(&out, 0, "averaged nrr");
    let text = std::fs::read_to_string(dir.path().join("avg.tsv")).unwrap();
    assert!(text.contains("# q 1 2 3 4"), "q list missing:\n{text}");
    assert!(text.contains("# seed 3"));
}

#[test]
fn infer_thresholds_and_ranks() {
    let dir = tempfile::tempdir().unwrap();
    assert_code(
        &qpmix(
            dir.path(),
            &[
                "simulate", "--p", "10", "--d", "2", "--discrete", "2", "--rho", "0.7",
                "--sigma-h", "3", "--n", "25", "--seed", "91", "--out-prefix", "s-",
            ],
        ),
        0,
        "simulate",
    );
    assert_code(
        &qpmix(
            dir.path(),
            &["nrr", "s-data.csv", "--q", "5", "--subsets", "100", "--seed", "94", "--out", "n.tsv"],
        ),
        0,
        "nrr",
    );
    let out = qpmix(
        dir.path(),
        &[
            "infer", "n.tsv", "--threshold", "0.5", "--graph-out", "g.txt", "--rank",
            "--rank-out", "r.tsv",
        ],
    );
    assert_code(&out, 0, "infer");
    let graph = std::fs::read_to_string(dir.path().join("g.txt")).unwrap();
    assert!(graph.starts_with("p 10 2"));
    let rank = std::fs::read_to_string(dir.path().join("r.tsv")).unwrap();
    // ranking covers every defined pair: all pairs minus the discrete one
    assert_eq!(rank.lines().count(), 2 + (10 * 9 / 2 - 1));

    // threshold outside [0, 1]
    let out = qpmix(dir.path(), &["infer", "n.tsv", "--threshold", "1.5"]);
    assert_code(&out, 1, "threshold out of range");

    // neither mode
    let out = qpmix(dir.path(), &["infer", "n.tsv"]);
    assert_code(&out, 1, "no mode");
}

#[test]
fn eval_reports_auc_and_curve() {
    let dir = tempfile::tempdir().unwrap();
    assert_code(
        &qpmix(
            dir.path(),
            &[
                "simulate", "--p", "10", "--d", "2", "--discrete", "2", "--rho", "0.7",
                "--sigma-h", "3", "--n", "25", "--seed", "91", "--out-prefix", "s-",
            ],
        ),
        0,
        "simulate",
    );
    assert_code(
        &qpmix(
            dir.path(),
            &["nrr", "s-data.csv", "--q", "5", "--subsets", "100", "--seed", "94", "--out", "n.tsv"],
        ),
        0,
        "nrr",
    );
    let out = qpmix(
        dir.path(),
        &[
            "eval", "--truth", "s-graph.txt", "--nrr", "n.tsv", "--recall-cap", "1.0",
            "--curve", "c.tsv",
        ],
    );
    assert_code(&out, 0, "eval");
    let stdout = String::from_utf8_lossy(&out.stdout);
    let auc_line = stdout.lines().find(|l| l.starts_with("auc\t")).expect("auc line");
    let auc: f64 = auc_line.split('\t').nth(1).unwrap().parse().unwrap();
    assert!(auc > 0.5, "strong fixture should score well, got {auc}");
    let curve = std::fs::read_to_string(dir.path().join("c.tsv")).unwrap();
    assert!(curve.contains("recall\tprecision"));
}

#[test]
fn malformed_csv_exits_two_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.csv"), "x0:d,x1:c\n0,1.5\n1,zap\n").unwrap();
    let out = qpmix(dir.path(), &["nrr", "bad.csv", "--q", "0", "--out", "n.tsv"]);
    assert_code(&out, 2, "malformed csv");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("bad.csv:3"), "no line number in: {stderr}");
}

#[test]
fn unknown_flag_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = qpmix(dir.path(), &["simulate", "--frobnicate"]);
    assert_code(&out, 1, "unknown flag");
}

#[test]
fn help_and_version_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = qpmix(dir.path(), &["--help"]);
    assert_code(&out, 0, "help");
    let out = qpmix(dir.path(), &["--version"]);
    assert_code(&out, 0, "version");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("formats:"), "version lacks format versions: {stdout}");
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("exp.conf"),
        "# experiment defaults\nreplicates = 120\nn = 25\nseed = 4\n",
    )
    .unwrap();
    // config alone
    let out = qpmix(
        dir.path(),
        &["type1", "--config", "exp.conf", "--test", "exact", "--fixture", "continuous"],
    );
    assert_code(&out, 0, "type1 with config");
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("# replicates 120"), "config default ignored:\n{text}");
    // explicit flag beats the config value
    let out = qpmix(
        dir.path(),
        &[
            "type1", "--config", "exp.conf", "--replicates", "60", "--test", "exact",
            "--fixture", "continuous",
        ],
    );
    assert_code(&out, 0, "type1 with override");
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("# replicates 60"), "flag did not win:\n{text}");
}

#[test]
fn type1_table_has_requested_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = qpmix(
        dir.path(),
        &["type1", "--replicates", "50", "--n", "25", "--test", "both", "--seed", "2"],
    );
    assert_code(&out, 0, "type1 both");
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("alpha_exact\talpha_asymptotic"), "{text}");
    let out = qpmix(
        dir.path(),
        &["type1", "--replicates", "50", "--n", "25", "--test", "exact", "--seed", "2"],
    );
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("alpha_exact") && !text.contains("alpha_asymptotic"), "{text}");
}

#[test]
fn accuracy_preset_scales_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = qpmix(
        dir.path(),
        &[
            "accuracy", "--preset", "paper", "--scale", "0.2", "--d", "3", "--rho", "0.6",
            "--sigma", "3", "--n", "25", "--q", "3", "--seed", "7", "--out", "acc.tsv",
        ],
    );
    assert_code(&out, 0, "accuracy");
    let text = std::fs::read_to_string(dir.path().join("acc.tsv")).unwrap();
    assert!(text.contains("# runs-per-cell 1x1x1"), "{text}");
    let data_line = text.lines().find(|l| l.starts_with("3\t")).expect("cell row");
    let auc: f64 = data_line.split('\t').nth(3).unwrap().parse().unwrap();
    assert!(auc > 0.0 && auc <= 1.0);
}
