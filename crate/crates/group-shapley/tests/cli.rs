//! End-to-end tests of the `gshap` binary: real process spawns, real files,
//! asserted exit codes. The shipped data files under `data/` serve as
//! fixtures; scratch files live in a temp directory.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use group_shapley::cli;

fn gshap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gshap"))
        .args(args)
        .output()
        .expect("spawn gshap")
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
        .to_str()
        .expect("utf-8 path")
        .to_string()
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("utf-8 stderr")
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("exit code")
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&gshap(&["--help"])), 0);
    assert_eq!(code(&gshap(&["--version"])), 0);
    assert_eq!(code(&gshap(&["decompose", "--help"])), 0);
}

#[test]
fn unknown_arguments_exit_64() {
    assert_eq!(code(&gshap(&[])), 64);
    assert_eq!(code(&gshap(&["frobnicate"])), 64);
    assert_eq!(code(&gshap(&["decompose", "--no-such-flag"])), 64);
}

#[test]
fn decompose_toy_table_markdown() {
    let out = gshap(&["decompose", "--utilities", &data("toy_utilities.json")]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("| theta1 | 1.3750 | 0.183 |"), "got:\n{text}");
    assert!(text.contains("| theta23 | 2.6250 | 0.350 |"), "got:\n{text}");
    assert!(text.contains("| theta45 | 3.5000 | 0.467 |"), "got:\n{text}");
    assert!(text.contains("grand = 7.5000 (method: cls)"), "got:\n{text}");
}

#[test]
fn decompose_csv_is_full_precision_and_out_file_matches_stdout() {
    let args = ["decompose", "--utilities", &data("toy_utilities.json"), "--format", "csv"];
    let out = gshap(&args);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("group,value,share\n"), "got:\n{text}");
    assert!(text.contains("# grand = 7.5000000000000000e0"), "got:\n{text}");
    assert!(text.contains("# method = cls"), "got:\n{text}");
    // Data rows carry 17 significant digits; the values themselves are the
    // exact decomposition up to round-off.
    let expected = [("theta1", 1.375), ("theta23", 2.625), ("theta45", 3.5)];
    for (line, (label, value)) in text.lines().skip(1).zip(expected) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[0], label);
        assert_eq!(fields[1].split('.').nth(1).unwrap().split('e').next().unwrap().len(), 16);
        assert!((fields[1].parse::<f64>().unwrap() - value).abs() < 1e-12, "got: {line}");
    }

    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("report.csv");
    let mut file_args = args.to_vec();
    let path_str = path.to_str().unwrap().to_string();
    file_args.extend(["--out", &path_str]);
    let out = gshap(&file_args);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).is_empty(), "writing to a file should not also print");
    assert_eq!(std::fs::read_to_string(&path).unwrap(), text);
}

#[test]
fn decompose_incomplete_table_exits_2_and_names_missing_coalitions() {
    let out = gshap(&[
        "decompose",
        "--utilities",
        &data("cgt/revenue-share-of-exports.utilities.json"),
    ]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("{0,2}") && err.contains("{1,2}"), "got: {err}");
    assert!(err.contains("bounds"), "should point at the partial-information commands: {err}");
}

#[test]
fn malformed_table_exits_64() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"groups": ["a", "b"], "values": {"0": 1.0}}"#).unwrap();
    let out = gshap(&["decompose", "--utilities", path.to_str().unwrap()]);
    assert_eq!(code(&out), 64);
    assert!(stderr(&out).contains("grand"), "got: {}", stderr(&out));

    let out = gshap(&["decompose", "--utilities", "/no/such/file.json"]);
    assert_eq!(code(&out), 64);
}

#[test]
fn bounds_revenue_share_reproduces_published_row() {
    let out = gshap(&[
        "bounds",
        "--utilities",
        &data("cgt/revenue-share-of-exports.utilities.json"),
        "--constraints",
        &data("cgt/revenue-share-of-exports.constraints-sign.json"),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("| bound | cf | tau_a | tau_c |"), "got:\n{text}");
    assert!(text.contains("| SLB | 0.0117 | 0.1817 | 0.9800 |"), "got:\n{text}");
    assert!(text.contains("| SUB | 0.2567 | 0.4267 | 1.1433 |"), "got:\n{text}");
    assert!(text.contains("| SMNS | 0.1750 | 0.3450 | 0.9800 |"), "got:\n{text}");
    assert!(text.contains("grand = 1.5000"), "got:\n{text}");
}

#[test]
fn bounds_infeasible_constraints_exit_3_but_still_print_the_table() {
    let out = gshap(&[
        "bounds",
        "--utilities",
        &data("cgt/job-turnover.utilities.json"),
        "--constraints",
        &data("cgt/job-turnover.constraints-sign.json"),
    ]);
    assert_eq!(code(&out), 3);
    let text = stdout(&out);
    assert!(text.contains("| SLB |") && text.contains("infeasible"), "got:\n{text}");
}

#[test]
fn smns_infeasible_constraints_exit_3() {
    let out = gshap(&[
        "smns",
        "--utilities",
        &data("cgt/job-turnover.utilities.json"),
        "--constraints",
        &data("cgt/job-turnover.constraints-sign.json"),
    ]);
    assert_eq!(code(&out), 3);
}

/// Equality constraints pinning the one missing entry collapse SLB, SUB,
/// and SMNS to the exact decomposition: with g({a}) = 1, g({b}) pinned to
/// 2, and g(P) = 3, both marginal orders give φ = (1, 2).
#[test]
fn bounds_equality_tight_constraints_collapse_to_exact_values() {
    let dir = tempfile::tempdir().expect("tempdir");
    let utilities = dir.path().join("pair.json");
    let constraints = dir.path().join("pin.json");
    std::fs::write(&utilities, r#"{"groups": ["a", "b"], "values": {"0": 1.0}, "grand": 3.0}"#)
        .unwrap();
    std::fs::write(
        &constraints,
        r#"[
            {"terms": [{"coalition": "1", "coef": 1.0}], "rhs": 2.0},
            {"terms": [{"coalition": "1", "coef": -1.0}], "rhs": -2.0}
        ]"#,
    )
    .unwrap();
    let out = gshap(&[
        "bounds",
        "--utilities",
        utilities.to_str().unwrap(),
        "--constraints",
        constraints.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("| SLB | 1.0000 | 2.0000 |"), "got:\n{text}");
    assert!(text.contains("| SUB | 1.0000 | 2.0000 |"), "got:\n{text}");
    assert!(text.contains("| SMNS | 1.0000 | 2.0000 |"), "got:\n{text}");
}

#[test]
fn roy_fixed_seed_is_byte_reproducible() {
    let dir = tempfile::tempdir().expect("tempdir");
    let first = dir.path().join("first.json");
    let second = dir.path().join("second.json");
    let scenario = data("roy_scenario.json");
    let run = |emit: &PathBuf| {
        gshap(&[
            "roy",
            "--scenario",
            &scenario,
            "--draws",
            "2000",
            "--seed",
            "5",
            "--emit-utilities",
            emit.to_str().unwrap(),
        ])
    };
    let (a, b) = (run(&first), run(&second));
    assert_eq!(code(&a), 0, "stderr: {}", stderr(&a));
    assert_eq!(code(&b), 0);
    assert_eq!(a.stdout, b.stdout, "same seed must print the same report");
    let first_bytes = std::fs::read(&first).unwrap();
    assert_eq!(first_bytes, std::fs::read(&second).unwrap());

    // The emitted file is in canonical form: reading it back and re-rendering
    // reproduces it byte for byte.
    let table = cli::read_utility_file(&first).expect("emitted file parses");
    assert_eq!(cli::render_utility_table(&table).into_bytes(), first_bytes);
}

#[test]
fn roy_zero_draws_exits_64() {
    let out = gshap(&["roy", "--scenario", &data("roy_scenario.json"), "--draws", "0"]);
    assert_eq!(code(&out), 64);
}

/// Three groups with addends 1.5, 2.5, 4.0; the external command sums the
/// addends named by the coalition key and prints 0 for the empty line.
const ADDITIVE_CMD: &str = r#"awk 'NR==1 { n = split($0, p, ","); split("1.5 2.5 4.0", v, " "); s = 0; for (i = 1; i <= n; i++) s += v[p[i] + 1]; printf "%.17g\n", s }'"#;

#[test]
fn sample_exhaustive_recovers_additive_game_and_matches_decompose() {
    let out = gshap(&[
        "sample",
        "--groups",
        "3",
        "--q",
        "6",
        "--value-cmd",
        ADDITIVE_CMD,
        "--exhaustive",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let sampled = stdout(&out);
    assert!(sampled.contains("| g0 | 1.5000 |"), "got:\n{sampled}");
    assert!(sampled.contains("| g1 | 2.5000 |"), "got:\n{sampled}");
    assert!(sampled.contains("| g2 | 4.0000 |"), "got:\n{sampled}");
    assert!(sampled.contains("grand = 8.0000 (method: sampled)"), "got:\n{sampled}");

    // The same table written to disk and decomposed directly must show the
    // same values.
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("induced.json");
    std::fs::write(
        &path,
        r#"{
            "groups": ["g0", "g1", "g2"],
            "values": {"0": 1.5, "1": 2.5, "2": 4.0, "0,1": 4.0, "0,2": 5.5, "1,2": 6.5},
            "grand": 8.0
        }"#,
    )
    .unwrap();
    let out = gshap(&["decompose", "--utilities", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let direct = stdout(&out);
    let value_cells = |text: &str| -> Vec<String> {
        text.lines()
            .filter(|l| l.starts_with("| g"))
            .map(|l| l.split('|').nth(2).unwrap().trim().to_string())
            .collect()
    };
    assert_eq!(value_cells(&sampled), value_cells(&direct));
}

#[test]
fn sample_budget_below_group_count_exits_64() {
    let out = gshap(&["sample", "--groups", "3", "--q", "2", "--value-cmd", ADDITIVE_CMD]);
    assert_eq!(code(&out), 64);
}

#[test]
fn sample_failing_value_command_exits_70() {
    let out =
        gshap(&["sample", "--groups", "3", "--q", "8", "--value-cmd", "false", "--exhaustive"]);
    assert_eq!(code(&out), 70);
    assert!(stderr(&out).contains("external value command"), "got: {}", stderr(&out));
}

/// Every shipped data file is in canonical form: reading it and re-rendering
/// reproduces the exact bytes, so tooling can rewrite files without churn.
#[test]
fn shipped_files_round_trip_byte_identically() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let mut checked = 0;
    let mut paths = vec![root.join("toy_utilities.json")];
    for entry in std::fs::read_dir(root.join("cgt")).unwrap() {
        paths.push(entry.unwrap().path());
    }
    for path in paths {
        let name = path.file_name().unwrap().to_str().unwrap().to_string();
        let bytes = std::fs::read(&path).unwrap();
        let rendered = if name.ends_with(".utilities.json") || name == "toy_utilities.json" {
            cli::render_utility_table(&cli::read_utility_file(&path).expect("parses"))
        } else {
            cli::render_constraint_set(&cli::read_constraint_file(&path, 3).expect("parses"))
        };
        assert_eq!(rendered.into_bytes(), bytes, "{name} is not in canonical form");
        checked += 1;
    }
    assert_eq!(checked, 40, "expected the toy table plus 39 trade-liberalization files");
}
