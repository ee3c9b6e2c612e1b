//! Exit-code contract, output formats and reproducibility of the binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn semiwave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semiwave"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

/// Value of `key=` in a one-line summary.
fn field(line: &str, key: &str) -> f64 {
    line.split_whitespace()
        .find_map(|tok| tok.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("missing {key}= in {line:?}"))
        .parse()
        .unwrap_or_else(|_| panic!("unparsable {key}= in {line:?}"))
}

#[test]
fn oracle_direct_evaluation() {
    let out = semiwave(&[
        "oracle", "--model", "special+", "--m", "1", "--eps", "0.1", "--p", "3",
    ]);
    assert_eq!(code(&out), 0);
    let line = stdout(&out);
    assert!((field(&line, "t0") - 50.0).abs() < 1e-9, "{line}");
}

#[test]
fn oracle_defaults_to_peak_amplitude() {
    // unit bump in g: peak amplitude 1, so t0 = eps^-1 for p = 2
    let out = semiwave(&[
        "oracle", "--model", "special+", "--p", "2", "--eps", "0.5", "--family", "bump", "--amp-f",
        "0", "--amp-g", "1",
    ]);
    assert_eq!(code(&out), 0);
    assert!((field(&stdout(&out), "t0") - 2.0).abs() < 1e-6);
}

#[test]
fn oracle_degenerate_amplitude_reports_infinity() {
    let out = semiwave(&["oracle", "--model", "special+", "--p", "2", "--m", "0"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("t0=inf"));
}

#[test]
fn oracle_rejects_bad_exponent() {
    let out = semiwave(&["oracle", "--model", "special+", "--m", "1", "--p", "1.0"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn selftest_passes_and_is_deterministic() {
    let a = semiwave(&["selftest", "--seed", "3", "--h", "0.0625"]);
    assert_eq!(code(&a), 0, "{}", stdout(&a));
    let b = semiwave(&["selftest", "--seed", "3", "--h", "0.0625"]);
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn selftest_rejects_zero_size_grid() {
    let out = semiwave(&["selftest", "--h", "0"]);
    assert_eq!(code(&out), 2);
    let out = semiwave(&["selftest", "--T", "0"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn solve_zero_amplitude_completes() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let out = semiwave(&[
        "solve",
        "--eps",
        "0",
        "--T",
        "1",
        "--h",
        "0.0625",
        "--out",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let text = fs::read_to_string(&trace).unwrap();
    // config header, column row, then all-zero amplitude rows
    assert!(text.starts_with("# model="));
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(lines.next().unwrap(), "t,sup_a,sup_b,sup_u");
    for line in lines {
        let amp: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(amp, 0.0);
    }
}

#[test]
fn solve_reports_blowup_with_exit_one() {
    let out = semiwave(&[
        "solve",
        "--model",
        "special+",
        "--p",
        "2",
        "--eps",
        "0.5",
        "--family",
        "bump",
        "--amp-f",
        "0",
        "--amp-g",
        "1",
        "--T",
        "4",
        "--h",
        "0.00390625",
    ]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("threshold_crossed"));
}

#[test]
fn picard_converges_and_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("run.json");
    let out = semiwave(&[
        "picard",
        "--model",
        "general",
        "--p",
        "2",
        "--q",
        "2",
        "--eps",
        "0.1",
        "--T",
        "2",
        "--h",
        "0.03125",
        "--out",
        json.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let parsed: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(parsed["converged"], serde_json::Value::Bool(true));
    assert_eq!(parsed["config"]["model"], "general");
    assert!(parsed["residuals"].as_array().unwrap().len() >= 2);
}

#[test]
fn blowup_estimate_matches_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let curve = dir.path().join("curve.csv");
    let out = semiwave(&[
        "blowup",
        "--model",
        "special+",
        "--p",
        "2",
        "--eps",
        "0.25",
        "--family",
        "bump",
        "--amp-f",
        "0",
        "--amp-g",
        "1",
        "--h",
        "0.001953125",
        "--out",
        curve.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let line = stdout(&out);
    assert!((field(&line, "oracle") - 4.0).abs() < 1e-12);
    assert!(field(&line, "rel_err") < 0.02);

    // curve CSV: minimum of t0 over the feet at x0 = 0
    let text = fs::read_to_string(&curve).unwrap();
    let mut min_t0 = f64::INFINITY;
    let mut min_x0 = f64::NAN;
    for row in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let cols: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        if cols[2] < min_t0 {
            min_t0 = cols[2];
            min_x0 = cols[0];
        }
    }
    assert_eq!(min_x0, 0.0);
    assert!((min_t0 - 4.0).abs() < 1e-12);
}

#[test]
fn blowup_requires_signed_model() {
    let out = semiwave(&["blowup", "--model", "general", "--p", "2", "--q", "2"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn sweep_outputs_are_deterministic_and_complete() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let csv = dir.path().join(name);
        let out = semiwave(&[
            "sweep",
            "--model",
            "special+",
            "--p",
            "2",
            "--family",
            "bump",
            "--amp-f",
            "0",
            "--amp-g",
            "1",
            "--h",
            "0.015625",
            "--eps-list",
            "0.4,0.2,0.1",
            "--jobs",
            "2",
            "--seed",
            "9",
            "--out",
            csv.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", stdout(&out));
        fs::read_to_string(&csv).unwrap()
    };
    let a = run("a.csv");
    let b = run("b.csv");
    assert_eq!(a, b, "identical configs must produce identical bytes");

    // records sorted by eps ascending, uncensored
    let rows: Vec<&str> = a.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 3);
    let eps: Vec<f64> = rows
        .iter()
        .map(|r| r.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(eps.windows(2).all(|w| w[0] < w[1]));
    assert!(rows.iter().all(|r| r.ends_with("false")));

    // companion fit report
    let fit: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a.fit.json")).unwrap()).unwrap();
    assert_eq!(fit["exploratory"], serde_json::Value::Bool(false));
    assert_eq!(fit["fit"]["passed"], serde_json::Value::Bool(true));
}

#[test]
fn sweep_picard_bisection_method() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("picard.cfg");
    fs::write(&cfg, "method=picard\n").unwrap();
    let csv = dir.path().join("records.csv");
    let out = semiwave(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--model",
        "special+",
        "--p",
        "2",
        "--family",
        "bump",
        "--amp-f",
        "0",
        "--amp-g",
        "1",
        "--h",
        "0.03125",
        "--eps-list",
        "0.5,0.4,0.3",
        "--T",
        "8",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let text = fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.contains(",picard_bisect,")));
    // the convergent horizon always undershoots the exact blow-up time
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        let eps: f64 = cols[0].parse().unwrap();
        let t_obs: f64 = cols[1].parse().unwrap();
        assert!(t_obs < 1.0 / eps, "horizon {t_obs} above t0 {}", 1.0 / eps);
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# oracle input\nmodel=special+\np=2\neps=1\nm=2.0\n").unwrap();
    // file alone: t0 = (2*1)^-1 = 0.5
    let out = semiwave(&["oracle", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!((field(&stdout(&out), "t0") - 0.5).abs() < 1e-12);
    // flag overrides eps: t0 = (2*0.5)^-1 = 1
    let out = semiwave(&["oracle", "--config", cfg.to_str().unwrap(), "--eps", "0.5"]);
    assert!((field(&stdout(&out), "t0") - 1.0).abs() < 1e-12);
}

#[test]
fn config_errors_exit_two() {
    for args in [
        vec!["solve", "--model", "nonsense"],
        vec!["solve", "--h", "-1"],
        vec!["solve", "--R", "0.5"],
        vec!["picard", "--model", "general", "--p", "0.5"],
        vec!["sweep", "--eps-list", "0.4,0.2"], // too few
        vec!["solve", "--family", "wiggle"],
    ] {
        let out = semiwave(&args);
        assert_eq!(code(&out), 2, "args {args:?} should be a config error");
    }
    // unknown config key
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "frobnicate=1\n").unwrap();
    let out = semiwave(&["selftest", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn io_errors_exit_three() {
    let out = semiwave(&[
        "solve",
        "--eps",
        "0",
        "--T",
        "1",
        "--h",
        "0.0625",
        "--out",
        "/nonexistent-dir/trace.csv",
    ]);
    assert_eq!(code(&out), 3);
    let out = semiwave(&[
        "oracle",
        "--m",
        "1",
        "--model",
        "special+",
        "--config",
        "/no/such/file.cfg",
    ]);
    assert_eq!(code(&out), 3);
}

#[test]
fn csv_floats_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let out = semiwave(&[
        "solve",
        "--model",
        "general",
        "--p",
        "2",
        "--q",
        "2",
        "--eps",
        "0.3",
        "--T",
        "1",
        "--h",
        "0.125",
        "--out",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let text = fs::read_to_string(&trace).unwrap();
    // every float parses back; 17 significant digits are printed
    for row in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        for cell in row.split(',') {
            let v: f64 = cell.parse().unwrap();
            assert_eq!(format!("{v:.16e}"), cell);
        }
    }
    assert!(Path::new(&trace).exists());
}
