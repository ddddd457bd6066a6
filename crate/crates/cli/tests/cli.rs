use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn pdcgm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdcgm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn lands() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../instances/lands.tssp")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn report_field<'a>(report: &'a str, key: &str) -> &'a str {
    report
        .lines()
        .find_map(|l| l.strip_prefix(key))
        .unwrap_or_else(|| panic!("no `{key}` in\n{report}"))
        .trim()
}

#[test]
fn gen_tssp_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.tssp");
    let b = dir.path().join("b.tssp");
    for p in [&a, &b] {
        let out = pdcgm(&[
            "gen-tssp",
            "--seed",
            "7",
            "--scenarios",
            "5",
            "-o",
            p.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{out:?}");
    }
    let (a, b) = (fs::read(a).unwrap(), fs::read(b).unwrap());
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn gen_mcnf_to_stdout_matches_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("x.net");
    let out = pdcgm(&["gen-mcnf", "--seed", "11", "-o", f.to_str().unwrap()]);
    assert!(out.status.success());
    let printed = pdcgm(&["gen-mcnf", "--seed", "11"]);
    assert_eq!(printed.stdout, fs::read(f).unwrap());
}

#[test]
fn verify_suites_pass() {
    for suite in ["mcnf-small", "tssp-small"] {
        let out = pdcgm(&["verify", "--suite", suite]);
        assert_eq!(out.status.code(), Some(0), "{out:?}");
        assert!(stdout(&out).contains("50/50 passed"), "{}", stdout(&out));
    }
}

#[test]
fn solve_tssp_reports_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let out = pdcgm(&[
        "solve-tssp",
        lands().to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let report = stdout(&out);
    assert_eq!(report_field(&report, "objective "), "3.81853E+02");
    let outer: usize = report_field(&report, "outer iterations").parse().unwrap();
    let csv = fs::read_to_string(trace).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("iter,ub,lb,gap,eps,zsp,cols_added,rmp_s,oracle_s")
    );
    assert_eq!(lines.count(), outer);
}

#[test]
fn solve_mcnf_in_both_modes_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("g.net");
    let f = f.to_str().unwrap();
    assert!(pdcgm(&["gen-mcnf", "--seed", "4", "-o", f])
        .status
        .success());
    let full = |mode: &str| -> f64 {
        let out = pdcgm(&["solve-mcnf", f, "--mode", mode, "--delta", "1e-7"]);
        assert_eq!(out.status.code(), Some(0), "{out:?}");
        let report = stdout(&out);
        assert!(report.contains("active rows"));
        report_field(&report, "objective (full)").parse().unwrap()
    };
    let (p, s) = (full("pdcgm"), full("standard"));
    assert!((p - s).abs() <= 1e-7 * (1.0 + s.abs()), "{p} vs {s}");
}

#[test]
fn parse_errors_exit_64_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.net");
    fs::write(&f, "mcnf 2 1 1\narc 0 1 oops 5\n").unwrap();
    let out = pdcgm(&["solve-mcnf", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(64));
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("line 2"),
        "{out:?}"
    );
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(pdcgm(&[]).status.code(), Some(64));
    assert_eq!(
        pdcgm(&["verify", "--suite", "nope"]).status.code(),
        Some(64)
    );
    assert_eq!(
        pdcgm(&["solve-tssp", "/nonexistent/file.tssp"])
            .status
            .code(),
        Some(64)
    );
    let out = pdcgm(&["solve-tssp", lands().to_str().unwrap(), "--gamma", "2"]);
    assert_eq!(out.status.code(), Some(64), "{out:?}");
    assert_eq!(pdcgm(&["--help"]).status.code(), Some(0));
}

#[test]
fn outer_limit_exits_3() {
    let out = pdcgm(&["solve-tssp", lands().to_str().unwrap(), "--max-outer", "1"]);
    assert_eq!(out.status.code(), Some(3), "{out:?}");
}
