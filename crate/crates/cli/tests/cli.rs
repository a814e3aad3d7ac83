use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_colored-ito"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

#[test]
fn help_exits_zero_on_every_subcommand() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("converge"));
    for sub in [
        "noise-stats",
        "simulate",
        "converge",
        "plot-script",
        "truncation",
    ] {
        let out = run(&[sub, "--help"]);
        assert_eq!(out.status.code(), Some(0), "{sub}");
        assert!(
            String::from_utf8_lossy(&out.stdout).contains("Usage"),
            "{sub}"
        );
    }
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["converge", "--bogus"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        run(&["simulate", "--corrected", "--no-corrected"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        run(&["converge", "--dt-list", "1/11"]).status.code(),
        Some(1)
    );
}

#[test]
fn missing_config_exits_two_with_path() {
    let out = run(&["converge", "--config", "/no/such/dir/fig1.cfg"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/no/such/dir/fig1.cfg"));
}

#[test]
fn converge_reproduces_golden_csv() {
    let dir = tempfile::tempdir().unwrap();
    let members = dir.path().join("small.csv");
    let out = run(&[
        "converge",
        "--config",
        data("small.cfg").to_str().unwrap(),
        "--out",
        members.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(
        fs::read(&members).unwrap(),
        fs::read(data("small.csv")).unwrap()
    );
    assert_eq!(
        fs::read(dir.path().join("small.summary.csv")).unwrap(),
        fs::read(data("small.summary.csv")).unwrap()
    );
}

#[test]
fn plot_script_from_summary_and_members_agree() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.gp");
    let b = dir.path().join("b.gp");
    for (input, out) in [("small.summary.csv", &a), ("small.csv", &b)] {
        let status = run(&[
            "plot-script",
            data(input).to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(status.status.code(), Some(0));
    }
    let script = fs::read_to_string(&a).unwrap();
    assert_eq!(script, fs::read_to_string(&b).unwrap());
    assert_eq!(script.matches("<< EOD").count(), 3);
    assert_eq!(script.lines().filter(|l| *l == "EOD").count(), 3);
    assert!(script.contains("ref_half(x)") && script.contains("ref_one(x)"));
    assert!(script.trim_end().ends_with("unset multiplot"));
}

#[test]
fn simulate_prints_final_modes() {
    let out = run(&[
        "simulate",
        "--alpha",
        "1",
        "--dt-list",
        "1/22",
        "--seed",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 4);
    assert!(text.contains("l2_error"));

    let white_reference = run(&["simulate", "--alpha", "0", "--scheme", "midpoint_reference"]);
    assert_eq!(white_reference.status.code(), Some(2));
}

#[test]
fn truncation_without_coupling_returns_k0() {
    let out = run(&["truncation"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "1");
}
