use std::path::Path;
use std::process::Command;

use wmac::cli::main_with;
use wmac::error::exit;

fn wmac(args: &[&str]) -> (u8, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = main_with(std::iter::once("wmac").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn files_in(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .map(|d| {
            d.map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
                .collect()
        })
        .unwrap_or_default();
    names.sort();
    names
}

#[test]
fn negative_dt_is_a_bad_flag_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let (code, stdout, stderr) = wmac(&["run", "--scenario", "1", "--dt", "-1", "--out", out.to_str().unwrap()]);
    assert_eq!(code, exit::CONFIG);
    assert!(stdout.is_empty());
    let report: serde_json::Value = serde_json::from_str(stderr.trim()).unwrap();
    assert_eq!(report["error"], "bad_flag");
    assert!(!out.exists());
}

#[test]
fn bad_flags_are_rejected_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    for args in [
        vec!["run", "--scenario", "7", "--out", out],
        vec!["run", "--scenario", "1", "--controller", "mann-fancy", "--out", out],
        vec!["run", "--scenario", "1", "--t-end", "0", "--out", out],
        vec![
            "run",
            "--scenario",
            "1",
            "--controller",
            "mann-hard",
            "--realloc",
            "always",
            "--out",
            out,
        ],
        vec!["run", "--scenario", "no-such-file.toml", "--out", out],
        vec!["run", "--out", out],
        vec!["compare", "--scenario", "1", "--dt", "nan", "--out", out],
        vec!["launch"],
    ] {
        let (code, _, stderr) = wmac(&args);
        assert_eq!(code, exit::CONFIG, "{args:?}");
        assert!(stderr.contains("\"bad_flag\""), "{args:?}: {stderr}");
    }
    assert!(files_in(dir.path()).is_empty());
}

#[test]
fn run_writes_trace_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("case");
    let (code, stdout, _) = wmac(&[
        "run",
        "--scenario",
        "0",
        "--controller",
        "mann-proposed",
        "--realloc",
        "always",
        "--t-end",
        "15",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, exit::OK);
    assert!(stdout.contains("MANN proposed (N = 10)"));
    assert_eq!(files_in(&out), ["summary.json", "trace-mann-proposed.csv"]);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    let run = &summary["runs"][0];
    assert_eq!(run["config"]["scenario"]["controller"]["reallocation"], "always");
    assert_eq!(run["config"]["scenario"]["duration"], 15.0);
    assert_eq!(run["jump_times"], serde_json::json!([10.0]));
}

#[test]
fn run_accepts_key_and_seed_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, _, stderr) = wmac(&[
        "run",
        "--scenario",
        "1",
        "--controller",
        "mann-hard",
        "--key",
        "state",
        "--seed",
        "5",
        "--dt",
        "0.002",
        "--t-end",
        "3",
        "--out",
        out,
    ]);
    assert_eq!(code, exit::OK, "{stderr}");
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    let config = &summary["runs"][0]["config"];
    assert_eq!(config["scenario"]["controller"]["key"], "state");
    assert_eq!(config["scenario"]["seed"], 5);
    assert_eq!(config["sim"]["seed"], 5);
    assert_eq!(config["sim"]["dt"], 0.002);
}

#[test]
fn run_from_scenario_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("short.toml");
    std::fs::write(
        &file,
        "duration = 4.0\n[jumps]\nkind = \"explicit\"\nevents = []\n[memory]\ntheta = 0.25\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let (code, _, stderr) = wmac(&[
        "run",
        "--scenario",
        file.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, exit::OK, "{stderr}");
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["runs"][0]["scenario_id"], "short");
    assert_eq!(summary["runs"][0]["config"]["scenario"]["memory"]["theta"], 0.25);
}

#[test]
fn scenario_file_errors_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.toml");
    std::fs::write(&empty, "").unwrap();
    let (code, _, stderr) = wmac(&[
        "run",
        "--scenario",
        empty.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, exit::CONFIG);
    assert!(stderr.contains("validation_error"));
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[gains]\nkv = [\n").unwrap();
    let (code, _, stderr) = wmac(&[
        "run",
        "--scenario",
        bad.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, exit::CONFIG);
    assert!(stderr.contains("parse_error"));
    assert_eq!(files_in(dir.path()), ["bad.toml", "empty.toml"]);
}

#[test]
fn divergence_has_its_own_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("wild.toml");
    std::fs::write(
        &file,
        "duration = 2.0\n[jumps]\nkind = \"explicit\"\nevents = []\n[[reference]]\nkind = \"sine\"\namplitude = 3000.0\nomega = 0.5\n[[reference]]\nkind = \"constant\"\nvalue = 0.0\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let (code, _, stderr) = wmac(&[
        "run",
        "--scenario",
        file.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, exit::DIVERGED);
    assert_ne!(exit::DIVERGED, exit::CONFIG);
    assert!(stderr.contains("\"diverged\""), "{stderr}");
    assert!(!out.exists());
}

#[test]
fn compare_writes_four_traces_and_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, stderr) = wmac(&[
        "compare",
        "--scenario",
        "0",
        "--t-end",
        "12",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, exit::OK, "{stderr}");
    assert_eq!(
        files_in(dir.path()),
        [
            "summary.json",
            "table.txt",
            "trace-mann-hard.csv",
            "trace-mann-proposed.csv",
            "trace-mann-soft.csv",
            "trace-nn.csv"
        ]
    );
    for label in [
        "NN (N = 14)",
        "MANN soft (N = 10)",
        "MANN hard (N = 10)",
        "MANN proposed (N = 10)",
        "% reduction",
    ] {
        assert!(stdout.contains(label), "{label}");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["runs"].as_array().unwrap().len(), 4);
    assert_eq!(summary["tables"].as_array().unwrap().len(), 2);
    assert_eq!(summary["tables"][0]["baseline"], "MANN soft (N = 10)");
}

#[test]
fn quick_verify_passes() {
    let (code, stdout, _) = wmac(&["verify", "--quick"]);
    assert_eq!(code, exit::OK, "{stdout}");
    assert!(stdout.lines().filter(|l| l.starts_with("PASS")).count() >= 7);
    assert!(!stdout.contains("FAIL"));
}

#[test]
fn help_exits_cleanly() {
    let (code, stdout, _) = wmac(&["--help"]);
    assert_eq!(code, exit::OK);
    for sub in ["run", "compare", "verify"] {
        assert!(stdout.contains(sub));
    }
}

#[test]
fn output_directory_defaults_to_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("from-env");
    let status = Command::new(env!("CARGO_BIN_EXE_wmac"))
        .args(["run", "--scenario", "1", "--controller", "nn", "--t-end", "1"])
        .env("WMAC_OUT_DIR", &target)
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    assert_eq!(files_in(&target), ["summary.json", "trace-nn.csv"]);

    let status = Command::new(env!("CARGO_BIN_EXE_wmac"))
        .args(["run", "--scenario", "1", "--dt", "-1"])
        .env("WMAC_OUT_DIR", dir.path().join("never"))
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(exit::CONFIG as i32));
    assert!(!dir.path().join("never").exists());
}
