use std::path::PathBuf;
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fclcas(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fclcas"))
        .current_dir(root())
        .env_remove("FCLCAS_TEST_KEY")
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn check_accepts_shipped_files_and_rejects_broken_ones() {
    for (spec, fcl) in [("specs/dragon.adsl", "constraints/dragon.fcl"), ("specs/farm.adsl", "constraints/farm.fcl")] {
        let out = fclcas(&["check", spec, fcl]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.fcl");
    std::fs::write(&bad, "constraint \"x\"\n  within[1, MAX] count(Nowhere) >= 1\n").unwrap();
    let out = fclcas(&["check", "specs/dragon.adsl", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("Nowhere"), "{}", stderr(&out));
}

#[test]
fn simulate_exit_codes_and_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let report = tmp.path().join("report.jsonl");
    let out = fclcas(&["simulate", "--am", "builtin:dragon-baseline", "--seed", "42"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let out = fclcas(&["simulate", "--am", "builtin:dragon-idle", "--report", report.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    // rendering a report exits like the run that produced it
    let out = fclcas(&["report", "--in", report.to_str().unwrap()]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
    assert!(stdout(&out).contains("The dragon has to die"), "{}", stdout(&out));
    let out = fclcas(&["report", "--in", report.to_str().unwrap(), "--render", "feedback:metrics"]);
    assert!(stdout(&out).contains("win rate: 0%"), "{}", stdout(&out));

    let out = fclcas(&["simulate", "--am", "builtin:no-such-am"]);
    assert_eq!(code(&out), 2);
    let out = fclcas(&["simulate", "--am", "builtin:dragon-baseline", "--param", "dragon_hp"]);
    assert_eq!(code(&out), 2);
    let out = fclcas(&["simulate", "--no-such-flag"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn verify_both_agrees_on_simulated_traces() {
    let tmp = tempfile::tempdir().unwrap();
    for (am, expected) in [("builtin:dragon-baseline", 0), ("builtin:dragon-idle", 1)] {
        let trace = tmp.path().join("trace.jsonl");
        let out = fclcas(&["simulate", "--am", am, "--seed", "7", "--trace", trace.to_str().unwrap()]);
        assert_eq!(code(&out), expected, "{}", stderr(&out));
        let out = fclcas(&["verify", "--trace", trace.to_str().unwrap(), "--constraints", "constraints/dragon.fcl", "--both"]);
        assert_eq!(code(&out), expected, "{am}: {}", stderr(&out));
        assert!(stderr(&out).contains("oracle agreement on 8 constraints"), "{}", stderr(&out));
    }
}

#[test]
fn shipped_trace_verifies() {
    let out = fclcas(&[
        "verify",
        "--trace",
        "traces/dragon_baseline_seed42.jsonl",
        "--constraints",
        "constraints/dragon.fcl",
        "--spec",
        "specs/dragon.adsl",
        "--format",
        "records",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = fclcas(&["verify", "--trace", "traces/dragon_idle_seed42.jsonl", "--constraints", "constraints/dragon.fcl", "--offline"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn prompt_variants() {
    let with = stdout(&fclcas(&["prompt"]));
    let without = stdout(&fclcas(&["prompt", "--variant", "without-constraints"]));
    assert!(with.contains("Think step by step") && without.contains("Think step by step"));
    assert!(with.contains("Farmers never leave the Village."));
    assert!(!without.contains("Farmers never leave the Village."));
    assert_eq!(code(&fclcas(&["prompt", "--variant", "sideways"])), 2);
}

#[test]
fn loop_and_experiment_with_mock_backend() {
    let out = fclcas(&["loop", "--backend", "mock:fixtures/two-step"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("iteration 2: valid"), "{text}");

    let out = fclcas(&["loop", "--backend", "mock:fixtures/ten-invalid", "--mode", "generic-only"]);
    assert_eq!(code(&out), 1);

    let tmp = tempfile::tempdir().unwrap();
    let table = tmp.path().join("table.csv");
    let out = fclcas(&[
        "experiment",
        "--backend",
        "mock:fixtures/one-valid",
        "--repeats",
        "2",
        "--out",
        table.to_str().unwrap(),
        "--jobs",
        "2",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = std::fs::read_to_string(&table).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 2 * 2);
}

#[test]
fn http_backend_needs_the_key_in_the_environment() {
    let out = fclcas(&["loop", "--backend", "http", "--api-key-env", "FCLCAS_TEST_KEY"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("FCLCAS_TEST_KEY"), "{}", stderr(&out));
}
