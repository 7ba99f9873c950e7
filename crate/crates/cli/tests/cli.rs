use std::io::Write;
use std::process::{Command, Output, Stdio};

fn gausswalk(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_gausswalk"))
        .args(args)
        .env_remove("GAUSSWALK_SEED")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn signs(out: &Output) -> Vec<i8> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| l.parse().unwrap())
        .collect()
}

#[test]
fn balance_signs_basis_vectors() {
    let out = gausswalk(&["balance"], "1,0,0\n0,1,0\n0,0,1\n");
    assert!(out.status.success());
    let s = signs(&out);
    assert_eq!(s.len(), 3);
    assert!(s.iter().all(|x| [-1, 1, 2].contains(x)));
}

#[test]
fn partial_and_full_sign_sets() {
    let input = "0.6,0.8\n1,0\n0,-1\n0.5,0.5\n".repeat(50);
    let partial = signs(&gausswalk(&["partial", "--seed", "4"], &input));
    assert!(partial.iter().all(|x| [-1, 0, 1].contains(x)));
    let full = signs(&gausswalk(&["full", "--seed", "4"], &input));
    assert_eq!(full.len(), 200);
    assert!(full.iter().all(|x| [-1, 1].contains(x)));
}

#[test]
fn empty_stream_is_fine() {
    let out = gausswalk(&["balance"], "");
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let summary: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(summary["vectors"], 0);
}

#[test]
fn balance_rejects_small_sigma() {
    let out = gausswalk(&["balance", "--sigma", "0.9"], "1,0\n");
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn partial_accepts_small_sigma() {
    let out = gausswalk(&["partial", "--sigma", "0.3"], "1,0\n");
    assert!(out.status.success());
}

#[test]
fn bad_delta_is_a_config_error() {
    assert_eq!(gausswalk(&["partial", "--delta", "0.7"], "").status.code(), Some(2));
}

#[test]
fn bad_input_exits_with_code_3() {
    for (format, input) in [("dense", "1,0\nabc\n"), ("dense", "2,0\n"), ("sparse", "1:0.5 0:0.5\n")] {
        let out = gausswalk(&["balance", "--format", format], input);
        assert_eq!(out.status.code(), Some(3), "{input:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
    }
}

#[test]
fn seed_comes_from_environment() {
    let input = "0.6,0.8\n0.8,-0.6\n".repeat(40);
    let run = |env: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_gausswalk"));
        cmd.arg("balance").stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::null());
        match env {
            Some(v) => cmd.env("GAUSSWALK_SEED", v),
            None => cmd.env_remove("GAUSSWALK_SEED"),
        };
        let mut child = cmd.spawn().unwrap();
        child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
        child.wait_with_output().unwrap().stdout
    };
    assert_eq!(run(Some("0")), run(None));
    assert_ne!(run(Some("99")), run(None));
    assert_eq!(run(Some("99")), gausswalk(&["balance", "--seed", "99"], &input).stdout);
}

#[test]
fn stats_out_receives_summary() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("stats.json");
    let out = gausswalk(
        &["dyadic", "--format", "sparse", "--stats-out", path.to_str().unwrap()],
        "0:1\n1:0.25\n2:0.001\n",
    );
    assert!(out.status.success());
    assert!(out.stderr.is_empty());
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(summary["mode"], "dyadic");
    assert_eq!(summary["vectors"], 3);
    assert!(summary["active_scales"].as_u64().unwrap() >= 2);
}

#[test]
fn verify_suites_pass() {
    for suite in ["identities", "stationarity", "inequality", "all"] {
        let out = gausswalk(&["verify", "--suite", suite], "");
        assert!(out.status.success(), "{suite}");
        let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(report["passed"], true);
    }
}

#[test]
fn simulate_is_reproducible() {
    let args = ["simulate", "--gen", "mixed_norms", "--mode", "full", "--t", "2000", "--n", "8", "--seed", "3"];
    let a = gausswalk(&args, "");
    let b = gausswalk(&args, "");
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let report: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!(report.get("wall_time_secs").is_none());
    assert!(report["rounds"].as_u64().is_some());
}

#[test]
fn simulate_csv_has_one_row_per_step() {
    let out = gausswalk(
        &["simulate", "--gen", "basis_cycle", "--mode", "balance", "--t", "50", "--n", "4", "--report", "csv"],
        "",
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 51);
    assert!(text.starts_with("step,max_running_discrepancy\n"));
}

#[test]
fn simulate_rejects_bad_sigma_for_balance() {
    let out = gausswalk(&["simulate", "--gen", "random_unit", "--mode", "balance", "--sigma", "0.5", "--t", "10"], "");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn generated_streams_feed_back_in() {
    let gen = gausswalk(&["generate", "--gen", "sparse_random", "--t", "100", "--n", "500", "--nnz", "5"], "");
    assert!(gen.status.success());
    let out = gausswalk(&["partial", "--format", "sparse"], &String::from_utf8(gen.stdout).unwrap());
    assert!(out.status.success());
    assert_eq!(signs(&out).len(), 100);
}
