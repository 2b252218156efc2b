use std::path::Path;
use std::process::{Command, Output};

const CAUCHY: &str = r#"{"dim":1, "A":[[0.0]], "drift":[0.0], "profile":{"kind":"stable","alpha":1.0}, "comp_lower":1.0, "comp_upper":1.0, "symmetric":true}"#;

fn levyhk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levyhk"))
        .args(args)
        .env_remove("LEVYHK_THREADS")
        .output()
        .expect("binary runs")
}

fn model_file(dir: &Path) -> String {
    let p = dir.join("cauchy1d.json");
    std::fs::write(&p, CAUCHY).unwrap();
    p.to_str().unwrap().to_string()
}

fn field(line: &str, key: &str) -> f64 {
    line.split_whitespace()
        .find_map(|w| w.strip_prefix(&format!("{key}=")))
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn characteristics_of_cauchy() {
    let dir = tempfile::tempdir().unwrap();
    let m = model_file(dir.path());
    let out = levyhk(&["characteristics", "--model", &m, "--r", "1.0"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!((field(&text, "h") - 4.0).abs() < 1e-12, "{text}");
    assert!((field(&text, "K") - 2.0).abs() < 1e-12);
    assert!((field(&text, "psi_star") - std::f64::consts::PI).abs() < 1e-10);
}

#[test]
fn density_csv() {
    let dir = tempfile::tempdir().unwrap();
    let m = model_file(dir.path());
    let out = levyhk(&["density", "--model", &m, "--t", "1", "--grid", "-10:10:101"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# levyhk density\n# config: {"));
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 101);
    let zero = rows[50].split(',').collect::<Vec<_>>();
    assert_eq!(zero[0].parse::<f64>().unwrap(), 0.0);
    let p: f64 = zero[1].parse().unwrap();
    assert!((p - 0.1013212).abs() < 1e-7, "{p}");
    // 17 significant digits
    assert_eq!(zero[1].split('e').next().unwrap().len(), 18);
}

#[test]
fn sample_output_is_reproducible() {
    let run = |threads: &str| {
        let dir = tempfile::tempdir().unwrap();
        let status = Command::new(env!("CARGO_BIN_EXE_levyhk"))
            .args(["sample", "--model", "cauchy", "--t", "1", "--n", "5000", "--bins", "40", "--out", "out.csv"])
            .args(["--threads", threads])
            .current_dir(dir.path())
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
        std::fs::read(dir.path().join("out.csv")).unwrap()
    };
    let (x, y) = (run("1"), run("3"));
    assert_eq!(x, y);
    let text = String::from_utf8(x).unwrap();
    assert!(text.lines().any(|l| l == "bin_center,mass,stderr"));
    assert!(text.contains("\"seed\":1"));
}

#[test]
fn verify_lemmas_passes() {
    let dir = tempfile::tempdir().unwrap();
    let m = model_file(dir.path());
    let out_dir = dir.path().join("run");
    let out = levyhk(&["verify", "--experiment", "lemmas", "--model", &m, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["passed"], true);
    let csv = std::fs::read_to_string(out_dir.join("ratios.csv")).unwrap();
    assert!(csv.starts_with("# levyhk verify"));
}

#[test]
fn verify_failing_chain_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = levyhk(&["verify", "--experiment", "chain", "--model", "log-heavy-1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(dir.path().join("report.json").exists());
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(levyhk(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(levyhk(&["density", "--model", "no-such-model", "--t", "1", "--grid", "0:1:3"]).status.code(), Some(2));
    assert_eq!(levyhk(&["density", "--model", "cauchy", "--t", "1", "--grid", "0:1"]).status.code(), Some(2));
    assert_eq!(levyhk(&["verify", "--experiment", "nope"]).status.code(), Some(2));
    assert_eq!(levyhk(&["density", "--model", "cauchy", "--t", "-1", "--grid", "0:1:3"]).status.code(), Some(2));
}

#[test]
fn numeric_failure_exits_three() {
    let out = levyhk(&["sample", "--model", "stable-1.5", "--t", "1", "--eps", "1e-6", "--n", "100", "--jump-budget", "1e4"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("jump budget"));
}

#[test]
fn thread_env_is_respected() {
    let out = Command::new(env!("CARGO_BIN_EXE_levyhk"))
        .args(["bound", "--model", "cauchy", "--t", "0.25", "--grid", "-1:1:3"])
        .env("LEVYHK_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rho0: f64 = text.lines().find(|l| l.starts_with("0.0")).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    // ρ at the origin is H^{-1} = 1 for the Cauchy model at t = 1/4
    assert!((rho0 - 1.0).abs() < 1e-12);
    let bad = Command::new(env!("CARGO_BIN_EXE_levyhk"))
        .args(["bound", "--model", "cauchy", "--t", "0.25", "--grid", "-1:1:3"])
        .env("LEVYHK_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(0));
}
