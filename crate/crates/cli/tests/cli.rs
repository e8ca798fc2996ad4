use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hetassoc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn inverted_rate_bounds_are_rejected_by_name() {
    let out = run(&["validate", "--config", path(&config("bad_t_bounds.json"))]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("error:"), "{err}");
    assert!(err.contains("t_min exceeds t_max"), "{err}");
}

#[test]
fn missing_inputs_fail_cleanly() {
    assert!(!run(&["validate"]).status.success());
    assert!(!run(&["validate", "--config", "/nonexistent.json"]).status.success());
    assert!(!run(&["frobnicate"]).status.success());
}

#[test]
fn shipped_configs_validate() {
    for name in ["hsdpa_lte.json", "erlang.json", "small_hetnet.json"] {
        let stdout = ok(&["validate", "--config", path(&config(name))]);
        assert!(stdout.starts_with("ok:"), "{stdout}");
    }
}

#[test]
fn simulated_erlang_blocking_is_one_fifth() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "simulate",
        "--config",
        path(&config("erlang.json")),
        "--events",
        "1000000",
        "--seed",
        "7",
        "--out",
        path(dir.path()),
    ]);
    let summary = json(&dir.path().join("simulate.json"));
    let b = &summary["blocking"][0];
    let (mean, hw) = (b["mean"].as_f64().unwrap(), b["half_width"].as_f64().unwrap());
    assert!((mean - 0.2).abs() < 0.01, "{mean}");
    assert!((mean - 0.2).abs() <= hw, "{mean} ± {hw}");
    assert_eq!(summary["seed"], 7);
    assert_eq!(summary["horizon"], 1_000_000);
    let csv = fs::read_to_string(dir.path().join("simulate.csv")).unwrap();
    assert!(csv.contains("# seed: 7\n") && csv.contains("# horizon: 1000000\n"));
}

#[test]
fn short_simulations_warn() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "simulate",
        "--config",
        path(&config("erlang.json")),
        "--events",
        "3000",
        "--out",
        path(dir.path()),
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning:"));
}

fn sweep(dir: &Path, jobs: &str) {
    ok(&[
        "sweep",
        "--config",
        path(&config("small_hetnet.json")),
        "--traffic",
        "0.5:1.5:0.5",
        "--analyses",
        "nash,baselines,control",
        "--seed",
        "3",
        "--jobs",
        jobs,
        "--svg",
        "--out",
        path(dir),
    ]);
}

#[test]
fn sweeps_are_reproducible_and_complete() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    sweep(a.path(), "1");
    sweep(b.path(), "4");
    for f in [
        "utility_vs_traffic.csv",
        "blocking_vs_traffic.csv",
        "sweep.json",
        "utility_vs_traffic.svg",
        "blocking_vs_traffic.svg",
    ] {
        let x = fs::read(a.path().join(f)).unwrap();
        let y = fs::read(b.path().join(f)).unwrap();
        assert!(x == y, "{f} differs between runs");
    }
    let csv = fs::read_to_string(a.path().join("utility_vs_traffic.csv")).unwrap();
    assert!(csv.starts_with("# hetassoc "));
    assert!(csv.contains("# command: sweep\n# admission: redirect\n# traffic: 0.5:1.5:0.5\n"));
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].contains("nash_utility") && rows[0].contains("peak_rate_utility"));
}

#[test]
fn policies_of_the_wrong_shape_are_refused() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "steady",
        "--config",
        path(&config("small_hetnet.json")),
        "--policy",
        "1,2;2,1",
        "--out",
        path(dir.path()),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("labels"));
}

#[test]
fn strict_admission_is_recorded_and_changes_the_chain() {
    let cfg = config("small_hetnet.json");
    let everyone_on_one = "1,1,1,1,1,1,1,1,1;1,1,1,1,1,1,1,1,1";
    let blocking = |strict: bool| {
        let dir = tempfile::tempdir().unwrap();
        let mut args = vec!["steady", "--config", path(&cfg), "--policy", everyone_on_one];
        if strict {
            args.push("--strict-eq2");
        }
        args.extend(["--out", path(dir.path())]);
        ok(&args);
        let csv = fs::read_to_string(dir.path().join("steady.csv")).unwrap();
        let mode = if strict { "strict" } else { "redirect" };
        assert!(csv.contains(&format!("# admission: {mode}\n")));
        json(&dir.path().join("steady.json"))["overall_blocking"].as_f64().unwrap()
    };
    assert_ne!(blocking(true), blocking(false));
}

#[test]
fn every_subcommand_writes_its_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("small_hetnet.json");
    let base = ["--config", path(&cfg), "--out", path(dir.path()), "--jobs", "1"];
    for (cmd, files) in [
        ("enumerate", &["states.csv", "enumerate.json"][..]),
        ("steady", &["steady.csv", "generator.txt", "steady.json"]),
        ("utility", &["volumes.csv", "utility.json"]),
        ("nash", &["nash.csv", "nash.json"]),
        ("baseline", &["baseline.csv", "baseline.json"]),
        ("control", &["control.csv", "control.json"]),
    ] {
        let mut args = vec![cmd];
        args.extend(base);
        ok(&args);
        for f in files {
            assert!(dir.path().join(f).exists(), "{cmd} did not write {f}");
        }
    }
    let mut args = vec!["optimal", "--cap", "64"];
    args.extend(base);
    ok(&args);
    assert!(!json(&dir.path().join("optimal.json"))["policy"].is_null());
    let mut args = vec!["optimal", "--cap", "64", "--no-fallback"];
    args.extend(base);
    assert!(!run(&args).status.success());

    let states = fs::read_to_string(dir.path().join("states.csv")).unwrap();
    let header = states.lines().find(|l| !l.starts_with('#')).unwrap();
    assert!(header.starts_with("id,center@S1,center@S2,edge@S1,edge@S2,rate_center@S1"));
    assert_eq!(states.lines().filter(|l| !l.starts_with('#')).count(), 29);
}

#[test]
fn sharing_and_traffic_overrides_reach_the_config() {
    let stdout = ok(&[
        "validate",
        "--config",
        path(&config("hsdpa_lte.json")),
        "--erlangs",
        "2",
        "--sharing",
        "network",
    ]);
    assert!(stdout.contains(" 2 Erlangs offered"), "{stdout}");
}
