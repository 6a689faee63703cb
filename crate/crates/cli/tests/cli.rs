use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn predcorr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_predcorr")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn read_json(p: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn run_ok(args: &[&str]) -> Output {
    let out = predcorr(args);
    assert_eq!(code(&out), 0, "{args:?}\nstdout: {}\nstderr: {}", stdout(&out), stderr(&out));
    out
}

/// Write the default two-block instance with `r`, `s` replaced.
fn two_block_instance(dir: &Path, r: f64, s: f64) -> PathBuf {
    let gen_dir = dir.join("gen");
    run_ok(&["run", "--generator", "two-block-quadratic", "--budget", "1", "--out", path_str(&gen_dir)]);
    let mut doc = read_json(gen_dir.join("instance.json"));
    doc["r"] = r.into();
    doc["s"] = s.into();
    let path = dir.join(format!("two_block_{r}_{s}.json"));
    fs::write(&path, doc.to_string()).unwrap();
    path
}

fn pennies_config(dir: &Path, factor: f64) -> PathBuf {
    let path = dir.join(format!("pennies_{factor}.json"));
    let config = serde_json::json!({
        "generator": { "name": "matching-pennies", "step_factor": factor, "alpha": 0.5 }
    });
    fs::write(&path, config.to_string()).unwrap();
    path
}

#[test]
fn certify_exit_codes() {
    let dir = TempDir::new().unwrap();

    let ok = predcorr(&["certify", "--config", path_str(&pennies_config(dir.path(), 0.8))]);
    assert_eq!(code(&ok), 0, "{}", stderr(&ok));
    assert!(stdout(&ok).contains("satisfied: true"));
    assert!(stdout(&ok).contains("H min pivot"));

    let fail = predcorr(&["certify", "--config", path_str(&pennies_config(dir.path(), 0.7))]);
    assert_eq!(code(&fail), 1);
    assert!(stdout(&fail).contains("satisfied: false"));

    let two_block = two_block_instance(dir.path(), 0.5, 0.5);
    assert_eq!(code(&predcorr(&["certify", "--instance", path_str(&two_block)])), 0);

    // r + s = 0 makes the correction matrix singular
    let singular = two_block_instance(dir.path(), -0.5, 0.5);
    let out = predcorr(&["certify", "--instance", path_str(&singular)]);
    assert_eq!(code(&out), 2, "{}", stdout(&out));

    let missing = dir.path().join("missing.json");
    assert_eq!(code(&predcorr(&["certify", "--instance", path_str(&missing)])), 2);
    assert_eq!(code(&predcorr(&["certify"])), 2);
}

#[test]
fn run_writes_trace_and_summary() {
    let dir = TempDir::new().unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        run_ok(&[
            "run",
            "--generator",
            "two-block-quadratic",
            "--seed",
            "4",
            "--mode",
            "faster",
            "--budget",
            "100",
            "--out",
            path_str(out),
        ]);
    }
    let trace = fs::read_to_string(out_a.join("trace.csv")).unwrap();
    let lines: Vec<&str> = trace.lines().collect();
    assert_eq!(lines.len(), 101);
    assert_eq!(lines[0], "k,tau,gap_at_star,feasibility,pointwise_residual,objective");
    assert!(lines[1].starts_with("0,"));
    assert!(lines[100].starts_with("99,"));
    assert_eq!(fs::read(out_a.join("trace.csv")).unwrap(), fs::read(out_b.join("trace.csv")).unwrap());
    assert_eq!(fs::read(out_a.join("instance.json")).unwrap(), fs::read(out_b.join("instance.json")).unwrap());

    let mut summary = read_json(out_a.join("summary.json"));
    assert_eq!(summary["family"], "two-block");
    assert_eq!(summary["mode"], "faster");
    assert_eq!(summary["budget"], 100);
    assert_eq!(summary["tau_init"], 0.5);
    assert_eq!(summary["certificate"]["satisfied"], true);
    assert!(summary["certificate"]["h_min_pivot"].as_f64().unwrap() > 0.0);
    assert!(summary["certificate"]["g_min_pivot"].as_f64().unwrap() > 0.0);
    for key in ["gap", "feasibility", "residual"] {
        assert!(summary["final"][key].is_f64(), "{key}");
    }
    assert!(summary["runtime_seconds"].as_f64().unwrap() >= 0.0);
    let mut other = read_json(out_b.join("summary.json"));
    summary.as_object_mut().unwrap().remove("runtime_seconds");
    other.as_object_mut().unwrap().remove("runtime_seconds");
    assert_eq!(summary, other);
}

#[test]
fn saved_instance_reproduces_run() {
    let dir = TempDir::new().unwrap();
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    run_ok(&["run", "--generator", "saddle-quadratic", "--seed", "3", "--budget", "50", "--out", path_str(&first)]);
    let instance = first.join("instance.json");
    run_ok(&["run", "--instance", path_str(&instance), "--budget", "50", "--out", path_str(&second)]);
    assert_eq!(fs::read(first.join("trace.csv")).unwrap(), fs::read(second.join("trace.csv")).unwrap());
}

#[test]
fn faster_l1_reaches_small_gap() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("l1");
    run_ok(&["run", "--generator", "two-block-l1", "--mode", "faster", "--budget", "2000", "--out", path_str(&out)]);
    let summary = read_json(out.join("summary.json"));
    let gap = summary["final"]["gap"].as_f64().unwrap();
    assert!(gap.abs() <= 1e-6, "gap {gap}");
}

#[test]
fn uncertified_runs_need_override() {
    let dir = TempDir::new().unwrap();
    let config = pennies_config(dir.path(), 0.7);
    let out = dir.path().join("run");
    let refused = predcorr(&["run", "--config", path_str(&config), "--budget", "10", "--out", path_str(&out)]);
    assert_eq!(code(&refused), 1);
    assert!(stderr(&refused).contains("--override-uncertified"));
    assert!(!out.join("trace.csv").exists());

    run_ok(&[
        "run",
        "--config",
        path_str(&config),
        "--budget",
        "10",
        "--out",
        path_str(&out),
        "--override-uncertified",
    ]);
    let summary = read_json(out.join("summary.json"));
    assert_eq!(summary["certificate"]["satisfied"], false);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("cfg");
    let config = dir.path().join("run.json");
    let text = serde_json::json!({
        "generator": { "name": "multi-block-quadratic", "n": [1, 2], "l": 2 },
        "seed": 9,
        "mode": "faster",
        "budget": 40,
        "tau_init": 0.25,
        "out": path_str(&out),
    });
    fs::write(&config, text.to_string()).unwrap();
    run_ok(&["run", "--config", path_str(&config), "--budget", "30"]);
    let summary = read_json(out.join("summary.json"));
    assert_eq!(summary["family"], "multi-block");
    assert_eq!(summary["budget"], 30);
    assert_eq!(summary["tau_init"], 0.25);
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 31);
    // τ₀ = 1/(1/τ_init + 1)
    assert!(trace.lines().nth(1).unwrap().starts_with("0,2e-1,"));

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"generator":{"name":"two-block-l1"},"budgett":3}"#).unwrap();
    assert_eq!(code(&predcorr(&["run", "--config", path_str(&bad), "--out", path_str(&out)])), 1);
    for args in [["--budget", "0"], ["--tau-init", "1"]] {
        let o = predcorr(&["run", "--generator", "two-block-l1", "--out", path_str(&out), args[0], args[1]]);
        assert_eq!(code(&o), 1, "{args:?}");
    }
}

#[test]
fn instance_without_oracle_leaves_gap_empty() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("game");
    run_ok(&["run", "--generator", "matrix-game", "--budget", "5", "--out", path_str(&out)]);
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    for line in trace.lines().skip(1) {
        assert_eq!(line.split(',').nth(2), Some(""), "{line}");
    }
    assert!(read_json(out.join("summary.json"))["final"]["gap"].is_null());
}

#[test]
fn compare_runs_both_modes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("cmp");
    let o = run_ok(&["compare", "--generator", "two-block-quadratic", "--budget", "200", "--out", path_str(&out)]);
    assert!(stdout(&o).contains("baseline"));
    for mode in ["baseline", "faster"] {
        let summary = read_json(out.join(mode).join("summary.json"));
        assert_eq!(summary["mode"], mode);
        assert_eq!(fs::read_to_string(out.join(mode).join("trace.csv")).unwrap().lines().count(), 201);
    }
    let both = read_json(out.join("compare.json"));
    assert_eq!(both["baseline"]["mode"], "baseline");
    assert_eq!(both["faster"]["mode"], "faster");
}

fn synthetic_trace(dir: &Path, power: f64) -> PathBuf {
    let path = dir.join(format!("power_{power}.csv"));
    let mut text = String::from("k,tau,gap_at_star,feasibility,pointwise_residual,objective\n");
    for k in 0..2000usize {
        let m = if k == 0 { 1.0 } else { (k as f64).powf(-power) };
        text.push_str(&format!("{k},1e0,,0e0,{m:e},0e0\n"));
    }
    fs::write(&path, text).unwrap();
    path
}

fn fitted_slope(out: &Output) -> f64 {
    let report: Value = serde_json::from_str(&stdout(out)).expect("rate report json");
    report["slope"].as_f64().unwrap()
}

#[test]
fn rates_on_exact_power_laws() {
    let dir = TempDir::new().unwrap();
    for power in [2.0, 1.0] {
        let trace = synthetic_trace(dir.path(), power);
        let out = run_ok(&["rates", path_str(&trace), "--window", "100,1999"]);
        let slope = fitted_slope(&out);
        assert!((slope + power).abs() <= 1e-6, "power {power}: slope {slope}");
    }
}

#[test]
fn rates_window_and_point_errors() {
    let dir = TempDir::new().unwrap();
    let trace = synthetic_trace(dir.path(), 1.0);
    let few = predcorr(&["rates", path_str(&trace), "--window", "100,110"]);
    assert_eq!(code(&few), 1);
    assert!(stderr(&few).contains("larger budget"), "{}", stderr(&few));
    assert_eq!(code(&predcorr(&["rates", path_str(&trace), "--window", "5,500"])), 1);
    assert_eq!(code(&predcorr(&["rates", path_str(&trace), "--window", "100,5000"])), 1);
    assert_eq!(code(&predcorr(&["rates", path_str(&trace), "--metric", "bogus"])), 1);
    // the gap column is empty
    assert_eq!(code(&predcorr(&["rates", path_str(&trace), "--metric", "gap_at_star"])), 1);
}

#[test]
fn faster_pointwise_residual_slope() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("q");
    run_ok(&[
        "run",
        "--generator",
        "two-block-quadratic",
        "--mode",
        "faster",
        "--budget",
        "2000",
        "--out",
        path_str(&out),
    ]);
    let trace = out.join("trace.csv");
    let report = run_ok(&["rates", path_str(&trace), "--window", "100,2000"]);
    let slope = fitted_slope(&report);
    assert!(slope <= -1.8, "slope {slope}");
}
