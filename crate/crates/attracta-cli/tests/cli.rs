//! End-to-end exit-code and output contract tests for the binary.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};
use std::sync::atomic::{AtomicU32, Ordering};

static COUNTER: AtomicU32 = AtomicU32::new(0);

fn scratch_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "attracta-cli-test-{}-{}",
        std::process::id(),
        COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &std::path::Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_attracta"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

const SQRT_PAIR: &str = r#"{
  "dimension": 2,
  "rates": [{"kind": "constant", "value": 1.0}, {"kind": "constant", "value": 1.0}],
  "nonlinearity": {"model": "sqrt_pair", "params": {}},
  "distributions": {"template": {"kind": "point", "lag": 1.0}},
  "history": {"kind": "constant", "values": [0.2, 3.0]}
}"#;

const REMARK_LINEAR: &str = r#"{
  "dimension": 2,
  "nonlinearity": {"model": "hopfield", "params": {"b": [1.0, 1.0], "c": [[0.5, 2.0], [0.0625, 0.5]], "activation": "identity"}},
  "distributions": {"template": {"kind": "point", "lag": 1.0}},
  "history": {"kind": "constant", "values": [0.05, -0.025]}
}"#;

const MACKEY_GLASS: &str = r#"{
  "dimension": 1,
  "rates": [{"kind": "constant", "value": 1.0}],
  "nonlinearity": {"model": "mackey_glass_patch", "params": {"beta": [2.0], "exponent": 2.0, "a": [[0.0]]}},
  "distributions": {"template": {"kind": "point", "lag": 1.0}},
  "history": {"kind": "constant", "values": [0.8]}
}"#;

const UNCERTIFIABLE_LINEAR: &str = r#"{
  "dimension": 2,
  "nonlinearity": {"model": "hopfield", "params": {"b": [1.0, 1.0], "c": [[0.6, 0.6], [0.6, 0.6]], "activation": "identity"}},
  "distributions": {"template": {"kind": "point", "lag": 1.0}},
  "history": {"kind": "constant", "values": [0.5, 0.5]}
}"#;

#[test]
fn simulate_reaches_equilibrium_and_is_deterministic() {
    let dir = scratch_dir();
    let cfg = write_config(&dir, "sqrt.json", SQRT_PAIR);
    let out_a = dir.join("a.csv");
    let out_b = dir.join("b.csv");

    for out in [&out_a, &out_b] {
        let r = run(&[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--t-end",
            "60",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&r), 0, "stderr: {}", String::from_utf8_lossy(&r.stderr));
    }

    let a = fs::read(&out_a).unwrap();
    let b = fs::read(&out_b).unwrap();
    assert_eq!(a, b, "identical runs must produce byte-identical CSV");

    let text = String::from_utf8(a).unwrap();
    let mut lines = text.trim_end().split("\r\n");
    assert_eq!(lines.next().unwrap(), "t,x1,x2");
    let last = lines.last().unwrap();
    let fields: Vec<f64> = last.split(',').map(|v| v.parse().unwrap()).collect();
    assert!((fields[0] - 60.0).abs() < 1e-9);
    assert!((fields[1] - 1.0).abs() < 1e-3, "x(60) = {}", fields[1]);
    assert!((fields[2] - 1.0).abs() < 1e-3, "y(60) = {}", fields[2]);
}

#[test]
fn simulate_resample_adds_uniform_rows() {
    let dir = scratch_dir();
    let cfg = write_config(&dir, "sqrt.json", SQRT_PAIR);
    let r = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--t-end",
        "5",
        "--resample",
        "0.5",
    ]);
    assert_eq!(exit_code(&r), 0);
    let text = String::from_utf8(r.stdout).unwrap();
    for want in ["\r\n5.0000000000000000e-1,", "\r\n2.5000000000000000e0,"] {
        assert!(text.contains(want), "missing resampled row {want:?}");
    }
}

#[test]
fn simulate_domain_exit_exits_2() {
    // strong logistic overshoot from far above capacity drives the state
    // negative, leaving the positive orthant
    let dir = scratch_dir();
    let cfg = write_config(
        &dir,
        "blowup.json",
        r#"{
          "dimension": 1,
          "rates": [{"kind": "constant", "value": 1.0}],
          "nonlinearity": {"model": "logistic_patch", "params": {"beta": [8.0], "capacity": [1.0], "a": [[0.0]]}},
          "distributions": {"template": {"kind": "point", "lag": 1.0}},
          "history": {"kind": "constant", "values": [5.0]}
        }"#,
    );
    let r = run(&["simulate", "--config", cfg.to_str().unwrap(), "--t-end", "50"]);
    assert_eq!(exit_code(&r), 2, "stderr: {}", String::from_utf8_lossy(&r.stderr));
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(err.contains("left the domain"), "stderr: {err}");
}

#[test]
fn simulate_malformed_config_exits_3() {
    let dir = scratch_dir();
    let cfg = write_config(&dir, "broken.json", "{ this is not json");
    let r = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(exit_code(&r), 3);
}

#[test]
fn simulate_empty_interval_exits_3() {
    let dir = scratch_dir();
    let cfg = write_config(&dir, "sqrt.json", SQRT_PAIR);
    let r = run(&["simulate", "--config", cfg.to_str().unwrap(), "--t-end=-1"]);
    assert_eq!(exit_code(&r), 3);
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(err.contains("empty integration interval"), "stderr: {err}");
}

#[test]
fn certify_benchmark_linear_system() {
    let dir = scratch_dir();
    let cfg = write_config(&dir, "remark.json", REMARK_LINEAR);
    let out = dir.join("cert.json");
    let r = run(&[
        "certify",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&r), 0, "stderr: {}", String::from_utf8_lossy(&r.stderr));

    let cert: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(cert["verdict"], "Certified");
    assert_eq!(cert["method"], "MMatrix");
    assert!((cert["alpha"].as_f64().unwrap() - 0.95).abs() < 1e-9);
    let xi = cert["xi"].as_array().unwrap();
    assert!((xi[0].as_f64().unwrap() - 20.0).abs() < 1e-9);
    assert!((xi[1].as_f64().unwrap() - 4.5).abs() < 1e-9);
    assert_eq!(cert["comparison_flower"], false);
    assert_eq!(cert["boxes"].as_array().unwrap().len(), 8);
}

#[test]
fn certify_is_deterministic_for_fixed_seed() {
    let dir = scratch_dir();
    let cfg = write_config(&dir, "remark.json", REMARK_LINEAR);
    let out_a = dir.join("a.json");
    let out_b = dir.join("b.json");
    for out in [&out_a, &out_b] {
        let r = run(&[
            "certify",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "77",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&r), 0);
    }
    assert_eq!(fs::read(&out_a).unwrap(), fs::read(&out_b).unwrap());
}

#[test]
fn certify_open_problem_model_exits_4() {
    let dir = scratch_dir();
    let cfg = write_config(&dir, "mackey.json", MACKEY_GLASS);
    let r = run(&["certify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(exit_code(&r), 4);
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(err.contains("open problem"), "stderr: {err}");
}

#[test]
fn certify_spectral_radius_above_one_exits_1() {
    let dir = scratch_dir();
    let cfg = write_config(&dir, "heavy.json", UNCERTIFIABLE_LINEAR);
    let r = run(&["certify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(exit_code(&r), 1, "stderr: {}", String::from_utf8_lossy(&r.stderr));
    let cert: serde_json::Value = serde_json::from_slice(&r.stdout).unwrap();
    assert_eq!(cert["verdict"], "NotCertified");
}

#[test]
fn certify_nicholson_reports_product_test() {
    let dir = scratch_dir();
    let cfg = write_config(
        &dir,
        "nich.json",
        r#"{
          "dimension": 2,
          "rates": [{"kind": "constant", "value": 1.0}, {"kind": "constant", "value": 1.0}],
          "nonlinearity": {"model": "nicholson", "params": {"beta": [4.0, 5.0], "a": [[0.0, 0.5], [0.2, 0.0]]}},
          "distributions": {"template": {"kind": "point", "lag": 1.0}},
          "history": {"kind": "constant", "values": [1.0, 1.0]}
        }"#,
    );
    let r = run(&["certify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(exit_code(&r), 0, "stderr: {}", String::from_utf8_lossy(&r.stderr));
    let cert: serde_json::Value = serde_json::from_slice(&r.stdout).unwrap();
    assert!((cert["corollary5"]["lhs"].as_f64().unwrap() - 0.1).abs() < 1e-12);
    assert!((cert["corollary5"]["rhs"].as_f64().unwrap() - 0.148295).abs() < 1e-5);
    assert_eq!(cert["comparison_abs_nichol2"], false);
    assert_eq!(cert["gamma"].as_array().unwrap().len(), 2);
}

#[test]
fn sweep_reports_one_row_per_grid_point() {
    let dir = scratch_dir();
    let cfg = write_config(&dir, "sqrt.json", SQRT_PAIR);
    let out = dir.join("rows.csv");
    let r = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--family",
        "constant",
        "--values",
        "0.5,1.0,2.0",
        "--out",
        out.to_str().unwrap(),
        "--jobs",
        "2",
    ]);
    assert_eq!(exit_code(&r), 0, "stderr: {}", String::from_utf8_lossy(&r.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.trim_end().split("\r\n").collect();
    assert_eq!(
        lines[0],
        "index,family,parameter,horizon,converged,final_error,time_to_tolerance,steps,error"
    );
    assert_eq!(lines.len(), 4);
    for (k, line) in lines[1..].iter().enumerate() {
        assert!(line.starts_with(&format!("{k},constant,")), "row {line}");
        assert!(line.contains(",true,"), "row should converge: {line}");
    }
}

#[test]
fn sweep_certified_system_converges_across_lag_decades() {
    let dir = scratch_dir();
    let cfg = write_config(
        &dir,
        "nich.json",
        r#"{
          "dimension": 2,
          "rates": [{"kind": "constant", "value": 1.0}, {"kind": "constant", "value": 1.0}],
          "nonlinearity": {"model": "nicholson", "params": {"beta": [4.0, 5.0], "a": [[0.0, 0.5], [0.2, 0.0]]}},
          "distributions": {"template": {"kind": "point", "lag": 1.0}},
          "history": {"kind": "constant", "values": [1.0, 1.0]}
        }"#,
    );
    let r = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--family",
        "constant",
        "--values",
        "0.5,1,2,5,10,25",
    ]);
    assert_eq!(exit_code(&r), 0);
    let text = String::from_utf8(r.stdout).unwrap();
    let rows: Vec<&str> = text.trim_end().split("\r\n").skip(1).collect();
    assert_eq!(rows.len(), 6);
    for row in rows {
        assert!(row.contains(",true,"), "lag row did not converge: {row}");
    }
}

#[test]
fn sweep_records_divergent_rows_without_judging() {
    // spectral radius 1.2: solutions run away from zero; the sweep must
    // still exit 0 with converged=false recorded per row
    let dir = scratch_dir();
    let cfg = write_config(&dir, "heavy.json", UNCERTIFIABLE_LINEAR);
    let r = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--family",
        "constant",
        "--values",
        "1.0",
    ]);
    assert_eq!(exit_code(&r), 0, "stderr: {}", String::from_utf8_lossy(&r.stderr));
    let text = String::from_utf8(r.stdout).unwrap();
    let row = text.trim_end().split("\r\n").nth(1).unwrap().to_string();
    assert!(row.contains(",false,"), "row: {row}");
}

#[test]
fn certify_expression_system_with_lipschitz_block() {
    let dir = scratch_dir();
    let cfg = write_config(
        &dir,
        "expr.json",
        r#"{
          "dimension": 2,
          "nonlinearity": {"exprs": ["0.3*tanh(x1) + 0.2*tanh(x2)", "0.1*tanh(x1) + 0.4*tanh(x2)"]},
          "distributions": {"template": {"kind": "point", "lag": 2.0}},
          "history": {"kind": "constant", "values": [0.5, -0.5]},
          "lipschitz": {"matrix": [[0.3, 0.2], [0.1, 0.4]], "equilibrium": [0.0, 0.0]}
        }"#,
    );
    let r = run(&["certify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(exit_code(&r), 0, "stderr: {}", String::from_utf8_lossy(&r.stderr));
    let cert: serde_json::Value = serde_json::from_slice(&r.stdout).unwrap();
    assert_eq!(cert["verdict"], "Certified");
    assert_eq!(cert["method"], "MMatrix");
}

#[test]
fn certify_expression_system_without_lipschitz_exits_4() {
    let dir = scratch_dir();
    let cfg = write_config(
        &dir,
        "expr.json",
        r#"{
          "dimension": 1,
          "nonlinearity": {"exprs": ["0.5*tanh(x1)"]},
          "distributions": {"template": {"kind": "point", "lag": 1.0}},
          "history": {"kind": "constant", "values": [0.5]}
        }"#,
    );
    let r = run(&["certify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(exit_code(&r), 4);
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(err.contains("lipschitz"), "stderr: {err}");
}

#[test]
fn sweep_unknown_family_exits_3() {
    let dir = scratch_dir();
    let cfg = write_config(&dir, "sqrt.json", SQRT_PAIR);
    let r = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--family",
        "lognormal",
        "--values",
        "1.0",
    ]);
    assert_eq!(exit_code(&r), 3);
}

#[test]
fn reproduce_unknown_example_exits_3() {
    let r = run(&["reproduce", "example99"]);
    assert_eq!(exit_code(&r), 3);
}

#[test]
fn reproduce_benchmark_passes_and_writes_report() {
    let dir = scratch_dir();
    let out = dir.join("report.json");
    let r = run(&["reproduce", "remark_L", "--out", out.to_str().unwrap()]);
    assert_eq!(exit_code(&r), 0, "stderr: {}", String::from_utf8_lossy(&r.stderr));
    let table = String::from_utf8_lossy(&r.stdout);
    assert!(table.contains("[pass] certificate"));
    assert!(table.contains("column-sum comparison"));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["example"], "remark_L");
    assert_eq!(report["sweeps"].as_array().unwrap().len(), 3);
}

#[test]
fn info_logging_goes_to_stderr() {
    let dir = scratch_dir();
    let cfg = write_config(&dir, "sqrt.json", SQRT_PAIR);
    let r = Command::new(env!("CARGO_BIN_EXE_attracta"))
        .args(["certify", "--config", cfg.to_str().unwrap()])
        .env("ATTRACTA_LOG", "info")
        .output()
        .unwrap();
    assert_eq!(exit_code(&r), 0);
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(err.contains("info: config"), "stderr: {err}");
}
