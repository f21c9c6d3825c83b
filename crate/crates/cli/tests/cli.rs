//! End-to-end tests of the binary: exit codes, output contracts, and
//! validation of every JSON output against the shipped schemas.

use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn korteweg() -> Command {
    Command::new(env!("CARGO_BIN_EXE_korteweg"))
}

fn run(args: &[&str]) -> Output {
    korteweg().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn schema(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(name);
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Minimal structural JSON-schema checker: type / required / properties /
/// items / enum, which is all the shipped schemas use.
fn validate(value: &Value, schema: &Value, path: &str) -> Result<(), String> {
    if let Some(ty) = schema.get("type") {
        let names: Vec<&str> = match ty {
            Value::String(s) => vec![s.as_str()],
            Value::Array(a) => a.iter().filter_map(|v| v.as_str()).collect(),
            _ => vec![],
        };
        let actual = match value {
            Value::Null => "null",
            Value::Bool(_) => "boolean",
            Value::Number(n) => {
                if n.is_i64() || n.is_u64() {
                    "integer"
                } else {
                    "number"
                }
            }
            Value::String(_) => "string",
            Value::Array(_) => "array",
            Value::Object(_) => "object",
        };
        let matches = names.iter().any(|n| {
            *n == actual || (*n == "number" && actual == "integer")
        });
        if !matches {
            return Err(format!("{path}: expected type {names:?}, got {actual}"));
        }
        if actual == "null" {
            return Ok(());
        }
    }
    if let Some(allowed) = schema.get("enum").and_then(|e| e.as_array()) {
        if !allowed.contains(value) {
            return Err(format!("{path}: {value} not in enum"));
        }
    }
    if let (Some(req), Value::Object(map)) = (schema.get("required"), value) {
        for key in req.as_array().unwrap() {
            let key = key.as_str().unwrap();
            if !map.contains_key(key) {
                return Err(format!("{path}: missing required key {key}"));
            }
        }
    }
    if let (Some(props), Value::Object(map)) = (schema.get("properties"), value) {
        for (key, sub) in props.as_object().unwrap() {
            if let Some(v) = map.get(key) {
                validate(v, sub, &format!("{path}.{key}"))?;
            }
        }
    }
    if let (Some(items), Value::Array(arr)) = (schema.get("items"), value) {
        for (i, v) in arr.iter().enumerate() {
            validate(v, items, &format!("{path}[{i}]"))?;
        }
    }
    Ok(())
}

fn assert_valid(value: &Value, schema_name: &str) {
    let s = schema(schema_name);
    if let Err(e) = validate(value, &s, "$") {
        panic!("schema {schema_name} violated: {e}\nvalue: {value:#}");
    }
}

const ALL_ONES: &[&str] =
    &["--nu", "1", "--eps", "1", "--alpha", "1", "--beta", "1", "--gamma", "1", "--delta", "1"];

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, body).unwrap();
    path
}

const BASE_CONFIG: &str = r#"
[grid]
dim = 1
points_per_dim = 64

[model]
rho_bar = 1.0
theta_bar = 1.0
a_psi = 1.0
mu = { form = "constant", value = 1.0 }
lambda = { form = "constant", value = 1.0 }
kappa = { form = "constant", value = 1.0 }
chi = { form = "constant", value = 1.0 }
p0 = { form = "power_law", coeff = 1.0, exponent = 1.4 }
p1 = { form = "constant", value = 0.0 }

[solver]
dt = 0.01
t_end = 0.1
order = 2
snapshot_every = 5
amplitude = 0.01
init_band = 6

[diagnostics]
norms = [[-1.0, 0.0]]

[seed]
value = 42
"#;

#[test]
fn stability_stable_exit_zero() {
    let out = korteweg().arg("stability").args(ALL_ONES).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_valid(&v, "stability.schema.json");
    assert_eq!(v["report"]["stable"], Value::Bool(true));
}

#[test]
fn stability_unstable_exit_one() {
    let out = run(&[
        "stability", "--nu", "0", "--eps", "1", "--alpha", "0", "--beta", "-1", "--gamma", "1",
        "--delta", "0.5",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let v = stdout_json(&out);
    assert_valid(&v, "stability.schema.json");
    let violated: Vec<&str> =
        v["report"]["violated"].as_array().unwrap().iter().map(|x| x.as_str().unwrap()).collect();
    assert_eq!(violated, vec!["gammadelta_beta"]);
}

#[test]
fn stability_from_model_file_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BASE_CONFIG);
    let out = run(&["stability", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    // gamma-law with P1 = 0: beta = 1.4, gamma = delta = 0, nu = 3
    assert_eq!(v["coefficients"]["nu"], serde_json::json!(3.0));
    assert_eq!(v["coefficients"]["beta"], serde_json::json!(1.4));
    assert_eq!(v["coefficients"]["gamma"], serde_json::json!(0.0));
}

#[test]
fn stability_usage_error_exit_two() {
    let out = run(&["stability", "--nu", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dispersion_header_and_single_point() {
    let mut args = vec!["dispersion"];
    args.extend_from_slice(ALL_ONES);
    args.extend_from_slice(&["--xi-min", "1", "--xi-max", "1", "--points", "1"]);
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "xi,re_lambda1,im_lambda1,re_lambda2,im_lambda2,re_lambda3,im_lambda3"
    );
    let row: Vec<f64> =
        lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(row.len(), 7);
    // cubic-solver oracle: roots of X^3 + 2X^2 + 4X + 2 at xi = 1
    let roots = korteweg::linear::cubic_roots(2.0, 4.0, 2.0);
    for chunk in row[1..].chunks(2) {
        let nearest = roots
            .iter()
            .map(|r| ((r.re - chunk[0]).powi(2) + (r.im - chunk[1]).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min);
        assert!(nearest < 1e-9, "row value {chunk:?} matches no root");
    }
    // sorted by real part descending
    assert!(row[1] >= row[3] && row[3] >= row[5]);
}

#[test]
fn dispersion_endpoint_approaches_high_frequency_limits() {
    let mut args = vec!["dispersion"];
    args.extend_from_slice(ALL_ONES);
    args.extend_from_slice(&["--xi-min", "1", "--xi-max", "1000", "--points", "4", "--format", "json"]);
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_valid(&v, "dispersion.schema.json");
    let rows = v.as_array().unwrap();
    let last = rows.last().unwrap();
    let xi: f64 = last["xi"].as_f64().unwrap();
    assert!((xi - 1000.0).abs() < 1e-9);
    let c = korteweg::linear::LinearCoeffs::from_nu(1.0, 1.0, 1.0, 1.0, 1.0, 1.0);
    let limits = korteweg::linear::high_freq_limits(&c).unwrap();
    for entry in last["lambda"].as_array().unwrap() {
        let re = entry[0].as_f64().unwrap() / (xi * xi);
        let im = entry[1].as_f64().unwrap() / (xi * xi);
        let nearest = limits
            .iter()
            .map(|l| ((l.re - re).powi(2) + (l.im - im).powi(2)).sqrt() / l.norm())
            .fold(f64::INFINITY, f64::min);
        assert!(nearest < 0.01, "eigenvalue {entry} not within 1% of a limit");
    }
}

#[test]
fn simulate_writes_outputs_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BASE_CONFIG);
    let out1 = dir.path().join("run1");
    let out2 = dir.path().join("run2");
    for out_dir in [&out1, &out2] {
        let out = run(&[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let csv1 = std::fs::read(out1.join("diagnostics.csv")).unwrap();
    let csv2 = std::fs::read(out2.join("diagnostics.csv")).unwrap();
    assert_eq!(csv1, csv2, "diagnostics CSV must be byte-identical across runs");

    let text = String::from_utf8(csv1).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,energy,dissipation,hybrid_s-1_t0");
    assert_eq!(lines.count(), 3); // t = 0, 0.05, 0.1

    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(out1.join("manifest.json")).unwrap())
            .unwrap();
    assert_valid(&manifest, "manifest.schema.json");
    assert_eq!(manifest["snapshots"].as_array().unwrap().len(), 3);
    // snapshot files exist and parse
    let (grid, comps) = korteweg::io::read_kwf1(&out1.join("snapshot_000000.kwf1")).unwrap();
    assert_eq!(grid.points_per_dim(), 64);
    assert_eq!(comps.len(), 3); // q, u, T
}

#[test]
fn simulate_zero_horizon_gives_header_only_csv() {
    let dir = tempfile::tempdir().unwrap();
    let body = BASE_CONFIG.replace("t_end = 0.1", "t_end = 0.0");
    let cfg = write_config(dir.path(), &body);
    let out_dir = dir.path().join("out");
    let out = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("diagnostics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1, "expected header only: {csv}");
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["snapshots"].as_array().unwrap().len(), 1);
}

#[test]
fn simulate_equilibrium_has_constant_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let body = BASE_CONFIG.replace("amplitude = 0.01", "amplitude = 0.0");
    let cfg = write_config(dir.path(), &body);
    let out_dir = dir.path().join("out");
    let out = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(out_dir.join("diagnostics.csv")).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    for col in 1..rows[0].len() {
        for r in &rows {
            assert!(
                (r[col] - rows[0][col]).abs() <= 1e-10 * (1.0 + rows[0][col].abs()),
                "column {col} not constant"
            );
        }
    }
}

#[test]
fn simulate_blowup_exits_three_with_step_in_error_json() {
    let dir = tempfile::tempdir().unwrap();
    // amplitude far beyond the density floor: the run terminates immediately
    let body = BASE_CONFIG.replace("amplitude = 0.01", "amplitude = 5.0");
    let cfg = write_config(dir.path(), &body);
    let out_dir = dir.path().join("out");
    let out = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert!(v["step"].is_u64(), "error JSON carries the step index: {v}");
    assert!(out_dir.join("error.json").exists());
}

#[test]
fn besov_zero_field_and_identities() {
    let dir = tempfile::tempdir().unwrap();
    let grid = korteweg::grid::GridSpec::standard(1, 64).unwrap();
    let zeros = vec![vec![0.0; grid.total_points()]];
    let zero_path = dir.path().join("zero.kwf1");
    korteweg::io::write_kwf1(&zero_path, &grid, &zeros).unwrap();
    let out = run(&["besov", "--field", zero_path.to_str().unwrap(), "--s", "1.0", "--t", "2.0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_valid(&v, "besov.schema.json");
    assert_eq!(v["besov"], serde_json::json!(0.0));
    assert_eq!(v["hybrid"], serde_json::json!(0.0));

    // s = t: besov equals hybrid; per-block terms sum to the totals
    let field = korteweg::field::SpectralField::from_fn(grid, |x| {
        (2.0 * x[0]).sin() + 0.3 * (9.0 * x[0]).cos()
    });
    let field_path = dir.path().join("field.kwf1");
    korteweg::io::write_kwf1(&field_path, &grid, &[field.to_real()]).unwrap();
    let out = run(&["besov", "--field", field_path.to_str().unwrap(), "--s", "0.5", "--t", "0.5"]);
    let v = stdout_json(&out);
    assert_valid(&v, "besov.schema.json");
    let besov = v["besov"].as_f64().unwrap();
    let hybrid = v["hybrid"].as_f64().unwrap();
    assert_eq!(besov, hybrid);
    let sum: f64 =
        v["per_block"].as_array().unwrap().iter().map(|b| b["besov_term"].as_f64().unwrap()).sum();
    assert!((sum - besov).abs() < 1e-12 * (1.0 + besov));
}

#[test]
fn check_unknown_suite_lists_names() {
    let out = run(&["check", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    for name in ["product-law", "picard-contraction", "korteweg-identity"] {
        assert!(err.contains(name), "missing {name} in: {err}");
    }
}

#[test]
fn check_derivative_equivalence_passes_and_validates() {
    let out = run(&["check", "derivative-equivalence"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_valid(&v, "check.schema.json");
    assert_eq!(v[0]["pass"], Value::Bool(true));
}

#[test]
fn check_heat_smoothing_passes() {
    let out = run(&["check", "heat-smoothing"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_valid(&v, "check.schema.json");
}

#[test]
fn results_independent_of_thread_count() {
    let one = run(&["check", "product-law", "--threads", "1"]);
    let many = run(&["check", "product-law", "--threads", "4"]);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, many.stdout, "thread count changed the output");
}
