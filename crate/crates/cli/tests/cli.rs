use std::path::Path;
use std::process::{Command, Output};

use dixtrace_cli::report::{to_csv_bytes, to_json_bytes};
use dixtrace_cli::{parse_config, run_experiment, Report};
use dixtrace_core::operators::TruncatedOperator;

fn dixtrace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dixtrace")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn scalar(r: &Report, name: &str) -> f64 {
    r.scalars.iter().find(|s| s.name == name).unwrap_or_else(|| panic!("no scalar {name}")).value
}

const WEIERSTRASS: &str =
    r#"{"kind":"weierstrass_trace","params":{"alpha":0.5,"gamma":2,"c":{"extend":{"constant":1.0}},"n_max":1073741824}}"#;

#[test]
fn weierstrass_report_has_limit_and_closed_form() {
    let r = run_experiment(&parse_config(WEIERSTRASS).unwrap()).unwrap();
    assert!((scalar(&r, "extrapolated_limit") + 1.0 / std::f64::consts::LN_2).abs() < 1e-3);
    assert!(scalar(&r, "max_discrepancy") < 1e-12);
    let closed = r.series.iter().find(|s| s.name == "closed_form").unwrap();
    assert_eq!(closed.indices.len(), 30);
    for (&m, &v) in closed.indices.iter().zip(&closed.values) {
        let expected = -((m.ilog2() + 1) as f64) / (m as f64).ln();
        assert!((v - expected).abs() < 1e-12);
    }
    assert!(r.scalars.iter().all(|s| !s.expression.is_empty() && !s.normalization.is_empty()));
    assert!(r.series.iter().all(|s| !s.expression.is_empty() && !s.normalization.is_empty()));
}

#[test]
fn winding_of_z_via_binary() {
    let out = dixtrace(&["winding", "--params", r#"{"a":{"type":"modes","modes":[[1,1.0,0.0]]},"n":64}"#]);
    assert!(out.status.success());
    let r: Report = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(scalar(&r, "nearest_integer"), -1.0);
    assert!(scalar(&r, "integrality_defect") < 1e-8);
}

#[test]
fn block_indicator_is_oscillating() {
    let cfg = r#"{"kind":"measurability","params":{"c":{"extend":{"block_indicator":2}},"len":1048576}}"#;
    let r = run_experiment(&parse_config(cfg).unwrap()).unwrap();
    assert_eq!(r.labels[0].value, "oscillating");
    let (lo, hi) = (scalar(&r, "lower"), scalar(&r, "upper"));
    assert!((lo - 1.0 / 3.0).abs() < 0.01 && (hi - 2.0 / 3.0).abs() < 0.01);
}

#[test]
fn empty_report_gives_header_only_csv() {
    let csv = to_csv_bytes(&Report::default()).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap(), "series,index,value,expression,normalization\n");
}

#[test]
fn json_round_trips() {
    let r = run_experiment(&parse_config(WEIERSTRASS).unwrap()).unwrap();
    let bytes = to_json_bytes(&r).unwrap();
    let back: Report = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(back, r);
    assert_eq!(to_json_bytes(&back).unwrap(), bytes);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sweep.json",
        r#"{"kind":"singular_value_sweep","params":{"symbol":{"type":"weierstrass","alpha":0.5,"gamma":2,"c":{"extend":{"constant":1.0}}},"sizes":[64,128],"p":2.0}}"#,
    );
    let mut outputs = Vec::new();
    for (i, fmt) in [(0, "json"), (1, "json"), (2, "csv"), (3, "csv")] {
        let out = dir.path().join(format!("r{i}.{fmt}"));
        let status = dixtrace(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]).status;
        assert!(status.success());
        outputs.push(std::fs::read(out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[2], outputs[3]);
    assert!(outputs[2].starts_with(b"series,index,value,expression,normalization\n"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"kind":"winding","params":{"n":64}}"#);
    assert_eq!(dixtrace(&["run", "--config", &bad]).status.code(), Some(2));

    let alpha = write(
        dir.path(),
        "alpha.json",
        r#"{"kind":"weierstrass_trace","params":{"alpha":0.3,"gamma":2,"c":{"extend":{"constant":1.0}},"n_max":1024}}"#,
    );
    assert_eq!(dixtrace(&["run", "--config", &alpha]).status.code(), Some(2));

    let big = write(
        dir.path(),
        "big.json",
        r#"{"kind":"singular_value_sweep","params":{"symbol":{"type":"modes","modes":[[1,1.0,0.0]]},"sizes":[5000]}}"#,
    );
    assert_eq!(dixtrace(&["run", "--config", &big]).status.code(), Some(3));

    let capped = write(
        dir.path(),
        "capped.json",
        r#"{"kind":"singular_value_sweep","params":{"symbol":{"type":"modes","modes":[[1,1.0,0.0]]},"sizes":[64]},"limits":{"max_matrix":32}}"#,
    );
    assert_eq!(dixtrace(&["run", "--config", &capped]).status.code(), Some(3));

    let torus = r#"{"dim":2,"t":"identity","symbols":[{"modes":[[[1,0],1,0],[[2,0],1,0],[[3,0],1,0]]},{"modes":[[[1,0],1,0],[[2,0],1,0],[[3,0],1,0]]}],"n_max":10}"#;
    assert_eq!(dixtrace(&["nc-torus", "--params", torus, "--max-tuples", "8"]).status.code(), Some(3));
    assert_eq!(dixtrace(&["nc-torus", "--params", torus]).status.code(), Some(0));

    assert_eq!(dixtrace(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn dump_operator_writes_matrix_json() {
    let dir = tempfile::tempdir().unwrap();
    let op = dir.path().join("op.json");
    let out = dixtrace(&[
        "fourier-trace",
        "--params",
        r#"{"a":{"type":"modes","modes":[[1,1.0,0.0],[2,0.5,0.0]]},"b":{"type":"modes","modes":[[-1,1.0,0.0],[-2,1.0,0.0]]},"n":16}"#,
        "--dump-operator",
        op.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let m = TruncatedOperator::from_json(&std::fs::read_to_string(&op).unwrap()).unwrap();
    assert_eq!(m.nrows(), 16);
    // diagonal entry 0 of P[P,a][P,b] is -(a_1 b_{-1} + a_2 b_{-2})
    assert!((m.entry(0, 0).re + 1.5).abs() < 1e-15);
    let r: Report = serde_json::from_slice(&out.stdout).unwrap();
    assert!(scalar(&r, "max_discrepancy") < 1e-12);

    let none = dixtrace(&["hn-check", "--params", r#"{"n_values":[4],"m_max":2,"t_grid":[0.5]}"#, "--dump-operator", "x.json"]);
    assert_eq!(none.status.code(), Some(2));
}

#[test]
fn batch_runs_every_entry() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.json"));
    let batch = format!(
        r#"[{{"kind":"hn_check","params":{{"n_values":[1,16,64],"m_max":4,"t_grid":[0.25,0.5,1.0]}},"output":{{"path":{a:?}}}}},
            {{"kind":"kernel_check","params":{{"a":{{"type":"modes","modes":[[2,1.0,0.0]]}},"b":{{"type":"modes","modes":[[-2,1.0,0.0]]}},"n":32,"r":0.999999,"grid":256}},"output":{{"path":{b:?}}}}}]"#
    );
    let cfg = write(dir.path(), "batch.json", &batch);
    assert!(dixtrace(&["batch", "--config", &cfg, "--jobs", "2"]).status.success());
    assert!(std::fs::read_to_string(&a).unwrap().contains("max_deviation"));
    let r: Report = serde_json::from_slice(&std::fs::read(&b).unwrap()).unwrap();
    // a_2 b_{-2} = 1 contributes min(2, N+1) = 2
    assert!((scalar(&r, "double_sum_re") - 2.0).abs() < 1e-15);
    assert!(scalar(&r, "discrepancy") < 1e-6);
}

#[test]
fn nc_torus_reports_theta_deviation() {
    let params = r#"{"dim":2,"t":"grading_phase","symbols":[{"modes":[[[1,0],1,0],[[-1,0],1,0]]},{"modes":[[[0,1],1,0],[[0,-1],1,0]]},{"modes":[[[1,1],1,0],[[-1,-1],1,0]]}],"n_max":40,"theta":[[0,0.0],[-0.0,0]]}"#;
    let out = dixtrace(&["nc-torus", "--params", params]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r: Report = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(scalar(&r, "tuples_in_zero_sum_set"), 2.0);
    assert_eq!(scalar(&r, "theta_deviation"), 0.0);
}
