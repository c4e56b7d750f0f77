use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lbcalc_cli::{parse, Verb};
use lbcalc_core::dirichlet::DirichletSeries;
use lbcalc_core::germ::{AnchorSet, Germ};
use lbcalc_core::Matrix;
use num_complex::Complex64;
use serde_json::{json, Value};
use tempfile::TempDir;

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Workspace {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn write(&self, name: &str, value: &Value) -> PathBuf {
        let path = self.dir.path().join(name);
        std::fs::write(&path, serde_json::to_string(value).unwrap()).unwrap();
        path
    }

    fn write_raw(&self, name: &str, text: &str) -> PathBuf {
        let path = self.dir.path().join(name);
        std::fs::write(&path, text).unwrap();
        path
    }
}

fn run(args: &[&str]) -> Output {
    run_with_env(args, None)
}

fn run_with_env(args: &[&str], seed_env: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lbcalc"));
    cmd.args(args).env_remove("LBCALC_SEED");
    if let Some(s) = seed_env {
        cmd.env("LBCALC_SEED", s);
    }
    cmd.output().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn diag(re: &[f64]) -> Value {
    let n = re.len();
    let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
    for (i, v) in re.iter().enumerate() {
        entries[i * n + i] = Complex64::new(*v, 0.0);
    }
    serde_json::to_value(Matrix::new(n, entries).unwrap()).unwrap()
}

fn small_matrix(scale: f64) -> Value {
    let entries = [0.3, -0.2, 0.1, 0.4]
        .iter()
        .map(|v| Complex64::new(v * scale, 0.0))
        .collect();
    serde_json::to_value(Matrix::new(2, entries).unwrap()).unwrap()
}

fn series(scale: f64, shift: f64) -> Value {
    let m = |a: f64, b: f64| {
        Matrix::new(
            2,
            vec![
                Complex64::new(a, 0.0),
                Complex64::new(b, 0.0),
                Complex64::new(-b, 0.0),
                Complex64::new(a, 0.0),
            ],
        )
        .unwrap()
    };
    let s = DirichletSeries::from_terms(
        2,
        vec![(1, m(scale, shift)), (3, m(shift, scale)), (4, m(-scale, 0.5 * shift))],
    )
    .unwrap();
    serde_json::to_value(s).unwrap()
}

fn scalar_germ(index: u64, coeffs: &[f64]) -> Value {
    serde_json::to_value(Germ::scalar(index, 8, coeffs).unwrap()).unwrap()
}

fn matrix_problem(steps: usize) -> Value {
    json!({
        "space": { "kind": "matrix", "base_dim": 1 },
        "map": { "kind": "matrix_polynomial", "coeffs": [1.0, -0.5, 0.25] },
        "steps": steps
    })
}

#[test]
fn parse_examples() {
    let c = parse(["bch", "--order", "8", "x.json", "y.json"]).unwrap();
    assert!(matches!(c.verb, Verb::Bch { order: 8, .. }));
    let c = parse(["suite", "--seed", "42"]).unwrap();
    assert_eq!(c.seed, 42);
    assert!(matches!(c.verb, Verb::Suite { .. }));
    let err = parse(["bch", "--order", "zebra"]).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("--order"));
    assert!(parse(["frobnicate"]).is_err());
    assert!(parse(["dirichlet-norm", "a.json"]).is_err());
    let c = parse(["dirichlet-eval", "--z", "-1.5,2", "a.json"]).unwrap();
    match c.verb {
        Verb::DirichletEval { z, .. } => assert_eq!(z.0, Complex64::new(-1.5, 2.0)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["bch", "--order", "zebra"]).status.code(), Some(2));
    assert_eq!(run(&["nonsense"]).status.code(), Some(2));
    assert_eq!(run(&["dirichlet-norm", "--s", "1"]).status.code(), Some(2));
    let ws = Workspace::new();
    let bad = ws.write_raw("bad.json", "{ not json");
    let out = run(&["dirichlet-norm", "--s", "1", p(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["error"]["kind"], "usage");
    let out = run_with_env(&["suite", "4"], Some("banana"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bch_in_domain_returns_a_matrix() {
    let ws = Workspace::new();
    let x = ws.write("x.json", &small_matrix(0.1));
    let y = ws.write("y.json", &diag(&[0.05, -0.02]));
    let out = run(&["bch", "--order", "8", p(&x), p(&y)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    let product: Matrix = serde_json::from_value(r["result"]["product"].clone()).unwrap();
    assert_eq!(product.dim(), 2);
    assert!(r["result"]["oracle"]["gap"].as_f64().unwrap() < 1e-8);
}

#[test]
fn domain_errors_exit_three() {
    let ws = Workspace::new();
    let x = ws.write("x.json", &small_matrix(1.0));
    let out = run(&["bch", "--order", "8", p(&x), p(&x)]);
    assert_eq!(out.status.code(), Some(3));
    let r = report(&out);
    assert_eq!(r["error"]["kind"], "domain");
    assert!(r["error"]["message"].as_str().unwrap().contains("log(3/2)"));

    let g = ws.write("g.json", &scalar_germ(2, &[0.0, 0.0, 1.0]));
    let out = run(&["germ-invert", p(&g)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(report(&out)["error"]["message"]
        .as_str()
        .unwrap()
        .contains("local diffeomorphism"));

    let family = ws.write("f.json", &json!({ "radius": 1.0, "maps": [{ "center": [[0.0, 0.0]], "components": [[{ "alpha": [1], "coeff": [1.0, 0.0] }]] }] }));
    assert_eq!(
        run(&["estimate-verify", "--r", "0.5", p(&family)]).status.code(),
        Some(3)
    );
}

#[test]
fn corrupted_certificate_exits_one() {
    let ws = Workspace::new();
    let problem = ws.write("problem.json", &matrix_problem(3));
    let out = run(&[
        "limit-certify",
        "--R",
        "1",
        "--r",
        "0.1",
        "--epsilon",
        "0.01",
        p(&problem),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let cert_path = ws.write("cert.json", &report(&out));
    let ok = run(&["limit-verify", "--samples", "500", p(&problem), p(&cert_path)]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));

    let mut cert = report(&out)["result"].clone();
    for d in cert["delta"].as_array_mut().unwrap() {
        *d = json!(d.as_f64().unwrap() * 10.0);
    }
    let bad = ws.write("bad.json", &cert);
    let out = run(&["limit-verify", "--samples", "500", p(&problem), p(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["result"]["verdict"], false);
    assert_eq!(r["result"]["consistent"], false);
}

#[test]
fn reports_are_deterministic() {
    let ws = Workspace::new();
    let problem = ws.write("problem.json", &matrix_problem(3));
    let cert = run(&[
        "limit-certify",
        "--R",
        "1",
        "--r",
        "0.1",
        "--epsilon",
        "0.01",
        p(&problem),
    ]);
    let cert = ws.write("cert.json", &report(&cert));
    let args = [
        "limit-verify",
        "--samples",
        "300",
        "--seed",
        "17",
        p(&problem),
        p(&cert),
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    let from_env = run_with_env(&["limit-verify", "--samples", "300", p(&problem), p(&cert)], Some("17"));
    assert_eq!(a.stdout, from_env.stdout);
    let other = run(&[
        "limit-verify",
        "--samples",
        "300",
        "--seed",
        "18",
        p(&problem),
        p(&cert),
    ]);
    assert_ne!(a.stdout, other.stdout);
    assert_eq!(report(&a)["seed"], 17);
}

#[test]
fn every_operation_is_reachable() {
    let ws = Workspace::new();
    let x = ws.write("x.json", &small_matrix(0.1));
    let y = ws.write("y.json", &diag(&[0.05, -0.02]));
    let a = ws.write("a.json", &series(0.02, 0.01));
    let b = ws.write("b.json", &series(-0.01, 0.03));
    let anchors = AnchorSet::origin(1);
    let g1 = ws.write("g1.json", &scalar_germ(1, &[0.0, 0.0, 0.1, -0.05]));
    let g2 = ws.write("g2.json", &scalar_germ(12, &[0.0, 0.2, 1.0]));
    let h1 = ws.write("h1.json", &scalar_germ(1, &[0.0, 0.1, 0.0, 0.2]));
    let h2 = ws.write("h2.json", &scalar_germ(12, &[0.0, 0.0, 0.5]));
    let zero = ws.write(
        "zero.json",
        &serde_json::to_value(Germ::zero(anchors, 1, 8).unwrap()).unwrap(),
    );
    let family = ws.write(
        "family.json",
        &json!({ "radius": 1.0, "maps": [
            { "center": [[0.0, 0.0], [0.0, 0.0]], "components": [
                [{ "alpha": [1, 0], "coeff": [0.5, 0.0] }, { "alpha": [1, 1], "coeff": [0.0, 0.2] }],
                [{ "alpha": [0, 2], "coeff": [0.3, 0.0] }]
            ] },
            { "center": [[0.0, 0.0], [0.0, 0.0]], "black_box": true, "components": [
                [{ "alpha": [0, 1], "coeff": [0.25, 0.0] }],
                [{ "alpha": [3, 0], "coeff": [-0.1, 0.0] }]
            ] }
        ] }),
    );
    let problem = ws.write("problem.json", &matrix_problem(2));
    let decomposition = ws.write(
        "decomposition.json",
        &json!({ "terms": [[1, { "kind": "matrix", "value": diag(&[1e-5]) }], [2, { "kind": "matrix", "value": diag(&[1e-5, 0.0]) }]] }),
    );
    let cert = run(&[
        "limit-certify",
        "--R",
        "1",
        "--r",
        "0.1",
        "--epsilon",
        "0.1",
        p(&problem),
    ]);
    let cert = ws.write("cert.json", &report(&cert));

    let runs: Vec<Vec<&str>> = vec![
        vec!["bch", "--order", "6", p(&x), p(&y)],
        vec!["dirichlet-bracket", "--order", "4", "--s", "1", p(&a), p(&b)],
        vec!["dirichlet-norm", "--s", "0.5", p(&a)],
        vec!["dirichlet-eval", "--z", "3,1", p(&a)],
        vec!["germ-compose", p(&g1), p(&g2), p(&h1), p(&h2)],
        vec!["germ-invert", p(&g1)],
        vec!["estimate-verify", "--r", "0.1", "--degree", "6", p(&family)],
        vec![
            "limit-certify",
            "--R",
            "1",
            "--r",
            "0.1",
            "--epsilon",
            "0.1",
            p(&problem),
        ],
        vec![
            "limit-verify",
            "--samples",
            "200",
            p(&problem),
            p(&cert),
            p(&decomposition),
        ],
        vec!["modulus-dirichlet", "--s", "1", "--epsilon", "0.1", p(&a)],
        vec!["modulus-germ", "--n", "1", "--epsilon", "0.1", p(&zero)],
        vec!["suite", "4"],
    ];
    let mut verbs = BTreeSet::new();
    let mut ops = BTreeSet::new();
    for args in &runs {
        let out = run(args);
        let r = report(&out);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {r}");
        verbs.insert(r["verb"].as_str().unwrap().to_string());
        for op in r["ops"].as_array().unwrap() {
            ops.insert(op.as_str().unwrap().to_string());
        }
    }
    assert_eq!(verbs.len(), 12);
    let expected = [
        "compatible_norm",
        "mat_exp",
        "mat_log",
        "bch",
        "norm_s",
        "bracket",
        "evaluate",
        "bch_series",
        "exp_pointwise",
        "leading_coefficient",
        "sup_norm",
        "d_norm",
        "compose",
        "compose_derivative",
        "invert",
        "residual",
        "derivative_bound",
        "cauchy_directional_coefficient",
        "polarization_factor",
        "verify_bounded_series",
        "neighborhood_contains",
        "build_certificate",
        "verify_certificate",
        "dirichlet_regularity_modulus",
        "germ_regularity_modulus",
    ];
    let missing: Vec<_> = expected.iter().filter(|op| !ops.contains(**op)).collect();
    assert!(missing.is_empty(), "unreachable operations: {missing:?}");
}

#[test]
fn previous_reports_chain_as_inputs() {
    let ws = Workspace::new();
    let g = ws.write("g.json", &scalar_germ(1, &[0.0, 0.1, 0.2]));
    let out = run(&["germ-invert", p(&g)]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!(r["result"]["residual_max"].as_f64().unwrap() <= 1e-10);
    assert!(r["result"]["inverse_sup_norm"].as_f64().unwrap() <= r["result"]["sup_bound"].as_f64().unwrap());
    let mut wrapped = r.clone();
    wrapped["result"] = r["result"]["inverse"].clone();
    let inv = ws.write("inv.json", &wrapped);
    let out = run(&["modulus-germ", "--n", "12", "--epsilon", "0.5", p(&inv)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn certificates_survive_a_file_round_trip() {
    let ws = Workspace::new();
    for (i, coeffs) in [[1.0, -0.5, 0.0], [0.3, 0.7, -1.1], [2.5, 0.0, 0.125]]
        .iter()
        .enumerate()
    {
        let problem = ws.write(
            &format!("p{i}.json"),
            &json!({ "space": { "kind": "matrix", "base_dim": 2 }, "map": { "kind": "matrix_polynomial", "coeffs": coeffs }, "steps": 5 }),
        );
        for epsilon in ["0.01", "0.3", "1e-5"] {
            let out = run(&[
                "limit-certify",
                "--R",
                "1.7",
                "--r",
                "0.11",
                "--epsilon",
                epsilon,
                p(&problem),
            ]);
            let cert = ws.write(&format!("c{i}.json"), &report(&out));
            let out = run(&["limit-verify", "--samples", "50", p(&problem), p(&cert)]);
            assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
        }
    }
}
