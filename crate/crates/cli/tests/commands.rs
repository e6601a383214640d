use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn finsler(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finsler"))
        .args(args)
        .env_remove("FINSLER_SEED")
        .output()
        .expect("binary runs")
}

fn tmp(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

fn report(path: &PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn check<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no check {name}"))
}

#[test]
fn berwald_example_passes() {
    let out = tmp("berwald.json");
    let o = finsler(&[
        "check-berwald",
        "--model",
        "builtin:sol2",
        "--X",
        "1,0",
        "--f",
        "ln(y)",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let r = report(&out);
    assert!(check(&r, "berwald_residual")["residual"].as_f64().unwrap() <= 1e-9);
    assert_eq!(r["seed"], 42);
    assert_eq!(r["sample_count"], 50);
    assert!(r.get("wall_time_s").is_none());

    let o = finsler(&[
        "check-berwald",
        "--model",
        "builtin:sol2",
        "--X",
        "1,0",
        "--f",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(1));

    let o = finsler(&[
        "check-berwald",
        "--model",
        "builtin:sol2",
        "--X",
        "0.5,0",
        "--f",
        "ln(y)",
        "--witness",
        "--samples",
        "10",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(
        check(&report(&out), "spray_witness")["residual"]
            .as_f64()
            .unwrap()
            <= 1e-6
    );
    let o = finsler(&[
        "check-berwald",
        "--model",
        "builtin:sol2",
        "--X",
        "1,0",
        "--witness",
    ]);
    assert_eq!(o.status.code(), Some(2), "the witness needs |X| below b0");
}

#[test]
fn douglas_example_fails_with_unit_residual() {
    let out = tmp("douglas.json");
    let o = finsler(&[
        "check-douglas",
        "--model",
        "builtin:heisenberg",
        "--X",
        "0,0,1",
        "--f",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let r = report(&out);
    let d = check(&r, "douglas_residual");
    assert_eq!(d["verdict"], "fail");
    assert!((d["residual"].as_f64().unwrap() - 1.0).abs() <= 1e-12);
    assert_eq!(check(&r, "pde:e1e2")["gating"], false);

    let o = finsler(&[
        "check-douglas",
        "--model",
        "builtin:heisenberg",
        "--X",
        "2,1,0",
        "--f",
        "x + y/2",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o = finsler(&[
        "check-douglas",
        "--model",
        "builtin:heisenberg",
        "--X",
        "0.1,0,0",
        "--phi",
        "matsumoto",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn hyperbolic_flag_curvature() {
    let out = tmp("flag.json");
    let o = finsler(&[
        "flag-curvature",
        "--model",
        "builtin:sol2",
        "--phi",
        "riemannian",
        "--at",
        "0,1",
        "--y",
        "1,0",
        "--u",
        "0,1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&out);
    let k = r["samples"][0]["value"].as_f64().unwrap();
    assert!((k + 1.0).abs() <= 1e-9, "{k}");
    let table = String::from_utf8(o.stdout).unwrap();
    assert!(table.contains("-1.0000000000000000e0"), "{table}");
}

#[test]
fn curvature_samples_are_recorded() {
    let out = tmp("curv.json");
    let o = finsler(&[
        "curvature",
        "--model",
        "builtin:sol2",
        "--samples",
        "7",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&out);
    let samples = r["samples"].as_array().unwrap();
    assert_eq!(samples.len(), 7);
    assert!(samples
        .iter()
        .all(|s| (s["value"].as_f64().unwrap() + 1.0).abs() <= 1e-9));
}

#[test]
fn emitted_models_load_back() {
    for name in ["heisenberg", "sol2", "sol3"] {
        let path = tmp(&format!("{name}.json"));
        let o = finsler(&["emit-model", name, "--out", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        let out = tmp(&format!("{name}-validate.json"));
        let o = finsler(&[
            "validate",
            "--model",
            path.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stdout)
        );
        let r = report(&out);
        assert!(
            check(&r, "frame_orthonormality")["residual"]
                .as_f64()
                .unwrap()
                <= 1e-10
        );
        assert!(
            check(&r, "structure_constants")["residual"]
                .as_f64()
                .unwrap()
                <= 1e-10
        );
        if name == "heisenberg" {
            assert!(check(&r, "left_invariance")["residual"].as_f64().unwrap() <= 1e-9);
        }
    }
    let path = tmp("sol2.json");
    let a = tmp("from-file.json");
    let b = tmp("from-builtin.json");
    finsler(&[
        "check-berwald",
        "--model",
        path.to_str().unwrap(),
        "--X",
        "1,0",
        "--f",
        "ln(y)",
        "--out",
        a.to_str().unwrap(),
    ]);
    finsler(&[
        "check-berwald",
        "--model",
        "builtin:sol2",
        "--X",
        "1,0",
        "--f",
        "ln(y)",
        "--out",
        b.to_str().unwrap(),
    ]);
    let (a, b) = (report(&a), report(&b));
    assert_eq!(a["model"]["name"], b["model"]["name"]);
    let residual = |r: &Value| check(r, "berwald_residual")["residual"].as_f64().unwrap();
    assert!(residual(&a) <= 1e-9 && residual(&b) <= 1e-9);
}

#[test]
fn model_file_with_instance_data() {
    let text = r#"{
  "name": "half-plane",
  "dim": 2,
  "coords": ["x", "y"],
  "metric": [["1/y^2", "0"], ["0", "1/y^2"]],
  "domain": ["y > 0"],
  "sample_box": [[-1, 1], [0.5, 2]],
  "X": {"chart": ["0.5*y", "0"]},
  "phi": {"family": "matsumoto"},
  "f": "ln(y)",
  "seed": 7,
  "sample_count": 5
}"#;
    let path = tmp("half-plane.json");
    std::fs::write(&path, text).unwrap();
    let out = tmp("half-plane-report.json");
    let o = finsler(&[
        "validate",
        "--model",
        path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    let r = report(&out);
    assert_eq!(
        (r["seed"].as_u64(), r["sample_count"].as_u64()),
        (Some(7), Some(5))
    );
    assert!(
        (check(&r, "field_norm_below_b0")["residual"]
            .as_f64()
            .unwrap()
            - 0.5)
            .abs()
            <= 1e-12
    );
    assert_eq!(check(&r, "phi_admissibility")["verdict"], "pass");

    let o = finsler(&[
        "check-berwald",
        "--model",
        path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o = finsler(&[
        "check-berwald",
        "--model",
        path.to_str().unwrap(),
        "--X",
        "1,0",
    ]);
    assert_eq!(o.status.code(), Some(2), "frame coefficients need a frame");
}

#[test]
fn seed_precedence() {
    let out = tmp("seeded.json");
    let base = [
        "curvature",
        "--model",
        "builtin:heisenberg",
        "--samples",
        "2",
        "--out",
        out.to_str().unwrap(),
    ];
    let run = |extra: &[&str], env: Option<&str>| -> u64 {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_finsler"));
        cmd.args(base).args(extra).env_remove("FINSLER_SEED");
        if let Some(v) = env {
            cmd.env("FINSLER_SEED", v);
        }
        assert_eq!(cmd.output().unwrap().status.code(), Some(0));
        report(&out)["seed"].as_u64().unwrap()
    };
    assert_eq!(run(&[], None), 42);
    assert_eq!(run(&[], Some("9")), 9);
    assert_eq!(run(&["--seed", "5"], Some("9")), 5);
}

#[test]
fn input_errors_exit_with_two() {
    let cases: [&[&str]; 6] = [
        &["frobnicate"],
        &["validate", "--model", "builtin:nil"],
        &["validate", "--model", "/nonexistent/model.json"],
        &[
            "check-berwald",
            "--model",
            "builtin:sol2",
            "--X",
            "1,0",
            "--f",
            "ln(y",
        ],
        &["check-berwald", "--model", "builtin:sol2", "--X", "1,zero"],
        &["flag-curvature", "--model", "builtin:sol2", "--at", "0,1"],
    ];
    for args in cases {
        let o = finsler(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
    let o = finsler(&[
        "check-berwald",
        "--model",
        "builtin:sol2",
        "--X",
        "1,0",
        "--f",
        "ln(y",
    ]);
    let message = String::from_utf8(o.stderr).unwrap();
    assert!(message.contains("1:5"), "{message}");
}

#[test]
fn timings_only_on_request() {
    let out = tmp("timed.json");
    let o = finsler(&[
        "curvature",
        "--model",
        "builtin:sol2",
        "--samples",
        "2",
        "--timings",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(report(&out)["wall_time_s"].as_f64().is_some());
}
