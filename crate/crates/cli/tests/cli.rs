use std::f64::consts::FRAC_PI_4;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use krein::herglotz::{MSource, MFunction};
use krein::finitegap;
use krein_cli::{verify_with, CliError, RunConfig, Status};
use serde_json::{json, Value};
use tempfile::TempDir;

fn write_config(dir: &Path, name: &str, cfg: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string(cfg).unwrap()).unwrap();
    path
}

fn krein(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_krein")).args(args).output().unwrap()
}

fn run(cmd: &str, cfg: &Value, extra: &[&str]) -> (Output, TempDir) {
    let dir = TempDir::new().unwrap();
    let path = write_config(dir.path(), "cfg.json", cfg);
    let out = dir.path().join("out");
    let mut args = vec![cmd, "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    (krein(&args), dir)
}

fn report(dir: &TempDir) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/report.json")).unwrap()).unwrap()
}

fn record<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["records"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["name"] == name)
        .unwrap_or_else(|| panic!("no record {name}"))
}

fn csv(dir: &TempDir, name: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(dir.path().join("out").join(name)).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn z_grid_20() -> Value {
    json!({"re": {"start": -3.0, "stop": 3.0, "count": 5}, "im": [0.3, 1.0, 2.0, 5.0]})
}

#[test]
fn construct_single_gap_is_extremal() {
    let cfg = json!({
        "command": "construct",
        "profile": {"gaps": [[-1.0, 1.0]], "uniform": FRAC_PI_4},
        "grids": {"z": [[0.0, 2.0]], "t": [-2.0, 0.5, 3.0]}
    });
    let (out, dir) = run("construct", &cfg, &[]);
    assert_eq!(code(&out), 0);
    let r = report(&dir);
    assert!((record(&r, "||W(0)||")["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(record(&r, "sharp bound")["value"], 1.0);
    assert_eq!(record(&r, "classification")["detail"], "extremal, R0(E)");

    let (header, rows) = csv(&dir, "m.csv");
    assert_eq!(header[..4], ["z_re", "z_im", "m11_re", "m11_im"]);
    let s5 = 5f64.sqrt();
    let expected = [0.0, 2.0, 0.0, 2.0 / s5, -1.0 / s5, 0.0, -1.0 / s5, 0.0, 0.0, 2.0 / s5];
    for (v, e) in rows[0].iter().zip(expected) {
        assert!((v - e).abs() < 1e-10);
    }
    let (header, rows) = csv(&dir, "xi.csv");
    assert_eq!(header, ["t", "xi11", "xi12", "xi21", "xi22", "residual"]);
    // Inside the gap ξ is P(π/4) = [[½, ½], [½, ½]]; on E it is I/2.
    assert!((rows[1][2] - 0.5).abs() < 1e-6 && rows[0][2].abs() < 1e-6);
}

#[test]
fn construct_cancelling_angles_is_strict() {
    let cfg = json!({"profile": {"gaps": [[-2.0, -1.0], [1.0, 2.0]], "angles": [0.0, std::f64::consts::FRAC_PI_2]}});
    let (out, dir) = run("construct", &cfg, &[]);
    assert_eq!(code(&out), 0);
    let r = report(&dir);
    assert!(record(&r, "||W(0)||")["value"].as_f64().unwrap() < 1e-14);
    assert_eq!(record(&r, "sharp bound")["value"], 1.0);
    assert_eq!(record(&r, "classification")["detail"], "strict, R(E) candidate");
}

#[test]
fn construct_free_profile_gives_i_rows() {
    let cfg = json!({"profile": {"gaps": []}, "grids": {"z": [[0.0, 1.0], [3.0, 0.1]]}});
    let (out, dir) = run("construct", &cfg, &[]);
    assert_eq!(code(&out), 0);
    let r = report(&dir);
    assert_eq!(record(&r, "||W(0)||")["value"], 0.0);
    assert_eq!(record(&r, "sharp bound")["value"], 0.0);
    for row in csv(&dir, "m.csv").1 {
        let m = &row[2..];
        for (v, e) in m.iter().zip([0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]) {
            assert!((v - e).abs() < 1e-15);
        }
    }
}

#[test]
fn json_tables_have_columns_and_rows() {
    let cfg = json!({"profile": {"gaps": [[-1.0, 1.0]], "uniform": 0.3}, "grids": {"z": [[0.0, 1.0]]}});
    let (out, dir) = run("construct", &cfg, &["--format", "json"]);
    assert_eq!(code(&out), 0);
    let t: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/m.json")).unwrap()).unwrap();
    assert_eq!(t["columns"].as_array().unwrap().len(), 10);
    assert_eq!(t["rows"][0].as_array().unwrap().len(), 10);
}

#[test]
fn verify_uniform_profile_passes() {
    let cfg = json!({"profile": {"gaps": [[-2.0, -0.5], [1.0, 2.5]], "uniform": 0.4}});
    let (out, dir) = run("verify", &cfg, &[]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let r = report(&dir);
    let tags: Vec<&str> = r["records"].as_array().unwrap().iter().map(|r| r["tag"].as_str().unwrap()).collect();
    for tag in [
        "det-identity",
        "symmetry",
        "herglotz",
        "krein-trace",
        "reflectionless-xi",
        "gap-projection",
        "reflectionless-re-m",
        "weyl-eigenvalues",
        "weyl-roundtrip",
        "asymptotic-potential",
        "sharp-bound",
    ] {
        assert!(tags.contains(&tag), "missing {tag}");
    }
}

#[test]
fn verify_random_batch_is_byte_deterministic() {
    let cfg = json!({"random_profiles": 4, "seed": 3});
    let (a, da) = run("verify", &cfg, &[]);
    let (b, db) = run("verify", &cfg, &[]);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stdout));
    assert_eq!(a.stdout, b.stdout);
    let read = |d: &TempDir| std::fs::read(d.path().join("out/report.json")).unwrap();
    assert_eq!(read(&da), read(&db));
    // The flag overrides the config seed and changes the batch.
    let (c, _) = run("verify", &cfg, &["--seed", "4"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn corrupted_determinant_fails_verification() {
    let cfg = RunConfig::from_json(r#"{"profile": {"gaps": [[-1, 1]], "uniform": 0.5}}"#).unwrap();
    let profile = cfg.require_profile().unwrap();
    let corrupted = MFunction::new(MSource::Constructed, profile.gapset().singularities(1e-3), move |z| {
        finitegap::build_m(&profile, z).map(|m| m * 1.5)
    });
    let out = verify_with(&cfg, Some(corrupted)).unwrap();
    assert_eq!(out.report.exit_code(), 1);
    let det = out.report.records.iter().find(|r| r.tag == "det-identity").unwrap();
    assert_eq!(det.status, Status::Fail);
    assert!(out.report.render().contains("FAIL det M = -1"));
}

#[test]
fn numerical_failure_maps_to_exit_three() {
    let cfg = RunConfig::from_json(r#"{"profile": {"gaps": [[-1, 1]], "uniform": 0.5}}"#).unwrap();
    let broken = MFunction::new(MSource::Constructed, Vec::new(), |_| Err(krein::Error::NonFinite));
    let err = verify_with(&cfg, Some(broken)).err().unwrap();
    assert!(matches!(err, CliError::Numerical(_)));
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn evolve_symmetric_gap_is_constant() {
    let cfg = json!({"profile": {"gaps": [[-1.0, 1.0]], "uniform": FRAC_PI_4}, "grids": {"x": {"start": 0.0, "stop": 1.0, "count": 11}}});
    let (out, dir) = run("evolve", &cfg, &[]);
    assert_eq!(code(&out), 0);
    let (header, rows) = csv(&dir, "orbit.csv");
    assert_eq!(header, ["x", "p", "q", "norm", "bound", "residual"]);
    assert_eq!(rows.len(), 11);
    for row in rows {
        assert!(row[1].abs() < 1e-4 && (row[2] - 1.0).abs() < 1e-4 && (row[3] - 1.0).abs() < 1e-4);
    }
}

#[test]
fn evolve_free_profile_is_zero() {
    let cfg = json!({"profile": {"gaps": []}, "grids": {"x": [0.0, 0.5, 1.0]}});
    let (out, dir) = run("evolve", &cfg, &[]);
    assert_eq!(code(&out), 0);
    for row in csv(&dir, "orbit.csv").1 {
        assert_eq!(&row[1..5], &[0.0, 0.0, 0.0, 0.0]);
    }
}

#[test]
fn evolve_two_gap_uniform_respects_bound() {
    // Attains the bound at x = 0 and stays below it along the orbit.
    let cfg = json!({"profile": {"gaps": [[-2.0, -1.0], [1.0, 2.0]], "uniform": 0.3}, "grids": {"x": {"start": 0.0, "stop": 1.0, "count": 9}}});
    let (out, dir) = run("evolve", &cfg, &[]);
    assert_eq!(code(&out), 0);
    let rows = csv(&dir, "orbit.csv").1;
    assert!((rows[0][3] - 1.0).abs() < 1e-4);
    assert!(rows.iter().all(|r| r[3] <= 1.0 + 1e-4));
}

#[test]
fn oracle_examples() {
    for (p, q, tol) in [(0.0, 1.0, 1e-8), (0.0, 0.0, 1e-12), (3.0, 4.0, 1e-8)] {
        let cfg = json!({"command": "oracle", "potential": {"p": p, "q": q}, "grids": {"z": z_grid_20()}});
        let (out, dir) = run("oracle", &cfg, &[]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
        let r = report(&dir);
        for rec in r["records"].as_array().unwrap().iter().filter(|r| r["tag"] == "oracle-triangle") {
            assert!(rec["value"].as_f64().unwrap() <= tol, "({p}, {q}): {rec}");
        }
        assert_eq!(csv(&dir, "oracle.csv").1.len(), 20);
    }
}

#[test]
fn config_errors_exit_two() {
    let bad = [
        ("construct", json!({"profile": {"gaps": [[-1.0, 1.0]], "uniform": 0.1}, "extra": 1})),
        ("construct", json!({"command": "verify", "profile": {"gaps": []}})),
        ("construct", json!({"profile": {"gaps": [[-1.0, 1.0]], "uniform": 0.1}, "grids": {"z": [[1.0, 1e-4]]}})),
        ("construct", json!({"profile": {"gaps": [[-1.0, 1.0]], "uniform": 0.1}, "grids": {"t": [-1.0005]}})),
        ("construct", json!({"profile": {"gaps": [[1.0, -1.0]], "uniform": 0.1}})),
        ("construct", json!({"profile": {"gaps": []}, "tolerances": {"xi_tol": -1.0}})),
        ("verify", json!({})),
        ("evolve", json!({"profile": {"gaps": []}, "grids": {"x": [0.1, 0.2]}})),
        ("evolve", json!({"profile": {"gaps": []}})),
        ("evolve", json!({"profile": {"gaps": [[-2.0, -1.0], [1.0, 2.0]], "angles": [0.0, 0.5]}, "grids": {"x": [0.0]}})),
        ("oracle", json!({"potential": {"p": 1.0, "q": 0.0}})),
        ("oracle", json!({"potential": {"p": 1.0, "q": 0.0}, "grids": {"z": [[1.0, 0.0]]}})),
    ];
    for (cmd, cfg) in bad {
        let (out, _) = run(cmd, &cfg, &[]);
        assert_eq!(code(&out), 2, "{cmd} {cfg}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(code(&krein(&["verify", "--config", missing.to_str().unwrap()])), 2);
    let garbled = dir.path().join("garbled.json");
    std::fs::write(&garbled, "{ not json").unwrap();
    assert_eq!(code(&krein(&["verify", "--config", garbled.to_str().unwrap()])), 2);
    assert_eq!(code(&krein(&["verify"])), 2);
}

#[test]
fn stdout_report_without_out_dir() {
    let dir = TempDir::new().unwrap();
    let path = write_config(dir.path(), "cfg.json", &json!({"profile": {"gaps": [[-1.0, 1.0]], "uniform": 0.2}}));
    let out = krein(&["construct", "--config", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("command: construct\n"));
    assert!(text.ends_with("summary: pass (3 checks, 0 failed)\n"));
}
