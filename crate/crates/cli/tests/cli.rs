use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_nls-ist"));
    c.env_remove("NLS_IST_THREADS");
    c
}

fn small_example() -> Value {
    json!({
        "boundary": {"rho": 1.0},
        "grid": {"half_width": 20.0, "intervals": 2000, "recon_half_width": 10.0, "recon_intervals": 40},
        "potential": {"example": {"nu": 0.6, "c": 1.0}},
        "sources": {"case": "A", "terms": [{"normalization": {"const": [0.3, 0.0]}}]},
        "times": [0.0, 0.25]
    })
}

fn run(dir: &Path, cmd: &str, cfg: &Value) -> Output {
    let path = dir.join("cfg.json");
    fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    bin().args([cmd, "--config"]).arg(&path).arg("--out").arg(dir.join("out")).output().unwrap()
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(out.stderr.trim_ascii()).unwrap_or_else(|_| panic!("{}", String::from_utf8_lossy(&out.stderr)))
}

#[test]
fn zero_rho_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_example();
    cfg["boundary"]["rho"] = json!(0.0);
    let out = run(dir.path(), "direct", &cfg);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_json(&out);
    assert_eq!(err["error"], "config");
    assert_eq!(err["field"], "rho");
    assert!(err["message"].as_str().unwrap().contains("rho must be positive"));
}

#[test]
fn complex_constraint_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_example();
    cfg["sources"] = json!({"case": "B", "terms": [{"constraint": {"table": [[0.0, 1.0, 0.0], [1.0, 1.0, 0.2]]}, "beta": {"const": [0.0, 1.0]}}]});
    let out = run(dir.path(), "evolve", &cfg);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["field"], "sources.terms[0].constraint");
}

#[test]
fn unknown_key_reports_its_location() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_example();
    cfg["extra"] = json!(1);
    let out = run(dir.path(), "direct", &cfg);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_json(&out);
    assert!(err["line"].as_u64().unwrap() > 0);
    assert!(err["message"].as_str().unwrap().contains("extra"));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    fs::write(&cfg_path, small_example().to_string()).unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = bin().args(["example", "--config"]).arg(&cfg_path).arg("--out").arg(blocker.join("sub")).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_json(&out)["error"], "io");
}

#[test]
fn bad_thread_variable_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    fs::write(&cfg_path, small_example().to_string()).unwrap();
    let out = bin().env("NLS_IST_THREADS", "many").args(["example", "--config"]).arg(&cfg_path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn tabulated_plane_wave_has_no_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let mut table = String::from("x,re,im\n");
    for i in 0..=1000 {
        let x = -10.0 + 0.02 * i as f64;
        table.push_str(&format!("{x},{},{}\n", 1.2 * 0.3f64.cos(), 1.2 * 0.3f64.sin()));
    }
    fs::write(dir.path().join("u0.csv"), table).unwrap();
    let mut cfg = small_example();
    cfg["boundary"] = json!({"rho": 1.2, "alpha_minus": 0.3, "alpha_plus": 0.3});
    cfg["potential"] = json!({"file": "u0.csv"});
    cfg["sources"] = json!({"case": "A", "terms": []});
    let out = run(dir.path(), "direct", &cfg);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let discrete: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/discrete.json")).unwrap()).unwrap();
    assert_eq!(discrete["eigenvalues"].as_array().unwrap().len(), 0);
    let csv = fs::read_to_string(dir.path().join("out/scattering.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert!(v[3].hypot(v[4]) <= 1e-8, "{line}");
    }
    assert!(dir.path().join("out/scattering.csv.meta.json").exists());

    // a closed-form comparison needs the example potential
    let out = run(dir.path(), "example", &cfg);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn every_artifact_has_a_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), "simulate", &small_example());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let files: Vec<String> = fs::read_dir(dir.path().join("out"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    for stem in ["u_t0.csv", "u_t0.25.csv", "u_t0.25.dat", "u.plt", "scattering.csv", "discrete_t0.25.json", "sources_t0.25.csv"] {
        assert!(files.contains(&stem.to_string()), "{stem} missing from {files:?}");
    }
    for f in files.iter().filter(|f| !f.ends_with(".meta.json")) {
        let meta: Value = serde_json::from_str(&fs::read_to_string(dir.path().join(format!("out/{f}.meta.json"))).unwrap()).unwrap();
        assert_eq!(meta["config_sha256"].as_str().unwrap().len(), 64);
        assert_eq!(meta["version"], env!("CARGO_PKG_VERSION"));
        assert!(meta["tolerances"].is_object());
    }
}

#[test]
fn verify_writes_passing_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), "verify", &small_example());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let reports: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/reports.json")).unwrap()).unwrap();
    let reports = reports.as_array().unwrap();
    assert!(reports.iter().any(|r| r["name"] == "roundtrip_t0.25"));
    assert!(reports.iter().all(|r| r["passed"] != json!(false)));
}

#[test]
fn refinement_needs_an_integer_factor() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    fs::write(&cfg_path, small_example().to_string()).unwrap();
    let out = bin().args(["direct", "--seed-grid-refine", "0", "--config"]).arg(&cfg_path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}
