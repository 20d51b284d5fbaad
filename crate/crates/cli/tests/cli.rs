use serde_json::Value;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

fn nlsq(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlsq")).args(args).current_dir(cwd).output().expect("spawn nlsq")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, v: Value) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, v.to_string()).unwrap();
    p
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Header and columns of a CSV file.
fn csv(path: PathBuf) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    let mut cols = vec![Vec::new(); header.len()];
    for l in lines {
        for (j, v) in l.split(',').enumerate() {
            cols[j].push(v.parse::<f64>().unwrap());
        }
    }
    (header, cols)
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn scatter_sech_is_reflectionless() {
    let tmp = TempDir::new().unwrap();
    let o = nlsq(&["scatter", "--builtin", "sech", "--out", "run"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (header, cols) = csv(tmp.path().join("run/scattering.csv"));
    assert_eq!(header, ["k", "a_re", "a_im", "b_re", "b_im", "abs_rho"]);
    for j in 0..cols[0].len() {
        assert!((cols[1][j].hypot(cols[2][j]) - 1.0).abs() < 1e-6);
        assert!(cols[3][j].hypot(cols[4][j]) < 1e-6);
    }
    let z = csv(tmp.path().join("run/zeros.csv")).1;
    assert_eq!(z[0].len(), 1);
    assert!((z[1][0] - 0.5).abs() < 1e-6);

    let manifest = json(tmp.path().join("run/manifest.json"));
    assert_eq!(manifest["command"], "scatter");
    let names: Vec<&str> = manifest["files"].as_array().unwrap().iter().map(|f| f["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["config.json", "scattering.json", "scattering.csv", "zeros.csv"]);
}

#[test]
fn scatter_zero_profile_is_trivial() {
    let tmp = TempDir::new().unwrap();
    let o = nlsq(&["scatter", "--builtin", "zero", "--out", "run"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let cols = csv(tmp.path().join("run/scattering.csv")).1;
    for j in 0..cols[0].len() {
        assert!((cols[1][j] - 1.0).abs() < 1e-12 && cols[2][j].abs() < 1e-12);
        assert_eq!((cols[3][j], cols[4][j]), (0.0, 0.0));
    }
}

#[test]
fn missing_profile_file_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", serde_json::json!({"profile": {"file": "absent.json"}}));
    let o = nlsq(&["scatter", "--config", cfg.to_str().unwrap(), "--out", "run"], tmp.path());
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("absent.json"));
}

#[test]
fn bad_configs_exit_with_one() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&nlsq(&["scatter", "--builtin", "triangle"], tmp.path())), 1);
    let cfg = write_config(tmp.path(), "typo.json", serde_json::json!({"kgird": {"k_max": 3, "n": 11}}));
    assert_eq!(code(&nlsq(&["scatter", "--config", cfg.to_str().unwrap()], tmp.path())), 1);
    let cfg = write_config(tmp.path(), "c.json", serde_json::json!({"coupling": {"re": 1, "im": 1}}));
    assert_eq!(code(&nlsq(&["scatter", "--builtin", "sech", "--config", cfg.to_str().unwrap()], tmp.path())), 1);
    // quench without a post-quench coupling
    assert_eq!(code(&nlsq(&["quench", "--builtin", "sech"], tmp.path())), 1);
}

#[test]
fn quench_sech_doubling_the_coupling_gives_two_solitons() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "q.json", serde_json::json!({"coupling_post": {"re": 0.0, "im": 2.0}}));
    let o = nlsq(&["quench", "--builtin", "sech", "--config", cfg.to_str().unwrap(), "--out", "run"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = json(tmp.path().join("run/quench.json"));
    assert_eq!(r["classification"]["found_N"], 2);
    assert_eq!(r["classification"]["predicted_N"], 2);
    assert_eq!(r["classification"]["label"], "pure-multisoliton");
    assert_eq!(csv(tmp.path().join("run/zeros.csv")).1[0].len(), 2);
}

fn quick_stepper() -> Value {
    serde_json::json!({"dt": 1e-3, "n_modes": 256, "dealias": false})
}

#[test]
fn verify_zero_field_passes_with_vanishing_residuals() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "v.json", serde_json::json!({"stepper": quick_stepper(), "kgrid": {"k_max": 3.0, "n": 21}}));
    let o = nlsq(&["verify", "--builtin", "zero", "--config", cfg.to_str().unwrap(), "--out", "run"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = json(tmp.path().join("run/verify.json"));
    assert_eq!(r["passed"], true);
    for ch in r["checks"].as_array().unwrap() {
        let v = ch["value"].as_f64().unwrap();
        // a(k) = 1 up to the rounding of the free propagators
        let tol = if ch["name"] == "det_drift" { 1e-12 } else { 0.0 };
        assert!(v <= tol, "{ch}");
    }
}

#[test]
fn verify_exits_with_two_when_a_threshold_is_exceeded() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "v.json",
        serde_json::json!({
            "stepper": quick_stepper(),
            "t": 0.01,
            "kgrid": {"k_max": 3.0, "n": 11},
            "thresholds": {"det_drift": 0.0}
        }),
    );
    let o = nlsq(&["verify", "--builtin", "sech", "--config", cfg.to_str().unwrap(), "--out", "run"], tmp.path());
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    let r = json(tmp.path().join("run/verify.json"));
    assert_eq!(r["passed"], false);
    assert!(tmp.path().join("run/manifest.json").exists());
}

#[test]
fn reconstruct_refuses_soliton_bearing_data() {
    let tmp = TempDir::new().unwrap();
    let o = nlsq(&["reconstruct", "--builtin", "sech", "--out", "run"], tmp.path());
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("discrete eigenvalue"), "{}", stderr(&o));
    assert!(!tmp.path().join("run/reconstructed.csv").exists());
}

#[test]
fn reconstruct_from_a_scattering_file_recovers_the_gaussian() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "g.json",
        serde_json::json!({"profile": {"builtin": "gaussian", "L": 6.0, "n": 241}, "kgrid": {"k_max": 4.0, "n": 481}}),
    );
    let o = nlsq(&["scatter", "--config", cfg.to_str().unwrap(), "--out", "data"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let cfg = write_config(
        tmp.path(),
        "r.json",
        serde_json::json!({"data": "data/scattering.json", "xgrid": {"half_width": 6.0, "n": 17}}),
    );
    let o = nlsq(&["reconstruct", "--config", cfg.to_str().unwrap(), "--out", "run"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let cols = csv(tmp.path().join("run/reconstructed.csv")).1;
    for j in 0..cols[0].len() {
        let exact = 0.5 * (-0.5 * cols[0][j] * cols[0][j]).exp();
        assert!((cols[1][j] - exact).abs() < 1e-4 && cols[2][j].abs() < 1e-4, "x = {}", cols[0][j]);
    }
}

#[test]
fn identical_configs_give_identical_files() {
    let tmp = TempDir::new().unwrap();
    let a = nlsq(&["scatter", "--builtin", "gaussian", "--out", "a", "--threads", "1"], tmp.path());
    let b = nlsq(&["scatter", "--builtin", "gaussian", "--out", "b", "--threads", "3"], tmp.path());
    assert_eq!((code(&a), code(&b)), (0, 0));
    // the echoed config reproduces the run
    let c = nlsq(&["scatter", "--config", "a/config.json", "--out", "c"], tmp.path());
    assert_eq!(code(&c), 0, "{}", stderr(&c));
    for name in ["config.json", "scattering.json", "scattering.csv", "zeros.csv", "manifest.json"] {
        let ra = fs::read(tmp.path().join("a").join(name)).unwrap();
        assert_eq!(ra, fs::read(tmp.path().join("b").join(name)).unwrap(), "{name}");
        assert_eq!(ra, fs::read(tmp.path().join("c").join(name)).unwrap(), "{name}");
    }
}

#[test]
fn csv_matches_the_json_record_exactly() {
    let tmp = TempDir::new().unwrap();
    let o = nlsq(&["scatter", "--builtin", "gaussian", "--out", "run"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let j = json(tmp.path().join("run/scattering.json"));
    let cols = csv(tmp.path().join("run/scattering.csv")).1;
    for (col, key) in cols.iter().zip(["k", "a_re", "a_im", "b_re", "b_im"]) {
        assert_eq!(col, &floats(&j[key]), "{key}");
    }
}

#[test]
fn strip_removes_the_sech_soliton() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "d.json", serde_json::json!({"strip": true, "kgrid": {"k_max": 3.0, "n": 61}}));
    let o = nlsq(&["darboux", "--builtin", "sech", "--config", cfg.to_str().unwrap(), "--out", "run"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = json(tmp.path().join("run/darboux.json"));
    assert_eq!(r["steps"].as_array().unwrap().len(), 1);
    assert_eq!(r["steps"][0]["mode"], "remove");
    let cols = csv(tmp.path().join("run/transformed.csv")).1;
    let worst = (0..cols[0].len()).filter(|&j| cols[0][j].abs() < 10.0).map(|j| cols[3][j]).fold(0.0, f64::max);
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn darboux_add_on_vacuum_gives_a_soliton() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "d.json",
        serde_json::json!({
            "kgrid": {"k_max": 3.0, "n": 61},
            "steps": [{"k0": {"re": 0.0, "im": 0.5}, "mu": {"re": 1.0, "im": 0.0}, "mode": "add"}],
            "profile": {"builtin": "zero", "L": 20.0, "n": 401}
        }),
    );
    let o = nlsq(&["darboux", "--config", cfg.to_str().unwrap(), "--out", "run"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let cols = csv(tmp.path().join("run/transformed.csv")).1;
    for j in 0..cols[0].len() {
        assert!((cols[3][j] - 1.0 / cols[0][j].cosh()).abs() < 1e-8);
    }
}

#[test]
fn zeros_of_the_sech_and_the_dark_background() {
    let tmp = TempDir::new().unwrap();
    let o = nlsq(&["zeros", "--builtin", "sech", "--out", "s"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let z = json(tmp.path().join("s/zeros.json"));
    assert_eq!(z["zeros"].as_array().unwrap().len(), 1);
    assert!((z["zeros"][0]["im"].as_f64().unwrap() - 0.5).abs() < 1e-6);

    // 1 − iA sech(Ax), Z = 2: one zero at i(Z + 1/Z)/2
    let o = nlsq(&["zeros", "--builtin", "fd-focusing", "--out", "f"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let z = json(tmp.path().join("f/zeros.json"));
    assert_eq!(z["zeros"].as_array().unwrap().len(), 1);
    assert!((z["zeros"][0]["im"].as_f64().unwrap() - 1.25).abs() < 1e-6);
}

#[test]
fn evolve_keeps_the_soliton_mass() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "e.json",
        serde_json::json!({"t": 0.05, "snapshot_every": 25, "stepper": {"dt": 1e-3, "n_modes": 512, "dealias": false}}),
    );
    let o = nlsq(&["evolve", "--builtin", "sech", "--config", cfg.to_str().unwrap(), "--out", "run"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = json(tmp.path().join("run/evolve.json"));
    let (m0, m1) = (r["mass_initial"].as_f64().unwrap(), r["mass_final"].as_f64().unwrap());
    assert!((m0 - 2.0).abs() < 1e-9 && (m1 - m0).abs() < 1e-9);
    let (header, cols) = csv(tmp.path().join("run/snapshots.csv"));
    assert_eq!(header, ["t", "x", "re", "im", "abs"]);
    // t = 0, 0.025 and 0.05
    assert_eq!(cols[0].len(), 3 * 512);
    let final_profile = json(tmp.path().join("run/final.json"));
    assert_eq!(final_profile["re"].as_array().unwrap().len(), 512);
}

#[test]
fn evolve_needs_a_time() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&nlsq(&["evolve", "--builtin", "sech"], tmp.path())), 1);
}
