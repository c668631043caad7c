use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_lame-spectra"));
    c.env_remove("LAME_SPECTRA_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn c(v: &serde_json::Value) -> (f64, f64) {
    (v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

#[test]
fn equiv_check_reports_small_trace_error() {
    let v = json(&run(&["equiv-check", "--tau", "0,2", "--p", "0.23,0.61", "--T", "0.7,0.2"]));
    assert_eq!(v["provenance"]["command"], "equiv-check");
    assert_eq!(v["provenance"]["config_hash"].as_str().unwrap().len(), 64);
    assert!(v["result"]["max_abs_diff"].as_f64().unwrap() < 1e-6);
}

#[test]
fn premodular_zero_finds_rho() {
    let v = json(&run(&["premodular-zero", "--r", "0.333333", "--s", "0.333333"]));
    let (re, im) = c(&v["result"]["tau"]);
    assert!((re - 0.5).abs() < 1e-4 && (im - 0.8660254).abs() < 1e-4);
}

#[test]
fn spectral_set_csv_matches_regime() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("arcs.csv");
    let args = ["spectral-set", "--tau", "0,2", "--wp-p", "1.5,0", "--j", "1", "--resolution", "81"];
    let out = bin().args(args).args(["--format", "csv", "--out"]).arg(&csv_path).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    assert_eq!(rdr.headers().unwrap(), vec!["j", "arc_id", "point_index", "T_re", "T_im"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| &r[0] == "1"));

    let v = json(&run(&args));
    let regime = &v["result"]["regime"];
    assert_eq!(regime["index"].as_u64().unwrap(), 3);
    let th = regime["thresholds"].as_array().unwrap();
    assert!(th[0].as_f64().unwrap() < 1.5 && 1.5 < th[1].as_f64().unwrap());
    let arcs = v["result"]["arcs"].as_array().unwrap();
    let points: usize = arcs.iter().map(|a| a["points"].as_array().unwrap().len()).sum();
    assert_eq!(points, rows.len());
}

fn result_bytes(path: &Path) -> String {
    let text = std::fs::read_to_string(path).unwrap();
    let i = text.find("\"result\":").unwrap();
    text[i..].to_string()
}

#[test]
fn artifact_round_trips_as_config() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    let second = dir.path().join("second.json");
    let out = bin().args(["monodromy", "--tau", "0.1,1.1", "--p", "0.27,0.31", "--T", "0.4,0.9", "--out"]).arg(&first).output().unwrap();
    assert!(out.status.success());
    let out = bin().arg("--config").arg(&first).arg("--out").arg(&second).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(result_bytes(&first), result_bytes(&second));
    let a: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&first).unwrap()).unwrap();
    let b: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&second).unwrap()).unwrap();
    assert_eq!(a["provenance"], b["provenance"]);
}

#[test]
fn plain_config_file_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("job.json");
    std::fs::write(&cfg, r#"{"command": "torus", "tau": [0.0, 1.0]}"#).unwrap();
    let v = json(&bin().arg("--config").arg(&cfg).output().unwrap());
    let (g3re, g3im) = c(&v["result"]["g3"]);
    assert!(g3re.abs() < 1e-9 && g3im.abs() < 1e-9);
}

fn error_kind(out: &Output) -> String {
    let v: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    v["error"]["kind"].as_str().unwrap().to_string()
}

#[test]
fn config_errors_exit_with_two() {
    for args in [
        vec!["torus", "--tau", "0,-1"],
        vec!["torus", "--tau", "0,1", "--r", "0.3"],
        vec!["equiv-check", "--tau", "0,2", "--T", "0.7,0.2"],
        vec!["premodular-zero", "--r", "0.1", "--s", "0.1"],
        vec!["torus", "--tau", "0,1", "--format", "csv"],
        vec!["monodromy", "--tau", "0,1", "--p", "0.5,0", "--T", "1,0"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert_eq!(error_kind(&out), "config");
    }
}

#[test]
fn numerical_failures_exit_with_three() {
    let out = run(&["monodromy", "--tau", "0.1,1.1", "--p", "0.2,0.3", "--T", "0.5,0", "--tol", "1e-300"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_kind(&out), "numerical");
}

#[test]
fn threads_from_environment() {
    let out = bin().env("LAME_SPECTRA_THREADS", "0").args(["torus", "--tau", "0,1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().env("LAME_SPECTRA_THREADS", "1").args(["torus", "--tau", "0,1"]).output().unwrap();
    assert!(out.status.success());
}

#[test]
fn blowup_reports_singular_case() {
    let v = json(&run(&["blowup", "--r", "0.3333333333333333", "--s", "0.3333333333333333", "--p", "0.5,0.28867513459481287"]));
    let cfg = &v["result"]["configs"][0];
    assert_eq!(cfg["singular"]["blows_up"], true);
    assert!(cfg["plus_set"].is_null());
    let v = json(&run(&["blowup", "--r", "0.3", "--s", "0.35", "--p", "0.2,0.1"]));
    let res = &v["result"]["configs"][0]["residuals"];
    for side in ["plus", "minus"] {
        assert!(res[side]["res22"].as_f64().unwrap() < 1e-8);
        assert!(res[side]["res23"].as_f64().unwrap() < 1e-8);
    }
}
