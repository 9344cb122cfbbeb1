use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};
use weylkit::field::load_field;

fn weylkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weylkit")).args(args).env("WEYLKIT_THREADS", "1").output().unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn rigidity_report_on_flat_metric() {
    let dir = tempfile::tempdir().unwrap();
    let (json, csv) = (dir.path().join("r.json"), dir.path().join("r.csv"));
    let out = weylkit(&["rigidity-report", "--metric", "flat", "--n", "8", "--alpha", "0:0.05:0.5556", "--json", arg(&json), "--csv", arg(&csv)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = read_json(&json);
    assert_eq!(v["schemaVersion"], 1);
    assert_eq!(v["alphaGrid"].as_array().unwrap().len(), 13);
    assert_eq!(v["wPlusL2"], 0.0);
    assert_eq!(v["yamabeUpper"], 0.0);
    assert_eq!(v["chi"], 0);
    assert_eq!(v["rows"][3]["weylPinchingPlus"], "vacuous");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 14);
    assert!(text.starts_with("alpha,dAlphaPlus"));
}

#[test]
fn out_of_range_alpha_is_invalid_input() {
    let out = weylkit(&["rigidity-report", "--metric", "flat", "--n", "4", "--alpha", "0:0.1:0.7"]);
    assert_eq!(out.status.code(), Some(3));
    let out = weylkit(&["rigidity-report", "--metric", "no-such-config.toml"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn curvature_dumps_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = weylkit(&["curvature", "--metric", "perturbed", "--n", "4", "--out", arg(dir.path())]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = read_json(&dir.path().join("summary.json"));
    assert_eq!(summary["schemaVersion"], 1);
    assert_eq!(summary["gridSpec"]["n"], 4);
    let (scalar, side) = load_field(&dir.path().join("scalar")).unwrap();
    assert_eq!(side.family_id, "perturbed");
    assert_eq!((side.n, side.rank), (4, 0));
    assert_eq!(scalar.data().len(), 256);
    let (metric, side) = load_field(&dir.path().join("metric")).unwrap();
    assert_eq!(side.rank, 2);
    assert_eq!(metric.data().len(), 256 * 16);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "[metric]\nfamily = \"conformallyFlat\"\nf = [{ amp = 0.05, k = [1, 0, 0, 0] }]\n\n[grid]\nn = 6\n\n[report]\nalpha = \"0.1,0.2\"\nyamabe_iterations = 5\n",
    )
    .unwrap();
    let json = dir.path().join("r.json");
    let out = weylkit(&["rigidity-report", "--metric", arg(&cfg), "--n", "8", "--json", arg(&json)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = read_json(&json);
    assert_eq!(v["gridSpec"]["n"], 8);
    assert_eq!(v["metricFamily"], "conformallyFlat");
    assert_eq!(v["alphaGrid"], serde_json::json!([0.1, 0.2]));
    assert!(v["yamabeIterations"].as_u64().unwrap() <= 5);

    std::fs::write(&cfg, "[metric]\nfamily = \"flat\"\nbogus = 1\n").unwrap();
    assert_eq!(weylkit(&["spectrum", "--metric", arg(&cfg)]).status.code(), Some(1));
}

#[test]
fn verify_identities_and_kato_scan() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("id.json");
    let out = weylkit(&["verify-identities", "--metric", "flat", "--n", "8", "--json", arg(&json)]);
    assert_eq!(out.status.code(), Some(0));
    let v = read_json(&json);
    assert_eq!(v["threads"], 1);
    assert!(v["identities"].as_array().unwrap().iter().all(|r| r["passed"] == true));

    let csv = dir.path().join("k.csv");
    let out = weylkit(&["kato-scan", "--metric", "perturbed", "--n", "8", "--k-grid", "0,1,1.7", "--csv", arg(&csv)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("k,statistic,value\n"));
    assert!(text.contains("1.7,outOfRange,1"));
    assert!(text.contains("1,passed,1"));
    assert!(text.contains("0,plusNodesChecked,4096"));
}

#[test]
fn minimize_and_spectrum_on_flat_metric() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("m.json");
    let out = weylkit(&["minimize", "--metric", "flat", "--n", "6", "--tol", "1e-8", "--json", arg(&json)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = read_json(&json);
    assert_eq!(v["minimizer"]["degenerate"], true);
    assert!(v["minimizer"]["dHat"].as_f64().unwrap().abs() < 1e-12);
    assert!(v["bounds"].is_null());
    let (vf, side) = load_field(&dir.path().join("v")).unwrap();
    assert_eq!(side.sha256, v["dumps"]["v"]["sha256"].as_str().unwrap());
    assert!((vf.max() - vf.min()) / vf.max() < 1e-12);
    assert!(dir.path().join("phi1.f64").exists() && dir.path().join("phi1.json").exists());

    // nondegenerate mode rejects the flat metric
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[metric]\nfamily = \"flat\"\n[solver]\nmode = \"nondegenerate\"\n").unwrap();
    assert_eq!(weylkit(&["spectrum", "--metric", arg(&cfg), "--n", "6"]).status.code(), Some(3));

    let out = weylkit(&["spectrum", "--metric", "flat", "--n", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["degenerate"], true);
    assert!(v["spectrum"]["lambda1"].as_f64().unwrap().abs() < 1e-12);
}
