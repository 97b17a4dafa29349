use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn quad(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quad")).args(args).current_dir(dir).output().expect("quad runs")
}

fn quad_threads(args: &[&str], dir: &Path, threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quad"))
        .args(args)
        .current_dir(dir)
        .env("QUAD_THREADS", threads)
        .output()
        .expect("quad runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn field(summary: &str, key: &str) -> f64 {
    let tag = format!("{key}=");
    let v = summary.split_whitespace().find_map(|w| w.strip_prefix(&tag)).unwrap_or_else(|| panic!("{key} in {summary}"));
    v.parse().unwrap()
}

#[test]
fn validation_failures_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = quad(&["wce", "--manifold", "torus:1", "--family", "random", "--n", "8", "--alpha", "0.4"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("alpha must exceed d/2 = 0.5"), "{}", stderr(&o));

    let o = quad(&["gen", "--manifold", "torus:2", "--family", "jittered", "--n", "6", "--out", "p.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("N must be a perfect d-th power"));
    assert!(!dir.path().join("p.json").exists());

    let o = quad(&["qnorm", "--manifold", "sphere:2", "--family", "random", "--n", "8", "--alpha", "1.5", "--q", "inf"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("d(1 - 1/q) = 2"));

    let o = quad(&["gen", "--manifold", "sphere:2", "--family", "random", "--n", "8", "--out", "p.json", "--check"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("valid"));
}

#[test]
fn library_failures_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = quad(&["gen", "--manifold", "torus:1", "--family", "random", "--n", "9", "--out", "r.json"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    // a random set is not an exact rule
    let o = quad(&["perturb", "--in", "r.json", "--alpha", "1.5", "--beta", "2.5", "--r", "25.1"], dir.path());
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("not an exact rule"));
}

#[test]
fn exact_rule_then_three_routes() {
    let dir = tempfile::tempdir().unwrap();
    let o = quad(&["rule", "--manifold", "sphere:2", "--r2", "13", "--tol", "1e-10", "--out", "rule.json"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.starts_with("task=rule"));
    assert!(field(&s, "residual") <= 1e-10);
    assert!(field(&s, "n") <= 17.0);
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("rule.json")).unwrap()).unwrap();
    assert!(doc["provenance"]["residual"].as_f64().unwrap() <= 1e-10);
    assert_eq!(doc["provenance"]["config_hash"].as_str().unwrap().len(), 64);
    assert!(doc["provenance"]["version"].is_string());

    let o = quad(&["wce", "--in", "rule.json", "--alpha", "2.5", "--method", "all", "--out", "w.json"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    let (sp, k, h) = (field(&s, "spectral"), field(&s, "kernel"), field(&s, "heat"));
    assert!((k - h).abs() < 1e-6 && (k - sp).abs() < 1e-4, "{s}");
    let w: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("w.json")).unwrap()).unwrap();
    assert_eq!(w["report"]["reports"].as_array().unwrap().len(), 3);
    assert_eq!(w["task"], "wce");
}

#[test]
fn scale_writes_the_frozen_columns() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["scale", "--manifold", "torus:2", "--family", "jittered", "--alpha", "1.3", "--n", "16,64,256", "--seeds", "3", "--out", "s.csv"];
    let o = quad(&args, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(field(&stdout(&o), "slope") < 0.0);
    let csv = fs::read_to_string(dir.path().join("s.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "abscissa,seed,value");
    assert_eq!(rows.len(), 1 + 9);
    assert!(csv.contains("# config_hash: "));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.json"), r#"{"manifold": "torus:1", "family": "random", "n": [5], "alpha": 0.3}"#).unwrap();
    let o = quad(&["wce", "--config", "c.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = quad(&["wce", "--config", "c.json", "--alpha", "1.5"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    fs::write(dir.path().join("bad.json"), r#"{"task": "gen"}"#).unwrap();
    let o = quad(&["wce", "--config", "bad.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    fs::write(dir.path().join("typo.json"), r#"{"alhpa": 1.5}"#).unwrap();
    assert_eq!(quad(&["wce", "--config", "typo.json"], dir.path()).status.code(), Some(2));
}

#[test]
fn artifacts_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 4] = [
        &["gen", "--manifold", "sphere:2", "--family", "jittered", "--n", "20", "--seed", "3", "--out", "OUT.json"],
        &["disc", "--manifold", "sphere:2", "--family", "fibonacci", "--n", "50", "--centers", "64", "--r", "6", "--out", "OUT.csv"],
        &["scale", "--manifold", "torus:1", "--family", "random", "--alpha", "1.5", "--n", "4,8,16", "--seeds", "4", "--out", "OUT.json"],
        &["transfer", "--manifold", "torus:2", "--family", "random", "--n", "9", "--alpha", "2", "--beta", "1.5", "--out", "OUT.json"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for (k, threads) in ["1", "3"].iter().enumerate() {
            let name = args.last().unwrap().replace("OUT", &format!("a{i}_{k}"));
            let mut a: Vec<&str> = args.to_vec();
            *a.last_mut().unwrap() = &name;
            let o = quad_threads(&a, dir.path(), threads);
            assert!(o.status.success(), "{}", stderr(&o));
            outputs.push((fs::read(dir.path().join(&name)).unwrap(), stdout(&o)));
        }
        assert_eq!(outputs[0].0, outputs[1].0, "artifact of run {i} differs");
        assert_eq!(outputs[0].1, outputs[1].1);
    }
}

#[test]
fn qnorm_bound_and_perturb_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = quad(&["qnorm", "--manifold", "torus:1", "--family", "random", "--n", "6", "--alpha", "1.5", "--q", "2", "--grid", "1024"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let o = quad(&["bound", "--manifold", "torus:1", "--family", "lattice", "--n", "16", "--alpha", "1.5", "--out", "b.json"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(field(&stdout(&o), "lower_bound") > 0.0);
    let o = quad(&["perturb", "--manifold", "torus:1", "--r", "25.132741228718345", "--alpha", "1.5", "--beta", "2.5"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(field(&stdout(&o), "scaled_beta") > 0.0);
    let o = quad(&["disc", "--manifold", "sphere:2", "--family", "fibonacci", "--n", "40", "--sets", "levelsets", "--alpha", "1.5", "--centers", "32", "--radii", "6"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let o = quad(&["gen", "--manifold", "sphere:2", "--family", "lps_orbit", "--word-length", "1", "--out", "l.csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("n=7"));
}
