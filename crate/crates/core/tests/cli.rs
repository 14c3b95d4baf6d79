use onebit::cli::{load_manifests, manifest_path, replay, round12, verify};
use onebit::noncoherent::{capacity_noncoherent_exact, NoncoherentParams};
use onebit::rng::McConfig;
use onebit::simulator::sha256_hex;
use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn onebit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_onebit")).args(args).env_remove("ONEBIT_SAMPLES").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Vec<Value> {
    serde_json::from_slice::<Value>(&o.stdout).unwrap().as_array().unwrap().clone()
}

#[test]
fn unsupported_block_length_exits_3() {
    let o = onebit(&["capacity", "noncoherent", "--T", "4", "--snr", "1", "--nr", "1024", "--method", "exact"]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    for m in ["lb-uniform", "lb-indep", "ub-genie"] {
        assert!(err.contains(m), "{err}");
    }
}

#[test]
fn bad_arguments_exit_2() {
    assert_eq!(onebit(&["capacity", "coherent", "--snr", "0", "--nr", "8"]).status.code(), Some(2));
    assert_eq!(onebit(&["capacity", "coherent", "--snr", "1"]).status.code(), Some(2));
    assert_eq!(onebit(&["volume", "--T", "3", "--gamma", "1.5"]).status.code(), Some(2));
    assert_eq!(onebit(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(onebit(&["validate", "nothing"]).status.code(), Some(2));
}

#[test]
fn coherent_terms_sum_to_value() {
    let o = onebit(&["capacity", "coherent", "--snr", "1", "--nt", "2", "--nr", "1024", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let r = &json(&o)[0];
    let sum: f64 = ["term_dimension", "term_volume", "term_alpha"].iter().map(|k| r[k].as_f64().unwrap()).sum();
    let v = r["value_bits"].as_f64().unwrap();
    assert!((sum - v).abs() < 1e-10);
    assert_eq!(r["manifest_id"].as_str().unwrap().len(), 64);
}

#[test]
fn noncoherent_value_matches_library_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let o = onebit(&[
        "capacity", "noncoherent", "--T", "2", "--snr", "1", "--nr", "4096", "--method", "exact", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let row: csv::StringRecord = rdr.records().next().unwrap().unwrap();
    let hdr = rdr.headers().unwrap().clone();
    let col = |name: &str| row.get(hdr.iter().position(|h| h == name).unwrap()).unwrap().to_string();
    let lib = capacity_noncoherent_exact(&NoncoherentParams::new(1.0, 2, 2, 4096).unwrap(), &McConfig::default())
        .unwrap()
        .bits_per_use;
    assert_eq!(col("value_bits").parse::<f64>().unwrap(), round12(lib));

    let manifests = load_manifests(&manifest_path(&out)).unwrap();
    assert_eq!(manifests.len(), 1);
    assert_eq!(manifests[0].id(), col("manifest_id"));
    assert!(verify(&manifests[0]).unwrap());
    let v = replay(&manifests[0]).unwrap();
    assert_eq!(v["value_bits"].as_f64().unwrap(), lib);
}

#[test]
fn sample_budget_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v.csv");
    let o = Command::new(env!("CARGO_BIN_EXE_onebit"))
        .args(["volume", "--T", "3", "--gamma", "0.8", "--method", "mc", "--out", out.to_str().unwrap()])
        .env("ONEBIT_SAMPLES", "2e3")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let m = load_manifests(&manifest_path(&out)).unwrap();
    assert_eq!(m[0].samples, Some(2000));
    assert!(verify(&m[0]).unwrap());
    let bad = Command::new(env!("CARGO_BIN_EXE_onebit"))
        .args(["volume", "--T", "3", "--method", "mc"])
        .env("ONEBIT_SAMPLES", "lots")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn validate_suites_pass() {
    for args in [
        &["validate", "volume", "--T", "3", "--samples", "1e6", "--seed", "7"][..],
        &["validate", "estimator-mse", "--T", "3", "--gamma", "0.8"][..],
        &["validate", "mi-t2", "--gamma", "0.5"][..],
    ] {
        let o = onebit(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}\n{}", stdout(&o));
        let s = stdout(&o);
        assert!(s.contains("PASS") && !s.contains("FAIL"), "{s}");
    }
    let s = stdout(&onebit(&["validate", "volume", "--T", "3", "--samples", "1e6", "--seed", "7"]));
    assert!(s.lines().any(|l| l.contains("T=3 gamma=1 Monte Carlo") && l.contains("PASS")));
}

#[test]
fn failing_check_exits_4() {
    // a gap table that grows violates the shrinking-gap check
    let o = onebit(&["validate", "mi-t2", "--gamma", "0.5", "--nr", "1024,64"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn simulate_reports_every_pair() {
    let o = onebit(&["simulate", "--T", "3", "--gamma", "0.8", "--nr", "20000", "--seed", "5", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = json(&o);
    assert_eq!(rows.len(), 3);
    for r in &rows {
        let q = r["q"].as_f64().unwrap();
        let qh = r["q_hat"].as_f64().unwrap();
        assert!((q - qh).abs() < 0.1);
    }
    assert_eq!(o.stdout, onebit(&["simulate", "--T", "3", "--gamma", "0.8", "--nr", "20000", "--seed", "5", "--format", "json"]).stdout);
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn sweep_grid_and_reproducibility() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.toml",
        "operation = \"capacity-noncoherent\"\nmethod = \"exact\"\nseed = 11\nsamples = 20000\nT = [3]\nsnr = [0.5, 2.0]\nnr = [1024, 4096]\n",
    );
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert_eq!(onebit(&["sweep", &cfg, "--out", a.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(onebit(&["sweep", &cfg, "--out", b.to_str().unwrap()]).status.code(), Some(0));
    let (ba, bb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(sha256_hex(&ba), sha256_hex(&bb));
    let text = String::from_utf8(ba).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[0], "snr,T,nr,method,value_bits,std_err,term_dimension,term_volume,term_alpha,seed,manifest_id,error");
    for m in load_manifests(&manifest_path(&a)).unwrap() {
        assert!(verify(&m).unwrap());
    }
}

#[test]
fn sweep_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write(dir.path(), "e.toml", "operation = \"capacity-coherent\"\nsnr = []\nnr = [64]\n");
    let o = onebit(&["sweep", &empty]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 1);

    let partial = write(
        dir.path(),
        "p.toml",
        "operation = \"capacity-noncoherent\"\nmethod = [\"exact\", \"lb-uniform\"]\ngamma = [0.5]\nT = [2, 4]\nnr = [4096]\nformat = \"json\"\n",
    );
    let o = onebit(&["sweep", &partial]);
    assert_eq!(o.status.code(), Some(0));
    let rows = json(&o);
    assert_eq!(rows.len(), 4);
    let errs: Vec<bool> = rows.iter().map(|r| !r["error"].is_null()).collect();
    assert_eq!(errs, [false, false, true, false]);
    let text = stdout(&o);
    let again = serde_json::to_string_pretty(&serde_json::from_str::<Value>(&text).unwrap()).unwrap() + "\n";
    assert_eq!(again, text);

    let bad = write(dir.path(), "b.toml", "operation = \"capacity-coherent\"\nsnr = [1.0]\nbogus = 3\n");
    assert_eq!(onebit(&["sweep", &bad]).status.code(), Some(2));
    let big = write(dir.path(), "g.toml", "operation = \"volume\"\nT = [2, 3, 4]\nmax_cells = 2\n");
    assert_eq!(onebit(&["sweep", &big]).status.code(), Some(2));
    assert_eq!(onebit(&["sweep", "/nonexistent.toml"]).status.code(), Some(2));
}
