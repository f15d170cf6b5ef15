use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;
use unext::cli::StateFile;
use unext::linalg::partial_trace;
use unext::states::{max_entangled, product_state, random_bipartite, random_state};

fn unext(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unext")).args(args).env_remove("UEXT_SOLVER_TOL").output().unwrap()
}

fn json(out: &Output) -> Value {
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON record")
}

fn value(out: &Output) -> f64 {
    json(out)["value"].as_f64().unwrap()
}

fn write_product(dir: &Path) -> String {
    let rho = product_state(&random_state(2, 2, 1).unwrap(), &random_state(2, 2, 2).unwrap()).unwrap();
    let path = dir.join("product.json");
    StateFile::from_state(&rho, Some("product".into())).save(&path).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn measure_examples() {
    let dir = TempDir::new().unwrap();
    let product = write_product(dir.path());
    let emax = json(&unext(&["measure", "--kind", "emax", "--family", "maxent", "--d", "2"]));
    assert!((emax["value"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(emax["schema"], 1);
    assert_eq!(emax["diagnostics"]["converged"], true);
    let rel = value(&unext(&["measure", "--kind", "rel", "--family", "erased", "--eps", "0.25"]));
    assert!((rel - 0.75).abs() < 1e-4);
    assert!(value(&unext(&["measure", "--kind", "emin", "--state", &product])).abs() < 1e-6);
    let fid = json(&unext(&["measure", "--kind", "fidelity", "--family", "pure-schmidt", "--schmidt", "0.8,0.2"]));
    assert!((fid["value"].as_f64().unwrap() - 0.8).abs() < 1e-6);
    assert!((fid["bits"].as_f64().unwrap() + 0.8f64.log2()).abs() < 1e-6);
    let petz = value(&unext(&["measure", "--kind", "petz", "--alpha", "1.5", "--family", "maxent", "--d", "2"]));
    assert!((petz - 1.0).abs() < 1e-4);
}

#[test]
fn input_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "{\"dims\": {\"A\": 2}}").unwrap();
    // 2 × 46 state: its extension has order 2·46·46 > 4096.
    let big = dir.path().join("big.json");
    let rho = random_bipartite(2, 46, 1, 3).unwrap();
    StateFile::from_state(&rho, None).save(&big).unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["measure", "--kind", "emax"],
        vec!["measure", "--kind", "petz", "--alpha", "3", "--family", "maxent", "--d", "2"],
        vec!["measure", "--kind", "emax", "--state", "/nonexistent/state.json"],
        vec!["measure", "--kind", "emax", "--state", garbage.to_str().unwrap()],
        vec!["measure", "--kind", "emax", "--state", big.to_str().unwrap()],
        vec!["measure", "--kind", "emax", "--family", "isotropic", "--d", "2", "--r", "1.5"],
        vec!["measure", "--kind", "nonsense", "--family", "maxent", "--d", "2"],
        vec!["sweep", "--family", "erased", "--grid", "0:1"],
        vec!["bounds", "--task", "det-rate", "--family", "erased", "--eps", "0.5"],
        vec!["frobnicate"],
    ];
    for args in cases {
        let out = unext(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?} gave no message");
    }
}

#[test]
fn solver_tolerance_from_environment() {
    let run = |tol: &str| {
        Command::new(env!("CARGO_BIN_EXE_unext"))
            .args(["measure", "--kind", "emax", "--family", "isotropic", "--d", "2", "--r", "0.9"])
            .env("UEXT_SOLVER_TOL", tol)
            .output()
            .unwrap()
    };
    assert_eq!(run("1e-10").status.code(), Some(0));
    let strict = run("1e-300");
    assert_eq!(strict.status.code(), Some(2));
    let record: Value = serde_json::from_slice(&strict.stdout).unwrap();
    assert_eq!(record["diagnostics"]["converged"], false);
    assert_eq!(run("abc").status.code(), Some(1));
}

#[test]
fn sweep_csv() {
    let out = unext(&["sweep", "--family", "erased", "--grid", "0:1:11", "--measures", "rel"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(rdr.headers().unwrap(), vec!["param", "e_rel", "e_max", "e_min", "f_u", "overhead_rel", "overhead_ree"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 11);
    for row in &rows {
        let eps: f64 = row[0].parse().unwrap();
        assert!(row[2].is_empty() && row[4].is_empty());
        if eps == 1.0 {
            assert_eq!(&row[5], "inf");
        } else {
            let o: f64 = row[5].parse().unwrap();
            assert!((o - 1.0 / (1.0 - eps)).abs() < 1e-3 / (1.0 - eps), "eps {eps}: {o}");
        }
    }

    let empty = unext(&["sweep", "--family", "erased", "--grid", ""]);
    assert_eq!(empty.status.code(), Some(0));
    assert_eq!(String::from_utf8(empty.stdout).unwrap().lines().count(), 1);

    let dir = TempDir::new().unwrap();
    let path = dir.path().join("iso.csv");
    let out = unext(&["sweep", "--family", "isotropic", "--grid", "0.9,1", "--out", path.to_str().unwrap(), "--jobs", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_path(&path).unwrap();
    let last = rdr.records().last().unwrap().unwrap();
    assert_eq!(&last[0], "1");
    for col in [5, 6] {
        assert!((last[col].parse::<f64>().unwrap() - 1.0).abs() < 1e-4);
    }
}

#[test]
fn check_extendible_and_certificate() {
    let dir = TempDir::new().unwrap();
    let product = write_product(dir.path());
    let cert = dir.path().join("cert.json");
    let rec = json(&unext(&["check-extendible", "--state", &product, "--certificate", cert.to_str().unwrap()]));
    assert_eq!(rec["feasible"], true);
    assert_eq!(rec["certificate_file"], cert.to_str().unwrap());
    let file = StateFile::load(&cert).unwrap();
    assert_eq!((file.dims.a, file.dims.b), (2, 4));
    let sigma = file.to_state().unwrap();
    let rho = StateFile::load(Path::new(&product)).unwrap().matrix().unwrap();
    for traced in [1, 2] {
        let m = partial_trace(sigma.matrix(), &[2, 2, 2], &[traced]).unwrap();
        assert!((m - &rho).norm() < 1e-7);
    }
    // Rank-deficient input: the certificate still lives on the full A⊗B⊗B′ space.
    let pure = dir.path().join("pure.json");
    let rho = product_state(&random_state(2, 1, 5).unwrap(), &random_state(3, 1, 6).unwrap()).unwrap();
    StateFile::from_state(&rho, None).save(&pure).unwrap();
    let rec = json(&unext(&["check-extendible", "--state", pure.to_str().unwrap(), "--certificate", cert.to_str().unwrap()]));
    assert_eq!(rec["feasible"], true);
    let sigma = StateFile::load(&cert).unwrap().to_state().unwrap();
    assert_eq!(sigma.dim(), 18);
    let m = partial_trace(sigma.matrix(), &[2, 3, 3], &[2]).unwrap();
    assert!((m - rho.matrix()).norm() < 1e-7);

    let rec = json(&unext(&["check-extendible", "--family", "maxent", "--d", "2"]));
    assert_eq!(rec["feasible"], false);
    let near = |r: &str| json(&unext(&["check-extendible", "--family", "isotropic", "--d", "2", "--r", r]))["feasible"].clone();
    assert_eq!((near("0.73"), near("0.77")), (Value::Bool(true), Value::Bool(false)));
}

#[test]
fn bounds_examples() {
    let dir = TempDir::new().unwrap();
    let product = write_product(dir.path());
    let key = value(&unext(&["bounds", "--task", "key-overhead", "--k", "1", "--family", "erased", "--eps", "0.5"]));
    assert!((key - 2.0).abs() < 1e-3);
    let exact = json(&unext(&["bounds", "--task", "exact-key", "--family", "maxent", "--d", "2"]));
    assert!((exact["value"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(exact["measure"], "e_min_u");
    assert!(value(&unext(&["bounds", "--task", "exact-ent", "--state", &product])).abs() < 1e-6);
    let ent = json(&unext(&["bounds", "--task", "ent-overhead", "--m", "2", "--state", &product]));
    assert_eq!(ent["value"], "inf");
}

#[test]
fn state_file_round_trip_is_exact() {
    let dir = TempDir::new().unwrap();
    for seed in 0..5 {
        let rho = random_bipartite(2, 3, 3, seed).unwrap();
        let a = dir.path().join("a.json");
        let b = dir.path().join("b.json");
        let file = StateFile::from_state(&rho, None);
        file.save(&a).unwrap();
        let back = StateFile::load(&a).unwrap();
        assert_eq!(back, file);
        let m = back.matrix().unwrap();
        assert!(m.iter().zip(rho.matrix().iter()).all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()));
        back.save(&b).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }
    // export writes the same payload the library builds.
    let path = dir.path().join("phi.json");
    assert_eq!(unext(&["export", "--family", "maxent", "--d", "3", "--out", path.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(StateFile::load(&path).unwrap().matrix().unwrap(), *max_entangled(3).unwrap().matrix());
}

#[test]
fn output_is_deterministic() {
    let strip = |out: Output| {
        let mut v = json(&out);
        v["diagnostics"].as_object_mut().map(|d| d.remove("runtime_ms"));
        v.as_object_mut().unwrap().remove("runtime_ms");
        v
    };
    for args in [
        vec!["measure", "--kind", "rel", "--family", "private", "--key", "2", "--seed", "4"],
        vec!["measure", "--kind", "fidelity", "--family", "isotropic", "--d", "3", "--r", "0.8"],
    ] {
        assert_eq!(strip(unext(&args)), strip(unext(&args)), "{args:?}");
    }
}
