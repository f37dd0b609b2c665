use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

use witnesslab::algebra::BipartiteAlgebra;
use witnesslab::verify::{check_entanglement_witness, check_quantumness_witness, EwOptions};
use witnesslab::witnesses::{sector_basis_order, shifted_swap, swap_operator};
use witnesslab::HermitianOperator;

fn witnesslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_witnesslab"))
        .args(args)
        .env_remove("WITNESSLAB_SEED")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!("bad JSON ({e}): {}\nstderr: {}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
    })
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn no_panic(o: &Output) {
    assert!(!String::from_utf8_lossy(&o.stderr).contains("panicked"));
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_csv(bytes: &[u8]) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn construct_swap_to_stdout() {
    let o = witnesslab(&["construct", "swap", "--d", "3"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["operator"]["dim"], 9);
    assert_eq!(v["operator"]["re"].as_array().unwrap().len(), 81);
    let op: HermitianOperator = serde_json::from_value(v["operator"].clone()).unwrap();
    assert_eq!(op, swap_operator(3).unwrap());
    assert_eq!(v["provenance"]["kind"], "swap");
}

#[test]
fn construct_shifted_swap_writes_factor_files() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("q.json");
    let o =
        witnesslab(&["construct", "shifted-swap", "--d", "2", "--xi", "0.5", "--phi", "0", "--out", path_str(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["q.json", "q.X.json", "q.Y.json", "q.provenance.json"] {
        assert!(dir.path().join(name).exists(), "{name} missing");
    }
    let prov = read_json(&dir.path().join("q.provenance.json"));
    assert!(prov["residual"].as_f64().unwrap() < 1e-10);
    let q: HermitianOperator = serde_json::from_value(read_json(&out)).unwrap();
    assert!(q.matrix().distance(shifted_swap(2, 0.5).unwrap().matrix()) < 1e-10);
}

#[test]
fn construct_rejects_bad_parameters() {
    for args in [
        &["construct", "shifted-swap", "--xi", "1.0"][..],
        &["construct", "shifted-swap"],
        &["construct", "swap", "--d", "1"],
        &["construct", "qubit-qw", "--u", "2,0,0"],
        &["construct", "qubit-qw", "--u", "1,0"],
        &["construct", "bell", "--sign", "sideways"],
        &["construct", "teleporter"],
        &["construct", "qubit-qw", "--basis", "sector"],
    ] {
        let o = witnesslab(args);
        assert_eq!(code(&o), 2, "{args:?}");
        no_panic(&o);
    }
}

#[test]
fn sector_basis_permutes() {
    let o = witnesslab(&["construct", "swap", "--d", "3", "--basis", "sector"]);
    assert_eq!(code(&o), 0);
    let op: HermitianOperator = serde_json::from_value(stdout_json(&o)["operator"].clone()).unwrap();
    let want = swap_operator(3).unwrap().matrix().permute_basis(&sector_basis_order(3)).unwrap();
    assert_eq!(op.matrix(), &want);
}

#[test]
fn verify_examples() {
    let dir = TempDir::new().unwrap();
    let swap = dir.path().join("swap2.json");
    assert_eq!(code(&witnesslab(&["construct", "swap", "--d", "2", "--out", path_str(&swap)])), 0);
    let o = witnesslab(&["verify", "ew", "--in", path_str(&swap), "--dims", "2", "2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["verdict"], "confirmed");

    let id = dir.path().join("identity.json");
    std::fs::write(&id, serde_json::to_string(&HermitianOperator::identity(4)).unwrap()).unwrap();
    let o = witnesslab(&["verify", "qw", "--in", path_str(&id), "--alg", "2,2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["verdict"], "refuted");

    let bell = dir.path().join("bell.json");
    assert_eq!(code(&witnesslab(&["construct", "bell", "--out", path_str(&bell)])), 0);
    let o = witnesslab(&["verify", "both", "--in", path_str(&bell), "--dims", "2", "2"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["ew"]["verdict"], "confirmed");
    assert_eq!(v["qw"]["verdict"], "confirmed");
    assert_eq!(v["implication_holds"], true);
}

#[test]
fn verify_round_trip_matches_in_memory() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("s.json");
    assert_eq!(
        code(&witnesslab(&["construct", "shifted-swap", "--xi", "0.3", "--phi", "1.1", "--out", path_str(&path)])),
        0
    );
    let op: HermitianOperator = serde_json::from_value(read_json(&path)).unwrap();

    let o = witnesslab(&["verify", "ew", "--in", path_str(&path), "--d", "2", "--seed", "7", "--restarts", "5"]);
    assert_eq!(code(&o), 0);
    let opts = EwOptions { restarts: 5, seed: 7, ..EwOptions::default() };
    let mem = check_entanglement_witness(&op, 2, 2, &opts).unwrap();
    assert_eq!(stdout_json(&o), serde_json::to_value(&mem).unwrap());

    let o = witnesslab(&["verify", "qw", "--in", path_str(&path), "--dims", "2", "2"]);
    let mem = check_quantumness_witness(&op, &BipartiteAlgebra::full(2, 2).unwrap()).unwrap();
    assert_eq!(stdout_json(&o), serde_json::to_value(&mem).unwrap());
}

#[test]
fn verify_reads_construct_bundles() {
    let dir = TempDir::new().unwrap();
    let bundle = dir.path().join("bundle.json");
    let o = witnesslab(&["construct", "swap", "--d", "2"]);
    std::fs::write(&bundle, &o.stdout).unwrap();
    let o = witnesslab(&["verify", "ew", "--in", path_str(&bundle), "--d", "2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["verdict"], "confirmed");
}

#[test]
fn verify_rejects_malformed_input() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("garbage.json", "not json"),
        ("short.json", r#"{"dim":2,"re":[1,0,0],"im":[0,0,0]}"#),
        ("nonherm.json", r#"{"dim":2,"re":[0,1,0,0],"im":[0,0,0,0]}"#),
        ("empty.json", ""),
    ];
    for (name, body) in cases {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        let o = witnesslab(&["verify", "ew", "--in", path_str(&p), "--dims", "1", "2"]);
        assert_eq!(code(&o), 2, "{name}");
        no_panic(&o);
    }
    let swap = dir.path().join("swap.json");
    std::fs::write(&swap, serde_json::to_string(&swap_operator(2).unwrap()).unwrap()).unwrap();
    for args in [
        &["verify", "ew", "--in", path_str(&swap), "--dims", "2", "3"][..],
        &["verify", "qw", "--in", path_str(&swap), "--alg", "1,1;1,1"],
        &["verify", "qw", "--in", path_str(&swap), "--alg", "2;x"],
        &["verify", "qw", "--in", path_str(&swap)],
        &["verify", "ew", "--in", path_str(&swap), "--d", "2", "--restarts", "0"],
        &["verify", "ew", "--in", "/nonexistent/file.json", "--d", "2"],
    ] {
        let o = witnesslab(args);
        assert_eq!(code(&o), 2, "{args:?}");
        no_panic(&o);
    }
}

#[test]
fn chi_threshold_scan_csv() {
    let o = witnesslab(&["scan", "chi-threshold", "--steps", "2000"]);
    assert_eq!(code(&o), 0);
    let (header, rows) = read_csv(&o.stdout);
    assert_eq!(header, ["re_ab", "exp_S", "exp_EBell"]);
    assert_eq!(rows.len(), 2000);
    let parsed: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|x| x.parse().unwrap()).collect()).collect();
    let near = |target: f64| {
        parsed.iter().min_by(|a, b| (a[0] - target).abs().partial_cmp(&(b[0] - target).abs()).unwrap()).unwrap()
    };
    let r = near(-0.3);
    assert!(r[1] < 0.0 && r[2] < 0.0);
    let r = near(-0.1);
    assert!(r[1] < 0.0 && r[2] > 0.0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("crossing exp_EBell"));
}

#[test]
fn other_scans_csv() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("fig1.csv");
    assert_eq!(code(&witnesslab(&["scan", "fig1", "--steps", "4", "--out", path_str(&out)])), 0);
    let (header, rows) = read_csv(std::fs::read_to_string(&out).unwrap().as_bytes());
    assert_eq!(header, ["u", "v", "bound", "min_ratio"]);
    assert_eq!(rows.len(), 16);
    let corner = rows.iter().find(|r| r[0] == "1" && r[1] == "1").unwrap();
    assert_eq!(corner[2], "1");
    let half = rows.iter().find(|r| r[0] == "0.5" && r[1] == "0.5").unwrap();
    assert_eq!((half[2].as_str(), half[3].as_str()), ("-8", ""));

    let o = witnesslab(&["scan", "ratio-theta", "--steps", "200"]);
    let (header, rows) = read_csv(&o.stdout);
    assert_eq!(header, ["theta", "lambda_plus", "lambda_minus", "ratio", "ratio_formula"]);
    for r in &rows {
        let (ratio, formula): (f64, f64) = (r[3].parse().unwrap(), r[4].parse().unwrap());
        assert!((ratio - formula).abs() < 1e-10);
    }

    let o = witnesslab(&["scan", "xi-sweep", "--steps", "9", "--d", "3"]);
    let (header, rows) = read_csv(&o.stdout);
    assert_eq!(header, ["xi", "residual", "min_eig_X", "min_eig_Y", "min_eig_shifted"]);
    assert_eq!(rows.len(), 9);

    for args in [
        &["scan", "fig1", "--steps", "1"][..],
        &["scan", "ratio-theta", "--steps", "0"],
        &["scan", "xi-sweep", "--d", "1"],
    ] {
        let o = witnesslab(args);
        assert_eq!(code(&o), 2, "{args:?}");
        no_panic(&o);
    }
}

#[test]
fn probe_examples() {
    let o = witnesslab(&["probe", "theorem1", "--alg", "1,1;1,1", "--trials", "10000"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["violations"], 0);
    assert_eq!(v["commutative"], true);

    let o = witnesslab(&["probe", "theorem1", "--alg", "2;2"]);
    assert_eq!(code(&o), 0);
    assert!(stdout_json(&o)["witness_pair"]["min_eigenvalue"].as_f64().unwrap() < 0.0);

    let o = witnesslab(&["probe", "lemma", "--alg", "2;2", "--trials", "10000"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["violations"], 0);
    assert!(v["counterexample"]["expectation"].as_f64().unwrap() < 0.0);

    for args in [
        &["probe", "lemma", "--alg", "2;;"][..],
        &["probe", "theorem1", "--alg", "0;1"],
        &["probe", "lemma", "--alg", "2", "--trials", "0"],
    ] {
        let o = witnesslab(args);
        assert_eq!(code(&o), 2, "{args:?}");
        no_panic(&o);
    }
}

#[test]
fn seed_comes_from_environment() {
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_witnesslab"));
        c.args(["probe", "lemma", "--alg", "1,1", "--trials", "3"]).args(extra);
        match env {
            Some(s) => c.env("WITNESSLAB_SEED", s),
            None => c.env_remove("WITNESSLAB_SEED"),
        };
        let o = c.output().unwrap();
        (code(&o), if o.stdout.is_empty() { Value::Null } else { stdout_json(&o) })
    };
    assert_eq!(run(None, &[]).1["seed"], 42);
    assert_eq!(run(Some("9"), &[]).1["seed"], 9);
    assert_eq!(run(Some("9"), &["--seed", "5"]).1["seed"], 5);
    assert_eq!(run(Some("nine"), &[]).0, 2);
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&witnesslab(&["--help"])), 0);
    assert_eq!(code(&witnesslab(&["--version"])), 0);
    assert_eq!(code(&witnesslab(&[])), 2);
}
