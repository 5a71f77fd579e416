use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use useqd::ensembles::{read_ensemble, AnyEnsemble, Ensemble};

fn useqd(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_useqd"))
        .args(args)
        .current_dir(dir)
        .env_remove("USEQD_DIM_CAP")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn gen(dir: &Path, name: &str, spec: &[&str]) -> PathBuf {
    let mut args = vec!["gen"];
    args.extend_from_slice(spec);
    args.extend_from_slice(&["--out", name]);
    let o = useqd(dir, &args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    dir.join(name)
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn gen_near_orthogonal_auto_eps() {
    let dir = TempDir::new().unwrap();
    let p = gen(dir.path(), "e.json", &["near-orth", "--n", "4"]);
    let AnyEnsemble::Pure(e) = read_ensemble(&p).unwrap() else {
        panic!("expected a pure ensemble")
    };
    assert_eq!(e.len(), 4);
    assert_eq!(e.dim(), 5);
    // ε = 1/(2N²), pairwise overlap ε²
    let eps = 1.0 / 32.0;
    let c = useqd::ensembles::overlaps(&e).max_abs_overlap;
    assert!((c - eps * eps).abs() < 1e-15);
}

#[test]
fn orthogonal_pair_is_degenerate_not_an_error() {
    let dir = TempDir::new().unwrap();
    gen(dir.path(), "e.json", &["two-state", "--overlap", "0"]);
    let o = useqd(dir.path(), &["bounds", "--ensemble", "e.json"]);
    assert_eq!(code(&o), 0);
    let b = json(&dir.path().join("bounds.json"));
    assert_eq!(b["degenerate"], true);
    assert_eq!(b["closed_form_EL"].as_f64().unwrap(), 1.0);
}

#[test]
fn reports_are_byte_identical_across_threads() {
    let dir = TempDir::new().unwrap();
    gen(dir.path(), "e.json", &["random", "--n", "3", "--dim", "3", "--seed", "4"]);
    let base = ["simulate", "--ensemble", "e.json", "--trials", "20000", "--seed", "9"];
    let mut texts = Vec::new();
    for (threads, out) in [("1", "a.json"), ("4", "b.json")] {
        let mut args = base.to_vec();
        args.extend_from_slice(&["--threads", threads, "--out", out]);
        assert_eq!(code(&useqd(dir.path(), &args)), 0);
        texts.push(std::fs::read(dir.path().join(out)).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
    let r: serde_json::Value = serde_json::from_slice(&texts[0]).unwrap();
    assert_eq!(r["errors"], 0);
}

#[test]
fn simulate_two_state_matches_closed_form() {
    let dir = TempDir::new().unwrap();
    gen(dir.path(), "e.json", &["two-state", "--overlap", "0.5"]);
    let o = useqd(dir.path(), &["simulate", "--ensemble", "e.json", "--trials", "50000", "--k", "1"]);
    assert_eq!(code(&o), 0);
    let r = json(&dir.path().join("report.json"));
    let mean = r["mean_copies"].as_f64().unwrap();
    assert!((mean - 2.0).abs() < 0.03, "{mean}");
    let o = useqd(
        dir.path(),
        &["simulate", "--ensemble", "e.json", "--trials", "100", "--format", "csv", "--out", "r.csv"],
    );
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert!(csv.lines().count() >= 3);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    gen(d, "pair.json", &["two-state", "--overlap", "0.5"]);
    gen(d, "dep.json", &["random", "--n", "3", "--dim", "2", "--seed", "1"]);

    assert_eq!(code(&useqd(d, &["simulate", "--ensemble", "missing.json"])), 2);
    assert_eq!(code(&useqd(d, &["simulate", "--ensemble", "pair.json", "--trials", "0"])), 2);
    assert_eq!(code(&useqd(d, &["no-such-command"])), 2);
    // three vectors in ℂ² are dependent at k = 1
    assert_eq!(code(&useqd(d, &["strategy", "--ensemble", "dep.json", "--k", "1"])), 3);
    assert_eq!(code(&useqd(d, &["strategy", "--ensemble", "dep.json"])), 0);
    assert_eq!(
        code(&useqd(d, &["simulate", "--ensemble", "pair.json", "--k", "3", "--cap", "2", "--trials", "10"])),
        4
    );
    assert_eq!(code(&useqd(d, &["bounds", "--ensemble", "pair.json"])), 0);
    assert_eq!(code(&useqd(d, &["certify", "--ensemble", "dep.json", "--trials", "2000"])), 0);
    // overlap 0.1: the upper bound falls below one copy
    gen(d, "close.json", &["two-state", "--overlap", "0.1"]);
    assert_eq!(code(&useqd(d, &["bounds", "--ensemble", "close.json"])), 5);
}

#[test]
fn dimension_cap_from_environment() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    gen(d, "dep.json", &["random", "--n", "3", "--dim", "2", "--seed", "1"]);
    let o = Command::new(env!("CARGO_BIN_EXE_useqd"))
        .args(["strategy", "--ensemble", "dep.json"])
        .current_dir(d)
        .env("USEQD_DIM_CAP", "2")
        .output()
        .unwrap();
    assert_eq!(code(&o), 4);
}

#[test]
fn sweeps() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let o = useqd(d, &["sweep", "--axis", "n", "--values", "2,4,8,16", "--trials", "5000", "--out", "n.csv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(d.join("n.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), useqd::cli::SWEEP_HEADER);
    for row in lines {
        let mean: f64 = row.split(',').nth(5).unwrap().parse().unwrap();
        assert!(mean <= 3.0, "{row}");
    }

    let o = useqd(d, &["sweep", "--axis", "overlap", "--range", "0.1:0.9:0.1", "--trials", "2000", "--out", "o.csv"]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(d.join("o.csv")).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 9);
    for w in rows.windows(2) {
        assert!(w[1][2] > w[0][2]);
        assert!(w[1][4] > w[0][4]);
    }

    assert_eq!(code(&useqd(d, &["sweep", "--axis", "overlap", "--range", "0.9:0.1:0.1"])), 2);
    assert_eq!(code(&useqd(d, &["sweep", "--axis", "n", "--values", "1"])), 2);
}
