use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_greedy-geometry"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn gen(dir: &Path) {
    let out = run_in(
        dir,
        &["gen", "--n", "12", "--d", "20", "--sparsity", "3", "--seed", "4", "--out-dir", "data"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn gen_writes_instance_and_meta() {
    let tmp = tempfile::tempdir().unwrap();
    gen(tmp.path());
    for f in ["P.csv", "y.csv", "alpha_star.csv", "meta.json"] {
        assert!(tmp.path().join("data").join(f).exists(), "{f}");
    }
    let p = std::fs::read_to_string(tmp.path().join("data/P.csv")).unwrap();
    assert_eq!(p.lines().count(), 12);
    assert_eq!(p.lines().next().unwrap().split(',').count(), 20);
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("data/meta.json")).unwrap()).unwrap();
    assert_eq!(meta["flags"]["seed"], 4);
    assert_eq!(meta["derived"]["support"].as_array().unwrap().len(), 3);
}

#[test]
fn seed_is_printed() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(
        tmp.path(),
        &["gen", "--n", "5", "--d", "3", "--sparsity", "1", "--seed", "77", "--out-dir", "x"],
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("seed: 77"));
}

#[test]
fn solve_zero_iterations() {
    let tmp = tempfile::tempdir().unwrap();
    gen(tmp.path());
    let out = run_in(
        tmp.path(),
        &["solve", "--p", "data/P.csv", "--y", "data/y.csv", "--max-iter", "0", "--trace", "t.csv"],
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(tmp.path().join("t.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "iter,obj,gap,grad_inf,support,wall_ns");
    assert!(tmp.path().join("t.csv.meta.json").exists());
}

#[test]
fn solve_is_reproducible_without_timing() {
    let tmp = tempfile::tempdir().unwrap();
    gen(tmp.path());
    let mut traces = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out = run_in(
            tmp.path(),
            &[
                "solve", "--p", "data/P.csv", "--y", "data/y.csv", "--lambda", "0.05", "--method", "proxcd_gs",
                "--max-iter", "200", "--reference", "--no-timing", "--trace", name,
            ],
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        traces.push(std::fs::read(tmp.path().join(name)).unwrap());
    }
    assert_eq!(traces[0], traces[1]);
    let text = String::from_utf8(traces.remove(0)).unwrap();
    let last = text.lines().last().unwrap();
    let gap: f64 = last.split(',').nth(2).unwrap().parse().unwrap();
    assert!(gap <= 1e-10 || text.lines().count() == 202);
}

#[test]
fn missing_input_is_io_error_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["estimate", "--p", "missing.csv", "--out", "g.json"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!tmp.path().join("g.json").exists());
    assert!(std::fs::read_dir(tmp.path()).unwrap().next().is_none());
}

#[test]
fn malformed_csv_is_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("P.csv"), "1,2\n3,x\n").unwrap();
    let out = run_in(tmp.path(), &["estimate", "--p", "P.csv", "--out", "g.json"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn usage_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run_in(tmp.path(), &["solve", "--bogus"]).status.code(), Some(1));
    assert_eq!(run_in(tmp.path(), &[]).status.code(), Some(1));
    gen(tmp.path());
    let out = run_in(
        tmp.path(),
        &["solve", "--p", "data/P.csv", "--y", "data/y.csv", "--method", "newton", "--trace", "t.csv"],
    );
    assert_eq!(out.status.code(), Some(1));
    let out = run_in(
        tmp.path(),
        &["solve", "--p", "data/P.csv", "--y", "data/y.csv", "--rho", "1.5", "--trace", "t.csv"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(run_in(tmp.path(), &["--help"]).status.code(), Some(0));
    assert_eq!(run_in(tmp.path(), &["--version"]).status.code(), Some(0));
}

#[test]
fn estimate_report_keys() {
    let tmp = tempfile::tempdir().unwrap();
    gen(tmp.path());
    let out = run_in(
        tmp.path(),
        &["estimate", "--p", "data/P.csv", "--y", "data/y.csv", "--lambda", "0.1", "--sigma", "1", "--out", "g.json"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(tmp.path().join("g.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    assert_eq!(keys.len(), 23);
    assert_eq!(v["n"], 12);
    assert_eq!(v["lambda"], 0.1);
    assert!(v["conc_L1"].as_f64().is_some());
}

#[test]
fn epscurve_writes_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(
        tmp.path(),
        &[
            "epscurve", "--sweep", "dim", "--values", "5,30", "--n", "15", "--sparsity", "3", "--method", "gd",
            "--cap", "300", "--seed", "2", "--out", "e.csv",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(tmp.path().join("e.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "sweep,epsilon,k_eps");
    assert_eq!(text.lines().count(), 1 + 2 * 11);

    let out = run_in(
        tmp.path(),
        &["epscurve", "--sweep", "lambda", "--values", "0.1", "--n", "10", "--sparsity", "2", "--out", "f.csv"],
    );
    assert_eq!(out.status.code(), Some(1));
}
