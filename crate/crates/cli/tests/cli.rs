use std::path::Path;
use std::process::{Command, Output};

use orderbound_cli::io::{read_grid, read_matrix_market, write_matrix_market, write_signal};
use orderbound::{ImageGrid, SparseMatrix};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_orderbound"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn deblur1d_writes_report_with_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "exp.toml",
        "scenario = \"deblur1d\"\nseed = 4\n[phantom]\nkind = \"steps1d\"\nshape = [60, 1]\n[solver]\nmax_iterations = 3000\ntrace_every = 500\n",
    );
    let out = dir.path().join("out");
    let o = run(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "7"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&out.join("report.json"));
    assert_eq!(report["config"]["seed"], 7);
    assert_eq!(report["config"]["blur"]["sigma"], 0.5);
    assert_eq!(report["complete"], true);
    let variants = report["variants"].as_array().unwrap();
    assert_eq!(variants.len(), 3);
    for v in variants {
        let recon = read_grid(Path::new(v["reconstruction"].as_str().unwrap())).unwrap();
        assert_eq!(recon.shape(), (60, 1));
        assert!(v["metrics"]["psnr"].as_f64().unwrap() > 0.0);
        let trace = std::fs::read_to_string(v["trace"].as_str().unwrap()).unwrap();
        assert!(trace.starts_with("iteration,objective,residual,max_violation\n"));
        assert_eq!(trace.lines().count(), 7);
    }
    assert!(variants[2]["in_feasible_set"].is_boolean());
    assert!(out.join("truth.csv").is_file() && out.join("blurred.csv").is_file());
}

#[test]
fn noiseless_exact_squares_are_recovered() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "exp.toml",
        r#"
scenario = "deblur2d"
variants = ["exact"]
[phantom]
kind = "squares"
shape = [32, 32]
[noise]
data_level = { absolute = 0.0 }
operator_level = 0.0
[solver]
max_iterations = 20000
"#,
    );
    let out = dir.path().join("out");
    let o = run(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&out.join("report.json"));
    let psnr = report["variants"][0]["metrics"]["psnr"].as_f64().unwrap();
    assert!(psnr >= 60.0, "{psnr}");
    assert!(out.join("recon_exact.pgm").is_file());
}

#[test]
fn sampler_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "set.toml",
        "scenario = \"feasible2d\"\nseed = 11\n[sampler]\nsamples = 300\nresolution = 8\nu1 = [0.0, 30.0]\nu2 = [0.0, 30.0]\n",
    );
    let csv = |name: &str| {
        let out = dir.path().join(name);
        let o = run(&["sample-set", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let report = json(&out.join("report.json"));
        assert_eq!(report["samples"], 300);
        assert!(report["in_ustarstar"].as_u64() <= report["in_u"].as_u64());
        assert_eq!(std::fs::read_to_string(out.join("grid.csv")).unwrap().lines().count(), 65);
        std::fs::read_to_string(out.join("samples.csv")).unwrap()
    };
    let a = csv("a");
    assert!(a.starts_with("u1,u2,in_U,in_Ustarstar\n"));
    assert_eq!(a, csv("b"));
}

fn tighten_inputs(dir: &Path, g: f64) -> [String; 4] {
    let lower = SparseMatrix::from_triplets(1, 2, [(0, 0, 0.1), (0, 1, 0.2)]).unwrap();
    let upper = SparseMatrix::from_triplets(1, 2, [(0, 0, 0.9), (0, 1, 0.8)]).unwrap();
    let paths = ["L.mtx", "U.mtx", "v.csv", "g.csv"].map(|n| dir.join(n));
    write_matrix_market(&paths[0], &lower).unwrap();
    write_matrix_market(&paths[1], &upper).unwrap();
    write_signal(&paths[2], &ImageGrid::from_signal(vec![1.0, 1.0]).unwrap()).unwrap();
    write_signal(&paths[3], &ImageGrid::from_signal(vec![g]).unwrap()).unwrap();
    paths.map(|p| p.to_str().unwrap().to_owned())
}

#[test]
fn tighten_writes_tightened_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let [l, u, v, g] = tighten_inputs(dir.path(), 0.5);
    let out = dir.path().join("t");
    let o = run(&["tighten", "--lower", &l, "--upper", &u, "--v", &v, "--g", &g, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    // a_1 ∈ [0.5 - 0.8, 0.5 - 0.2] ∩ [0.1, 0.9] = [0.1, 0.3], a_2 ∈ [0.2, 0.4]
    let lo = read_matrix_market(&out.join("tightened_lower.mtx")).unwrap().to_dense();
    let hi = read_matrix_market(&out.join("tightened_upper.mtx")).unwrap().to_dense();
    for (a, b) in lo.iter().zip([0.1, 0.2]).chain(hi.iter().zip([0.3, 0.4])) {
        assert!((a - b).abs() < 1e-12, "{a} {b}");
    }
    let report = json(&out.join("tighten_report.json"));
    assert_eq!(report["tightened_entries"], 2);
}

#[test]
fn infeasible_side_constraint_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let [l, u, v, g] = tighten_inputs(dir.path(), 5.0);
    let o = run(&["tighten", "--lower", &l, "--upper", &u, "--v", &v, "--g", &g, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn errors_exit_with_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["run", "--config", "/nonexistent.toml"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    let cfg = write(dir.path(), "bad.toml", "scenario = \"deblur1d\"\n[bounds]\nd = -1.0\nsupport_aware = true\n");
    assert_eq!(run(&["run", "--config", &cfg]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn metrics_of_identical_images() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("a.pgm");
    let grid = ImageGrid::new(16, 16, (0..256).map(|k| (k % 251) as f64).collect()).unwrap();
    std::fs::write(&img, orderbound_cli::io::encode_pgm(&grid)).unwrap();
    let o = run(&["metrics", "--image", img.to_str().unwrap(), "--reference", img.to_str().unwrap()]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["ssim"], 1.0);
    assert!(v["psnr"].is_null(), "infinite PSNR serialises as null");
}
