use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn reflectlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reflectlab")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = reflectlab(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn json(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&read(dir, name)).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect()
}

fn dir_arg(d: &TempDir) -> &str {
    d.path().to_str().unwrap()
}

#[test]
fn lattice_invariant_table_for_uniform_one_two() {
    let d = TempDir::new().unwrap();
    ok(&[
        "analyze",
        "lattice-invariant",
        "--law",
        "lat:pmf(d=1;1:0.5,2:0.5)",
        "--x0",
        "0",
        "--seed",
        "1",
        "-o",
        dir_arg(&d),
    ]);
    let csv = read(d.path(), "invariant.csv");
    assert!(csv.starts_with("state,nu,rho,nu_residual,rho_residual\n"));
    assert_eq!(
        rows(&csv),
        vec![vec![0.0, 0.5, 0.5, 0.0, 0.0], vec![1.0, 0.75, 0.625, 0.0, 0.0], vec![2.0, 0.25, 0.25, 0.0, 0.0]]
    );
    let manifest = json(d.path(), "manifest.json");
    assert_eq!(manifest["config"]["seed"], 1);
    assert_eq!(manifest["version"], env!("CARGO_PKG_VERSION"));
    assert!(manifest["wall_clock_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn walk_is_byte_identical_under_the_same_seed() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for d in [&a, &b] {
        ok(&[
            "simulate",
            "walk",
            "--law",
            "cont:exp(rate=1)",
            "--x0",
            "1",
            "--steps",
            "100",
            "--seed",
            "7",
            "-o",
            dir_arg(d),
        ]);
    }
    for name in ["path.csv", "reflections.csv"] {
        assert_eq!(read(a.path(), name), read(b.path(), name));
    }
    let path = rows(&read(a.path(), "path.csv"));
    assert_eq!(path.len(), 101);
    assert_eq!(path[0], vec![0.0, 1.0]);
    let c = TempDir::new().unwrap();
    ok(&[
        "simulate",
        "walk",
        "--law",
        "cont:exp(rate=1)",
        "--x0",
        "1",
        "--steps",
        "100",
        "--seed",
        "8",
        "-o",
        dir_arg(&c),
    ]);
    assert_ne!(read(a.path(), "path.csv"), read(c.path(), "path.csv"));
}

#[test]
fn classical_walk_writes_ladder_epochs() {
    let d = TempDir::new().unwrap();
    let args = [
        "simulate",
        "walk",
        "--law",
        "int:pmf(-1:0.5,1:0.5)",
        "--steps",
        "500",
        "--seed",
        "2",
        "--mode",
        "classical",
        "-o",
        dir_arg(&d),
    ];
    ok(&args);
    let ladder = read(d.path(), "ladder.csv");
    assert!(ladder.starts_with("k,epoch,height,increment\n"));
    for r in rows(&ladder) {
        assert!(r[3] >= 0.0);
    }
    assert!(!d.path().join("reflections.csv").exists());
}

#[test]
fn classify_alias_matches_analyze_classify() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    ok(&["classify", "--law", "lat:powerlaw(a=0.7)", "-o", dir_arg(&a)]);
    ok(&["analyze", "classify", "--law", "lat:powerlaw(a=0.7)", "-o", dir_arg(&b)]);
    let report = json(a.path(), "classification.json");
    assert_eq!(report["verdict"], "NullRecurrent");
    assert_eq!(report["quad_tail"]["status"], "finite");
    assert_eq!(report["mean"]["status"], "infinite");
    assert_eq!(read(a.path(), "classification.json"), read(b.path(), "classification.json"));
}

#[test]
fn tail_report_for_pareto_three_quarters() {
    let d = TempDir::new().unwrap();
    ok(&["analyze", "tail", "--law", "cont:pareto(alpha=0.75,scale=1)", "-o", dir_arg(&d)]);
    let tail = json(d.path(), "tail.json");
    assert_eq!(tail["status"], "finite");
    assert!((tail["value"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    let e = TempDir::new().unwrap();
    ok(&["analyze", "tail", "--law", "lat:powerlaw(a=0.4)", "-o", dir_arg(&e)]);
    assert_eq!(json(e.path(), "tail.json")["status"], "infinite");
}

#[test]
fn density_grid_columns() {
    let d = TempDir::new().unwrap();
    ok(&["analyze", "density", "--law", "cont:exp(rate=1)", "--x-max", "5", "--points", "12", "-o", dir_arg(&d)]);
    let csv = read(d.path(), "density.csv");
    assert!(csv.starts_with("x,nu_density,rho_density,quad_error\n"));
    let r = rows(&csv);
    assert_eq!(r.len(), 12);
    for row in r {
        assert!((row[1] - (-row[0]).exp()).abs() < 1e-12);
    }
}

#[test]
fn contraction_trace_and_pilot_in_manifest() {
    let d = TempDir::new().unwrap();
    ok(&[
        "contractivity",
        "trace",
        "--law",
        "cont:exp(rate=1)",
        "--x0",
        "0",
        "--y0",
        "1",
        "--steps",
        "2000",
        "--seed",
        "5",
        "-o",
        dir_arg(&d),
    ]);
    let csv = read(d.path(), "contraction.csv");
    assert!(csv.starts_with("n,D\n"));
    let r = rows(&csv);
    assert_eq!(r.len(), 2001);
    assert_eq!(r[0], vec![0.0, 1.0]);
    assert!(r.windows(2).all(|w| w[1][1] <= w[0][1]));
    let manifest = json(d.path(), "manifest.json");
    assert_eq!(manifest["contraction_pilot"]["level"], 1e-4);
    assert_eq!(manifest["contraction_pilot"]["law"], "cont:exp(rate=1)");
    assert_eq!(json(d.path(), "contraction.json")["monotonicity_violations"], 0);
}

#[test]
fn vote_schema_and_worker_independence() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for (d, w) in [(&a, "1"), (&b, "3")] {
        ok(&[
            "contractivity",
            "vote",
            "--law",
            "int:sympow(a=0.5)",
            "--steps",
            "2000",
            "--paths",
            "40",
            "--workers",
            w,
            "--seed",
            "11",
            "-o",
            dir_arg(d),
        ]);
    }
    assert_eq!(read(a.path(), "vote.json"), read(b.path(), "vote.json"));
    let v = json(a.path(), "vote.json");
    for key in ["paths", "n", "M", "escape_fraction", "verdict"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["paths"], 40);
}

#[test]
fn ensemble_identical_across_worker_counts() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for (d, w) in [(&a, "1"), (&b, "4")] {
        ok(&[
            "simulate",
            "ensemble",
            "--law",
            "lat:pmf(1:0.5,2:0.5)",
            "--steps",
            "3000",
            "--paths",
            "16",
            "--workers",
            w,
            "--x-max",
            "3",
            "--bins",
            "3",
            "--seed",
            "4",
            "-o",
            dir_arg(d),
        ]);
    }
    assert_eq!(read(a.path(), "ensemble.json"), read(b.path(), "ensemble.json"));
    let e = json(a.path(), "ensemble.json");
    let total: u64 = e["bins"].as_array().unwrap().iter().map(|b| b["count"].as_u64().unwrap()).sum();
    assert_eq!(total, 16 * 3000);
    for key in ["paths", "steps", "returns", "escape"] {
        assert!(e.get(key).is_some(), "{key}");
    }
}

#[test]
fn wiener_hopf_construct_and_verify() {
    let d = TempDir::new().unwrap();
    ok(&["wiener-hopf", "construct", "--law", "lat:pmf(0:1/2,1:1/2)", "-o", dir_arg(&d)]);
    let csv = read(d.path(), "wiener_hopf.csv");
    assert!(csv.starts_with("k,mu0,mu\n"));
    assert_eq!(rows(&csv), vec![vec![-1.0, 0.0, 0.5], vec![0.0, 0.5, 0.0], vec![1.0, 0.5, 0.5]]);
    let report = json(d.path(), "wiener_hopf.json");
    assert_eq!(report["exact"], true);
    assert_eq!(report["mu"][0]["exact"], "1/2");

    let v = TempDir::new().unwrap();
    ok(&[
        "wiener-hopf",
        "verify",
        "--law",
        "lat:pmf(0:1/2,1:1/2)",
        "--epochs",
        "4000",
        "--seed",
        "9",
        "-o",
        dir_arg(&v),
    ]);
    let tv = json(v.path(), "wiener_hopf_verify.json")["total_variation"].as_f64().unwrap();
    assert!(tv < 0.03, "{tv}");
    assert!(read(v.path(), "ladder_heights.csv").starts_with("k,mu0,empirical\n"));
}

#[test]
fn char_slope_report() {
    let d = TempDir::new().unwrap();
    ok(&["diagnose", "char-slope", "--law", "int:pmf(-1:0.5,1:0.5)", "-o", dir_arg(&d)]);
    let r = json(d.path(), "char_slope.json");
    assert!((r["slope"].as_f64().unwrap() - 2.0).abs() < 0.05);
    for key in ["slope", "margin", "verdict", "t_min", "t_max", "points"] {
        assert!(r.get(key).is_some(), "{key}");
    }
    assert_eq!(rows(&read(d.path(), "char_slope.csv")).len(), r["points"].as_u64().unwrap() as usize);
}

#[test]
fn stochastic_commands_require_a_seed() {
    let d = TempDir::new().unwrap();
    let out = reflectlab(&["simulate", "walk", "--law", "cont:exp(rate=1)", "--steps", "10", "-o", dir_arg(&d)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--seed"));
    assert_eq!(fs::read_dir(d.path()).unwrap().count(), 0);
}

#[test]
fn validation_errors_exit_two() {
    let d = TempDir::new().unwrap();
    let bad_law = reflectlab(&["analyze", "classify", "--law", "lat:pmf(1:0.5,2:0.7)", "-o", dir_arg(&d)]);
    assert_eq!(code(&bad_law), 2);
    assert!(!bad_law.stderr.is_empty());
    let wrong_kind = reflectlab(&["analyze", "density", "--law", "lat:pmf(1:0.5,2:0.5)", "-o", dir_arg(&d)]);
    assert_eq!(code(&wrong_kind), 2);
    let zero = reflectlab(&[
        "simulate",
        "walk",
        "--law",
        "cont:exp(rate=1)",
        "--steps",
        "0",
        "--seed",
        "1",
        "-o",
        dir_arg(&d),
    ]);
    assert_eq!(code(&zero), 2);
    let missing = reflectlab(&["analyze", "tail", "-o", dir_arg(&d)]);
    assert_eq!(code(&missing), 2);
    assert!(String::from_utf8_lossy(&missing.stderr).contains("--law"));
    assert_eq!(fs::read_dir(d.path()).unwrap().count(), 0);
}

#[test]
fn quadrature_failure_exits_three() {
    let d = TempDir::new().unwrap();
    let out = reflectlab(&[
        "analyze",
        "density",
        "--law",
        "cont:pareto(alpha=0.01,scale=1e-3)",
        "--x-max",
        "1e12",
        "--points",
        "20",
        "-o",
        dir_arg(&d),
    ]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("numeric failure"));
    assert_eq!(fs::read_dir(d.path()).unwrap().count(), 0);
}

#[test]
fn failed_runs_leave_existing_artifacts_untouched() {
    let d = TempDir::new().unwrap();
    ok(&["simulate", "walk", "--law", "cont:exp(rate=1)", "--steps", "20", "--seed", "1", "-o", dir_arg(&d)]);
    let before = read(d.path(), "path.csv");
    let out = reflectlab(&[
        "simulate",
        "walk",
        "--law",
        "cont:exp(rate=-1)",
        "--steps",
        "20",
        "--seed",
        "2",
        "-o",
        dir_arg(&d),
    ]);
    assert_eq!(code(&out), 2);
    assert_eq!(read(d.path(), "path.csv"), before);
    let names: Vec<String> =
        fs::read_dir(d.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    assert_eq!(names.len(), 3, "{names:?}");
}

#[test]
fn flags_override_the_config_file() {
    let d = TempDir::new().unwrap();
    let cfg = d.path().join("walk.toml");
    let out_dir = d.path().join("out");
    fs::write(
        &cfg,
        format!(
            "command = \"simulate walk\"\nlaw = \"lat:pmf(1:0.5,2:0.5)\"\nsteps = 50\nseed = 3\noutput_dir = \"{}\"\n",
            out_dir.display()
        ),
    )
    .unwrap();
    ok(&["simulate", "walk", "--config", cfg.to_str().unwrap(), "--steps", "7"]);
    assert_eq!(rows(&read(&out_dir, "path.csv")).len(), 8);
    let manifest = json(&out_dir, "manifest.json");
    assert_eq!(manifest["config"]["steps"], 7);
    assert_eq!(manifest["config"]["seed"], 3);

    let other = d.path().join("run");
    ok(&["run", "--config", cfg.to_str().unwrap(), "-o", other.to_str().unwrap()]);
    assert_eq!(rows(&read(&other, "path.csv")).len(), 51);
}

#[test]
fn config_errors_exit_two() {
    let d = TempDir::new().unwrap();
    let unknown = d.path().join("unknown.toml");
    fs::write(&unknown, "law = \"cont:exp(rate=1)\"\nsteps = 10\nseed = 1\nstep_size = 2\n").unwrap();
    let out = reflectlab(&["simulate", "walk", "--config", unknown.to_str().unwrap(), "-o", dir_arg(&d)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("step_size"));

    let mismatch = d.path().join("vote.toml");
    fs::write(&mismatch, "command = \"contractivity vote\"\nlaw = \"cont:exp(rate=1)\"\n").unwrap();
    let out = reflectlab(&["simulate", "walk", "--config", mismatch.to_str().unwrap(), "--steps", "5", "--seed", "1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn manifest_alone_reproduces_the_run() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    ok(&[
        "contractivity",
        "trace",
        "--law",
        "lat:pmf(1:1/3,2:2/3)",
        "--x0",
        "0",
        "--y0",
        "0.5",
        "--steps",
        "300",
        "--seed",
        "21",
        "-o",
        dir_arg(&a),
    ]);
    let manifest = a.path().join("manifest.json");
    ok(&["run", "--config", manifest.to_str().unwrap(), "-o", dir_arg(&b)]);
    for name in ["contraction.csv", "contraction.json"] {
        assert_eq!(read(a.path(), name), read(b.path(), name));
    }
    let (ma, mb) = (json(a.path(), "manifest.json"), json(b.path(), "manifest.json"));
    assert_eq!(ma["command"], mb["command"]);
    assert_eq!(ma["config"]["seed"], mb["config"]["seed"]);
}
