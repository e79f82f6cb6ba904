use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rotc::field::read_snapshot;
use serde_json::Value;

fn rotc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rotc")).args(args).output().expect("run rotc")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn townes_emits_constants_and_profile() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("q.csv");
    let out = rotc(&["townes", "--profile", path(&csv)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = json(&out);
    for key in ["a_star", "q0_center", "x_moment", "l4_norm4", "grad_norm2", "r_max", "spacing"] {
        assert!(v[key].is_f64(), "missing {key}");
    }
    assert!((v["a_star"].as_f64().unwrap() - 11.700896499073984).abs() < 1e-9);
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r,Q"));
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert!((first[1] - 2.2062008646505546).abs() < 1e-9);
}

#[test]
fn rejects_supercritical_parameters() {
    let out = rotc(&["minimize", "--a-frac", "1.2"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("a must be below a*"), "{}", stderr(&out));

    let out = rotc(&["minimize", "--omega", "1.5"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("omega"), "{}", stderr(&out));

    let out = rotc(&["minimize", "--no-such-flag"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn config_file_keys_are_checked_and_overridden() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"solver.max_iter": 10}"#).unwrap();
    let out = rotc(&["minimize", "--config", path(&cfg)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("solver.max_iter"), "{}", stderr(&out));

    fs::write(&cfg, r#"{"omega": 1.0, "a_frac": 1.5, "n": 64, "extent": 8.0, "init": "gaussian"}"#).unwrap();
    let out = rotc(&["minimize", "--config", path(&cfg), "--a-frac", "0.0"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["a_frac"], 0.0);
    assert_eq!(v["n"], 64);
    // the Gaussian is the exact minimizer: no iterations needed
    assert_eq!(v["iters"], 0);
    assert!((v["energy"]["total"].as_f64().unwrap() - 2.0).abs() < 1e-8);
}

#[test]
fn minimize_then_diagnose() {
    let dir = tempfile::tempdir().unwrap();
    let field = dir.path().join("phi.f2d1");
    let report = dir.path().join("report.json");
    let slice = dir.path().join("slice.csv");
    let out = rotc(&[
        "minimize", "--omega", "1", "--a-frac", "0.96", "--n", "256", "--extent", "6",
        "--out", path(&field), "--report", path(&report), "--density-slice", path(&slice),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v, json(&out));
    assert_eq!(v["converged"], true);
    assert!(v["collapse"]["l2_dist_q0"].as_f64().unwrap() < 0.05);
    assert_eq!(fs::read_to_string(&slice).unwrap().lines().count(), 257);

    let (phi, flags) = read_snapshot(fs::File::open(&field).unwrap()).unwrap();
    assert_eq!(flags & rotc::field::FLAG_NORMALIZED, 1);
    assert_eq!(phi.grid().n(), 256);

    let out = rotc(&["diagnose", "--field", path(&field), "--omega", "1", "--a-frac", "0.96"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let d = json(&out);
    let c = &v["collapse"];
    for key in ["energy", "eps", "eps2_mu", "beta", "l2_dist_q0", "linf_dist_q0"] {
        let (x, y) = (d[key].as_f64().unwrap(), c[key].as_f64().unwrap());
        assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0), "{key}: {x} vs {y}");
    }
    assert!(d["residual"].as_f64().unwrap() < 1e-6);
}

#[test]
fn diagnose_needs_an_existing_field() {
    let out = rotc(&["diagnose", "--omega", "1"]);
    assert_eq!(code(&out), 2);
    let out = rotc(&["diagnose", "--field", "/nonexistent/phi.f2d1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn non_convergence_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let field = dir.path().join("best.f2d1");
    let out = rotc(&["minimize", "--a-frac", "0.99", "--n", "128", "--extent", "6", "--max-iters", "3", "--out", path(&field)]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("no convergence"), "{}", stderr(&out));
    // the best iterate is still written
    assert_eq!(json(&out)["converged"], false);
    assert!(field.is_file());
}

#[test]
fn verify_quick_passes_and_detects_a_corrupted_constant() {
    let out = rotc(&["verify", "--quick"]);
    assert_eq!(code(&out), 0, "{}\n{}", String::from_utf8_lossy(&out.stdout), stderr(&out));
    let table = String::from_utf8_lossy(&out.stdout);
    for name in ["pohozaev", "landau_energy", "gn_deficit", "gradient_fd", "magnetic_translation"] {
        assert!(table.contains(name), "{table}");
    }

    let out = rotc(&["verify", "--quick", "--a-star-override", "11.6"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("pohozaev"), "{}", stderr(&out));
}

fn run_sweep(dir: &Path, plan: &Path, extra: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rotc"));
    cmd.args(["sweep", "--plan", path(plan), "--out", path(dir)]).args(extra);
    match threads {
        Some(t) => cmd.env("ROTC_THREADS", t),
        None => cmd.env_remove("ROTC_THREADS"),
    };
    cmd.output().unwrap()
}

#[test]
fn sweep_writes_outputs_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    fs::write(&plan, r#"{"omega_schedule": [1.0], "a_schedule": [0.96, 0.98], "seed": 7}"#).unwrap();

    let a = dir.path().join("a");
    let out = run_sweep(&a, &plan, &["--keep-fields"], None);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(a.join("reports.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(rotc::sweep::REPORT_COLUMNS));
    assert_eq!(lines.count(), 2);
    for file in ["fits.json", "energy_ratio.svg", "eps.svg", "eps2_mu.svg", "plan.json", "point_000.f2d1"] {
        assert!(a.join(file).is_file(), "missing {file}");
    }
    // two points are too few for a rate fit; the reason is recorded
    let fits: Value = serde_json::from_str(&fs::read_to_string(a.join("fits.json")).unwrap()).unwrap();
    assert!(fits["fit_errors"]["energy"].is_string(), "{fits}");

    // a worker request above the thread cap gives the single-worker result
    let b = dir.path().join("b");
    let out = run_sweep(&b, &plan, &["--workers", "2"], Some("1"));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(csv, fs::read_to_string(b.join("reports.csv")).unwrap());
}

#[test]
fn sweep_plan_validation() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    fs::write(&plan, r#"{"a_schedule": [0.9, 1.0]}"#).unwrap();
    let out = run_sweep(dir.path(), &plan, &[], None);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("a must be below a*"), "{}", stderr(&out));

    fs::write(&plan, r#"{"grid_policy.points_per_eps": 8, "grid_policy.bogus": 1}"#).unwrap();
    let out = run_sweep(dir.path(), &plan, &[], None);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("grid_policy.bogus"), "{}", stderr(&out));
}
