use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use rotc::collapse::CollapseAnalyzer;
use rotc::field::{read_snapshot, write_snapshot};
use rotc::minimizer::{default_init, random_init};
use rotc::sweep::{execute, point_solver_config, write_outputs};
use rotc::townes::{self, compute_constants, sample_q0_on_grid, solve_townes};
use rotc::{CollapseReport, EnergyBreakdown, Error, Field, Functional, Grid2D, Minimizer, Observables, SolveResult};
use serde::Serialize;
use serde_json::json;

use crate::config::{flatten, DiagnoseConfig, InitKind, MinimizeConfig, SweepConfig, TownesConfig};
use crate::error::{CliError, CliResult};

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

/// Prints to stdout; a closed pipe (e.g. `| head`) is not an error.
fn print_json<T: Serialize>(value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value)?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

pub fn townes(cfg: &TownesConfig) -> CliResult<()> {
    let profile = solve_townes(cfg.shoot_tol, cfg.r_max, cfg.spacing)?;
    let c = compute_constants(&profile)?;
    print_json(&json!({
        "a_star": c.a_star,
        "q0_center": c.q0_center,
        "x_moment": c.x_moment,
        "l4_norm4": c.l4_norm4,
        "grad_norm2": c.grad_norm2,
        "r_max": profile.r_max(),
        "spacing": profile.spacing(),
    }))?;
    if let Some(path) = &cfg.profile {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "r,Q")?;
        for (r, q) in profile.radii().iter().zip(profile.values()) {
            writeln!(out, "{r:.6},{q:.15e}")?;
        }
        out.flush()?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct MinimizeReport {
    omega: f64,
    a: f64,
    a_frac: f64,
    a_star: f64,
    n: usize,
    extent: f64,
    energy: EnergyBreakdown,
    mu: f64,
    residual: f64,
    iters: usize,
    converged: bool,
    observables: Observables,
    collapse: Option<CollapseReport>,
    collapse_error: Option<String>,
}

pub fn minimize(cfg: &MinimizeConfig) -> CliResult<()> {
    let (profile, constants) = townes::reference();
    let a = cfg.a_frac * constants.a_star;
    let grid = Grid2D::new(cfg.n, cfg.extent)?;
    let init = match cfg.init {
        InitKind::Auto => default_init(profile, constants, &grid, a),
        InitKind::Gaussian => Field::gaussian(&grid),
        InitKind::Soliton => sample_q0_on_grid(profile, &grid, [0.0, 0.0], 1.0 / constants.predicted_eps(a)),
        InitKind::Random => random_init(&grid, cfg.solver.seed),
    };
    let functional = Functional::from_constants(constants);
    let minimizer = Minimizer::new(functional, point_solver_config(&cfg.solver, constants, cfg.omega, a));
    let (result, failure) = match minimizer.minimize(cfg.omega, a, init) {
        Ok(r) => (r, None),
        Err(Error::NonConvergence(best)) => {
            let msg = Error::NonConvergence(best.clone()).to_string();
            (*best, Some(msg))
        }
        Err(e) => return Err(e.into()),
    };
    let SolveResult { field, breakdown, mu, residual, iters, converged, .. } = result;

    let analyzer = CollapseAnalyzer::new(profile, constants);
    let (collapse, collapse_error) = match analyzer.analyze(&field, cfg.omega, a) {
        Ok(mut r) => {
            r.residual = residual;
            r.iters = iters;
            r.converged = converged;
            (Some(r), None)
        }
        Err(e) => (None, Some(e.to_string())),
    };
    let report = MinimizeReport {
        omega: cfg.omega,
        a,
        a_frac: cfg.a_frac,
        a_star: constants.a_star,
        n: cfg.n,
        extent: cfg.extent,
        energy: breakdown,
        mu,
        residual,
        iters,
        converged,
        observables: field.observables(cfg.omega),
        collapse,
        collapse_error,
    };

    if let Some(path) = &cfg.out {
        let mut out = BufWriter::new(File::create(path)?);
        write_snapshot(&field, &mut out)?;
        out.flush()?;
    }
    if let Some(path) = &cfg.report {
        write_json(path, &report)?;
    }
    if let Some(path) = &cfg.density_slice {
        let mut out = BufWriter::new(File::create(path)?);
        field.write_density_slice(&mut out)?;
        out.flush()?;
    }
    print_json(&report)?;
    match failure {
        Some(msg) => Err(CliError::Numerical(msg)),
        None => Ok(()),
    }
}

pub fn diagnose(cfg: &DiagnoseConfig) -> CliResult<()> {
    let (profile, constants) = townes::reference();
    let path = cfg.field.as_deref().expect("validated");
    let (field, _) = read_snapshot(std::io::BufReader::new(File::open(path)?))?;
    let a = cfg.a_frac * constants.a_star;
    let functional = Functional::from_constants(constants);
    let mu = functional.lagrange_multiplier(&field, cfg.omega, a);
    let mut residual_field = functional.energy_gradient(&field, cfg.omega, a);
    residual_field.add_scaled((-mu).into(), &field);

    let mut report = CollapseAnalyzer::new(profile, constants).analyze(&field, cfg.omega, a)?;
    report.residual = residual_field.norm();
    report.converged = report.residual <= rotc::SolverConfig::default().grad_tol;
    if let Some(path) = &cfg.report {
        write_json(path, &report)?;
    }
    print_json(&report)
}

pub fn sweep(cfg: &SweepConfig, out_dir: &Path, verbose: bool) -> CliResult<()> {
    let (profile, constants) = townes::reference();
    let plan = cfg.resolved_plan(constants.a_star);
    plan.validate()?;
    fs::create_dir_all(out_dir)?;
    write_json(&out_dir.join("plan.json"), &flatten(&serde_json::to_value(&plan)?))?;
    if verbose {
        eprintln!("sweep: {} points, {} worker(s)", plan.len(), rotc::sweep::effective_workers(plan.workers));
    }

    let outcome = execute(&plan, profile, constants)?;
    write_outputs(out_dir, &outcome, constants)?;

    println!("{:>8} {:>8} {:>5} {:>6} {:>12} {:>10} {:>10}", "omega", "a/a*", "n", "iters", "energy_ratio", "eps2_mu", "l2_dist");
    for p in &outcome.points {
        match &p.report {
            Some(r) => println!(
                "{:>8.4} {:>8.4} {:>5} {:>6} {:>12.6} {:>10.6} {:>10.3e}",
                r.omega,
                r.a / constants.a_star,
                r.n,
                r.iters,
                r.energy_ratio,
                r.eps2_mu,
                r.l2_dist_q0
            ),
            None => println!(
                "{:>8.4} {:>8.4}  failed: {}",
                p.omega,
                p.a / constants.a_star,
                p.error.as_deref().unwrap_or("unknown error")
            ),
        }
    }
    println!("outputs written to {}", out_dir.display());
    outcome.check().map_err(CliError::from)
}
