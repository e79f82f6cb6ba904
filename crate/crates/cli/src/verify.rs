//! Self-checks run by `rotc verify`. Each check prints one table row as soon
//! as it finishes; the first failing check names the exit error.

use std::time::Instant;

use rotc::minimizer::{perturb, random_init};
use rotc::sweep::{execute, fit_rate};
use rotc::townes::{compute_constants, solve_townes};
use rotc::{Field, Functional, Grid2D, Minimizer, Quantity, SolverConfig, TownesConstants};

use crate::config::default_plan;
use crate::error::{CliError, CliResult};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

pub const POHOZAEV_TOL: f64 = 1e-5;
pub const A_STAR_REFINEMENT_TOL: f64 = 1e-6;
pub const LANDAU_TOL: f64 = 1e-4;
pub const DEFICIT_FLOOR: f64 = -1e-6;
pub const FORM_TOL: f64 = 1e-9;
pub const GRADIENT_TOL: f64 = 1e-5;
pub const TRANSLATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyOptions {
    pub quick: bool,
    pub a_star_override: Option<f64>,
}

struct Check {
    name: &'static str,
    value: f64,
    target: String,
    tolerance: String,
    pass: bool,
}

struct Table {
    first_failure: Option<&'static str>,
    count: usize,
}

impl Table {
    fn new() -> Self {
        println!("{:<22} {:>14} {:>14} {:>12}  status", "check", "value", "target", "tolerance");
        Self { first_failure: None, count: 0 }
    }

    fn push(&mut self, check: Check) {
        println!(
            "{:<22} {:>14.6e} {:>14} {:>12}  {}",
            check.name,
            check.value,
            check.target,
            check.tolerance,
            if check.pass { "pass" } else { "FAIL" }
        );
        self.count += 1;
        if !check.pass && self.first_failure.is_none() {
            self.first_failure = Some(check.name);
        }
    }

    fn within(&mut self, name: &'static str, value: f64, target: f64, tol: f64) {
        self.push(Check {
            name,
            value,
            target: format!("{target}"),
            tolerance: format!("{tol:.0e}"),
            pass: (value - target).abs() <= tol,
        });
    }

    fn below(&mut self, name: &'static str, value: f64, tol: f64) {
        self.push(Check { name, value, target: "0".into(), tolerance: format!("{tol:.0e}"), pass: value <= tol });
    }

    fn at_least(&mut self, name: &'static str, value: f64, floor: f64) {
        self.push(Check { name, value, target: format!(">= {floor:.0e}"), tolerance: "-".into(), pass: value >= floor });
    }
}

/// Smooth, localized, complex test fields.
fn random_fields(grid: &Grid2D, count: usize) -> Vec<Field> {
    (0..count as u64).map(|s| perturb(&random_init(grid, 1000 + s), 0.5, 2000 + s)).collect()
}

pub fn run(opts: VerifyOptions) -> CliResult<()> {
    let started = Instant::now();
    let mut table = Table::new();
    let outcome = run_checks(&mut table, opts);
    println!("{} checks in {:.1} s", table.count, started.elapsed().as_secs_f64());
    match (table.first_failure, outcome) {
        (Some(name), _) => Err(CliError::Check(name.to_string())),
        (None, result) => result,
    }
}

fn run_checks(table: &mut Table, opts: VerifyOptions) -> CliResult<()> {

    let profile = solve_townes(1e-12, 20.0, 1e-4)?;
    let computed = compute_constants(&profile)?;
    let constants = TownesConstants { a_star: opts.a_star_override.unwrap_or(computed.a_star), ..computed };
    let (r_grad, r_quartic) = constants.pohozaev_residuals();
    table.below("pohozaev", r_grad.max(r_quartic), POHOZAEV_TOL);

    let fine = compute_constants(&solve_townes(1e-12, 20.0, 5e-5)?)?;
    table.below("a_star_refinement", rel(constants.a_star, fine.a_star), A_STAR_REFINEMENT_TOL);

    let functional = Functional::from_constants(&constants);
    let (landau_n, seeds) = if opts.quick { (128, 1) } else { (256, 3) };
    let landau_grid = Grid2D::new(landau_n, 8.0)?;
    let solver = Minimizer::new(functional, SolverConfig { recenter: true, momentum: 0.95, ..SolverConfig::default() });
    let mut worst = 2.0f64;
    for seed in 1..=seeds {
        let e = solver.minimize(1.0, 0.0, random_init(&landau_grid, seed))?.breakdown.total;
        if (e - 2.0).abs() > (worst - 2.0).abs() {
            worst = e;
        }
    }
    table.within("landau_energy", worst, 2.0, LANDAU_TOL);

    let grid = Grid2D::new(128, 8.0)?;
    let fields = random_fields(&grid, if opts.quick { 10 } else { 100 });
    let min_of = |f: &dyn Fn(&Field) -> f64| fields.iter().map(f).fold(f64::INFINITY, f64::min);
    table.at_least("gn_deficit", min_of(&|f| functional.gn_deficit(f)), DEFICIT_FLOOR);
    table.at_least("magnetic_gn_deficit", min_of(&|f| functional.magnetic_gn_deficit(f)), DEFICIT_FLOOR);
    table.at_least("diamagnetic_gap", min_of(&|f| functional.diamagnetic_gap(f)), DEFICIT_FLOOR);

    let a = 0.7 * constants.a_star;
    let omegas = [0.0, 0.35, 0.8, 1.0];
    let mut forms = 0.0f64;
    let mut split = 0.0f64;
    for f in &fields {
        for &w in &omegas {
            let e = functional.energy(f, w, a).total;
            forms = forms.max(rel(functional.energy_magnetic_form(f, w, a), e));
            let convex = w * functional.energy(f, 1.0, a).total + (1.0 - w) * functional.energy(f, 0.0, a).total;
            split = split.max(rel(convex, e));
        }
    }
    table.below("energy_forms", forms, FORM_TOL);
    table.below("convex_split", split, FORM_TOL);

    let phi = &fields[0];
    let t = 1e-4;
    let mut grad_err = 0.0f64;
    for h in fields.iter().skip(1).take(10) {
        let g = functional.energy_gradient(phi, 0.6, a);
        let analytic = 2.0 * g.inner(h).re;
        let mut plus = phi.clone();
        plus.add_scaled(t.into(), h);
        let mut minus = phi.clone();
        minus.add_scaled((-t).into(), h);
        let fd = (functional.energy(&plus, 0.6, a).total - functional.energy(&minus, 0.6, a).total) / (2.0 * t);
        grad_err = grad_err.max(rel(fd, analytic));
    }
    table.below("gradient_fd", grad_err, GRADIENT_TOL);

    let mut shift = 0.0f64;
    for (f, y) in fields.iter().zip([[0.3, -0.2], [-0.45, 0.1], [0.05, 0.5]]) {
        let moved = f.magnetic_translate(y)?;
        shift = shift.max(rel(functional.energy(&moved, 1.0, a).total, functional.energy(f, 1.0, a).total));
    }
    table.below("magnetic_translation", shift, TRANSLATION_TOL);

    if !opts.quick {
        let plan = default_plan();
        let outcome = execute(&plan, &profile, &constants)?;
        outcome.check()?;
        let reports = outcome.reports();
        let last = reports.last().expect("non-empty sweep");
        let energy = fit_rate(&reports, Quantity::Energy, constants.a_star)?;
        let eps = fit_rate(&reports, Quantity::Eps, constants.a_star)?;
        table.within("energy_exponent", energy.exponent, 0.5, 0.05);
        table.below("energy_ratio_limit", rel(last.energy_ratio, constants.energy_ratio_limit()), 0.03);
        table.within("eps_exponent", eps.exponent, 0.25, 0.05);
        table.below("beta_limit", rel(last.beta, constants.beta_limit()), 0.05);
        table.within("multiplier_limit", last.eps2_mu, -1.0, 0.05);
        table.below("profile_l2_distance", last.l2_dist_q0, 0.05);
    }
    Ok(())
}
