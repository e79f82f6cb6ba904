//! Parameter sweeps toward the critical coupling: grid selection per point,
//! warm-started solves, collapse reports, rate fits and file output.

mod fit;
mod output;
mod plot;

use std::thread;

use serde::{Deserialize, Serialize};

use crate::collapse::{CollapseAnalyzer, CollapseReport};
use crate::error::{Error, Result};
use crate::field::{Field, Grid2D};
use crate::functional::Functional;
use crate::minimizer::{default_init, dilate_onto, perturb, Minimizer, SolveResult, SolverConfig};
use crate::townes::{RadialProfile, TownesConstants};

pub use fit::{fit_rate, upper_bound_curve, Quantity, RateFit};
pub use output::{write_outputs, REPORT_COLUMNS};
pub use plot::loglog_svg;

/// Fraction of failed points above which a sweep fails as a whole.
pub const MAX_FAILURE_FRACTION: f64 = 0.2;
/// Relative size of the seeded perturbation applied to cold starts.
pub const COLD_START_PERTURBATION: f64 = 1e-3;
/// Step ceiling relative to the squared predicted blow-up length.
const STEP_PER_EPS2: f64 = 0.35;

/// Rule mapping a predicted blow-up length to a grid: spacing at most
/// `eps / points_per_eps`, half-width at least `max(min_extent,
/// extent_per_eps * eps)`. Each retry level multiplies both the extent and
/// the points per blow-up length by `level_growth`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridPolicy {
    pub points_per_eps: f64,
    pub extent_per_eps: f64,
    pub min_extent: f64,
    pub min_n: usize,
    pub max_n: usize,
    pub level_growth: f64,
}

impl Default for GridPolicy {
    fn default() -> Self {
        Self { points_per_eps: 8.0, extent_per_eps: 10.0, min_extent: 6.0, min_n: 128, max_n: 2048, level_growth: 1.5 }
    }
}

impl GridPolicy {
    pub fn validate(&self) -> Result<()> {
        let ok = self.points_per_eps > 0.0
            && self.extent_per_eps > 0.0
            && self.min_extent > 0.0
            && self.level_growth >= 1.0
            && self.min_n >= Grid2D::MIN_POINTS
            && self.min_n.is_power_of_two()
            && self.max_n.is_power_of_two()
            && self.max_n >= self.min_n;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid grid policy {self:?}")))
        }
    }

    /// `(n, extent)` for a predicted blow-up length at a retry level.
    pub fn resolve(&self, eps: f64, level: u32) -> Result<(usize, f64)> {
        if !(eps > 0.0) {
            return Err(Error::InvalidArgument(format!("predicted eps must be positive, got {eps}")));
        }
        let growth = self.level_growth.powi(level as i32);
        let extent = self.min_extent.max(self.extent_per_eps * eps) * growth;
        let spacing = eps / (self.points_per_eps * growth);
        let needed = (2.0 * extent / spacing).ceil() as usize;
        let n = needed.next_power_of_two().max(self.min_n);
        if n > self.max_n {
            return Err(Error::InvalidArgument(format!(
                "grid policy needs n = {n} > max_n = {} at eps = {eps:.4}",
                self.max_n
            )));
        }
        Ok((n, extent))
    }
}

/// Sweep description. `a_schedule` holds `a/a*`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPlan {
    pub omega_schedule: Vec<f64>,
    pub a_schedule: Vec<f64>,
    #[serde(default)]
    pub grid_policy: GridPolicy,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub solver: SolverConfig,
    /// Keep converged fields in the outcome (needed for snapshots).
    #[serde(default)]
    pub keep_fields: bool,
}

fn default_workers() -> usize {
    1
}

impl SweepPlan {
    pub fn new(omega_schedule: Vec<f64>, a_schedule: Vec<f64>) -> Self {
        Self {
            omega_schedule,
            a_schedule,
            grid_policy: GridPolicy::default(),
            workers: 1,
            seed: 0,
            solver: sweep_solver_defaults(),
            keep_fields: false,
        }
    }

    /// Joint limit `Ω = 1 - c (a* - a)^κ`, clamped to `[0, 1]`.
    pub fn joint(a_schedule: Vec<f64>, a_star: f64, c: f64, kappa: f64) -> Self {
        let omegas = a_schedule.iter().map(|f| joint_omega(*f, a_star, c, kappa)).collect();
        Self::new(omegas, a_schedule)
    }

    pub fn len(&self) -> usize {
        self.omega_schedule.len().max(self.a_schedule.len())
    }

    pub fn is_empty(&self) -> bool {
        self.omega_schedule.is_empty() || self.a_schedule.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let (no, na) = (self.omega_schedule.len(), self.a_schedule.len());
        if no == 0 || na == 0 {
            return Err(Error::InvalidArgument("schedules must be non-empty".into()));
        }
        if no != na && no != 1 && na != 1 {
            return Err(Error::InvalidArgument(format!(
                "schedules must have equal length or one must be a singleton ({no} vs {na})"
            )));
        }
        if let Some(w) = self.omega_schedule.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(Error::InvalidArgument(format!("omega must lie in [0, 1], got {w}")));
        }
        if let Some(f) = self.a_schedule.iter().find(|f| !(**f >= 0.0 && **f < 1.0)) {
            return Err(Error::InvalidArgument(format!("a must be below a* (a/a* in [0, 1)), got {f}")));
        }
        if self.workers == 0 {
            return Err(Error::InvalidArgument("workers must be at least 1".into()));
        }
        self.grid_policy.validate()?;
        self.solver.validate()
    }

    /// `(Ω, a/a*)` pairs in plan order after broadcasting.
    pub fn points(&self) -> Vec<(f64, f64)> {
        (0..self.len())
            .map(|i| {
                let w = self.omega_schedule[i.min(self.omega_schedule.len() - 1)];
                let f = self.a_schedule[i.min(self.a_schedule.len() - 1)];
                (w, f)
            })
            .collect()
    }
}

/// Solver settings used by sweeps unless a plan overrides them.
pub fn sweep_solver_defaults() -> SolverConfig {
    SolverConfig { momentum: 0.95, ..SolverConfig::default() }
}

/// `base` with the step capped at `0.35 ε̂²` for the predicted blow-up length
/// `ε̂`, and recentering switched on at `Ω = 1` when no pinning is set.
pub fn point_solver_config(base: &SolverConfig, constants: &TownesConstants, omega: f64, a: f64) -> SolverConfig {
    let eps = constants.predicted_eps(a);
    SolverConfig {
        step: base.step.min(STEP_PER_EPS2 * eps * eps),
        recenter: base.recenter || (omega == 1.0 && base.pin_strength == 0.0),
        ..*base
    }
}

/// `1 - c (a* - a)^κ` clamped to `[0, 1]`, with `a = a_frac · a*`.
pub fn joint_omega(a_frac: f64, a_star: f64, c: f64, kappa: f64) -> f64 {
    (1.0 - c * ((1.0 - a_frac) * a_star).powf(kappa)).clamp(0.0, 1.0)
}

/// Result for one plan point.
#[derive(Debug, Clone)]
pub struct PointOutcome {
    pub omega: f64,
    pub a: f64,
    pub report: Option<CollapseReport>,
    pub error: Option<String>,
    /// Retry level that produced the report.
    pub level: u32,
    pub field: Option<Field>,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub a_star: f64,
    pub points: Vec<PointOutcome>,
}

impl SweepOutcome {
    pub fn reports(&self) -> Vec<CollapseReport> {
        self.points.iter().filter_map(|p| p.report.clone()).collect()
    }

    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.report.is_none()).count()
    }

    /// Fails when more than 20% of the points have no report.
    pub fn check(&self) -> Result<()> {
        let failed = self.failures();
        if failed as f64 > MAX_FAILURE_FRACTION * self.points.len() as f64 {
            return Err(Error::SweepFailed { failed, total: self.points.len() });
        }
        Ok(())
    }
}

/// Worker count after applying the `ROTC_THREADS` cap.
pub fn effective_workers(requested: usize) -> usize {
    let cap = std::env::var("ROTC_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|&c| c > 0);
    match cap {
        Some(c) => requested.min(c).max(1),
        None => requested.max(1),
    }
}

/// Runs every plan point. Points are ordered by ascending `a` (then `Ω`) and
/// split into one contiguous segment per worker; within a segment each point
/// is warm-started from its predecessor, the first is started from the
/// soliton at its predicted scale. Results come back in plan order and do not
/// depend on scheduling.
pub fn run_sweep(plan: &SweepPlan, profile: &RadialProfile, constants: &TownesConstants) -> Result<SweepOutcome> {
    let outcome = execute(plan, profile, constants)?;
    outcome.check()?;
    Ok(outcome)
}

/// [`run_sweep`] without the failure-fraction check, so that partial results
/// can still be inspected or written.
pub fn execute(plan: &SweepPlan, profile: &RadialProfile, constants: &TownesConstants) -> Result<SweepOutcome> {
    plan.validate()?;
    let points = plan.points();
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| points[i].1.total_cmp(&points[j].1).then(points[i].0.total_cmp(&points[j].0)));

    let workers = effective_workers(plan.workers).min(order.len());
    let per = order.len().div_ceil(workers);
    let segments: Vec<Vec<usize>> = order.chunks(per).map(<[usize]>::to_vec).collect();
    let analyzer = CollapseAnalyzer::new(profile, constants);

    let mut results: Vec<Option<PointOutcome>> = vec![None; points.len()];
    thread::scope(|scope| {
        let handles: Vec<_> = segments
            .iter()
            .map(|segment| {
                let analyzer = &analyzer;
                let points = &points;
                scope.spawn(move || run_segment(plan, profile, constants, analyzer, points, segment))
            })
            .collect();
        for handle in handles {
            for (idx, outcome) in handle.join().expect("sweep worker panicked") {
                results[idx] = Some(outcome);
            }
        }
    });
    Ok(SweepOutcome { a_star: constants.a_star, points: results.into_iter().map(Option::unwrap).collect() })
}

fn run_segment(
    plan: &SweepPlan,
    profile: &RadialProfile,
    constants: &TownesConstants,
    analyzer: &CollapseAnalyzer,
    points: &[(f64, f64)],
    segment: &[usize],
) -> Vec<(usize, PointOutcome)> {
    let mut out = Vec::with_capacity(segment.len());
    let mut previous: Option<(f64, Field)> = None;
    for &idx in segment {
        let (omega, frac) = points[idx];
        let a = frac * constants.a_star;
        let seed = plan.seed.wrapping_add(idx as u64);
        let mut attempt = solve_point(plan, profile, constants, analyzer, omega, a, seed, 0, previous.as_ref());
        if attempt.is_err() {
            attempt = solve_point(plan, profile, constants, analyzer, omega, a, seed, 1, None);
        }
        let outcome = match attempt {
            Ok((report, field, level)) => {
                previous = Some((a, field.clone()));
                PointOutcome {
                    omega,
                    a,
                    report: Some(report),
                    error: None,
                    level,
                    field: plan.keep_fields.then_some(field),
                }
            }
            Err(e) => {
                previous = None;
                PointOutcome { omega, a, report: None, error: Some(e.to_string()), level: 1, field: None }
            }
        };
        out.push((idx, outcome));
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn solve_point(
    plan: &SweepPlan,
    profile: &RadialProfile,
    constants: &TownesConstants,
    analyzer: &CollapseAnalyzer,
    omega: f64,
    a: f64,
    seed: u64,
    level: u32,
    warm: Option<&(f64, Field)>,
) -> Result<(CollapseReport, Field, u32)> {
    let eps = constants.predicted_eps(a);
    let (n, extent) = plan.grid_policy.resolve(eps, level)?;
    let grid = Grid2D::new(n, extent)?;
    let init = match warm {
        Some((a_prev, field)) => {
            let s = ((constants.a_star - a_prev) / (constants.a_star - a)).powf(0.25);
            dilate_onto(field, &grid, s)
        }
        None => perturb(&default_init(profile, constants, &grid, a), COLD_START_PERTURBATION, seed),
    };
    let config = SolverConfig { seed, ..point_solver_config(&plan.solver, constants, omega, a) };
    let minimizer = Minimizer::new(Functional::from_constants(constants), config);
    let SolveResult { field, residual, iters, converged, .. } = minimizer.minimize(omega, a, init)?;
    let mut report = analyzer.analyze(&field, omega, a)?;
    report.residual = residual;
    report.iters = iters;
    report.converged = converged;
    Ok((report, field, level))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_policy_grids() {
        let p = GridPolicy::default();
        assert_eq!(p.resolve(0.54, 0).unwrap(), (256, 6.0));
        let (n, e) = p.resolve(0.17, 0).unwrap();
        assert_eq!((n, e), (1024, 6.0));
        let (n1, e1) = p.resolve(0.54, 1).unwrap();
        assert_eq!((n1, e1), (512, 9.0));
        assert!(p.resolve(0.01, 0).is_err());
        assert!(p.resolve(0.0, 0).is_err());
        // wide states get a wide box
        assert_eq!(p.resolve(1.0, 0).unwrap().1, 10.0);
    }

    #[test]
    fn plan_validation_and_broadcast() {
        let mut plan = SweepPlan::new(vec![1.0], vec![0.9, 0.96]);
        assert!(plan.validate().is_ok());
        assert_eq!(plan.points(), vec![(1.0, 0.9), (1.0, 0.96)]);
        plan.a_schedule = vec![0.9, 1.0];
        assert!(plan.validate().is_err());
        let plan = SweepPlan::new(vec![0.5, 0.6, 0.7], vec![0.9, 0.96]);
        assert!(plan.validate().is_err());
        let plan = SweepPlan::new(vec![1.1], vec![0.9]);
        assert!(plan.validate().is_err());
    }

    #[test]
    fn joint_schedule_clamps_at_zero() {
        let a_star = 11.7;
        assert_eq!(joint_omega(0.9, a_star, 1.0, 0.5), 0.0);
        let w = joint_omega(0.999, a_star, 1.0, 0.5);
        assert!((w - (1.0 - (0.001f64 * a_star).sqrt())).abs() < 1e-15);
        let plan = SweepPlan::joint(vec![0.99, 0.999], a_star, 1.0, 0.5);
        assert!(plan.omega_schedule[0] < plan.omega_schedule[1]);
    }

    #[test]
    fn thread_cap_from_environment() {
        // only the parsing rule; the variable itself is process-global
        assert!(effective_workers(0) >= 1);
    }
}
