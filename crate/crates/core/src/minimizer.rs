//! Ground states on the unit L² sphere by a semi-implicit normalized gradient
//! flow: the Laplacian is treated implicitly in Fourier space, the trap by a
//! diagonal damping in real space, the remaining terms explicitly, and each
//! step is projected back onto the sphere.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, Grid2D, Interpolator, BOUNDARY_GUARD};
use crate::functional::{EnergyBreakdown, Functional};
use crate::townes::{sample_q0_on_grid, RadialProfile, TownesConstants};

/// Smallest step before the flow is declared stalled.
const MIN_STEP: f64 = 1e-14;
/// Boundary guard is checked every this many iterations.
const GUARD_EVERY: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Nominal pseudo-time step; halved on energy increase, regrown up to
    /// this value after successful steps.
    pub step: f64,
    pub max_iters: usize,
    /// Convergence threshold on `‖∇E(φ) - μφ‖`.
    pub grad_tol: f64,
    /// Energy increase tolerated at acceptance (roundoff slack).
    pub energy_tol: f64,
    /// Magnetically translate the density centroid back to the origin after
    /// every accepted step (energy-preserving only at `Ω = 1`).
    pub recenter: bool,
    /// Coefficient of an extra `|x|²` potential added to the flow.
    pub pin_strength: f64,
    /// Upper bound of the momentum coefficient; `0` gives the plain flow.
    /// Momentum is dropped whenever a step would raise the energy.
    pub momentum: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            step: 0.05,
            max_iters: 20_000,
            grad_tol: 1e-7,
            energy_tol: 1e-12,
            recenter: false,
            pin_strength: 0.0,
            momentum: 0.0,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) {
            return Err(Error::InvalidArgument(format!("step must be positive, got {}", self.step)));
        }
        if !(self.grad_tol > 0.0) {
            return Err(Error::InvalidArgument(format!("grad_tol must be positive, got {}", self.grad_tol)));
        }
        if !(self.pin_strength >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "pin_strength must be nonnegative, got {}",
                self.pin_strength
            )));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidArgument(format!("momentum must lie in [0, 1), got {}", self.momentum)));
        }
        if !(self.energy_tol >= 0.0) {
            return Err(Error::InvalidArgument("energy_tol must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub field: Field,
    pub breakdown: EnergyBreakdown,
    pub mu: f64,
    pub residual: f64,
    pub iters: usize,
    pub converged: bool,
    /// Energy after every accepted step, starting with the initial state.
    pub history: Vec<f64>,
}

/// Normalized gradient flow for one functional.
#[derive(Debug, Clone, Copy)]
pub struct Minimizer {
    functional: Functional,
    config: SolverConfig,
}

struct State {
    field: Field,
    breakdown: EnergyBreakdown,
    objective: f64,
    gradient: Field,
}

impl Minimizer {
    pub fn new(functional: Functional, config: SolverConfig) -> Self {
        Self { functional, config }
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    fn state(&self, field: Field, omega: f64, a: f64) -> State {
        let (breakdown, gradient) = self.functional.evaluate(&field, omega, a, 1.0 + self.config.pin_strength);
        // `evaluate` folds the pin into `total`; report the unpinned energy.
        let objective = breakdown.total;
        let breakdown = EnergyBreakdown {
            total: breakdown.total - self.config.pin_strength * breakdown.trap,
            ..breakdown
        };
        State { field, breakdown, objective, gradient }
    }

    /// Minimizes `E_{Ω,a}` starting from `init`.
    pub fn minimize(&self, omega: f64, a: f64, init: Field) -> Result<SolveResult> {
        let cfg = &self.config;
        cfg.validate()?;
        if !(0.0..=1.0).contains(&omega) {
            return Err(Error::InvalidArgument(format!("omega must lie in [0, 1], got {omega}")));
        }
        if !(a >= 0.0 && a < self.functional.a_star()) {
            return Err(Error::InvalidArgument(format!(
                "a must satisfy 0 <= a < a* = {}, got {a}",
                self.functional.a_star()
            )));
        }
        if omega == 1.0 && !cfg.recenter && cfg.pin_strength == 0.0 {
            return Err(Error::InvalidArgument(
                "at omega = 1 either recenter or pin_strength > 0 is required".into(),
            ));
        }
        if !init.is_normalized(1e-9) {
            return Err(Error::InvalidArgument(format!("init must be normalized, mass = {}", init.mass())));
        }
        init.check_boundary()?;

        let grid = init.grid().clone();
        let mut state = self.state(init, omega, a);
        let mut history = vec![state.breakdown.total];
        let mut tau = cfg.step;
        let mut iters = 0;
        let mut velocity: Option<Field> = None;
        let mut streak = 0usize;
        loop {
            let mu = state.field.inner(&state.gradient).re;
            let mut residual_field = state.gradient.clone();
            residual_field.add_scaled(Complex64::new(-mu, 0.0), &state.field);
            let residual = residual_field.norm();
            if residual <= cfg.grad_tol {
                return Ok(finish(state, mu, residual, iters, true, history));
            }
            if iters >= cfg.max_iters {
                let result = finish(state, mu, residual, iters, false, history);
                return Err(Error::NonConvergence(Box::new(result)));
            }

            let mut accepted = None;
            while tau >= MIN_STEP {
                let mut step = self.precondition(&residual_field, tau);
                if let Some(v) = &velocity {
                    let beta = (streak as f64 / (streak as f64 + 3.0)).min(cfg.momentum);
                    let along = state.field.inner(v).re;
                    step.add_scaled(Complex64::new(beta, 0.0), v);
                    step.add_scaled(Complex64::new(-beta * along, 0.0), &state.field);
                }
                let mut trial = state.field.clone();
                trial.add_scaled(Complex64::new(-1.0, 0.0), &step);
                trial.normalize();
                if cfg.recenter {
                    let c = trial.centroid();
                    if c[0].hypot(c[1]) > 1e-6 * grid.spacing() {
                        trial = match trial.magnetic_translate(c) {
                            Ok(f) => f,
                            Err(Error::SupportClipped { ratio }) => return Err(Error::DomainInadequate { ratio }),
                            Err(e) => return Err(e),
                        };
                        trial.normalize();
                    }
                }
                let candidate = self.state(trial, omega, a);
                if candidate.objective <= state.objective + cfg.energy_tol {
                    accepted = Some((candidate, step));
                    break;
                }
                if velocity.take().is_none() {
                    tau *= 0.5;
                }
                streak = 0;
            }
            let Some((next, step)) = accepted else {
                let result = finish(state, mu, residual, iters, false, history);
                return Err(Error::NonConvergence(Box::new(result)));
            };
            state = next;
            history.push(state.breakdown.total);
            if cfg.momentum > 0.0 {
                velocity = Some(step);
                streak += 1;
            }
            iters += 1;
            if iters % GUARD_EVERY == 0 {
                let ratio = state.field.boundary_ratio();
                if ratio >= BOUNDARY_GUARD {
                    return Err(Error::DomainInadequate { ratio });
                }
            }
        }
    }

    /// Solves along ascending `a`, initializing each point from the previous
    /// result dilated by the predicted ratio of blow-up lengths.
    pub fn warm_start_schedule(
        &self,
        constants: &TownesConstants,
        profile: &RadialProfile,
        grid: &Grid2D,
        omega: f64,
        a_list: &[f64],
    ) -> Result<Vec<Result<SolveResult>>> {
        if a_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("a_list must be strictly increasing".into()));
        }
        if let Some(&last) = a_list.last() {
            if last >= constants.a_star {
                return Err(Error::InvalidArgument("all a must lie below a*".into()));
            }
        }
        let mut out = Vec::with_capacity(a_list.len());
        let mut previous: Option<(f64, Field)> = None;
        for &a in a_list {
            let init = match &previous {
                Some((a_prev, field)) => {
                    let s = ((constants.a_star - a_prev) / (constants.a_star - a)).powf(0.25);
                    dilate_onto(field, grid, s)
                }
                None => default_init(profile, constants, grid, a),
            };
            let result = self.minimize(omega, a, init);
            previous = match &result {
                Ok(r) => Some((a, r.field.clone())),
                Err(Error::NonConvergence(r)) => Some((a, r.field.clone())),
                Err(_) => None,
            };
            out.push(result);
        }
        Ok(out)
    }
}

impl Minimizer {
    /// `τ B^{-1/2} (1 - τΔ)^{-1} B^{-1/2} r` with `B = 1 + τ c|x|²`, `c` the
    /// total trap coefficient. Symmetric positive, so always a descent
    /// direction; the diagonal factors keep the explicit trap stable at the
    /// grid corners.
    fn precondition(&self, residual: &Field, tau: f64) -> Field {
        let c = 1.0 + self.config.pin_strength;
        let damp = |[x, y]: [f64; 2]| (1.0 + tau * c * (x * x + y * y)).sqrt().recip();
        let scaled = residual.map(|p, v| v * damp(p));
        let hat = scaled.spectrum();
        let solved = scaled.spectral_multiply_full(&hat, |k1, k2| Complex64::new(tau / (1.0 + tau * (k1 * k1 + k2 * k2)), 0.0));
        solved.map(|p, v| v * damp(p))
    }
}

fn finish(state: State, mu: f64, residual: f64, iters: usize, converged: bool, history: Vec<f64>) -> SolveResult {
    SolveResult { field: state.field, breakdown: state.breakdown, mu, residual, iters, converged, history }
}

/// `x ↦ s φ(s x)` resampled onto `grid` and renormalized.
pub fn dilate_onto(field: &Field, grid: &Grid2D, s: f64) -> Field {
    let interp = Interpolator::new(field, 4);
    Field::from_fn(grid, |x, y| s * interp.eval(s * x, s * y)).normalized()
}

/// The soliton at the predicted blow-up scale when `a ≥ a*/2`, otherwise the
/// harmonic-oscillator Gaussian.
pub fn default_init(profile: &RadialProfile, constants: &TownesConstants, grid: &Grid2D, a: f64) -> Field {
    if a >= 0.5 * constants.a_star {
        let eps = constants.predicted_eps(a);
        sample_q0_on_grid(profile, grid, [0.0, 0.0], 1.0 / eps)
    } else {
        Field::gaussian(grid)
    }
}

/// Random smooth complex field: a few Gaussian bumps with random centers,
/// widths and complex weights, normalized.
pub fn random_init(grid: &Grid2D, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bumps: Vec<(f64, f64, f64, Complex64)> = (0..4)
        .map(|_| {
            (
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.5..1.0),
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            )
        })
        .collect();
    Field::from_fn(grid, |x, y| {
        bumps
            .iter()
            .map(|&(cx, cy, w, c)| c * (-((x - cx).powi(2) + (y - cy).powi(2)) / (2.0 * w * w)).exp())
            .sum()
    })
    .normalized()
}

/// Adds a seeded complex perturbation of relative size `amplitude`, shaped
/// like the field's own envelope, and renormalizes.
pub fn perturb(field: &Field, amplitude: f64, seed: u64) -> Field {
    if amplitude == 0.0 {
        return field.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = field.centroid();
    let width = field.blowup_length();
    let coeffs: Vec<Complex64> = (0..6)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    field
        .map(|[x, y], v| {
            let u = (x - c[0]) / width;
            let w = (y - c[1]) / width;
            let poly = coeffs[0] + coeffs[1] * u + coeffs[2] * w + coeffs[3] * u * w + coeffs[4] * (u * u - w * w)
                + coeffs[5] * Complex64::new(u, w);
            v * (1.0 + amplitude * poly)
        })
        .normalized()
}
