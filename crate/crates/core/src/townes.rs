//! Radial ground state of `-ΔQ + Q - Q³ = 0` in two dimensions (the Townes
//! soliton) by shooting on `Q(0)`, and the constants derived from it.
//!
//! The outward trajectory is only trustworthy up to the radius where the
//! bisection bracket starts to separate; beyond that the profile is taken from
//! the decaying solution integrated inward from `r_max`, matched in value.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, Grid2D, Point};

/// Starting radius of the outward integration.
const START_RADIUS: f64 = 1e-6;
/// Values below this are set to exactly zero.
const TAIL_CUTOFF: f64 = 1e-10;
/// Required decay `Q(r_max) / Q(0)`.
const DECAY_THRESHOLD: f64 = 1e-8;
/// Relative separation of the bracketing trajectories at which the outward
/// solution stops being used.
const MATCH_SEPARATION: f64 = 1e-10;

/// The Townes profile sampled on a uniform radial grid starting at `r = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    radii: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    spacing: f64,
    r_max: f64,
}

impl RadialProfile {
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `Q'(r)` at the grid radii, as produced by the integrator.
    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// `Q(0)`.
    pub fn center_value(&self) -> f64 {
        self.values[0]
    }

    /// Cubic Hermite interpolation of `Q` at radius `r`; zero beyond `r_max`.
    pub fn value_at(&self, r: f64) -> f64 {
        let r = r.abs();
        if r >= self.r_max {
            return 0.0;
        }
        let h = self.spacing;
        let i = ((r / h) as usize).min(self.values.len() - 2);
        let t = (r - self.radii[i]) / h;
        let (q0, q1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * q0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * q1
            + (t3 - t2) * m1
    }

    /// Max-norm residual of `Q'' + Q'/r - Q + Q³` on `[0, r_limit]`, using
    /// centered second differences of the sampled values (even reflection at
    /// the origin). Stencils touching the zeroed tail are skipped.
    pub fn ode_residual(&self, r_limit: f64) -> f64 {
        let h = self.spacing;
        let q = &self.values;
        let q0 = q[0];
        let mut worst = (4.0 * (q[1] - q0) / (h * h) - q0 + q0.powi(3)).abs();
        for i in 1..q.len() - 1 {
            let r = self.radii[i];
            if r > r_limit {
                break;
            }
            if q[i - 1] == 0.0 || q[i] == 0.0 || q[i + 1] == 0.0 {
                continue;
            }
            let second = (q[i + 1] - 2.0 * q[i] + q[i - 1]) / (h * h);
            let first = (q[i + 1] - q[i - 1]) / (2.0 * h);
            let res = second + first / r - q[i] + q[i].powi(3);
            worst = worst.max(res.abs());
        }
        worst
    }

    /// Checks the profile invariants: grid layout, positivity at the
    /// origin, monotone decay and the far-field threshold.
    pub fn validate(&self) -> Result<()> {
        let n = self.values.len();
        if n < 3 || self.radii.len() != n || self.slopes.len() != n {
            return Err(Error::InvalidArgument("profile arrays inconsistent".into()));
        }
        if self.radii[0] != 0.0 || (self.radii[n - 1] - self.r_max).abs() > 1e-9 * self.r_max {
            return Err(Error::InvalidArgument("profile radii must span [0, r_max]".into()));
        }
        if self.radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("radii must be strictly increasing".into()));
        }
        if self.values[0] <= 0.0 {
            return Err(Error::InvalidArgument("Q(0) must be positive".into()));
        }
        if self.values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidArgument("profile must be non-increasing".into()));
        }
        let ratio = self.values[n - 1] / self.values[0];
        if ratio >= DECAY_THRESHOLD {
            return Err(Error::DecayFailure { ratio });
        }
        Ok(())
    }

    /// Sum of `2π r f(r)` by the composite trapezoid rule on the grid.
    fn radial_integral(&self, f: impl Fn(usize) -> f64) -> f64 {
        trapezoid_2d(&self.radii, self.spacing, f)
    }
}

fn trapezoid_2d(radii: &[f64], h: f64, f: impl Fn(usize) -> f64) -> f64 {
    let n = radii.len();
    let mut sum = 0.0;
    for (i, &r) in radii.iter().enumerate() {
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        sum += w * r * f(i);
    }
    2.0 * PI * h * sum
}

/// Constants of the mass-normalized profile `Q₀ = Q / ‖Q‖`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TownesConstants {
    /// `‖Q‖²`, the critical interaction strength.
    pub a_star: f64,
    /// `Q(0) / ‖Q‖`.
    pub q0_center: f64,
    /// `‖x Q₀‖`.
    pub x_moment: f64,
    /// `‖Q₀‖⁴_{L⁴}`.
    pub l4_norm4: f64,
    /// `‖∇Q₀‖²`.
    pub grad_norm2: f64,
}

impl TownesConstants {
    /// `(|‖∇Q₀‖² - 1|, |a*‖Q₀‖⁴/2 - 1|)`; both vanish for the exact soliton.
    pub fn pohozaev_residuals(&self) -> (f64, f64) {
        (
            (self.grad_norm2 - 1.0).abs(),
            (self.l4_norm4 * self.a_star / 2.0 - 1.0).abs(),
        )
    }

    /// Limit of `ε / (a* - a)^{1/4}`.
    pub fn beta_limit(&self) -> f64 {
        self.a_star.powf(-0.25) / self.x_moment.sqrt()
    }

    /// Limit of `E / (a* - a)^{1/2}`.
    pub fn energy_ratio_limit(&self) -> f64 {
        2.0 * self.x_moment / self.a_star.sqrt()
    }

    /// Energy of the best dilated trial state `λQ₀(λ·)`:
    /// `2‖xQ₀‖ ((a* - a)/a*)^{1/2}`.
    pub fn trial_upper_bound(&self, a: f64) -> f64 {
        self.energy_ratio_limit() * (self.a_star - a).max(0.0).sqrt()
    }

    /// Energy of the trial state `λQ₀(λ·)` at a given dilation.
    pub fn trial_energy(&self, a: f64, lambda: f64) -> f64 {
        lambda * lambda * (1.0 - a / self.a_star) + self.x_moment.powi(2) / (lambda * lambda)
    }

    /// Leading-order blow-up length `β (a* - a)^{1/4}`.
    pub fn predicted_eps(&self, a: f64) -> f64 {
        self.beta_limit() * (self.a_star - a).max(0.0).powf(0.25)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    CrossesZero,
    TurnsUp,
    Undecided,
}

#[inline]
fn rhs(r: f64, q: f64, p: f64) -> (f64, f64) {
    (p, -p / r + q - q * q * q)
}

#[inline]
fn rk4_step(r: f64, q: f64, p: f64, h: f64) -> (f64, f64) {
    let (k1q, k1p) = rhs(r, q, p);
    let (k2q, k2p) = rhs(r + 0.5 * h, q + 0.5 * h * k1q, p + 0.5 * h * k1p);
    let (k3q, k3p) = rhs(r + 0.5 * h, q + 0.5 * h * k2q, p + 0.5 * h * k2p);
    let (k4q, k4p) = rhs(r + h, q + h * k3q, p + h * k3p);
    (
        q + h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q),
        p + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p),
    )
}

/// Integrates outward from the series data at `START_RADIUS` onto the grid
/// `r_k = k h`. Calls `visit(k, q, p)` for every grid point reached; stops
/// early when the trajectory is classified.
fn shoot(s: f64, h: f64, steps: usize, mut visit: impl FnMut(usize, f64, f64)) -> Outcome {
    let c = (s - s * s * s) / 2.0;
    let mut q = s + c * START_RADIUS * START_RADIUS / 2.0;
    let mut p = c * START_RADIUS;
    visit(0, s, 0.0);
    (q, p) = rk4_step(START_RADIUS, q, p, h - START_RADIUS);
    for k in 1..=steps {
        visit(k, q, p);
        if q < 0.0 {
            return Outcome::CrossesZero;
        }
        if p > 0.0 {
            return Outcome::TurnsUp;
        }
        if k < steps {
            (q, p) = rk4_step(k as f64 * h, q, p, h);
        }
    }
    Outcome::Undecided
}

/// `K₀(r)` and `K₁(r)` from their large-argument expansions (`r ≳ 10`).
fn bessel_k01(r: f64) -> (f64, f64) {
    let series = |nu: f64| {
        let mu = 4.0 * nu * nu;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..12 {
            let kf = k as f64;
            term *= (mu - (2.0 * kf - 1.0).powi(2)) / (kf * 8.0 * r);
            sum += term;
        }
        sum
    };
    let pre = (PI / (2.0 * r)).sqrt() * (-r).exp();
    (pre * series(0.0), pre * series(1.0))
}

/// Integrates the decaying solution `A K₀` inward from `r_max` down to grid
/// index `stop`, returning `(values, slopes)` indexed from `stop`.
fn inward(amplitude: f64, h: f64, steps: usize, stop: usize) -> (Vec<f64>, Vec<f64>) {
    let r_end = steps as f64 * h;
    let (k0, k1) = bessel_k01(r_end);
    let mut q = amplitude * k0;
    let mut p = -amplitude * k1;
    let len = steps - stop + 1;
    let mut values = vec![0.0; len];
    let mut slopes = vec![0.0; len];
    values[len - 1] = q;
    slopes[len - 1] = p;
    for k in (stop..steps).rev() {
        (q, p) = rk4_step((k + 1) as f64 * h, q, p, -h);
        values[k - stop] = q;
        slopes[k - stop] = p;
    }
    (values, slopes)
}

/// Solves for the Townes soliton by bisection shooting on `Q(0)`.
pub fn solve_townes(shoot_tol: f64, r_max: f64, spacing: f64) -> Result<RadialProfile> {
    if !(shoot_tol > 0.0 && shoot_tol < 1e-6) {
        return Err(Error::InvalidArgument(format!("shoot_tol must be in (0, 1e-6), got {shoot_tol}")));
    }
    if !(r_max >= 15.0) {
        return Err(Error::InvalidArgument(format!("r_max must be at least 15, got {r_max}")));
    }
    if !(spacing > 0.0 && spacing <= 1e-3) {
        return Err(Error::InvalidArgument(format!("spacing must be in (0, 1e-3], got {spacing}")));
    }
    let steps = (r_max / spacing).round() as usize;
    let h = spacing;
    let r_max = steps as f64 * h;

    let classify = |s: f64| shoot(s, h, steps, |_, _, _| {});
    let mut lo = 1.5;
    let mut hi = 3.0;
    if classify(lo) != Outcome::TurnsUp {
        return Err(Error::BracketFailure(format!("Q(0) = {lo} does not turn upward")));
    }
    let mut expansions = 0;
    while classify(hi) != Outcome::CrossesZero {
        hi *= 1.5;
        expansions += 1;
        if expansions > 10 {
            return Err(Error::BracketFailure("no zero-crossing trajectory found".into()));
        }
    }
    while hi - lo > shoot_tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match classify(mid) {
            Outcome::CrossesZero => hi = mid,
            Outcome::TurnsUp => lo = mid,
            Outcome::Undecided => {
                lo = mid;
                hi = mid;
            }
        }
    }

    // Record both bracketing trajectories.
    let record = |s: f64| {
        let mut q = Vec::with_capacity(steps + 1);
        let mut p = Vec::with_capacity(steps + 1);
        shoot(s, h, steps, |_, qk, pk| {
            q.push(qk);
            p.push(pk);
        });
        (q, p)
    };
    let (q_lo, p_lo) = record(lo);
    let (q_hi, _) = record(hi);
    let common = q_lo.len().min(q_hi.len());
    let mut stop = 0;
    for k in 1..common {
        let mean = 0.5 * (q_lo[k] + q_hi[k]);
        if mean <= 0.0 || (q_lo[k] - q_hi[k]).abs() > MATCH_SEPARATION * mean {
            break;
        }
        stop = k;
    }
    let min_match = (1.0 / h).ceil() as usize;
    let stop = stop.min(steps * 3 / 4);
    if stop < min_match {
        return Err(Error::BracketFailure(format!(
            "bracketing trajectories separate too early (r = {})",
            stop as f64 * h
        )));
    }
    // Step back a little so the matching point is well inside the agreeing range.
    let stop = stop - stop / 10;
    let target = q_lo[stop];

    // Secant iteration on the tail amplitude; the map is almost linear.
    let value_at_stop = |amp: f64| inward(amp, h, steps, stop).0[0];
    let mut a0 = 1.0;
    let mut f0 = value_at_stop(a0) - target;
    let mut a1 = a0 * target / (f0 + target);
    for _ in 0..30 {
        let f1 = value_at_stop(a1) - target;
        if f1 == 0.0 || (f1 - f0) == 0.0 || (f1 / target).abs() < 1e-15 {
            break;
        }
        let next = a1 - f1 * (a1 - a0) / (f1 - f0);
        (a0, f0, a1) = (a1, f1, next);
    }
    let (tail_q, tail_p) = inward(a1, h, steps, stop);

    let mut values = Vec::with_capacity(steps + 1);
    let mut slopes = Vec::with_capacity(steps + 1);
    values.extend_from_slice(&q_lo[..stop]);
    slopes.extend_from_slice(&p_lo[..stop]);
    values.extend_from_slice(&tail_q);
    slopes.extend_from_slice(&tail_p);

    for (q, p) in values.iter_mut().zip(slopes.iter_mut()) {
        if *q < TAIL_CUTOFF {
            *q = 0.0;
            *p = 0.0;
        }
    }
    let radii = (0..=steps).map(|k| k as f64 * h).collect();
    let profile = RadialProfile { radii, values, slopes, spacing: h, r_max };
    profile.validate()?;
    if profile.values.iter().take(steps).any(|&q| q < 0.0) {
        return Err(Error::BracketFailure("profile is not positive".into()));
    }
    Ok(profile)
}

/// Quadratures of the profile that define the Townes constants.
pub fn compute_constants(profile: &RadialProfile) -> Result<TownesConstants> {
    profile.validate()?;
    let q = profile.values();
    let r = profile.radii();
    let h = profile.spacing();
    let n = q.len();

    let a_star = profile.radial_integral(|i| q[i] * q[i]);
    let tail_start = 0.9 * profile.r_max();
    let tail = profile.radial_integral(|i| if r[i] >= tail_start { q[i] * q[i] } else { 0.0 });
    let fraction = tail / a_star;
    if fraction > 1e-8 {
        return Err(Error::QuadratureDivergence { fraction });
    }

    let derivative = |i: usize| -> f64 {
        if i == 0 {
            0.0
        } else if i == n - 1 {
            (q[i] - q[i - 1]) / h
        } else {
            (q[i + 1] - q[i - 1]) / (2.0 * h)
        }
    };
    let grad = profile.radial_integral(|i| derivative(i).powi(2));
    let quartic = profile.radial_integral(|i| q[i].powi(4));
    let second_moment = profile.radial_integral(|i| r[i] * r[i] * q[i] * q[i]);

    Ok(TownesConstants {
        a_star,
        q0_center: q[0] / a_star.sqrt(),
        x_moment: (second_moment / a_star).sqrt(),
        l4_norm4: quartic / (a_star * a_star),
        grad_norm2: grad / a_star,
    })
}

/// Samples `x ↦ λ Q₀(λ |x - c|)` on the grid and renormalizes it to unit mass.
pub fn sample_q0_on_grid(profile: &RadialProfile, grid: &Grid2D, center: Point, scale: f64) -> Field {
    let coords = grid.coords();
    let n = grid.n();
    let mut values = Vec::with_capacity(n * n);
    for &y in coords {
        for &x in coords {
            let r = ((x - center[0]).powi(2) + (y - center[1]).powi(2)).sqrt();
            values.push(num_complex::Complex64::new(scale * profile.value_at(scale * r), 0.0));
        }
    }
    let mut field = Field::from_values(grid.clone(), values);
    field.normalize();
    field
}

/// Default-resolution profile and constants, computed once per process.
pub fn reference() -> &'static (RadialProfile, TownesConstants) {
    static REFERENCE: OnceLock<(RadialProfile, TownesConstants)> = OnceLock::new();
    REFERENCE.get_or_init(|| {
        let profile = solve_townes(1e-12, 20.0, 1e-4).expect("reference Townes solve");
        let constants = compute_constants(&profile).expect("reference Townes constants");
        (profile, constants)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range_parameters() {
        assert!(matches!(solve_townes(1e-3, 20.0, 1e-4), Err(Error::InvalidArgument(_))));
        assert!(matches!(solve_townes(1e-12, 10.0, 1e-4), Err(Error::InvalidArgument(_))));
        assert!(matches!(solve_townes(1e-12, 20.0, 1e-2), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn bessel_asymptotics_satisfy_wronskian() {
        // I₀K₁ + I₁K₀ = 1/r; for large r only the K part is checked through
        // the recurrence K₁' = -K₀ - K₁/r by finite differences.
        let r = 20.0;
        let d = 1e-4;
        let (_, k1p) = bessel_k01(r + d);
        let (_, k1m) = bessel_k01(r - d);
        let (k0, k1) = bessel_k01(r);
        let deriv = (k1p - k1m) / (2.0 * d);
        assert!(((deriv + k0 + k1 / r) / k0).abs() < 1e-7);
    }

    #[test]
    fn hermite_interpolation_hits_nodes() {
        let (profile, _) = reference();
        for k in [0usize, 10, 1234, 50_000] {
            let r = profile.radii()[k];
            assert_eq!(profile.value_at(r), profile.values()[k]);
        }
        assert_eq!(profile.value_at(profile.r_max() + 1.0), 0.0);
    }

    #[test]
    fn validate_flags_slow_decay() {
        let (profile, _) = reference();
        let mut broken = profile.clone();
        for v in broken.values.iter_mut() {
            *v = v.max(1e-3);
        }
        assert!(matches!(broken.validate(), Err(Error::DecayFailure { .. })));
    }

    #[test]
    fn short_domain_is_a_decay_failure() {
        // Q(15)/Q(0) is about 1e-7, above the required 1e-8.
        let err = solve_townes(1e-12, 15.0, 1e-3).unwrap_err();
        assert!(matches!(err, Error::DecayFailure { .. }), "{err}");
    }
}
