use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::collapse::CollapseReport;
use crate::error::{Error, Result};
use crate::townes::TownesConstants;

/// Minimum number of converged points in a fit.
pub const MIN_FIT_POINTS: usize = 4;
/// Minimum span of `a* - a` in decades.
pub const MIN_FIT_DECADES: f64 = 1.5;

/// Report quantities that can be fitted against `a* - a`. Signed quantities
/// are fitted by absolute value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Energy,
    Eps,
    Mu,
    Mass,
    EnergyRatio,
    Beta,
}

impl Quantity {
    pub fn name(&self) -> &'static str {
        match self {
            Quantity::Energy => "energy",
            Quantity::Eps => "eps",
            Quantity::Mu => "mu",
            Quantity::Mass => "mass",
            Quantity::EnergyRatio => "energy_ratio",
            Quantity::Beta => "beta",
        }
    }

    pub fn of(&self, r: &CollapseReport) -> f64 {
        match self {
            Quantity::Energy => r.energy,
            Quantity::Eps => r.eps,
            Quantity::Mu => r.mu.abs(),
            Quantity::Mass => r.mass,
            Quantity::EnergyRatio => r.energy_ratio,
            Quantity::Beta => r.beta,
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Quantity::Energy, Quantity::Eps, Quantity::Mu, Quantity::Mass, Quantity::EnergyRatio, Quantity::Beta]
            .into_iter()
            .find(|q| q.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown quantity {s:?}")))
    }
}

/// `quantity ≈ prefactor · (a* - a)^exponent`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub quantity: String,
    pub exponent: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Least-squares fit of `log quantity` against `log(a* - a)` over converged
/// reports.
pub fn fit_rate(reports: &[CollapseReport], quantity: Quantity, a_star: f64) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = reports
        .iter()
        .filter(|r| r.converged && r.a < a_star)
        .map(|r| ((a_star - r.a).ln(), quantity.of(r).ln()))
        .filter(|(_, y)| y.is_finite())
        .collect();
    let decades = if pts.is_empty() {
        0.0
    } else {
        let lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        (hi - lo) / std::f64::consts::LN_10
    };
    if pts.len() < MIN_FIT_POINTS || decades < MIN_FIT_DECADES {
        return Err(Error::InsufficientPoints { points: pts.len(), decades });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    // A constant quantity is fitted perfectly by slope 0.
    let r_squared = if syy <= f64::EPSILON * n { 1.0 } else { (1.0 - sse / syy).clamp(0.0, 1.0) };
    Ok(RateFit {
        quantity: quantity.name().to_string(),
        exponent: slope,
        prefactor: intercept.exp(),
        r_squared,
        points: pts.len(),
    })
}

/// Trial-state energy bound `2‖xQ₀‖ a*^{-1/2} (a* - a)^{1/2}` at each `a/a*`.
pub fn upper_bound_curve(constants: &TownesConstants, a_fracs: &[f64]) -> Vec<f64> {
    a_fracs.iter().map(|f| constants.trial_upper_bound(f * constants.a_star)).collect()
}
