//! Ground states and collapse diagnostics for the two-dimensional focusing
//! nonlinear Schrödinger energy with harmonic trap and rotation,
//!
//! `E_{Ω,a}(φ) = ‖∇φ‖² + ‖xφ‖² + 2Ω⟨Lφ, φ⟩ - (a/2)‖φ‖⁴_{L⁴}`, `‖φ‖ = 1`,
//!
//! for `0 ≤ Ω ≤ 1` and `0 ≤ a < a*`, where `a*` is the mass of the Townes
//! soliton.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod collapse;
pub mod error;
pub mod field;
pub mod functional;
pub mod minimizer;
pub mod sweep;
pub mod townes;

pub use collapse::{AlignedProfile, CollapseReport};
pub use error::{Error, Result};
pub use field::{Field, Grid2D, Observables, Point};
pub use functional::{EnergyBreakdown, Functional};
pub use minimizer::{Minimizer, SolveResult, SolverConfig};
pub use sweep::{run_sweep, GridPolicy, Quantity, RateFit, SweepOutcome, SweepPlan};
pub use townes::{RadialProfile, TownesConstants};
