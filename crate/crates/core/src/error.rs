use thiserror::Error;

use crate::minimizer::SolveResult;

/// Errors produced by the solvers and diagnostics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shooting could not bracket the decaying solution: {0}")]
    BracketFailure(String),

    #[error("profile has not decayed below threshold at r_max (Q(r_max)/Q(0) = {ratio:e})")]
    DecayFailure { ratio: f64 },

    #[error("tail contribution beyond 0.9 r_max is {fraction:e} of the total")]
    QuadratureDivergence { fraction: f64 },

    #[error("field support clipped by the domain boundary (edge/max = {ratio:e})")]
    SupportClipped { ratio: f64 },

    #[error("no convergence after {iters} iterations (residual {residual:e})", iters = .0.iters, residual = .0.residual)]
    NonConvergence(Box<SolveResult>),

    #[error("domain inadequate during the flow (edge/max = {ratio:e}); regrid required")]
    DomainInadequate { ratio: f64 },

    #[error("rescaled window exceeds the source grid: needs half-width {needed}, source has {available}")]
    ResampleOutOfDomain { needed: f64, available: f64 },

    #[error("rate fit needs at least 4 points spanning 1.5 decades; got {points} points spanning {decades:.2} decades")]
    InsufficientPoints { points: usize, decades: f64 },

    #[error("sweep failed: {failed} of {total} points did not converge")]
    SweepFailed { failed: usize, total: usize },

    #[error("snapshot format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
