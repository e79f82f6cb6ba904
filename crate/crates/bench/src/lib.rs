//! Benchmark fixtures shared by the criterion targets.

use rotc::townes::{self, sample_q0_on_grid};
use rotc::{Field, Grid2D};

/// The soliton at the predicted blow-up scale for `a_frac · a*`, sampled on an
/// `n × n` grid of half-width `extent`.
pub fn soliton(n: usize, extent: f64, a_frac: f64) -> Field {
    let (profile, constants) = townes::reference();
    let grid = Grid2D::new(n, extent).expect("valid bench grid");
    let eps = constants.predicted_eps(a_frac * constants.a_star);
    sample_q0_on_grid(profile, &grid, [0.0, 0.0], 1.0 / eps)
}
