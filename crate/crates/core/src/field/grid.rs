use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Uniform square grid on `[-extent, extent)²` with `n` points per side.
///
/// Values are stored row-major: index `row * n + col` holds the sample at
/// `x₁ = coords[col]`, `x₂ = coords[row]`. The domain is treated as periodic
/// by the spectral operators.
#[derive(Clone)]
pub struct Grid2D {
    n: usize,
    extent: f64,
    spacing: f64,
    coords: Vec<f64>,
    wavenumbers: Vec<f64>,
    deriv_wavenumbers: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid2D")
            .field("n", &self.n)
            .field("extent", &self.extent)
            .field("spacing", &self.spacing)
            .finish()
    }
}

impl PartialEq for Grid2D {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.extent == other.extent
    }
}

impl Grid2D {
    pub const MIN_POINTS: usize = 64;

    pub fn new(n: usize, extent: f64) -> Result<Self> {
        if n < Self::MIN_POINTS || !n.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "grid size must be a power of two >= {}, got {n}",
                Self::MIN_POINTS
            )));
        }
        if !(extent > 0.0 && extent.is_finite()) {
            return Err(Error::InvalidArgument(format!("extent must be positive, got {extent}")));
        }
        Ok(Self::build(n, extent))
    }

    /// Like [`Grid2D::new`] without the minimum-size check; used for the
    /// small grids of unit tests and for upsampled interpolation grids.
    pub(crate) fn build(n: usize, extent: f64) -> Self {
        let spacing = 2.0 * extent / n as f64;
        let coords = (0..n).map(|j| -extent + j as f64 * spacing).collect();
        let scale = PI / extent;
        let wavenumbers: Vec<f64> = (0..n)
            .map(|j| {
                let m = if j < n / 2 { j as i64 } else { j as i64 - n as i64 };
                m as f64 * scale
            })
            .collect();
        let mut deriv_wavenumbers = wavenumbers.clone();
        deriv_wavenumbers[n / 2] = 0.0;
        let mut planner = FftPlanner::new();
        Self {
            n,
            extent,
            spacing,
            coords,
            wavenumbers,
            deriv_wavenumbers,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Quadrature weight of one grid cell.
    pub fn cell_area(&self) -> f64 {
        self.spacing * self.spacing
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Per-axis node coordinates.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Per-axis discrete Fourier frequencies scaled by `π / extent`.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Wavenumbers used by the derivative operators: the Nyquist entry is
    /// zero so that first derivatives of real fields stay real.
    pub fn deriv_wavenumbers(&self) -> &[f64] {
        &self.deriv_wavenumbers
    }

    /// `(x₁, x₂)` of a flat index.
    #[inline]
    pub fn point(&self, index: usize) -> [f64; 2] {
        [self.coords[index % self.n], self.coords[index / self.n]]
    }

    /// Grid with the same extent and `factor` times as many points per side.
    pub(crate) fn refined(&self, factor: usize) -> Self {
        Self::build(self.n * factor, self.extent)
    }

    /// Unnormalized forward 2D DFT in place.
    pub(crate) fn fft(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward);
    }

    /// Inverse 2D DFT in place, including the `1/n²` factor.
    pub(crate) fn ifft(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inverse);
        let norm = 1.0 / (self.n * self.n) as f64;
        data.iter_mut().for_each(|v| *v *= norm);
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        debug_assert_eq!(data.len(), self.n * self.n);
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(data, &mut scratch);
        transpose(data, self.n);
        plan.process_with_scratch(data, &mut scratch);
        transpose(data, self.n);
    }
}

/// In-place square transpose, tiled to stay cache-friendly on large grids.
fn transpose(data: &mut [Complex64], n: usize) {
    const TILE: usize = 32;
    for bi in (0..n).step_by(TILE) {
        for bj in (bi..n).step_by(TILE) {
            for i in bi..(bi + TILE).min(n) {
                let start = if bi == bj { i + 1 } else { bj };
                for j in start..(bj + TILE).min(n) {
                    data.swap(i * n + j, j * n + i);
                }
            }
        }
    }
}
