//! Complex wavefunctions on a periodic square grid, spectral derivatives and
//! the observables of the rotating NLS energy.
//!
//! Conventions: `x^⊥ = (-x₂, x₁)` and `L = i(x₂∂₁ - x₁∂₂) = -i x^⊥·∇`, so that
//! `‖(-i∇ + Ω x^⊥)φ‖² = ‖∇φ‖² + 2Ω⟨Lφ, φ⟩ + Ω²‖xφ‖²`. Integrals use the
//! rectangle rule with weight `spacing²`.

mod grid;
mod interp;
mod snapshot;

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use grid::Grid2D;
pub use interp::Interpolator;
pub use snapshot::{read_snapshot, write_snapshot, FLAG_NORMALIZED, SNAPSHOT_MAGIC};

/// A point of the plane, `[x₁, x₂]`.
pub type Point = [f64; 2];

/// Edge-to-peak amplitude ratio above which a field is considered clipped.
pub const BOUNDARY_GUARD: f64 = 1e-6;

/// A complex wavefunction sampled on a [`Grid2D`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid2D,
    values: Vec<Complex64>,
}

/// Quadratic and quartic functionals of a field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub mass: f64,
    /// `‖∇φ‖²`
    pub kinetic: f64,
    /// `‖xφ‖²`
    pub trap: f64,
    /// `⟨Lφ, φ⟩`
    pub angular: f64,
    /// `‖φ‖⁴_{L⁴}`
    pub quartic: f64,
    pub omega: f64,
    /// `‖(-i∇ + Ω x^⊥)φ‖²`, evaluated directly.
    pub magnetic_kinetic: f64,
}

impl Field {
    pub fn from_values(grid: Grid2D, values: Vec<Complex64>) -> Self {
        assert_eq!(values.len(), grid.len(), "field size does not match grid");
        Self { grid, values }
    }

    pub fn zeros(grid: Grid2D) -> Self {
        let values = vec![Complex64::default(); grid.len()];
        Self { grid, values }
    }

    /// Samples `f(x₁, x₂)` at the grid nodes.
    pub fn from_fn(grid: &Grid2D, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let coords = grid.coords();
        let mut values = Vec::with_capacity(grid.len());
        for &y in coords {
            for &x in coords {
                values.push(f(x, y));
            }
        }
        Self { grid: grid.clone(), values }
    }

    /// The normalized harmonic-oscillator ground state `π^{-1/2} e^{-|x|²/2}`.
    pub fn gaussian(grid: &Grid2D) -> Self {
        let c = std::f64::consts::PI.powf(-0.5);
        Self::from_fn(grid, |x, y| Complex64::new(c * (-(x * x + y * y) / 2.0).exp(), 0.0))
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn map(&self, f: impl Fn([f64; 2], Complex64) -> Complex64) -> Field {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| f(self.grid.point(i), v))
            .collect();
        Field { grid: self.grid.clone(), values }
    }

    pub fn scale(&mut self, c: Complex64) {
        self.values.iter_mut().for_each(|v| *v *= c);
    }

    /// `self + c·other`.
    pub fn add_scaled(&mut self, c: Complex64, other: &Field) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
    }

    fn integrate(&self, f: impl Fn(usize, Complex64) -> f64) -> f64 {
        let sum: f64 = self.values.iter().enumerate().map(|(i, &v)| f(i, v)).sum();
        sum * self.grid.cell_area()
    }

    /// `∫ conj(self) · other`.
    pub fn inner(&self, other: &Field) -> Complex64 {
        let sum: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum();
        sum * self.grid.cell_area()
    }

    /// `‖φ‖²_{L²}`.
    pub fn mass(&self) -> f64 {
        self.integrate(|_, v| v.norm_sqr())
    }

    pub fn norm(&self) -> f64 {
        self.mass().sqrt()
    }

    /// Rescales to unit mass; returns the previous norm.
    pub fn normalize(&mut self) -> f64 {
        let norm = self.norm();
        if norm > 0.0 {
            let inv = 1.0 / norm;
            self.values.iter_mut().for_each(|v| *v *= inv);
        }
        norm
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.mass() - 1.0).abs() <= tol
    }

    /// `‖xφ‖²`.
    pub fn trap(&self) -> f64 {
        self.integrate(|i, v| {
            let [x, y] = self.grid.point(i);
            (x * x + y * y) * v.norm_sqr()
        })
    }

    /// `‖φ‖⁴_{L⁴}`.
    pub fn quartic(&self) -> f64 {
        self.integrate(|_, v| v.norm_sqr().powi(2))
    }

    pub fn spectrum(&self) -> Vec<Complex64> {
        let mut data = self.values.clone();
        self.grid.fft(&mut data);
        data
    }

    /// Field whose spectrum is `m(k₁, k₂) φ̂(k)`, with derivative wavenumbers.
    pub(crate) fn spectral_multiply(&self, hat: &[Complex64], m: impl Fn(f64, f64) -> Complex64) -> Field {
        self.multiply_with(self.grid.deriv_wavenumbers(), hat, m)
    }

    /// As [`Field::spectral_multiply`] but keeping the Nyquist wavenumber;
    /// used for even symbols such as `-|k|²`.
    pub(crate) fn spectral_multiply_full(&self, hat: &[Complex64], m: impl Fn(f64, f64) -> Complex64) -> Field {
        self.multiply_with(self.grid.wavenumbers(), hat, m)
    }

    /// `Σ m(k) |φ̂(k)|²` scaled to an integral, with full wavenumbers.
    pub(crate) fn spectral_quadratic(&self, hat: &[Complex64], m: impl Fn(f64, f64) -> f64) -> f64 {
        let n = self.grid.n();
        let k = self.grid.wavenumbers();
        let sum: f64 = hat.iter().enumerate().map(|(i, c)| m(k[i % n], k[i / n]) * c.norm_sqr()).sum();
        sum * self.grid.cell_area() / (n * n) as f64
    }

    fn multiply_with(&self, k: &[f64], hat: &[Complex64], m: impl Fn(f64, f64) -> Complex64) -> Field {
        let n = self.grid.n();
        let mut data: Vec<Complex64> = hat
            .iter()
            .enumerate()
            .map(|(i, &c)| c * m(k[i % n], k[i / n]))
            .collect();
        self.grid.ifft(&mut data);
        Field { grid: self.grid.clone(), values: data }
    }

    /// Spectral gradient `[∂₁φ, ∂₂φ]`.
    pub fn gradient(&self) -> [Field; 2] {
        let hat = self.spectrum();
        [
            self.spectral_multiply(&hat, |k1, _| Complex64::new(0.0, k1)),
            self.spectral_multiply(&hat, |_, k2| Complex64::new(0.0, k2)),
        ]
    }

    /// Spectral Laplacian `-|k|²φ̂`. The Nyquist wavenumber is kept, so
    /// no mode is free of kinetic energy.
    pub fn laplacian(&self) -> Field {
        let hat = self.spectrum();
        self.spectral_multiply_full(&hat, |k1, k2| Complex64::new(-(k1 * k1 + k2 * k2), 0.0))
    }

    /// `‖∇φ‖² = ⟨-Δφ, φ⟩` by Parseval.
    pub fn kinetic(&self) -> f64 {
        let hat = self.spectrum();
        self.spectral_quadratic(&hat, |k1, k2| k1 * k1 + k2 * k2)
    }

    /// `Lφ = i(x₂∂₁φ - x₁∂₂φ)` applied directly.
    pub fn apply_angular_momentum(&self) -> Field {
        let [d1, d2] = self.gradient();
        let values = (0..self.values.len())
            .map(|i| {
                let [x, y] = self.grid.point(i);
                Complex64::i() * (y * d1.values[i] - x * d2.values[i])
            })
            .collect();
        Field { grid: self.grid.clone(), values }
    }

    /// `⟨Lφ, φ⟩` through the current: `∫ x^⊥ · Im(φ̄ ∇φ)`.
    pub fn angular_momentum_expectation(&self) -> f64 {
        let [d1, d2] = self.gradient();
        self.angular_from_gradient(&d1, &d2)
    }

    pub(crate) fn angular_from_gradient(&self, d1: &Field, d2: &Field) -> f64 {
        self.integrate(|i, v| {
            let [x, y] = self.grid.point(i);
            let c = v.conj();
            -y * (c * d1.values[i]).im + x * (c * d2.values[i]).im
        })
    }

    /// `‖(-i∇ + Ω x^⊥)φ‖²`, integrating the squared modulus pointwise.
    pub fn magnetic_kinetic(&self, omega: f64) -> f64 {
        let [d1, d2] = self.gradient();
        self.magnetic_kinetic_from_gradient(&d1, &d2, omega)
    }

    pub(crate) fn magnetic_kinetic_from_gradient(&self, d1: &Field, d2: &Field, omega: f64) -> f64 {
        let mi = Complex64::new(0.0, -1.0);
        self.integrate(|i, v| {
            let [x, y] = self.grid.point(i);
            let c1 = mi * d1.values[i] - omega * y * v;
            let c2 = mi * d2.values[i] + omega * x * v;
            c1.norm_sqr() + c2.norm_sqr()
        })
    }

    pub fn observables(&self, omega: f64) -> Observables {
        let [d1, d2] = self.gradient();
        let kinetic = self.integrate(|i, _| d1.values[i].norm_sqr() + d2.values[i].norm_sqr());
        Observables {
            mass: self.mass(),
            kinetic,
            trap: self.trap(),
            angular: self.angular_from_gradient(&d1, &d2),
            quartic: self.quartic(),
            omega,
            magnetic_kinetic: self.magnetic_kinetic_from_gradient(&d1, &d2, omega),
        }
    }

    /// `|φ|` as a real-valued field.
    pub fn modulus(&self) -> Field {
        let values = self.values.iter().map(|v| Complex64::new(v.norm(), 0.0)).collect();
        Field { grid: self.grid.clone(), values }
    }

    /// `‖∇|φ|‖`, differentiating the pointwise modulus spectrally. Near zeros
    /// of `φ` the modulus has kinks and the value carries Gibbs error.
    pub fn modulus_gradient_norm(&self) -> f64 {
        self.modulus().kinetic().sqrt()
    }

    /// Blow-up length `ε = ‖∇|φ|‖⁻¹`.
    pub fn blowup_length(&self) -> f64 {
        1.0 / self.modulus_gradient_norm()
    }

    /// Density centroid `∫ x |φ|² / ∫ |φ|²`.
    pub fn centroid(&self) -> Point {
        let mut m = 0.0;
        let mut cx = 0.0;
        let mut cy = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            let [x, y] = self.grid.point(i);
            let w = v.norm_sqr();
            m += w;
            cx += x * w;
            cy += y * w;
        }
        [cx / m, cy / m]
    }

    pub fn max_modulus(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest modulus on the outermost ring of nodes divided by the global
    /// maximum.
    pub fn boundary_ratio(&self) -> f64 {
        let n = self.grid.n();
        let mut edge: f64 = 0.0;
        for j in 0..n {
            for idx in [j, (n - 1) * n + j, j * n, j * n + n - 1] {
                edge = edge.max(self.values[idx].norm());
            }
        }
        let peak = self.max_modulus();
        if peak == 0.0 {
            0.0
        } else {
            edge / peak
        }
    }

    pub fn check_boundary(&self) -> Result<()> {
        let ratio = self.boundary_ratio();
        if ratio < BOUNDARY_GUARD {
            Ok(())
        } else {
            Err(Error::SupportClipped { ratio })
        }
    }

    /// `x ↦ φ(x + y)` by a spectral (periodic) shift.
    pub fn translate(&self, y: Point) -> Field {
        let hat = self.spectrum();
        self.spectral_multiply(&hat, |k1, k2| Complex64::from_polar(1.0, k1 * y[0] + k2 * y[1]))
    }

    /// Magnetic translation `x ↦ e^{i y^⊥·x} φ(x + y)`.
    pub fn magnetic_translate(&self, y: Point) -> Result<Field> {
        let mut shifted = self.translate(y);
        let perp = [-y[1], y[0]];
        for (i, v) in shifted.values.iter_mut().enumerate() {
            let [x1, x2] = self.grid.point(i);
            *v *= Complex64::from_polar(1.0, perp[0] * x1 + perp[1] * x2);
        }
        shifted.check_boundary()?;
        Ok(shifted)
    }

    /// Writes `x₁, |φ|²` along the row closest to `x₂ = 0` as CSV.
    pub fn write_density_slice<W: Write>(&self, mut out: W) -> Result<()> {
        let n = self.grid.n();
        let row = n / 2;
        writeln!(out, "x,density")?;
        for col in 0..n {
            writeln!(out, "{},{}", self.grid.coords()[col], self.values[row * n + col].norm_sqr())?;
        }
        Ok(())
    }

    /// `‖u‖²_{H¹} = ‖u‖² + ‖∇u‖²`.
    pub fn h1_norm(&self) -> f64 {
        (self.mass() + self.kinetic()).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.max_modulus()
    }

    pub fn sub(&self, other: &Field) -> Field {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Field { grid: self.grid.clone(), values }
    }

    pub fn real_part(&self) -> Field {
        let values = self.values.iter().map(|v| Complex64::new(v.re, 0.0)).collect();
        Field { grid: self.grid.clone(), values }
    }

    pub fn imag_part(&self) -> Field {
        let values = self.values.iter().map(|v| Complex64::new(v.im, 0.0)).collect();
        Field { grid: self.grid.clone(), values }
    }
}
