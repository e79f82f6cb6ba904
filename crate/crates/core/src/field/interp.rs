use num_complex::Complex64;

use super::{Field, Grid2D};

/// Largest points-per-side of the refined grid built for interpolation.
const MAX_REFINED: usize = 2048;

/// Off-grid evaluation of a field: the field is first refined spectrally
/// (zero-padding its spectrum), then evaluated by bicubic convolution on the
/// refined grid. Points outside the domain evaluate to zero.
#[derive(Debug, Clone)]
pub struct Interpolator {
    grid: Grid2D,
    values: Vec<Complex64>,
}

impl Interpolator {
    /// Refines by the largest power-of-two factor up to `max_factor` that
    /// keeps the grid at or below 2048 points per side.
    pub fn new(field: &Field, max_factor: usize) -> Self {
        let n = field.grid().n();
        let mut factor = 1;
        while factor * 2 <= max_factor.max(1) && n * factor * 2 <= MAX_REFINED {
            factor *= 2;
        }
        if factor == 1 {
            return Self { grid: field.grid().clone(), values: field.values().to_vec() };
        }
        let fine = field.grid().refined(factor);
        let m = fine.n();
        let hat = field.spectrum();
        let mut padded = vec![Complex64::default(); m * m];
        let half = n / 2;
        let wrap = |j: usize| if j < half { j } else { j + m - n };
        for r in 0..n {
            if r == half {
                continue;
            }
            for c in 0..n {
                if c == half {
                    continue;
                }
                padded[wrap(r) * m + wrap(c)] = hat[r * n + c];
            }
        }
        fine.ifft(&mut padded);
        let scale = (factor * factor) as f64;
        padded.iter_mut().for_each(|v| *v *= scale);
        Self { grid: fine, values: padded }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    #[inline]
    fn at(&self, r: isize, c: isize) -> Complex64 {
        let n = self.grid.n() as isize;
        if r < 0 || c < 0 || r >= n || c >= n {
            Complex64::default()
        } else {
            self.values[(r * n + c) as usize]
        }
    }

    /// Bicubic convolution (Keys, `a = -1/2`) at `(x₁, x₂)`.
    pub fn eval(&self, x: f64, y: f64) -> Complex64 {
        let h = self.grid.spacing();
        let e = self.grid.extent();
        if x < -e || y < -e || x > e || y > e {
            return Complex64::default();
        }
        let u = (x + e) / h;
        let v = (y + e) / h;
        let c0 = u.floor();
        let r0 = v.floor();
        let wu = keys_weights(u - c0);
        let wv = keys_weights(v - r0);
        let (c0, r0) = (c0 as isize, r0 as isize);
        let mut acc = Complex64::default();
        for (dr, wr) in wv.iter().enumerate() {
            let mut row = Complex64::default();
            for (dc, wc) in wu.iter().enumerate() {
                row += *wc * self.at(r0 - 1 + dr as isize, c0 - 1 + dc as isize);
            }
            acc += *wr * row;
        }
        acc
    }
}

fn keys_weights(t: f64) -> [f64; 4] {
    let a = -0.5;
    let w = |s: f64| {
        let s = s.abs();
        if s <= 1.0 {
            (a + 2.0) * s.powi(3) - (a + 3.0) * s * s + 1.0
        } else if s < 2.0 {
            a * s.powi(3) - 5.0 * a * s * s + 8.0 * a * s - 4.0 * a
        } else {
            0.0
        }
    };
    [w(1.0 + t), w(t), w(1.0 - t), w(2.0 - t)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_partition_unity() {
        for t in [0.0, 0.25, 0.5, 0.9] {
            let s: f64 = keys_weights(t).iter().sum();
            assert!((s - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn reproduces_smooth_field_off_grid() {
        let g = Grid2D::new(64, 6.0).unwrap();
        let f = |x: f64, y: f64| Complex64::new((-(x * x + y * y) / 2.0).exp(), 0.5 * x * (-(x * x + y * y)).exp());
        let field = Field::from_fn(&g, f);
        let interp = Interpolator::new(&field, 8);
        assert_eq!(interp.grid().n(), 512);
        let mut worst: f64 = 0.0;
        for &(x, y) in &[(0.013, -0.27), (1.111, 0.77), (-2.3, 1.9), (0.5, 0.5)] {
            worst = worst.max((interp.eval(x, y) - f(x, y)).norm());
        }
        assert!(worst < 1e-6, "{worst}");
        assert_eq!(interp.eval(7.0, 0.0), Complex64::default());
    }
}
