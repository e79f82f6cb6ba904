#![allow(dead_code)]

use num_complex::Complex64;
use proptest::prelude::*;
use rotc::{Field, Grid2D};

/// One term `w · ((x - c₁) + i(y - c₂))^m · exp(-|x - c|² / 2s²)`.
#[derive(Debug, Clone)]
pub struct Bump {
    pub center: [f64; 2],
    pub width: f64,
    pub weight: Complex64,
    pub vorticity: i32,
}

pub fn bump() -> impl Strategy<Value = Bump> {
    ((-1.0f64..1.0, -1.0f64..1.0), 0.4f64..0.9, (-1.0f64..1.0, -1.0f64..1.0), -1i32..=2).prop_map(
        |((cx, cy), width, (re, im), vorticity)| Bump {
            center: [cx, cy],
            width,
            weight: Complex64::new(re, im + 0.05),
            vorticity,
        },
    )
}

pub fn test_grid() -> Grid2D {
    Grid2D::new(128, 8.0).unwrap()
}

/// Normalized superposition of the bumps on `grid`.
pub fn smooth_field(grid: &Grid2D, bumps: &[Bump]) -> Field {
    let f = Field::from_fn(grid, |x, y| {
        bumps
            .iter()
            .map(|b| {
                let (dx, dy) = (x - b.center[0], y - b.center[1]);
                let z = Complex64::new(dx, dy);
                let angular = match b.vorticity {
                    m if m >= 0 => z.powi(m),
                    m => z.conj().powi(-m),
                };
                b.weight * angular * (-(dx * dx + dy * dy) / (2.0 * b.width * b.width)).exp()
            })
            .sum()
    });
    f.normalized()
}

pub fn smooth_fields() -> impl Strategy<Value = Field> {
    proptest::collection::vec(bump(), 1..4).prop_map(|bumps| smooth_field(&test_grid(), &bumps))
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
