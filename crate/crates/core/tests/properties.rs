mod common;

use common::{rel, smooth_field, smooth_fields, test_grid, Bump};
use num_complex::Complex64;
use proptest::prelude::*;
use rotc::townes::{reference, sample_q0_on_grid};
use rotc::{Field, Functional, Grid2D};

fn functional() -> Functional {
    Functional::from_constants(&reference().1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn inequality_deficits_are_nonnegative(phi in smooth_fields()) {
        let f = functional();
        prop_assert!(f.gn_deficit(&phi) >= -1e-6, "{}", f.gn_deficit(&phi));
        prop_assert!(f.magnetic_gn_deficit(&phi) >= -1e-6, "{}", f.magnetic_gn_deficit(&phi));
        prop_assert!(f.diamagnetic_gap(&phi) >= -1e-6, "{}", f.diamagnetic_gap(&phi));
        prop_assert!(f.landau_gap(&phi) >= -1e-6, "{}", f.landau_gap(&phi));
    }

    #[test]
    fn energy_forms_and_convex_split_agree(phi in smooth_fields(), omega in 0.0f64..=1.0, a_frac in 0.0f64..1.0) {
        let f = functional();
        let a = a_frac * f.a_star();
        let e = f.energy(&phi, omega, a).total;
        prop_assert!(rel(f.energy_magnetic_form(&phi, omega, a), e) < 1e-9);
        let split = omega * f.energy(&phi, 1.0, a).total + (1.0 - omega) * f.energy(&phi, 0.0, a).total;
        prop_assert!(rel(split, e) < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn gradient_matches_central_differences(
        phi in smooth_fields(),
        h in smooth_fields(),
        omega in 0.0f64..=1.0,
        a_frac in 0.0f64..1.0,
    ) {
        let f = functional();
        let a = a_frac * f.a_star();
        let delta = 1e-5;
        let g = f.energy_gradient(&phi, omega, a);
        let analytic = 2.0 * g.inner(&h).re;
        let mut plus = phi.clone();
        plus.add_scaled(Complex64::new(delta, 0.0), &h);
        let mut minus = phi.clone();
        minus.add_scaled(Complex64::new(-delta, 0.0), &h);
        let fd = (f.energy(&plus, omega, a).total - f.energy(&minus, omega, a).total) / (2.0 * delta);
        prop_assert!((fd - analytic).abs() <= 1e-5 * analytic.abs().max(1.0), "{fd} vs {analytic}");
    }

    #[test]
    fn energy_is_magnetic_translation_invariant_at_full_rotation(
        phi in smooth_fields(),
        y in (-0.5f64..0.5, -0.5f64..0.5),
        a_frac in 0.0f64..1.0,
    ) {
        let f = functional();
        let a = a_frac * f.a_star();
        let moved = phi.magnetic_translate([y.0, y.1]).unwrap();
        prop_assert!(rel(f.energy(&moved, 1.0, a).total, f.energy(&phi, 1.0, a).total) < 1e-8);
        prop_assert!((moved.mass() - phi.mass()).abs() < 1e-12);
    }
}

#[test]
fn translation_changes_energy_below_full_rotation() {
    let grid = Grid2D::new(128, 8.0).unwrap();
    let g = Field::gaussian(&grid);
    let moved = g.magnetic_translate([1.0, 0.0]).unwrap();
    let f = functional();
    // E₁ is invariant (= 2); E₀ of the shifted, phase-modulated Gaussian is
    // (1 + |y|²) + (1 + |y|²); the split gives 2 + |y|² at Ω = 1/2.
    assert!((f.energy(&moved, 1.0, 0.0).total - 2.0).abs() < 1e-8);
    assert!((f.energy(&moved, 0.0, 0.0).total - 4.0).abs() < 1e-8);
    assert!((f.energy(&moved, 0.5, 0.0).total - 3.0).abs() < 1e-8);
    assert!(g.magnetic_translate([0.0, 0.0]).unwrap().sub(&g).norm() < 1e-14);
}

#[test]
fn soliton_is_gn_optimal_and_gaussian_is_not() {
    let (profile, c) = reference();
    let f = functional();
    let phi = sample_q0_on_grid(profile, &Grid2D::new(256, 8.0).unwrap(), [0.0, 0.0], 1.0);
    assert!(f.gn_deficit(&phi).abs() < 0.01 * phi.kinetic(), "{}", f.gn_deficit(&phi));
    let g = Field::gaussian(&test_grid());
    // ‖∇g‖² = 1, ‖g‖⁴_{L⁴} = 1/(2π)
    let expected = 1.0 - c.a_star / (4.0 * std::f64::consts::PI);
    assert!((f.gn_deficit(&g) - expected).abs() < 1e-8, "{}", f.gn_deficit(&g));
    assert!(f.gn_deficit(&g) > 0.0);
}

#[test]
fn soliton_equation_without_trap() {
    let (profile, _) = reference();
    let f = functional();
    for lambda in [1.0, 2.0] {
        let phi = sample_q0_on_grid(profile, &Grid2D::new(256, 16.0).unwrap(), [0.0, 0.0], lambda);
        let g = f.energy_gradient_without_trap(&phi, 0.0, f.a_star());
        // -Δφ - a*|φ|²φ = -λ²φ for φ = λQ₀(λ·)
        let mut r = g.clone();
        r.add_scaled(Complex64::new(lambda * lambda, 0.0), &phi);
        assert!(r.norm() < 1e-4 * lambda * lambda, "{lambda}: {}", r.norm());
    }
}

#[test]
fn multiplier_examples() {
    let f = functional();
    let grid = test_grid();
    let g = Field::gaussian(&grid);
    assert!((f.lagrange_multiplier(&g, 1.0, 0.0) - 2.0).abs() < 1e-6);
    let bumps = [Bump { center: [0.3, -0.2], width: 0.6, weight: Complex64::new(1.0, 0.5), vorticity: 1 }];
    let phi = smooth_field(&grid, &bumps);
    let mu = f.lagrange_multiplier(&phi, 0.0, 0.0);
    assert!((mu - (phi.kinetic() + phi.trap())).abs() < 1e-10);
    assert!(mu >= 2.0);
}
