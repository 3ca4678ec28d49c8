use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use spectral_noise::hsdiag::{
    apply_operator, apply_operator_lattice, geometric_radii, hs_growth, hs_partial_sums, hs_verdict_theory, BumpWindow,
    Cutoff, LatticeCoefficients, OperatorSpec, Verdict,
};
use spectral_noise::noise::{sample_coefficients, DampingSchedule};
use spectral_noise::spectra::{Grid, ManifoldSpec};

fn t2() -> ManifoldSpec {
    ManifoldSpec::Torus { dim: 2 }
}

#[test]
fn identity_returns_the_input() {
    let c = sample_coefficients(&DampingSchedule::white(), t2(), 120, 9).unwrap();
    let input = LatticeCoefficients::from_real(&c).unwrap();
    let out = apply_operator(t2(), &OperatorSpec::multiplier(0.0), &c, &Grid::torus(vec![64, 64])).unwrap();
    for (k, v) in input.frequencies().zip(&input.values) {
        assert!((out.output.get(&k) - v).norm() <= 1e-10, "{k:?}");
    }
}

#[test]
fn multiplier_scales_a_single_frequency() {
    let mut input = LatticeCoefficients::zeros(2, 4);
    input.set(&[3, 4], Complex64::new(1.0, 0.0)).unwrap();
    let out = apply_operator_lattice(
        t2(),
        &OperatorSpec::multiplier(-2.0),
        &input,
        &Grid::torus(vec![32, 32]),
    )
    .unwrap();
    assert!((out.output.get(&[3, 4]) - Complex64::new(1.0 / 26.0, 0.0)).norm() <= 1e-12);
    assert!(out.output.norm_sq() - 1.0 / 676.0 <= 1e-15);
}

/// `(2π)^{-2} ∫ χ(x) e^{i(k-m)·x} dx` by the midpoint rule on a fine grid.
fn window_coefficient(window: &BumpWindow, shift: [i64; 2], n: usize) -> Complex64 {
    let h = 2.0 * PI / n as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 0..n {
        for b in 0..n {
            let x = [(a as f64 + 0.5) * h, (b as f64 + 0.5) * h];
            let phase = shift[0] as f64 * x[0] + shift[1] as f64 * x[1];
            acc += Complex64::from_polar(window.eval(&x), phase);
        }
    }
    acc * h * h / (4.0 * PI * PI)
}

#[test]
fn bump_multiplication_matches_direct_quadrature() {
    let window = BumpWindow::new(vec![2.5, 3.5], 1.2).unwrap();
    let mut input = LatticeCoefficients::zeros(2, 2);
    input.set(&[2, 0], Complex64::new(1.0, 0.0)).unwrap();
    let op = OperatorSpec::BumpMultiplication { window: window.clone() };
    let out = apply_operator_lattice(t2(), &op, &input, &Grid::torus(vec![128, 128])).unwrap();
    assert!(out.leakage < 1e-6, "leakage {}", out.leakage);
    for m0 in -8i64..=8 {
        for m1 in -8i64..=8 {
            if m0 * m0 + m1 * m1 > 64 {
                continue;
            }
            let expected = window_coefficient(&window, [2 - m0, -m1], 400);
            let got = out.output.get(&[m0, m1]);
            assert!((got - expected).norm() <= 1e-6, "m=({m0},{m1}): {got} vs {expected}");
        }
    }
}

#[test]
fn sandwich_leakage_is_small_on_a_fine_grid() {
    let c = sample_coefficients(&DampingSchedule::white(), t2(), 200, 4).unwrap();
    let op = OperatorSpec::Sandwich {
        s: 0.5,
        cutoff: Cutoff::Bump(BumpWindow::new(vec![PI, PI], PI / 2.0).unwrap()),
        varsigma_weight: 0.5,
    };
    let out = apply_operator(t2(), &op, &c, &Grid::torus(vec![128, 128])).unwrap();
    assert!(out.leakage < 1e-6, "leakage {}", out.leakage);
}

#[test]
fn multiplier_fits_match_theory() {
    for (m, radii) in [
        (ManifoldSpec::Circle, geometric_radii(256.0, 2.0, 8)),
        (t2(), geometric_radii(32.0, 2.0, 6)),
    ] {
        for a in [-2.0, -1.5, -1.0, -0.5, -0.25, 0.0] {
            let op = OperatorSpec::multiplier(a);
            let theory = hs_verdict_theory(m, &op);
            let g = hs_growth(m, &op, &radii).unwrap();
            match theory {
                Verdict::DivergesPower { exponent } => {
                    let beta = g.fitted_exponent.unwrap();
                    assert!(
                        (beta - exponent).abs() <= 0.1 * exponent,
                        "{} a={a}: {beta} vs {exponent}",
                        m.name()
                    );
                    assert!(g.verdict.is_divergent());
                }
                other => assert_eq!(g.verdict, other, "{} a={a}", m.name()),
            }
        }
    }
}

#[test]
fn composing_with_order_zero_keeps_the_verdict() {
    let radii = geometric_radii(8.0, 2.0, 6);
    let window = BumpWindow::new(vec![1.0, 2.0], PI / 2.0).unwrap();
    let specs = [
        OperatorSpec::multiplier(-1.5),
        OperatorSpec::Sandwich {
            s: -0.4,
            cutoff: Cutoff::Bump(window),
            varsigma_weight: 0.5,
        },
    ];
    for op in specs {
        let base = hs_growth(t2(), &op, &radii).unwrap().verdict;
        assert_eq!(base, Verdict::Converges, "{op:?}");
        for composed in [op.compose_left(0.0), op.compose_right(0.0, 2)] {
            assert_eq!(
                hs_growth(t2(), &composed, &radii).unwrap().verdict,
                base,
                "{composed:?}"
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn partial_sums_are_nonnegative_and_nondecreasing(a in -3.0f64..1.0, which in 0usize..3) {
        let m = [ManifoldSpec::Circle, t2(), ManifoldSpec::Sphere2][which];
        let radii = geometric_radii(1.0, 1.5, 12);
        let sums = hs_partial_sums(m, &OperatorSpec::multiplier(a), &radii).unwrap();
        prop_assert!(sums[0] >= 0.0);
        prop_assert!(sums.windows(2).all(|w| w[1] >= w[0]));
    }
}
