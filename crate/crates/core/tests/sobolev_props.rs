use std::f64::consts::PI;

use proptest::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use spectral_noise::hsdiag::{fit_growth, Verdict};
use spectral_noise::noise::{sample_coefficients, DampingSchedule};
use spectral_noise::sobolev::{dyadic_checkpoints, expected_energy_partial_sums, sobolev_norm_sq};
use spectral_noise::spectra::{eigenvalue_of, synthesize, Grid, ManifoldSpec};

fn fft_2d(data: &mut [Complex64], n: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    for row in data.chunks_mut(n) {
        fft.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for c in 0..n {
        for r in 0..n {
            col[r] = data[r * n + c];
        }
        fft.process(&mut col);
        for r in 0..n {
            data[r * n + c] = col[r];
        }
    }
}

fn wavenumber(i: usize, n: usize) -> f64 {
    if i <= n / 2 {
        i as f64
    } else {
        i as f64 - n as f64
    }
}

#[test]
fn h2_norm_matches_grid_laplacian() {
    let m = ManifoldSpec::Torus { dim: 2 };
    let n = 64;
    for seed in 0..4 {
        let c = sample_coefficients(&DampingSchedule::white(), m, 199, seed).unwrap();
        let u = synthesize(m, &c, &Grid::torus(vec![n, n])).unwrap().values;
        let mut data: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_2d(&mut data, n, false);
        for r in 0..n {
            for q in 0..n {
                let k2 = wavenumber(r, n).powi(2) + wavenumber(q, n).powi(2);
                data[r * n + q] *= (1.0 + k2) / (n * n) as f64;
            }
        }
        fft_2d(&mut data, n, true);
        let cell = (2.0 * PI / n as f64).powi(2);
        let grid_norm: f64 = data.iter().map(|z| z.norm_sqr() * cell).sum();
        let exact = sobolev_norm_sq(m, &c, 2.0);
        assert!((grid_norm - exact).abs() <= 1e-6 * exact, "{grid_norm} vs {exact}");
    }
}

/// Asymptotic `λ_n / n^{2/d}` from the Weyl constant.
fn weyl_constant(m: ManifoldSpec) -> f64 {
    let d = m.dim() as f64;
    ((2.0 * PI).powf(d) / (m.ball_volume() * m.volume())).powf(2.0 / d)
}

fn manifold(i: usize) -> ManifoldSpec {
    [
        ManifoldSpec::Circle,
        ManifoldSpec::Torus { dim: 2 },
        ManifoldSpec::Torus { dim: 3 },
        ManifoldSpec::Sphere2,
    ][i]
}

proptest! {
    #[test]
    fn eigenvalue_and_index_weights_are_equivalent(which in 0usize..4, n in 0usize..=10_000, s in -2.0f64..2.0) {
        let m = manifold(which);
        let d = m.dim() as f64;
        let k = weyl_constant(m);
        let ratio = (1.0 + eigenvalue_of(m, n)).powf(s) / (1.0 + n as f64).powf(2.0 * s / d);
        let (a, b) = ((k / 4.0).powf(s), (4.0 * k).powf(s));
        let (c, big_c) = (a.min(b), a.max(b));
        prop_assert!(ratio >= c * (1.0 - 1e-12) && ratio <= big_c * (1.0 + 1e-12), "{} n={n} s={s}: {ratio} not in [{c}, {big_c}]", m.name());
    }
}

#[test]
fn energy_growth_follows_rate_law() {
    let checkpoints = dyadic_checkpoints((1 << 18) - 1, 8);
    let radii: Vec<f64> = checkpoints.iter().map(|&n| (n + 1) as f64).collect();
    for which in 0..4 {
        let m = manifold(which);
        let d = m.dim() as f64;
        for varsigma in [0.25, 0.5, 0.75] {
            let schedule = DampingSchedule::power(1.0, varsigma).unwrap();
            for s in [-0.5, 0.0, 0.5] {
                let sums = expected_energy_partial_sums(&schedule, m, s, &checkpoints).unwrap();
                let g = fit_growth(&radii, &sums).unwrap();
                let rate = 1.0 - 2.0 * varsigma + 2.0 * s / d;
                let label = format!("{} varsigma={varsigma} s={s} rate={rate}", m.name());
                if rate.abs() < 1e-12 {
                    assert_eq!(g.verdict, Verdict::DivergesLog, "{label}: {g:?}");
                } else if rate < 0.0 {
                    assert_eq!(g.verdict, Verdict::Converges, "{label}: {g:?}");
                } else {
                    let beta = g.fitted_exponent.unwrap();
                    assert!((beta - rate).abs() <= 0.05, "{label}: fitted {beta}");
                    assert!(matches!(g.verdict, Verdict::DivergesPower { .. }), "{label}");
                }
            }
        }
    }
}
