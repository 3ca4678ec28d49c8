//! Quadrature Gram matrix of the first eigenmodes and an analysis round trip.

use spectral_noise::noise::CoefficientVector;
use spectral_noise::spectra::{analyze, enumerate_modes, synthesize, Grid, ManifoldSpec};

fn main() -> spectral_noise::Result<()> {
    let m = ManifoldSpec::Sphere2;
    let grid = Grid::sphere(32, 64);
    let count = 50;
    for mode in enumerate_modes(m, 6)? {
        println!("mode {} eigenvalue {} {:?}", mode.ordinal, mode.eigenvalue, mode.label);
    }
    let weights = grid.quadrature_weights();
    let fields: Vec<Vec<f64>> = (0..count)
        .map(|n| {
            let mut e = vec![0.0; count];
            e[n] = 1.0;
            Ok(synthesize(m, &CoefficientVector::from_values(m, e), &grid)?.values)
        })
        .collect::<spectral_noise::Result<_>>()?;
    let mut worst: f64 = 0.0;
    for i in 0..count {
        for j in 0..=i {
            let g: f64 = weights
                .iter()
                .zip(&fields[i])
                .zip(&fields[j])
                .map(|((w, a), b)| w * a * b)
                .sum();
            worst = worst.max((g - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    println!("max |G - I| over {count} modes: {worst:e}");

    let coeffs = CoefficientVector::from_values(m, (0..count).map(|n| 1.0 / (1.0 + n as f64)).collect());
    let back = analyze(m, &synthesize(m, &coeffs, &grid)?, count)?;
    let err = coeffs
        .values
        .iter()
        .zip(&back.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("analysis round-trip error: {err:e}");
    Ok(())
}
