//! Eigenvalue counts against the Weyl prediction on each model manifold.

use spectral_noise::spectra::{counting_function, weyl_prediction, ManifoldSpec};

fn main() -> spectral_noise::Result<()> {
    let manifolds = [
        ManifoldSpec::Circle,
        ManifoldSpec::Torus { dim: 2 },
        ManifoldSpec::Torus { dim: 3 },
        ManifoldSpec::Sphere2,
    ];
    println!(
        "{:>8} {:>10} {:>12} {:>14} {:>8}",
        "manifold", "lambda", "count", "prediction", "ratio"
    );
    for m in manifolds {
        for lambda in [1e2, 1e3, 1e4] {
            let count = counting_function(m, lambda)?;
            let prediction = weyl_prediction(m, lambda);
            println!(
                "{:>8} {lambda:>10} {count:>12} {prediction:>14.1} {:>8.4}",
                m.name(),
                count as f64 / prediction
            );
        }
    }
    Ok(())
}
