//! Hilbert-Schmidt partial sums of multipliers and of a localized sandwich operator.

use std::f64::consts::PI;

use spectral_noise::hsdiag::{
    geometric_radii, hs_growth, hs_partial_sum, hs_verdict_theory, pi_coth_pi, weighted_hs_growth, BumpWindow, Cutoff,
    OperatorSpec,
};
use spectral_noise::noise::DampingSchedule;
use spectral_noise::spectra::ManifoldSpec;

fn main() -> spectral_noise::Result<()> {
    let circle = ManifoldSpec::Circle;
    let torus = ManifoldSpec::Torus { dim: 2 };
    let sum = hs_partial_sum(circle, &OperatorSpec::multiplier(-1.0), 1e4)?;
    println!("circle, order -1: S(1e4) = {sum:.6}, limit {:.6}", pi_coth_pi());

    let radii = geometric_radii(16.0, 2.0, 7);
    for a in [-1.5, -1.0, -0.5] {
        let op = OperatorSpec::multiplier(a);
        let g = hs_growth(torus, &op, &radii)?;
        println!(
            "torus, order {a}: fitted {} (theory {}), log-slope {:.3}",
            g.verdict.name(),
            hs_verdict_theory(torus, &op).name(),
            g.log_slope
        );
    }

    let schedule = DampingSchedule::power(1.0, 0.5)?;
    let window = BumpWindow::new(vec![PI, PI], PI / 2.0)?;
    for s in [-0.4, 0.0, 0.4] {
        let op = OperatorSpec::Sandwich {
            s,
            cutoff: Cutoff::Bump(window.clone()),
            varsigma_weight: 0.0,
        };
        let g = weighted_hs_growth(&schedule, torus, &op, &geometric_radii(8.0, 2.0, 6))?;
        println!("localized order {s} against power 1/2 noise: {}", g.verdict.name());
    }
    Ok(())
}
