//! Localized Sobolev thresholds at several window centers next to the global estimate.

use std::f64::consts::PI;

use spectral_noise::hsdiag::BumpWindow;
use spectral_noise::microlocal::local_threshold;
use spectral_noise::noise::DampingSchedule;
use spectral_noise::sobolev::estimate_threshold;
use spectral_noise::spectra::ManifoldSpec;

fn main() -> spectral_noise::Result<()> {
    let circle = ManifoldSpec::Circle;
    let schedule = DampingSchedule::power(1.0, 0.5)?;
    let grid = [-0.3, -0.2, -0.1, 0.0, 0.1];
    let global = estimate_threshold(&schedule, circle, &grid, (1 << 18) - 1, 8, 2)?;
    println!("global estimate {:.2}", global.s_star_hat);
    let checkpoints: Vec<usize> = (9..=14).map(|j| (1usize << j) - 1).collect();
    for center in [0.5, PI, 5.5] {
        let window = BumpWindow::new(vec![center], PI / 2.0)?;
        let r = local_threshold(&schedule, circle, &window, &grid, &checkpoints, 16, 4)?;
        println!(
            "window at {center:.3}: sampled {:.2}, deterministic {:.2}, routes agree {}",
            r.estimate.s_star_hat, r.deterministic.s_star_hat, r.agree
        );
    }
    Ok(())
}
