//! Estimates the Sobolev regularity threshold of several noises from energy growth.

use spectral_noise::noise::{threshold_of, DampingSchedule};
use spectral_noise::sobolev::threshold_report;
use spectral_noise::spectra::ManifoldSpec;

fn main() -> spectral_noise::Result<()> {
    let cases = [
        (DampingSchedule::power(1.0, 0.5)?, ManifoldSpec::Circle),
        (DampingSchedule::massive_gff(), ManifoldSpec::Torus { dim: 2 }),
        (DampingSchedule::white(), ManifoldSpec::Sphere2),
    ];
    for (schedule, m) in cases {
        let theory = threshold_of(&schedule, m);
        let grid: Vec<f64> = (-3..=2).map(|i| theory + 0.1 * i as f64).collect();
        let report = threshold_report(&schedule, m, &grid, (1 << 18) - 1, 8, 1)?;
        let e = &report.estimate;
        println!(
            "{} on {}: estimate {:.2}, theory {theory:.2}",
            schedule.label(),
            m.name(),
            e.s_star_hat
        );
        for (s, v) in e.s_grid.iter().zip(&e.verdicts) {
            println!("  s = {s:+.2}: {}", v.name());
        }
    }
    Ok(())
}
