//! Probe exponents over a small set of positions and directions on the flat torus.

use std::f64::consts::PI;

use spectral_noise::microlocal::{planar_directions, uniformity_scan_multi, ScanTemplate};
use spectral_noise::noise::DampingSchedule;
use spectral_noise::spectra::ManifoldSpec;

fn main() -> spectral_noise::Result<()> {
    let torus = ManifoldSpec::Torus { dim: 2 };
    let schedule = DampingSchedule::power(1.0, 0.5)?;
    let positions = vec![vec![PI / 2.0, PI / 2.0], vec![3.0 * PI / 2.0, PI]];
    let directions = planar_directions(4);
    let checkpoints: Vec<usize> = (8..=14).map(|j| (1usize << j) - 1).collect();
    let reports = uniformity_scan_multi(
        &schedule,
        torus,
        &positions,
        &directions,
        &[0.5, -0.5],
        11,
        &checkpoints,
        8,
        &ScanTemplate::default(),
    )?;
    for r in reports {
        println!(
            "s = {}: all divergent {}, all bounded {}, exponent spread {:.3}",
            r.s, r.all_divergent, r.all_bounded, r.spread
        );
        for c in &r.cells {
            println!(
                "  x0 {:?} direction {:?}: {}",
                c.position,
                c.direction,
                c.verdict.name()
            );
        }
    }
    Ok(())
}
