//! Cone probe of one noise sample at a point and direction along its partial sums.

use std::f64::consts::PI;

use spectral_noise::microlocal::{default_cutoff, probe_trajectory};
use spectral_noise::noise::DampingSchedule;
use spectral_noise::spectra::ManifoldSpec;

fn main() -> spectral_noise::Result<()> {
    let torus = ManifoldSpec::Torus { dim: 2 };
    let schedule = DampingSchedule::power(1.0, 0.5)?;
    let cutoff = default_cutoff(vec![PI, PI], vec![1.0, 1.0])?;
    let checkpoints: Vec<usize> = (8..=14).map(|j| (1usize << j) - 1).collect();
    for s in [-0.5, 0.5] {
        let r = probe_trajectory(&schedule, torus, &cutoff, s, 3, &checkpoints)?;
        println!("s = {s}: {}", r.growth.verdict.name());
        for (n, p) in r.checkpoints.iter().zip(&r.probe_norms) {
            println!("  N = {n:>6}: probe norm {p:.5}");
        }
    }
    Ok(())
}
