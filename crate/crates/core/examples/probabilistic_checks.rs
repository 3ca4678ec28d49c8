//! Monte Carlo checks of the energy identity and classical inequalities for a damped noise.

use spectral_noise::noise::DampingSchedule;
use spectral_noise::probab::{
    cauchy_in_probability_check, energy_identity_check, final_statistic_quantiles, kahane_khintchine_ratio,
    levy_maximal_check, paley_zygmund_check, symmetrization_check, TrialPlan,
};
use spectral_noise::spectra::ManifoldSpec;

fn main() -> spectral_noise::Result<()> {
    let plan = TrialPlan::new(DampingSchedule::power(1.0, 0.5)?, ManifoldSpec::Circle, 255, 1000, 8);
    let radii = final_statistic_quantiles(&plan, &[0.25, 0.5, 0.75])?;
    let reports = [
        energy_identity_check(&plan, 0.0)?,
        kahane_khintchine_ratio(&plan, 4.0)?,
        paley_zygmund_check(&plan, &[0.0, 0.25, 0.5, 0.75])?,
        levy_maximal_check(&plan, &radii)?,
        cauchy_in_probability_check(&plan, -0.5, 0.2)?,
        symmetrization_check(&plan)?,
    ];
    for r in &reports {
        println!(
            "{}: {} ({})",
            r.check,
            if r.pass { "holds" } else { "violated" },
            r.note
        );
        for row in &r.rows {
            println!(
                "  {}: statistic {:.4}, bound {:.4}, slack {:.4}",
                row.label, row.statistic, row.bound, row.slack
            );
        }
    }
    Ok(())
}
