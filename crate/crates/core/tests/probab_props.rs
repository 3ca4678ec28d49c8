use spectral_noise::hsdiag::fit_growth;
use spectral_noise::noise::{threshold_of, DampingSchedule};
use spectral_noise::probab::{
    cauchy_in_probability_check, energy_identity_check, kahane_khintchine_ratio, levy_maximal_check,
    paley_zygmund_check, symmetrization_check, InequalityReport, TrialPlan,
};
use spectral_noise::sobolev::{dyadic_checkpoints, norm_trajectory};
use spectral_noise::spectra::ManifoldSpec;

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn white_energy_matches_its_expectation() {
    let plan = TrialPlan::new(DampingSchedule::white(), ManifoldSpec::Circle, 2000, 200, 77);
    for s in [-1.0, 0.0] {
        let r = energy_identity_check(&plan, s).unwrap();
        assert!(r.pass, "s={s}: {r:?}");
    }
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let plan = TrialPlan::new(
        DampingSchedule::power(1.0, 0.5).unwrap(),
        ManifoldSpec::Circle,
        120,
        200,
        5,
    );
    let run = || -> Vec<InequalityReport> {
        vec![
            energy_identity_check(&plan, 0.0).unwrap(),
            kahane_khintchine_ratio(&plan, 3.0).unwrap(),
            paley_zygmund_check(&plan, &[0.1, 0.5, 0.9]).unwrap(),
            levy_maximal_check(&plan, &[1.0, 2.0, 3.0]).unwrap(),
            cauchy_in_probability_check(&plan, -0.5, 0.3).unwrap(),
            symmetrization_check(&plan).unwrap(),
        ]
    };
    let one = serde_json::to_string(&in_pool(1, run)).unwrap();
    let eight = serde_json::to_string(&in_pool(8, run)).unwrap();
    assert_eq!(one, eight);
}

/// Convergence in probability and single-path convergence of the norm agree with the energy sums.
#[test]
fn convergence_modes_are_coherent() {
    let circle = ManifoldSpec::Circle;
    let checkpoints = dyadic_checkpoints((1 << 14) - 1, 8);
    let radii: Vec<f64> = checkpoints.iter().map(|&n| (n + 1) as f64).collect();
    let cases = [(1.0, 0.0), (0.5, -0.3), (0.5, 0.0), (0.5, 0.5)];
    for (varsigma, s) in cases {
        let schedule = DampingSchedule::power(1.0, varsigma).unwrap();
        let convergent = s < threshold_of(&schedule, circle);
        let plan = TrialPlan::new(schedule.clone(), circle, (1 << 14) - 1, 200, 31);
        let report = cauchy_in_probability_check(&plan, s, 0.5).unwrap();
        assert!(report.pass, "varsigma={varsigma} s={s}: {report:?}");
        let seeds = 40;
        let agreeing = (0..seeds)
            .filter(|&seed| {
                let traj = norm_trajectory(&schedule, circle, s, seed, &checkpoints).unwrap();
                let energy: Vec<f64> = traj.iter().map(|&(_, v)| v * v).collect();
                fit_growth(&radii, &energy).unwrap().verdict.is_divergent() != convergent
            })
            .count();
        assert!(
            agreeing * 100 >= 95 * seeds as usize,
            "varsigma={varsigma} s={s}: {agreeing}/{seeds}"
        );
    }
}
