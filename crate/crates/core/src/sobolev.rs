//! Coefficient-space Sobolev norms, expected energies and threshold estimation.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hsdiag::{fit_growth, GrowthReport, Verdict};
use crate::noise::{derive_seed, sample_coefficients, CoefficientVector, DampingSchedule};
use crate::spectra::{eigenvalues, ManifoldSpec};

/// `Σ (1+λ_n)^s |a_n|²`.
pub fn sobolev_norm_sq(manifold: ManifoldSpec, coeffs: &CoefficientVector, s: f64) -> f64 {
    if coeffs.is_empty() {
        return 0.0;
    }
    if s == 0.0 {
        return coeffs.values.iter().map(|a| a * a).sum();
    }
    let lambdas = eigenvalues(manifold, coeffs.len());
    coeffs
        .values
        .iter()
        .zip(&lambdas)
        .map(|(a, l)| (1.0 + l).powf(s) * a * a)
        .sum()
}

/// `Σ (1+n)^{2ς} |a_n|²`.
pub fn hseq_norm_sq(seq: &[f64], varsigma: f64) -> f64 {
    seq.iter()
        .enumerate()
        .map(|(n, a)| (1.0 + n as f64).powf(2.0 * varsigma) * a * a)
        .sum()
}

pub fn hseq_norm_sq_complex(seq: &[Complex64], varsigma: f64) -> f64 {
    seq.iter()
        .enumerate()
        .map(|(n, a)| (1.0 + n as f64).powf(2.0 * varsigma) * a.norm_sqr())
        .sum()
}

/// `(μ_n² + σ_n²)(1+λ_n)^s` for `n = 0..len`.
fn energy_terms(schedule: &DampingSchedule, manifold: ManifoldSpec, s: f64, len: usize) -> Vec<f64> {
    let sigmas = schedule.sigmas(manifold, len);
    let lambdas = eigenvalues(manifold, len);
    sigmas
        .iter()
        .zip(&lambdas)
        .enumerate()
        .map(|(n, (sig, l))| {
            let mu = schedule.mu_of(n);
            (mu * mu + sig * sig) * (1.0 + l).powf(s)
        })
        .collect()
}

/// `E‖Φ_N‖²_{H^s} = Σ_{n≤N} (μ_n² + σ_n²)(1+λ_n)^s`.
pub fn expected_energy(schedule: &DampingSchedule, manifold: ManifoldSpec, s: f64, n: usize) -> f64 {
    energy_terms(schedule, manifold, s, n + 1).iter().sum()
}

/// `E‖Φ_N‖²_{H^s}` at each checkpoint `N`, which must be increasing.
pub fn expected_energy_partial_sums(
    schedule: &DampingSchedule,
    manifold: ManifoldSpec,
    s: f64,
    checkpoints: &[usize],
) -> Result<Vec<f64>> {
    check_increasing(checkpoints)?;
    let Some(&last) = checkpoints.last() else {
        return Ok(Vec::new());
    };
    let terms = energy_terms(schedule, manifold, s, last + 1);
    Ok(cumulative_at(&terms, checkpoints))
}

fn check_increasing(checkpoints: &[usize]) -> Result<()> {
    if checkpoints.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("checkpoints must be increasing".into()));
    }
    Ok(())
}

/// `Σ_{n≤N} terms[n]` for each checkpoint, summed in ordinal order.
fn cumulative_at(terms: &[f64], checkpoints: &[usize]) -> Vec<f64> {
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut acc = 0.0;
    let mut next = 0;
    for &c in checkpoints {
        for t in &terms[next..=c] {
            acc += t;
        }
        next = c + 1;
        out.push(acc);
    }
    out
}

/// `(N, ‖Φ_N‖_{H^s})` along one sample path.
pub fn norm_trajectory(
    schedule: &DampingSchedule,
    manifold: ManifoldSpec,
    s: f64,
    seed: u64,
    checkpoints: &[usize],
) -> Result<Vec<(usize, f64)>> {
    check_increasing(checkpoints)?;
    let Some(&last) = checkpoints.last() else {
        return Ok(Vec::new());
    };
    let sq = sample_energy_partial_sums(schedule, manifold, s, seed, checkpoints, last)?;
    Ok(checkpoints.iter().zip(sq).map(|(&n, e)| (n, e.sqrt())).collect())
}

fn sample_energy_partial_sums(
    schedule: &DampingSchedule,
    manifold: ManifoldSpec,
    s: f64,
    seed: u64,
    checkpoints: &[usize],
    last: usize,
) -> Result<Vec<f64>> {
    let coeffs = sample_coefficients(schedule, manifold, last, seed)?;
    let lambdas = eigenvalues(manifold, last + 1);
    let terms: Vec<f64> = coeffs
        .values
        .iter()
        .zip(&lambdas)
        .map(|(a, l)| a * a * (1.0 + l).powf(s))
        .collect();
    Ok(cumulative_at(&terms, checkpoints))
}

/// Ordinal checkpoints `2^j - 1` for the last `count` powers of two with `2^j ≤ n_max + 1`.
pub fn dyadic_checkpoints(n_max: usize, count: usize) -> Vec<usize> {
    let top = (usize::BITS - 1 - (n_max + 1).leading_zeros()) as usize;
    let bottom = top.saturating_sub(count.saturating_sub(1));
    (bottom..=top).map(|j| (1usize << j) - 1).collect()
}

/// Dyadic checkpoints used by threshold estimates: from `2^4` (or ten octaves below the top) up.
pub fn threshold_checkpoints(n_max: usize) -> Result<Vec<usize>> {
    let top = (usize::BITS - 1 - (n_max + 1).leading_zeros()) as usize;
    let bottom = top.saturating_sub(10).max(4);
    if top < bottom + 4 {
        return Err(Error::InvalidParameter(format!(
            "N_max = {n_max} is too small for five dyadic checkpoints from 2^4"
        )));
    }
    Ok((bottom..=top).map(|j| (1usize << j) - 1).collect())
}

pub(crate) fn checkpoint_radii(checkpoints: &[usize]) -> Vec<f64> {
    checkpoints.iter().map(|&n| (n + 1) as f64).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub s_star_hat: f64,
    pub s_grid: Vec<f64>,
    /// `Converges` is reported as bounded.
    pub verdicts: Vec<Verdict>,
    pub exponents: Vec<Option<f64>>,
    pub residuals: Vec<f64>,
    /// Per-s flag: fit residuals too large, or the two routes disagree.
    pub inconclusive: Vec<bool>,
    pub method: String,
    /// Verdicts are not of the form bounded…bounded, divergent…divergent.
    pub non_monotone: bool,
    /// The grid does not contain both a bounded and a divergent value.
    pub unbracketed: bool,
}

impl ThresholdEstimate {
    pub fn any_inconclusive(&self) -> bool {
        self.non_monotone || self.unbracketed || self.inconclusive.iter().any(|&b| b)
    }
}

fn check_grid(s_grid: &[f64]) -> Result<()> {
    if s_grid.is_empty() {
        return Err(Error::InvalidParameter("s grid is empty".into()));
    }
    if s_grid.iter().any(|s| !s.is_finite()) || s_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "s grid must be finite and strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Turns per-s growth fits into a threshold: the grid value just above the largest bounded `s`.
pub fn summarize_threshold(s_grid: &[f64], fits: &[GrowthReport], method: &str) -> Result<ThresholdEstimate> {
    check_grid(s_grid)?;
    if fits.len() != s_grid.len() {
        return Err(Error::InvalidParameter(
            "one growth fit per grid value is required".into(),
        ));
    }
    let verdicts: Vec<Verdict> = fits.iter().map(|g| g.verdict).collect();
    let div: Vec<bool> = verdicts.iter().map(|v| v.is_divergent()).collect();
    let non_monotone = div.windows(2).any(|w| w[0] && !w[1]);
    let unbracketed = div.iter().all(|&d| d) || div.iter().all(|&d| !d);
    let s_star_hat = match div.iter().rposition(|&d| !d) {
        None => s_grid[0],
        Some(i) if i + 1 < s_grid.len() => s_grid[i + 1],
        Some(i) => {
            let step = if i > 0 { s_grid[i] - s_grid[i - 1] } else { 0.0 };
            s_grid[i] + step
        }
    };
    Ok(ThresholdEstimate {
        s_star_hat,
        s_grid: s_grid.to_vec(),
        verdicts,
        exponents: fits.iter().map(|g| g.fitted_exponent).collect(),
        residuals: fits.iter().map(|g| g.residual_rms).collect(),
        inconclusive: fits.iter().map(|g| g.inconclusive).collect(),
        method: method.to_string(),
        non_monotone,
        unbracketed,
    })
}

/// A bounded verdict against a power-law divergent one. Logarithmic growth is
/// compatible with either, since sampling noise blurs a zero exponent.
fn strongly_disagree(a: &Verdict, b: &Verdict) -> bool {
    matches!(
        (a, b),
        (Verdict::Converges, Verdict::DivergesPower { .. }) | (Verdict::DivergesPower { .. }, Verdict::Converges)
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub estimate: ThresholdEstimate,
    pub checkpoints: Vec<usize>,
    pub trials: usize,
    /// Fits of `E‖Φ_N‖²_{H^s}`, one per grid value.
    pub expected_fits: Vec<GrowthReport>,
    /// Fits of trial-averaged `‖Φ_N‖²_{H^s}`, one per grid value.
    pub sample_fits: Vec<GrowthReport>,
}

/// Classifies each `s` by the growth of `E‖Φ_N‖²_{H^s}` over dyadic `N`, then
/// validates the classification against trial-averaged sample energies.
pub fn estimate_threshold(
    schedule: &DampingSchedule,
    manifold: ManifoldSpec,
    s_grid: &[f64],
    n_max: usize,
    trials: usize,
    seed: u64,
) -> Result<ThresholdEstimate> {
    Ok(threshold_report(schedule, manifold, s_grid, n_max, trials, seed)?.estimate)
}

pub fn threshold_report(
    schedule: &DampingSchedule,
    manifold: ManifoldSpec,
    s_grid: &[f64],
    n_max: usize,
    trials: usize,
    seed: u64,
) -> Result<ThresholdReport> {
    check_grid(s_grid)?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let checkpoints = threshold_checkpoints(n_max)?;
    let last = *checkpoints.last().unwrap();
    let radii = checkpoint_radii(&checkpoints);
    let expected_fits = s_grid
        .iter()
        .map(|&s| {
            fit_growth(
                &radii,
                &expected_energy_partial_sums(schedule, manifold, s, &checkpoints)?,
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let per_trial: Vec<Vec<Vec<f64>>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let coeffs = sample_coefficients(schedule, manifold, last, derive_seed(seed, t as u64))?;
            let lambdas = eigenvalues(manifold, last + 1);
            Ok(s_grid
                .iter()
                .map(|&s| {
                    let terms: Vec<f64> = coeffs
                        .values
                        .iter()
                        .zip(&lambdas)
                        .map(|(a, l)| a * a * (1.0 + l).powf(s))
                        .collect();
                    cumulative_at(&terms, &checkpoints)
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let sample_fits = (0..s_grid.len())
        .map(|si| {
            let avg: Vec<f64> = (0..checkpoints.len())
                .map(|j| per_trial.iter().map(|t| t[si][j]).sum::<f64>() / trials as f64)
                .collect();
            fit_growth(&radii, &avg)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut estimate = summarize_threshold(s_grid, &expected_fits, "expected_energy+sample_average")?;
    for (i, (e, m)) in expected_fits.iter().zip(&sample_fits).enumerate() {
        if strongly_disagree(&e.verdict, &m.verdict) {
            estimate.inconclusive[i] = true;
        }
    }
    Ok(ThresholdReport {
        estimate,
        checkpoints,
        trials,
        expected_fits,
        sample_fits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hsdiag::pi_coth_pi;
    use proptest::prelude::*;

    fn unit(manifold: ManifoldSpec, len: usize, n: usize) -> CoefficientVector {
        let mut v = vec![0.0; len];
        v[n] = 1.0;
        CoefficientVector::from_values(manifold, v)
    }

    #[test]
    fn trivial_norms() {
        let c = CoefficientVector::from_values(ManifoldSpec::Circle, vec![1.0, -2.0, 3.0]);
        assert_eq!(sobolev_norm_sq(ManifoldSpec::Circle, &c, 0.0), 14.0);
        // ordinal 4 on the sphere is l = 2, λ = 6
        assert_eq!(
            sobolev_norm_sq(ManifoldSpec::Sphere2, &unit(ManifoldSpec::Sphere2, 9, 4), 1.0),
            7.0
        );
        assert_eq!(hseq_norm_sq(&[1.0, 2.0], 0.0), 5.0);
        assert_eq!(hseq_norm_sq(&[0.0, 0.0, 0.0, 1.0], 1.0), 16.0);
        let z = [Complex64::new(0.0, 0.0), Complex64::new(3.0, 4.0)];
        assert_eq!(hseq_norm_sq_complex(&z, 0.5), 50.0);
    }

    #[test]
    fn white_energy_counts_modes() {
        for n in [0, 7, 100] {
            assert_eq!(
                expected_energy(&DampingSchedule::white(), ManifoldSpec::Sphere2, 0.0, n),
                (n + 1) as f64
            );
        }
    }

    #[test]
    fn massive_gff_circle_energy() {
        let s = DampingSchedule::massive_gff();
        let n = 2_000_000;
        let e = expected_energy(&s, ManifoldSpec::Circle, 0.0, n);
        // tail ≈ 2 Σ_{k>K} k^{-2} ≈ 2/K with K = n/2
        let tail = 2.0 / (n as f64 / 2.0);
        assert!((e + tail - pi_coth_pi()).abs() < 1e-9, "{e}");
        assert!((pi_coth_pi() - 3.15334).abs() < 1e-5);
    }

    #[test]
    fn power_half_energy_is_logarithmic() {
        let s = DampingSchedule::power(1.0, 0.5).unwrap();
        let cps: Vec<usize> = (10..=17).map(|j| 1usize << j).collect();
        let sums = expected_energy_partial_sums(&s, ManifoldSpec::Circle, 0.0, &cps).unwrap();
        let r: Vec<f64> = cps.iter().map(|&n| n as f64).collect();
        let slope = fit_growth(&r, &sums).unwrap().log_slope;
        // Σ 1/(1+n) ~ ln N
        assert!((slope - 1.0).abs() < 0.1, "{slope}");
    }

    #[test]
    fn zero_schedule_trajectory() {
        let s = DampingSchedule::power(0.0, 1.0).unwrap();
        let t = norm_trajectory(&s, ManifoldSpec::Circle, 0.5, 3, &[1, 10, 100]).unwrap();
        assert!(t.iter().all(|(_, v)| *v == 0.0));
        assert!(norm_trajectory(&s, ManifoldSpec::Circle, 0.5, 3, &[10, 10]).is_err());
    }

    #[test]
    fn trajectory_is_prefix_stable() {
        let s = DampingSchedule::power(1.0, 0.7).unwrap();
        let a = norm_trajectory(&s, ManifoldSpec::Circle, -0.2, 11, &[10, 100]).unwrap();
        let b = norm_trajectory(&s, ManifoldSpec::Circle, -0.2, 11, &[10, 100, 1000]).unwrap();
        assert_eq!(a[..], b[..2]);
    }

    #[test]
    fn power_one_trajectory_converges() {
        let s = DampingSchedule::power(1.0, 1.0).unwrap();
        let t = norm_trajectory(&s, ManifoldSpec::Circle, 0.0, 5, &[10_000, 100_000]).unwrap();
        assert!((t[1].1 - t[0].1).abs() < 0.01 * t[1].1);
    }

    #[test]
    fn checkpoint_layouts() {
        assert_eq!(dyadic_checkpoints(1023, 5), vec![63, 127, 255, 511, 1023]);
        assert_eq!(dyadic_checkpoints(1500, 3), vec![255, 511, 1023]);
        assert_eq!(
            threshold_checkpoints(1 << 10).unwrap(),
            vec![15, 31, 63, 127, 255, 511, 1023]
        );
        assert_eq!(threshold_checkpoints((1 << 20) - 1).unwrap().len(), 11);
        assert!(threshold_checkpoints(200).is_err());
    }

    #[test]
    fn summary_rules() {
        let r = vec![1.0, 2.0, 4.0, 8.0, 16.0];
        let bounded = fit_growth(&r, &[1.0; 5]).unwrap();
        let div = fit_growth(&r, &r.iter().map(|x| x.ln()).collect::<Vec<_>>()).unwrap();
        let g = [-0.3, -0.1, 0.0, 0.1];
        let e = summarize_threshold(&g, &[bounded.clone(), bounded.clone(), div.clone(), div.clone()], "t").unwrap();
        assert_eq!(e.s_star_hat, 0.0);
        assert!(!e.any_inconclusive());
        let e = summarize_threshold(&g, &[div.clone(), bounded.clone(), div.clone(), div.clone()], "t").unwrap();
        assert!(e.non_monotone);
        let e = summarize_threshold(&g, &[bounded.clone(), bounded.clone(), bounded.clone(), bounded], "t").unwrap();
        assert!(e.unbracketed);
        assert!((e.s_star_hat - 0.2).abs() < 1e-12);
        assert!(summarize_threshold(&[0.0, -1.0], &[div.clone(), div], "t").is_err());
    }

    #[test]
    fn power_half_circle_threshold() {
        let s = DampingSchedule::power(1.0, 0.5).unwrap();
        let e = estimate_threshold(&s, ManifoldSpec::Circle, &[-0.3, -0.1, 0.0, 0.1], 1 << 16, 8, 1).unwrap();
        assert_eq!(e.s_star_hat, 0.0, "{e:?}");
        assert!(!e.verdicts[1].is_divergent() && e.verdicts[2].is_divergent());
    }

    proptest! {
        #[test]
        fn norm_monotone_in_s(vals in proptest::collection::vec(-5.0f64..5.0, 1..60), s in -2.0f64..2.0, ds in 0.0f64..1.0) {
            let c = CoefficientVector::from_values(ManifoldSpec::Sphere2, vals);
            let a = sobolev_norm_sq(ManifoldSpec::Sphere2, &c, s);
            let b = sobolev_norm_sq(ManifoldSpec::Sphere2, &c, s + ds);
            prop_assert!(b >= a * (1.0 - 1e-12));
        }
    }
}
