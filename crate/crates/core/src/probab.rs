//! Monte Carlo checks of moment identities and tail inequalities for random series.
//!
//! Every check draws trial `t` from `derive_seed(base_seed, t)` and reduces the
//! collected per-trial values in trial order, so reports do not depend on the
//! thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hsdiag::{BumpWindow, Window};
use crate::microlocal::{local_norm, probe_grid};
use crate::noise::{
    derive_seed, rerandomize_signs, sample_coefficients, threshold_of, CoefficientVector, DampingSchedule,
};
use crate::sobolev::{dyadic_checkpoints, expected_energy, sobolev_norm_sq};
use crate::spectra::{eigenvalues, synthesize, Grid, ManifoldSpec};

pub const MIN_TRIALS: usize = 30;
/// Multiplier of the sampling standard error allowed in one-sided comparisons.
pub const SLACK_SE: f64 = 3.0;

/// The scalar recorded per trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Statistic {
    SobolevNorm { s: f64 },
    LocalNorm { window: BumpWindow, s: f64 },
}

impl Default for Statistic {
    fn default() -> Self {
        Statistic::SobolevNorm { s: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialPlan {
    pub schedule: DampingSchedule,
    pub manifold: ManifoldSpec,
    /// Highest ordinal of the partial sum.
    pub n: usize,
    pub trials: usize,
    pub base_seed: u64,
    #[serde(default)]
    pub statistic: Statistic,
}

impl TrialPlan {
    pub fn new(schedule: DampingSchedule, manifold: ManifoldSpec, n: usize, trials: usize, base_seed: u64) -> Self {
        TrialPlan {
            schedule,
            manifold,
            n,
            trials,
            base_seed,
            statistic: Statistic::default(),
        }
    }

    pub fn with_statistic(mut self, statistic: Statistic) -> Self {
        self.statistic = statistic;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.manifold.validate()?;
        if self.trials < MIN_TRIALS {
            return Err(Error::Rejected(format!(
                "{} trials is below the minimum of {MIN_TRIALS}",
                self.trials
            )));
        }
        if let Statistic::LocalNorm { window, .. } = &self.statistic {
            window.validate()?;
            if !self.manifold.is_flat() || window.dim() != self.manifold.dim() {
                return Err(Error::Unsupported(
                    "local norms need a torus of the window's dimension".into(),
                ));
            }
        }
        Ok(())
    }

    fn require_centered(&self) -> Result<()> {
        if !self.schedule.is_centered() {
            return Err(Error::Rejected("this check needs zero-mean coefficients".into()));
        }
        Ok(())
    }

    fn degenerate(&self) -> bool {
        self.schedule
            .sigmas(self.manifold, self.n + 1)
            .iter()
            .all(|&s| s == 0.0)
            && self.schedule.means(self.n + 1).iter().all(|&m| m == 0.0)
    }

    fn seed(&self, index: usize) -> u64 {
        derive_seed(self.base_seed, index as u64)
    }

    fn sample(&self, index: usize) -> Result<CoefficientVector> {
        sample_coefficients(&self.schedule, self.manifold, self.n, self.seed(index))
    }

    fn evaluate(&self, coeffs: &CoefficientVector) -> Result<f64> {
        match &self.statistic {
            Statistic::SobolevNorm { s } => Ok(sobolev_norm_sq(self.manifold, coeffs, *s).sqrt()),
            Statistic::LocalNorm { window, s } => local_norm(
                self.manifold,
                coeffs,
                &Window::Bump(window.clone()),
                *s,
                &probe_grid(self.manifold, self.n)?,
            ),
        }
    }

    /// Statistic values for trials `offset..offset + trials`.
    fn statistic_batch(&self, offset: usize) -> Result<Vec<f64>> {
        (offset..offset + self.trials)
            .into_par_iter()
            .map(|t| self.evaluate(&self.sample(t)?))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub label: String,
    pub parameter: f64,
    pub statistic: f64,
    pub bound: f64,
    pub slack: f64,
    pub count: Option<u64>,
    pub total: Option<u64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub check: String,
    pub trials: usize,
    pub rows: Vec<ReportRow>,
    pub pass: bool,
    /// All coefficients vanish; the check holds trivially.
    pub degenerate: bool,
    pub note: String,
}

impl InequalityReport {
    fn new(check: &str, trials: usize, rows: Vec<ReportRow>, note: String) -> Self {
        let pass = rows.iter().all(|r| r.pass);
        InequalityReport {
            check: check.into(),
            trials,
            rows,
            pass,
            degenerate: false,
            note,
        }
    }

    fn degenerate(check: &str, trials: usize) -> Self {
        InequalityReport {
            check: check.into(),
            trials,
            rows: Vec::new(),
            pass: true,
            degenerate: true,
            note: "all coefficients vanish".into(),
        }
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn binomial_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

fn count_above(v: &[f64], threshold: f64) -> u64 {
    v.iter().filter(|&&x| x > threshold).count() as u64
}

/// Empirical mean of `‖Φ_N‖²_{H^s}` against its exact expectation; passes iff `|z| ≤ 3`.
pub fn energy_identity_check(plan: &TrialPlan, s: f64) -> Result<InequalityReport> {
    plan.validate()?;
    plan.require_centered()?;
    const NAME: &str = "energy_identity";
    if plan.degenerate() {
        return Ok(InequalityReport::degenerate(NAME, plan.trials));
    }
    let z: Vec<f64> = (0..plan.trials)
        .into_par_iter()
        .map(|t| Ok(sobolev_norm_sq(plan.manifold, &plan.sample(t)?, s)))
        .collect::<Result<_>>()?;
    let m = mean(&z);
    let var = z.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (z.len() - 1) as f64;
    let se = (var / z.len() as f64).sqrt();
    let exact = expected_energy(&plan.schedule, plan.manifold, s, plan.n);
    let score = if se > 0.0 {
        (m - exact) / se
    } else if m == exact {
        0.0
    } else {
        f64::INFINITY
    };
    let row = ReportRow {
        label: format!("s={s}"),
        parameter: s,
        statistic: m,
        bound: exact,
        slack: SLACK_SE * se,
        count: None,
        total: Some(plan.trials as u64),
        pass: score.abs() <= SLACK_SE,
    };
    Ok(InequalityReport::new(
        NAME,
        plan.trials,
        vec![row],
        format!("z = {score:.4}"),
    ))
}

fn kk_ratio(x: &[f64], p: f64) -> f64 {
    let mp = x.iter().map(|v| v.abs().powf(p)).sum::<f64>() / x.len() as f64;
    let m2 = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
    if m2 == 0.0 {
        return 1.0;
    }
    mp.powf(1.0 / p) / m2.sqrt()
}

/// `(E X^p)^{1/p} / (E X²)^{1/2}` for `X = ‖Φ_N‖` on two disjoint seed batches.
pub fn kahane_khintchine_ratio(plan: &TrialPlan, p: f64) -> Result<InequalityReport> {
    plan.validate()?;
    plan.require_centered()?;
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("p must lie in [1, ∞), got {p}")));
    }
    const NAME: &str = "kahane_khintchine";
    if plan.degenerate() {
        return Ok(InequalityReport::degenerate(NAME, plan.trials));
    }
    let a = kk_ratio(&plan.statistic_batch(0)?, p);
    let b = kk_ratio(&plan.statistic_batch(plan.trials)?, p);
    let center = 0.5 * (a + b);
    let stable = (a - b).abs() <= 0.1 * center;
    let in_range = |r: f64| {
        if p < 2.0 {
            r > 0.0 && r <= 1.0 + 1e-12
        } else if p > 2.0 {
            r >= 1.0 - 1e-12
        } else {
            (r - 1.0).abs() <= 1e-12
        }
    };
    let rows = [("batch_a", a), ("batch_b", b)]
        .into_iter()
        .map(|(label, r)| ReportRow {
            label: label.into(),
            parameter: p,
            statistic: r,
            bound: 1.0,
            slack: 0.1 * center,
            count: None,
            total: Some(plan.trials as u64),
            pass: in_range(r) && stable,
        })
        .collect();
    Ok(InequalityReport::new(
        NAME,
        plan.trials,
        rows,
        format!("batch ratios {a:.5} and {b:.5}; stability band ±10%"),
    ))
}

/// `P[Z > θ·EZ] ≥ (1-θ)²(EZ)²/E[Z²]` with `Z = ‖Φ_N‖²`, up to three binomial standard errors.
pub fn paley_zygmund_check(plan: &TrialPlan, theta_grid: &[f64]) -> Result<InequalityReport> {
    plan.validate()?;
    plan.require_centered()?;
    if theta_grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(Error::InvalidParameter("θ values must lie in [0, 1]".into()));
    }
    const NAME: &str = "paley_zygmund";
    if plan.degenerate() {
        return Ok(InequalityReport::degenerate(NAME, plan.trials));
    }
    let z: Vec<f64> = plan.statistic_batch(0)?.iter().map(|x| x * x).collect();
    let m1 = mean(&z);
    let m2 = z.iter().map(|x| x * x).sum::<f64>() / z.len() as f64;
    let rows = theta_grid
        .iter()
        .map(|&theta| {
            let count = count_above(&z, theta * m1);
            let p = count as f64 / z.len() as f64;
            let bound = (1.0 - theta).powi(2) * m1 * m1 / m2;
            let slack = SLACK_SE * binomial_se(bound, z.len());
            ReportRow {
                label: format!("theta={theta}"),
                parameter: theta,
                statistic: p,
                bound,
                slack,
                count: Some(count),
                total: Some(z.len() as u64),
                pass: p >= bound - slack,
            }
        })
        .collect();
    Ok(InequalityReport::new(
        NAME,
        plan.trials,
        rows,
        "P[Z > θ·mean] against (1-θ)²·mean²/E[Z²]".into(),
    ))
}

/// Running maximum of the statistic over prefixes `Φ_0, …, Φ_N`, and the final value.
fn prefix_max_and_final(plan: &TrialPlan, coeffs: &CoefficientVector) -> Result<(f64, f64)> {
    match &plan.statistic {
        Statistic::SobolevNorm { s } => {
            let lambdas = eigenvalues(plan.manifold, coeffs.len());
            let mut acc = 0.0f64;
            let mut best = 0.0f64;
            for (a, l) in coeffs.values.iter().zip(&lambdas) {
                acc += a * a * (1.0 + l).powf(*s);
                best = best.max(acc);
            }
            Ok((best.sqrt(), acc.sqrt()))
        }
        Statistic::LocalNorm { window, s } => {
            if *s != 0.0 {
                return Err(Error::Unsupported(
                    "prefix maxima of local norms are implemented for s = 0".into(),
                ));
            }
            let grid = probe_grid(plan.manifold, plan.n)?;
            let Grid::TorusUniform { sizes } = &grid else {
                unreachable!()
            };
            let chi = window.on_grid(sizes);
            let cell = plan.manifold.volume() / chi.len() as f64;
            let mut field = vec![0.0; chi.len()];
            let mut best = 0.0f64;
            let mut last = 0.0f64;
            let mut unit = vec![0.0; coeffs.len()];
            for (n, &a) in coeffs.values.iter().enumerate() {
                if a != 0.0 {
                    unit[n] = a;
                    let phi = synthesize(
                        plan.manifold,
                        &CoefficientVector::from_values(plan.manifold, unit[..=n].to_vec()),
                        &grid,
                    )?;
                    unit[n] = 0.0;
                    for (f, v) in field.iter_mut().zip(&phi.values) {
                        *f += v;
                    }
                }
                last = field.iter().zip(&chi).map(|(f, c)| (f * c).powi(2)).sum::<f64>() * cell;
                best = best.max(last);
            }
            Ok((best.sqrt(), last.sqrt()))
        }
    }
}

/// `P[max_{N₀≤N} ‖Φ_{N₀}‖ > R] ≤ 2·P[‖Φ_N‖ > R]` up to three binomial standard errors, per `R`.
pub fn levy_maximal_check(plan: &TrialPlan, r_grid: &[f64]) -> Result<InequalityReport> {
    plan.validate()?;
    plan.require_centered()?;
    const NAME: &str = "levy_maximal";
    let pairs: Vec<(f64, f64)> = (0..plan.trials)
        .into_par_iter()
        .map(|t| prefix_max_and_final(plan, &plan.sample(t)?))
        .collect::<Result<_>>()?;
    let maxima: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let finals: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let total = plan.trials;
    let rows = r_grid
        .iter()
        .map(|&r| {
            let c_max = count_above(&maxima, r);
            let c_fin = count_above(&finals, r);
            let p_max = c_max as f64 / total as f64;
            let p_fin = c_fin as f64 / total as f64;
            let slack = SLACK_SE * (binomial_se(p_max, total).powi(2) + 4.0 * binomial_se(p_fin, total).powi(2)).sqrt();
            // R = 0 counts every path, so both sides are 1
            let (p_max, p_fin, c_max, c_fin) = if r <= 0.0 {
                (1.0, 1.0, total as u64, total as u64)
            } else {
                (p_max, p_fin, c_max, c_fin)
            };
            ReportRow {
                label: format!("R={r}; count_final={c_fin}"),
                parameter: r,
                statistic: p_max,
                bound: 2.0 * p_fin,
                slack,
                count: Some(c_max),
                total: Some(total as u64),
                pass: p_max <= 2.0 * p_fin + slack,
            }
        })
        .collect();
    let note = match plan.statistic {
        Statistic::SobolevNorm { .. } => {
            "coefficient-space norms grow monotonically along partial sums, so the maximum is attained at N".into()
        }
        Statistic::LocalNorm { .. } => "local L² norms of prefixes evaluated on the probe grid".into(),
    };
    Ok(InequalityReport::new(NAME, plan.trials, rows, note))
}

/// Empirical quantiles of the plan's statistic at truncation `N`, for choosing radii.
pub fn final_statistic_quantiles(plan: &TrialPlan, qs: &[f64]) -> Result<Vec<f64>> {
    plan.validate()?;
    if let Some(q) = qs.iter().find(|q| !(0.0..=1.0).contains(*q)) {
        return Err(Error::InvalidParameter(format!("quantile {q} outside [0, 1]")));
    }
    let mut v = plan.statistic_batch(0)?;
    v.sort_by(f64::total_cmp);
    let last = (v.len() - 1) as f64;
    Ok(qs
        .iter()
        .map(|&q| {
            let pos = q * last;
            let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
            v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Convergent,
    Divergent,
}

/// `sup_{N' ≥ N} P[‖Φ_{N'} - Φ_N‖_{H^s} > δ]` over dyadic `N < N_max`.
pub fn cauchy_in_probability_check(plan: &TrialPlan, s: f64, delta: f64) -> Result<InequalityReport> {
    plan.validate()?;
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::InvalidParameter("δ must be positive".into()));
    }
    const NAME: &str = "cauchy_in_probability";
    if plan.degenerate() {
        return Ok(InequalityReport::degenerate(NAME, plan.trials));
    }
    let ladder: Vec<usize> = dyadic_checkpoints(plan.n, usize::BITS as usize)
        .into_iter()
        .filter(|&n| n >= 1)
        .collect();
    if ladder.len() < 3 {
        return Err(Error::InvalidParameter("N is too small for a dyadic ladder".into()));
    }
    let lambdas = eigenvalues(plan.manifold, ladder.last().unwrap() + 1);
    let cumulative: Vec<Vec<f64>> = (0..plan.trials)
        .into_par_iter()
        .map(|t| {
            let c = plan.sample(t)?;
            let mut acc = 0.0;
            let mut out = Vec::with_capacity(ladder.len());
            let mut next = 0;
            for &cp in &ladder {
                for (v, lam) in c.values[next..=cp].iter().zip(&lambdas[next..=cp]) {
                    acc += v * v * (1.0 + lam).powf(s);
                }
                next = cp + 1;
                out.push(acc);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let regime = if s < threshold_of(&plan.schedule, plan.manifold) {
        Regime::Convergent
    } else {
        Regime::Divergent
    };
    let d2 = delta * delta;
    let total = plan.trials;
    let mut probs = Vec::new();
    let mut counts = Vec::new();
    for i in 0..ladder.len() - 1 {
        let (mut best, mut best_count) = (0.0, 0u64);
        for j in i + 1..ladder.len() {
            let c = cumulative.iter().filter(|v| v[j] - v[i] > d2).count() as u64;
            let p = c as f64 / total as f64;
            if p > best || j == i + 1 {
                best = p;
                best_count = c;
            }
        }
        probs.push(best);
        counts.push(best_count);
    }
    let rows: Vec<ReportRow> = probs
        .iter()
        .zip(&counts)
        .enumerate()
        .map(|(i, (&p, &c))| {
            let se = binomial_se(p, total);
            let pass = match regime {
                Regime::Convergent => probs[..i]
                    .iter()
                    .all(|&q| p <= q + SLACK_SE * (se.powi(2) + binomial_se(q, total).powi(2)).sqrt()),
                Regime::Divergent => p >= 0.5,
            };
            ReportRow {
                label: format!("N={}", ladder[i]),
                parameter: ladder[i] as f64,
                statistic: p,
                bound: if regime == Regime::Convergent { 0.05 } else { 0.5 },
                slack: SLACK_SE * se,
                count: Some(c),
                total: Some(total as u64),
                pass,
            }
        })
        .collect();
    let mut report = InequalityReport::new(
        NAME,
        plan.trials,
        rows,
        format!(
            "regime {:?}, δ = {delta}, dyadic N up to {}",
            regime,
            ladder.last().unwrap()
        ),
    );
    if regime == Regime::Convergent && probs.last().is_some_and(|&p| p >= 0.05) {
        report.pass = false;
    }
    Ok(report)
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a - F_b|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// 1% critical value of the two-sample KS statistic.
pub fn ks_critical_1pct(n: usize, m: usize) -> f64 {
    1.628 * ((n + m) as f64 / (n * m) as f64).sqrt()
}

/// Compares `‖Φ_N‖` for one seed batch against an independent batch with rerandomized signs.
pub fn symmetrization_check(plan: &TrialPlan) -> Result<InequalityReport> {
    plan.validate()?;
    plan.require_centered()?;
    const NAME: &str = "symmetrization";
    if plan.degenerate() {
        return Ok(InequalityReport::degenerate(NAME, plan.trials));
    }
    let t = plan.trials;
    let original = plan.statistic_batch(0)?;
    let flipped: Vec<f64> = (t..2 * t)
        .into_par_iter()
        .map(|i| plan.evaluate(&rerandomize_signs(&plan.sample(i)?, plan.seed(i + t))?))
        .collect::<Result<_>>()?;
    let d = ks_two_sample(&original, &flipped);
    let crit = ks_critical_1pct(t, t);
    let row = ReportRow {
        label: "ks".into(),
        parameter: t as f64,
        statistic: d,
        bound: crit,
        slack: 0.0,
        count: None,
        total: Some(2 * t as u64),
        pass: d < crit,
    };
    Ok(InequalityReport::new(
        NAME,
        t,
        vec![row],
        "two-sample KS at the 1% level".into(),
    ))
}
