//! Coefficient laws and deterministic Gaussian sampling.
//!
//! A [`DampingSchedule`] fixes independent coefficients
//! `a_n ~ N(μ_n, σ_n²)`. Samples are drawn from a counter-based generator keyed
//! by `(seed, n)`, so every truncation of a sample is a prefix of every longer one.

mod rng;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::{mode_table, ManifoldSpec};

pub use rng::derive_seed;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Damping {
    /// `σ_n = c(1+n)^{-ς}`.
    Power { c: f64, varsigma: f64 },
    /// `σ_n = (1+λ_n)^{-1/2}`.
    MassiveGff,
    /// `σ_0 = 0`, `σ_n = λ_n^{-1/2}`.
    MasslessGff,
    /// `σ_n = 1`.
    White,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeanRule {
    Zero,
    /// `μ_n = c_mu (1+n)^{-q_mu}`.
    PowerMean {
        c_mu: f64,
        q_mu: f64,
    },
}

/// Law of the coefficient sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScheduleRepr", into = "ScheduleRepr")]
pub struct DampingSchedule {
    damping: Damping,
    mean_rule: MeanRule,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Variant {
    Power,
    MassiveGff,
    MasslessGff,
    White,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleRepr {
    variant: Variant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    varsigma: Option<f64>,
    #[serde(default = "zero_mean")]
    mean_rule: MeanRule,
}

fn zero_mean() -> MeanRule {
    MeanRule::Zero
}

impl TryFrom<ScheduleRepr> for DampingSchedule {
    type Error = Error;

    fn try_from(r: ScheduleRepr) -> Result<Self> {
        let damping = match r.variant {
            Variant::Power => Damping::Power {
                c: r.c.unwrap_or(1.0),
                varsigma: r
                    .varsigma
                    .ok_or_else(|| Error::Config("power schedule needs varsigma".into()))?,
            },
            other => {
                if r.c.is_some() || r.varsigma.is_some() {
                    return Err(Error::Config(format!("{other:?} schedule takes no c or varsigma")));
                }
                match other {
                    Variant::MassiveGff => Damping::MassiveGff,
                    Variant::MasslessGff => Damping::MasslessGff,
                    _ => Damping::White,
                }
            }
        };
        DampingSchedule::new(damping, r.mean_rule)
    }
}

impl From<DampingSchedule> for ScheduleRepr {
    fn from(s: DampingSchedule) -> Self {
        let (variant, c, varsigma) = match s.damping {
            Damping::Power { c, varsigma } => (Variant::Power, Some(c), Some(varsigma)),
            Damping::MassiveGff => (Variant::MassiveGff, None, None),
            Damping::MasslessGff => (Variant::MasslessGff, None, None),
            Damping::White => (Variant::White, None, None),
        };
        ScheduleRepr {
            variant,
            c,
            varsigma,
            mean_rule: s.mean_rule,
        }
    }
}

impl DampingSchedule {
    /// Validates parameters and the mean condition `q_mu > ς`.
    ///
    /// The GFF variants have manifold-dependent `ς = 1/d ≤ 1`, so their means
    /// are checked against the bound `ς ≤ 1` valid on every manifold.
    pub fn new(damping: Damping, mean_rule: MeanRule) -> Result<Self> {
        let varsigma_bound = match damping {
            Damping::Power { c, varsigma } => {
                if !(c >= 0.0 && c.is_finite()) || !varsigma.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "power schedule needs finite c ≥ 0 and finite ς, got c={c}, ς={varsigma}"
                    )));
                }
                varsigma
            }
            Damping::MassiveGff | Damping::MasslessGff => 1.0,
            Damping::White => 0.0,
        };
        if let MeanRule::PowerMean { c_mu, q_mu } = mean_rule {
            if !c_mu.is_finite() || !q_mu.is_finite() {
                return Err(Error::InvalidParameter("mean parameters must be finite".into()));
            }
            if c_mu != 0.0 && q_mu <= varsigma_bound {
                return Err(Error::InvalidParameter(format!(
                    "means must decay faster than the damping: need q_mu > {varsigma_bound}, got {q_mu}"
                )));
            }
        }
        Ok(DampingSchedule { damping, mean_rule })
    }

    pub fn power(c: f64, varsigma: f64) -> Result<Self> {
        Self::new(Damping::Power { c, varsigma }, MeanRule::Zero)
    }

    pub fn massive_gff() -> Self {
        DampingSchedule {
            damping: Damping::MassiveGff,
            mean_rule: MeanRule::Zero,
        }
    }

    pub fn massless_gff() -> Self {
        DampingSchedule {
            damping: Damping::MasslessGff,
            mean_rule: MeanRule::Zero,
        }
    }

    pub fn white() -> Self {
        DampingSchedule {
            damping: Damping::White,
            mean_rule: MeanRule::Zero,
        }
    }

    pub fn with_mean(self, mean_rule: MeanRule) -> Result<Self> {
        Self::new(self.damping, mean_rule)
    }

    pub fn damping(&self) -> Damping {
        self.damping
    }

    pub fn mean_rule(&self) -> MeanRule {
        self.mean_rule
    }

    pub fn is_centered(&self) -> bool {
        match self.mean_rule {
            MeanRule::Zero => true,
            MeanRule::PowerMean { c_mu, .. } => c_mu == 0.0,
        }
    }

    pub fn label(&self) -> String {
        match self.damping {
            Damping::Power { c, varsigma } => format!("power(c={c}, varsigma={varsigma})"),
            Damping::MassiveGff => "massive_gff".into(),
            Damping::MasslessGff => "massless_gff".into(),
            Damping::White => "white".into(),
        }
    }

    /// Whether `σ_n` depends on the eigenvalue rather than only the ordinal.
    pub fn uses_eigenvalues(&self) -> bool {
        matches!(self.damping, Damping::MassiveGff | Damping::MasslessGff)
    }

    /// `σ_n` given the eigenvalue `λ_n`.
    pub(crate) fn sigma_with_eigenvalue(&self, n: usize, lambda: f64) -> f64 {
        match self.damping {
            Damping::Power { c, varsigma } => c * (1.0 + n as f64).powf(-varsigma),
            Damping::MassiveGff => (1.0 + lambda).powf(-0.5),
            Damping::MasslessGff => {
                if n == 0 || lambda <= 0.0 {
                    0.0
                } else {
                    lambda.powf(-0.5)
                }
            }
            Damping::White => 1.0,
        }
    }

    pub fn mu_of(&self, n: usize) -> f64 {
        match self.mean_rule {
            MeanRule::Zero => 0.0,
            MeanRule::PowerMean { c_mu, q_mu } => c_mu * (1.0 + n as f64).powf(-q_mu),
        }
    }

    /// `σ_0..σ_{len-1}`.
    pub fn sigmas(&self, manifold: ManifoldSpec, len: usize) -> Vec<f64> {
        if self.uses_eigenvalues() {
            let table = mode_table(manifold, len);
            (0..len)
                .map(|n| self.sigma_with_eigenvalue(n, table.eigenvalues[n]))
                .collect()
        } else {
            (0..len).map(|n| self.sigma_with_eigenvalue(n, 0.0)).collect()
        }
    }

    pub fn means(&self, len: usize) -> Vec<f64> {
        (0..len).map(|n| self.mu_of(n)).collect()
    }
}

/// One realization `a_0..a_N` of the coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientVector {
    pub manifold: ManifoldSpec,
    pub values: Vec<f64>,
    pub seed: Option<u64>,
    pub schedule: Option<DampingSchedule>,
}

impl CoefficientVector {
    /// Deterministic coefficients with no sampling provenance.
    pub fn from_values(manifold: ManifoldSpec, values: Vec<f64>) -> Self {
        CoefficientVector {
            manifold,
            values,
            seed: None,
            schedule: None,
        }
    }

    /// Highest ordinal `N` present.
    pub fn truncation(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The first `len` coefficients, keeping provenance.
    pub fn prefix(&self, len: usize) -> Self {
        CoefficientVector {
            manifold: self.manifold,
            values: self.values[..len.min(self.values.len())].to_vec(),
            seed: self.seed,
            schedule: self.schedule.clone(),
        }
    }
}

pub fn sigma_of(schedule: &DampingSchedule, manifold: ManifoldSpec, n: usize) -> f64 {
    let lambda = if schedule.uses_eigenvalues() {
        crate::spectra::eigenvalue_of(manifold, n)
    } else {
        0.0
    };
    schedule.sigma_with_eigenvalue(n, lambda)
}

/// `ς` with `σ_n ≍ n^{-ς}`.
pub fn effective_varsigma(schedule: &DampingSchedule, manifold: ManifoldSpec) -> f64 {
    match schedule.damping {
        Damping::Power { varsigma, .. } => varsigma,
        Damping::MassiveGff | Damping::MasslessGff => 1.0 / manifold.dim() as f64,
        Damping::White => 0.0,
    }
}

/// Regularity threshold `s* = d(ς - 1/2)`.
pub fn threshold_of(schedule: &DampingSchedule, manifold: ManifoldSpec) -> f64 {
    manifold.dim() as f64 * (effective_varsigma(schedule, manifold) - 0.5)
}

const PARALLEL_MIN: usize = 8192;

/// Draws `a_n = μ_n + σ_n z_n` for `n = 0..=n_max`.
pub fn sample_coefficients(
    schedule: &DampingSchedule,
    manifold: ManifoldSpec,
    n_max: usize,
    seed: u64,
) -> Result<CoefficientVector> {
    manifold.validate()?;
    let len = n_max + 1;
    let sigmas = schedule.sigmas(manifold, len);
    let draw = |(n, &sigma): (usize, &f64)| {
        let mu = schedule.mu_of(n);
        if sigma == 0.0 {
            mu
        } else {
            mu + sigma * rng::standard_normal(seed, n)
        }
    };
    let values: Vec<f64> = if len >= PARALLEL_MIN {
        sigmas.par_iter().enumerate().map(draw).collect()
    } else {
        sigmas.iter().enumerate().map(draw).collect()
    };
    Ok(CoefficientVector {
        manifold,
        values,
        seed: Some(seed),
        schedule: Some(schedule.clone()),
    })
}

/// `a_n ↦ ε_n a_n` with independent fair signs keyed by `(sign_seed, n)`.
pub fn rerandomize_signs(coeffs: &CoefficientVector, sign_seed: u64) -> Result<CoefficientVector> {
    if let Some(schedule) = &coeffs.schedule {
        if !schedule.is_centered() {
            return Err(Error::Rejected(
                "sign rerandomization needs symmetric coefficients, schedule has nonzero means".into(),
            ));
        }
    }
    let values = coeffs
        .values
        .iter()
        .enumerate()
        .map(|(n, &a)| rng::sign(sign_seed, n) * a)
        .collect();
    Ok(CoefficientVector {
        values,
        ..coeffs.clone()
    })
}
