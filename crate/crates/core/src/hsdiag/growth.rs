//! Classification of partial-sum sequences by the growth of their increments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slopes within this distance of zero count as logarithmic growth.
pub const EXPONENT_TOL: f64 = 0.05;
/// RMS of log-space residuals above which a fit is reported inconclusive.
pub const RESIDUAL_TOL: f64 = 0.3;
/// Increments below this fraction of the largest partial sum count as zero.
pub const ZERO_INCREMENT_REL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    Converges,
    DivergesLog,
    DivergesPower { exponent: f64 },
}

impl Verdict {
    pub fn is_divergent(&self) -> bool {
        !matches!(self, Verdict::Converges)
    }

    pub fn from_exponent(beta: f64) -> Self {
        if beta < -EXPONENT_TOL {
            Verdict::Converges
        } else if beta <= EXPONENT_TOL {
            Verdict::DivergesLog
        } else {
            Verdict::DivergesPower { exponent: beta }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Converges => "converges",
            Verdict::DivergesLog => "diverges_log",
            Verdict::DivergesPower { .. } => "diverges_power",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub radii: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// `S(R_{j+1}) - S(R_j)`, one per consecutive pair.
    pub increments: Vec<f64>,
    /// Fitted slope of `log ΔS` against `log R`.
    pub fitted_exponent: Option<f64>,
    pub standard_error: Option<f64>,
    pub residual_rms: f64,
    /// Least-squares slope of `S` against `ln R`.
    pub log_slope: f64,
    pub verdict: Verdict,
    pub inconclusive: bool,
}

/// Least-squares line `y = a + b x`; returns `(a, b, residuals)`.
pub(crate) fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, Vec<f64>) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let a = my - b * mx;
    let res = x.iter().zip(y).map(|(xi, yi)| yi - a - b * xi).collect();
    (a, b, res)
}

/// Fits the increments of `partial_sums` over at least five geometric radii.
pub fn fit_growth(radii: &[f64], partial_sums: &[f64]) -> Result<GrowthReport> {
    if radii.len() != partial_sums.len() {
        return Err(Error::InvalidParameter(format!(
            "{} radii for {} partial sums",
            radii.len(),
            partial_sums.len()
        )));
    }
    if radii.len() < 5 {
        return Err(Error::InvalidParameter(format!(
            "growth fits need at least 5 radii, got {}",
            radii.len()
        )));
    }
    if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "radii must be positive and strictly increasing".into(),
        ));
    }
    if partial_sums.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidParameter("partial sums must be finite".into()));
    }

    let increments: Vec<f64> = partial_sums.windows(2).map(|w| w[1] - w[0]).collect();
    let log_r: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let (_, log_slope, _) = least_squares(&log_r, partial_sums);
    let scale = partial_sums.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    let floor = ZERO_INCREMENT_REL * scale;

    let (xs, ys): (Vec<f64>, Vec<f64>) = increments
        .iter()
        .zip(&log_r)
        .filter(|(d, _)| **d > floor)
        .map(|(d, x)| (*x, d.ln()))
        .unzip();
    let trailing_zero = increments.last().is_none_or(|d| *d <= floor);

    let (fitted_exponent, standard_error, residual_rms) = if xs.len() >= 2 {
        let (_, b, res) = least_squares(&xs, &ys);
        let m = xs.len() as f64;
        let ss: f64 = res.iter().map(|r| r * r).sum();
        let mx = xs.iter().sum::<f64>() / m;
        let sxx: f64 = xs.iter().map(|v| (v - mx).powi(2)).sum();
        let se = (xs.len() > 2).then(|| (ss / (m - 2.0) / sxx).sqrt());
        (Some(b), se, (ss / m).sqrt())
    } else {
        (None, None, 0.0)
    };

    let verdict = match fitted_exponent {
        Some(b) if !trailing_zero => Verdict::from_exponent(b),
        _ => Verdict::Converges,
    };
    let inconclusive = if trailing_zero {
        false
    } else {
        xs.len() < 3 || residual_rms > RESIDUAL_TOL
    };

    Ok(GrowthReport {
        radii: radii.to_vec(),
        partial_sums: partial_sums.to_vec(),
        increments,
        fitted_exponent,
        standard_error,
        residual_rms,
        log_slope,
        verdict,
        inconclusive,
    })
}

/// Geometric radii `base·ratio^j`, `j = 0..count`.
pub fn geometric_radii(base: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|j| base * ratio.powi(j as i32)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dyadic(n: usize) -> Vec<f64> {
        geometric_radii(4.0, 2.0, n)
    }

    #[test]
    fn constant_converges() {
        let r = dyadic(8);
        let g = fit_growth(&r, &[7.0; 8]).unwrap();
        assert_eq!(g.verdict, Verdict::Converges);
        assert!(!g.inconclusive);
        assert_eq!(g.fitted_exponent, None);
    }

    #[test]
    fn logarithm_is_log_divergent() {
        let r = dyadic(8);
        let s: Vec<f64> = r.iter().map(|x| x.ln()).collect();
        let g = fit_growth(&r, &s).unwrap();
        assert_eq!(g.verdict, Verdict::DivergesLog);
        assert!((g.log_slope - 1.0).abs() < 1e-12);
    }

    #[test]
    fn square_root_exponent() {
        let r = dyadic(8);
        let s: Vec<f64> = r.iter().map(|x| x.sqrt()).collect();
        let g = fit_growth(&r, &s).unwrap();
        match g.verdict {
            Verdict::DivergesPower { exponent } => assert!((exponent - 0.5).abs() < 0.05),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn geometric_decay_converges() {
        let r = dyadic(10);
        let s: Vec<f64> = r.iter().map(|x| 3.0 - x.powf(-0.7)).collect();
        let g = fit_growth(&r, &s).unwrap();
        assert_eq!(g.verdict, Verdict::Converges);
        assert!((g.fitted_exponent.unwrap() + 0.7).abs() < 1e-9);
    }

    #[test]
    fn noisy_increments_are_flagged() {
        let r = dyadic(8);
        let inc = [1.0, 50.0, 0.02, 30.0, 0.1, 80.0, 0.01];
        let mut s = vec![0.0];
        for d in inc {
            s.push(s.last().unwrap() + d);
        }
        assert!(fit_growth(&r, &s).unwrap().inconclusive);
    }

    #[test]
    fn input_validation() {
        assert!(fit_growth(&[1.0, 2.0, 4.0, 8.0], &[0.0; 4]).is_err());
        assert!(fit_growth(&[1.0, 2.0, 2.0, 8.0, 16.0], &[0.0; 5]).is_err());
        assert!(fit_growth(&dyadic(5), &[0.0; 6]).is_err());
    }

    proptest! {
        #[test]
        fn recovers_power_exponents(beta in 0.1f64..2.0, c in 0.1f64..100.0) {
            let r = dyadic(9);
            let s: Vec<f64> = r.iter().map(|x| c * x.powf(beta)).collect();
            let g = fit_growth(&r, &s).unwrap();
            prop_assert!((g.fitted_exponent.unwrap() - beta).abs() < 1e-9);
            prop_assert!(g.verdict.is_divergent());
        }
    }
}
