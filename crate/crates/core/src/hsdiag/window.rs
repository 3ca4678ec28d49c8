use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;

/// `exp(1 - 1/(1-t²))` on `|t| < 1`, zero elsewhere; equals 1 at `t = 0`.
pub fn bump_profile(t: f64) -> f64 {
    let t2 = t * t;
    if t2 >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t2)).exp()
    }
}

/// Periodic distance on `(ℝ/2πℤ)^d`.
pub fn torus_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = (x - y).rem_euclid(2.0 * PI);
            let d = d.min(2.0 * PI - d);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Smooth radial bump on a torus, supported in the ball of radius `halfwidth` around `center`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpWindow {
    pub center: Vec<f64>,
    pub halfwidth: f64,
}

impl BumpWindow {
    pub fn new(center: Vec<f64>, halfwidth: f64) -> Result<Self> {
        let w = BumpWindow { center, halfwidth };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.halfwidth > 0.0 && self.halfwidth < PI) {
            return Err(Error::InvalidParameter(format!(
                "window halfwidth must lie in (0, π), got {}",
                self.halfwidth
            )));
        }
        if self.center.is_empty() || self.center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("window center must be a finite point".into()));
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        bump_profile(torus_distance(x, &self.center) / self.halfwidth)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Values on a uniform torus grid, row-major.
    pub fn on_grid(&self, sizes: &[usize]) -> Vec<f64> {
        let total: usize = sizes.iter().product();
        let mut x = vec![0.0; sizes.len()];
        (0..total)
            .map(|flat| {
                let mut rem = flat;
                for a in (0..sizes.len()).rev() {
                    x[a] = 2.0 * PI * (rem % sizes[a]) as f64 / sizes[a] as f64;
                    rem /= sizes[a];
                }
                self.eval(&x)
            })
            .collect()
    }

    pub fn translated(&self, offset: &[f64]) -> Self {
        BumpWindow {
            center: self.center.iter().zip(offset).map(|(c, o)| c + o).collect(),
            halfwidth: self.halfwidth,
        }
    }
}

/// Spatial factor of a local operator: either a bump or the constant 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Window {
    Unit,
    Bump(BumpWindow),
}

impl Window {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Window::Unit => 1.0,
            Window::Bump(b) => b.eval(x),
        }
    }

    pub fn on_grid(&self, sizes: &[usize]) -> Vec<f64> {
        match self {
            Window::Unit => vec![1.0; sizes.iter().product()],
            Window::Bump(b) => b.on_grid(sizes),
        }
    }
}

/// Fourier coefficients `β(j) = (2π)^{-d} ∫ b(|x|/h) e^{-ij·x} dx` of a bump centered
/// at the origin, stored on the box `|j|_∞ ≤ radius`. They are real and even.
#[derive(Clone, Debug)]
pub struct FourierProfile {
    pub dim: usize,
    pub radius: usize,
    pub values: Vec<f64>,
}

impl FourierProfile {
    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn get(&self, j: &[i64]) -> f64 {
        let r = self.radius as i64;
        if j.iter().any(|c| c.abs() > r) {
            return 0.0;
        }
        let side = self.side();
        let idx = j.iter().fold(0usize, |acc, &c| acc * side + (c + r) as usize);
        self.values[idx]
    }

    /// Smallest radius outside which every coefficient is below `tol·β(0)`.
    pub fn effective_radius(&self, tol: f64) -> usize {
        let r = self.radius as i64;
        let side = self.side();
        let cutoff = tol * self.values[self.values.len() / 2].abs();
        let mut radius = 0usize;
        for (flat, v) in self.values.iter().enumerate() {
            if v.abs() <= cutoff {
                continue;
            }
            let mut rem = flat;
            let mut m = 0usize;
            for _ in 0..self.dim {
                m = m.max(((rem % side) as i64 - r).unsigned_abs() as usize);
                rem /= side;
            }
            radius = radius.max(m);
        }
        radius
    }

    pub fn truncated(&self, radius: usize) -> FourierProfile {
        let radius = radius.min(self.radius);
        let side = 2 * radius + 1;
        let total = side.pow(self.dim as u32);
        let mut j = vec![0i64; self.dim];
        let values = (0..total)
            .map(|flat| {
                let mut rem = flat;
                for a in (0..self.dim).rev() {
                    j[a] = (rem % side) as i64 - radius as i64;
                    rem /= side;
                }
                self.get(&j)
            })
            .collect();
        FourierProfile {
            dim: self.dim,
            radius,
            values,
        }
    }
}

/// Points per axis used to sample a bump before transforming it.
fn profile_grid(dim: usize) -> usize {
    match dim {
        1 => 1 << 14,
        2 => 1 << 10,
        3 => 1 << 7,
        _ => 1 << 5,
    }
}

/// Computes `β` by sampling the bump finely and transforming, then truncates it
/// where coefficients fall below `tol·β(0)`.
pub fn bump_fourier_profile(dim: usize, halfwidth: f64, tol: f64) -> Result<FourierProfile> {
    if !(halfwidth > 0.0 && halfwidth < PI) {
        return Err(Error::InvalidParameter(format!("halfwidth {halfwidth} outside (0, π)")));
    }
    let n = profile_grid(dim);
    let sizes = vec![n; dim];
    let window = BumpWindow {
        center: vec![0.0; dim],
        halfwidth,
    };
    let mut data: Vec<Complex64> = window
        .on_grid(&sizes)
        .into_iter()
        .map(|v| Complex64::new(v, 0.0))
        .collect();
    fft::forward(&mut data, &sizes);
    let total = data.len() as f64;
    let radius = n / 2 - 1;
    let side = 2 * radius + 1;
    let mut j = vec![0i64; dim];
    let mut bins = vec![0usize; dim];
    let values = (0..side.pow(dim as u32))
        .map(|flat| {
            let mut rem = flat;
            for a in (0..dim).rev() {
                j[a] = (rem % side) as i64 - radius as i64;
                rem /= side;
            }
            for (b, &c) in bins.iter_mut().zip(&j) {
                *b = fft::bin_of(c, n);
            }
            let plus = data[fft::flat_index(&bins, &sizes)].re;
            for (b, &c) in bins.iter_mut().zip(&j) {
                *b = fft::bin_of(-c, n);
            }
            0.5 * (plus + data[fft::flat_index(&bins, &sizes)].re) / total
        })
        .collect();
    let full = FourierProfile { dim, radius, values };
    let r = full.effective_radius(tol).max(1);
    if r + 1 >= radius {
        return Err(Error::Resolution(format!(
            "bump of halfwidth {halfwidth} needs more than {radius} Fourier modes per axis at tolerance {tol}"
        )));
    }
    Ok(full.truncated(r))
}
