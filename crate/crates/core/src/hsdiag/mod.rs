//! Hilbert–Schmidt diagnostics for multipliers, bump multiplications and
//! microlocal sandwiches `⟨D⟩^s ∘ Op(χ) ∘ ⟨D⟩^{-dς}`.
//!
//! `⟨D⟩^a` denotes `(1+Δ)^{a/2}`, diagonal on every eigenbasis. `Op(χ)` is left
//! quantized: multiply by the spatial window, then filter in frequency.

mod growth;
mod window;

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;
use crate::microlocal::ConeCutoff;
use crate::noise::{CoefficientVector, DampingSchedule};
use crate::spectra::{counting_function, grid::max_component, mode_table, Grid, ManifoldSpec, ModeLabel, Parity};

pub use growth::{fit_growth, geometric_radii, GrowthReport, Verdict, EXPONENT_TOL, RESIDUAL_TOL};
pub use window::{bump_fourier_profile, bump_profile, torus_distance, BumpWindow, FourierProfile, Window};

/// Relative cutoff for window Fourier coefficients in HS sums.
const BETA_TOL: f64 = 1e-7;
/// Work budget for the direct cos/sin cross-term sums.
const CROSS_TERM_BUDGET: usize = 40_000_000;

/// Frequency-side cutoff of a sandwich operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Cutoff {
    Cone(ConeCutoff),
    Bump(BumpWindow),
}

impl Cutoff {
    pub fn window(&self) -> &BumpWindow {
        match self {
            Cutoff::Cone(c) => &c.window,
            Cutoff::Bump(b) => b,
        }
    }

    pub fn cone(&self) -> Option<&ConeCutoff> {
        match self {
            Cutoff::Cone(c) => Some(c),
            Cutoff::Bump(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorSpec {
    /// Symbol `⟨ξ⟩^order`.
    FourierMultiplier {
        order: f64,
    },
    BumpMultiplication {
        window: BumpWindow,
    },
    Sandwich {
        s: f64,
        cutoff: Cutoff,
        varsigma_weight: f64,
    },
}

/// Operator reduced to `⟨D⟩^s ∘ χ̃(D) ∘ M_χ ∘ ⟨D⟩^{pre}` or a pure multiplier.
enum Parts<'a> {
    Diagonal {
        order: f64,
    },
    Windowed {
        window: &'a BumpWindow,
        cone: Option<&'a ConeCutoff>,
        s: f64,
        pre: f64,
    },
}

impl OperatorSpec {
    pub fn multiplier(order: f64) -> Self {
        OperatorSpec::FourierMultiplier { order }
    }

    /// Symbolic order on a manifold of dimension `dim`.
    pub fn order(&self, dim: usize) -> f64 {
        match self {
            OperatorSpec::FourierMultiplier { order } => *order,
            OperatorSpec::BumpMultiplication { .. } => 0.0,
            OperatorSpec::Sandwich { s, varsigma_weight, .. } => s - dim as f64 * varsigma_weight,
        }
    }

    /// `⟨D⟩^b ∘ self`.
    pub fn compose_left(&self, b: f64) -> Self {
        match self {
            OperatorSpec::FourierMultiplier { order } => OperatorSpec::FourierMultiplier { order: order + b },
            OperatorSpec::BumpMultiplication { window } => OperatorSpec::Sandwich {
                s: b,
                cutoff: Cutoff::Bump(window.clone()),
                varsigma_weight: 0.0,
            },
            OperatorSpec::Sandwich {
                s,
                cutoff,
                varsigma_weight,
            } => OperatorSpec::Sandwich {
                s: s + b,
                cutoff: cutoff.clone(),
                varsigma_weight: *varsigma_weight,
            },
        }
    }

    /// `self ∘ ⟨D⟩^b` on a manifold of dimension `dim`.
    pub fn compose_right(&self, b: f64, dim: usize) -> Self {
        let shift = b / dim as f64;
        match self {
            OperatorSpec::FourierMultiplier { order } => OperatorSpec::FourierMultiplier { order: order + b },
            OperatorSpec::BumpMultiplication { window } => OperatorSpec::Sandwich {
                s: 0.0,
                cutoff: Cutoff::Bump(window.clone()),
                varsigma_weight: -shift,
            },
            OperatorSpec::Sandwich {
                s,
                cutoff,
                varsigma_weight,
            } => OperatorSpec::Sandwich {
                s: *s,
                cutoff: cutoff.clone(),
                varsigma_weight: varsigma_weight - shift,
            },
        }
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self, OperatorSpec::FourierMultiplier { .. })
    }

    fn parts(&self, manifold: ManifoldSpec) -> Parts<'_> {
        let d = manifold.dim() as f64;
        match self {
            OperatorSpec::FourierMultiplier { order } => Parts::Diagonal { order: *order },
            OperatorSpec::BumpMultiplication { window } => Parts::Windowed {
                window,
                cone: None,
                s: 0.0,
                pre: 0.0,
            },
            OperatorSpec::Sandwich {
                s,
                cutoff,
                varsigma_weight,
            } => Parts::Windowed {
                window: cutoff.window(),
                cone: cutoff.cone(),
                s: *s,
                pre: -d * varsigma_weight,
            },
        }
    }

    pub fn validate(&self, manifold: ManifoldSpec) -> Result<()> {
        let check_finite = |v: f64, what: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{what} must be finite")))
            }
        };
        match self {
            OperatorSpec::FourierMultiplier { order } => check_finite(*order, "order"),
            OperatorSpec::BumpMultiplication { window } => check_window(manifold, window),
            OperatorSpec::Sandwich {
                s,
                cutoff,
                varsigma_weight,
            } => {
                check_finite(*s, "s")?;
                check_finite(*varsigma_weight, "varsigma_weight")?;
                check_window(manifold, cutoff.window())?;
                if let Some(cone) = cutoff.cone() {
                    cone.validate(manifold.dim())?;
                }
                Ok(())
            }
        }
    }
}

fn check_window(manifold: ManifoldSpec, window: &BumpWindow) -> Result<()> {
    if !manifold.is_flat() {
        return Err(Error::Unsupported(
            "windowed operators are realized on flat manifolds only".into(),
        ));
    }
    window.validate()?;
    if window.dim() != manifold.dim() {
        return Err(Error::InvalidParameter(format!(
            "window center has {} coordinates, manifold has dimension {}",
            window.dim(),
            manifold.dim()
        )));
    }
    Ok(())
}

/// `(1+|m|²)^{s/2} χ̃(m)`.
pub(crate) fn symbol_weight(s: f64, cone: Option<&ConeCutoff>, m: &[f64]) -> f64 {
    let norm_sq: f64 = m.iter().map(|c| c * c).sum();
    let base = (1.0 + norm_sq).powf(0.5 * s);
    match cone {
        Some(c) => base * c.symbol(m),
        None => base,
    }
}

/// Complex coefficients against `e_k = Vol^{-1/2} e^{ik·x}` on the box `|k|_∞ ≤ radius`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeCoefficients {
    pub dim: usize,
    pub radius: usize,
    pub values: Vec<Complex64>,
}

impl LatticeCoefficients {
    pub fn zeros(dim: usize, radius: usize) -> Self {
        LatticeCoefficients {
            dim,
            radius,
            values: vec![Complex64::new(0.0, 0.0); (2 * radius + 1).pow(dim as u32)],
        }
    }

    fn index(&self, k: &[i64]) -> Option<usize> {
        let r = self.radius as i64;
        if k.len() != self.dim || k.iter().any(|c| c.abs() > r) {
            return None;
        }
        let side = 2 * self.radius + 1;
        Some(k.iter().fold(0usize, |acc, &c| acc * side + (c + r) as usize))
    }

    pub fn get(&self, k: &[i64]) -> Complex64 {
        self.index(k).map_or(Complex64::new(0.0, 0.0), |i| self.values[i])
    }

    pub fn set(&mut self, k: &[i64], v: Complex64) -> Result<()> {
        let i = self
            .index(k)
            .ok_or_else(|| Error::Domain(format!("{k:?} lies outside the coefficient box")))?;
        self.values[i] = v;
        Ok(())
    }

    /// Lattice vector of each stored entry, in storage order.
    pub fn frequencies(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        let side = 2 * self.radius + 1;
        let r = self.radius as i64;
        (0..self.values.len()).map(move |flat| {
            let mut k = vec![0i64; self.dim];
            let mut rem = flat;
            for a in (0..self.dim).rev() {
                k[a] = (rem % side) as i64 - r;
                rem /= side;
            }
            k
        })
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Complex form of a real-basis vector.
    pub fn from_real(coeffs: &CoefficientVector) -> Result<Self> {
        let manifold = coeffs.manifold;
        if !manifold.is_flat() {
            return Err(Error::Unsupported(
                "lattice coefficients exist on flat manifolds only".into(),
            ));
        }
        let radius = max_component(manifold, coeffs.len().max(1));
        let mut out = LatticeCoefficients::zeros(manifold.dim(), radius);
        let table = mode_table(manifold, coeffs.len().max(1));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for (mode, &a) in table.modes.iter().zip(&coeffs.values) {
            let ModeLabel::Lattice { k, parity } = &mode.label else {
                unreachable!()
            };
            let kp: Vec<i64> = k.iter().map(|&c| c as i64).collect();
            let km: Vec<i64> = kp.iter().map(|c| -c).collect();
            if kp.iter().all(|&c| c == 0) {
                let i = out.index(&kp).unwrap();
                out.values[i] += a;
                continue;
            }
            let (ip, im) = (out.index(&kp).unwrap(), out.index(&km).unwrap());
            match parity {
                Parity::Cos => {
                    out.values[ip] += a * h;
                    out.values[im] += a * h;
                }
                Parity::Sin => {
                    out.values[ip] += Complex64::new(0.0, -a * h);
                    out.values[im] += Complex64::new(0.0, a * h);
                }
            }
        }
        Ok(out)
    }

    /// Real-basis coefficients of the first `count` modes (real part of the field).
    pub fn to_real_basis(&self, manifold: ManifoldSpec, count: usize) -> Result<CoefficientVector> {
        let table = mode_table(manifold, count.max(1));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let values = table.modes[..count]
            .iter()
            .map(|mode| {
                let ModeLabel::Lattice { k, parity } = &mode.label else {
                    unreachable!()
                };
                let kp: Vec<i64> = k.iter().map(|&c| c as i64).collect();
                if kp.iter().all(|&c| c == 0) {
                    return Ok(self.get(&kp).re);
                }
                if self.index(&kp).is_none() {
                    return Err(Error::Resolution(format!(
                        "mode {} lies outside the output band of radius {}",
                        mode.ordinal, self.radius
                    )));
                }
                let km: Vec<i64> = kp.iter().map(|c| -c).collect();
                let (cp, cm) = (self.get(&kp), self.get(&km));
                Ok(match parity {
                    Parity::Cos => h * (cp + cm).re,
                    Parity::Sin => h * (cm - cp).im,
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(CoefficientVector::from_values(manifold, values))
    }
}

/// Output of [`apply_operator`]: coefficients on the grid's band plus the
/// fraction of windowed energy found in the outer eighth of the FFT box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AppliedOperator {
    pub output: LatticeCoefficients,
    pub leakage: f64,
}

fn torus_sizes(manifold: ManifoldSpec, grid: &Grid) -> Result<Vec<usize>> {
    if !manifold.is_flat() {
        return Err(Error::Unsupported("operators are applied on tori only".into()));
    }
    grid.check(manifold)?;
    match grid {
        Grid::TorusUniform { sizes } => Ok(sizes.clone()),
        Grid::SphereEquirect { .. } => unreachable!(),
    }
}

fn check_resolution(sizes: &[usize], k_in: usize) -> Result<()> {
    if let Some(&n) = sizes.iter().find(|&&n| n < 4 * k_in.max(1)) {
        return Err(Error::Resolution(format!(
            "grid size {n} is below 4× the input frequency {k_in}"
        )));
    }
    Ok(())
}

/// Coefficients `d_m` of `χ·u` against `e_m`, in FFT layout, for `u = Σ c_k e_k`.
pub(crate) fn windowed_lattice_spectrum(
    manifold: ManifoldSpec,
    input: &LatticeCoefficients,
    pre: f64,
    window: &Window,
    sizes: &[usize],
) -> Vec<Complex64> {
    let total: usize = sizes.iter().product();
    let volume = manifold.volume();
    let mut data = vec![Complex64::new(0.0, 0.0); total];
    let mut bins = vec![0usize; sizes.len()];
    for (k, c) in input.frequencies().zip(&input.values) {
        if c.norm_sqr() == 0.0 {
            continue;
        }
        let kf: Vec<f64> = k.iter().map(|&v| v as f64).collect();
        for ((b, &kc), &n) in bins.iter_mut().zip(&k).zip(sizes) {
            *b = fft::bin_of(kc, n);
        }
        data[fft::flat_index(&bins, sizes)] += c * symbol_weight(pre, None, &kf) / volume.sqrt();
    }
    fft::inverse(&mut data, sizes);
    multiply_and_transform(data, window, sizes, volume)
}

/// Same as [`windowed_lattice_spectrum`] for a real-basis coefficient vector.
pub(crate) fn windowed_real_spectrum(
    manifold: ManifoldSpec,
    values: &[f64],
    window: &Window,
    sizes: &[usize],
) -> Vec<Complex64> {
    let data = real_field_on_grid(manifold, values, sizes);
    multiply_and_transform(data, window, sizes, manifold.volume())
}

/// Samples of the real field `Σ a_n φ_n` on a uniform torus grid, stored as complex values.
pub(crate) fn real_field_on_grid(manifold: ManifoldSpec, values: &[f64], sizes: &[usize]) -> Vec<Complex64> {
    let mut data = crate::spectra::grid::scatter_flat(manifold, values, sizes);
    fft::inverse(&mut data, sizes);
    for c in data.iter_mut() {
        c.im = 0.0;
    }
    data
}

fn multiply_and_transform(data: Vec<Complex64>, window: &Window, sizes: &[usize], volume: f64) -> Vec<Complex64> {
    match window {
        Window::Unit => transform_windowed(data, None, sizes, volume),
        Window::Bump(b) => transform_windowed(data, Some(&b.on_grid(sizes)), sizes, volume),
    }
}

/// Coefficients `d_m` of `χ·f` from grid samples of `f` and, optionally, of `χ`.
pub(crate) fn transform_windowed(
    mut data: Vec<Complex64>,
    window_values: Option<&[f64]>,
    sizes: &[usize],
    volume: f64,
) -> Vec<Complex64> {
    if let Some(w) = window_values {
        for (c, w) in data.iter_mut().zip(w) {
            *c *= w;
        }
    }
    fft::forward(&mut data, sizes);
    let scale = volume.sqrt() / data.len() as f64;
    for c in data.iter_mut() {
        *c *= scale;
    }
    data
}

/// Fraction of `Σ|d_m|²` with some `|m_i| ≥ 3n_i/8`.
pub(crate) fn leakage_fraction(spec: &[Complex64], sizes: &[usize]) -> f64 {
    let mut total = 0.0;
    let mut edge = 0.0;
    fft::for_each_frequency(sizes, |flat, m| {
        let e = spec[flat].norm_sqr();
        total += e;
        if m.iter()
            .zip(sizes)
            .any(|(&c, &n)| 8 * c.unsigned_abs() as usize >= 3 * n)
        {
            edge += e;
        }
    });
    if total > 0.0 {
        edge / total
    } else {
        0.0
    }
}

/// Applies `op` to `Σ c_k e_k` on a torus grid.
pub fn apply_operator_lattice(
    manifold: ManifoldSpec,
    op: &OperatorSpec,
    input: &LatticeCoefficients,
    grid: &Grid,
) -> Result<AppliedOperator> {
    let sizes = torus_sizes(manifold, grid)?;
    op.validate(manifold)?;
    if input.dim != manifold.dim() {
        return Err(Error::InvalidParameter(
            "input dimension does not match manifold".into(),
        ));
    }
    let k_in = input
        .frequencies()
        .zip(&input.values)
        .filter(|(_, c)| c.norm_sqr() > 0.0)
        .flat_map(|(k, _)| k.into_iter().map(|c| c.unsigned_abs() as usize))
        .max()
        .unwrap_or(0);
    check_resolution(&sizes, k_in)?;
    let radius = sizes.iter().map(|n| n / 2 - 1).min().unwrap();
    let mut output = LatticeCoefficients::zeros(manifold.dim(), radius);
    match op.parts(manifold) {
        Parts::Diagonal { order } => {
            for (k, c) in input.frequencies().zip(&input.values) {
                if c.norm_sqr() == 0.0 {
                    continue;
                }
                let kf: Vec<f64> = k.iter().map(|&v| v as f64).collect();
                output.set(&k, c * symbol_weight(order, None, &kf))?;
            }
            Ok(AppliedOperator { output, leakage: 0.0 })
        }
        Parts::Windowed { window, cone, s, pre } => {
            let spec = windowed_lattice_spectrum(manifold, input, pre, &Window::Bump(window.clone()), &sizes);
            let leakage = leakage_fraction(&spec, &sizes);
            let mut bins = vec![0usize; sizes.len()];
            let freqs: Vec<Vec<i64>> = output.frequencies().collect();
            for (m, v) in freqs.iter().zip(output.values.iter_mut()) {
                for ((b, &mc), &n) in bins.iter_mut().zip(m).zip(&sizes) {
                    *b = fft::bin_of(mc, n);
                }
                let mf: Vec<f64> = m.iter().map(|&c| c as f64).collect();
                *v = spec[fft::flat_index(&bins, &sizes)] * symbol_weight(s, cone, &mf);
            }
            Ok(AppliedOperator { output, leakage })
        }
    }
}

/// Applies `op` to the real field with coefficients `coeffs`.
pub fn apply_operator(
    manifold: ManifoldSpec,
    op: &OperatorSpec,
    coeffs: &CoefficientVector,
    grid: &Grid,
) -> Result<AppliedOperator> {
    if coeffs.manifold != manifold {
        return Err(Error::GridMismatch("coefficients belong to another manifold".into()));
    }
    let input = LatticeCoefficients::from_real(coeffs)?;
    apply_operator_lattice(manifold, op, &input, grid)
}

/// Distinct eigenvalues up to `lambda_max` with multiplicities, ascending.
pub(crate) fn spectrum_shells(manifold: ManifoldSpec, lambda_max: f64) -> Vec<(f64, usize)> {
    match manifold {
        ManifoldSpec::Sphere2 => (0u64..)
            .map(|l| ((l * (l + 1)) as f64, 2 * l as usize + 1))
            .take_while(|(lam, _)| *lam <= lambda_max)
            .collect(),
        m => {
            let bound = lambda_max.floor().max(0.0) as u64;
            let mut norms = Vec::new();
            collect_norms(m.dim(), bound, 0, &mut norms);
            norms.sort_unstable();
            let mut shells: Vec<(f64, usize)> = Vec::new();
            for v in norms {
                match shells.last_mut() {
                    Some((lam, c)) if *lam == v as f64 => *c += 1,
                    _ => shells.push((v as f64, 1)),
                }
            }
            shells
        }
    }
}

fn collect_norms(axes: usize, bound: u64, used: u64, out: &mut Vec<u64>) {
    if axes == 0 {
        out.push(used);
        return;
    }
    let r = crate::spectra::isqrt(bound - used) as i64;
    for c in -r..=r {
        collect_norms(axes - 1, bound, used + (c * c) as u64, out);
    }
}

fn lambda_limit(radius: f64) -> f64 {
    radius * radius * (1.0 + 1e-12)
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty() || radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) || radii.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::InvalidParameter("radii must be positive and increasing".into()));
    }
    Ok(())
}

/// `‖Lφ_n‖²` for every mode with `√λ_n ≤ radius`, by ordinal.
///
/// Uses `‖Lφ‖² = ⟨k⟩^{2pre}·½[A(k) + A(-k) ± 2cos(2k·x0) Y(k)]` where
/// `A(k) = Σ_m W(m) β(m-k)²`, `Y(k) = Σ_m W(m) β(m-k) β(m+k)`,
/// `W = ⟨m⟩^{2s} χ̃(m)²` and `β` are the window's Fourier coefficients.
fn windowed_mode_norms(
    manifold: ManifoldSpec,
    window: &BumpWindow,
    cone: Option<&ConeCutoff>,
    s: f64,
    pre: f64,
    radius: f64,
) -> Result<Vec<f64>> {
    let d = manifold.dim();
    let beta = bump_fourier_profile(d, window.halfwidth, BETA_TOL)?;
    let j = beta.radius as i64;
    let r = radius.ceil() as i64;
    let m_size = (2 * r + 4 * j + 1) as usize;
    let n = m_size.next_power_of_two();
    let sizes = vec![n; d];
    let total = n.pow(d as u32);

    let mut w_arr = vec![Complex64::new(0.0, 0.0); total];
    let mut b_arr = vec![Complex64::new(0.0, 0.0); total];
    fft::for_each_frequency(&sizes, |flat, m| {
        if m.iter().all(|c| c.abs() <= r + j) {
            let mf: Vec<f64> = m.iter().map(|&c| c as f64).collect();
            w_arr[flat] = Complex64::new(symbol_weight(s, cone, &mf).powi(2), 0.0);
        }
        if m.iter().all(|c| c.abs() <= j) {
            let b = beta.get(m);
            b_arr[flat] = Complex64::new(b * b, 0.0);
        }
    });
    fft::forward(&mut w_arr, &sizes);
    fft::forward(&mut b_arr, &sizes);
    for (a, b) in w_arr.iter_mut().zip(&b_arr) {
        *a *= b / total as f64;
    }
    drop(b_arr);
    fft::inverse(&mut w_arr, &sizes);
    let a_of = |k: &[i64]| -> f64 {
        let bins: Vec<usize> = k.iter().map(|&c| fft::bin_of(c, n)).collect();
        w_arr[fft::flat_index(&bins, &sizes)].re
    };

    // cross terms vanish once |k|_∞ exceeds the support of β; beyond a work budget
    // only the part of β above a coarser tolerance is kept
    let mut j_cross = beta.radius;
    for tol in [BETA_TOL, 1e-6, 1e-5, 1e-4, 1e-3] {
        j_cross = beta.effective_radius(tol);
        if (2 * j_cross + 1).pow(2 * d as u32) <= CROSS_TERM_BUDGET {
            break;
        }
    }
    let w_direct = |m: &[i64]| -> f64 {
        let mf: Vec<f64> = m.iter().map(|&c| c as f64).collect();
        symbol_weight(s, cone, &mf).powi(2)
    };
    let y_of = |k: &[i64]| -> f64 {
        let jc = j_cross as i64;
        if k.iter().any(|c| c.abs() > jc) {
            return 0.0;
        }
        let lo: Vec<i64> = k.iter().map(|&c| (-jc).max(-jc - 2 * c)).collect();
        let hi: Vec<i64> = k.iter().map(|&c| jc.min(jc - 2 * c)).collect();
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return 0.0;
        }
        let mut u = lo.clone();
        let mut sum = 0.0;
        let mut m = vec![0i64; d];
        let mut v = vec![0i64; d];
        loop {
            for a in 0..d {
                m[a] = u[a] + k[a];
                v[a] = u[a] + 2 * k[a];
            }
            sum += w_direct(&m) * beta.get(&u) * beta.get(&v);
            let mut a = d;
            loop {
                if a == 0 {
                    return sum;
                }
                a -= 1;
                u[a] += 1;
                if u[a] <= hi[a] {
                    break;
                }
                u[a] = lo[a];
            }
        }
    };

    let count = counting_function(manifold, lambda_limit(radius))?;
    let table = mode_table(manifold, count.max(1));
    let x0 = &window.center;
    let norms = table.modes[..count]
        .par_iter()
        .map(|mode| {
            let ModeLabel::Lattice { k, parity } = &mode.label else {
                unreachable!()
            };
            let kp: Vec<i64> = k.iter().map(|&c| c as i64).collect();
            if kp.iter().all(|&c| c == 0) {
                return a_of(&kp);
            }
            let km: Vec<i64> = kp.iter().map(|c| -c).collect();
            let phase: f64 = kp.iter().zip(x0).map(|(&c, x)| 2.0 * c as f64 * x).sum();
            let cross = phase.cos() * y_of(&kp);
            let f = (1.0 + mode.eigenvalue).powf(pre);
            let sign = match parity {
                Parity::Cos => 1.0,
                Parity::Sin => -1.0,
            };
            f * 0.5 * (a_of(&kp) + a_of(&km) + 2.0 * sign * cross)
        })
        .collect();
    Ok(norms)
}

/// Per-mode terms `σ_n²‖Lφ_n‖²` (with `σ ≡ 1` when `schedule` is `None`)
/// summed up to each radius.
fn partial_sums_impl(
    schedule: Option<&DampingSchedule>,
    manifold: ManifoldSpec,
    op: &OperatorSpec,
    radii: &[f64],
) -> Result<Vec<f64>> {
    manifold.validate()?;
    op.validate(manifold)?;
    check_radii(radii)?;
    let r_max = *radii.last().unwrap();
    let mut out = Vec::with_capacity(radii.len());
    let mut acc = 0.0;
    let mut next = 0usize;
    match op.parts(manifold) {
        Parts::Diagonal { order } => {
            let mut ordinal = 0usize;
            for (lambda, mult) in spectrum_shells(manifold, lambda_limit(r_max)) {
                while next < radii.len() && lambda > lambda_limit(radii[next]) {
                    out.push(acc);
                    next += 1;
                }
                let weight = (1.0 + lambda).powf(order);
                let sigma_sq: f64 = match schedule {
                    None => mult as f64,
                    Some(sch) => (ordinal..ordinal + mult)
                        .map(|n| sch.sigma_with_eigenvalue(n, lambda).powi(2))
                        .sum(),
                };
                acc += weight * sigma_sq;
                ordinal += mult;
            }
        }
        Parts::Windowed { window, cone, s, pre } => {
            let norms = windowed_mode_norms(manifold, window, cone, s, pre, r_max)?;
            let table = mode_table(manifold, norms.len().max(1));
            for (n, (term, lambda)) in norms.iter().zip(&table.eigenvalues).enumerate() {
                while next < radii.len() && *lambda > lambda_limit(radii[next]) {
                    out.push(acc);
                    next += 1;
                }
                let sigma_sq = schedule.map_or(1.0, |sch| sch.sigma_with_eigenvalue(n, *lambda).powi(2));
                acc += sigma_sq * term;
            }
        }
    }
    while out.len() < radii.len() {
        out.push(acc);
    }
    Ok(out)
}

/// `Σ_{√λ_n ≤ R} ‖Lφ_n‖²` at each radius.
pub fn hs_partial_sums(manifold: ManifoldSpec, op: &OperatorSpec, radii: &[f64]) -> Result<Vec<f64>> {
    partial_sums_impl(None, manifold, op, radii)
}

pub fn hs_partial_sum(manifold: ManifoldSpec, op: &OperatorSpec, radius: f64) -> Result<f64> {
    Ok(hs_partial_sums(manifold, op, &[radius])?[0])
}

/// `Σ_{√λ_n ≤ R} σ_n²‖Lφ_n‖²` at each radius.
pub fn weighted_hs_partial_sums(
    schedule: &DampingSchedule,
    manifold: ManifoldSpec,
    op: &OperatorSpec,
    radii: &[f64],
) -> Result<Vec<f64>> {
    partial_sums_impl(Some(schedule), manifold, op, radii)
}

pub fn weighted_hs_partial_sum(
    schedule: &DampingSchedule,
    manifold: ManifoldSpec,
    op: &OperatorSpec,
    radius: f64,
) -> Result<f64> {
    Ok(weighted_hs_partial_sums(schedule, manifold, op, &[radius])?[0])
}

pub fn hs_growth(manifold: ManifoldSpec, op: &OperatorSpec, radii: &[f64]) -> Result<GrowthReport> {
    fit_growth(radii, &hs_partial_sums(manifold, op, radii)?)
}

pub fn weighted_hs_growth(
    schedule: &DampingSchedule,
    manifold: ManifoldSpec,
    op: &OperatorSpec,
    radii: &[f64],
) -> Result<GrowthReport> {
    fit_growth(radii, &weighted_hs_partial_sums(schedule, manifold, op, radii)?)
}

/// Expected verdict: HS iff the symbolic order is below `-d/2`.
pub fn hs_verdict_theory(manifold: ManifoldSpec, op: &OperatorSpec) -> Verdict {
    let d = manifold.dim() as f64;
    let order = op.order(manifold.dim());
    if (order + d / 2.0).abs() <= 1e-12 {
        Verdict::DivergesLog
    } else if order < -d / 2.0 {
        Verdict::Converges
    } else {
        Verdict::DivergesPower {
            exponent: d + 2.0 * order,
        }
    }
}

/// `π coth π = Σ_{k∈ℤ} (1+k²)^{-1}`.
pub fn pi_coth_pi() -> f64 {
    PI / PI.tanh()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t2() -> ManifoldSpec {
        ManifoldSpec::torus(2).unwrap()
    }

    #[test]
    fn shells_match_counting() {
        for m in [
            ManifoldSpec::Circle,
            t2(),
            ManifoldSpec::torus(3).unwrap(),
            ManifoldSpec::Sphere2,
        ] {
            let shells = spectrum_shells(m, 400.0);
            let total: usize = shells.iter().map(|s| s.1).sum();
            assert_eq!(total, counting_function(m, 400.0).unwrap());
            let ev = crate::spectra::eigenvalues(m, total);
            let mut n = 0;
            for (lam, mult) in shells {
                assert!(ev[n..n + mult].iter().all(|&e| e == lam));
                n += mult;
            }
        }
    }

    #[test]
    fn identity_multiplier_sums_count_modes() {
        let id = OperatorSpec::multiplier(0.0);
        assert_eq!(hs_partial_sum(ManifoldSpec::Circle, &id, 10.0).unwrap(), 21.0);
        assert_eq!(hs_partial_sum(t2(), &id, 10.0).unwrap(), 317.0);
    }

    #[test]
    fn circle_multiplier_reaches_pi_coth_pi() {
        let v = hs_partial_sum(ManifoldSpec::Circle, &OperatorSpec::multiplier(-1.0), 1e4).unwrap();
        let brute: f64 = 1.0 + 2.0 * (1..=10_000).map(|k| 1.0 / (1.0 + (k * k) as f64)).sum::<f64>();
        assert!((v - brute).abs() < 1e-12);
        assert!((v - pi_coth_pi()).abs() < 1e-3);
        assert!((pi_coth_pi() - 3.15334).abs() < 1e-5);
    }

    #[test]
    fn weighted_sums() {
        let op = OperatorSpec::multiplier(-0.5);
        let r = geometric_radii(4.0, 2.0, 6);
        let plain = hs_partial_sums(t2(), &op, &r).unwrap();
        let white = weighted_hs_partial_sums(&DampingSchedule::white(), t2(), &op, &r).unwrap();
        assert_eq!(plain, white);
        let zero = DampingSchedule::power(0.0, 1.0).unwrap();
        assert!(weighted_hs_partial_sums(&zero, t2(), &op, &r)
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn theory_verdicts() {
        assert_eq!(
            hs_verdict_theory(t2(), &OperatorSpec::multiplier(-1.5)),
            Verdict::Converges
        );
        assert_eq!(
            hs_verdict_theory(t2(), &OperatorSpec::multiplier(-1.0)),
            Verdict::DivergesLog
        );
        assert_eq!(
            hs_verdict_theory(ManifoldSpec::Circle, &OperatorSpec::multiplier(-0.25)),
            Verdict::DivergesPower { exponent: 0.5 }
        );
        let w = BumpWindow::new(vec![1.0, 2.0], 1.0).unwrap();
        let sandwich = OperatorSpec::Sandwich {
            s: 0.0,
            cutoff: Cutoff::Bump(w),
            varsigma_weight: 0.5,
        };
        assert_eq!(sandwich.order(2), -1.0);
        assert_eq!(hs_verdict_theory(t2(), &sandwich), Verdict::DivergesLog);
    }

    #[test]
    fn composition_orders() {
        let w = BumpWindow::new(vec![1.0], 1.0).unwrap();
        let bump = OperatorSpec::BumpMultiplication { window: w };
        assert_eq!(bump.compose_left(-0.3).order(1), -0.3);
        assert_eq!(bump.compose_right(-0.4, 1).order(1), -0.4);
        assert_eq!(bump.compose_left(-0.3).compose_right(-0.4, 1).order(1), -0.7);
        let m = OperatorSpec::multiplier(-1.0).compose_left(0.5).compose_right(0.25, 3);
        assert_eq!(m, OperatorSpec::multiplier(-0.25));
    }

    #[test]
    fn bump_multiplication_norms_match_parseval() {
        // ‖χ φ_n‖² = ∫ χ² φ_n² computed by quadrature
        let w = BumpWindow::new(vec![0.7], 1.2).unwrap();
        let op = OperatorSpec::BumpMultiplication { window: w.clone() };
        let norms = windowed_mode_norms(ManifoldSpec::Circle, &w, None, 0.0, 0.0, 12.0).unwrap();
        let modes = crate::spectra::enumerate_modes(ManifoldSpec::Circle, norms.len()).unwrap();
        let q = 4096;
        for (mode, norm) in modes.iter().zip(&norms) {
            let exact: f64 = (0..q)
                .map(|i| {
                    let x = 2.0 * PI * i as f64 / q as f64;
                    let phi = crate::spectra::eigenfunction_eval(ManifoldSpec::Circle, mode, &[x]).unwrap();
                    (w.eval(&[x]) * phi).powi(2) * 2.0 * PI / q as f64
                })
                .sum();
            assert!((norm - exact).abs() < 1e-9, "mode {}: {norm} vs {exact}", mode.ordinal);
        }
        assert!(hs_partial_sum(ManifoldSpec::Circle, &op, 12.0).unwrap() > 0.0);
    }

    #[test]
    fn sphere_rejects_windowed_ops() {
        let w = BumpWindow::new(vec![1.0, 1.0], 1.0).unwrap();
        let op = OperatorSpec::BumpMultiplication { window: w };
        assert!(matches!(
            hs_partial_sum(ManifoldSpec::Sphere2, &op, 4.0),
            Err(Error::Unsupported(_))
        ));
        assert!(hs_partial_sum(ManifoldSpec::Sphere2, &OperatorSpec::multiplier(-1.0), 4.0).is_ok());
    }
}
