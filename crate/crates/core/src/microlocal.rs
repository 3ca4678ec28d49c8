//! Cone-localized Sobolev probes on tori.
//!
//! A [`ConeCutoff`] combines a spatial bump `χ_1` around `x0`, a directional
//! factor `χ_2` on the frequency sphere and a radial step `χ_3` that removes a
//! neighbourhood of the origin. The probe of `u` at order `s` is
//! `‖⟨ξ⟩^s χ_2(ξ̂) χ_3(|ξ|) (χ_1 u)^‖_{ℓ²}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;
use crate::hsdiag::{
    bump_profile, fit_growth, real_field_on_grid, transform_windowed, weighted_hs_growth, windowed_real_spectrum,
    BumpWindow, Cutoff, GrowthReport, OperatorSpec, Verdict, Window,
};
use crate::noise::{derive_seed, sample_coefficients, CoefficientVector, DampingSchedule};
use crate::sobolev::{checkpoint_radii, summarize_threshold, ThresholdEstimate};
use crate::spectra::{grid::max_component, Grid, ManifoldSpec};

pub const DEFAULT_HALFWIDTH: f64 = PI / 4.0;
pub const DEFAULT_APERTURE: f64 = PI / 6.0;
pub const DEFAULT_R0: f64 = 4.0;
pub const DEFAULT_R1: f64 = 8.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DirectionProfile {
    /// `χ_2 ≡ 1`.
    Isotropic,
    /// Bump in the angle to `direction`, vanishing beyond `aperture`.
    Bump { direction: Vec<f64>, aperture: f64 },
    /// Member `index` of `count` planar directional cutoffs whose squares sum to 1.
    Partition { count: usize, index: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeCutoff {
    pub window: BumpWindow,
    pub profile: DirectionProfile,
    pub r0: f64,
    pub r1: f64,
}

/// `e^{-1/t}` glued smoothly to zero.
fn smooth_zero(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// Smooth step: 0 for `t ≤ 0`, 1 for `t ≥ 1`.
fn smooth_step(t: f64) -> f64 {
    let a = smooth_zero(t);
    let b = smooth_zero(1.0 - t);
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

fn angle_between(u: &[f64], v: &[f64]) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu: f64 = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    (dot / (nu * nv)).clamp(-1.0, 1.0).acos()
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

impl ConeCutoff {
    pub fn validate(&self, dim: usize) -> Result<()> {
        self.window.validate()?;
        if self.window.dim() != dim {
            return Err(Error::InvalidParameter(format!(
                "cutoff base point has {} coordinates, expected {dim}",
                self.window.dim()
            )));
        }
        if !(self.r0 > 0.0 && self.r0 < self.r1 && self.r1.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "radial cutoff needs 0 < r0 < r1, got r0={}, r1={}",
                self.r0, self.r1
            )));
        }
        match &self.profile {
            DirectionProfile::Isotropic => Ok(()),
            DirectionProfile::Bump { direction, aperture } => {
                if !(*aperture > 0.0 && *aperture <= PI / 2.0) {
                    return Err(Error::InvalidParameter(format!("aperture {aperture} outside (0, π/2]")));
                }
                let norm: f64 = direction.iter().map(|c| c * c).sum::<f64>().sqrt();
                if direction.len() != dim || !(norm > 0.0 && norm.is_finite()) {
                    return Err(Error::InvalidParameter(
                        "direction must be a nonzero vector of the torus dimension".into(),
                    ));
                }
                Ok(())
            }
            DirectionProfile::Partition { count, index } => {
                if dim != 2 || *count < 3 || index >= count {
                    return Err(Error::InvalidParameter(
                        "directional partitions need a 2-torus, count ≥ 3 and index < count".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// `χ_2(ξ̂)` for nonzero `ξ`.
    pub fn direction_factor(&self, xi: &[f64]) -> f64 {
        match &self.profile {
            DirectionProfile::Isotropic => 1.0,
            DirectionProfile::Bump { direction, aperture } => bump_profile(angle_between(xi, direction) / aperture),
            DirectionProfile::Partition { count, index } => {
                let theta = xi[1].atan2(xi[0]);
                let spacing = 2.0 * PI / *count as f64;
                let psi = |i: usize| bump_profile(circular_distance(theta, i as f64 * spacing) / spacing);
                let total: f64 = (0..*count).map(psi).sum();
                (psi(*index) / total).sqrt()
            }
        }
    }

    /// `χ_3(|ξ|)`.
    pub fn radial_factor(&self, radius: f64) -> f64 {
        smooth_step((radius - self.r0) / (self.r1 - self.r0))
    }

    /// `χ̃_2(ξ) = χ_2(ξ̂) χ_3(|ξ|)`.
    pub fn symbol(&self, xi: &[f64]) -> f64 {
        let r = xi.iter().map(|c| c * c).sum::<f64>().sqrt();
        let radial = self.radial_factor(r);
        if radial == 0.0 {
            return 0.0;
        }
        radial * self.direction_factor(xi)
    }

    /// Same cutoff with the base point moved to `x0`.
    pub fn at(&self, x0: Vec<f64>) -> Self {
        ConeCutoff {
            window: BumpWindow {
                center: x0,
                halfwidth: self.window.halfwidth,
            },
            ..self.clone()
        }
    }

    pub fn with_profile(&self, profile: DirectionProfile) -> Self {
        ConeCutoff {
            profile,
            ..self.clone()
        }
    }
}

/// Builds and validates a cone cutoff; `direction = None` gives the isotropic profile.
pub fn build_cutoff(
    x0: Vec<f64>,
    halfwidth: f64,
    direction: Option<Vec<f64>>,
    aperture: f64,
    r0: f64,
    r1: f64,
) -> Result<ConeCutoff> {
    let dim = x0.len();
    let profile = match direction {
        None => DirectionProfile::Isotropic,
        Some(d) => {
            let norm: f64 = d.iter().map(|c| c * c).sum::<f64>().sqrt();
            DirectionProfile::Bump {
                direction: d.iter().map(|c| c / norm).collect(),
                aperture,
            }
        }
    };
    if !(aperture > 0.0 && aperture <= PI / 2.0) {
        return Err(Error::InvalidParameter(format!("aperture {aperture} outside (0, π/2]")));
    }
    let cutoff = ConeCutoff {
        window: BumpWindow { center: x0, halfwidth },
        profile,
        r0,
        r1,
    };
    cutoff.validate(dim)?;
    Ok(cutoff)
}

/// Cutoff at `x0` pointing along `direction` with the default window, aperture and radii.
pub fn default_cutoff(x0: Vec<f64>, direction: Vec<f64>) -> Result<ConeCutoff> {
    build_cutoff(
        x0,
        DEFAULT_HALFWIDTH,
        Some(direction),
        DEFAULT_APERTURE,
        DEFAULT_R0,
        DEFAULT_R1,
    )
}

/// Unit vectors at angles `2πj/count` in the plane.
pub fn planar_directions(count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|j| {
            let t = 2.0 * PI * j as f64 / count as f64;
            vec![t.cos(), t.sin()]
        })
        .collect()
}

fn torus_grid_sizes(manifold: ManifoldSpec, grid: &Grid, count: usize) -> Result<Vec<usize>> {
    if !manifold.is_flat() {
        return Err(Error::Unsupported("probes are defined on tori only".into()));
    }
    grid.check(manifold)?;
    let Grid::TorusUniform { sizes } = grid else {
        unreachable!()
    };
    let k = max_component(manifold, count.max(1)).max(1);
    if let Some(&n) = sizes.iter().find(|&&n| n < 4 * k) {
        return Err(Error::Resolution(format!(
            "grid size {n} is below 4× the input frequency {k}"
        )));
    }
    Ok(sizes.clone())
}

/// `Σ_m w(m)|d_m|²` over the FFT box.
fn weighted_energy(spec: &[Complex64], weights: &SparseWeights) -> f64 {
    weights.entries.iter().map(|&(i, w)| w * spec[i].norm_sqr()).sum()
}

/// Nonzero squared symbol values in FFT layout.
struct SparseWeights {
    entries: Vec<(usize, f64)>,
}

impl SparseWeights {
    fn build(sizes: &[usize], f: impl Fn(&[f64]) -> f64) -> Self {
        let mut entries = Vec::new();
        let mut xi = vec![0.0; sizes.len()];
        fft::for_each_frequency(sizes, |flat, m| {
            for (x, &c) in xi.iter_mut().zip(m) {
                *x = c as f64;
            }
            let w = f(&xi);
            if w != 0.0 {
                entries.push((flat, w * w));
            }
        });
        SparseWeights { entries }
    }

    fn cone(sizes: &[usize], cutoff: &ConeCutoff, s: f64) -> Self {
        Self::build(sizes, |xi| crate::hsdiag::symbol_weight(s, Some(cutoff), xi))
    }

    fn sobolev(sizes: &[usize], s: f64) -> Self {
        Self::build(sizes, |xi| crate::hsdiag::symbol_weight(s, None, xi))
    }
}

/// `‖⟨ξ⟩^s χ̃_2 (χ_1 u)^‖_{ℓ²}` for the field with coefficients `coeffs`.
pub fn probe_norm(
    manifold: ManifoldSpec,
    coeffs: &CoefficientVector,
    cutoff: &ConeCutoff,
    s: f64,
    grid: &Grid,
) -> Result<f64> {
    cutoff.validate(manifold.dim())?;
    let sizes = torus_grid_sizes(manifold, grid, coeffs.len())?;
    let spec = windowed_real_spectrum(manifold, &coeffs.values, &Window::Bump(cutoff.window.clone()), &sizes);
    Ok(weighted_energy(&spec, &SparseWeights::cone(&sizes, cutoff, s)).sqrt())
}

/// `‖χ u‖_{H^s}` with the windowed field's exact Fourier coefficients.
pub fn local_norm(
    manifold: ManifoldSpec,
    coeffs: &CoefficientVector,
    window: &Window,
    s: f64,
    grid: &Grid,
) -> Result<f64> {
    if let Window::Bump(b) = window {
        b.validate()?;
        if b.dim() != manifold.dim() {
            return Err(Error::InvalidParameter(
                "window dimension does not match manifold".into(),
            ));
        }
    }
    let sizes = torus_grid_sizes(manifold, grid, coeffs.len())?;
    let spec = windowed_real_spectrum(manifold, &coeffs.values, window, &sizes);
    Ok(weighted_energy(&spec, &SparseWeights::sobolev(&sizes, s)).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub cutoff: ConeCutoff,
    pub s: f64,
    pub checkpoints: Vec<usize>,
    /// `‖P Φ_N‖` at each checkpoint.
    pub probe_norms: Vec<f64>,
    /// `‖P(Φ_{N_j} - Φ_{N_{j-1}})‖²`, the first block starting at ordinal 0.
    pub block_energies: Vec<f64>,
    /// Fit of the cumulative block energies against `N + 1`.
    pub growth: GrowthReport,
}

fn check_checkpoints(checkpoints: &[usize]) -> Result<()> {
    if checkpoints.len() < 5 {
        return Err(Error::InvalidParameter(
            "at least 5 checkpoints are needed for a growth fit".into(),
        ));
    }
    if checkpoints.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("checkpoints must be increasing".into()));
    }
    Ok(())
}

fn block_ranges(checkpoints: &[usize]) -> Vec<std::ops::Range<usize>> {
    let mut start = 0;
    checkpoints
        .iter()
        .map(|&n| {
            let r = start..n + 1;
            start = n + 1;
            r
        })
        .collect()
}

/// Grid samples of each block `Φ_{N_j} - Φ_{N_{j-1}}`; calls `visit(block, samples)`.
fn for_each_block_field(
    manifold: ManifoldSpec,
    coeffs: &CoefficientVector,
    sizes: &[usize],
    checkpoints: &[usize],
    mut visit: impl FnMut(usize, &[Complex64]),
) {
    let mut block_values = vec![0.0; coeffs.len()];
    let mut previous = 0..0;
    for (b, range) in block_ranges(checkpoints).into_iter().enumerate() {
        block_values[previous].iter_mut().for_each(|v| *v = 0.0);
        block_values[range.clone()].copy_from_slice(&coeffs.values[range.clone()]);
        let field = real_field_on_grid(manifold, &block_values[..range.end], sizes);
        visit(b, &field);
        previous = range;
    }
}

fn cumulative(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect()
}

/// Grid used for fields truncated at ordinal `n_max`.
pub fn probe_grid(manifold: ManifoldSpec, n_max: usize) -> Result<Grid> {
    Grid::torus_fitting(manifold, n_max + 1, 4)
}

/// Probe norms of one sample path's partial sums `Φ_N`.
pub fn probe_trajectory(
    schedule: &DampingSchedule,
    manifold: ManifoldSpec,
    cutoff: &ConeCutoff,
    s: f64,
    seed: u64,
    checkpoints: &[usize],
) -> Result<ProbeReport> {
    check_checkpoints(checkpoints)?;
    cutoff.validate(manifold.dim())?;
    let n_max = *checkpoints.last().unwrap();
    let grid = probe_grid(manifold, n_max)?;
    let sizes = torus_grid_sizes(manifold, &grid, n_max + 1)?;
    let coeffs = sample_coefficients(schedule, manifold, n_max, seed)?;
    let weights = SparseWeights::cone(&sizes, cutoff, s);
    let window = cutoff.window.on_grid(&sizes);
    let volume = manifold.volume();
    let mut total = vec![Complex64::new(0.0, 0.0); window.len()];
    let mut probe_norms = Vec::new();
    let mut block_energies = Vec::new();
    for_each_block_field(manifold, &coeffs, &sizes, checkpoints, |_, field| {
        let block = transform_windowed(field.to_vec(), Some(&window), &sizes, volume);
        for (t, v) in total.iter_mut().zip(&block) {
            *t += v;
        }
        block_energies.push(weighted_energy(&block, &weights));
        probe_norms.push(weighted_energy(&total, &weights).sqrt());
    });
    let growth = fit_growth(&checkpoint_radii(checkpoints), &cumulative(&block_energies))?;
    Ok(ProbeReport {
        cutoff: cutoff.clone(),
        s,
        checkpoints: checkpoints.to_vec(),
        probe_norms,
        block_energies,
        growth,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanCell {
    pub position: Vec<f64>,
    pub direction: Vec<f64>,
    pub exponent: Option<f64>,
    pub verdict: Verdict,
    pub inconclusive: bool,
    /// Trial-averaged block energies.
    pub block_energies: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub s: f64,
    pub trials: usize,
    pub checkpoints: Vec<usize>,
    pub cells: Vec<ScanCell>,
    /// `max - min` of the fitted exponents.
    pub spread: f64,
    pub all_divergent: bool,
    pub all_bounded: bool,
    pub any_inconclusive: bool,
}

/// Parameters shared by every cell of a scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanTemplate {
    pub halfwidth: f64,
    pub aperture: f64,
    pub r0: f64,
    pub r1: f64,
}

impl Default for ScanTemplate {
    fn default() -> Self {
        ScanTemplate {
            halfwidth: DEFAULT_HALFWIDTH,
            aperture: DEFAULT_APERTURE,
            r0: DEFAULT_R0,
            r1: DEFAULT_R1,
        }
    }
}

/// Trial-averaged probe growth over every (position, direction) pair, for each `s`.
#[allow(clippy::too_many_arguments)]
pub fn uniformity_scan_multi(
    schedule: &DampingSchedule,
    manifold: ManifoldSpec,
    positions: &[Vec<f64>],
    directions: &[Vec<f64>],
    s_values: &[f64],
    seed: u64,
    checkpoints: &[usize],
    trials: usize,
    template: &ScanTemplate,
) -> Result<Vec<ScanReport>> {
    check_checkpoints(checkpoints)?;
    if positions.is_empty() || directions.is_empty() || s_values.is_empty() || trials == 0 {
        return Err(Error::InvalidParameter(
            "scan needs positions, directions, s values and trials".into(),
        ));
    }
    let cutoffs: Vec<Vec<ConeCutoff>> = positions
        .iter()
        .map(|x0| {
            directions
                .iter()
                .map(|d| {
                    build_cutoff(
                        x0.clone(),
                        template.halfwidth,
                        Some(d.clone()),
                        template.aperture,
                        template.r0,
                        template.r1,
                    )
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let n_max = *checkpoints.last().unwrap();
    let grid = probe_grid(manifold, n_max)?;
    let sizes = torus_grid_sizes(manifold, &grid, n_max + 1)?;
    // cone weights do not depend on the base point; index [s][direction]
    let weights: Vec<Vec<SparseWeights>> = s_values
        .iter()
        .map(|&s| {
            cutoffs[0]
                .par_iter()
                .map(|c| SparseWeights::cone(&sizes, c, s))
                .collect()
        })
        .collect();
    let window_grids: Vec<Vec<f64>> = cutoffs.iter().map(|row| row[0].window.on_grid(&sizes)).collect();
    let volume = manifold.volume();
    let (np, nd, ns, nb) = (positions.len(), directions.len(), s_values.len(), checkpoints.len());
    let index = |si: usize, p: usize, d: usize, b: usize| ((si * np + p) * nd + d) * nb + b;

    let per_trial: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<Vec<f64>> {
            let coeffs = sample_coefficients(schedule, manifold, n_max, derive_seed(seed, t as u64))?;
            let mut energies = vec![0.0; ns * np * nd * nb];
            for_each_block_field(manifold, &coeffs, &sizes, checkpoints, |b, field| {
                for (p, window) in window_grids.iter().enumerate() {
                    let block = transform_windowed(field.to_vec(), Some(window), &sizes, volume);
                    for (si, ws) in weights.iter().enumerate() {
                        for (d, w) in ws.iter().enumerate() {
                            energies[index(si, p, d, b)] = weighted_energy(&block, w);
                        }
                    }
                }
            });
            Ok(energies)
        })
        .collect::<Result<_>>()?;

    let radii = checkpoint_radii(checkpoints);
    let mut reports = Vec::with_capacity(ns);
    for (si, &s) in s_values.iter().enumerate() {
        let mut cells = Vec::with_capacity(np * nd);
        for (p, x0) in positions.iter().enumerate() {
            for (d, dir) in directions.iter().enumerate() {
                let block_energies: Vec<f64> = (0..nb)
                    .map(|b| per_trial.iter().map(|e| e[index(si, p, d, b)]).sum::<f64>() / trials as f64)
                    .collect();
                let growth = fit_growth(&radii, &cumulative(&block_energies))?;
                cells.push(ScanCell {
                    position: x0.clone(),
                    direction: dir.clone(),
                    exponent: growth.fitted_exponent,
                    verdict: growth.verdict,
                    inconclusive: growth.inconclusive,
                    block_energies,
                });
            }
        }
        let exps: Vec<f64> = cells.iter().filter_map(|c| c.exponent).collect();
        let spread = if exps.is_empty() {
            0.0
        } else {
            exps.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - exps.iter().cloned().fold(f64::INFINITY, f64::min)
        };
        reports.push(ScanReport {
            s,
            trials,
            checkpoints: checkpoints.to_vec(),
            all_divergent: cells.iter().all(|c| c.verdict.is_divergent()),
            all_bounded: cells.iter().all(|c| !c.verdict.is_divergent()),
            any_inconclusive: cells.iter().any(|c| c.inconclusive),
            spread,
            cells,
        });
    }
    Ok(reports)
}

#[allow(clippy::too_many_arguments)]
pub fn uniformity_scan(
    schedule: &DampingSchedule,
    manifold: ManifoldSpec,
    positions: &[Vec<f64>],
    directions: &[Vec<f64>],
    s: f64,
    seed: u64,
    checkpoints: &[usize],
    trials: usize,
    template: &ScanTemplate,
) -> Result<ScanReport> {
    let mut r = uniformity_scan_multi(
        schedule,
        manifold,
        positions,
        directions,
        &[s],
        seed,
        checkpoints,
        trials,
        template,
    )?;
    Ok(r.remove(0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalThresholdReport {
    pub window: BumpWindow,
    /// Monte Carlo estimate from trial-averaged local block energies.
    pub estimate: ThresholdEstimate,
    /// Deterministic estimate from `Σ σ_n² ‖⟨D⟩^s χ φ_n‖²`.
    pub deterministic: ThresholdEstimate,
    pub agree: bool,
}

/// Local regularity threshold at the window's center.
pub fn local_threshold(
    schedule: &DampingSchedule,
    manifold: ManifoldSpec,
    window: &BumpWindow,
    s_grid: &[f64],
    checkpoints: &[usize],
    trials: usize,
    seed: u64,
) -> Result<LocalThresholdReport> {
    check_checkpoints(checkpoints)?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    window.validate()?;
    let n_max = *checkpoints.last().unwrap();
    let grid = probe_grid(manifold, n_max)?;
    let sizes = torus_grid_sizes(manifold, &grid, n_max + 1)?;
    let weights: Vec<SparseWeights> = s_grid.iter().map(|&s| SparseWeights::sobolev(&sizes, s)).collect();
    let nb = checkpoints.len();
    let window_grid = window.on_grid(&sizes);
    let volume = manifold.volume();
    let per_trial: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<Vec<f64>> {
            let coeffs = sample_coefficients(schedule, manifold, n_max, derive_seed(seed, t as u64))?;
            let mut e = vec![0.0; s_grid.len() * nb];
            for_each_block_field(manifold, &coeffs, &sizes, checkpoints, |b, field| {
                let block = transform_windowed(field.to_vec(), Some(&window_grid), &sizes, volume);
                for (si, w) in weights.iter().enumerate() {
                    e[si * nb + b] = weighted_energy(&block, w);
                }
            });
            Ok(e)
        })
        .collect::<Result<_>>()?;
    let radii = checkpoint_radii(checkpoints);
    let mut mc = Vec::with_capacity(s_grid.len());
    for si in 0..s_grid.len() {
        let avg: Vec<f64> = (0..nb)
            .map(|b| per_trial.iter().map(|e| e[si * nb + b]).sum::<f64>() / trials as f64)
            .collect();
        mc.push(fit_growth(&radii, &cumulative(&avg))?);
    }

    // the deterministic route truncates by frequency radius; N modes reach √λ ≈ (N/(V_d·Vol))^{1/d}·2π
    let det_radii: Vec<f64> = checkpoints
        .iter()
        .map(|&n| crate::spectra::weyl_lambda_asymptotic(manifold, n + 1).sqrt())
        .collect();
    let mut det = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let op = OperatorSpec::Sandwich {
            s,
            cutoff: Cutoff::Bump(window.clone()),
            varsigma_weight: 0.0,
        };
        det.push(weighted_hs_growth(schedule, manifold, &op, &det_radii)?);
    }
    let estimate = summarize_threshold(s_grid, &mc, "monte_carlo_local_block_energy")?;
    let deterministic = summarize_threshold(s_grid, &det, "weighted_hs_sandwich")?;
    let agree = estimate
        .verdicts
        .iter()
        .zip(&deterministic.verdicts)
        .all(|(a, b)| a.is_divergent() == b.is_divergent());
    Ok(LocalThresholdReport {
        window: window.clone(),
        estimate,
        deterministic,
        agree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sobolev::sobolev_norm_sq;

    fn t2() -> ManifoldSpec {
        ManifoldSpec::torus(2).unwrap()
    }

    #[test]
    fn cutoff_examples() {
        let c = build_cutoff(vec![1.0, 2.0], PI / 4.0, Some(vec![3.0, 4.0]), PI / 6.0, 4.0, 8.0).unwrap();
        assert_eq!(c.symbol(&[0.0, 0.0]), 0.0);
        assert_eq!(c.symbol(&[2.0 * 8.0 * 0.6, 2.0 * 8.0 * 0.8]), 1.0);
        assert_eq!(c.symbol(&[-12.0, -16.0]), 0.0);
        assert_eq!(c.symbol(&[0.3, 0.4]), 0.0);
        assert!(build_cutoff(vec![0.0, 0.0], 1.0, None, PI / 6.0, 8.0, 4.0).is_err());
        assert!(build_cutoff(vec![0.0, 0.0], 1.0, Some(vec![1.0, 0.0]), 2.0, 4.0, 8.0).is_err());
        assert!(build_cutoff(vec![0.0, 0.0], 3.5, None, 0.5, 4.0, 8.0).is_err());
        let iso = build_cutoff(vec![0.0, 0.0], 1.0, None, PI / 2.0, 4.0, 8.0).unwrap();
        assert_eq!(iso.direction_factor(&[-1.0, 0.3]), 1.0);
    }

    #[test]
    fn partition_squares_sum_to_one() {
        let base = build_cutoff(vec![0.0, 0.0], 1.0, None, 0.5, 1.0, 2.0).unwrap();
        for t in 0..100 {
            let a = t as f64 * 0.0731;
            let xi = [a.cos(), a.sin()];
            let total: f64 = (0..7)
                .map(|i| {
                    base.with_profile(DirectionProfile::Partition { count: 7, index: i })
                        .direction_factor(&xi)
                        .powi(2)
                })
                .sum();
            assert!((total - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_field_probes_to_zero() {
        let c = default_cutoff(vec![1.0, 1.0], vec![1.0, 0.0]).unwrap();
        let z = CoefficientVector::from_values(t2(), vec![0.0; 100]);
        assert_eq!(probe_norm(t2(), &z, &c, 0.5, &Grid::torus(vec![64, 64])).unwrap(), 0.0);
    }

    #[test]
    fn unit_window_local_norm_is_global() {
        let s = DampingSchedule::power(1.0, 0.3).unwrap();
        let c = sample_coefficients(&s, ManifoldSpec::Circle, 200, 4).unwrap();
        let g = Grid::torus(vec![512]);
        for sv in [-1.0, 0.0, 0.7] {
            let l = local_norm(ManifoldSpec::Circle, &c, &Window::Unit, sv, &g).unwrap();
            let e = sobolev_norm_sq(ManifoldSpec::Circle, &c, sv).sqrt();
            assert!((l - e).abs() < 1e-8 * e, "{l} vs {e}");
        }
    }

    #[test]
    fn resolution_guard() {
        let c = default_cutoff(vec![1.0, 1.0], vec![1.0, 0.0]).unwrap();
        let u = sample_coefficients(&DampingSchedule::white(), t2(), 400, 1).unwrap();
        assert!(matches!(
            probe_norm(t2(), &u, &c, 0.0, &Grid::torus(vec![32, 32])),
            Err(Error::Resolution(_))
        ));
        assert!(matches!(
            probe_norm(ManifoldSpec::Sphere2, &u, &c, 0.0, &Grid::sphere(8, 16)),
            Err(Error::Unsupported(_))
        ));
    }
}
