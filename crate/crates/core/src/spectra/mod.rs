//! Exact Laplace–Beltrami eigendata for the model manifolds.
//!
//! Three geometries are supported, each with unit scale:
//!
//! * the circle `ℝ/2πℤ`,
//! * the flat torus `(ℝ/2πℤ)^d`,
//! * the unit round sphere `S²`.
//!
//! Every manifold carries a fixed real orthonormal eigenbasis. On flat
//! geometries the basis is `{Vol^{-1/2}, (2/Vol)^{1/2} cos(k·x), (2/Vol)^{1/2} sin(k·x)}`
//! with one representative `k` per pair `±k`; on the sphere it is the real
//! spherical harmonics with Condon–Shortley phase. Modes are ordered by
//! eigenvalue, ties broken lexicographically on the label.

pub(crate) mod grid;
pub mod legendre;

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub use grid::{
    analyze, eigenfunction_eval, synthesize, synthesize_direct, translate_coefficients, FieldSample, Grid, Provenance,
};

/// Lattice frequency vector; inline storage covers the dimensions used in practice.
pub type LatticeVector = SmallVec<[i32; 4]>;

/// One of the model geometries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ManifoldSpec {
    Circle,
    Torus { dim: usize },
    Sphere2,
}

impl ManifoldSpec {
    pub fn torus(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("torus dimension must be at least 1".into()));
        }
        Ok(ManifoldSpec::Torus { dim })
    }

    pub fn dim(&self) -> usize {
        match *self {
            ManifoldSpec::Circle => 1,
            ManifoldSpec::Torus { dim } => dim,
            ManifoldSpec::Sphere2 => 2,
        }
    }

    /// Riemannian volume: `2π`, `(2π)^d` or `4π`.
    pub fn volume(&self) -> f64 {
        match *self {
            ManifoldSpec::Circle => 2.0 * PI,
            ManifoldSpec::Torus { dim } => (2.0 * PI).powi(dim as i32),
            ManifoldSpec::Sphere2 => 4.0 * PI,
        }
    }

    /// Volume of the Euclidean unit ball of the manifold's dimension.
    pub fn ball_volume(&self) -> f64 {
        unit_ball_volume(self.dim())
    }

    /// True for the circle and the tori, whose eigenbasis is trigonometric.
    pub fn is_flat(&self) -> bool {
        !matches!(self, ManifoldSpec::Sphere2)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if let ManifoldSpec::Torus { dim: 0 } = self {
            return Err(Error::InvalidParameter("torus dimension must be at least 1".into()));
        }
        Ok(())
    }

    pub fn name(&self) -> String {
        match *self {
            ManifoldSpec::Circle => "circle".into(),
            ManifoldSpec::Torus { dim } => format!("torus{dim}"),
            ManifoldSpec::Sphere2 => "sphere2".into(),
        }
    }
}

/// `π^{d/2} / Γ(d/2 + 1)`, via `V_d = 2π/d · V_{d-2}`.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / d as f64 * unit_ball_volume(d - 2),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Cos,
    Sin,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModeLabel {
    /// `k` is the half-space representative (first nonzero entry positive), or zero.
    Lattice { k: LatticeVector, parity: Parity },
    /// Real spherical harmonic; `m ≥ 0`, `Sin` only when `m > 0`.
    Spherical { l: u32, m: u32, parity: Parity },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub ordinal: usize,
    pub eigenvalue: f64,
    pub label: ModeLabel,
}

impl Mode {
    pub fn lattice_vector(&self) -> Option<&[i32]> {
        match &self.label {
            ModeLabel::Lattice { k, .. } => Some(k),
            ModeLabel::Spherical { .. } => None,
        }
    }

    pub fn parity(&self) -> Parity {
        match self.label {
            ModeLabel::Lattice { parity, .. } | ModeLabel::Spherical { parity, .. } => parity,
        }
    }

    /// `√λ`, the frequency radius used for radial truncations.
    pub fn frequency(&self) -> f64 {
        self.eigenvalue.sqrt()
    }
}

/// Enumerated modes of one manifold, in canonical order.
#[derive(Debug)]
pub struct ModeTable {
    pub manifold: ManifoldSpec,
    pub modes: Vec<Mode>,
    pub eigenvalues: Vec<f64>,
}

impl ModeTable {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }
}

type TableCache = RwLock<HashMap<ManifoldSpec, Arc<ModeTable>>>;

fn table_cache() -> &'static TableCache {
    static CACHE: OnceLock<TableCache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Shared table holding at least the first `count` modes.
///
/// Tables are cached per manifold and regrown geometrically; since the order is
/// prefix-stable, a larger table always extends a smaller one.
pub fn mode_table(manifold: ManifoldSpec, count: usize) -> Arc<ModeTable> {
    if let Some(t) = table_cache().read().unwrap().get(&manifold) {
        if t.len() >= count {
            return Arc::clone(t);
        }
    }
    let mut cache = table_cache().write().unwrap();
    if let Some(t) = cache.get(&manifold) {
        if t.len() >= count {
            return Arc::clone(t);
        }
    }
    let previous = cache.get(&manifold).map_or(0, |t| t.len());
    let target = count.max(2 * previous).max(64);
    let modes = build_modes(manifold, target);
    let eigenvalues = modes.iter().map(|m| m.eigenvalue).collect();
    let table = Arc::new(ModeTable {
        manifold,
        modes,
        eigenvalues,
    });
    cache.insert(manifold, Arc::clone(&table));
    table
}

/// Eigenvalues `λ_0..λ_{count-1}`.
pub fn eigenvalues(manifold: ManifoldSpec, count: usize) -> Vec<f64> {
    mode_table(manifold, count).eigenvalues[..count].to_vec()
}

/// The first `count` modes in canonical order.
pub fn enumerate_modes(manifold: ManifoldSpec, count: usize) -> Result<Vec<Mode>> {
    manifold.validate()?;
    if count == 0 {
        return Err(Error::InvalidParameter("mode count must be positive".into()));
    }
    Ok(mode_table(manifold, count).modes[..count].to_vec())
}

/// All modes with eigenvalue at most `lambda`.
pub fn modes_up_to(manifold: ManifoldSpec, lambda: f64) -> Result<Vec<Mode>> {
    let count = counting_function(manifold, lambda)?;
    enumerate_modes(manifold, count)
}

/// `λ_n` for a single ordinal.
pub fn eigenvalue_of(manifold: ManifoldSpec, n: usize) -> f64 {
    match manifold {
        ManifoldSpec::Circle => {
            let k = n.div_ceil(2) as f64;
            k * k
        }
        ManifoldSpec::Sphere2 => {
            let l = isqrt(n as u64) as f64;
            l * (l + 1.0)
        }
        ManifoldSpec::Torus { .. } => mode_table(manifold, n + 1).eigenvalues[n],
    }
}

/// `N(λ) = #{n : λ_n ≤ λ}`, computed exactly.
pub fn counting_function(manifold: ManifoldSpec, lambda: f64) -> Result<usize> {
    manifold.validate()?;
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "lambda must be nonnegative, got {lambda}"
        )));
    }
    Ok(match manifold {
        ManifoldSpec::Circle => lattice_count(1, lambda.floor() as u64) as usize,
        ManifoldSpec::Torus { dim } => lattice_count(dim, lambda.floor() as u64) as usize,
        ManifoldSpec::Sphere2 => {
            // largest l with l(l+1) <= lambda
            let mut l = ((lambda + 0.25).sqrt() - 0.5).floor().max(0.0) as u64;
            while ((l + 1) * (l + 2)) as f64 <= lambda {
                l += 1;
            }
            while l > 0 && (l * (l + 1)) as f64 > lambda {
                l -= 1;
            }
            ((l + 1) * (l + 1)) as usize
        }
    })
}

/// Weyl's leading term `Vol(𝔹^d)·Vol(M)·λ^{d/2}/(2π)^d`.
pub fn weyl_prediction(manifold: ManifoldSpec, lambda: f64) -> f64 {
    let d = manifold.dim() as f64;
    manifold.ball_volume() * manifold.volume() * lambda.max(0.0).powf(d / 2.0) / (2.0 * PI).powf(d)
}

/// Inverted Weyl law: `4π²(Vol(𝔹^d)·Vol(M))^{-2/d} n^{2/d}`.
pub fn weyl_lambda_asymptotic(manifold: ManifoldSpec, n: usize) -> f64 {
    let d = manifold.dim() as f64;
    4.0 * PI * PI * (manifold.ball_volume() * manifold.volume()).powf(-2.0 / d) * (n as f64).powf(2.0 / d)
}

pub(crate) fn isqrt(v: u64) -> u64 {
    let mut r = (v as f64).sqrt() as u64;
    while r * r > v {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= v {
        r += 1;
    }
    r
}

/// Number of `k ∈ ℤ^d` with `|k|² ≤ bound`.
fn lattice_count(d: usize, bound: u64) -> u64 {
    if d == 1 {
        return 2 * isqrt(bound) + 1;
    }
    let r = isqrt(bound) as i64;
    (-r..=r).map(|k| lattice_count(d - 1, bound - (k * k) as u64)).sum()
}

fn build_modes(manifold: ManifoldSpec, count: usize) -> Vec<Mode> {
    match manifold {
        ManifoldSpec::Sphere2 => sphere_modes(count),
        ManifoldSpec::Circle => flat_modes(1, count),
        ManifoldSpec::Torus { dim } => flat_modes(dim, count),
    }
}

fn sphere_modes(count: usize) -> Vec<Mode> {
    let mut out = Vec::with_capacity(count);
    let mut l = 0u32;
    while out.len() < count {
        let lambda = (l as f64) * (l as f64 + 1.0);
        let mut push = |m: u32, parity: Parity| {
            let ordinal = out.len();
            out.push(Mode {
                ordinal,
                eigenvalue: lambda,
                label: ModeLabel::Spherical { l, m, parity },
            });
        };
        push(0, Parity::Cos);
        for m in 1..=l {
            push(m, Parity::Cos);
            push(m, Parity::Sin);
        }
        l += 1;
    }
    out.truncate(count);
    out
}

fn flat_modes(d: usize, count: usize) -> Vec<Mode> {
    // smallest integer bound whose ball holds `count` lattice points
    let manifold = if d == 1 {
        ManifoldSpec::Circle
    } else {
        ManifoldSpec::Torus { dim: d }
    };
    let mut bound = (weyl_lambda_asymptotic(manifold, count) * 1.05).ceil() as u64 + 2;
    while lattice_count(d, bound) < count as u64 {
        bound = bound * 5 / 4 + 1;
    }

    let mut points: Vec<(u64, LatticeVector)> = Vec::new();
    let mut k: LatticeVector = SmallVec::from_elem(0, d);
    collect_representatives(d, 0, bound, 0, &mut k, &mut points);
    points.sort_unstable();

    let mut out = Vec::with_capacity(count);
    for (norm_sq, k) in points {
        if out.len() >= count {
            break;
        }
        let lambda = norm_sq as f64;
        let zero = k.iter().all(|&c| c == 0);
        out.push(Mode {
            ordinal: out.len(),
            eigenvalue: lambda,
            label: ModeLabel::Lattice {
                k: k.clone(),
                parity: Parity::Cos,
            },
        });
        if !zero && out.len() < count {
            out.push(Mode {
                ordinal: out.len(),
                eigenvalue: lambda,
                label: ModeLabel::Lattice { k, parity: Parity::Sin },
            });
        }
    }
    out
}

/// Collects zero and the half-space representatives with `|k|² ≤ bound`.
fn collect_representatives(
    d: usize,
    axis: usize,
    bound: u64,
    used: u64,
    k: &mut LatticeVector,
    out: &mut Vec<(u64, LatticeVector)>,
) {
    if axis == d {
        let first_nonzero = k.iter().find(|&&c| c != 0);
        if first_nonzero.is_none_or(|&c| c > 0) {
            out.push((used, k.clone()));
        }
        return;
    }
    let r = isqrt(bound - used) as i32;
    // once an earlier axis is nonzero, this axis is free; otherwise keep it nonnegative
    let leading_zero = k[..axis].iter().all(|&c| c == 0);
    let lo = if leading_zero { 0 } else { -r };
    for c in lo..=r {
        k[axis] = c;
        collect_representatives(d, axis + 1, bound, used + (c as i64 * c as i64) as u64, k, out);
    }
    k[axis] = 0;
}
