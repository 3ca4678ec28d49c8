use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::legendre::{gauss_legendre, normalized_legendre, normalized_legendre_table};
use super::{mode_table, ManifoldSpec, Mode, ModeLabel, Parity};
use crate::error::{Error, Result};
use crate::fft;
use crate::noise::{CoefficientVector, DampingSchedule};

/// Sampling grid for one of the model manifolds.
///
/// Torus grids are uniform with spacing `2π/size` per axis, points ordered
/// row-major with the last axis fastest. Sphere grids place `n_lat`
/// Gauss–Legendre latitudes (north to south) against `n_lon` uniform longitudes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Grid {
    TorusUniform { sizes: Vec<usize> },
    SphereEquirect { n_lat: usize, n_lon: usize },
}

impl Grid {
    pub fn torus(sizes: Vec<usize>) -> Self {
        Grid::TorusUniform { sizes }
    }

    pub fn sphere(n_lat: usize, n_lon: usize) -> Self {
        Grid::SphereEquirect { n_lat, n_lon }
    }

    /// Smallest power-of-two torus grid with at least `factor` points per unit
    /// of the largest frequency among the first `count` modes.
    pub fn torus_fitting(manifold: ManifoldSpec, count: usize, factor: usize) -> Result<Self> {
        if !manifold.is_flat() {
            return Err(Error::Unsupported("uniform grids exist only on flat manifolds".into()));
        }
        let kmax = max_component(manifold, count);
        let n = (factor * kmax).max(8).next_power_of_two();
        Ok(Grid::TorusUniform {
            sizes: vec![n; manifold.dim()],
        })
    }

    pub fn shape(&self) -> Vec<usize> {
        match self {
            Grid::TorusUniform { sizes } => sizes.clone(),
            Grid::SphereEquirect { n_lat, n_lon } => vec![*n_lat, *n_lon],
        }
    }

    pub fn point_count(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn check(&self, manifold: ManifoldSpec) -> Result<()> {
        match (self, manifold) {
            (Grid::TorusUniform { sizes }, m) if m.is_flat() => {
                if sizes.len() != m.dim() || sizes.contains(&0) {
                    return Err(Error::GridMismatch(format!(
                        "torus grid {sizes:?} does not fit a {}-dimensional torus",
                        m.dim()
                    )));
                }
                Ok(())
            }
            (Grid::SphereEquirect { n_lat, n_lon }, ManifoldSpec::Sphere2) => {
                if *n_lat == 0 || *n_lon == 0 {
                    return Err(Error::GridMismatch("empty sphere grid".into()));
                }
                Ok(())
            }
            (g, m) => Err(Error::GridMismatch(format!("{g:?} cannot sample {}", m.name()))),
        }
    }

    /// Coordinates of every point: angles on tori, `(colatitude, longitude)` on the sphere.
    pub fn coordinates(&self) -> Vec<Vec<f64>> {
        match self {
            Grid::TorusUniform { sizes } => {
                let total: usize = sizes.iter().product();
                (0..total)
                    .map(|flat| {
                        let mut rem = flat;
                        let mut x = vec![0.0; sizes.len()];
                        for a in (0..sizes.len()).rev() {
                            x[a] = 2.0 * PI * (rem % sizes[a]) as f64 / sizes[a] as f64;
                            rem /= sizes[a];
                        }
                        x
                    })
                    .collect()
            }
            Grid::SphereEquirect { n_lat, n_lon } => {
                let (nodes, _) = gauss_legendre(*n_lat);
                let mut out = Vec::with_capacity(n_lat * n_lon);
                for x in nodes {
                    let colat = x.clamp(-1.0, 1.0).acos();
                    for k in 0..*n_lon {
                        out.push(vec![colat, 2.0 * PI * k as f64 / *n_lon as f64]);
                    }
                }
                out
            }
        }
    }

    /// Quadrature weight of every point, summing to the manifold volume.
    pub fn quadrature_weights(&self) -> Vec<f64> {
        match self {
            Grid::TorusUniform { sizes } => {
                let total: usize = sizes.iter().product();
                let volume = (2.0 * PI).powi(sizes.len() as i32);
                vec![volume / total as f64; total]
            }
            Grid::SphereEquirect { n_lat, n_lon } => {
                let (_, w) = gauss_legendre(*n_lat);
                let dphi = 2.0 * PI / *n_lon as f64;
                w.iter().flat_map(|wl| std::iter::repeat_n(wl * dphi, *n_lon)).collect()
            }
        }
    }
}

/// Largest `|k_i|` among the first `count` modes of a flat manifold.
pub(crate) fn max_component(manifold: ManifoldSpec, count: usize) -> usize {
    let table = mode_table(manifold, count);
    table.modes[..count]
        .iter()
        .filter_map(|m| m.lattice_vector())
        .flat_map(|k| k.iter().map(|c| c.unsigned_abs() as usize))
        .max()
        .unwrap_or(0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Provenance {
    Sampled {
        schedule: DampingSchedule,
        truncation: usize,
        seed: u64,
    },
    Direct,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub provenance: Provenance,
}

impl FieldSample {
    /// `∫|u|²` by the grid's quadrature rule.
    pub fn l2_norm_sq(&self) -> f64 {
        self.grid
            .quadrature_weights()
            .iter()
            .zip(&self.values)
            .map(|(w, v)| w * v * v)
            .sum()
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// Value of the real orthonormal eigenfunction of `mode` at `point`.
pub fn eigenfunction_eval(manifold: ManifoldSpec, mode: &Mode, point: &[f64]) -> Result<f64> {
    if point.iter().any(|c| !c.is_finite()) {
        return Err(Error::Domain(format!("non-finite coordinates {point:?}")));
    }
    match (&mode.label, manifold) {
        (ModeLabel::Lattice { k, parity }, m) if m.is_flat() => {
            if point.len() != m.dim() || k.len() != m.dim() {
                return Err(Error::Domain(format!(
                    "expected {} coordinates for {}, got {}",
                    m.dim(),
                    m.name(),
                    point.len()
                )));
            }
            let volume = m.volume();
            if k.iter().all(|&c| c == 0) {
                return Ok(volume.powf(-0.5));
            }
            let phase: f64 = k.iter().zip(point).map(|(&c, x)| c as f64 * x).sum();
            let amp = (2.0 / volume).sqrt();
            Ok(match parity {
                Parity::Cos => amp * phase.cos(),
                Parity::Sin => amp * phase.sin(),
            })
        }
        (ModeLabel::Spherical { l, m, parity }, ManifoldSpec::Sphere2) => {
            if point.len() != 2 {
                return Err(Error::Domain("sphere points are (colatitude, longitude)".into()));
            }
            let (colat, lon) = (point[0], point[1]);
            if !(0.0..=PI).contains(&colat) {
                return Err(Error::Domain(format!("colatitude {colat} outside [0, π]")));
            }
            let p = normalized_legendre(*l as usize, *m as usize, colat.cos());
            Ok(match (m, parity) {
                (0, _) => p,
                (_, Parity::Cos) => SQRT_2 * p * (*m as f64 * lon).cos(),
                (_, Parity::Sin) => SQRT_2 * p * (*m as f64 * lon).sin(),
            })
        }
        (label, m) => Err(Error::Domain(format!("mode {label:?} does not belong to {}", m.name()))),
    }
}

fn check_coefficients(manifold: ManifoldSpec, coeffs: &CoefficientVector) -> Result<()> {
    if coeffs.manifold != manifold {
        return Err(Error::GridMismatch(format!(
            "coefficients belong to {}, not {}",
            coeffs.manifold.name(),
            manifold.name()
        )));
    }
    Ok(())
}

fn provenance_of(coeffs: &CoefficientVector) -> Provenance {
    match (&coeffs.schedule, coeffs.seed) {
        (Some(schedule), Some(seed)) => Provenance::Sampled {
            schedule: schedule.clone(),
            truncation: coeffs.truncation(),
            seed,
        },
        _ => Provenance::Direct,
    }
}

/// Scatters real-basis coefficients onto a complex frequency array so that the
/// unnormalized inverse FFT reproduces `Σ a_n φ_n` at the grid points.
pub(crate) fn scatter_flat(manifold: ManifoldSpec, values: &[f64], shape: &[usize]) -> Vec<Complex64> {
    let table = mode_table(manifold, values.len());
    let volume = manifold.volume();
    let half = 0.5 * (2.0 / volume).sqrt();
    let total: usize = shape.iter().product();
    let mut spec = vec![Complex64::new(0.0, 0.0); total];
    let mut bins = vec![0usize; shape.len()];
    for (mode, &a) in table.modes.iter().zip(values) {
        if a == 0.0 {
            continue;
        }
        let (k, parity) = match &mode.label {
            ModeLabel::Lattice { k, parity } => (k, *parity),
            _ => unreachable!("flat manifold with spherical label"),
        };
        if k.iter().all(|&c| c == 0) {
            spec[0] += a * volume.powf(-0.5);
            continue;
        }
        for (b, (&c, &n)) in bins.iter_mut().zip(k.iter().zip(shape)) {
            *b = fft::bin_of(c as i64, n);
        }
        let plus = fft::flat_index(&bins, shape);
        for (b, (&c, &n)) in bins.iter_mut().zip(k.iter().zip(shape)) {
            *b = fft::bin_of(-(c as i64), n);
        }
        let minus = fft::flat_index(&bins, shape);
        match parity {
            Parity::Cos => {
                spec[plus] += a * half;
                spec[minus] += a * half;
            }
            Parity::Sin => {
                spec[plus] += Complex64::new(0.0, -a * half);
                spec[minus] += Complex64::new(0.0, a * half);
            }
        }
    }
    spec
}

/// Pointwise partial sum `Σ_{n≤N} a_n φ_n` on the grid.
///
/// Tori use an inverse FFT over the frequency lattice; the sphere evaluates
/// Legendre recurrences per latitude followed by a longitude FFT. Both are
/// exact at the grid points regardless of resolution.
pub fn synthesize(manifold: ManifoldSpec, coeffs: &CoefficientVector, grid: &Grid) -> Result<FieldSample> {
    check_coefficients(manifold, coeffs)?;
    grid.check(manifold)?;
    let values = match grid {
        Grid::TorusUniform { sizes } => {
            let mut spec = scatter_flat(manifold, &coeffs.values, sizes);
            fft::inverse(&mut spec, sizes);
            spec.into_iter().map(|c| c.re).collect()
        }
        Grid::SphereEquirect { n_lat, n_lon } => synthesize_sphere(&coeffs.values, *n_lat, *n_lon),
    };
    Ok(FieldSample {
        grid: grid.clone(),
        values,
        provenance: provenance_of(coeffs),
    })
}

fn synthesize_sphere(values: &[f64], n_lat: usize, n_lon: usize) -> Vec<f64> {
    let table = mode_table(ManifoldSpec::Sphere2, values.len().max(1));
    let modes = &table.modes[..values.len()];
    let lmax = modes.last().map_or(0, |m| match m.label {
        ModeLabel::Spherical { l, .. } => l as usize,
        _ => 0,
    });
    let (nodes, _) = gauss_legendre(n_lat);
    let mut out = Vec::with_capacity(n_lat * n_lon);
    let mut row = vec![Complex64::new(0.0, 0.0); n_lon];
    for &x in &nodes {
        let plm = normalized_legendre_table(lmax, x);
        row.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        for (mode, &a) in modes.iter().zip(values) {
            if a == 0.0 {
                continue;
            }
            let ModeLabel::Spherical { l, m, parity } = mode.label else {
                unreachable!()
            };
            let (l, m) = (l as usize, m as usize);
            let p = plm[m][l - m];
            let w = if m == 0 { 1.0 } else { SQRT_2 };
            let bin = m % n_lon;
            match parity {
                Parity::Cos => row[bin].re += w * a * p,
                Parity::Sin => row[bin].im -= w * a * p,
            }
        }
        fft::inverse(&mut row, &[n_lon]);
        out.extend(row.iter().map(|c| c.re));
    }
    out
}

/// Reference synthesis by direct summation of eigenfunction values.
pub fn synthesize_direct(manifold: ManifoldSpec, coeffs: &CoefficientVector, grid: &Grid) -> Result<FieldSample> {
    check_coefficients(manifold, coeffs)?;
    grid.check(manifold)?;
    let table = mode_table(manifold, coeffs.values.len().max(1));
    let modes = &table.modes[..coeffs.values.len()];
    let values = grid
        .coordinates()
        .iter()
        .map(|x| {
            modes
                .iter()
                .zip(&coeffs.values)
                .map(|(mode, a)| Ok(a * eigenfunction_eval(manifold, mode, x)?))
                .sum::<Result<f64>>()
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(FieldSample {
        grid: grid.clone(),
        values,
        provenance: provenance_of(coeffs),
    })
}

/// Quadrature inner products `⟨φ_n, u⟩` for the first `count` modes.
pub fn analyze(manifold: ManifoldSpec, field: &FieldSample, count: usize) -> Result<CoefficientVector> {
    if count == 0 {
        return Err(Error::InvalidParameter("count must be positive".into()));
    }
    field.grid.check(manifold)?;
    if field.values.len() != field.grid.point_count() {
        return Err(Error::InvalidParameter(format!(
            "field has {} values for {} grid points",
            field.values.len(),
            field.grid.point_count()
        )));
    }
    let table = mode_table(manifold, count);
    let modes = &table.modes[..count];
    let values = match &field.grid {
        Grid::TorusUniform { sizes } => analyze_flat(manifold, modes, &field.values, sizes)?,
        Grid::SphereEquirect { n_lat, n_lon } => analyze_sphere(modes, &field.values, *n_lat, *n_lon)?,
    };
    Ok(CoefficientVector::from_values(manifold, values))
}

fn analyze_flat(manifold: ManifoldSpec, modes: &[Mode], values: &[f64], sizes: &[usize]) -> Result<Vec<f64>> {
    for mode in modes {
        let k = mode.lattice_vector().unwrap();
        if let Some(axis) = (0..sizes.len()).find(|&a| 2 * k[a].unsigned_abs() as usize >= sizes[a]) {
            return Err(Error::Resolution(format!(
                "mode {} has frequency {} on axis {axis}, at or above Nyquist for size {}",
                mode.ordinal, k[axis], sizes[axis]
            )));
        }
    }
    let mut spec: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft::forward(&mut spec, sizes);
    let total = values.len() as f64;
    let volume = manifold.volume();
    let amp = (2.0 / volume).sqrt() * volume / total;
    let mut bins = vec![0usize; sizes.len()];
    Ok(modes
        .iter()
        .map(|mode| {
            let ModeLabel::Lattice { k, parity } = &mode.label else {
                unreachable!()
            };
            if k.iter().all(|&c| c == 0) {
                return volume.sqrt() * spec[0].re / total;
            }
            for (b, (&c, &n)) in bins.iter_mut().zip(k.iter().zip(sizes)) {
                *b = fft::bin_of(c as i64, n);
            }
            let c = spec[fft::flat_index(&bins, sizes)];
            match parity {
                Parity::Cos => amp * c.re,
                Parity::Sin => -amp * c.im,
            }
        })
        .collect())
}

fn analyze_sphere(modes: &[Mode], values: &[f64], n_lat: usize, n_lon: usize) -> Result<Vec<f64>> {
    let lmax = modes.last().map_or(0, |m| match m.label {
        ModeLabel::Spherical { l, .. } => l as usize,
        _ => 0,
    });
    if lmax >= n_lat || 2 * lmax >= n_lon {
        return Err(Error::Resolution(format!(
            "degree {lmax} needs n_lat > {lmax} and n_lon > {}, grid is {n_lat}×{n_lon}",
            2 * lmax
        )));
    }
    let (nodes, weights) = gauss_legendre(n_lat);
    let dphi = 2.0 * PI / n_lon as f64;
    let mut out = vec![0.0; modes.len()];
    let mut row = vec![Complex64::new(0.0, 0.0); n_lon];
    for (j, (&x, &w)) in nodes.iter().zip(&weights).enumerate() {
        for (c, &v) in row.iter_mut().zip(&values[j * n_lon..(j + 1) * n_lon]) {
            *c = Complex64::new(v * dphi, 0.0);
        }
        fft::forward(&mut row, &[n_lon]);
        let plm = normalized_legendre_table(lmax, x);
        for (mode, acc) in modes.iter().zip(out.iter_mut()) {
            let ModeLabel::Spherical { l, m, parity } = mode.label else {
                unreachable!()
            };
            let (l, m) = (l as usize, m as usize);
            let p = plm[m][l - m];
            let r = row[m];
            *acc += match (m, parity) {
                (0, _) => w * p * r.re,
                (_, Parity::Cos) => w * SQRT_2 * p * r.re,
                (_, Parity::Sin) => -w * SQRT_2 * p * r.im,
            };
        }
    }
    Ok(out)
}

/// Coefficients of `u(· - offset)` on a flat manifold.
///
/// The result is extended by one entry when the last mode's cos/sin partner
/// lies beyond the truncation.
pub fn translate_coefficients(coeffs: &CoefficientVector, offset: &[f64]) -> Result<CoefficientVector> {
    let manifold = coeffs.manifold;
    if !manifold.is_flat() {
        return Err(Error::Unsupported(
            "translations are defined on flat manifolds only".into(),
        ));
    }
    if offset.len() != manifold.dim() {
        return Err(Error::Domain(format!("offset must have {} entries", manifold.dim())));
    }
    let mut len = coeffs.values.len();
    let table = mode_table(manifold, len + 1);
    if len > 0 && table.modes[len - 1].parity() == Parity::Cos && table.modes[len].parity() == Parity::Sin {
        len += 1;
    }
    let mut values = coeffs.values.clone();
    values.resize(len, 0.0);
    let mut n = 0;
    while n < len {
        let mode = &table.modes[n];
        let k = mode.lattice_vector().unwrap();
        if k.iter().all(|&c| c == 0) {
            n += 1;
            continue;
        }
        let phase: f64 = k.iter().zip(offset).map(|(&c, t)| c as f64 * t).sum();
        let (s, c) = phase.sin_cos();
        let (ac, as_) = (values[n], values[n + 1]);
        values[n] = ac * c - as_ * s;
        values[n + 1] = ac * s + as_ * c;
        n += 2;
    }
    Ok(CoefficientVector::from_values(manifold, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::enumerate_modes;

    fn unit(manifold: ManifoldSpec, len: usize, n: usize) -> CoefficientVector {
        let mut v = vec![0.0; len];
        v[n] = 1.0;
        CoefficientVector::from_values(manifold, v)
    }

    #[test]
    fn eigenfunction_examples() {
        let circle = ManifoldSpec::Circle;
        let modes = enumerate_modes(circle, 3).unwrap();
        let c0 = eigenfunction_eval(circle, &modes[0], &[1.234]).unwrap();
        assert!((c0 - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-15);
        let c1 = eigenfunction_eval(circle, &modes[1], &[0.0]).unwrap();
        assert!((c1 - 1.0 / PI.sqrt()).abs() < 1e-15);

        let sphere = ManifoldSpec::Sphere2;
        let y10 = enumerate_modes(sphere, 2).unwrap()[1].clone();
        let v = eigenfunction_eval(sphere, &y10, &[0.0, 0.3]).unwrap();
        assert!((v - (3.0 / (4.0 * PI)).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn eigenfunction_domain_errors() {
        let sphere = ManifoldSpec::Sphere2;
        let y = enumerate_modes(sphere, 1).unwrap()[0].clone();
        assert!(matches!(
            eigenfunction_eval(sphere, &y, &[4.0, 0.0]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            eigenfunction_eval(sphere, &y, &[-0.1, 0.0]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            eigenfunction_eval(sphere, &y, &[f64::NAN, 0.0]),
            Err(Error::Domain(_))
        ));
        let t = enumerate_modes(ManifoldSpec::Circle, 1).unwrap()[0].clone();
        assert!(eigenfunction_eval(sphere, &t, &[0.1, 0.0]).is_err());
        assert!(eigenfunction_eval(ManifoldSpec::torus(2).unwrap(), &t, &[0.1, 0.0]).is_err());
    }

    #[test]
    fn zero_and_constant_fields() {
        let t2 = ManifoldSpec::torus(2).unwrap();
        let grid = Grid::torus(vec![16, 16]);
        let zero = synthesize(t2, &CoefficientVector::from_values(t2, vec![0.0; 30]), &grid).unwrap();
        assert!(zero.values.iter().all(|&v| v == 0.0));
        let c = synthesize(t2, &unit(t2, 1, 0), &grid).unwrap();
        assert!(c.values.iter().all(|&v| (v - 1.0 / (2.0 * PI)).abs() < 1e-15));
    }

    #[test]
    fn grid_manifold_mismatch() {
        let t2 = ManifoldSpec::torus(2).unwrap();
        let coeffs = unit(t2, 4, 1);
        assert!(matches!(
            synthesize(t2, &coeffs, &Grid::sphere(8, 16)),
            Err(Error::GridMismatch(_))
        ));
        assert!(matches!(
            synthesize(t2, &coeffs, &Grid::torus(vec![16])),
            Err(Error::GridMismatch(_))
        ));
        assert!(synthesize(ManifoldSpec::Sphere2, &coeffs, &Grid::sphere(8, 16)).is_err());
    }

    #[test]
    fn sphere_constant_field_analysis() {
        let grid = Grid::sphere(16, 32);
        let field = FieldSample {
            values: vec![2.5; grid.point_count()],
            grid,
            provenance: Provenance::Direct,
        };
        let a = analyze(ManifoldSpec::Sphere2, &field, 9).unwrap();
        assert!((a.values[0] - 2.5 * (4.0 * PI).sqrt()).abs() < 1e-12);
        assert!(a.values[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn analysis_rejects_aliasing() {
        let circle = ManifoldSpec::Circle;
        let field = synthesize(circle, &unit(circle, 3, 1), &Grid::torus(vec![8])).unwrap();
        // mode 8 is cos(4θ): exactly Nyquist for 8 points
        assert!(matches!(analyze(circle, &field, 9), Err(Error::Resolution(_))));
        assert!(analyze(circle, &field, 7).is_ok());
        let sphere = ManifoldSpec::Sphere2;
        let sfield = synthesize(sphere, &unit(sphere, 4, 0), &Grid::sphere(4, 8)).unwrap();
        assert!(analyze(sphere, &sfield, 16).is_ok());
        assert!(matches!(analyze(sphere, &sfield, 17), Err(Error::Resolution(_))));
    }

    #[test]
    fn sphere_fast_matches_direct() {
        let sphere = ManifoldSpec::Sphere2;
        let values: Vec<f64> = (0..64).map(|i| ((i * 37 % 11) as f64 - 5.0) / 7.0).collect();
        let coeffs = CoefficientVector::from_values(sphere, values);
        let grid = Grid::sphere(12, 20);
        let fast = synthesize(sphere, &coeffs, &grid).unwrap();
        let direct = synthesize_direct(sphere, &coeffs, &grid).unwrap();
        for (a, b) in fast.values.iter().zip(&direct.values) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn translation_matches_shifted_samples() {
        let t2 = ManifoldSpec::torus(2).unwrap();
        let values: Vec<f64> = (0..41).map(|i| ((i * 13 % 7) as f64 - 3.0) / 3.0).collect();
        let coeffs = CoefficientVector::from_values(t2, values);
        let grid = Grid::torus(vec![8, 8]);
        // shift by one grid cell on each axis
        let h = 2.0 * PI / 8.0;
        let shifted = translate_coefficients(&coeffs, &[h, 2.0 * h]).unwrap();
        let u = synthesize(t2, &coeffs, &grid).unwrap();
        let v = synthesize(t2, &shifted, &grid).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let src = ((i + 7) % 8) * 8 + (j + 6) % 8;
                assert!((v.values[i * 8 + j] - u.values[src]).abs() < 1e-12);
            }
        }
    }
}
