//! Orthonormal associated Legendre functions and Gauss–Legendre quadrature.
//!
//! `P̄_l^m(x)` denotes `√((2l+1)/(4π) · (l-m)!/(l+m)!) · P_l^m(x)` with the
//! Condon–Shortley phase included in `P_l^m`, so that
//! `Y_l^m(θ, φ) = P̄_l^m(cos θ) e^{imφ}` is orthonormal on the unit sphere.

use std::f64::consts::PI;

/// `P̄_l^m(x)` for `l = m..=lmax`, via the standard normalized three-term recurrence.
pub fn normalized_legendre_column(m: usize, lmax: usize, x: f64) -> Vec<f64> {
    if lmax < m {
        return Vec::new();
    }
    let sin_theta = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for k in 1..=m {
        let kf = k as f64;
        pmm *= -((2.0 * kf + 1.0) / (2.0 * kf)).sqrt() * sin_theta;
    }
    let mut out = Vec::with_capacity(lmax - m + 1);
    out.push(pmm);
    if lmax == m {
        return out;
    }
    let mf = m as f64;
    let mut prev2 = pmm;
    let mut prev1 = x * (2.0 * mf + 3.0).sqrt() * pmm;
    out.push(prev1);
    for l in (m + 2)..=lmax {
        let lf = l as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
        let next = a * (x * prev1 - b * prev2);
        out.push(next);
        prev2 = prev1;
        prev1 = next;
    }
    out
}

/// Single value `P̄_l^m(x)`.
pub fn normalized_legendre(l: usize, m: usize, x: f64) -> f64 {
    if m > l {
        return 0.0;
    }
    *normalized_legendre_column(m, l, x).last().unwrap()
}

/// All `P̄_l^m(x)` for `0 ≤ m ≤ l ≤ lmax`, indexed `[m][l - m]`.
pub fn normalized_legendre_table(lmax: usize, x: f64) -> Vec<Vec<f64>> {
    (0..=lmax).map(|m| normalized_legendre_column(m, lmax, x)).collect()
}

/// Gauss–Legendre nodes (descending, i.e. colatitude ascending) and weights on `[-1, 1]`.
///
/// Exact for polynomials of degree `≤ 2n - 1`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_and_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        nodes[n - 1 - i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_degree_closed_forms() {
        let x: f64 = 0.3;
        let s = (1.0 - x * x).sqrt();
        let n00 = (1.0 / (4.0 * PI)).sqrt();
        assert!((normalized_legendre(0, 0, x) - n00).abs() < 1e-15);
        assert!((normalized_legendre(1, 0, x) - (3.0 / (4.0 * PI)).sqrt() * x).abs() < 1e-15);
        // P_1^1 = -sqrt(1-x^2) with Condon–Shortley phase
        let n11 = (3.0 / (8.0 * PI)).sqrt();
        assert!((normalized_legendre(1, 1, x) + n11 * s).abs() < 1e-15);
        let p20 = 0.5 * (3.0 * x * x - 1.0);
        assert!((normalized_legendre(2, 0, x) - (5.0 / (4.0 * PI)).sqrt() * p20).abs() < 1e-15);
        // P_2^2 = 3(1-x^2), norm sqrt(5/(4π) / 24)
        let n22 = (5.0 / (4.0 * PI) / 24.0).sqrt();
        assert!((normalized_legendre(2, 2, x) - n22 * 3.0 * s * s).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        assert!(x.windows(2).all(|p| p[0] > p[1]));
        for deg in 0..=13 {
            let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "deg {deg}: {q} vs {exact}");
        }
    }

    #[test]
    fn columns_are_orthonormal_in_x() {
        // ∫ P̄_l^m P̄_l'^m dx = δ_{ll'} / (2π)
        let lmax = 30;
        let (x, w) = gauss_legendre(40);
        for m in [0usize, 3, 17] {
            let cols: Vec<Vec<f64>> = x.iter().map(|&xi| normalized_legendre_column(m, lmax, xi)).collect();
            for a in 0..=(lmax - m) {
                for b in 0..=(lmax - m) {
                    let g: f64 = (0..x.len()).map(|i| w[i] * cols[i][a] * cols[i][b]).sum();
                    let expect = if a == b { 1.0 / (2.0 * PI) } else { 0.0 };
                    assert!((g - expect).abs() < 1e-13, "m={m} a={a} b={b} g={g}");
                }
            }
        }
    }
}
