//! Multi-dimensional complex FFT over row-major arrays (last axis fastest).
//!
//! Forward transforms use `e^{-i}` and inverse transforms `e^{+i}`; neither is
//! normalized.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn fft_nd(data: &mut [Complex64], shape: &[usize], direction: FftDirection) {
    let total: usize = shape.iter().product();
    assert_eq!(total, data.len(), "fft_nd: shape does not match data length");
    if total == 0 {
        return;
    }
    for axis in 0..shape.len() {
        let len = shape[axis];
        if len <= 1 {
            continue;
        }
        let stride: usize = shape[axis + 1..].iter().product();
        let fft = PLANNER.with(|p| p.borrow_mut().plan_fft(len, direction));
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        if stride == 1 {
            for line in data.chunks_exact_mut(len) {
                fft.process_with_scratch(line, &mut scratch);
            }
            continue;
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        let block = len * stride;
        for outer in 0..total / block {
            let base = outer * block;
            for inner in 0..stride {
                let start = base + inner;
                for (t, b) in buf.iter_mut().enumerate() {
                    *b = data[start + t * stride];
                }
                fft.process_with_scratch(&mut buf, &mut scratch);
                for (t, b) in buf.iter().enumerate() {
                    data[start + t * stride] = *b;
                }
            }
        }
    }
}

pub(crate) fn forward(data: &mut [Complex64], shape: &[usize]) {
    fft_nd(data, shape, FftDirection::Forward);
}

pub(crate) fn inverse(data: &mut [Complex64], shape: &[usize]) {
    fft_nd(data, shape, FftDirection::Inverse);
}

/// Signed frequency represented by FFT bin `index` of an axis of length `n`.
pub(crate) fn signed_frequency(index: usize, n: usize) -> i64 {
    if index <= n / 2 {
        index as i64
    } else {
        index as i64 - n as i64
    }
}

/// FFT bin holding frequency `k` on an axis of length `n` (aliased modulo `n`).
pub(crate) fn bin_of(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}

/// Flat row-major index of a multi-index.
pub(crate) fn flat_index(bins: &[usize], shape: &[usize]) -> usize {
    bins.iter().zip(shape).fold(0, |acc, (&b, &n)| acc * n + b)
}

/// Iterates over the signed frequency vectors of every bin, in flat order.
pub(crate) fn for_each_frequency(shape: &[usize], mut f: impl FnMut(usize, &[i64])) {
    let total: usize = shape.iter().product();
    let d = shape.len();
    let mut bins = vec![0usize; d];
    let mut freq = vec![0i64; d];
    for flat in 0..total {
        for a in 0..d {
            freq[a] = signed_frequency(bins[a], shape[a]);
        }
        f(flat, &freq);
        for a in (0..d).rev() {
            bins[a] += 1;
            if bins[a] < shape[a] {
                break;
            }
            bins[a] = 0;
        }
    }
}
