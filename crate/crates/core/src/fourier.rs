//! Row-parallel FFT helpers for square `n x n` fields stored row-major.
//!
//! Every row is transformed independently, so results are bitwise identical
//! for any number of worker threads.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};

pub(crate) struct RowFft {
    n: usize,
    plan: Arc<dyn Fft<f64>>,
}

impl RowFft {
    pub fn new(n: usize, direction: FftDirection) -> Self {
        let plan = FftPlanner::new().plan_fft(n, direction);
        RowFft { n, plan }
    }

    /// Unnormalized in-place transform of every row.
    pub fn process_rows(&self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len() % self.n, 0);
        let scratch_len = self.plan.get_inplace_scratch_len();
        data.par_chunks_mut(self.n).for_each_init(
            || vec![Complex64::new(0.0, 0.0); scratch_len],
            |scratch, row| self.plan.process_with_scratch(row, scratch),
        );
    }
}

/// Out-of-place transpose of a square matrix.
pub(crate) fn transpose<T: Copy + Send + Sync>(n: usize, data: &[T]) -> Vec<T> {
    debug_assert_eq!(data.len(), n * n);
    let mut out = Vec::with_capacity(n * n);
    // Row j of the output is column j of the input.
    out.par_extend((0..n * n).into_par_iter().map(|idx| {
        let (j, i) = (idx / n, idx % n);
        data[i * n + j]
    }));
    out
}

pub(crate) fn to_complex(values: &[f64]) -> Vec<Complex64> {
    values.par_iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

/// Translates every row (or column) of a real field by a row-dependent
/// amount using the Fourier shift theorem: row `r` becomes
/// `f(x + shift(r))`. `along_rows = false` shifts each column instead.
pub(crate) fn fourier_shift(
    n: usize,
    wavenumbers: &[f64],
    values: &[f64],
    shift: impl Fn(usize) -> f64 + Sync,
    along_rows: bool,
) -> Vec<f64> {
    let forward = RowFft::new(n, FftDirection::Forward);
    let inverse = RowFft::new(n, FftDirection::Inverse);
    let mut buf = if along_rows {
        to_complex(values)
    } else {
        to_complex(&transpose(n, values))
    };
    forward.process_rows(&mut buf);
    let norm = 1.0 / n as f64;
    buf.par_chunks_mut(n).enumerate().for_each(|(r, row)| {
        let a = shift(r);
        if a != 0.0 {
            for (c, k) in row.iter_mut().zip(wavenumbers) {
                *c *= Complex64::cis(k * a);
            }
        }
    });
    inverse.process_rows(&mut buf);
    let real: Vec<f64> = buf.par_iter().map(|c| c.re * norm).collect();
    if along_rows {
        real
    } else {
        transpose(n, &real)
    }
}
