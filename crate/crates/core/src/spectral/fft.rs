//! n-dimensional transforms by repeated "FFT the contiguous axis, then rotate".
//!
//! Viewing the buffer as `[N^{n−1}, N]`, one pass transforms the last axis and
//! transposes to `[N, N^{n−1}]`, which cycles the axes by one. After `n` passes
//! every axis has been transformed and the original layout is restored.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::Fft;

use crate::par;

/// Rows handed to one worker per FFT batch.
const ROWS_PER_TASK: usize = 64;
/// Destination rows per transpose tile.
const TILE: usize = 16;

pub(crate) fn fft_nd(data: &mut Vec<Complex64>, dim: usize, n: usize, plan: &Arc<dyn Fft<f64>>) {
    if dim == 1 {
        fft_rows(data, n, plan);
        return;
    }
    let rows = data.len() / n;
    let mut tmp = vec![Complex64::new(0.0, 0.0); data.len()];
    for _ in 0..dim {
        fft_rows(data, n, plan);
        transpose(data, &mut tmp, rows, n);
        std::mem::swap(data, &mut tmp);
    }
}

/// In-place FFT of every contiguous length-`n` row.
fn fft_rows(data: &mut [Complex64], n: usize, plan: &Arc<dyn Fft<f64>>) {
    let scratch_len = plan.get_inplace_scratch_len();
    par::for_each_chunk_mut_with(
        data,
        n * ROWS_PER_TASK,
        || vec![Complex64::new(0.0, 0.0); scratch_len],
        |scratch, _, chunk| plan.process_with_scratch(chunk, scratch),
    );
}

/// `dst[c·rows + r] = src[r·cols + c]`, tiled over destination rows.
pub(crate) fn transpose<T: Copy + Send + Sync>(src: &[T], dst: &mut [T], rows: usize, cols: usize) {
    par::for_each_chunk_mut(dst, TILE * rows, |ci, out| {
        let c0 = ci * TILE;
        let width = out.len() / rows;
        for r in 0..rows {
            let line = &src[r * cols + c0..r * cols + c0 + width];
            for (dc, &x) in line.iter().enumerate() {
                out[dc * rows + r] = x;
            }
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transpose_rectangular() {
        let src: Vec<u32> = (0..6).collect();
        let mut dst = vec![0; 6];
        transpose(&src, &mut dst, 2, 3);
        assert_eq!(dst, vec![0, 3, 1, 4, 2, 5]);
    }

    #[test]
    fn transpose_larger_than_tile() {
        let (rows, cols) = (5, 37);
        let src: Vec<usize> = (0..rows * cols).collect();
        let mut dst = vec![0; rows * cols];
        transpose(&src, &mut dst, rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                assert_eq!(dst[c * rows + r], src[r * cols + c]);
            }
        }
    }
}
