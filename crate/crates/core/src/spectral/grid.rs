use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use rustfft::{Fft, FftPlanner};

use crate::{Error, Result};

/// Uniform periodic lattice on `[−L/2, L/2)ⁿ` with its dual frequency lattice
/// `ξ_k = 2πk/L`, `k ∈ [−N/2, N/2)`.
///
/// Storage order is row-major with the last axis contiguous; frequency data is
/// kept in FFT order (non-negative wavenumbers first).
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

struct GridInner {
    dim: usize,
    points: usize,
    length: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    radii: OnceLock<Vec<f64>>,
}

impl Grid {
    /// Builds a grid with `points` samples per axis in `dim` dimensions.
    pub fn new(dim: usize, points: usize, length: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidDimension(dim));
        }
        if points < 4 || !points.is_multiple_of(2) {
            return Err(Error::OddPoints(points));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::NonPositiveLength(length));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            inner: Arc::new(GridInner {
                dim,
                points,
                length,
                forward: planner.plan_fft_forward(points),
                inverse: planner.plan_fft_inverse(points),
                radii: OnceLock::new(),
            }),
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    /// Points per axis `N`.
    pub fn points(&self) -> usize {
        self.inner.points
    }

    /// Box side `L`.
    pub fn length(&self) -> f64 {
        self.inner.length
    }

    /// Total number of samples `Nⁿ`.
    pub fn len(&self) -> usize {
        self.inner.points.pow(self.inner.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Spacing `h = L/N`.
    pub fn spacing(&self) -> f64 {
        self.inner.length / self.inner.points as f64
    }

    /// Quadrature weight `hⁿ`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.inner.dim as i32)
    }

    /// Box volume `Lⁿ`.
    pub fn volume(&self) -> f64 {
        self.inner.length.powi(self.inner.dim as i32)
    }

    /// Frequency step `2π/L`.
    pub fn frequency_step(&self) -> f64 {
        2.0 * PI / self.inner.length
    }

    /// Largest resolved wavenumber along an axis, `π/h`.
    pub fn nyquist(&self) -> f64 {
        self.frequency_step() * (self.inner.points / 2) as f64
    }

    /// Spatial coordinate of index `i` along any axis.
    pub fn coordinate(&self, i: usize) -> f64 {
        -0.5 * self.inner.length + i as f64 * self.spacing()
    }

    /// Signed wavenumber index of FFT slot `i`.
    pub fn signed_index(&self, i: usize) -> i64 {
        let n = self.inner.points;
        if i < n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    /// Wavenumber `ξ` of FFT slot `i` along any axis.
    pub fn wavenumber(&self, i: usize) -> f64 {
        self.signed_index(i) as f64 * self.frequency_step()
    }

    /// Splits a flat index into per-axis indices (unused axes are zero).
    pub fn multi_index(&self, flat: usize) -> [usize; 3] {
        let n = self.inner.points;
        let mut idx = [0usize; 3];
        let mut rem = flat;
        for axis in (0..self.inner.dim).rev() {
            idx[axis] = rem % n;
            rem /= n;
        }
        idx
    }

    /// Spatial position of a flat index.
    pub fn point(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let mut x = [0.0; 3];
        for axis in 0..self.inner.dim {
            x[axis] = self.coordinate(idx[axis]);
        }
        x
    }

    /// Frequency vector of a flat (FFT-ordered) index.
    pub fn frequency(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let mut xi = [0.0; 3];
        for axis in 0..self.inner.dim {
            xi[axis] = self.wavenumber(idx[axis]);
        }
        xi
    }

    /// `|ξ|` over the whole lattice in FFT order; computed once per grid.
    pub fn radii(&self) -> &[f64] {
        self.inner.radii.get_or_init(|| {
            let mut r = vec![0.0; self.len()];
            crate::par::fill_indexed(&mut r, |i| {
                let xi = self.frequency(i);
                (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt()
            });
            r
        })
    }

    /// `|x|` for a flat spatial index.
    pub fn point_radius(&self, flat: usize) -> f64 {
        let x = self.point(flat);
        (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
    }

    /// Whether a flat index touches the periodic seam at `±L/2` on some axis.
    pub fn on_boundary(&self, flat: usize) -> bool {
        let last = self.inner.points - 1;
        let idx = self.multi_index(flat);
        idx[..self.inner.dim].iter().any(|&i| i == 0 || i == last)
    }

    /// `(−1)^{Σ m_i}` for FFT slot `flat`; shifts the DFT phase to the centred box.
    pub(crate) fn parity_sign(&self, flat: usize) -> f64 {
        let idx = self.multi_index(flat);
        if idx.iter().sum::<usize>() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub(crate) fn forward_plan(&self) -> &Arc<dyn Fft<f64>> {
        &self.inner.forward
    }

    pub(crate) fn inverse_plan(&self) -> &Arc<dyn Fft<f64>> {
        &self.inner.inverse
    }

    /// Same lattice (dimension, points and length).
    pub fn same_as(&self, other: &Grid) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.dim == other.inner.dim
                && self.inner.points == other.inner.points
                && self.inner.length == other.inner.length)
    }

    /// Smallest power of two `N ≥ 4` with spacing `L/N ≤ max_spacing`.
    pub fn points_for_spacing(length: f64, max_spacing: f64) -> usize {
        let mut n = 4usize;
        while length / n as f64 > max_spacing {
            n *= 2;
        }
        n
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.inner.dim)
            .field("points", &self.inner.points)
            .field("length", &self.inner.length)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unit_frequency_step_for_two_pi_box() {
        let g = Grid::new(1, 8, 2.0 * PI).unwrap();
        assert_relative_eq!(g.spacing(), PI / 4.0);
        let ks: Vec<f64> = (0..8).map(|i| g.wavenumber(i)).collect();
        let mut sorted = ks.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expected = [-4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0];
        for (a, b) in sorted.iter().zip(expected) {
            assert_relative_eq!(*a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn two_dimensional_lattice() {
        let g = Grid::new(2, 4, 4.0).unwrap();
        assert_eq!(g.len(), 16);
        assert_relative_eq!(g.frequency_step(), PI / 2.0);
    }

    #[test]
    fn three_dimensional_step() {
        let g = Grid::new(3, 4, 3.0).unwrap();
        assert_relative_eq!(g.frequency_step(), 2.0943951023931953, epsilon = 1e-15);
    }

    #[test]
    fn spacing_times_nyquist_is_pi() {
        for (n, l) in [(8, 1.0), (64, 17.5), (1024, 64.0)] {
            let g = Grid::new(1, n, l).unwrap();
            assert_relative_eq!(g.spacing() * g.nyquist(), PI, epsilon = 1e-15);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(Grid::new(4, 8, 1.0), Err(Error::InvalidDimension(4))));
        assert!(matches!(Grid::new(0, 8, 1.0), Err(Error::InvalidDimension(0))));
        assert!(matches!(Grid::new(1, 7, 1.0), Err(Error::OddPoints(7))));
        assert!(matches!(Grid::new(1, 2, 1.0), Err(Error::OddPoints(2))));
        assert!(matches!(Grid::new(1, 8, 0.0), Err(Error::NonPositiveLength(_))));
        assert!(matches!(Grid::new(1, 8, -2.0), Err(Error::NonPositiveLength(_))));
    }

    #[test]
    fn multi_index_round_trip() {
        let g = Grid::new(3, 4, 1.0).unwrap();
        for flat in 0..g.len() {
            let [a, b, c] = g.multi_index(flat);
            assert_eq!((a * 4 + b) * 4 + c, flat);
        }
    }

    #[test]
    fn sizing_rule() {
        assert_eq!(Grid::points_for_spacing(1600.0, PI / 4.0), 2048);
        assert_eq!(Grid::points_for_spacing(8.0, 1.0), 8);
    }
}
