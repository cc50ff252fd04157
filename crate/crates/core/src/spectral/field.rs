use std::f64::consts::PI;
use std::fmt;
use std::sync::OnceLock;

use num_complex::Complex64;

use super::fft::{fft_nd, transpose};
use super::Grid;
use crate::par::{self, REDUCE_CHUNK};
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Relative boundary magnitude above which a dilation is refused.
pub const DILATION_BOUNDARY_TOL: f64 = 1e-12;

/// Samples of a complex function on a [`Grid`] together with its lazily
/// computed Fourier coefficients `v̂(ξ_k) ≈ ∫ v e^{−ix·ξ_k} dx`.
///
/// Fields are values: every operation returns a new field. The only mutating
/// accessor, [`SpectralField::values_mut`], drops the cached spectrum.
#[derive(Clone)]
pub struct SpectralField {
    grid: Grid,
    values: Vec<Complex64>,
    spectrum: OnceLock<Vec<Complex64>>,
}

impl SpectralField {
    pub fn zeros(grid: &Grid) -> Self {
        Self::from_parts(grid.clone(), vec![ZERO; grid.len()])
    }

    pub fn from_values(grid: &Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self::from_parts(grid.clone(), values))
    }

    /// Samples `f(x)` at every lattice point.
    pub fn from_fn<F>(grid: &Grid, f: F) -> Self
    where
        F: Fn(&[f64; 3]) -> Complex64 + Send + Sync,
    {
        let mut values = vec![ZERO; grid.len()];
        par::fill_indexed(&mut values, |i| f(&grid.point(i)));
        Self::from_parts(grid.clone(), values)
    }

    pub fn from_real_fn<F>(grid: &Grid, f: F) -> Self
    where
        F: Fn(&[f64; 3]) -> f64 + Send + Sync,
    {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    /// Builds the field whose Fourier coefficients are `spectrum` (FFT order).
    pub fn from_spectrum(grid: &Grid, spectrum: Vec<Complex64>) -> Result<Self> {
        if spectrum.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.len(),
                got: spectrum.len(),
            });
        }
        let values = inverse_raw(grid, &spectrum);
        let field = Self::from_parts(grid.clone(), values);
        let _ = field.spectrum.set(spectrum);
        Ok(field)
    }

    fn from_parts(grid: Grid, values: Vec<Complex64>) -> Self {
        Self {
            grid,
            values,
            spectrum: OnceLock::new(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Mutable samples; invalidates the cached spectrum.
    pub fn values_mut(&mut self) -> &mut [Complex64] {
        self.spectrum.take();
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Fourier coefficients in FFT order, computed on first use.
    pub fn spectrum(&self) -> &[Complex64] {
        self.spectrum.get_or_init(|| forward_raw(&self.grid, &self.values))
    }

    /// Quadrature `Lᵖ` norm `(Σ|v|ᵖ hⁿ)^{1/p}`; `p = ∞` is the grid maximum.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidExponent(p));
        }
        if p.is_infinite() {
            return Ok(self.sup_norm());
        }
        let w = self.grid.cell_volume();
        let v = &self.values;
        let s = if p == 1.0 {
            par::sum_by(v, |z| z.norm())
        } else if p == 2.0 {
            return Ok((par::sum_by(v, |z| z.norm_sqr()) * w).sqrt());
        } else if p.fract() == 0.0 && p <= 64.0 && (p as i32) % 2 == 0 {
            let k = p as i32 / 2;
            par::sum_by(v, |z| z.norm_sqr().powi(k))
        } else {
            par::sum_by(v, |z| z.norm().powf(p))
        };
        Ok((s * w).powf(1.0 / p))
    }

    /// `max |v|` over the lattice.
    pub fn sup_norm(&self) -> f64 {
        par::max_by(&self.values, |z| z.norm())
    }

    /// Largest magnitude on the outermost lattice layer relative to the peak
    /// (zero for the zero field).
    pub fn boundary_ratio(&self) -> f64 {
        let peak = self.sup_norm();
        if peak == 0.0 {
            return 0.0;
        }
        let mut edge = vec![0.0; self.values.len()];
        par::fill_indexed(&mut edge, |i| {
            if self.grid.on_boundary(i) {
                self.values[i].norm()
            } else {
                0.0
            }
        });
        edge.into_iter().fold(0.0, f64::max) / peak
    }

    /// `c·v`; a cached spectrum is scaled along.
    pub fn scaled(&self, c: Complex64) -> Self {
        let out = self.map(|z| z * c);
        if let Some(s) = self.spectrum.get() {
            let _ = out.spectrum.set(s.iter().map(|z| z * c).collect());
        }
        out
    }

    /// Pointwise map in physical space.
    pub fn map<F>(&self, f: F) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync,
    {
        let mut values = vec![ZERO; self.values.len()];
        par::fill_indexed(&mut values, |i| f(self.values[i]));
        Self::from_parts(self.grid.clone(), values)
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_map<F>(&self, other: &Self, f: F) -> Result<Self>
    where
        F: Fn(Complex64, Complex64) -> Complex64 + Send + Sync,
    {
        self.check_grid(other)?;
        let mut values = vec![ZERO; self.values.len()];
        par::fill_indexed(&mut values, |i| f(self.values[i], other.values[i]));
        Ok(Self::from_parts(self.grid.clone(), values))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    /// `max_i |u_i − v_i|`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_grid(other)?;
        let idx: Vec<usize> = (0..self.values.len()).collect();
        Ok(par::max_by(&idx, |&i| (self.values[i] - other.values[i]).norm()))
    }

    pub(crate) fn check_grid(&self, other: &Self) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Multiplies the spectrum by `m(k, |ξ_k|)` and transforms back.
    pub fn multiply_spectrum<F>(&self, m: F) -> Self
    where
        F: Fn(usize, f64) -> Complex64 + Send + Sync,
    {
        let spec = self.spectrum();
        let radii = self.grid.radii();
        let mut out = vec![ZERO; spec.len()];
        par::fill_indexed(&mut out, |k| spec[k] * m(k, radii[k]));
        Self::from_spectrum(&self.grid, out).expect("shape preserved")
    }

    /// Samples of `x ↦ v(t·x)` by periodic band-limited interpolation.
    ///
    /// Target points `t·x` outside the box read zero, which is why the field
    /// must be negligible at the boundary both before and after.
    pub fn dilate(&self, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!("dilation factor {t}")));
        }
        let before = self.boundary_ratio();
        if before > DILATION_BOUNDARY_TOL {
            return Err(Error::DilationOutsideBox {
                factor: t,
                ratio: before,
            });
        }
        if t == 1.0 {
            return Ok(self.clone());
        }
        let g = &self.grid;
        let n = g.points();
        let matrix = interpolation_matrix(g, t);
        let mut data = self.values.clone();
        let rows = data.len() / n;
        let mut tmp = vec![ZERO; data.len()];
        for _ in 0..g.dim() {
            apply_rows(&mut data, &matrix, n);
            if g.dim() > 1 {
                transpose(&data, &mut tmp, rows, n);
                std::mem::swap(&mut data, &mut tmp);
            }
        }
        let out = Self::from_parts(g.clone(), data);
        let after = out.boundary_ratio();
        if after > DILATION_BOUNDARY_TOL {
            return Err(Error::DilationOutsideBox {
                factor: t,
                ratio: after,
            });
        }
        Ok(out)
    }
}

impl fmt::Debug for SpectralField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralField")
            .field("grid", &self.grid)
            .field("spectrum_cached", &self.spectrum.get().is_some())
            .finish_non_exhaustive()
    }
}

/// Fourier coefficients of `v` (a copy of the cached spectrum).
pub fn forward_transform(v: &SpectralField) -> Vec<Complex64> {
    v.spectrum().to_vec()
}

/// Field with the given coefficients; errors if the length does not match the grid.
pub fn inverse_transform(coeffs: Vec<Complex64>, grid: &Grid) -> Result<SpectralField> {
    SpectralField::from_spectrum(grid, coeffs)
}

/// `v̂_k = hⁿ (−1)^{Σk} DFT(v)_k`: the sign moves the DFT origin to the box centre.
fn forward_raw(grid: &Grid, values: &[Complex64]) -> Vec<Complex64> {
    let mut data = values.to_vec();
    fft_nd(&mut data, grid.dim(), grid.points(), grid.forward_plan());
    let w = grid.cell_volume();
    par::for_each_chunk_mut(&mut data, REDUCE_CHUNK, |ci, c| {
        for (k, z) in c.iter_mut().enumerate() {
            *z *= w * grid.parity_sign(ci * REDUCE_CHUNK + k);
        }
    });
    data
}

/// `v_j = L^{−n} Σ_k (−1)^{Σk} v̂_k e^{2πi j·k/N}`.
fn inverse_raw(grid: &Grid, spectrum: &[Complex64]) -> Vec<Complex64> {
    let w = 1.0 / grid.volume();
    let mut data = spectrum.to_vec();
    par::for_each_chunk_mut(&mut data, REDUCE_CHUNK, |ci, c| {
        for (k, z) in c.iter_mut().enumerate() {
            *z *= w * grid.parity_sign(ci * REDUCE_CHUNK + k);
        }
    });
    fft_nd(&mut data, grid.dim(), grid.points(), grid.inverse_plan());
    data
}

/// Periodic Dirichlet kernel for even `N`: `sin(Nθ/2)·cot(θ/2)/N`, `θ = 2πu/L`.
fn dirichlet(u: f64, n: usize, length: f64) -> f64 {
    let half = PI * u / length;
    let s = half.sin();
    if s.abs() < 1e-14 {
        // θ/2 is a multiple of π; N even makes the limit 1.
        return 1.0;
    }
    (n as f64 * half).sin() * half.cos() / (s * n as f64)
}

/// Row-major `N×N` matrix sending samples at `x_j` to values at `t·x_i`.
fn interpolation_matrix(g: &Grid, t: f64) -> Vec<f64> {
    let n = g.points();
    let half = 0.5 * g.length();
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        let y = t * g.coordinate(i);
        if y < -half || y >= half {
            continue;
        }
        for j in 0..n {
            m[i * n + j] = dirichlet(y - g.coordinate(j), n, g.length());
        }
    }
    m
}

fn apply_rows(data: &mut [Complex64], matrix: &[f64], n: usize) {
    par::for_each_chunk_mut_with(
        data,
        n * 16,
        || vec![ZERO; n],
        |buf, _, chunk| {
            for row in chunk.chunks_mut(n) {
                buf.copy_from_slice(row);
                for (i, out) in row.iter_mut().enumerate() {
                    let m = &matrix[i * n..(i + 1) * n];
                    let (mut re, mut im) = (0.0, 0.0);
                    for (w, z) in m.iter().zip(buf.iter()) {
                        re += w * z.re;
                        im += w * z.im;
                    }
                    *out = Complex64::new(re, im);
                }
            }
        },
    );
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: &Grid, seed: u64) -> SpectralField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..grid.len())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        SpectralField::from_values(grid, values).unwrap()
    }

    fn gaussian(grid: &Grid, a: f64) -> SpectralField {
        SpectralField::from_real_fn(grid, |x| (-a * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp())
    }

    #[test]
    fn constant_maps_to_volume_at_origin() {
        for dim in 1..=3 {
            let g = Grid::new(dim, 8, 3.0).unwrap();
            let v = SpectralField::from_real_fn(&g, |_| 1.0);
            let s = v.spectrum();
            assert_relative_eq!(s[0].re, g.volume(), max_relative = 1e-14);
            assert!(s[1..].iter().all(|z| z.norm() < 1e-12));
        }
    }

    #[test]
    fn plane_wave_hits_single_mode() {
        let g = Grid::new(2, 16, 5.0).unwrap();
        // ξ = (2, −3) lattice steps
        let k = (2usize, 16 - 3);
        let xi = (g.wavenumber(k.0), g.wavenumber(k.1));
        let v = SpectralField::from_fn(&g, |x| Complex64::from_polar(1.0, xi.0 * x[0] + xi.1 * x[1]));
        let s = v.spectrum();
        let hit = k.0 * 16 + k.1;
        assert_relative_eq!(s[hit].re, 25.0, max_relative = 1e-12);
        assert!(s[hit].im.abs() < 1e-10);
        let rest: f64 = s
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != hit)
            .map(|(_, z)| z.norm())
            .sum();
        assert!(rest < 1e-9, "{rest}");
    }

    #[test]
    fn gaussian_transform_matches_closed_form() {
        for dim in 1..=2 {
            let g = Grid::new(dim, 128, 40.0).unwrap();
            let v = gaussian(&g, 0.5);
            let s = v.spectrum();
            let norm = (2.0 * PI).powf(dim as f64 / 2.0);
            let r = g.radii();
            let err = s
                .iter()
                .zip(r)
                .map(|(z, r)| (z - Complex64::new(norm * (-0.5 * r * r).exp(), 0.0)).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-8, "dim {dim}: {err}");
        }
    }

    #[test]
    fn round_trip_and_parseval() {
        for (dim, n) in [(1, 64), (2, 32), (3, 8)] {
            let g = Grid::new(dim, n, 7.0).unwrap();
            let v = random_field(&g, 11);
            let back = inverse_transform(forward_transform(&v), &g).unwrap();
            let scale = v.sup_norm();
            assert!(v.max_abs_diff(&back).unwrap() <= 1e-12 * scale);
            let l2 = v.lp_norm(2.0).unwrap();
            let spec_l2 = (v.spectrum().iter().map(|z| z.norm_sqr()).sum::<f64>() / g.volume()).sqrt();
            assert_relative_eq!(l2, spec_l2, max_relative = 1e-12);
        }
    }

    #[test]
    fn inverse_rejects_wrong_length() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        assert!(matches!(
            inverse_transform(vec![ZERO; 7], &g),
            Err(Error::ShapeMismatch { expected: 8, got: 7 })
        ));
    }

    #[test]
    fn lp_norm_of_one_is_volume() {
        let g = Grid::new(2, 8, 3.0).unwrap();
        let v = SpectralField::from_real_fn(&g, |_| 1.0);
        assert_relative_eq!(v.lp_norm(1.0).unwrap(), 9.0, max_relative = 1e-14);
        assert_relative_eq!(v.lp_norm(4.0).unwrap(), 9f64.powf(0.25), max_relative = 1e-14);
        assert_eq!(v.lp_norm(f64::INFINITY).unwrap(), 1.0);
        assert!(matches!(v.lp_norm(0.5), Err(Error::InvalidExponent(_))));
        assert!(matches!(v.lp_norm(f64::NAN), Err(Error::InvalidExponent(_))));
    }

    #[test]
    fn gaussian_l2_norm() {
        let g = Grid::new(1, 256, 40.0).unwrap();
        let v = gaussian(&g, 1.0);
        // ∫e^{−2x²} = √(π/2), so the norm is (π/2)^{1/4}
        assert!((v.lp_norm(2.0).unwrap() - 1.1195151349202477).abs() < 1e-6);
    }

    #[test]
    fn fractional_and_even_paths_agree() {
        let g = Grid::new(1, 64, 12.0).unwrap();
        let v = random_field(&g, 3);
        let even = v.lp_norm(6.0).unwrap();
        let generic = (v.values().iter().map(|z| z.norm().powf(6.0)).sum::<f64>() * g.cell_volume()).powf(1.0 / 6.0);
        assert_relative_eq!(even, generic, max_relative = 1e-13);
    }

    #[test]
    fn mutation_invalidates_spectrum() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        let mut v = SpectralField::zeros(&g);
        assert_eq!(v.spectrum()[0], ZERO);
        v.values_mut()[0] = Complex64::new(1.0, 0.0);
        assert!(v.spectrum()[0].norm() > 0.0);
    }

    #[test]
    fn dilation_identity_and_gaussian() {
        let g = Grid::new(2, 128, 24.0).unwrap();
        let v = gaussian(&g, 1.0);
        let same = v.dilate(1.0).unwrap();
        assert_eq!(same.values(), v.values());
        let d = v.dilate(2.0).unwrap();
        let exact = gaussian(&g, 4.0);
        assert!(d.max_abs_diff(&exact).unwrap() < 1e-10);
    }

    #[test]
    fn dilation_by_half_matches_direct_series() {
        let g = Grid::new(1, 128, 32.0).unwrap();
        let v = SpectralField::from_fn(&g, |x| {
            Complex64::new(
                (-x[0] * x[0] / 2.0).exp() * (1.0 + 0.5 * (3.0 * x[0]).cos()),
                0.3 * (-x[0] * x[0]).exp(),
            )
        });
        let d = v.dilate(0.5).unwrap();
        // direct evaluation of the trigonometric interpolant at x/2
        let spec = v.spectrum();
        let mut err: f64 = 0.0;
        for i in 0..g.points() {
            let y = 0.5 * g.coordinate(i);
            let mut acc = ZERO;
            for (k, c) in spec.iter().enumerate() {
                acc += c * Complex64::from_polar(1.0, g.wavenumber(k) * y);
            }
            acc /= g.length();
            err = err.max((acc - d.values()[i]).norm());
        }
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn dilation_refuses_leaving_box() {
        let g = Grid::new(1, 64, 16.0).unwrap();
        let v = gaussian(&g, 1.0);
        assert!(matches!(v.dilate(0.25), Err(Error::DilationOutsideBox { .. })));
        assert!(matches!(v.dilate(-1.0), Err(Error::InvalidParameter(_))));
        let wide = gaussian(&g, 0.01);
        assert!(matches!(wide.dilate(2.0), Err(Error::DilationOutsideBox { .. })));
    }
}
