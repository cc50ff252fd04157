//! Hessian structure of the radial phase `x ↦ λ_δ(|x|)` on the annulus
//! `1/2 < |x| < 2`.
//!
//! `Hess λ = (λ′/r)(I + (μ/r²) xxᵀ)` with `μ = (r/λ′)(λ″ − λ′/r)`, so the
//! eigenvalues are `λ′/r` (multiplicity `n − 1`) and `λ″` (along `x`).

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::symbols::{lambda_delta, lambda_derivatives};
use crate::{par, Error, Result};

/// Largest admissible damping, `1/(2√2)`.
pub const DELTA_MAX: f64 = 0.353_553_390_593_273_8;
/// Relative eigenvalue threshold for the rank.
pub const RANK_TOL: f64 = 1e-8;
/// Closed sub-annulus used for the minor scan.
pub const SUB_ANNULUS: (f64, f64) = (0.55, 1.9);

/// The phase `λ_δ(|x|)` in `n` dimensions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialPhase {
    pub delta: f64,
    pub dim: usize,
}

impl RadialPhase {
    pub fn new(delta: f64, dim: usize) -> Result<Self> {
        if !(0.0..=DELTA_MAX).contains(&delta) {
            return Err(Error::InvalidParameter(format!("δ = {delta} outside [0, 1/(2√2)]")));
        }
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidDimension(dim));
        }
        Ok(Self { delta, dim })
    }

    pub fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        if x.len() != self.dim {
            return Err(Error::ShapeMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        hessian_radial(self.delta, x)
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Closed-form Hessian of `λ_δ(|x|)` at `x ≠ 0`, dimension `x.len()`.
pub fn hessian_radial(delta: f64, x: &[f64]) -> Result<DMatrix<f64>> {
    let n = x.len();
    let r = norm(x);
    if r == 0.0 {
        return Err(Error::Domain("Hessian of the radial phase at the origin".into()));
    }
    let outer = DMatrix::from_fn(n, n, |i, j| x[i] * x[j] / (r * r));
    if delta == 0.0 {
        return Ok((DMatrix::identity(n, n) - outer) / r);
    }
    let (d1, d2) = lambda_derivatives(r, delta)?;
    if d1.abs() <= 1e-14 {
        return Err(Error::SingularParameterization { radius: r });
    }
    let mu = (r / d1) * (d2 - d1 / r);
    Ok((DMatrix::identity(n, n) + outer * mu) * (d1 / r))
}

/// Central-difference Hessian of `λ_δ(|x|)` with step `h`.
pub fn finite_difference_hessian(delta: f64, x: &[f64], h: f64) -> Result<DMatrix<f64>> {
    let n = x.len();
    let f = |y: &[f64]| lambda_delta(norm(y), delta);
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let shift = |si: f64, sj: f64| {
                let mut y = x.to_vec();
                y[i] += si;
                y[j] += sj;
                f(&y)
            };
            out[(i, j)] = (shift(h, h)? - shift(h, -h)? - shift(-h, h)? + shift(-h, -h)?) / (4.0 * h * h);
        }
    }
    Ok(out)
}

/// `max |P² − P|` for `P = r·Hess λ_0(x)`, the projection off `x`.
pub fn idempotency_residual(x: &[f64]) -> Result<f64> {
    let p = hessian_radial(0.0, x)? * norm(x);
    Ok((&p * &p - &p).abs().max())
}

/// `det Hess = (λ′/r)^{n−1} λ″`.
pub fn det_hessian(delta: f64, r: f64, n: usize) -> Result<f64> {
    if r <= 0.0 {
        return Err(Error::Domain(format!("radius {r} must be positive")));
    }
    let (d1, d2) = lambda_derivatives(r, delta)?;
    Ok((d1 / r).powi(n as i32 - 1) * d2)
}

/// Number of eigenvalues above `RANK_TOL · max |eig|`.
pub fn rank(m: &DMatrix<f64>) -> usize {
    let eig = SymmetricEigen::new(m.clone()).eigenvalues;
    let top = eig.iter().fold(0.0f64, |a, e| a.max(e.abs()));
    if top == 0.0 {
        return 0;
    }
    eig.iter().filter(|e| e.abs() > RANK_TOL * top).count()
}

/// Minimum Hessian rank over the samples.
pub fn rank_on_annulus(delta: f64, n: usize, samples: &[Vec<f64>]) -> Result<usize> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let phase = RadialPhase::new(delta, n)?;
    let ranks: Vec<Result<usize>> = par::map_collect(samples, |x| phase.hessian(x).map(|h| rank(&h)));
    let mut best = usize::MAX;
    for r in ranks {
        best = best.min(r?);
    }
    Ok(best)
}

/// Largest `|minor|` among all `(n−1)×(n−1)` minors (1 when `n = 1`).
pub fn max_minor(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    if n <= 1 {
        return 1.0;
    }
    let mut best = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let sub = m.clone().remove_row(i).remove_column(j);
            best = best.max(sub.determinant().abs());
        }
    }
    best
}

/// Where the minor bound is attained.
#[derive(Clone, Debug, PartialEq)]
pub struct MinorBound {
    pub value: f64,
    pub delta: f64,
    pub x: Vec<f64>,
}

/// `min_{δ, x} max_minors |minor(Hess λ_δ(x))|` over the sub-annulus.
pub fn minor_lower_bound(deltas: &[f64], n: usize, samples: &[Vec<f64>]) -> Result<MinorBound> {
    if samples.is_empty() || deltas.is_empty() {
        return Err(Error::EmptySamples);
    }
    let (lo, hi) = SUB_ANNULUS;
    if let Some(x) = samples.iter().find(|x| {
        let r = norm(x);
        r < lo - 1e-12 || r > hi + 1e-12
    }) {
        return Err(Error::InvalidParameter(format!(
            "sample radius {} outside [{lo}, {hi}]",
            norm(x)
        )));
    }
    let mut best: Option<MinorBound> = None;
    for &delta in deltas {
        let phase = RadialPhase::new(delta, n)?;
        let values: Vec<Result<f64>> = par::map_collect(samples, |x| phase.hessian(x).map(|h| max_minor(&h)));
        for (x, v) in samples.iter().zip(values) {
            let v = v?;
            if best.as_ref().is_none_or(|b| v < b.value) {
                best = Some(MinorBound {
                    value: v,
                    delta,
                    x: x.clone(),
                });
            }
        }
    }
    Ok(best.expect("non-empty scan"))
}

/// `count` unit vectors in `ℝⁿ`: `±1` for `n = 1`, equal angles for `n = 2`,
/// a Fibonacci lattice for `n = 3`.
pub fn directions(n: usize, count: usize) -> Vec<Vec<f64>> {
    match n {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        _ => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
                    let s = (1.0 - z * z).sqrt();
                    let a = golden * k as f64;
                    vec![s * a.cos(), s * a.sin(), z]
                })
                .collect()
        }
    }
}

/// Evenly spaced radii in `[r_min, r_max]` (inclusive).
pub fn radii(r_min: f64, r_max: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![0.5 * (r_min + r_max)];
    }
    (0..count)
        .map(|i| r_min + (r_max - r_min) * i as f64 / (count - 1) as f64)
        .collect()
}

/// Radii × directions sample set.
pub fn annulus_samples(n: usize, radii: &[f64], n_dirs: usize) -> Vec<Vec<f64>> {
    let dirs = directions(n, n_dirs);
    radii
        .iter()
        .flat_map(|&r| dirs.iter().map(move |u| u.iter().map(|c| c * r).collect()))
        .collect()
}

/// One row of the curvature report.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureRow {
    pub delta: f64,
    pub r: f64,
    pub det: f64,
    pub rank: usize,
    pub min_minor_max: f64,
}

/// Per `(δ, r)`: product-formula determinant, minimum rank and minimum over
/// directions of the largest minor.
pub fn curvature_report(deltas: &[f64], n: usize, radii: &[f64], n_dirs: usize) -> Result<Vec<CurvatureRow>> {
    let dirs = directions(n, n_dirs);
    let mut rows = Vec::with_capacity(deltas.len() * radii.len());
    for &delta in deltas {
        let phase = RadialPhase::new(delta, n)?;
        for &r in radii {
            let pts: Vec<Vec<f64>> = dirs.iter().map(|u| u.iter().map(|c| c * r).collect()).collect();
            let hs: Vec<Result<DMatrix<f64>>> = par::map_collect(&pts, |x| phase.hessian(x));
            let mut rank_min = usize::MAX;
            let mut minor_min = f64::INFINITY;
            for h in hs {
                let h = h?;
                rank_min = rank_min.min(rank(&h));
                minor_min = minor_min.min(max_minor(&h));
            }
            rows.push(CurvatureRow {
                delta,
                r,
                det: det_hessian(delta, r, n)?,
                rank: rank_min,
                min_minor_max: minor_min,
            });
        }
    }
    Ok(rows)
}

pub fn write_report_csv<W: Write>(mut w: W, rows: &[CurvatureRow]) -> Result<()> {
    writeln!(w, "delta,r,det,rank,min_minor_max")?;
    for row in rows {
        writeln!(
            w,
            "{:e},{:e},{:e},{},{:e}",
            row.delta, row.r, row.det, row.rank, row.min_minor_max
        )?;
    }
    Ok(())
}
