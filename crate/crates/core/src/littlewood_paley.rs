//! Dyadic partition of unity on the frequency lattice and discrete Besov norms.
//!
//! The cutoff `χ` equals 1 on `[0, 1]`, 0 on `[2, ∞)` and is C^∞ in between.
//! Shells are `φ_0 = χ`, `φ_j(ξ) = χ(2^{−j}|ξ|) − χ(2^{1−j}|ξ|)`, so partial sums
//! telescope to `χ(2^{−J}|ξ|)` and shells more than one apart have disjoint
//! supports exactly (not just numerically).

use std::io::Write;

use num_complex::Complex64;

use crate::spectral::{Grid, SpectralField};
use crate::{par, Error, Result};

/// Relative spectral mass allowed above `2^J`.
pub const LEAKAGE_TOL: f64 = 1e-10;

/// `η(s) = e^{−1/s}` for `s > 0`, else 0.
fn eta(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

/// Smooth radial cutoff: 1 on `s ≤ 1`, 0 on `s ≥ 2`.
pub fn chi(s: f64) -> f64 {
    if s <= 1.0 {
        return 1.0;
    }
    if s >= 2.0 {
        return 0.0;
    }
    let a = eta(2.0 - s);
    a / (a + eta(s - 1.0))
}

/// `φ_j(r)` for the dyadic shell `j ≥ 0`.
pub fn shell_weight(j: usize, r: f64) -> f64 {
    if j == 0 {
        chi(r)
    } else {
        let s = r / (1u64 << j) as f64;
        chi(s) - chi(2.0 * s)
    }
}

/// Base bump `φ(r) = χ(r) − χ(2r)`, supported in `(1/2, 2)`.
pub fn base_bump(r: f64) -> f64 {
    chi(r) - chi(2.0 * r)
}

/// Shells `φ_0..φ_J` on a grid's frequency lattice.
#[derive(Clone, Debug)]
pub struct DyadicPartition {
    grid: Grid,
    levels: usize,
}

/// Builds the partition; every shell must lie inside the axis Nyquist range.
pub fn build_partition(grid: &Grid, levels: usize) -> Result<DyadicPartition> {
    let needed = 2f64.powi(levels as i32 + 1);
    if grid.nyquist() < needed {
        return Err(Error::UnresolvedShell {
            level: levels,
            needed,
            nyquist: grid.nyquist(),
        });
    }
    Ok(DyadicPartition {
        grid: grid.clone(),
        levels,
    })
}

impl DyadicPartition {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Truncation level `J`.
    pub fn levels(&self) -> usize {
        self.levels
    }

    fn check(&self, j: usize) -> Result<()> {
        if j > self.levels {
            Err(Error::ShellOutOfRange {
                index: j,
                levels: self.levels,
            })
        } else {
            Ok(())
        }
    }

    /// `φ_j` sampled on the lattice (FFT order).
    pub fn shell(&self, j: usize) -> Result<Vec<f64>> {
        self.check(j)?;
        let radii = self.grid.radii();
        let mut out = vec![0.0; radii.len()];
        par::fill_indexed(&mut out, |k| shell_weight(j, radii[k]));
        Ok(out)
    }

    /// `𝔉⁻¹(φ_j v̂)`.
    pub fn project(&self, v: &SpectralField, j: usize) -> Result<SpectralField> {
        self.check(j)?;
        if !self.grid.same_as(v.grid()) {
            return Err(Error::GridMismatch);
        }
        Ok(v.multiply_spectrum(|_, r| Complex64::new(shell_weight(j, r), 0.0)))
    }

    /// `max |v̂|` above `2^J` relative to `max |v̂|`.
    pub fn leakage(&self, v: &SpectralField) -> f64 {
        let cut = 2f64.powi(self.levels as i32);
        let spec = v.spectrum();
        let radii = self.grid.radii();
        let idx: Vec<usize> = (0..spec.len()).collect();
        let peak = par::max_by(&idx, |&k| spec[k].norm());
        if peak == 0.0 {
            return 0.0;
        }
        par::max_by(&idx, |&k| if radii[k] > cut { spec[k].norm() } else { 0.0 }) / peak
    }

    /// CSV rows `j,r,phi` for every shell over the given radii.
    pub fn write_csv<W: Write>(&self, mut w: W, radii: &[f64]) -> Result<()> {
        writeln!(w, "j,r,phi")?;
        for j in 0..=self.levels {
            for &r in radii {
                writeln!(w, "{j},{r:e},{:e}", shell_weight(j, r))?;
            }
        }
        Ok(())
    }
}

/// `𝔉⁻¹(φ_j v̂)` with a partition built for the field's grid.
pub fn shell_project(v: &SpectralField, partition: &DyadicPartition, j: usize) -> Result<SpectralField> {
    partition.project(v, j)
}

/// Parameters of `B^σ_{pq}` truncated at level `J`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesovParams {
    pub sigma: f64,
    pub p: f64,
    pub q: f64,
    pub levels: usize,
}

impl BesovParams {
    pub fn new(sigma: f64, p: f64, q: f64, levels: usize) -> Result<Self> {
        for (name, e) in [("p", p), ("q", q)] {
            if e.is_nan() || e < 1.0 {
                return Err(Error::InvalidParameter(format!("Besov {name} = {e} must be ≥ 1")));
            }
        }
        if levels < 1 {
            return Err(Error::InvalidParameter("Besov truncation J must be ≥ 1".into()));
        }
        if !sigma.is_finite() {
            return Err(Error::InvalidParameter(format!("Besov σ = {sigma}")));
        }
        Ok(Self { sigma, p, q, levels })
    }
}

/// `‖𝔉⁻¹(φ_j v̂)‖_p` for `j = 0..=J`, after the leakage check.
pub fn besov_shell_norms(v: &SpectralField, params: &BesovParams) -> Result<Vec<f64>> {
    let partition = build_partition(v.grid(), params.levels)?;
    let leak = partition.leakage(v);
    if leak > LEAKAGE_TOL {
        return Err(Error::SpectralLeakage {
            ratio: leak,
            tolerance: LEAKAGE_TOL,
        });
    }
    (0..=params.levels)
        .map(|j| partition.project(v, j)?.lp_norm(params.p))
        .collect()
}

/// `ℓ^q` combination `(Σ_j (2^{jσ} n_j)^q)^{1/q}`; `q = ∞` takes the maximum.
pub fn combine_shells(norms: &[f64], sigma: f64, q: f64) -> f64 {
    let weighted = norms.iter().enumerate().map(|(j, n)| 2f64.powf(j as f64 * sigma) * n);
    if q.is_infinite() {
        weighted.fold(0.0, f64::max)
    } else {
        weighted.map(|x| x.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// Truncated discrete Besov norm `‖v‖_{B^σ_{pq}}`.
pub fn besov_norm(v: &SpectralField, params: &BesovParams) -> Result<f64> {
    let norms = besov_shell_norms(v, params)?;
    Ok(combine_shells(&norms, params.sigma, params.q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn cutoff_values() {
        assert_eq!(chi(0.0), 1.0);
        assert_eq!(chi(1.0), 1.0);
        assert_eq!(chi(2.0), 0.0);
        assert!((chi(1.5) - 0.5).abs() < 1e-15);
        assert_eq!(base_bump(0.5), 0.0);
        assert_eq!(base_bump(1.0), 1.0);
        assert_eq!(base_bump(2.0), 0.0);
    }

    #[test]
    fn shell_at_dyadic_radius_is_one() {
        for j in 1..6 {
            assert_eq!(shell_weight(j, 2f64.powi(j as i32)), 1.0);
        }
    }

    #[test]
    fn low_radius_in_base_shell() {
        for j in 1..=3 {
            assert_eq!(shell_weight(j, 0.3), 0.0);
        }
        assert_eq!(shell_weight(0, 0.3), 1.0);
    }

    #[test]
    fn unresolved_levels_rejected() {
        let g = Grid::new(1, 16, 2.0 * PI).unwrap();
        assert!(build_partition(&g, 2).is_ok());
        assert!(matches!(
            build_partition(&g, 3),
            Err(Error::UnresolvedShell { level: 3, .. })
        ));
        let p = build_partition(&g, 2).unwrap();
        assert!(matches!(
            p.shell(3),
            Err(Error::ShellOutOfRange { index: 3, levels: 2 })
        ));
    }

    #[test]
    fn params_validation() {
        assert!(BesovParams::new(1.0, 0.5, 2.0, 3).is_err());
        assert!(BesovParams::new(1.0, 2.0, 2.0, 0).is_err());
        assert!(BesovParams::new(1.0, 2.0, f64::INFINITY, 3).is_ok());
    }

    #[test]
    fn csv_export() {
        let g = Grid::new(1, 16, 2.0 * PI).unwrap();
        let p = build_partition(&g, 1).unwrap();
        let mut out = Vec::new();
        p.write_csv(&mut out, &[0.0, 2.0]).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text, "j,r,phi\n0,0e0,1e0\n0,2e0,0e0\n1,0e0,0e0\n1,2e0,1e0\n");
    }
}
