//! Measured operator ratios `‖𝔉⁻¹(h v̂)‖_{p′} / ‖v‖_p` and the bounds they are
//! compared against.

use serde::Serialize;

use super::exponents::riesz_alpha;
use super::probes::ProbeFamily;
use crate::littlewood_paley::{besov_norm, besov_shell_norms, build_partition, combine_shells, BesovParams};
use crate::spectral::{conjugate_exponent, SpectralField};
use crate::symbols::{Multiplier, RadialSymbol};
use crate::{par, Error, Result};

/// Multiplicative slack on the interpolation bound (quadrature error).
pub const INTERPOLATION_SLACK: f64 = 1e-2;
/// Largest boundary magnitude of `𝔉⁻¹h`, relative to its peak, for `h` to count as integrable on the box.
pub const KERNEL_BOUNDARY_TOL: f64 = 1e-2;

fn check_p(p: f64) -> Result<()> {
    if (1.0..=2.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidExponent(p))
    }
}

/// `‖𝔉⁻¹(h v̂)‖_{p′} / ‖v‖_p` for `p ∈ [1, 2]`.
pub fn measured_ratio<H: RadialSymbol + ?Sized>(h: &H, v: &SpectralField, p: f64) -> Result<f64> {
    check_p(p)?;
    ratio_with(&Multiplier::sample(v.grid(), h)?, v, p)
}

/// [`measured_ratio`] with a pre-sampled symbol.
pub fn ratio_with(mult: &Multiplier, v: &SpectralField, p: f64) -> Result<f64> {
    check_p(p)?;
    let den = v.lp_norm(p)?;
    if den == 0.0 {
        return Err(Error::ZeroProbe("probe has zero norm".into()));
    }
    Ok(mult.apply(v)?.lp_norm(conjugate_exponent(p))? / den)
}

/// Ratios of every family member for several exponents at once:
/// `out[probe][k]` belongs to `ps[k]`.
pub fn family_ratios(mult: &Multiplier, family: &ProbeFamily, ps: &[f64]) -> Result<Vec<Vec<f64>>> {
    for &p in ps {
        check_p(p)?;
    }
    let idx: Vec<usize> = (0..family.len()).collect();
    par::map_collect(&idx, |&i| -> Result<Vec<f64>> {
        let probe = family.build(i)?;
        let out = mult.apply(&probe.field)?;
        ps.iter()
            .map(|&p| {
                let den = probe.field.lp_norm(p)?;
                if den == 0.0 {
                    return Err(Error::ZeroProbe(probe.label.clone()));
                }
                Ok(out.lp_norm(conjugate_exponent(p))? / den)
            })
            .collect()
    })
    .into_iter()
    .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct InterpolationReport {
    pub p: f64,
    pub alpha: f64,
    /// `‖𝔉⁻¹h‖_∞` on the lattice.
    pub c1: f64,
    /// `sup |h|` on the lattice.
    pub c_inf: f64,
    /// `C₁^α C_∞^{1−α}`: `C_∞` at `p = 2`, `C₁` at `p = 1`.
    pub bound: f64,
    pub max_ratio: f64,
    pub worst_probe: String,
    pub kernel_boundary: f64,
    pub pass: bool,
}

/// Riesz–Thorin check at a single `p`.
pub fn interpolation_check<H: RadialSymbol + ?Sized>(
    h: &H,
    family: &ProbeFamily,
    p: f64,
) -> Result<InterpolationReport> {
    Ok(interpolation_check_multi(h, family, &[p])?.remove(0))
}

/// Riesz–Thorin check at several `p`, sharing the filtered probes.
pub fn interpolation_check_multi<H: RadialSymbol + ?Sized>(
    h: &H,
    family: &ProbeFamily,
    ps: &[f64],
) -> Result<Vec<InterpolationReport>> {
    let mult = Multiplier::sample(family.grid(), h)?;
    let kernel = mult.kernel();
    let kernel_boundary = kernel.boundary_ratio();
    if kernel_boundary > KERNEL_BOUNDARY_TOL {
        return Err(Error::NonIntegrableSymbol { ratio: kernel_boundary });
    }
    let c1 = kernel.sup_norm();
    let c_inf = mult.sup();
    let ratios = family_ratios(&mult, family, ps)?;
    Ok(ps
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let alpha = riesz_alpha(p);
            let bound = c1.powf(alpha) * c_inf.powf(1.0 - alpha);
            let (worst, max_ratio) = ratios
                .iter()
                .enumerate()
                .map(|(i, r)| (i, r[k]))
                .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
            InterpolationReport {
                p,
                alpha,
                c1,
                c_inf,
                bound,
                max_ratio,
                worst_probe: family.kinds()[worst].label(),
                kernel_boundary,
                pass: max_ratio <= (1.0 + INTERPOLATION_SLACK) * bound,
            }
        })
        .collect())
}

/// Constant `3^{q−1}(2^{σq} + 2^{−σq} + 1)` of the Besov lift.
pub fn lemma1_constant(sigma: f64, q: f64) -> f64 {
    3f64.powf(q - 1.0) * (2f64.powf(sigma * q) + 2f64.powf(-sigma * q) + 1.0)
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma1Row {
    pub probe: String,
    /// `max_j ‖𝔉⁻¹(hφ_j v̂)‖_{p′} / ‖v‖_p`.
    pub shell_ratio: f64,
    /// `‖𝔉⁻¹(h v̂)‖_{B^σ_{p′q}} / ‖v‖_{B^σ_{pq}}`.
    pub besov_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma1Report {
    /// Per-shell constant `C`.
    pub c_shell: f64,
    /// The displayed constant `C̃`.
    pub c_tilde: f64,
    pub bound: f64,
    pub max_besov_ratio: f64,
    /// Smallest `C̃` that would still cover the family.
    pub empirical_c_tilde: f64,
    pub rows: Vec<Lemma1Row>,
    pub pass: bool,
}

/// Besov lift of a per-shell `Lᵖ → L^{p′}` bound.
pub fn lemma1_lift_check<H: RadialSymbol + ?Sized>(
    h: &H,
    family: &ProbeFamily,
    params: &BesovParams,
) -> Result<Lemma1Report> {
    check_p(params.p)?;
    let grid = family.grid();
    let mult = Multiplier::sample(grid, h)?;
    let partition = build_partition(grid, params.levels)?;
    let p_conj = conjugate_exponent(params.p);
    let out_params = BesovParams { p: p_conj, ..*params };
    let idx: Vec<usize> = (0..family.len()).collect();
    let rows: Vec<Result<Lemma1Row>> = par::map_collect(&idx, |&i| {
        let probe = family.build(i)?;
        let v = &probe.field;
        let lp = v.lp_norm(params.p)?;
        let besov_v = besov_norm(v, params)?;
        if lp == 0.0 || besov_v == 0.0 {
            return Err(Error::ZeroProbe(probe.label.clone()));
        }
        let w = mult.apply(v)?;
        let shell_norms = besov_shell_norms(&w, &out_params)?;
        debug_assert_eq!(shell_norms.len(), partition.levels() + 1);
        let shell_ratio = shell_norms.iter().fold(0.0f64, |a, n| a.max(n / lp));
        Ok(Lemma1Row {
            probe: probe.label,
            shell_ratio,
            besov_ratio: combine_shells(&shell_norms, params.sigma, params.q) / besov_v,
        })
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let c_shell = rows.iter().fold(0.0f64, |a, r| a.max(r.shell_ratio));
    let max_besov_ratio = rows.iter().fold(0.0f64, |a, r| a.max(r.besov_ratio));
    let c_tilde = lemma1_constant(params.sigma, params.q);
    let bound = c_tilde * c_shell;
    Ok(Lemma1Report {
        c_shell,
        c_tilde,
        bound,
        max_besov_ratio,
        empirical_c_tilde: if c_shell > 0.0 { max_besov_ratio / c_shell } else { 0.0 },
        rows,
        pass: max_besov_ratio <= bound,
    })
}
