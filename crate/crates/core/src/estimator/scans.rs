//! Time and parameter scans for the decay estimates.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use super::exponents::ExponentSet;
use super::fit::{decay_fit, log2_slope, DecayFit};
use super::probes::{Probe, ProbeFamily};
use crate::curvature::DELTA_MAX;
use crate::littlewood_paley::{base_bump, besov_norm, shell_weight, BesovParams};
use crate::spectral::{conjugate_exponent, Grid, SpectralField};
use crate::symbols::{apply_multiplier, lambda_delta, lambda_derivatives, propagator_kernel, Multiplier, Propagator};
use crate::{par, Error, Result};

/// Largest allowed phase change of `sin(tλ_δ)` across half a frequency cell.
pub const LITTMAN_PHASE_GUARD: f64 = 0.5;

/// `max / min` of a set of positive numbers.
pub fn spread_factor(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    max / min
}

// ---------------------------------------------------------------- Littman

#[derive(Clone, Debug, Serialize)]
pub struct LittmanScan {
    pub delta: f64,
    pub n: usize,
    /// `(t, ‖𝔉⁻¹(sin(tλ_δ)φ)‖_∞)`.
    pub table: Vec<(f64, f64)>,
    #[serde(skip)]
    pub fit: DecayFit,
    pub slope: f64,
    /// `sup_t (1+t)^{(n−1)/2} · value`.
    pub uniformity: f64,
    pub phase_guard: f64,
}

/// Sizing rule: `L = 8·t_max`, smallest power-of-two `N` with `h ≤ π/4`.
pub fn littman_grid(n: usize, t_max: f64) -> Result<Grid> {
    let length = 8.0 * t_max;
    Grid::new(n, Grid::points_for_spacing(length, PI / 4.0), length)
}

/// `t_max · max_{1/2≤r≤2} |λ′_δ| · (2π/L) / 2`.
pub fn littman_phase_variation(grid: &Grid, delta: f64, t_max: f64) -> Result<f64> {
    let mut slope = 0.0f64;
    for i in 0..=64 {
        let r = 0.5 + 1.5 * i as f64 / 64.0;
        slope = slope.max(lambda_derivatives(r, delta)?.0.abs());
    }
    Ok(0.5 * t_max * slope * grid.frequency_step())
}

/// `‖𝔉⁻¹(sin(tλ_δ(|ξ|)) φ(|ξ|))‖_∞`.
pub fn littman_sup(grid: &Grid, delta: f64, t: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    let symbol = |r: f64| {
        let phi = base_bump(r);
        if phi == 0.0 {
            0.0
        } else {
            (t * lambda_delta(r, delta).unwrap_or(0.0)).sin() * phi
        }
    };
    Ok(Multiplier::sample(grid, &symbol)?.kernel().sup_norm())
}

/// Littman scan on the default grid for `max(times)`.
pub fn littman_decay_scan(delta: f64, n: usize, times: &[f64]) -> Result<LittmanScan> {
    let t_max = times.iter().cloned().fold(0.0, f64::max);
    littman_decay_scan_on(&littman_grid(n, t_max)?, delta, times)
}

/// Littman scan on an explicit grid (the phase guard still applies).
pub fn littman_decay_scan_on(grid: &Grid, delta: f64, times: &[f64]) -> Result<LittmanScan> {
    if !(0.0..=DELTA_MAX).contains(&delta) {
        return Err(Error::InvalidParameter(format!(
            "Littman scan needs δ ∈ [0, 1/(2√2)], got {delta}"
        )));
    }
    if grid.nyquist() < 2.0 {
        return Err(Error::GridTooCoarse(format!(
            "Nyquist {} does not cover the annulus |ξ| < 2",
            grid.nyquist()
        )));
    }
    let t_max = times.iter().cloned().fold(0.0, f64::max);
    let guard = littman_phase_variation(grid, delta, t_max)?;
    if guard > LITTMAN_PHASE_GUARD {
        return Err(Error::GridTooCoarse(format!(
            "phase varies by {guard:.3} rad per half frequency cell (limit {LITTMAN_PHASE_GUARD})"
        )));
    }
    let table: Vec<(f64, f64)> = times
        .iter()
        .map(|&t| littman_sup(grid, delta, t).map(|v| (t, v)))
        .collect::<Result<_>>()?;
    let (ts, vs): (Vec<f64>, Vec<f64>) = table.iter().filter(|(t, _)| *t > 0.0).cloned().unzip();
    let fit = decay_fit(&ts, &vs)?;
    let n = grid.dim();
    let uniformity = table
        .iter()
        .map(|(t, v)| (1.0 + t).powf((n as f64 - 1.0) / 2.0) * v)
        .fold(0.0, f64::max);
    Ok(LittmanScan {
        delta,
        n,
        slope: fit.slope,
        table,
        fit,
        uniformity,
        phase_guard: guard,
    })
}

// ------------------------------------------------------------ shell bounds

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// `δ_j ≤ 1/(2√2)`.
    Small,
    Large,
}

impl Regime {
    pub fn of(delta_j: f64) -> Self {
        if delta_j <= DELTA_MAX {
            Self::Small
        } else {
            Self::Large
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Small => "small",
            Self::Large => "large",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShellBound {
    pub j: usize,
    pub delta_j: f64,
    pub regime: Regime,
    /// `‖𝔉⁻¹(K φ_j)‖_∞` at `t = 1`.
    pub s_j: f64,
    /// `‖K φ_j‖_∞` at `t = 1`.
    pub m_j: f64,
}

/// Points per axis of the per-shell grids.
pub fn shell_grid_points(n: usize) -> usize {
    match n {
        1 => 4096,
        2 => 1024,
        _ => 128,
    }
}

/// Grid whose Nyquist is `1.25 · 2^{j+1}`.
pub fn shell_grid(j: usize, n: usize) -> Result<Grid> {
    let points = shell_grid_points(n);
    let nyquist = 1.25 * 2f64.powi(j as i32 + 1);
    Grid::new(n, points, PI * points as f64 / nyquist)
}

pub fn shell_sup_bounds(delta: f64, j: usize, n: usize) -> Result<ShellBound> {
    shell_sup_bounds_on(&shell_grid(j, n)?, delta, j)
}

pub fn shell_sup_bounds_on(grid: &Grid, delta: f64, j: usize) -> Result<ShellBound> {
    let needed = 2f64.powi(j as i32 + 1);
    if grid.nyquist() < needed {
        return Err(Error::UnresolvedShell {
            level: j,
            needed,
            nyquist: grid.nyquist(),
        });
    }
    let symbol = |r: f64| {
        let w = shell_weight(j, r);
        if w == 0.0 {
            0.0
        } else {
            w * propagator_kernel(r, delta, 1.0)
        }
    };
    let mult = Multiplier::sample(grid, &symbol)?;
    let delta_j = delta * 2f64.powi(j as i32);
    Ok(ShellBound {
        j,
        delta_j,
        regime: Regime::of(delta_j),
        s_j: mult.kernel().sup_norm(),
        m_j: mult.sup(),
    })
}

/// Fitted `log₂` slopes per regime (absent when a regime has < 2 shells).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ShellSlopes {
    pub small_s: Option<f64>,
    pub small_m: Option<f64>,
    pub large_s: Option<f64>,
    pub large_m: Option<f64>,
}

pub fn shell_slopes(bounds: &[ShellBound]) -> Result<ShellSlopes> {
    let mut out = ShellSlopes::default();
    for regime in [Regime::Small, Regime::Large] {
        let sel: Vec<&ShellBound> = bounds.iter().filter(|b| b.regime == regime).collect();
        if sel.len() < 2 {
            continue;
        }
        let js: Vec<f64> = sel.iter().map(|b| b.j as f64).collect();
        let s = log2_slope(&js, &sel.iter().map(|b| b.s_j).collect::<Vec<_>>())?;
        let m = log2_slope(&js, &sel.iter().map(|b| b.m_j).collect::<Vec<_>>())?;
        match regime {
            Regime::Small => (out.small_s, out.small_m) = (Some(s), Some(m)),
            Regime::Large => (out.large_s, out.large_m) = (Some(s), Some(m)),
        }
    }
    Ok(out)
}

/// CSV `j,delta_j,regime,S_j,M_j`.
pub fn write_shell_csv<W: Write>(mut w: W, bounds: &[ShellBound]) -> Result<()> {
    writeln!(w, "j,delta_j,regime,S_j,M_j")?;
    for b in bounds {
        writeln!(w, "{},{:e},{},{:e},{:e}", b.j, b.delta_j, b.regime.name(), b.s_j, b.m_j)?;
    }
    Ok(())
}

// -------------------------------------------------------- scaling identity

/// Relative sup-norm gap between `K_{δ,t}(D)v` and `t·[K_{δ/t,1}(D) v(t·)](·/t)`.
pub fn scaling_identity_check(probe: &Probe, delta: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("time {t} must be positive")));
    }
    let direct = apply_multiplier(&probe.field, &Propagator { delta, t })?;
    let scaled = apply_multiplier(
        &probe.dilate(t)?,
        &Propagator {
            delta: delta / t,
            t: 1.0,
        },
    )?;
    let rhs = scaled.dilate(1.0 / t)?.scaled(Complex64::new(t, 0.0));
    let peak = direct.sup_norm();
    if peak == 0.0 {
        return Err(Error::ZeroProbe(probe.label.clone()));
    }
    Ok(direct.max_abs_diff(&rhs)? / peak)
}

// --------------------------------------------------- propagator ratio scans

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioRow {
    pub t: f64,
    pub probe: String,
    pub p: f64,
    pub ratio: f64,
}

/// `‖K_{δ,t}(D)v‖_{p′}/‖v‖_p` for every `(t, probe, p)`, ordered by `t`, then
/// probe, then `p`.
pub fn propagator_ratios(delta: f64, times: &[f64], family: &ProbeFamily, ps: &[f64]) -> Result<Vec<RatioRow>> {
    for &p in ps {
        if !(1.0..=2.0).contains(&p) {
            return Err(Error::InvalidExponent(p));
        }
    }
    let grid = family.grid();
    let idx: Vec<usize> = (0..family.len()).collect();
    let per_probe: Vec<Result<Vec<Vec<f64>>>> = par::map_collect(&idx, |&i| {
        let probe = family.build(i)?;
        let den: Vec<f64> = ps.iter().map(|&p| probe.field.lp_norm(p)).collect::<Result<_>>()?;
        times
            .iter()
            .map(|&t| {
                let out = Multiplier::sample(grid, &Propagator { delta, t })?.apply(&probe.field)?;
                ps.iter()
                    .zip(&den)
                    .map(|(&p, d)| Ok(out.lp_norm(conjugate_exponent(p))? / d))
                    .collect()
            })
            .collect()
    });
    let per_probe = per_probe.into_iter().collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(times.len() * family.len() * ps.len());
    for (ti, &t) in times.iter().enumerate() {
        for (i, kind) in family.kinds().iter().enumerate() {
            for (k, &p) in ps.iter().enumerate() {
                rows.push(RatioRow {
                    t,
                    probe: kind.label(),
                    p,
                    ratio: per_probe[i][ti][k],
                });
            }
        }
    }
    Ok(rows)
}

/// Rows at `p = 2` breaking `ratio ≤ t` beyond rounding (`1e−12` relative).
pub fn kernel_bound_violations(rows: &[RatioRow]) -> Vec<RatioRow> {
    rows.iter()
        .filter(|r| r.p == 2.0 && r.ratio > r.t * (1.0 + 1e-12))
        .cloned()
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct CorollaryScan {
    pub delta: f64,
    pub p: f64,
    pub exponent: f64,
    /// `(t, R(t), maximising probe)`.
    pub table: Vec<(f64, f64, String)>,
    #[serde(skip)]
    pub fit: DecayFit,
    pub slope: f64,
    pub intercept: f64,
    pub pass: bool,
}

/// Slope slack in the decay acceptance.
pub const COROLLARY_SLOPE_SLACK: f64 = 0.1;

/// Fits `R(t) = max_v ratio` from a ratio table at one `p`.
pub fn corollary_from_rows(delta: f64, p: f64, n: usize, rows: &[RatioRow]) -> Result<CorollaryScan> {
    let exps = ExponentSet::new(p, n)?;
    let mut table: Vec<(f64, f64, String)> = Vec::new();
    for r in rows.iter().filter(|r| r.p == p) {
        match table.last_mut() {
            Some(last) if last.0 == r.t => {
                if r.ratio > last.1 {
                    last.1 = r.ratio;
                    last.2 = r.probe.clone();
                }
            }
            _ => table.push((r.t, r.ratio, r.probe.clone())),
        }
    }
    let ts: Vec<f64> = table.iter().map(|r| r.0).collect();
    let vs: Vec<f64> = table.iter().map(|r| r.1).collect();
    let fit = decay_fit(&ts, &vs)?;
    Ok(CorollaryScan {
        delta,
        p,
        exponent: exps.decay,
        slope: fit.slope,
        intercept: fit.intercept,
        pass: fit.slope <= exps.decay + COROLLARY_SLOPE_SLACK,
        table,
        fit,
    })
}

/// Decay of the family-maximal ratio for the propagator at `(δ, p)`.
pub fn corollary_decay_scan(delta: f64, p: f64, times: &[f64], family: &ProbeFamily) -> Result<CorollaryScan> {
    let n = family.grid().dim();
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    ExponentSet::new(p, n)?;
    let rows = propagator_ratios(delta, times, family, &[p])?;
    corollary_from_rows(delta, p, n, &rows)
}

// ------------------------------------------------------------- Besov scan

#[derive(Clone, Debug, Serialize)]
pub struct BesovRow {
    pub t: f64,
    pub max_ratio: f64,
    pub probe: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct BesovScan {
    pub delta: f64,
    pub exponent: f64,
    pub rows: Vec<BesovRow>,
    pub max_ratio: f64,
}

/// `‖T v‖_{B^σ_{p′q}} / (t^e max(t^σ, t^{−σ}) ‖v‖_{B^σ_{pq}})`, maximised over the family per `t`.
pub fn besov_estimate_check(
    delta: f64,
    params: &BesovParams,
    times: &[f64],
    family: &ProbeFamily,
) -> Result<BesovScan> {
    if !(params.sigma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "σ = {} must be positive",
            params.sigma
        )));
    }
    let grid = family.grid();
    let exps = ExponentSet::new(params.p, grid.dim())?;
    let out_params = BesovParams {
        p: exps.p_conj,
        ..*params
    };
    let idx: Vec<usize> = (0..family.len()).collect();
    let per_probe: Vec<Result<Vec<f64>>> = par::map_collect(&idx, |&i| {
        let probe = family.build(i)?;
        let bv = besov_norm(&probe.field, params)?;
        if bv == 0.0 {
            return Err(Error::ZeroProbe(probe.label.clone()));
        }
        times
            .iter()
            .map(|&t| {
                let out = Multiplier::sample(grid, &Propagator { delta, t })?.apply(&probe.field)?;
                let shape = t.powf(exps.decay) * t.powf(params.sigma).max(t.powf(-params.sigma));
                Ok(besov_norm(&out, &out_params)? / (shape * bv))
            })
            .collect()
    });
    let per_probe = per_probe.into_iter().collect::<Result<Vec<_>>>()?;
    let rows: Vec<BesovRow> = times
        .iter()
        .enumerate()
        .map(|(ti, &t)| {
            let (i, r) = per_probe
                .iter()
                .enumerate()
                .map(|(i, v)| (i, v[ti]))
                .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
            BesovRow {
                t,
                max_ratio: r,
                probe: family.kinds()[i].label(),
            }
        })
        .collect();
    let max_ratio = rows.iter().map(|r| r.max_ratio).fold(0.0, f64::max);
    Ok(BesovScan {
        delta,
        exponent: exps.decay,
        rows,
        max_ratio,
    })
}

/// Sampled-field helper used by tests and benches: `K_{δ,t}(D) v`.
pub fn propagate(v: &SpectralField, delta: f64, t: f64) -> Result<SpectralField> {
    apply_multiplier(v, &Propagator { delta, t })
}
