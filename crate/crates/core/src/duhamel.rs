//! Mild-formulation time stepping for `ψ_tt + 2δ(−Δ)ψ_t − Δψ = f(ψ)`,
//! `f(ψ) = aψ + b|ψ|^{r−1}ψ`.
//!
//! One step solves
//! `Ψ(τ) = T(τ)Ψ₀ + ∫₀^τ T(τ−s) F(Ψ(s)) ds`, `F(Ψ) = (0, f(ψ))`,
//! with the trapezoidal rule on `{0, τ}` and Picard iteration for the implicit
//! endpoint term.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::spectral::{Grid, SpectralField};
use crate::symbols::SemigroupMultiplier;
use crate::{par, Error, Result};

/// `Ψ = (ψ, ∂_t ψ)` on a common grid.
#[derive(Clone, Debug)]
pub struct StateVector {
    pub psi: SpectralField,
    pub psi_t: SpectralField,
}

impl StateVector {
    pub fn new(psi: SpectralField, psi_t: SpectralField) -> Result<Self> {
        let s = Self { psi, psi_t };
        s.check()?;
        Ok(s)
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self {
            psi: SpectralField::zeros(grid),
            psi_t: SpectralField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.psi.grid()
    }

    /// Both components on the same grid.
    pub fn check(&self) -> Result<()> {
        self.psi.check_grid(&self.psi_t)
    }

    pub fn is_finite(&self) -> bool {
        let fin = |f: &SpectralField| f.values().iter().all(|z| z.re.is_finite() && z.im.is_finite());
        fin(&self.psi) && fin(&self.psi_t)
    }

    /// `(‖ψ‖₂² + ‖ψ_t‖₂²)^{1/2}`.
    pub fn energy_norm(&self) -> f64 {
        let a = self.psi.lp_norm(2.0).expect("p = 2");
        let b = self.psi_t.lp_norm(2.0).expect("p = 2");
        a.hypot(b)
    }

    /// Energy norm of `self − other`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        Ok(Self {
            psi: self.psi.sub(&other.psi)?,
            psi_t: self.psi_t.sub(&other.psi_t)?,
        }
        .energy_norm())
    }

    /// Largest componentwise sample difference.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self
            .psi
            .max_abs_diff(&other.psi)?
            .max(self.psi_t.max_abs_diff(&other.psi_t)?))
    }
}

/// Coefficients of `f(ψ) = aψ + b|ψ|^{r−1}ψ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearityParams {
    pub a: f64,
    pub b: f64,
    pub r_exp: f64,
}

impl NonlinearityParams {
    pub fn new(a: f64, b: f64, r_exp: f64) -> Result<Self> {
        let p = Self { a, b, r_exp };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_exp >= 1.0) || !self.a.is_finite() || !self.b.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "nonlinearity needs finite a, b and r ≥ 1, got a = {}, b = {}, r = {}",
                self.a, self.b, self.r_exp
            )));
        }
        Ok(())
    }

    /// `f ≡ 0`.
    pub fn is_zero(&self) -> bool {
        self.a == 0.0 && self.b == 0.0
    }
}

impl Default for NonlinearityParams {
    fn default() -> Self {
        Self {
            a: 0.0,
            b: -1.0,
            r_exp: 3.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrature {
    #[default]
    Trapezoidal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Step size; also the largest step [`duhamel_step`] accepts.
    pub tau: f64,
    pub picard_tol: f64,
    pub picard_max: usize,
    pub quadrature: Quadrature,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tau: 1e-3,
            picard_tol: 1e-10,
            picard_max: 50,
            quadrature: Quadrature::Trapezoidal,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "step τ = {} must be positive",
                self.tau
            )));
        }
        if !(self.picard_tol > 0.0) || self.picard_max == 0 {
            return Err(Error::InvalidParameter(
                "Picard tolerance and iteration cap must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Pointwise `aψ + b|ψ|^{r−1}ψ`; non-finite output from finite input is an overflow.
pub fn nonlinearity_eval(psi: &SpectralField, params: &NonlinearityParams) -> Result<SpectralField> {
    let NonlinearityParams { a, b, r_exp } = *params;
    let out = psi.map(|z| {
        let m = if b == 0.0 {
            0.0
        } else if r_exp == 1.0 {
            1.0
        } else if r_exp == 3.0 {
            z.norm_sqr()
        } else {
            z.norm().powf(r_exp - 1.0)
        };
        z * (a + b * m)
    });
    let bad = out
        .values()
        .iter()
        .zip(psi.values())
        .any(|(o, i)| !(o.re.is_finite() && o.im.is_finite()) && i.re.is_finite() && i.im.is_finite());
    if bad {
        return Err(Error::Overflow);
    }
    Ok(out)
}

/// Reusable one-step integrator for a fixed `(δ, τ)`.
#[derive(Clone, Debug)]
pub struct Stepper {
    delta: f64,
    tau: f64,
    params: NonlinearityParams,
    config: SolverConfig,
    semigroup: SemigroupMultiplier,
}

impl Stepper {
    pub fn new(grid: &Grid, delta: f64, tau: f64, params: &NonlinearityParams, config: &SolverConfig) -> Result<Self> {
        config.validate()?;
        params.validate()?;
        if !(tau > 0.0) || tau > config.tau * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "step {tau} outside (0, {}]",
                config.tau
            )));
        }
        if !(delta >= 0.0) {
            return Err(Error::InvalidParameter(format!("δ = {delta} must be ≥ 0")));
        }
        Ok(Self {
            delta,
            tau,
            params: *params,
            config: *config,
            semigroup: SemigroupMultiplier::new(grid, delta, tau),
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Advances by `τ`; returns the new state and the Picard iterations used.
    pub fn step(&self, state: &StateVector) -> Result<(StateVector, usize)> {
        state.check()?;
        let half = Complex64::new(0.5 * self.tau, 0.0);
        let f0 = nonlinearity_eval(&state.psi, &self.params)?;
        // T(τ)[Ψ₀ + (τ/2)F(Ψ₀)]
        let base = self.semigroup.apply(&StateVector {
            psi: state.psi.clone(),
            psi_t: state.psi_t.add(&f0.scaled(half))?,
        })?;
        let mut current = base.clone();
        for k in 1..=self.config.picard_max {
            let f1 = nonlinearity_eval(&current.psi, &self.params)?;
            let next = StateVector {
                psi: base.psi.clone(),
                psi_t: base.psi_t.add(&f1.scaled(half))?,
            };
            let inc = next.distance(&current)?;
            let scale = next.energy_norm();
            current = next;
            if inc <= self.config.picard_tol * scale {
                return Ok((current, k));
            }
        }
        let f1 = nonlinearity_eval(&current.psi, &self.params)?;
        let last = base.psi_t.add(&f1.scaled(half))?;
        Err(Error::PicardDivergence {
            iterations: self.config.picard_max,
            increment: last.sub(&current.psi_t)?.lp_norm(2.0)?,
        })
    }
}

/// One mild-formulation step of size `τ ≤ config.tau`.
pub fn duhamel_step(
    state: &StateVector,
    delta: f64,
    tau: f64,
    params: &NonlinearityParams,
    config: &SolverConfig,
) -> Result<StateVector> {
    Ok(Stepper::new(state.grid(), delta, tau, params, config)?.step(state)?.0)
}

/// `‖∇u‖₂²` via Parseval.
pub fn gradient_norm_sq(u: &SpectralField) -> f64 {
    let g = u.grid();
    let spec = u.spectrum();
    let radii = g.radii();
    let idx: Vec<usize> = (0..spec.len()).collect();
    par::sum_by(&idx, |&k| radii[k] * radii[k] * spec[k].norm_sqr()) / g.volume()
}

/// `E = ½‖ψ_t‖² + ½‖∇ψ‖² − (a/2)‖ψ‖² − b/(r+1)‖ψ‖_{r+1}^{r+1}`.
///
/// For `a ≠ 0` the quadratic part is indefinite and `E` is only the modified
/// form, not a norm.
pub fn energy(state: &StateVector, params: &NonlinearityParams) -> Result<f64> {
    let kinetic = state.psi_t.lp_norm(2.0)?.powi(2);
    let grad = gradient_norm_sq(&state.psi);
    let mass = state.psi.lp_norm(2.0)?.powi(2);
    let r1 = params.r_exp + 1.0;
    let pot = if params.b == 0.0 {
        0.0
    } else {
        state.psi.lp_norm(r1)?.powf(r1)
    };
    Ok(0.5 * kinetic + 0.5 * grad - 0.5 * params.a * mass - params.b / r1 * pot)
}

/// Dissipation rate `2δ‖∇ψ_t‖²` of the energy above.
pub fn dissipation(state: &StateVector, delta: f64) -> f64 {
    2.0 * delta * gradient_norm_sq(&state.psi_t)
}

/// Diagnostics recorded after each step (and at `t = 0`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiagnosticRow {
    pub step: usize,
    pub t: f64,
    pub energy: f64,
    pub dissipation: f64,
    /// `|(E_k − E_{k−1})/τ + (D_k + D_{k−1})/2|`; zero at `t = 0`.
    pub residual: f64,
    pub psi_l2: f64,
    pub psi_sup: f64,
    pub picard_iterations: usize,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub rows: Vec<DiagnosticRow>,
    pub snapshots: Vec<(f64, StateVector)>,
    pub final_state: StateVector,
}

impl Trajectory {
    /// CSV `t,E,D,psi_l2,psi_sup`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,E,D,psi_l2,psi_sup")?;
        for r in &self.rows {
            writeln!(
                w,
                "{:e},{:e},{:e},{:e},{:e}",
                r.t, r.energy, r.dissipation, r.psi_l2, r.psi_sup
            )?;
        }
        Ok(())
    }

    /// Steps where the energy rose by more than `tol`.
    pub fn energy_increases(&self, tol: f64) -> Vec<usize> {
        self.rows
            .windows(2)
            .filter(|w| w[1].energy - w[0].energy > tol)
            .map(|w| w[1].step)
            .collect()
    }

    /// `max_k |E_k − E_0|`.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.rows[0].energy;
        self.rows.iter().map(|r| (r.energy - e0).abs()).fold(0.0, f64::max)
    }
}

/// Integrates to `t_end = m·τ`, optionally keeping every `snapshot_every`-th state.
pub fn evolve(
    initial: &StateVector,
    delta: f64,
    t_end: f64,
    params: &NonlinearityParams,
    config: &SolverConfig,
    snapshot_every: Option<usize>,
) -> Result<Trajectory> {
    initial.check()?;
    let tau = config.tau;
    let steps_f = t_end / tau;
    let steps = steps_f.round() as usize;
    if !(t_end >= 0.0) || (steps_f - steps as f64).abs() > 1e-9 * steps_f.max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "end time {t_end} is not a multiple of τ = {tau}"
        )));
    }
    let stepper = Stepper::new(initial.grid(), delta, tau, params, config)?;
    let diag = |k: usize, s: &StateVector, iters: usize| -> Result<DiagnosticRow> {
        Ok(DiagnosticRow {
            step: k,
            t: k as f64 * tau,
            energy: energy(s, params)?,
            dissipation: dissipation(s, delta),
            residual: 0.0,
            psi_l2: s.psi.lp_norm(2.0)?,
            psi_sup: s.psi.sup_norm(),
            picard_iterations: iters,
        })
    };
    let mut rows = vec![diag(0, initial, 0)?];
    let mut snapshots = Vec::new();
    if snapshot_every.is_some() {
        snapshots.push((0.0, initial.clone()));
    }
    let mut state = initial.clone();
    for k in 1..=steps {
        let (next, iters) = stepper.step(&state).map_err(|e| match e {
            Error::Overflow => Error::NumericalAbort { step: k },
            other => other,
        })?;
        if !next.is_finite() {
            return Err(Error::NumericalAbort { step: k });
        }
        let mut row = diag(k, &next, iters)?;
        let prev = rows.last().expect("initial row");
        row.residual = ((row.energy - prev.energy) / tau + 0.5 * (row.dissipation + prev.dissipation)).abs();
        rows.push(row);
        if let Some(every) = snapshot_every {
            if every > 0 && k % every == 0 {
                snapshots.push((k as f64 * tau, next.clone()));
            }
        }
        state = next;
    }
    Ok(Trajectory {
        rows,
        snapshots,
        final_state: state,
    })
}

/// Self-convergence against a Richardson-extrapolated reference.
#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub taus: Vec<f64>,
    pub errors: Vec<f64>,
    /// Fitted slope of `ln error` against `ln τ`.
    pub order: f64,
}

/// Runs every `τ` in `taus` plus `min(τ)/2`, extrapolates
/// `(4U_{τ/2} − U_τ)/3` at the finest pair and fits the error decay.
pub fn convergence_study(
    initial: &StateVector,
    delta: f64,
    t_end: f64,
    params: &NonlinearityParams,
    base: &SolverConfig,
    taus: &[f64],
) -> Result<ConvergenceReport> {
    if taus.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: taus.len(),
        });
    }
    let run = |tau: f64| -> Result<StateVector> {
        let cfg = SolverConfig { tau, ..*base };
        Ok(evolve(initial, delta, t_end, params, &cfg, None)?.final_state)
    };
    let finals: Vec<StateVector> = taus.iter().map(|&t| run(t)).collect::<Result<_>>()?;
    let tau_min = taus.iter().cloned().fold(f64::INFINITY, f64::min);
    let i_min = taus.iter().position(|&t| t == tau_min).expect("present");
    let half = run(0.5 * tau_min)?;
    let extrapolate = |fine: &SpectralField, coarse: &SpectralField| fine.zip_map(coarse, |f, c| (4.0 * f - c) / 3.0);
    let reference = StateVector {
        psi: extrapolate(&half.psi, &finals[i_min].psi)?,
        psi_t: extrapolate(&half.psi_t, &finals[i_min].psi_t)?,
    };
    let errors: Vec<f64> = finals.iter().map(|s| s.distance(&reference)).collect::<Result<_>>()?;
    let lx: Vec<f64> = taus.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = errors
        .iter()
        .map(|e| {
            if *e > 0.0 {
                Ok(e.ln())
            } else {
                Err(Error::NonPositiveValue { at: 0.0, value: *e })
            }
        })
        .collect::<Result<_>>()?;
    let order = crate::estimator::linear_fit(&lx, &ly).0;
    Ok(ConvergenceReport {
        taus: taus.to_vec(),
        errors,
        order,
    })
}
