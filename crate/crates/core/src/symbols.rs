//! Radial Fourier symbols of the damped wave operator.
//!
//! With `Δ ↦ −r²` the linear part has the per-frequency generator
//! `[[0, 1], [−r², −2δr²]]`, whose exponential is
//!
//! ```text
//! e^{−δtr²} [ cosh(tβ) + δr² sinh(tβ)/β      sinh(tβ)/β              ]
//!           [ −r² sinh(tβ)/β                 cosh(tβ) − δr² sinh(tβ)/β ]
//! ```
//!
//! with `β² = w = δ²r⁴ − r²`. For `w < 0`, `β = iλ_δ` and the hyperbolic
//! functions become trigonometric. Every evaluation below keeps exponents
//! non-positive, so nothing overflows even when `e^{−δtr²}` underflows.

use num_complex::Complex64;

use crate::duhamel::StateVector;
use crate::spectral::{Grid, SpectralField};
use crate::{par, Error, Result};

/// Below this `|w|t²` the even power series is used.
pub const SERIES_THRESHOLD: f64 = 1e-2;
const SERIES_TERMS: usize = 5;

/// `λ_δ(r) = r√(1 − δ²r²)`, defined for `δr ≤ 1`.
pub fn lambda_delta(r: f64, delta: f64) -> Result<f64> {
    check_radius(r, delta)?;
    let s = delta * r;
    if s > 1.0 {
        return Err(Error::Domain(format!("λ_δ needs δr ≤ 1, got δr = {s}")));
    }
    Ok(r * (1.0 - s * s).sqrt())
}

/// `β_δ(r) = r√(δ²r² − 1)`, defined for `δr ≥ 1`.
pub fn beta_delta(r: f64, delta: f64) -> Result<f64> {
    check_radius(r, delta)?;
    let s = delta * r;
    if s < 1.0 {
        return Err(Error::Domain(format!("β_δ needs δr ≥ 1, got δr = {s}")));
    }
    Ok(r * (s * s - 1.0).sqrt())
}

/// `(λ′, λ″)` with `λ′ = (1 − 2δ²r²)/√(1 − δ²r²)` and
/// `λ″ = rδ²(2δ²r² − 3)/(1 − δ²r²)^{3/2}`.
pub fn lambda_derivatives(r: f64, delta: f64) -> Result<(f64, f64)> {
    check_radius(r, delta)?;
    let s2 = delta * delta * r * r;
    if s2 >= 1.0 {
        return Err(Error::Domain(format!(
            "λ_δ derivatives need δr < 1, got δr = {}",
            s2.sqrt()
        )));
    }
    let q = 1.0 - s2;
    let d1 = (1.0 - 2.0 * s2) / q.sqrt();
    let d2 = r * delta * delta * (2.0 * s2 - 3.0) / (q * q.sqrt());
    Ok((d1, d2))
}

fn check_radius(r: f64, delta: f64) -> Result<()> {
    if !(r >= 0.0) || !(delta >= 0.0) {
        return Err(Error::Domain(format!("need r ≥ 0 and δ ≥ 0, got r = {r}, δ = {delta}")));
    }
    Ok(())
}

/// Heat factor `e^{−δtr²}`.
pub fn heat_factor(r: f64, delta: f64, t: f64) -> f64 {
    (-delta * t * r * r).exp()
}

/// `(e^{−δtr²} cosh(tβ), e^{−δtr²} sinh(tβ)/β)`, the two scalar building blocks.
pub fn heat_cosh_sinhc(r: f64, delta: f64, t: f64) -> (f64, f64) {
    let r2 = r * r;
    let w = r2 * (delta * delta * r2 - 1.0);
    let x = w * t * t;
    if x.abs() < SERIES_THRESHOLD {
        // cosh y = Σ x^k/(2k)!, sinh(y)/y = Σ x^k/(2k+1)!, y² = x
        let (mut ch, mut sh) = (0.0, 0.0);
        let mut term = 1.0;
        let mut pow = 1.0;
        for k in 0..SERIES_TERMS {
            ch += pow / term;
            term *= (2 * k + 1) as f64;
            sh += pow / term;
            term *= (2 * k + 2) as f64;
            pow *= x;
        }
        let heat = heat_factor(r, delta, t);
        (heat * ch, heat * t * sh)
    } else if w < 0.0 {
        let lam = (-w).sqrt();
        let heat = heat_factor(r, delta, t);
        let (s, c) = (t * lam).sin_cos();
        (heat * c, heat * s / lam)
    } else {
        let beta = w.sqrt();
        // δr² − β = r²/(δr² + β), free of cancellation
        let slow = (-t * r2 / (delta * r2 + beta)).exp();
        let fast = (-2.0 * t * beta).exp();
        (
            0.5 * slow * (1.0 + fast),
            -0.5 * slow * (-2.0 * t * beta).exp_m1() / beta,
        )
    }
}

/// `e^{−δtr²} sinh(tβ_δ(r))/β_δ(r)`, total in `r, δ, t ≥ 0`.
pub fn propagator_kernel(r: f64, delta: f64, t: f64) -> f64 {
    heat_cosh_sinhc(r, delta, t).1
}

/// The per-frequency 2×2 semigroup matrix `[[a, b], [c, d]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SemigroupSymbol {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl SemigroupSymbol {
    pub const IDENTITY: Self = Self {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    /// `ad − bc` with one rounding (Kahan's FMA scheme).
    pub fn det(&self) -> f64 {
        let w = self.b * self.c;
        let err = (-self.b).mul_add(self.c, w);
        self.a.mul_add(self.d, -w) + err
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs())
    }

    /// Largest entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.a - other.a)
            .abs()
            .max((self.b - other.b).abs())
            .max((self.c - other.c).abs())
            .max((self.d - other.d).abs())
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }

    #[inline]
    pub fn apply(&self, u: Complex64, v: Complex64) -> (Complex64, Complex64) {
        (u * self.a + v * self.b, u * self.c + v * self.d)
    }
}

/// Semigroup symbol at radius `r`.
pub fn semigroup_entries(r: f64, delta: f64, t: f64) -> SemigroupSymbol {
    let (ch, k) = heat_cosh_sinhc(r, delta, t);
    let damp = delta * r * r * k;
    SemigroupSymbol {
        a: ch + damp,
        b: k,
        c: -r * r * k,
        d: ch - damp,
    }
}

/// A real function of the frequency radius `|ξ|`.
pub trait RadialSymbol: Sync {
    fn eval(&self, r: f64) -> f64;
}

impl<F: Fn(f64) -> f64 + Sync> RadialSymbol for F {
    fn eval(&self, r: f64) -> f64 {
        self(r)
    }
}

/// `r ↦ propagator_kernel(r, δ, t)`.
#[derive(Clone, Copy, Debug)]
pub struct Propagator {
    pub delta: f64,
    pub t: f64,
}

impl RadialSymbol for Propagator {
    fn eval(&self, r: f64) -> f64 {
        propagator_kernel(r, self.delta, self.t)
    }
}

/// `r ↦ e^{−δtr²}`.
#[derive(Clone, Copy, Debug)]
pub struct HeatFactor {
    pub delta: f64,
    pub t: f64,
}

impl RadialSymbol for HeatFactor {
    fn eval(&self, r: f64) -> f64 {
        heat_factor(r, self.delta, self.t)
    }
}

/// A radial symbol sampled on a grid's frequency lattice.
#[derive(Clone, Debug)]
pub struct Multiplier {
    grid: Grid,
    values: Vec<f64>,
}

impl Multiplier {
    pub fn sample<H: RadialSymbol + ?Sized>(grid: &Grid, h: &H) -> Result<Self> {
        let radii = grid.radii();
        let mut values = vec![0.0; radii.len()];
        par::fill_indexed(&mut values, |k| h.eval(radii[k]));
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSymbol { radius: radii[k] });
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    /// Pointwise product of two sampled symbols.
    pub fn product(&self, other: &Self) -> Result<Self> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `sup |h|` over the lattice.
    pub fn sup(&self) -> f64 {
        par::max_by(&self.values, |v| v.abs())
    }

    /// `𝔉⁻¹ h` as a field.
    pub fn kernel(&self) -> SpectralField {
        let spec = self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        SpectralField::from_spectrum(&self.grid, spec).expect("shape preserved")
    }

    /// `𝔉⁻¹(h v̂)`.
    pub fn apply(&self, v: &SpectralField) -> Result<SpectralField> {
        if !self.grid.same_as(v.grid()) {
            return Err(Error::GridMismatch);
        }
        Ok(v.multiply_spectrum(|k, _| Complex64::new(self.values[k], 0.0)))
    }
}

/// `𝔉⁻¹(h(|ξ|) v̂)`.
pub fn apply_multiplier<H: RadialSymbol + ?Sized>(v: &SpectralField, h: &H) -> Result<SpectralField> {
    Multiplier::sample(v.grid(), h)?.apply(v)
}

/// The semigroup symbol tabulated on a grid, reusable across steps.
#[derive(Clone, Debug)]
pub struct SemigroupMultiplier {
    grid: Grid,
    entries: Vec<SemigroupSymbol>,
}

impl SemigroupMultiplier {
    pub fn new(grid: &Grid, delta: f64, t: f64) -> Self {
        let radii = grid.radii();
        let mut entries = vec![SemigroupSymbol::IDENTITY; radii.len()];
        par::fill_indexed(&mut entries, |k| semigroup_entries(radii[k], delta, t));
        Self {
            grid: grid.clone(),
            entries,
        }
    }

    pub fn entries(&self) -> &[SemigroupSymbol] {
        &self.entries
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if !self.grid.same_as(state.psi.grid()) {
            return Err(Error::GridMismatch);
        }
        let (u, v) = (state.psi.spectrum(), state.psi_t.spectrum());
        let n = u.len();
        let mut pairs = vec![(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); n];
        par::fill_indexed(&mut pairs, |k| self.entries[k].apply(u[k], v[k]));
        let (su, sv): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        Ok(StateVector {
            psi: SpectralField::from_spectrum(&self.grid, su)?,
            psi_t: SpectralField::from_spectrum(&self.grid, sv)?,
        })
    }
}

/// `T_δ(t)Ψ`, applied per frequency.
pub fn apply_semigroup(state: &StateVector, delta: f64, t: f64) -> Result<StateVector> {
    state.check()?;
    SemigroupMultiplier::new(state.psi.grid(), delta, t).apply(state)
}
