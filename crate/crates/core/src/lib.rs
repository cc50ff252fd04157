//! Spectral machinery for the strongly damped wave equation
//! `ψ_tt − 2δ Δψ_t − Δψ = f(ψ)` on periodic boxes.
//!
//! The crate is organised bottom-up:
//!
//! * [`spectral`] holds grids, fields, the scaled FFT pair, `Lᵖ` norms and dilation.
//! * [`symbols`] evaluates the radial Fourier symbols (dispersion relation, propagator
//!   kernel, 2×2 semigroup symbol) without overflow and applies them to fields.
//! * [`littlewood_paley`] builds the dyadic partition of unity and discrete Besov norms.
//! * [`curvature`] checks the Hessian structure of the radial phase on the annulus.
//! * [`estimator`] is the verification harness for the decay estimates.
//! * [`duhamel`] integrates the semilinear problem through its mild formulation.
//! * [`runner`] wires everything into named, reproducible experiments.
//!
//! Fourier convention: `v̂(ξ) = ∫ v(x) e^{−ix·ξ} dx` with inverse carrying `(2π)^{−n}`,
//! so `Δ ↦ −|ξ|²`.

// `!(x > 0.0)` is the NaN-rejecting guard used throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curvature;
pub mod duhamel;
pub mod error;
pub mod estimator;
pub mod littlewood_paley;
pub mod par;
pub mod runner;
pub mod spectral;
pub mod symbols;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use spectral::{Grid, SpectralField};
