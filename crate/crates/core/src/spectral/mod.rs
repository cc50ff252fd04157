//! Periodic function spaces on `[−L/2, L/2)ⁿ`: lattices, fields, the scaled
//! Fourier pair, `Lᵖ` norms, dilation and snapshot I/O.

mod fft;
mod field;
mod grid;
pub mod snapshot;

pub use field::{forward_transform, inverse_transform, SpectralField, DILATION_BOUNDARY_TOL};
pub use grid::Grid;

/// Conjugate exponent `p′ = p/(p−1)`, with `1′ = ∞` and `∞′ = 1`.
pub fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}
