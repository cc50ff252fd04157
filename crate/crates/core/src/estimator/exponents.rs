use crate::spectral::conjugate_exponent;
use crate::{Error, Result};

/// Lower end `(2n+2)/(n+3)` of the admissible `p` range.
pub fn admissible_p_min(n: usize) -> f64 {
    (2.0 * n as f64 + 2.0) / (n as f64 + 3.0)
}

/// Decay exponent `1 − 2n(1/p − 1/2)`.
pub fn decay_exponent(p: f64, n: usize) -> f64 {
    1.0 - 2.0 * n as f64 * (1.0 / p - 0.5)
}

/// Interpolation parameter `α = 2/p − 1`, so `1/p = α + (1 − α)/2`.
pub fn riesz_alpha(p: f64) -> f64 {
    2.0 / p - 1.0
}

/// Exponents attached to an integrability index `p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentSet {
    pub n: usize,
    pub p: f64,
    pub p_conj: f64,
    pub alpha: f64,
    pub p_min: f64,
    pub decay: f64,
}

impl ExponentSet {
    /// Requires `p ∈ [(2n+2)/(n+3), 2]`.
    pub fn new(p: f64, n: usize) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::InvalidDimension(n));
        }
        let p_min = admissible_p_min(n);
        // small slack so that 6/5 written as 1.2 is accepted
        if !(p >= p_min - 1e-12 && p <= 2.0) {
            return Err(Error::InvalidExponent(p));
        }
        Ok(Self::unchecked(p, n))
    }

    /// Same exponents without the admissibility check (any `p ∈ [1, 2]`).
    pub fn unchecked(p: f64, n: usize) -> Self {
        Self {
            n,
            p,
            p_conj: conjugate_exponent(p),
            alpha: riesz_alpha(p),
            p_min: admissible_p_min(n),
            decay: decay_exponent(p, n),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reference_exponents() {
        let e = ExponentSet::new(6.0 / 5.0, 2).unwrap();
        assert_relative_eq!(e.decay, -1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(e.p_conj, 6.0, epsilon = 1e-14);
        assert_relative_eq!(e.alpha, 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(ExponentSet::new(4.0 / 3.0, 3).unwrap().decay, -0.5, epsilon = 1e-15);
        for n in 1..=3 {
            assert_eq!(ExponentSet::new(2.0, n).unwrap().decay, 1.0);
        }
    }

    #[test]
    fn admissible_range() {
        assert_relative_eq!(admissible_p_min(2), 1.2);
        assert!(matches!(ExponentSet::new(1.1, 2), Err(Error::InvalidExponent(_))));
        assert!(ExponentSet::new(1.2, 2).is_ok());
        assert!(ExponentSet::new(2.5, 2).is_err());
        assert_eq!(ExponentSet::unchecked(1.0, 2).p_conj, f64::INFINITY);
    }
}
