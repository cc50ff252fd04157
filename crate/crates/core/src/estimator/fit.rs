use std::io::Write;

use crate::{Error, Result};

/// Minimum number of points in a decay fit.
pub const MIN_FIT_POINTS: usize = 6;

/// Least-squares fit of `ln value = s ln t + ln C`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayFit {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub slope: f64,
    /// `ln C`.
    pub intercept: f64,
    /// Root-mean-square of the log residuals.
    pub residual: f64,
}

impl DecayFit {
    pub fn constant(&self) -> f64 {
        self.intercept.exp()
    }

    /// CSV `t,value,fitted_slope,residual`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,value,fitted_slope,residual")?;
        for (t, v) in self.times.iter().zip(&self.values) {
            writeln!(w, "{t:e},{v:e},{:e},{:e}", self.slope, self.residual)?;
        }
        Ok(())
    }
}

/// Straight-line fit `y ≈ s x + c`; returns `(s, c, rms residual)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    let c = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - slope * x - c).powi(2)).sum();
    (slope, c, (rss / n).sqrt())
}

fn check_positive(xs: &[f64], ys: &[f64]) -> Result<()> {
    for (x, y) in xs.iter().zip(ys) {
        if !(*x > 0.0) {
            return Err(Error::NonPositiveValue { at: *x, value: *x });
        }
        if !(*y > 0.0) {
            return Err(Error::NonPositiveValue { at: *x, value: *y });
        }
    }
    Ok(())
}

/// Power-law fit over at least [`MIN_FIT_POINTS`] positive samples.
pub fn decay_fit(times: &[f64], values: &[f64]) -> Result<DecayFit> {
    if times.len() != values.len() {
        return Err(Error::ShapeMismatch {
            expected: times.len(),
            got: values.len(),
        });
    }
    if times.len() < MIN_FIT_POINTS {
        return Err(Error::TooFewPoints {
            needed: MIN_FIT_POINTS,
            got: times.len(),
        });
    }
    check_positive(times, values)?;
    let lx: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let (slope, intercept, residual) = linear_fit(&lx, &ly);
    Ok(DecayFit {
        times: times.to_vec(),
        values: values.to_vec(),
        slope,
        intercept,
        residual,
    })
}

/// Slope of `log₂ value` against an index (at least two points).
pub fn log2_slope(index: &[f64], values: &[f64]) -> Result<f64> {
    if index.len() < 2 || index.len() != values.len() {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: index.len().min(values.len()),
        });
    }
    for (j, v) in index.iter().zip(values) {
        if !(*v > 0.0) {
            return Err(Error::NonPositiveValue { at: *j, value: *v });
        }
    }
    let ly: Vec<f64> = values.iter().map(|v| v.log2()).collect();
    Ok(linear_fit(index, &ly).0)
}

/// `count` log-spaced points from `a` to `b` inclusive.
pub fn log_spaced(a: f64, b: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![a];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..count)
        .map(|i| {
            if i == 0 {
                a
            } else if i + 1 == count {
                b
            } else {
                (la + (lb - la) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_power_law() {
        let t = log_spaced(1.0, 100.0, 8);
        let v: Vec<f64> = t.iter().map(|t| 3.0 * t.powf(-0.5)).collect();
        let f = decay_fit(&t, &v).unwrap();
        assert_relative_eq!(f.slope, -0.5, epsilon = 1e-12);
        assert_relative_eq!(f.constant(), 3.0, epsilon = 1e-11);
        assert!(f.residual < 1e-12);
        let f = decay_fit(&t, &t).unwrap();
        assert_relative_eq!(f.slope, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn noisy_power_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let t = log_spaced(4.0, 128.0, 12);
        let v: Vec<f64> = t
            .iter()
            .map(|t| 2.0 * t.powf(-1.0 / 3.0) * (1.0 + rng.gen_range(-0.05..0.05)))
            .collect();
        let f = decay_fit(&t, &v).unwrap();
        assert!((f.slope + 1.0 / 3.0).abs() < 0.05, "{}", f.slope);
    }

    #[test]
    fn rejects_bad_input() {
        let t = log_spaced(1.0, 10.0, 6);
        let mut v = vec![1.0; 6];
        v[2] = 0.0;
        assert!(matches!(decay_fit(&t, &v), Err(Error::NonPositiveValue { .. })));
        assert!(matches!(
            decay_fit(&t[..5], &v[..5]),
            Err(Error::TooFewPoints { needed: 6, got: 5 })
        ));
    }

    #[test]
    fn spacing_endpoints() {
        let t = log_spaced(10.0, 200.0, 12);
        assert_eq!(t.len(), 12);
        assert_eq!(t[0], 10.0);
        assert_eq!(t[11], 200.0);
        assert_relative_eq!(log2_slope(&[1.0, 2.0, 3.0], &[2.0, 4.0, 8.0]).unwrap(), 1.0);
    }
}
