//! Bounded parametric coefficient functions of the covariate.

use crate::error::{Error, Result};

/// A coefficient `θ(z)` whose range over a box is available in closed form.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefFn {
    Const(f64),
    /// `clamp(base + slope·z, lo, hi)`.
    Affine { base: f64, slope: Vec<f64>, lo: f64, hi: f64 },
    /// `lo + (hi - lo) / (1 + exp(-(base + slope·z)))`.
    Logistic { base: f64, slope: Vec<f64>, lo: f64, hi: f64 },
}

fn dot(slope: &[f64], z: &[f64]) -> f64 {
    slope.iter().zip(z).map(|(a, b)| a * b).sum()
}

/// Range of `base + slope·z` over the box.
fn index_range(base: f64, slope: &[f64], bounds: &[(f64, f64)]) -> (f64, f64) {
    let (mut a, mut b) = (base, base);
    for (s, (lo, hi)) in slope.iter().zip(bounds) {
        if *s == 0.0 {
            continue;
        }
        let (x, y) = if *s > 0.0 { (s * lo, s * hi) } else { (s * hi, s * lo) };
        a += x;
        b += y;
    }
    (a, b)
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl CoefFn {
    pub fn eval(&self, z: &[f64]) -> f64 {
        match self {
            CoefFn::Const(c) => *c,
            CoefFn::Affine { base, slope, lo, hi } => (base + dot(slope, z)).clamp(*lo, *hi),
            CoefFn::Logistic { base, slope, lo, hi } => lo + (hi - lo) * logistic(base + dot(slope, z)),
        }
    }

    /// `(inf, sup)` of the coefficient over the covariate box.
    pub fn range(&self, bounds: &[(f64, f64)]) -> (f64, f64) {
        match self {
            CoefFn::Const(c) => (*c, *c),
            CoefFn::Affine { base, slope, lo, hi } => {
                let (a, b) = index_range(*base, slope, bounds);
                (a.clamp(*lo, *hi), b.clamp(*lo, *hi))
            }
            CoefFn::Logistic { base, slope, lo, hi } => {
                let (a, b) = index_range(*base, slope, bounds);
                (lo + (hi - lo) * logistic(a), lo + (hi - lo) * logistic(b))
            }
        }
    }

    /// `sup |θ(z)|` over the box.
    pub fn sup_abs(&self, bounds: &[(f64, f64)]) -> f64 {
        let (a, b) = self.range(bounds);
        a.abs().max(b.abs())
    }

    pub fn is_const(&self) -> bool {
        matches!(self, CoefFn::Const(_))
    }

    pub fn validate(&self, key: &str, dim: usize) -> Result<()> {
        match self {
            CoefFn::Const(c) => {
                if !c.is_finite() {
                    return Err(Error::config(key, "coefficient must be finite"));
                }
            }
            CoefFn::Affine { base, slope, lo, hi } | CoefFn::Logistic { base, slope, lo, hi } => {
                if slope.len() != dim {
                    return Err(Error::config(
                        format!("{key}.slope"),
                        format!("expected {dim} slopes to match the covariate dimension, got {}", slope.len()),
                    ));
                }
                if !base.is_finite() || slope.iter().any(|s| !s.is_finite()) {
                    return Err(Error::config(key, "coefficients must be finite"));
                }
                if lo.is_nan() || hi.is_nan() || lo > hi {
                    return Err(Error::config(format!("{key}.lo"), "need lo ≤ hi"));
                }
                if matches!(self, CoefFn::Logistic { .. }) && !(lo.is_finite() && hi.is_finite()) {
                    return Err(Error::config(format!("{key}.hi"), "logistic coefficient needs a finite range"));
                }
            }
        }
        Ok(())
    }

    /// Check that the coefficient is nonnegative on the whole box.
    pub fn validate_nonnegative(&self, key: &str, bounds: &[(f64, f64)]) -> Result<()> {
        let (lo, _) = self.range(bounds);
        if lo < 0.0 {
            return Err(Error::config(key, format!("coefficient can be negative (infimum {lo})")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_range_is_attained_on_corners() {
        let f = CoefFn::Affine { base: 0.1, slope: vec![0.5, -0.2], lo: -10.0, hi: 10.0 };
        let b = [(0.0, 1.0), (-1.0, 1.0)];
        let (lo, hi) = f.range(&b);
        assert!((lo - (0.1 - 0.2)).abs() < 1e-15);
        assert!((hi - (0.1 + 0.5 + 0.2)).abs() < 1e-15);
        for z in [[0.0, -1.0], [1.0, 1.0], [0.5, 0.0]] {
            let v = f.eval(&z);
            assert!(v >= lo - 1e-15 && v <= hi + 1e-15);
        }
    }

    #[test]
    fn unbounded_box_hits_clip() {
        let f = CoefFn::Affine { base: 0.0, slope: vec![1.0], lo: 0.0, hi: 0.9 };
        assert_eq!(f.range(&[(f64::NEG_INFINITY, f64::INFINITY)]), (0.0, 0.9));
        let g = CoefFn::Logistic { base: 0.0, slope: vec![0.0], lo: 0.2, hi: 0.4 };
        let (a, b) = g.range(&[(f64::NEG_INFINITY, f64::INFINITY)]);
        assert!((a - 0.3).abs() < 1e-15 && a == b);
    }
}
