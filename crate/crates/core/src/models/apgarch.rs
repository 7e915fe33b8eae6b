//! Asymmetric power GARCH with exogenous regressors.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::noise::{CovariateSpec, Law};
use crate::stationarity::{Condition, ContractionCertificate, Verdict};
use crate::util::fmt_num;

/// `Y_t = ε_t h_t^{1/δ}`, `h_t = π'Z_{t-1} + Σ β_i h_{t-i} + α_{i+}(Y⁺_{t-i})^δ + α_{i-}(Y⁻_{t-i})^δ`.
///
/// A state point is `((Y⁺)^δ, (Y⁻)^δ, h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Apgarch {
    pub q: usize,
    pub delta: f64,
    pub pi: Vec<f64>,
    pub beta: Vec<f64>,
    pub alpha_plus: Vec<f64>,
    pub alpha_minus: Vec<f64>,
    pub noise: Law,
}

impl Apgarch {
    pub fn validate(&self, cov: &CovariateSpec) -> Result<()> {
        if self.q == 0 {
            return Err(Error::config("model.q", "order must be at least 1"));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::config("model.delta", "need δ > 0"));
        }
        for (key, v) in [
            ("model.beta", &self.beta),
            ("model.alpha_plus", &self.alpha_plus),
            ("model.alpha_minus", &self.alpha_minus),
        ] {
            if v.len() != self.q {
                return Err(Error::config(key, format!("expected {} values", self.q)));
            }
            if v.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(Error::config(key, "coefficients must be nonnegative"));
            }
        }
        if self.pi.len() != cov.dim {
            return Err(Error::config("model.pi", format!("expected {} values (covariate dim)", cov.dim)));
        }
        if self.pi.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::config("model.pi", "coefficients must be nonnegative"));
        }
        for (j, (p, (lo, _))) in self.pi.iter().zip(cov.bounds()).enumerate() {
            if *p > 0.0 && lo < 0.0 {
                return Err(Error::config(
                    "model.pi",
                    format!("covariate component {} can be negative but its weight is positive", j + 1),
                ));
            }
        }
        self.noise.validate("model.noise")
    }

    pub fn head(&self, state: &[f64], z: &[f64], eps: f64, out: &mut [f64]) -> Result<()> {
        let mut h: f64 = self.pi.iter().zip(z).map(|(p, v)| p * v).sum();
        for i in 0..self.q {
            let x = &state[3 * i..3 * i + 3];
            h += self.alpha_plus[i] * x[0] + self.alpha_minus[i] * x[1] + self.beta[i] * x[2];
        }
        if !(h >= 0.0) {
            return Err(Error::Invariant(format!("negative volatility h = {h}")));
        }
        out[0] = eps.max(0.0).powf(self.delta) * h;
        out[1] = (-eps).max(0.0).powf(self.delta) * h;
        out[2] = h;
        Ok(())
    }

    /// Observation `Y = ε h^{1/δ}` recovered from a state point.
    pub fn observation(&self, point: &[f64]) -> f64 {
        point[0].powf(1.0 / self.delta) - point[1].powf(1.0 / self.delta)
    }

    pub fn half_moments(&self) -> (f64, f64) {
        self.noise.half_moments(self.delta)
    }

    pub fn gamma(&self) -> f64 {
        let (sp, sm) = self.half_moments();
        (0..self.q)
            .map(|i| self.beta[i] + sp * self.alpha_plus[i] + sm * self.alpha_minus[i])
            .sum()
    }

    /// Blocks in the ordering `(h, (Y⁺)^δ, (Y⁻)^δ)`.
    pub fn proof_matrices(&self, sp: f64, sm: f64) -> Vec<DMatrix<f64>> {
        (0..self.q)
            .map(|j| {
                if j == 0 {
                    let a = self.beta[0] + self.alpha_plus[0] * sp + self.alpha_minus[0] * sm;
                    DMatrix::from_row_slice(3, 3, &[a, 0.0, 0.0, sp, 0.0, 0.0, sm, 0.0, 0.0])
                } else {
                    let mut m = DMatrix::zeros(3, 3);
                    m[(0, 0)] = self.beta[j];
                    m[(0, 1)] = self.alpha_plus[j];
                    m[(0, 2)] = self.alpha_minus[j];
                    m
                }
            })
            .collect()
    }

    /// Nonzero eigenvalues `(a ± √(a² + 4(bd + ce)))/2` of the summed blocks.
    pub fn eigen_formula(&self, sp: f64, sm: f64) -> (f64, f64) {
        let a = self.beta.iter().sum::<f64>() + self.alpha_plus[0] * sp + self.alpha_minus[0] * sm;
        let b: f64 = self.alpha_plus[1..].iter().sum();
        let c: f64 = self.alpha_minus[1..].iter().sum();
        let disc = (a * a + 4.0 * (b * sp + c * sm)).sqrt();
        ((a + disc) / 2.0, (a - disc) / 2.0)
    }

    pub fn metadata(&self) -> ContractionCertificate {
        let (sp, sm) = self.half_moments();
        let (e1, e2) = self.eigen_formula(sp, sm);
        let mut scalars = vec![
            ("gamma".to_string(), self.gamma()),
            ("s_plus".to_string(), sp),
            ("s_minus".to_string(), sm),
            ("eigen_formula_plus".to_string(), e1),
            ("eigen_formula_minus".to_string(), e2),
        ];
        if let Some(v) = self.garch_standard() {
            scalars.push(("garch_standard".to_string(), v));
        }
        ContractionCertificate::from_matrices("apgarch_x", 1.0, 1.0, self.proof_matrices(sp, sm), scalars)
    }

    /// `v₊ Σ(α_j + β_j)` for the symmetric δ = 2 case.
    pub fn garch_standard(&self) -> Option<f64> {
        if self.delta == 2.0 && self.alpha_plus == self.alpha_minus {
            let v = self.noise.second_moment();
            Some(v * (self.alpha_plus.iter().sum::<f64>() + self.beta.iter().sum::<f64>()))
        } else {
            None
        }
    }

    pub fn conditions(&self) -> Vec<Condition> {
        let (sp, sm) = self.half_moments();
        let g = self.gamma();
        let detail = format!("gamma={}, s_plus={}, s_minus={}", fmt_num(g), fmt_num(sp), fmt_num(sm));
        let mut out = vec![
            Condition::governing("G2", Verdict::from_bool(g < 1.0, detail)),
            Condition::new("G1", Verdict::Holds("covariate law has a finite first moment".into())),
        ];
        if let Some(v) = self.garch_standard() {
            out.push(Condition::new(
                "garch_standard",
                Verdict::from_bool(v < 1.0, format!("v_plus*sum(alpha+beta)={}", fmt_num(v))),
            ));
        }
        out
    }

    /// Exact Jacobian of the lifted map in the simulation ordering.
    pub fn lipschitz_blocks(&self, eps: f64) -> Vec<DMatrix<f64>> {
        let ep = eps.max(0.0).powf(self.delta);
        let em = (-eps).max(0.0).powf(self.delta);
        (0..self.q)
            .map(|i| {
                let row = [self.alpha_plus[i], self.alpha_minus[i], self.beta[i]];
                let mut m = DMatrix::zeros(3, 3);
                for c in 0..3 {
                    m[(0, c)] = ep * row[c];
                    m[(1, c)] = em * row[c];
                    m[(2, c)] = row[c];
                }
                m
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn garch(beta: f64, a: f64) -> Apgarch {
        Apgarch {
            q: 1,
            delta: 2.0,
            pi: vec![0.1],
            beta: vec![beta],
            alpha_plus: vec![a],
            alpha_minus: vec![a],
            noise: Law::standard_gaussian(),
        }
    }

    #[test]
    fn hand_evaluated_step() {
        let m = Apgarch { beta: vec![0.5], ..garch(0.5, 0.2) };
        // Y = 0.5, h = 1
        let state = [0.25, 0.0, 1.0];
        let mut out = [0.0; 3];
        m.head(&state, &[1.0], 1.0, &mut out).unwrap();
        assert!((out[2] - 0.65).abs() < 1e-15);
        assert!((m.observation(&out) - 0.65f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn gaussian_gamma() {
        let m = garch(0.4, 0.2);
        let (sp, sm) = m.half_moments();
        assert!((sp - 0.5).abs() < 1e-10 && (sm - 0.5).abs() < 1e-10);
        assert!((m.gamma() - 0.6).abs() < 1e-10);
        assert!((m.garch_standard().unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn negative_covariate_rejected() {
        let m = garch(0.4, 0.2);
        let cov = CovariateSpec::iid(1, Law::standard_gaussian());
        assert!(matches!(m.validate(&cov), Err(Error::Config { key, .. }) if key == "model.pi"));
    }
}
