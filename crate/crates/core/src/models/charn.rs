//! Conditional heteroscedastic autoregression with functional coefficients.

use nalgebra::DMatrix;

use super::coef::CoefFn;
use crate::error::{Error, Result};
use crate::noise::{CovariateSpec, Law};
use crate::stationarity::{Condition, ContractionCertificate, Verdict};
use crate::util::fmt_num;

/// `Y_t = f_1(Y, Z_{t-1}) + ε_t f_2(Y, Z_{t-1})` with threshold-AR mean
/// `θ_0(z) + Σ θ_i(z) y_i⁺ + θ_{i+q}(z) y_i⁻` and power-ARCH scale
/// `(w_0(z) + Σ w_i(z)|y_i|^δ)^{1/δ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Charn {
    pub q: usize,
    /// `θ_0, …, θ_{2q}`.
    pub theta: Vec<CoefFn>,
    /// `w_0, …, w_q`.
    pub w: Vec<CoefFn>,
    pub delta: f64,
    pub noise: Law,
    pub p: f64,
}

impl Charn {
    pub fn validate(&self, cov: &CovariateSpec) -> Result<()> {
        if self.q == 0 {
            return Err(Error::config("model.q", "order must be at least 1"));
        }
        if self.theta.len() != 2 * self.q + 1 {
            return Err(Error::config(
                "model.theta",
                format!("expected theta_0..theta_{}", 2 * self.q),
            ));
        }
        if self.w.len() != self.q + 1 {
            return Err(Error::config("model.w", format!("expected w_0..w_{}", self.q)));
        }
        if !(self.delta >= 1.0 && self.delta.is_finite()) {
            return Err(Error::config("model.delta", "need δ ≥ 1"));
        }
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(Error::config("model.p", "need p ≥ 1"));
        }
        let bounds = cov.bounds();
        for (i, c) in self.theta.iter().enumerate() {
            c.validate(&format!("model.theta_{i}"), cov.dim)?;
        }
        for (i, c) in self.w.iter().enumerate() {
            let key = format!("model.w_{i}");
            c.validate(&key, cov.dim)?;
            c.validate_nonnegative(&key, &bounds)?;
        }
        self.noise.validate("model.noise")
    }

    pub fn head(&self, state: &[f64], z: &[f64], eps: f64) -> f64 {
        let q = self.q;
        let mut f1 = self.theta[0].eval(z);
        let mut s = self.w[0].eval(z);
        for i in 0..q {
            let y = state[i];
            f1 += self.theta[i + 1].eval(z) * y.max(0.0) + self.theta[i + 1 + q].eval(z) * (-y).max(0.0);
            s += self.w[i + 1].eval(z) * y.abs().powf(self.delta);
        }
        f1 + eps * s.max(0.0).powf(1.0 / self.delta)
    }

    /// `(a_{i,1}(z), a_{i,2}(z))` for lag `i` (0-based).
    pub fn lipschitz_pair(&self, i: usize, z: &[f64]) -> (f64, f64) {
        let a1 = self.theta[i + 1].eval(z).abs().max(self.theta[i + 1 + self.q].eval(z).abs());
        let a2 = self.w[i + 1].eval(z).max(0.0).powf(1.0 / self.delta);
        (a1, a2)
    }

    fn sup_pair(&self, i: usize, bounds: &[(f64, f64)]) -> (f64, f64) {
        let a1 = self.theta[i + 1].sup_abs(bounds).max(self.theta[i + 1 + self.q].sup_abs(bounds));
        let a2 = self.w[i + 1].range(bounds).1.max(0.0).powf(1.0 / self.delta);
        (a1, a2)
    }

    /// `‖A1 + A2|ε|‖_p` for nonnegative constants.
    fn lp_norm(&self, a1: f64, a2: f64) -> f64 {
        if a2 == 0.0 {
            return a1;
        }
        if self.p == 1.0 {
            return a1 + a2 * self.noise.abs_moment(1.0);
        }
        if let Law::Rademacher = self.noise {
            return a1 + a2;
        }
        self.noise.expect(|e| (a1 + a2 * e.abs()).powf(self.p)).powf(1.0 / self.p)
    }

    /// Per-lag terms `δ_i = sup_z ‖a_{i,1}(z) + a_{i,2}(z)|ε|‖_p`, bounded by
    /// plugging the coefficient suprema.
    pub fn deltas(&self, cov: &CovariateSpec) -> Vec<f64> {
        let b = cov.bounds();
        (0..self.q)
            .map(|i| {
                let (a1, a2) = self.sup_pair(i, &b);
                self.lp_norm(a1, a2)
            })
            .collect()
    }

    pub fn metadata(&self, cov: &CovariateSpec) -> ContractionCertificate {
        let d = self.deltas(cov);
        let total: f64 = d.iter().sum();
        let mats = d
            .iter()
            .map(|di| DMatrix::from_element(1, 1, total.powf(self.p - 1.0) * di))
            .collect();
        ContractionCertificate::from_matrices("charn", self.p, 1.0, mats, vec![("newdeal_sum".into(), total)])
    }

    pub fn conditions(&self, cov: &CovariateSpec) -> Vec<Condition> {
        let total: f64 = self.deltas(cov).iter().sum();
        let mut out = vec![Condition::governing(
            "newdeal",
            Verdict::from_bool(total < 1.0, format!("sum={}", fmt_num(total))),
        )];
        out.push(Condition::new(
            "moment",
            Verdict::Holds(format!("noise has a finite moment of order {}", fmt_num(self.p))),
        ));
        if self.q == 1 {
            out.push(Condition::new("lyapunov_q1", self.log_lipschitz_q1(cov)));
        }
        out
    }

    /// `E log(a_{1,1}(Z_0) + a_{1,2}(Z_0)|ε_1|) < 0` for `q = 1`.
    fn log_lipschitz_q1(&self, cov: &CovariateSpec) -> Verdict {
        let inner = |z: &[f64]| {
            let (a1, a2) = self.lipschitz_pair(0, z);
            if a2 == 0.0 {
                return a1.ln();
            }
            self.noise.expect(|e| (a1 + a2 * e.abs()).ln())
        };
        let const_coefs = self.theta.iter().chain(&self.w).all(|c| c.is_const());
        let v = if const_coefs {
            inner(&vec![0.0; cov.dim])
        } else if let Some(m) = cov.marginal() {
            m.expect(|z| inner(&[z]))
        } else {
            return Verdict::Undecidable(
                "covariate marginal has no closed form; use the Lyapunov estimator".into(),
            );
        };
        Verdict::from_bool(v < 0.0, format!("chi={}", fmt_num(v)))
    }

    /// Companion matrix of `c_{i,t} = a_{i,1}(z) + a_{i,2}(z)|ε|`.
    pub fn lipschitz_blocks(&self, z: &[f64], eps: f64) -> Vec<DMatrix<f64>> {
        (0..self.q)
            .map(|i| {
                let (a1, a2) = self.lipschitz_pair(i, z);
                DMatrix::from_element(1, 1, a1 + a2 * eps.abs())
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tar(q: usize, t: f64, w: f64) -> Charn {
        let mut theta = vec![CoefFn::Const(0.1)];
        theta.extend((0..2 * q).map(|_| CoefFn::Const(t)));
        let mut ws = vec![CoefFn::Const(1.0)];
        ws.extend((0..q).map(|_| CoefFn::Const(w)));
        Charn { q, theta, w: ws, delta: 2.0, noise: Law::Rademacher, p: 1.0 }
    }

    #[test]
    fn newdeal_for_rademacher() {
        let m = tar(2, 0.2, 0.04);
        let cov = CovariateSpec::iid(1, Law::standard_gaussian());
        let d = m.deltas(&cov);
        assert!((d[0] - 0.4).abs() < 1e-15);
        let c = m.metadata(&cov);
        assert!((c.scalar("newdeal_sum").unwrap() - 0.8).abs() < 1e-15);
        assert!(c.rho_b.unwrap() < 1.0);
    }

    #[test]
    fn lipschitz_bound_is_exact_in_sign() {
        let m = tar(2, -0.3, 0.25);
        let x = [1.5, -0.7];
        let y = [-0.2, 0.4];
        let z = [0.0];
        for eps in [-2.0, -0.1, 0.5, 3.0] {
            let gap = (m.head(&x, &z, eps) - m.head(&y, &z, eps)).abs();
            let bound: f64 = (0..2)
                .map(|i| {
                    let (a1, a2) = m.lipschitz_pair(i, &z);
                    (a1 + a2 * f64::abs(eps)) * (x[i] - y[i]).abs()
                })
                .sum();
            assert!(gap <= bound + 1e-12);
        }
    }
}
