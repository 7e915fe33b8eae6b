//! Scalar benchmark models: AR-ARCH with functional coefficients and the
//! linear autoregression with a random lag coefficient.

use nalgebra::DMatrix;

use super::coef::CoefFn;
use super::covariate_expectation;
use crate::error::{Error, Result};
use crate::noise::{CovariateFamily, CovariateSpec, Law, Link};
use crate::stationarity::{Condition, ContractionCertificate, Verdict};
use crate::util::fmt_num;

fn expectation_detail(name: &str, v: f64, se: Option<f64>) -> String {
    match se {
        Some(s) => format!("{name}={} (Monte Carlo stderr {})", fmt_num(v), fmt_num(s)),
        None => format!("{name}={}", fmt_num(v)),
    }
}

/// `X_t = a_0(z) + a_1(z) X_{t-1} + ε_t √(b_0(z) + b_1(z) X_{t-1}²)` with `z = Z_{t-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArArch {
    pub a0: CoefFn,
    pub a1: CoefFn,
    pub b0: CoefFn,
    pub b1: CoefFn,
    pub noise: Law,
    pub p: f64,
}

impl ArArch {
    pub fn validate(&self, cov: &CovariateSpec) -> Result<()> {
        let bounds = cov.bounds();
        self.a0.validate("model.a0", cov.dim)?;
        self.a1.validate("model.a1", cov.dim)?;
        self.b0.validate("model.b0", cov.dim)?;
        self.b1.validate("model.b1", cov.dim)?;
        self.b0.validate_nonnegative("model.b0", &bounds)?;
        self.b1.validate_nonnegative("model.b1", &bounds)?;
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(Error::config("model.p", "need p ≥ 1"));
        }
        self.noise.validate("model.noise")
    }

    fn coefs_const(&self) -> bool {
        [&self.a0, &self.a1, &self.b0, &self.b1].iter().all(|c| c.is_const())
    }

    pub fn head(&self, x: f64, z: &[f64], eps: f64) -> f64 {
        let var = (self.b0.eval(z) + self.b1.eval(z) * x * x).max(0.0);
        self.a0.eval(z) + self.a1.eval(z) * x + eps * var.sqrt()
    }

    /// `c(f) = |a_1(z)| + √b_1(z) |ε|`.
    pub fn lipschitz(&self, z: &[f64], eps: f64) -> f64 {
        self.a1.eval(z).abs() + self.b1.eval(z).max(0.0).sqrt() * eps.abs()
    }

    fn centered(&self) -> bool {
        self.noise.mean().abs() < 1e-12
    }

    /// `sup_z (a_1(z)² + v b_1(z))` with the coefficient suprema plugged in.
    pub fn bench2_value(&self, cov: &CovariateSpec) -> f64 {
        let b = cov.bounds();
        self.a1.sup_abs(&b).powi(2) + self.noise.second_moment() * self.b1.range(&b).1
    }

    /// Bound on `E|f(x) − f(y)|^p / |x − y|^p`.
    pub fn contraction_bound(&self, cov: &CovariateSpec) -> f64 {
        if self.p == 2.0 && self.centered() {
            return self.bench2_value(cov);
        }
        let b = cov.bounds();
        let a1 = self.a1.sup_abs(&b);
        let s = self.b1.range(&b).1.max(0.0).sqrt();
        if s == 0.0 {
            return a1.powf(self.p);
        }
        self.noise.expect(|e| (a1 + s * e.abs()).powf(self.p))
    }

    pub fn metadata(&self, cov: &CovariateSpec) -> ContractionCertificate {
        let a = self.contraction_bound(cov);
        let mut scalars = vec![];
        if self.centered() {
            scalars.push(("bench2".into(), self.bench2_value(cov)));
        }
        if let Some(v) = self.bench1(cov).0 {
            scalars.push(("bench1".into(), v));
        }
        if let Some(v) = self.bench3(cov).0 {
            scalars.push(("bench3".into(), v));
        }
        ContractionCertificate::from_matrices(
            "ar_arch_benchmark",
            self.p,
            1.0,
            vec![DMatrix::from_element(1, 1, a)],
            scalars,
        )
    }

    fn expect_over_z<G: Fn(&[f64]) -> f64>(&self, cov: &CovariateSpec, g: G) -> (f64, Option<f64>) {
        if self.coefs_const() {
            (g(&vec![0.0; cov.dim]), None)
        } else {
            covariate_expectation(cov, g)
        }
    }

    /// `E log c(f_1)`.
    fn bench1(&self, cov: &CovariateSpec) -> (Option<f64>, Verdict) {
        let (v, se) = self.expect_over_z(cov, |z| {
            let a = self.a1.eval(z).abs();
            let s = self.b1.eval(z).max(0.0).sqrt();
            if s == 0.0 {
                a.ln()
            } else {
                self.noise.expect(|e| (a + s * e.abs()).ln())
            }
        });
        (Some(v), Verdict::from_bool(v < 0.0, expectation_detail("E log c", v, se)))
    }

    /// `E log(a_1(Z_0)² + v b_1(Z_0))`.
    fn bench3(&self, cov: &CovariateSpec) -> (Option<f64>, Verdict) {
        if !matches!(cov.link, Link::Independent) {
            return (
                None,
                Verdict::Undecidable("needs the noise independent of the covariate process".into()),
            );
        }
        let v2 = self.noise.second_moment();
        let (v, se) = self.expect_over_z(cov, |z| (self.a1.eval(z).powi(2) + v2 * self.b1.eval(z)).ln());
        (Some(v), Verdict::from_bool(v < 0.0, expectation_detail("E log", v, se)))
    }

    pub fn conditions(&self, cov: &CovariateSpec) -> Vec<Condition> {
        let mut out = Vec::new();
        if self.p == 2.0 && self.centered() {
            let k2 = self.bench2_value(cov);
            out.push(Condition::governing(
                "bench2",
                Verdict::from_bool(k2 < 1.0, format!("kappa2={}", fmt_num(k2))),
            ));
        } else {
            let a = self.contraction_bound(cov);
            out.push(Condition::governing(
                "A2",
                Verdict::from_bool(a < 1.0, format!("kappa^p={}, p={}", fmt_num(a), fmt_num(self.p))),
            ));
            if self.centered() {
                let k2 = self.bench2_value(cov);
                out.push(Condition::new("bench2", Verdict::from_bool(k2 < 1.0, format!("kappa2={}", fmt_num(k2)))));
            } else {
                out.push(Condition::new("bench2", Verdict::Undecidable("noise is not centered".into())));
            }
        }
        out.push(Condition::new("bench1", self.bench1(cov).1));
        out.push(Condition::new("bench3", self.bench3(cov).1));
        out
    }
}

/// `X_t = κ(Z_{t-1}) X_{t-1} + ε_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearRc {
    pub kappa: CoefFn,
    pub noise: Law,
    pub p: f64,
}

impl LinearRc {
    pub fn validate(&self, cov: &CovariateSpec) -> Result<()> {
        self.kappa.validate("model.kappa", cov.dim)?;
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(Error::config("model.p", "need p ≥ 1"));
        }
        self.noise.validate("model.noise")
    }

    pub fn head(&self, x: f64, z: &[f64], eps: f64) -> f64 {
        self.kappa.eval(z) * x + eps
    }

    pub fn sup_kappa(&self, cov: &CovariateSpec) -> f64 {
        self.kappa.sup_abs(&cov.bounds())
    }

    pub fn metadata(&self, cov: &CovariateSpec) -> ContractionCertificate {
        let k = self.sup_kappa(cov);
        let mut scalars = vec![("sup_kappa".to_string(), k)];
        if let (Some(v), _) = self.log_kappa(cov) {
            scalars.push(("E_log_kappa".into(), v));
        }
        ContractionCertificate::from_matrices(
            "linear_random_coef",
            self.p,
            1.0,
            vec![DMatrix::from_element(1, 1, k.powf(self.p))],
            scalars,
        )
    }

    fn log_kappa(&self, cov: &CovariateSpec) -> (Option<f64>, String) {
        let (v, se) = if self.kappa.is_const() {
            (self.kappa.eval(&vec![0.0; cov.dim]).abs().ln(), None)
        } else {
            covariate_expectation(cov, |z| self.kappa.eval(z).abs().ln())
        };
        (Some(v), expectation_detail("E log kappa", v, se))
    }

    /// Exact `E Π_{i=1}^j |κ(Z_{t-i})|` where the covariate structure allows it.
    pub fn mean_gap_exact(&self, cov: &CovariateSpec, j: usize) -> Option<f64> {
        if let CoefFn::Const(c) = self.kappa {
            return Some(c.abs().powi(j as i32));
        }
        match (&cov.family, &self.kappa) {
            (CovariateFamily::Iid, _) => {
                let m = cov.marginal()?;
                Some(m.expect(|z| self.kappa.eval(&[z]).abs()).powi(j as i32))
            }
            (CovariateFamily::ProductChain { order }, CoefFn::Affine { base, slope, lo, hi }) => {
                let (zlo, zhi) = cov.bounds()[0];
                if *base != 0.0 || cov.offset[0] != 0.0 {
                    return None;
                }
                let s = slope[0].abs();
                let (klo, khi) = (slope[0] * zlo, slope[0] * zhi);
                if klo.min(khi) < *lo || klo.max(khi) > *hi {
                    return None;
                }
                let q = *order;
                let mut e = s.powi(j as i32);
                // factor a_{t-l} appears once for every i with 0 ≤ l − i ≤ q − 1
                for l in 1..j + q {
                    let count = l.min(j) + 1 - l.saturating_sub(q - 1).max(1);
                    e *= cov.eta_law.raw_moment(count as u32);
                }
                Some(e)
            }
            _ => None,
        }
    }

    /// Whether the exact mean gap tends to zero, with the per-step factor.
    pub fn mean_gap_factor(&self, cov: &CovariateSpec) -> Option<f64> {
        match (&self.kappa, &cov.family) {
            (CoefFn::Const(c), _) => Some(c.abs()),
            (_, CovariateFamily::ProductChain { order }) => {
                let a = self.mean_gap_exact(cov, order + 1)?;
                let b = self.mean_gap_exact(cov, *order)?;
                Some(a / b)
            }
            (_, CovariateFamily::Iid) => self.mean_gap_exact(cov, 1),
            _ => None,
        }
    }

    pub fn conditions(&self, cov: &CovariateSpec) -> Vec<Condition> {
        let k = self.sup_kappa(cov);
        let mut out = vec![Condition::governing(
            "A2",
            Verdict::from_bool(k < 1.0, format!("sup|kappa|={}", fmt_num(k))),
        )];
        let (lk, detail) = self.log_kappa(cov);
        let lk = lk.unwrap();
        out.push(Condition::new("lyapunov", Verdict::from_bool(lk < 0.0, detail.clone())));
        let a2p = if matches!(cov.link, Link::Independent) {
            Verdict::from_bool(lk < 0.0, detail)
        } else {
            Verdict::Undecidable("needs the noise independent of the covariate process".into())
        };
        out.push(Condition::new("A2'", a2p));
        out.push(Condition::new(
            "l1_mean_gap",
            match self.mean_gap_factor(cov) {
                Some(f) => Verdict::from_bool(
                    f < 1.0,
                    format!("per-step factor of E prod kappa={}", fmt_num(f)),
                ),
                None => Verdict::Undecidable("no closed form; see the counterexample mean-gap table".into()),
            },
        ));
        out
    }
}
