//! Binary choice autoregression `Y_t = 1{g(Y_{t-1..t-q}, ζ_t) > 0}`.

use crate::error::{Error, Result};
use crate::noise::{CovariateFamily, CovariateSpec, Law};
use crate::stationarity::{Condition, ContractionCertificate, Verdict};
use crate::util::fmt_num;

#[derive(Debug, Clone, PartialEq)]
pub enum BinaryForm {
    /// `g = Σ a_i y_i + π'Z_{t-1} + ε_t`.
    Linear { a: Vec<f64>, pi: Vec<f64> },
    /// `g = Σ c_i y_i + Σ_i Σ_j [a_{ij} y_i + b_{ij}(1 − y_i)] Z_{j,t-i} + ε_t`.
    Interaction { c: Vec<f64>, a: Vec<Vec<f64>>, b: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Binary {
    pub q: usize,
    pub form: BinaryForm,
    pub noise: Law,
}

/// Outcome of the conditional refresh check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefreshBound {
    pub delta: f64,
    pub k: usize,
}

impl Binary {
    pub fn validate(&self, cov: &CovariateSpec) -> Result<()> {
        if self.q == 0 {
            return Err(Error::config("model.q", "order must be at least 1"));
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match &self.form {
            BinaryForm::Linear { a, pi } => {
                if a.len() != self.q || !finite(a) {
                    return Err(Error::config("model.a", format!("expected {} finite values", self.q)));
                }
                if pi.len() != cov.dim || !finite(pi) {
                    return Err(Error::config("model.pi", format!("expected {} values (covariate dim)", cov.dim)));
                }
            }
            BinaryForm::Interaction { c, a, b } => {
                if c.len() != self.q || !finite(c) {
                    return Err(Error::config("model.c", format!("expected {} finite values", self.q)));
                }
                for (key, m) in [("model.a", a), ("model.b", b)] {
                    if m.len() != self.q || m.iter().any(|r| r.len() != cov.dim || !finite(r)) {
                        return Err(Error::config(
                            key,
                            format!("expected {} rows of {} values", self.q, cov.dim),
                        ));
                    }
                }
            }
        }
        self.noise.validate("model.noise")
    }

    pub fn covariate_lags(&self) -> usize {
        match self.form {
            BinaryForm::Linear { .. } => 1,
            BinaryForm::Interaction { .. } => self.q,
        }
    }

    /// `zlags` holds `Z_{t-1}, …, Z_{t-L}` back to back.
    pub fn index(&self, y: &[f64], zlags: &[f64]) -> f64 {
        match &self.form {
            BinaryForm::Linear { a, pi } => {
                let s: f64 = a.iter().zip(y).map(|(a, y)| a * y).sum();
                s + pi.iter().zip(zlags).map(|(p, z)| p * z).sum::<f64>()
            }
            BinaryForm::Interaction { c, a, b } => {
                let d = a[0].len();
                let mut s = 0.0;
                for i in 0..self.q {
                    s += c[i] * y[i];
                    let z = &zlags[i * d..(i + 1) * d];
                    for j in 0..d {
                        s += (a[i][j] * y[i] + b[i][j] * (1.0 - y[i])) * z[j];
                    }
                }
                s
            }
        }
    }

    pub fn head(&self, y: &[f64], zlags: &[f64], eps: f64) -> f64 {
        if self.index(y, zlags) + eps > 0.0 {
            1.0
        } else {
            0.0
        }
    }

    /// `(φ₊, φ₋)`: extremes of `Σ a_i y_i` over `{0,1}^q`.
    pub fn phi(&self) -> Option<(f64, f64)> {
        match &self.form {
            BinaryForm::Linear { a, .. } => Some((
                a.iter().map(|x| x.max(0.0)).sum(),
                a.iter().map(|x| x.min(0.0)).sum(),
            )),
            BinaryForm::Interaction { .. } => None,
        }
    }

    fn full_support_noise(&self) -> bool {
        let (lo, hi) = self.noise.support();
        lo == f64::NEG_INFINITY && hi == f64::INFINITY
    }

    /// Positivity of at least one of the two refresh events, from the support of `υ_t`.
    fn good(&self, cov: &CovariateSpec) -> Verdict {
        let BinaryForm::Linear { pi, .. } = &self.form else {
            return if self.full_support_noise() {
                Verdict::Holds("noise has full support".into())
            } else {
                Verdict::Undecidable("interaction form with bounded noise".into())
            };
        };
        let (pp, pm) = self.phi().unwrap();
        let (elo, ehi) = self.noise.support();
        let (mut lo, mut hi) = (elo, ehi);
        for (p, (a, b)) in pi.iter().zip(cov.bounds()) {
            if *p == 0.0 {
                continue;
            }
            let (x, y) = if *p > 0.0 { (p * a, p * b) } else { (p * b, p * a) };
            lo += x;
            hi += y;
        }
        // the open support edge is attained only by an atom
        let atom = self.noise.is_discrete() && pi.iter().all(|p| *p == 0.0);
        let up = pm + hi > 0.0;
        let down = if atom { pp + lo <= 0.0 } else { pp + lo < 0.0 };
        let detail = format!(
            "phi_plus={}, phi_minus={}, support of upsilon=[{}, {}]",
            fmt_num(pp),
            fmt_num(pm),
            fmt_num(lo),
            fmt_num(hi)
        );
        Verdict::from_bool(up || down, detail)
    }

    /// `(δ, K)` of the conditional refresh condition where the law of
    /// `υ_1, …, υ_q` given the far past is available in closed form.
    pub fn refresh_bound(&self, cov: &CovariateSpec) -> std::result::Result<RefreshBound, String> {
        let BinaryForm::Linear { pi, .. } = &self.form else {
            return Err("not checked for the interaction form".into());
        };
        let (pp, pm) = self.phi().unwrap();
        let f = &self.noise;
        let q = self.q as i32;
        if pi.iter().all(|p| *p == 0.0) {
            let up = 1.0 - f.cdf(-pm);
            let down = f.cdf(-pp);
            return Ok(RefreshBound { delta: up.powi(q) + down.powi(q), k: 1 });
        }
        let k = match &cov.family {
            CovariateFamily::Iid => 1,
            CovariateFamily::MovingAverage { coefs } if self.q == 1 => coefs.len(),
            CovariateFamily::MovingAverage { .. } => {
                return Err("moving-average covariates with q > 1 give dependent υ_t".into())
            }
            _ => return Err("covariate family has unbounded memory".into()),
        };
        if self.q > 1 && !matches!(cov.link, crate::noise::Link::Independent) {
            return Err("common shock couples consecutive υ_t".into());
        }
        let Some(m) = cov.marginal() else {
            return Err("covariate marginal has no closed form".into());
        };
        let p0 = pi[0];
        let up = m.expect(|z| 1.0 - f.cdf(-pm - p0 * z));
        let down = m.expect(|z| f.cdf(-pp - p0 * z));
        Ok(RefreshBound { delta: up.powi(q) + down.powi(q), k })
    }

    pub fn metadata(&self, cov: &CovariateSpec) -> ContractionCertificate {
        let mut c = ContractionCertificate::empty("binary_choice", 1.0, 1.0);
        if let Some((pp, pm)) = self.phi() {
            c.scalars.push(("phi_plus".into(), pp));
            c.scalars.push(("phi_minus".into(), pm));
        }
        if let Ok(r) = self.refresh_bound(cov) {
            c.scalars.push(("delta".into(), r.delta));
            if r.delta > 0.0 {
                let j = (self.q + r.k).div_ceil(self.q);
                c = c.with_contraction(j * self.q, 1.0 - r.delta);
            }
        }
        c
    }

    pub fn conditions(&self, cov: &CovariateSpec) -> Vec<Condition> {
        let dej = match self.refresh_bound(cov) {
            Ok(r) => Verdict::from_bool(
                r.delta > 0.0,
                format!("delta={}, K={}", fmt_num(r.delta), r.k),
            ),
            Err(why) => Verdict::Undecidable(why),
        };
        vec![Condition::governing("deJ", dej), Condition::new("good", self.good(cov))]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear(a: Vec<f64>, noise: Law) -> Binary {
        Binary { q: a.len(), form: BinaryForm::Linear { a, pi: vec![0.0] }, noise }
    }

    #[test]
    fn phi_by_enumeration() {
        let m = linear(vec![1.0, -2.0], Law::Logistic { loc: 0.0, scale: 1.0 });
        assert_eq!(m.phi(), Some((1.0, -2.0)));
    }

    #[test]
    fn bounded_noise_breaks_good() {
        let m = linear(vec![1.0], Law::Uniform { lo: -0.9, hi: -0.1 });
        let cov = CovariateSpec::iid(1, Law::standard_gaussian());
        let c = m.conditions(&cov);
        assert!(c[1].verdict.fails());
        assert!(c[0].verdict.fails());
    }

    #[test]
    fn logistic_refresh() {
        let m = linear(vec![0.5], Law::Logistic { loc: 0.0, scale: 1.0 });
        let cov = CovariateSpec::iid(1, Law::standard_gaussian());
        let r = m.refresh_bound(&cov).unwrap();
        // P(ε > 0) + P(ε ≤ −0.5)
        let want = 0.5 + 1.0 / (1.0 + 0.5f64.exp());
        assert!((r.delta - want).abs() < 1e-12);
        let c = m.metadata(&cov);
        assert_eq!(c.m, Some(2));
    }
}
