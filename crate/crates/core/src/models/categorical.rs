//! Categorical autoregression with a multinomial-logit kernel.

use crate::error::{Error, Result};
use crate::noise::CovariateSpec;
use crate::stationarity::{Condition, ContractionCertificate, Verdict};
use crate::stats::CompensatedSum;
use crate::util::fmt_num;

/// `K_z(i | y) ∝ exp(c_i + Σ_j a_{ij} y_j + γ_i'z)` on categories `1..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Categorical {
    pub n: usize,
    pub q: usize,
    /// `N` intercepts.
    pub c: Vec<f64>,
    /// `N × q` lag coefficients.
    pub a: Vec<Vec<f64>>,
    /// `N × d` covariate coefficients.
    pub gamma: Vec<Vec<f64>>,
}

impl Categorical {
    /// All-zero coefficients: the uniform kernel.
    pub fn uniform(n: usize, q: usize, dim: usize) -> Self {
        Self { n, q, c: vec![0.0; n], a: vec![vec![0.0; q]; n], gamma: vec![vec![0.0; dim]; n] }
    }

    pub fn validate(&self, cov: &CovariateSpec) -> Result<()> {
        if self.n < 2 {
            return Err(Error::config("model.n", "need at least two categories"));
        }
        if self.q == 0 {
            return Err(Error::config("model.q", "order must be at least 1"));
        }
        if self.c.len() != self.n || self.c.iter().any(|x| !x.is_finite()) {
            return Err(Error::config("model.c", format!("expected {} finite values", self.n)));
        }
        if self.a.len() != self.n || self.a.iter().any(|r| r.len() != self.q || r.iter().any(|x| !x.is_finite())) {
            return Err(Error::config("model.a", format!("expected {} rows of {} values", self.n, self.q)));
        }
        if self.gamma.len() != self.n
            || self.gamma.iter().any(|r| r.len() != cov.dim || r.iter().any(|x| !x.is_finite()))
        {
            return Err(Error::config("model.gamma", format!("expected {} rows of {} values", self.n, cov.dim)));
        }
        Ok(())
    }

    pub fn alphabet(&self) -> Vec<f64> {
        (1..=self.n).map(|i| i as f64).collect()
    }

    fn logits(&self, z: &[f64], y: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let mut s = self.c[i];
                for (a, v) in self.a[i].iter().zip(y) {
                    s += a * v;
                }
                for (g, v) in self.gamma[i].iter().zip(z) {
                    if *g != 0.0 {
                        s += g * v;
                    }
                }
                s
            })
            .collect()
    }

    /// Kernel row `K_z(· | y)`.
    pub fn kernel(&self, z: &[f64], y: &[f64]) -> Vec<f64> {
        let l = self.logits(z, y);
        let top = l.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = l.iter().map(|x| (x - top).exp()).collect();
        let s: f64 = e.iter().sum();
        e.into_iter().map(|x| x / s).collect()
    }

    /// `inf{i : Σ_{j ≤ i} K_z(j | y) ≥ u}`, summed in index order with compensation.
    pub fn kernel_inverse(&self, u: f64, z: &[f64], y: &[f64]) -> Result<usize> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::Domain(format!("kernel inverse needs u in [0, 1], got {u}")));
        }
        let k = self.kernel(z, y);
        let mut acc = CompensatedSum::new();
        for (i, p) in k.iter().enumerate() {
            acc.add(*p);
            if acc.value() >= u {
                return Ok(i + 1);
            }
        }
        // rounding left the total just below u
        Ok(self.n)
    }

    pub fn head(&self, y: &[f64], z: &[f64], u: f64) -> Result<f64> {
        Ok(self.kernel_inverse(u, z, y)? as f64)
    }

    /// `η₋ = inf_z min_{i, y} K_z(i | y)` over the covariate box.
    ///
    /// The logits are affine in `z`, so each `K_z(i|y)` is minimized at a vertex
    /// of the box; coordinates whose γ column is constant cancel and are frozen.
    pub fn eta_minus(&self, bounds: &[(f64, f64)]) -> f64 {
        let d = bounds.len();
        let mut active = Vec::new();
        for j in 0..d {
            let g0 = self.gamma[0][j];
            if self.gamma.iter().any(|r| r[j] != g0) {
                let (lo, hi) = bounds[j];
                if !(lo.is_finite() && hi.is_finite()) {
                    return 0.0;
                }
                active.push(j);
            }
        }
        let mut best = f64::INFINITY;
        let mut z = vec![0.0; d];
        let mut y = vec![1.0; self.q];
        let n_ys = self.n.pow(self.q as u32);
        for corner in 0..(1usize << active.len()) {
            for (b, &j) in active.iter().enumerate() {
                z[j] = if corner >> b & 1 == 1 { bounds[j].1 } else { bounds[j].0 };
            }
            for code in 0..n_ys {
                let mut c = code;
                for v in y.iter_mut() {
                    *v = (c % self.n + 1) as f64;
                    c /= self.n;
                }
                let k = self.kernel(&z, &y);
                best = best.min(k.iter().cloned().fold(f64::INFINITY, f64::min));
            }
        }
        best
    }

    pub fn metadata(&self, cov: &CovariateSpec) -> ContractionCertificate {
        let eta = self.eta_minus(&cov.bounds());
        let delta = eta.powi(self.q as i32);
        let mut c = ContractionCertificate::empty("categorical", 1.0, 1.0);
        c.scalars.push(("eta_minus".into(), eta));
        c.scalars.push(("delta_coalescence".into(), delta));
        if delta > 0.0 {
            c = c.with_contraction(self.q, 1.0 - delta);
        }
        c
    }

    pub fn conditions(&self, cov: &CovariateSpec) -> Vec<Condition> {
        let eta = self.eta_minus(&cov.bounds());
        let c1 = if eta > 0.0 {
            Verdict::Holds(format!("eta_minus={}", fmt_num(eta)))
        } else {
            Verdict::Holds("logit kernel is positive for every z; no uniform lower bound on the box".into())
        };
        let a2 = Verdict::from_bool(
            eta > 0.0,
            format!("eta_minus={}, kappa={}", fmt_num(eta), fmt_num(1.0 - eta.powi(self.q as i32))),
        );
        vec![
            Condition::governing("A2", a2),
            Condition::new("C1", c1),
            Condition::new("C2", Verdict::Holds("uniform noise drawn independently of the past".into())),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::Law;

    #[test]
    fn boundary_maps_to_lower_index() {
        let m = Categorical::uniform(4, 1, 1);
        assert_eq!(m.kernel_inverse(0.25, &[0.0], &[1.0]).unwrap(), 1);
        assert_eq!(m.kernel_inverse(0.0, &[0.0], &[1.0]).unwrap(), 1);
        assert_eq!(m.kernel_inverse(1.0, &[0.0], &[1.0]).unwrap(), 4);
        assert!(m.kernel_inverse(1.5, &[0.0], &[1.0]).is_err());
    }

    #[test]
    fn rows_sum_to_one() {
        let mut m = Categorical::uniform(3, 2, 1);
        m.a = vec![vec![0.3, -1.0], vec![2.0, 0.1], vec![0.0, 0.5]];
        m.gamma = vec![vec![1.0], vec![-1.0], vec![0.0]];
        for z in [-3.0, 0.0, 2.5] {
            let s: f64 = m.kernel(&[z], &[2.0, 3.0]).iter().sum();
            assert!((s - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn eta_minus_cases() {
        let m = Categorical::uniform(3, 1, 1);
        let cov = CovariateSpec::iid(1, Law::standard_gaussian());
        assert!((m.eta_minus(&cov.bounds()) - 1.0 / 3.0).abs() < 1e-15);
        let mut g = m.clone();
        g.gamma = vec![vec![1.0], vec![0.0], vec![0.0]];
        assert_eq!(g.eta_minus(&cov.bounds()), 0.0);
        // N = 2 with odds 4:1 in both directions
        let l4 = 4f64.ln();
        let f = Categorical {
            n: 2,
            q: 1,
            c: vec![3.0 * l4, 0.0],
            a: vec![vec![-2.0 * l4], vec![0.0]],
            gamma: vec![vec![0.0], vec![0.0]],
        };
        assert!((f.eta_minus(&cov.bounds()) - 0.2).abs() < 1e-14);
    }
}
