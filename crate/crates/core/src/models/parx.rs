//! Poisson autoregression with exogenous covariates.

use nalgebra::DMatrix;

use super::Shock;
use crate::error::{Error, Result};
use crate::noise::{Channel, CovariateSpec, SeedStream, SlotRng};
use crate::stationarity::{Condition, ContractionCertificate, Verdict};
use crate::util::fmt_num;

/// Largest intensity for which arrivals are generated.
pub const LAMBDA_MAX: f64 = 1e6;

/// Arrival times of the unit-rate Poisson process attached to one time index.
///
/// The first spacing is the exponential quantile of the ε-uniform of that
/// time; later spacings come from the arrivals channel and are generated only
/// when a larger intensity asks for them. Counting arrivals below λ for two
/// intensities on the same view gives the monotone coupling
/// `N_h - N_g = #arrivals in (g, h]`.
pub struct PoissonArrivalView {
    source: Option<(SeedStream, i64, bool)>,
    rng: Option<SlotRng>,
    times: Vec<f64>,
}

impl PoissonArrivalView {
    pub fn new(stream: SeedStream, t: i64, prime: bool, u_first: f64) -> Self {
        Self {
            source: Some((stream, t, prime)),
            rng: None,
            times: vec![-u_first.ln()],
        }
    }

    fn extend_to(&mut self, lambda: f64) {
        while *self.times.last().unwrap() <= lambda {
            if self.rng.is_none() {
                let (s, t, prime) = self.source.take().expect("arrival source");
                self.rng = Some(s.slot(t, Channel::Arrivals, prime));
            }
            let u = self.rng.as_mut().unwrap().uniform();
            let next = self.times.last().unwrap() - u.ln();
            self.times.push(next);
        }
    }

    /// `N_λ`, the number of arrivals in `[0, λ]`.
    pub fn count(&mut self, lambda: f64) -> Result<u64> {
        if !(lambda >= 0.0) {
            return Err(Error::Domain(format!("negative Poisson intensity {lambda}")));
        }
        if lambda > LAMBDA_MAX {
            return Err(Error::IntensityOverflow(lambda));
        }
        self.extend_to(lambda);
        Ok(self.times.partition_point(|a| *a <= lambda) as u64)
    }

    /// Arrival times generated so far.
    pub fn times(&self) -> &[f64] {
        &self.times
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Parx {
    pub q: usize,
    pub beta0: f64,
    pub beta: Vec<f64>,
    pub alpha: Vec<f64>,
    pub pi: Vec<f64>,
}

impl Parx {
    pub fn validate(&self, cov: &CovariateSpec) -> Result<()> {
        if self.q == 0 {
            return Err(Error::config("model.q", "order must be at least 1"));
        }
        if self.beta.len() != self.q {
            return Err(Error::config("model.beta", format!("expected {} values", self.q)));
        }
        if self.alpha.len() != self.q {
            return Err(Error::config("model.alpha", format!("expected {} values", self.q)));
        }
        if self.pi.len() != cov.dim {
            return Err(Error::config("model.pi", format!("expected {} values (covariate dim)", cov.dim)));
        }
        let neg = |v: &[f64]| v.iter().any(|x| !(x.is_finite() && *x >= 0.0));
        if !(self.beta0.is_finite() && self.beta0 >= 0.0) {
            return Err(Error::config("model.beta0", "must be nonnegative"));
        }
        if neg(&self.beta) {
            return Err(Error::config("model.beta", "coefficients must be nonnegative"));
        }
        if neg(&self.alpha) {
            return Err(Error::config("model.alpha", "coefficients must be nonnegative"));
        }
        if neg(&self.pi) {
            return Err(Error::config("model.pi", "coefficients must be nonnegative"));
        }
        Ok(())
    }

    pub fn gamma(&self) -> f64 {
        self.alpha.iter().sum::<f64>() + self.beta.iter().sum::<f64>()
    }

    /// State point is `(Y, λ)`.
    pub fn head(&self, state: &[f64], z: &[f64], shock: &mut Shock, out: &mut [f64]) -> Result<()> {
        let mut lambda = self.beta0;
        for j in 0..self.q {
            lambda += self.alpha[j] * state[2 * j] + self.beta[j] * state[2 * j + 1];
        }
        lambda += self.pi.iter().zip(z).map(|(p, v)| p * v).sum::<f64>();
        if lambda < 0.0 {
            return Err(Error::Domain(format!(
                "intensity {lambda} is negative; the covariate left the nonnegative orthant"
            )));
        }
        out[0] = shock.arrivals().count(lambda)? as f64;
        out[1] = lambda;
        Ok(())
    }

    pub fn metadata(&self) -> ContractionCertificate {
        let mats: Vec<DMatrix<f64>> = (0..self.q)
            .map(|j| {
                DMatrix::from_row_slice(2, 2, &[self.alpha[j], self.beta[j], self.alpha[j], self.beta[j]])
            })
            .collect();
        ContractionCertificate::from_matrices("parx", 1.0, 1.0, mats, vec![("gamma".into(), self.gamma())])
    }

    pub fn conditions(&self, cov: &CovariateSpec) -> Vec<Condition> {
        let g = self.gamma();
        let detail = format!("gamma={}", fmt_num(g));
        let pa1 = if g < 1.0 { Verdict::Holds(detail) } else { Verdict::Fails(detail) };
        let mut out = vec![Condition::governing("PA1", pa1)];
        let lo = self
            .pi
            .iter()
            .zip(cov.bounds())
            .map(|(p, (a, _))| if *p == 0.0 { 0.0 } else { p * a })
            .sum::<f64>()
            + self.beta0;
        let dom = if lo >= 0.0 {
            Verdict::Holds(format!("min intensity input={}", fmt_num(lo)))
        } else {
            Verdict::Fails(format!(
                "beta0 + pi'z can reach {} on the covariate box",
                fmt_num(lo)
            ))
        };
        out.push(Condition::new("intensity_nonnegative", dom));
        out
    }
}
