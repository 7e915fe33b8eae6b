//! Covariate processes written as Bernoulli shifts of the η-innovations.

use nalgebra::DMatrix;

use super::law::Law;
use crate::error::{Error, Result};
use crate::linalg;

pub const DEFAULT_TRUNCATION: usize = 512;

/// How η_t depends on ε_t at equal times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Link {
    Independent,
    /// Component j reuses the ε-uniform when an auxiliary uniform falls below `weight`.
    CommonShock { weight: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum CovariateFamily {
    /// `Z_t = η_t`.
    Iid,
    /// `Z_t = Σ_j c_j η_{t-j}`, coefficients applied componentwise.
    MovingAverage { coefs: Vec<f64> },
    /// `Z_t = Φ Z_{t-1} + η_t`, realized as the moving average truncated at `truncation` lags.
    Var1 { phi: DMatrix<f64> },
    /// `Z_t = lo + (hi - lo)(1 + tanh(Σ_j c_j η_{t-j}))/2`, componentwise.
    BoundedTransform { coefs: Vec<f64>, lo: Vec<f64>, hi: Vec<f64> },
    /// `Z_t = a_t a_{t-1} ⋯ a_{t-order+1}` with i.i.d. nonnegative factors `a = η`.
    ProductChain { order: usize },
}

impl CovariateFamily {
    pub fn name(&self) -> &'static str {
        match self {
            CovariateFamily::Iid => "iid",
            CovariateFamily::MovingAverage { .. } => "finite_moving_average",
            CovariateFamily::Var1 { .. } => "var1",
            CovariateFamily::BoundedTransform { .. } => "bounded_transform",
            CovariateFamily::ProductChain { .. } => "product_chain",
        }
    }
}

/// Every family is shifted by `offset`; an all-zero moving average plus an offset
/// gives a constant covariate.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariateSpec {
    pub family: CovariateFamily,
    pub dim: usize,
    pub eta_law: Law,
    pub link: Link,
    pub truncation: usize,
    pub offset: Vec<f64>,
}

/// Scalar covariate marginal `shift + scale · X` with `X` drawn from `law`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Marginal {
    pub law: Law,
    pub scale: f64,
    pub shift: f64,
}

impl Marginal {
    pub fn expect<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        if self.scale == 0.0 {
            return g(self.shift);
        }
        self.law.expect(|x| g(self.shift + self.scale * x))
    }
}

fn interval_scale(c: f64, lo: f64, hi: f64) -> (f64, f64) {
    if c == 0.0 {
        (0.0, 0.0)
    } else if c > 0.0 {
        (c * lo, c * hi)
    } else {
        (c * hi, c * lo)
    }
}

impl CovariateSpec {
    pub fn iid(dim: usize, eta_law: Law) -> Self {
        Self {
            family: CovariateFamily::Iid,
            dim,
            eta_law,
            link: Link::Independent,
            truncation: DEFAULT_TRUNCATION,
            offset: vec![0.0; dim],
        }
    }

    /// A covariate frozen at `value` (zero moving average plus offset).
    pub fn constant(value: Vec<f64>) -> Self {
        Self {
            family: CovariateFamily::MovingAverage { coefs: vec![0.0] },
            dim: value.len(),
            eta_law: Law::standard_gaussian(),
            link: Link::Independent,
            truncation: DEFAULT_TRUNCATION,
            offset: value,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.eta_law.validate("covariate.eta_law")?;
        if self.dim == 0 {
            return Err(Error::config("covariate.dim", "covariate dimension must be positive"));
        }
        if self.offset.len() != self.dim {
            return Err(Error::config(
                "covariate.offset",
                format!("expected {} offsets, got {}", self.dim, self.offset.len()),
            ));
        }
        if self.truncation == 0 {
            return Err(Error::config("covariate.truncation", "truncation length must be positive"));
        }
        if let Link::CommonShock { weight } = self.link {
            if !(0.0..=1.0).contains(&weight) {
                return Err(Error::config("covariate.shock_weight", "mixing weight must lie in [0, 1]"));
            }
        }
        match &self.family {
            CovariateFamily::Iid => {}
            CovariateFamily::MovingAverage { coefs } => {
                if coefs.is_empty() || coefs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::config("covariate.coefs", "need at least one finite coefficient"));
                }
            }
            CovariateFamily::Var1 { phi } => {
                if phi.nrows() != self.dim || phi.ncols() != self.dim {
                    return Err(Error::config("covariate.phi", "phi must be a dim × dim matrix"));
                }
                let rho = linalg::spectral_radius_eigen(phi);
                if !(rho < 1.0) {
                    return Err(Error::config(
                        "covariate.phi",
                        format!("var1 coefficient has spectral radius {rho} ≥ 1, the process is not stationary"),
                    ));
                }
            }
            CovariateFamily::BoundedTransform { coefs, lo, hi } => {
                if coefs.is_empty() {
                    return Err(Error::config("covariate.coefs", "need at least one coefficient"));
                }
                if lo.len() != self.dim || hi.len() != self.dim {
                    return Err(Error::config("covariate.lo", "box bounds must have length dim"));
                }
                if lo.iter().zip(hi).any(|(a, b)| !(a.is_finite() && b.is_finite() && a < b)) {
                    return Err(Error::config("covariate.hi", "box needs finite lo < hi"));
                }
            }
            CovariateFamily::ProductChain { order } => {
                if *order == 0 {
                    return Err(Error::config("covariate.order", "product chain order must be at least 1"));
                }
                if self.dim != 1 {
                    return Err(Error::config("covariate.dim", "product chain is scalar"));
                }
                if self.eta_law.support().0 < 0.0 {
                    return Err(Error::config(
                        "covariate.eta_law",
                        "product chain factors must be nonnegative",
                    ));
                }
            }
        }
        Ok(())
    }

    /// Number of η lags (current one included) that determine `Z_t`.
    pub fn memory(&self) -> usize {
        match &self.family {
            CovariateFamily::Iid => 1,
            CovariateFamily::MovingAverage { coefs } => coefs.len(),
            CovariateFamily::Var1 { .. } => self.truncation,
            CovariateFamily::BoundedTransform { coefs, .. } => coefs.len(),
            CovariateFamily::ProductChain { order } => *order,
        }
    }

    /// Matrices `Φ^0, …, Φ^{truncation-1}` for the var1 family.
    pub fn var1_powers(&self) -> Vec<DMatrix<f64>> {
        let CovariateFamily::Var1 { phi } = &self.family else {
            return Vec::new();
        };
        let mut out = Vec::with_capacity(self.truncation);
        let mut p = DMatrix::<f64>::identity(self.dim, self.dim);
        for _ in 0..self.truncation {
            out.push(p.clone());
            p = phi * p;
        }
        out
    }

    /// Evaluate `Z_t` from its η-history; `eta(j)` returns η_{t-j}.
    pub fn evaluate<'a, F>(&self, powers: &[DMatrix<f64>], eta: F, out: &mut [f64])
    where
        F: Fn(usize) -> &'a [f64],
    {
        let e = self.dim;
        match &self.family {
            CovariateFamily::Iid => out.copy_from_slice(eta(0)),
            CovariateFamily::MovingAverage { coefs } => {
                out.iter_mut().for_each(|v| *v = 0.0);
                for (j, c) in coefs.iter().enumerate() {
                    if *c != 0.0 {
                        for (v, h) in out.iter_mut().zip(eta(j)) {
                            *v += c * h;
                        }
                    }
                }
            }
            CovariateFamily::Var1 { .. } => {
                out.iter_mut().for_each(|v| *v = 0.0);
                for (j, p) in powers.iter().enumerate() {
                    let h = eta(j);
                    for r in 0..e {
                        let mut acc = 0.0;
                        for c in 0..e {
                            acc += p[(r, c)] * h[c];
                        }
                        out[r] += acc;
                    }
                }
            }
            CovariateFamily::BoundedTransform { coefs, lo, hi } => {
                let mut m = vec![0.0; e];
                for (j, c) in coefs.iter().enumerate() {
                    for (v, h) in m.iter_mut().zip(eta(j)) {
                        *v += c * h;
                    }
                }
                for i in 0..e {
                    out[i] = lo[i] + (hi[i] - lo[i]) * 0.5 * (1.0 + m[i].tanh());
                }
            }
            CovariateFamily::ProductChain { order } => {
                out[0] = (0..*order).map(|j| eta(j)[0]).product();
            }
        }
        for (v, o) in out.iter_mut().zip(&self.offset) {
            *v += o;
        }
    }

    /// Conservative covariate box, coordinatewise, offsets included.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        let (lo, hi) = self.eta_law.support();
        let e = self.dim;
        let mut out: Vec<(f64, f64)> = match &self.family {
            CovariateFamily::Iid => vec![(lo, hi); e],
            CovariateFamily::MovingAverage { coefs } => {
                let mut a = 0.0;
                let mut b = 0.0;
                for c in coefs {
                    let (x, y) = interval_scale(*c, lo, hi);
                    a += x;
                    b += y;
                }
                vec![(a, b); e]
            }
            CovariateFamily::Var1 { .. } => {
                let powers = self.var1_powers();
                (0..e)
                    .map(|r| {
                        let mut a = 0.0;
                        let mut b = 0.0;
                        for p in &powers {
                            for c in 0..e {
                                let (x, y) = interval_scale(p[(r, c)], lo, hi);
                                a += x;
                                b += y;
                            }
                        }
                        (a, b)
                    })
                    .collect()
            }
            CovariateFamily::BoundedTransform { lo: blo, hi: bhi, .. } => {
                blo.iter().copied().zip(bhi.iter().copied()).collect()
            }
            CovariateFamily::ProductChain { order } => {
                vec![(lo.powi(*order as i32), hi.powi(*order as i32))]
            }
        };
        for (b, o) in out.iter_mut().zip(&self.offset) {
            b.0 += o;
            b.1 += o;
        }
        out
    }

    /// Closed-form law of a scalar `Z_0`, where available.
    pub fn marginal(&self) -> Option<Marginal> {
        if self.dim != 1 {
            return None;
        }
        let shift = self.offset[0];
        let law = self.eta_law;
        match &self.family {
            CovariateFamily::Iid => Some(Marginal { law, scale: 1.0, shift }),
            CovariateFamily::MovingAverage { coefs } => {
                let nz: Vec<f64> = coefs.iter().copied().filter(|c| *c != 0.0).collect();
                match (nz.len(), law) {
                    (0, _) => Some(Marginal { law, scale: 0.0, shift }),
                    (1, _) => Some(Marginal { law, scale: nz[0], shift }),
                    (_, Law::Gaussian { mean, sd }) => {
                        let s: f64 = nz.iter().sum();
                        let s2: f64 = nz.iter().map(|c| c * c).sum();
                        Some(Marginal {
                            law: Law::Gaussian { mean: mean * s, sd: sd * s2.sqrt() },
                            scale: 1.0,
                            shift,
                        })
                    }
                    _ => None,
                }
            }
            CovariateFamily::Var1 { phi } => {
                let f = phi[(0, 0)];
                if f == 0.0 {
                    return Some(Marginal { law, scale: 1.0, shift });
                }
                if let Law::Gaussian { mean, sd } = law {
                    let (mut s, mut s2, mut pw) = (0.0, 0.0, 1.0);
                    for _ in 0..self.truncation {
                        s += pw;
                        s2 += pw * pw;
                        pw *= f;
                    }
                    Some(Marginal {
                        law: Law::Gaussian { mean: mean * s, sd: sd * s2.sqrt() },
                        scale: 1.0,
                        shift,
                    })
                } else {
                    None
                }
            }
            CovariateFamily::BoundedTransform { .. } => None,
            CovariateFamily::ProductChain { order } => match (order, law) {
                (1, _) => Some(Marginal { law, scale: 1.0, shift }),
                (q, Law::LogNormal { mu, sigma }) => Some(Marginal {
                    law: Law::LogNormal { mu: *q as f64 * mu, sigma: (*q as f64).sqrt() * sigma },
                    scale: 1.0,
                    shift,
                }),
                _ => None,
            },
        }
    }

    /// `θ_{r,t}(Z)` for `t = 0..len` under the metric `|z - z'|_1^o`, from the
    /// family's linear structure. The vector norm is bounded through the
    /// per-component difference moment.
    pub fn dependence_coefficients(&self, r: f64, o: f64, len: usize) -> Result<Vec<f64>> {
        let d = self.eta_law.abs_diff_moment(o * r).powf(1.0 / r) * self.dim as f64;
        let mut out = vec![0.0; len];
        match &self.family {
            CovariateFamily::Iid => {
                if len > 0 {
                    out[0] = d;
                }
            }
            CovariateFamily::MovingAverage { coefs } => {
                for (t, c) in coefs.iter().enumerate().take(len) {
                    out[t] = c.abs().powf(o) * d;
                }
            }
            CovariateFamily::Var1 { phi } => {
                let mut p = DMatrix::<f64>::identity(self.dim, self.dim);
                for v in out.iter_mut() {
                    *v = linalg::max_col_sum(&p).powf(o) * d;
                    p = phi * p;
                }
            }
            CovariateFamily::BoundedTransform { coefs, lo, hi } => {
                let half = lo
                    .iter()
                    .zip(hi)
                    .map(|(a, b)| 0.5 * (b - a))
                    .fold(0.0, f64::max);
                for (t, c) in coefs.iter().enumerate().take(len) {
                    out[t] = (half * c.abs()).powf(o) * d;
                }
            }
            CovariateFamily::ProductChain { .. } => {
                return Err(Error::Unsupported(
                    "no closed-form dependence coefficients for the product chain".into(),
                ))
            }
        }
        Ok(out)
    }
}
