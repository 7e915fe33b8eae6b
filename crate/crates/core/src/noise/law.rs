//! Closed list of scalar laws used for ε and η.

use std::fmt;

use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::quad;

const QUAD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Law {
    Gaussian { mean: f64, sd: f64 },
    Uniform { lo: f64, hi: f64 },
    LogNormal { mu: f64, sigma: f64 },
    /// ±1 with probability 1/2 each.
    Rademacher,
    Logistic { loc: f64, scale: f64 },
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).unwrap()
}

/// Standard normal quantile, polished by Newton steps on the cdf.
fn normal_quantile(u: f64) -> f64 {
    let n = std_normal();
    let mut x = n.inverse_cdf(u);
    if !x.is_finite() {
        return x;
    }
    for _ in 0..2 {
        let d = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        if d < 1e-300 {
            break;
        }
        x -= (n.cdf(x) - u) / d;
    }
    x
}

impl Law {
    pub fn standard_gaussian() -> Self {
        Law::Gaussian { mean: 0.0, sd: 1.0 }
    }

    pub fn validate(&self, key: &str) -> Result<()> {
        let ok = match *self {
            Law::Gaussian { mean, sd } => mean.is_finite() && sd.is_finite() && sd > 0.0,
            Law::Uniform { lo, hi } => lo.is_finite() && hi.is_finite() && lo < hi,
            Law::LogNormal { mu, sigma } => mu.is_finite() && sigma.is_finite() && sigma > 0.0,
            Law::Rademacher => true,
            Law::Logistic { loc, scale } => loc.is_finite() && scale.is_finite() && scale > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::config(key, format!("invalid law parameters in `{self}`")))
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, Law::Rademacher)
    }

    /// Closed support `[lo, hi]`, possibly infinite.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Law::Gaussian { .. } | Law::Logistic { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Law::Uniform { lo, hi } => (lo, hi),
            Law::LogNormal { .. } => (0.0, f64::INFINITY),
            Law::Rademacher => (-1.0, 1.0),
        }
    }

    /// Quantile function; `u` is expected in the open unit interval.
    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            Law::Gaussian { mean, sd } => mean + sd * normal_quantile(u),
            Law::Uniform { lo, hi } => lo + (hi - lo) * u,
            Law::LogNormal { mu, sigma } => (mu + sigma * normal_quantile(u)).exp(),
            Law::Rademacher => {
                if u < 0.5 {
                    -1.0
                } else {
                    1.0
                }
            }
            Law::Logistic { loc, scale } => loc + scale * (u / (1.0 - u)).ln(),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Law::Gaussian { mean, sd } => std_normal().cdf((x - mean) / sd),
            Law::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Law::LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    std_normal().cdf((x.ln() - mu) / sigma)
                }
            }
            Law::Rademacher => {
                if x < -1.0 {
                    0.0
                } else if x < 1.0 {
                    0.5
                } else {
                    1.0
                }
            }
            Law::Logistic { loc, scale } => 1.0 / (1.0 + (-(x - loc) / scale).exp()),
        }
    }

    /// Density; zero for the discrete law.
    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            Law::Gaussian { mean, sd } => {
                let z = (x - mean) / sd;
                (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
            }
            Law::Uniform { lo, hi } => {
                if x >= lo && x <= hi {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            Law::LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    return 0.0;
                }
                let z = (x.ln() - mu) / sigma;
                (-0.5 * z * z).exp() / (x * sigma * (2.0 * std::f64::consts::PI).sqrt())
            }
            Law::Rademacher => 0.0,
            Law::Logistic { loc, scale } => {
                let e = (-(x - loc).abs() / scale).exp();
                e / (scale * (1.0 + e) * (1.0 + e))
            }
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match *self {
            Law::Gaussian { mean, .. } => vec![0.0, mean],
            Law::Logistic { loc, .. } => vec![0.0, loc],
            Law::LogNormal { mu, sigma } => vec![(mu - sigma * sigma).exp(), mu.exp()],
            _ => vec![0.0],
        }
    }

    /// `E g(X)` by quadrature (exact enumeration for the discrete law).
    /// `extra_breaks` lists kinks of `g`.
    pub fn expect_with<F: Fn(f64) -> f64>(&self, g: F, extra_breaks: &[f64]) -> f64 {
        if let Law::Rademacher = self {
            return 0.5 * (g(-1.0) + g(1.0));
        }
        let (lo, hi) = self.support();
        let mut breaks = self.breakpoints();
        breaks.extend_from_slice(extra_breaks);
        quad::integrate_range(|x| {
            let d = self.pdf(x);
            if d == 0.0 {
                0.0
            } else {
                g(x) * d
            }
        }, lo, hi, &breaks, QUAD_TOL)
    }

    pub fn expect<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        self.expect_with(g, &[])
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Law::Gaussian { mean, .. } => mean,
            Law::Uniform { lo, hi } => 0.5 * (lo + hi),
            Law::LogNormal { mu, sigma } => (mu + 0.5 * sigma * sigma).exp(),
            Law::Rademacher => 0.0,
            Law::Logistic { loc, .. } => loc,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Law::Gaussian { sd, .. } => sd * sd,
            Law::Uniform { lo, hi } => (hi - lo).powi(2) / 12.0,
            Law::LogNormal { mu, sigma } => {
                let s2 = sigma * sigma;
                (s2.exp() - 1.0) * (2.0 * mu + s2).exp()
            }
            Law::Rademacher => 1.0,
            Law::Logistic { scale, .. } => (scale * std::f64::consts::PI).powi(2) / 3.0,
        }
    }

    /// `E[X^2]`.
    pub fn second_moment(&self) -> f64 {
        self.variance() + self.mean().powi(2)
    }

    /// `E[X^r]` for integer `r ≥ 0`.
    pub fn raw_moment(&self, r: u32) -> f64 {
        match *self {
            Law::LogNormal { mu, sigma } => {
                let r = r as f64;
                (r * mu + 0.5 * r * r * sigma * sigma).exp()
            }
            Law::Uniform { lo, hi } => {
                let r1 = (r + 1) as i32;
                (hi.powi(r1) - lo.powi(r1)) / ((r + 1) as f64 * (hi - lo))
            }
            _ => self.expect(|x| x.powi(r as i32)),
        }
    }

    /// `E|X|^r` for real `r > 0`.
    pub fn abs_moment(&self, r: f64) -> f64 {
        match *self {
            Law::Rademacher => 1.0,
            Law::Gaussian { mean, sd } if mean == 0.0 => {
                sd.powf(r) * 2f64.powf(0.5 * r) * gamma(0.5 * (r + 1.0)) / std::f64::consts::PI.sqrt()
            }
            Law::LogNormal { mu, sigma } => (r * mu + 0.5 * r * r * sigma * sigma).exp(),
            _ => self.expect(|x| x.abs().powf(r)),
        }
    }

    /// `(E[(X⁺)^δ], E[(X⁻)^δ])`.
    pub fn half_moments(&self, delta: f64) -> (f64, f64) {
        let plus = self.expect(|x| if x > 0.0 { x.powf(delta) } else { 0.0 });
        let minus = self.expect(|x| if x < 0.0 { (-x).powf(delta) } else { 0.0 });
        (plus, minus)
    }

    /// `E|X − X'|^r` for an independent copy `X'`.
    pub fn abs_diff_moment(&self, r: f64) -> f64 {
        match *self {
            Law::Gaussian { sd, .. } => Law::Gaussian {
                mean: 0.0,
                sd: sd * std::f64::consts::SQRT_2,
            }
            .abs_moment(r),
            Law::Uniform { lo, hi } => {
                let w = hi - lo;
                2.0 * w.powf(r) / ((r + 1.0) * (r + 2.0))
            }
            Law::Rademacher => 0.5 * 2f64.powf(r),
            _ => self.expect(|x| self.expect_with(|y| (x - y).abs().powf(r), &[x])),
        }
    }

    /// Lipschitz constant of the cdf, i.e. the supremum of the density.
    pub fn cdf_lipschitz(&self) -> f64 {
        match *self {
            Law::Gaussian { sd, .. } => 1.0 / (sd * (2.0 * std::f64::consts::PI).sqrt()),
            Law::Uniform { lo, hi } => 1.0 / (hi - lo),
            Law::LogNormal { mu, sigma } => self.pdf((mu - sigma * sigma).exp()),
            Law::Rademacher => f64::INFINITY,
            Law::Logistic { scale, .. } => 0.25 / scale,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Law::Gaussian { .. } => "gaussian",
            Law::Uniform { .. } => "uniform",
            Law::LogNormal { .. } => "lognormal",
            Law::Rademacher => "rademacher",
            Law::Logistic { .. } => "logistic",
        }
    }

    /// Parse `gaussian(0, 1)`, `uniform(lo, hi)`, `lognormal(mu, sigma)`,
    /// `logistic(loc, scale)` or `rademacher`.
    pub fn parse(text: &str, key: &str) -> Result<Self> {
        let text = text.trim();
        let (name, args) = match text.find('(') {
            Some(i) => {
                if !text.ends_with(')') {
                    return Err(Error::config(key, format!("unbalanced parentheses in `{text}`")));
                }
                (&text[..i], &text[i + 1..text.len() - 1])
            }
            None => (text, ""),
        };
        let args: Vec<f64> = if args.trim().is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|a| {
                    a.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::config(key, format!("bad number `{}` in law", a.trim())))
                })
                .collect::<Result<_>>()?
        };
        let want = |n: usize| -> Result<()> {
            if args.len() == n {
                Ok(())
            } else {
                Err(Error::config(
                    key,
                    format!("law `{}` takes {n} parameters, got {}", name.trim(), args.len()),
                ))
            }
        };
        let law = match name.trim() {
            "gaussian" | "normal" => {
                if args.is_empty() {
                    Law::standard_gaussian()
                } else {
                    want(2)?;
                    Law::Gaussian { mean: args[0], sd: args[1] }
                }
            }
            "uniform" => {
                want(2)?;
                Law::Uniform { lo: args[0], hi: args[1] }
            }
            "lognormal" => {
                want(2)?;
                Law::LogNormal { mu: args[0], sigma: args[1] }
            }
            "logistic" => {
                if args.is_empty() {
                    Law::Logistic { loc: 0.0, scale: 1.0 }
                } else {
                    want(2)?;
                    Law::Logistic { loc: args[0], scale: args[1] }
                }
            }
            "rademacher" => {
                want(0)?;
                Law::Rademacher
            }
            other => return Err(Error::config(key, format!("unknown law `{other}`"))),
        };
        law.validate(key)?;
        Ok(law)
    }
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Law::Gaussian { mean, sd } => write!(f, "gaussian({mean}, {sd})"),
            Law::Uniform { lo, hi } => write!(f, "uniform({lo}, {hi})"),
            Law::LogNormal { mu, sigma } => write!(f, "lognormal({mu}, {sigma})"),
            Law::Rademacher => write!(f, "rademacher"),
            Law::Logistic { loc, scale } => write!(f, "logistic({loc}, {scale})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laws() -> Vec<Law> {
        vec![
            Law::Gaussian { mean: 0.3, sd: 1.7 },
            Law::Uniform { lo: -0.5, hi: 2.0 },
            Law::LogNormal { mu: -0.3, sigma: 0.4 },
            Law::Rademacher,
            Law::Logistic { loc: 0.2, scale: 0.7 },
        ]
    }

    #[test]
    fn quantile_inverts_cdf() {
        for law in laws().into_iter().filter(|l| !l.is_discrete()) {
            for &u in &[0.01, 0.2, 0.5, 0.77, 0.99] {
                let x = law.quantile(u);
                assert!((law.cdf(x) - u).abs() < 1e-12, "{law} at {u}");
            }
        }
    }

    #[test]
    fn numeric_moments_match_closed_forms() {
        for law in laws() {
            let m = law.expect(|x| x);
            let v = law.expect(|x| (x - law.mean()).powi(2));
            assert!((m - law.mean()).abs() < 1e-10, "{law} mean {m}");
            assert!((v - law.variance()).abs() < 1e-9 * law.variance().max(1.0), "{law} var {v}");
        }
    }

    #[test]
    fn standard_gaussian_half_moments() {
        // E[(ε⁺)²] = E[(ε⁻)²] = 1/2 and E[ε⁺] = 1/√(2π)
        let g = Law::standard_gaussian();
        let (p, m) = g.half_moments(2.0);
        assert!((p - 0.5).abs() < 1e-12 && (m - 0.5).abs() < 1e-12);
        let (p1, _) = g.half_moments(1.0);
        assert!((p1 - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn abs_diff_moment_closed_forms_agree_with_nested_quadrature() {
        for law in [Law::Gaussian { mean: 1.0, sd: 0.5 }, Law::Uniform { lo: 0.0, hi: 3.0 }] {
            for r in [1.0, 2.0, 0.5] {
                let nested = law.expect(|x| law.expect_with(|y| (x - y).abs().powf(r), &[x]));
                let closed = law.abs_diff_moment(r);
                assert!((nested - closed).abs() < 1e-8, "{law} r={r}: {nested} vs {closed}");
            }
        }
        // E|ε − ε'| = 2/√π for the standard gaussian
        let g = Law::standard_gaussian().abs_diff_moment(1.0);
        assert!((g - 2.0 / std::f64::consts::PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn lognormal_moments() {
        let l = Law::LogNormal { mu: -0.3, sigma: 0.2 };
        assert!((l.expect(|x| x.ln()) + 0.3).abs() < 1e-10);
        assert!((l.raw_moment(2) - l.expect(|x| x * x)).abs() < 1e-10);
    }

    #[test]
    fn display_round_trips() {
        for law in laws() {
            let back = Law::parse(&law.to_string(), "k").unwrap();
            assert_eq!(back, law);
        }
        assert!(Law::parse("uniform(1, 0)", "k").is_err());
        assert!(Law::parse("cauchy(0, 1)", "k").is_err());
    }
}
