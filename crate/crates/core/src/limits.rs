//! Central limit harness for partial sums of functionals of a stationary path.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::noise::{CovariateSpec, SeedStream};
use crate::stationarity::{check_conditions, stationary_path, DEFAULT_S_MAX, DEFAULT_TOL};
use crate::stats;
use crate::util::fmt_num;

/// Engineering thresholds of the normality check.
pub const KS_COEFFICIENT: f64 = 1.36;
pub const MAX_ABS_SKEW: f64 = 0.15;
pub const MAX_ABS_EXCESS_KURTOSIS: f64 = 0.3;
/// Relative agreement required between batch-means and plug-in variances.
pub const VARIANCE_AGREEMENT: f64 = 0.15;
/// Autocovariance mass left out by the plug-in truncation.
const PLUGIN_TAIL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FunctionalKind {
    Identity,
    /// `min(|x|^ell, cap)`.
    ClippedPower { ell: f64, cap: f64 },
    /// `x_t · x_{t-lag}`.
    LagProduct { lag: usize },
}

/// `scale · f(Y_t, …, Y_{t-k})` on the scalar observations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Functional {
    pub kind: FunctionalKind,
    pub scale: f64,
}

impl Functional {
    pub fn identity() -> Self {
        Self { kind: FunctionalKind::Identity, scale: 1.0 }
    }

    pub fn lag(&self) -> usize {
        match self.kind {
            FunctionalKind::LagProduct { lag } => lag,
            _ => 0,
        }
    }

    /// Exponent `ℓ` in `|f(x) − f(x')| ≤ C[1 + Σ(|x_i|^ℓ + |x_i'|^ℓ)] Σ|x_i − x_i'|`.
    /// `None` when `f` is not of that form.
    pub fn growth_exponent(&self) -> Option<f64> {
        match self.kind {
            FunctionalKind::Identity => Some(0.0),
            FunctionalKind::ClippedPower { ell, cap } if cap.is_finite() => {
                if ell >= 1.0 {
                    Some(0.0)
                } else {
                    None
                }
            }
            FunctionalKind::ClippedPower { ell, .. } => (ell >= 1.0).then_some(ell - 1.0),
            FunctionalKind::LagProduct { .. } => Some(1.0),
        }
    }

    /// `y` holds `Y_t, Y_{t-1}, …`.
    pub fn eval(&self, y: &[f64]) -> f64 {
        let v = match self.kind {
            FunctionalKind::Identity => y[0],
            FunctionalKind::ClippedPower { ell, cap } => y[0].abs().powf(ell).min(cap),
            FunctionalKind::LagProduct { lag } => y[0] * y[lag],
        };
        self.scale * v
    }

    pub fn validate(&self) -> Result<()> {
        if !self.scale.is_finite() {
            return Err(Error::config("run.functional_scale", "must be finite"));
        }
        match self.kind {
            FunctionalKind::ClippedPower { ell, cap } if !(ell > 0.0 && ell.is_finite() && cap >= 0.0) => {
                Err(Error::config("run.functional", "clipped power needs ell > 0 and cap >= 0"))
            }
            FunctionalKind::LagProduct { lag: 0 } => {
                Err(Error::config("run.functional", "lag product needs lag >= 1"))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FunctionalKind::Identity => write!(f, "identity")?,
            FunctionalKind::ClippedPower { ell, cap } => write!(f, "clipped_power({}, {})", fmt_num(ell), fmt_num(cap))?,
            FunctionalKind::LagProduct { lag } => write!(f, "lag_product({lag})")?,
        }
        if self.scale != 1.0 {
            write!(f, " x {}", fmt_num(self.scale))?;
        }
        Ok(())
    }
}

/// Moment assertion `M ≥ ‖|X|^o‖_{q'}` used when the certificate only controls
/// moments of order `p ≤ 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentAssertion {
    pub q_prime: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CltReport {
    pub n: usize,
    pub replicates: usize,
    pub functional: Functional,
    /// Batch-means estimate, the primary `σ̂²`.
    pub sigma2_hat: f64,
    pub sigma2_plugin: f64,
    pub batch_len: usize,
    pub plugin_lags: usize,
    /// `(S_n − mean_R S_n) / (σ̂ √n)` per replicate.
    pub standardized: Vec<f64>,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub ks: f64,
    pub ks_critical: f64,
    /// Moment order that backs the growth hypothesis.
    pub moment_order: f64,
    pub notes: Vec<String>,
}

impl CltReport {
    pub fn variances_agree(&self) -> bool {
        let scale = self.sigma2_hat.abs().max(self.sigma2_plugin.abs());
        scale == 0.0 || (self.sigma2_hat - self.sigma2_plugin).abs() <= VARIANCE_AGREEMENT * scale
    }

    pub fn normality_holds(&self) -> bool {
        self.ks < self.ks_critical
            && self.skewness.abs() < MAX_ABS_SKEW
            && self.excess_kurtosis.abs() < MAX_ABS_EXCESS_KURTOSIS
    }
}

fn is_constant(y: &[f64]) -> bool {
    y.iter().all(|v| *v == y[0])
}

/// Overlapping batch means estimate of the long-run variance with batch length `b`.
pub fn batch_means_variance(y: &[f64], b: usize) -> f64 {
    let n = y.len();
    if n == 0 || is_constant(y) {
        return 0.0;
    }
    let b = b.clamp(1, n);
    let mu = stats::mean(y);
    let mut window: f64 = y[..b].iter().sum();
    let mut acc = stats::CompensatedSum::new();
    for i in 0..=n - b {
        if i > 0 {
            window += y[i + b - 1] - y[i - 1];
        }
        let d = window / b as f64 - mu;
        acc.add(d * d);
    }
    let batches = (n - b + 1) as f64;
    b as f64 * acc.value() / batches
}

/// Truncated autocovariance sum `γ_0 + 2 Σ_{j=1}^L γ_j`.
pub fn plugin_variance(y: &[f64], lags: usize) -> f64 {
    let n = y.len();
    if n == 0 || is_constant(y) {
        return 0.0;
    }
    let mu = stats::mean(y);
    let c: Vec<f64> = y.iter().map(|v| v - mu).collect();
    let gamma = |j: usize| stats::neumaier_sum((0..n - j).map(|i| c[i] * c[i + j])) / n as f64;
    let mut s = gamma(0);
    for j in 1..=lags.min(n - 1) {
        s += 2.0 * gamma(j);
    }
    s
}

/// Plug-in truncation from a geometric decay rate.
pub fn plugin_lags(rate: Option<f64>, n: usize, batch_len: usize) -> usize {
    let cap = (n / 4).max(1);
    match rate {
        Some(r) if r > 0.0 && r < 1.0 => ((PLUGIN_TAIL.ln() / r.ln()).ceil() as usize).clamp(1, cap),
        Some(_) => 1,
        None => batch_len.min(cap),
    }
}

/// Functional values `Y_t = f(X_t, …, X_{t-k})` along a stationary path of one stream.
pub fn functional_path(
    model: &ModelSpec,
    cov: &CovariateSpec,
    stream: SeedStream,
    f: &Functional,
    n: usize,
) -> Result<Vec<f64>> {
    let k = f.lag();
    let path = stationary_path(model, cov, stream, n + k, DEFAULT_TOL, DEFAULT_S_MAX)?;
    let obs: Vec<f64> = (0..path.len()).map(|i| model.observation(path.state(i))).collect();
    let mut lagged = vec![0.0; k + 1];
    Ok((k..obs.len())
        .map(|t| {
            for (j, v) in lagged.iter_mut().enumerate() {
                *v = obs[t - j];
            }
            f.eval(&lagged)
        })
        .collect())
}

/// Standardized partial sums over `replicates` streams of `master_seed`.
///
/// Refused unless the governing stationarity condition holds and the growth of
/// `f` fits the moment order the certificate (or the assertion) provides.
pub fn partial_sum_stats(
    model: &ModelSpec,
    cov: &CovariateSpec,
    master_seed: u64,
    f: &Functional,
    n: usize,
    replicates: usize,
    assertion: Option<MomentAssertion>,
) -> Result<CltReport> {
    model.validate(cov)?;
    f.validate()?;
    if n < 8 || replicates < 2 {
        return Err(Error::Domain(format!("need n >= 8 and at least two replicates, got n={n}, R={replicates}")));
    }
    let report = check_conditions(model, cov);
    let gov = report.governing();
    if !report.governing_holds() {
        let why = gov.map_or("no governing condition".to_string(), |g| g.to_string());
        return Err(Error::Refused(format!("the limit theorem needs a certified stationary solution; {why}")));
    }
    let mut notes = Vec::new();
    let p = model.p();
    let ell = f
        .growth_exponent()
        .ok_or_else(|| Error::Refused(format!("{f} is not covered by the growth hypothesis")))?;
    let order = if p > 2.0 {
        p
    } else if let Some(a) = assertion {
        notes.push(format!(
            "moment order from the Hölder route with the asserted bound M={} at q'={}",
            fmt_num(a.bound),
            fmt_num(a.q_prime)
        ));
        a.q_prime
    } else {
        return Err(Error::Refused(format!(
            "the limit theorem needs Θ_{{p,0}} < ∞ for some p > 2; the certificate gives p={}",
            fmt_num(p)
        )));
    };
    let strict = assertion.is_some() && p <= 2.0;
    // with an assertion only orders strictly below q' are reachable
    if (strict && ell >= (order - 2.0) / 2.0) || (!strict && ell > (order - 2.0) / 2.0) {
        return Err(Error::Refused(format!(
            "growth exponent {} exceeds (p-2)/2 with p={}",
            fmt_num(ell),
            fmt_num(order)
        )));
    }
    let paths = (0..replicates as u64)
        .into_par_iter()
        .map(|r| functional_path(model, cov, SeedStream::new(master_seed, r), f, n))
        .collect::<Result<Vec<_>>>()?;
    let b = (n as f64).cbrt().ceil() as usize;
    let lags = plugin_lags(report.certificate.rate(), n, b);
    let obm: Vec<f64> = paths.iter().map(|y| batch_means_variance(y, b)).collect();
    let plug: Vec<f64> = paths.iter().map(|y| plugin_variance(y, lags)).collect();
    let sigma2 = stats::mean(&obm);
    let sigma2_plugin = stats::mean(&plug);
    let sums: Vec<f64> = paths.iter().map(|y| stats::neumaier_sum(y.iter().copied())).collect();
    let centre = stats::mean(&sums);
    let denom = (sigma2 * n as f64).sqrt();
    let standardized: Vec<f64> = sums
        .iter()
        .map(|s| if denom > 0.0 { (s - centre) / denom } else { 0.0 })
        .collect();
    if denom == 0.0 {
        notes.push("degenerate functional: zero long-run variance".into());
    }
    Ok(CltReport {
        n,
        replicates,
        functional: *f,
        sigma2_hat: sigma2,
        sigma2_plugin,
        batch_len: b,
        plugin_lags: lags,
        skewness: stats::skewness(&standardized),
        excess_kurtosis: stats::excess_kurtosis(&standardized),
        ks: stats::ks_standard_normal(&standardized),
        ks_critical: KS_COEFFICIENT / (replicates as f64).sqrt(),
        standardized,
        moment_order: order,
        notes,
    })
}
