//! Functional dependence coefficients by ξ₀-replacement coupling, with the
//! theoretical decay envelope and Hölder interpolation between moment orders.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::{ModelSpec, Shock};
use crate::noise::{CovariateSpec, SeedStream, Tape};
use crate::stationarity::{check_conditions, state_gap, ContractionCertificate};
use crate::stats;

pub const DEFAULT_T_MAX: usize = 64;
pub const DEFAULT_REPLICATES: usize = 2000;
/// Largest automatic burn-in.
pub const BURN_IN_CAP: usize = 10_000;
/// Burn-in used when the certificate gives no rate.
pub const FALLBACK_BURN_IN: usize = 512;
/// Window `[lo, hi]` of the log-linear decay fit.
pub const FIT_WINDOW: (usize, usize) = (5, 30);

#[derive(Debug, Clone, PartialEq)]
pub struct DependenceProfile {
    pub p: f64,
    pub o: f64,
    pub replicates: usize,
    pub burn_in: usize,
    /// `κ^{B/m}`, the start-up bias left by the burn-in (relative to the state scale).
    pub residual_bound: Option<f64>,
    pub theta_hat: Vec<f64>,
    pub stderr: Vec<f64>,
    /// `Θ̂_{p,h} = Σ_{t ≥ h} θ̂_{p,t}` over the estimated range.
    pub tail_sums: Vec<f64>,
    /// Envelope shape normalized at `h = 1`, when the covariate family supports it.
    pub bound_curve: Option<Vec<f64>>,
    /// `exp` of the log-linear slope of `θ̂` over the fit window.
    pub rho_fit: Option<f64>,
    /// `exp` of the log-linear slope of the envelope over the same window.
    pub bound_rate: Option<f64>,
    pub certificate: ContractionCertificate,
    pub warnings: Vec<String>,
}

/// Reverse cumulative sums.
pub fn tail_sums(theta: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; theta.len()];
    let mut acc = 0.0;
    for (o, v) in out.iter_mut().zip(theta).rev() {
        acc += v;
        *o = acc;
    }
    out
}

/// `exp(slope)` of `ln y_t` against `t` over the window, using positive values only.
pub fn log_linear_rate(y: &[f64], window: (usize, usize)) -> Option<f64> {
    let hi = window.1.min(y.len().saturating_sub(1));
    let (xs, ls): (Vec<f64>, Vec<f64>) = (window.0..=hi)
        .filter(|t| y[*t] > 0.0 && y[*t].is_finite())
        .map(|t| (t as f64, y[t].ln()))
        .unzip();
    if xs.len() < 2 {
        return None;
    }
    Some(stats::linear_fit(&xs, &ls).0.exp())
}

/// Burn-in `B` with `κ^{B/m} < 10⁻³`, capped at [`BURN_IN_CAP`].
pub fn default_burn_in(cert: &ContractionCertificate) -> (usize, Option<f64>) {
    match cert.rate() {
        Some(r) if r > 0.0 => {
            let b = ((1e-3f64).ln() / r.ln()).ceil().max(1.0) as usize;
            let b = b.min(BURN_IN_CAP);
            (b, Some(r.powi(b as i32)))
        }
        Some(_) => (1, Some(0.0)),
        None => (FALLBACK_BURN_IN, None),
    }
}

/// Gaps `d(X_t, X̄_t)` for `t = 0..=t_max` on one stream. Both chains start at
/// time `−burn_in` from the same state; with `replace = false` the second chain
/// re-reads ξ₀ instead of its independent copy.
pub fn coupled_gaps(
    model: &ModelSpec,
    cov: &CovariateSpec,
    stream: SeedStream,
    burn_in: usize,
    t_max: usize,
    replace: bool,
) -> Result<Vec<f64>> {
    let mut a = Tape::new(stream, cov, None);
    let mut b = Tape::new(stream, cov, if replace { Some(0) } else { None });
    let k = model.point_dim();
    let o = model.o();
    let lags = model.covariate_lags();
    let mut x = model.init_pair().0;
    let mut y = x.clone();
    let mut buf = vec![0.0; x.len()];
    let (mut za, mut zb) = (Vec::new(), Vec::new());
    let mut out = Vec::with_capacity(t_max + 1);
    for t in 1 - burn_in as i64..=t_max as i64 {
        a.z_lags(t, lags, &mut za);
        b.z_lags(t, lags, &mut zb);
        let mut sa = Shock::from_tape(model, &mut a, t);
        let mut sb = Shock::from_tape(model, &mut b, t);
        model.step_into(&x, &za, &mut sa, &mut buf)?;
        std::mem::swap(&mut x, &mut buf);
        model.step_into(&y, &zb, &mut sb, &mut buf)?;
        std::mem::swap(&mut y, &mut buf);
        if t >= 0 {
            out.push(state_gap(&x[..k], &y[..k], o));
        }
    }
    Ok(out)
}

/// Envelope `ρ^h + Σ_{i=1}^h ρ^i Θ_{r,h−i}(Z)` for `h = 0..len`, divided by its value at `h = 1`.
/// `theta_z` holds `θ_{r,t}(Z)`; the tail sums are formed here.
pub fn bound_curve(rho: f64, theta_z: &[f64], len: usize) -> Vec<f64> {
    let mut th = theta_z.to_vec();
    th.resize(len.max(th.len()), 0.0);
    let tails = tail_sums(&th);
    let mut raw = Vec::with_capacity(len);
    for h in 0..len {
        let mut v = rho.powi(h as i32);
        for i in 1..=h {
            v += rho.powi(i as i32) * tails[h - i];
        }
        raw.push(v);
    }
    let norm = if len > 1 { raw[1] } else { 1.0 };
    if norm > 0.0 {
        raw.iter_mut().for_each(|v| *v /= norm);
    }
    raw
}

/// Envelope for a model and covariate spec, from the certificate rate and the
/// closed-form `Θ_{p,·}(Z)`.
pub fn model_bound_curve(cert: &ContractionCertificate, cov: &CovariateSpec, len: usize) -> Result<Vec<f64>> {
    let rho = cert
        .rate()
        .ok_or_else(|| Error::Unsupported("certificate gives no contraction rate".into()))?;
    let th = cov.dependence_coefficients(cert.p, cert.o, len)?;
    Ok(bound_curve(rho, &th, len))
}

/// `θ̂_{p,t}` for `t = 0..=t_max` over `replicates` streams of `master_seed`.
///
/// Refused when the governing stationarity condition fails. `burn_in = None`
/// picks `B` from the certificate rate.
pub fn estimate_theta(
    model: &ModelSpec,
    cov: &CovariateSpec,
    master_seed: u64,
    t_max: usize,
    burn_in: Option<usize>,
    replicates: usize,
) -> Result<DependenceProfile> {
    model.validate(cov)?;
    if replicates < 2 {
        return Err(Error::Domain("need at least two replicates".into()));
    }
    let report = check_conditions(model, cov);
    if let Some(g) = report.governing() {
        if g.verdict.fails() {
            return Err(Error::Refused(format!("dependence coefficients need a stationary solution; {g}")));
        }
    }
    let cert = report.certificate;
    let p = model.p();
    let mut warnings = Vec::new();
    if let Some(g) = report.conditions.iter().find(|c| c.governing && !c.verdict.holds()) {
        warnings.push(format!("governing condition not established: {g}"));
    }
    let (b, mut residual) = default_burn_in(&cert);
    let b = match burn_in {
        Some(v) => {
            residual = cert.rate().map(|r| r.powi(v as i32));
            v
        }
        None => b,
    };
    if burn_in.is_none() && b == BURN_IN_CAP {
        warnings.push(format!(
            "burn-in capped at {b}; residual bound {}",
            residual.map_or("unknown".into(), crate::util::fmt_num)
        ));
    }
    if residual.is_none() {
        warnings.push(format!("no contraction rate; burn-in {b} without a residual bound"));
    }
    if !matches!(model, ModelSpec::Apgarch(_) | ModelSpec::Parx(_) | ModelSpec::Categorical(_)) {
        warnings.push("moment condition on the Lipschitz-in-z modulus is unverified for this family".into());
    }
    let gaps = (0..replicates as u64)
        .into_par_iter()
        .map(|r| coupled_gaps(model, cov, SeedStream::new(master_seed, r), b, t_max, true))
        .collect::<Result<Vec<_>>>()?;
    let mut theta = Vec::with_capacity(t_max + 1);
    let mut se = Vec::with_capacity(t_max + 1);
    let mut col = vec![0.0; replicates];
    for t in 0..=t_max {
        for (c, g) in col.iter_mut().zip(&gaps) {
            *c = if p == 1.0 { g[t] } else { g[t].powf(p) };
        }
        let m = stats::mean(&col);
        let s = stats::std_error(&col);
        theta.push(m.powf(1.0 / p));
        // delta method for m^{1/p}
        se.push(if m > 0.0 { s * m.powf(1.0 / p - 1.0) / p } else { 0.0 });
    }
    let curve = match model_bound_curve(&cert, cov, t_max + 1) {
        Ok(c) => Some(c),
        Err(e) => {
            warnings.push(format!("bound curve unavailable: {e}"));
            None
        }
    };
    let bound_rate = curve.as_ref().and_then(|c| log_linear_rate(c, FIT_WINDOW));
    Ok(DependenceProfile {
        p,
        o: model.o(),
        replicates,
        burn_in: b,
        residual_bound: residual,
        tail_sums: tail_sums(&theta),
        rho_fit: log_linear_rate(&theta, FIT_WINDOW),
        theta_hat: theta,
        stderr: se,
        bound_curve: curve,
        bound_rate,
        certificate: cert,
        warnings,
    })
}

/// `θ_{q,t} ≤ θ_{p,t}^{p(q'−q)/(q(q'−p))} (2M)^{q'(q−p)/(q(q'−p))}` elementwise,
/// for `p ≤ q < q'` and `M ≥ ‖|X|^o‖_{q'}`.
pub fn holder_interpolate(theta_p: &[f64], p: f64, q: f64, q_prime: f64, moment_bound: f64) -> Result<Vec<f64>> {
    if !(p >= 1.0 && p <= q && q < q_prime && q_prime.is_finite()) {
        return Err(Error::Domain(format!("need 1 <= p <= q < q', got p={p}, q={q}, q'={q_prime}")));
    }
    if !(moment_bound >= 0.0 && moment_bound.is_finite()) {
        return Err(Error::Domain(format!("moment bound must be finite and nonnegative, got {moment_bound}")));
    }
    let den = q * (q_prime - p);
    let e1 = p * (q_prime - q) / den;
    let e2 = q_prime * (q - p) / den;
    let scale = (2.0 * moment_bound).powf(e2);
    theta_p
        .iter()
        .map(|t| {
            if *t < 0.0 {
                return Err(Error::Domain(format!("negative coefficient {t}")));
            }
            Ok(if *t == 0.0 { 0.0 } else { t.powf(e1) * scale })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{CoefFn, LinearRc};
    use crate::noise::{CovariateFamily, Law};

    fn ar(k: f64) -> ModelSpec {
        ModelSpec::LinearRc(LinearRc { kappa: CoefFn::Const(k), noise: Law::standard_gaussian(), p: 1.0 })
    }

    #[test]
    fn linear_gap_halves() {
        let cov = CovariateSpec::iid(1, Law::standard_gaussian());
        let g = coupled_gaps(&ar(0.5), &cov, SeedStream::new(4, 1), 20, 10, true).unwrap();
        for t in 1..=10 {
            assert!((g[t] - 0.5 * g[t - 1]).abs() < 1e-15);
        }
    }

    #[test]
    fn forced_equal_copy_gives_zero() {
        let cov = CovariateSpec::iid(1, Law::standard_gaussian());
        let g = coupled_gaps(&ar(0.5), &cov, SeedStream::new(4, 1), 20, 10, false).unwrap();
        assert!(g.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn memoryless_model() {
        let cov = CovariateSpec::iid(1, Law::standard_gaussian());
        let p = estimate_theta(&ar(0.0), &cov, 2, 8, Some(4), 50).unwrap();
        assert!(p.theta_hat[0] > 0.0);
        assert!(p.theta_hat[1..].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn expanding_model_is_refused() {
        let cov = CovariateSpec::iid(1, Law::standard_gaussian());
        assert!(matches!(estimate_theta(&ar(1.2), &cov, 2, 8, None, 50), Err(Error::Refused(_))));
    }

    #[test]
    fn iid_envelope_is_geometric() {
        // h = 0 carries no covariate term
        let c = bound_curve(0.6, &[0.7], 12);
        for h in 1..12 {
            assert!((c[h] - 0.6f64.powi(h as i32 - 1)).abs() < 1e-14);
        }
    }

    #[test]
    fn moving_average_envelope() {
        // Θ_0 = c0 + c1, Θ_1 = c1: shape ρ^h (1 + c0 + c1 + c1/ρ) for h ≥ 2
        let (rho, c0, c1): (f64, f64, f64) = (0.5, 0.3, 0.2);
        let raw = |h: i32| rho.powi(h) * (1.0 + c0 + c1 + c1 / rho);
        let c = bound_curve(rho, &[c0, c1], 10);
        let norm = rho + rho * (c0 + c1);
        for h in 2..10 {
            assert!((c[h] - raw(h as i32) / norm).abs() < 1e-14);
        }
    }

    #[test]
    fn var1_envelope_follows_covariate() {
        let mut cov = CovariateSpec::iid(1, Law::standard_gaussian());
        cov.family = CovariateFamily::Var1 { phi: nalgebra::DMatrix::from_element(1, 1, 0.8) };
        let th = cov.dependence_coefficients(1.0, 1.0, 400).unwrap();
        let c = bound_curve(0.3, &th, 400);
        let r = c[100] / c[99];
        assert!((r - 0.8).abs() < 1e-6);
    }

    #[test]
    fn holder_cases() {
        let t = [0.25, 0.0, 0.1];
        assert_eq!(holder_interpolate(&t, 2.0, 2.0, 4.0, 3.0).unwrap(), t.to_vec());
        let v = holder_interpolate(&t, 1.0, 2.0, 4.0, 1.0).unwrap();
        assert!((v[0] - 0.25f64.cbrt() * 4f64.cbrt()).abs() < 1e-15);
        assert_eq!(v[1], 0.0);
        assert!(holder_interpolate(&t, 2.0, 1.0, 4.0, 1.0).is_err());
        assert!(holder_interpolate(&t, 1.0, 4.0, 4.0, 1.0).is_err());
    }

    #[test]
    fn tail_sums_are_nonincreasing() {
        let s = tail_sums(&[0.5, 0.25, 0.0, 0.125]);
        assert_eq!(s, vec![0.875, 0.375, 0.125, 0.125]);
    }
}
