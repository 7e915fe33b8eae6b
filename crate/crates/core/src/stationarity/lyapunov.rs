//! Lyapunov exponent of the random Lipschitz matrices along a path.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::max_col_sum;
use crate::models::ModelSpec;
use crate::noise::{CovariateSpec, SeedStream, Tape};
use crate::stats::{self, CompensatedSum};

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovEstimate {
    pub chi: f64,
    pub stderr: f64,
    pub n: usize,
    pub per_replicate: Vec<f64>,
}

/// `(1/n) log ‖A_n ⋯ A_1‖` for one stream, in the max-column-sum norm.
pub fn lyapunov_path(model: &ModelSpec, cov: &CovariateSpec, stream: SeedStream, n: usize) -> Result<f64> {
    let q = model.order();
    if n < q {
        return Err(Error::Domain(format!("need n >= q, got n={n}, q={q}")));
    }
    let mut tape = Tape::new(stream, cov, None);
    let lags = model.covariate_lags();
    let mut z = Vec::new();
    let mut prod: Option<DMatrix<f64>> = None;
    let mut logs = CompensatedSum::new();
    for t in 1..=n as i64 {
        tape.z_lags(t, lags, &mut z);
        let eps = model.eps_from_uniform(tape.u_eps(t));
        let a = model.lipschitz_matrix(&z, eps)?;
        let mut p = match prod.take() {
            Some(p) => &a * p,
            None => a,
        };
        let norm = max_col_sum(&p);
        if norm == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        logs.add(norm.ln());
        p /= norm;
        prod = Some(p);
    }
    Ok(logs.value() / n as f64)
}

/// Mean of [`lyapunov_path`] over `replicates` streams of `master_seed`.
pub fn lyapunov_estimate(
    model: &ModelSpec,
    cov: &CovariateSpec,
    master_seed: u64,
    n: usize,
    replicates: usize,
) -> Result<LyapunovEstimate> {
    model.validate(cov)?;
    if replicates == 0 {
        return Err(Error::Domain("need at least one replicate".into()));
    }
    let per_replicate = (0..replicates as u64)
        .into_par_iter()
        .map(|r| lyapunov_path(model, cov, SeedStream::new(master_seed, r), n))
        .collect::<Result<Vec<_>>>()?;
    let stderr = if replicates > 1 { stats::std_error(&per_replicate) } else { f64::NAN };
    Ok(LyapunovEstimate { chi: stats::mean(&per_replicate), stderr, n, per_replicate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Charn, CoefFn, LinearRc};
    use crate::noise::Law;

    #[test]
    fn constant_factor() {
        let m = ModelSpec::LinearRc(LinearRc { kappa: CoefFn::Const(0.5), noise: Law::standard_gaussian(), p: 1.0 });
        let cov = CovariateSpec::iid(1, Law::standard_gaussian());
        let e = lyapunov_estimate(&m, &cov, 1, 1000, 4).unwrap();
        assert!((e.chi - 0.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn rademacher_charn() {
        // volatility part only: c = w_1^{1/δ} |ε| with |ε| = 1
        let b1: f64 = 0.36;
        let m = ModelSpec::Charn(Charn {
            q: 1,
            theta: vec![CoefFn::Const(0.0); 3],
            w: vec![CoefFn::Const(1.0), CoefFn::Const(b1)],
            delta: 2.0,
            noise: Law::Rademacher,
            p: 1.0,
        });
        let cov = CovariateSpec::iid(1, Law::standard_gaussian());
        let e = lyapunov_estimate(&m, &cov, 3, 500, 2).unwrap();
        assert!((e.chi - 0.5 * b1.ln()).abs() < 1e-12);
    }

    #[test]
    fn short_path_is_rejected() {
        let m = ModelSpec::Charn(Charn {
            q: 3,
            theta: vec![CoefFn::Const(0.1); 7],
            w: vec![CoefFn::Const(1.0); 4],
            delta: 1.0,
            noise: Law::standard_gaussian(),
            p: 1.0,
        });
        let cov = CovariateSpec::iid(1, Law::standard_gaussian());
        assert!(matches!(lyapunov_estimate(&m, &cov, 0, 2, 2), Err(Error::Domain(_))));
    }
}
