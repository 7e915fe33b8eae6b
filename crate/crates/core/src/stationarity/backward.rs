//! Backward iterations `f_t ∘ … ∘ f_{t-s+1}(x)` on shared draws.

use crate::error::{Error, Result};
use crate::models::{ModelSpec, Shock, StateVector};
use crate::noise::{CovariateSpec, SeedStream, Tape};
use crate::stationarity::ContractionCertificate;

/// Default stopping tolerance on the dual-start gap.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Default cap on the backward horizon.
pub const DEFAULT_S_MAX: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    /// Number of maps composed in the accepted horizon.
    pub s_used: usize,
    pub s_max: usize,
    pub tol: f64,
    /// Gap between the initializations at `s_used`.
    pub gap: f64,
    pub coalesced: bool,
    /// First horizon at which all initializations agree (finite alphabets).
    pub coalescence_time: Option<usize>,
    pub certificate: Option<ContractionCertificate>,
}

/// Gap `Σ_c |x_c − y_c|^o` over every coordinate of the lifted state.
pub fn state_gap(x: &[f64], y: &[f64], o: f64) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let d = (a - b).abs();
            if o == 1.0 {
                d
            } else {
                d.powf(o)
            }
        })
        .sum()
}

/// Applies `f_{t0}, …, f_{t1}` in order to every state in `states`.
pub fn run_forward(
    model: &ModelSpec,
    tape: &mut Tape<'_>,
    states: &mut [Vec<f64>],
    t0: i64,
    t1: i64,
) -> Result<()> {
    let lags = model.covariate_lags();
    let mut z = Vec::new();
    let mut buf = vec![0.0; model.state_len()];
    for t in t0..=t1 {
        tape.z_lags(t, lags, &mut z);
        let mut shock = Shock::from_tape(model, tape, t);
        for s in states.iter_mut() {
            model.step_into(s, &z, &mut shock, &mut buf)?;
            s.copy_from_slice(&buf);
        }
    }
    Ok(())
}

fn horizon_unit(model: &ModelSpec, cov: &CovariateSpec) -> (usize, ContractionCertificate) {
    let cert = model.contraction_metadata(cov);
    (cert.m.unwrap_or(1).max(1), cert)
}

/// Approximate (continuous state) or exact (finite alphabet) draw of the
/// stationary solution at time `t`.
pub fn backward_sample(
    model: &ModelSpec,
    cov: &CovariateSpec,
    stream: SeedStream,
    t: i64,
    tol: f64,
    s_max: usize,
) -> Result<(StateVector, ConvergenceReport)> {
    model.validate(cov)?;
    let mut tape = Tape::new(stream, cov, None);
    backward_on_tape(model, cov, &mut tape, t, tol, s_max)
}

pub(crate) fn backward_on_tape(
    model: &ModelSpec,
    cov: &CovariateSpec,
    tape: &mut Tape<'_>,
    t: i64,
    tol: f64,
    s_max: usize,
) -> Result<(StateVector, ConvergenceReport)> {
    let (q, k) = (model.order(), model.point_dim());
    if model.finite_alphabet().is_some() {
        let (state, time) = super::coalescence::coalesce_on_tape(model, tape, t, s_max)?;
        let report = ConvergenceReport {
            s_used: time.unwrap_or(s_max),
            s_max,
            tol,
            gap: if time.is_some() { 0.0 } else { f64::NAN },
            coalesced: time.is_some(),
            coalescence_time: time,
            certificate: Some(model.contraction_metadata(cov)),
        };
        return match state {
            Some(s) => Ok((StateVector::new(q, k, s), report)),
            None => Err(Error::NonConvergence(Box::new(report))),
        };
    }
    let (m, cert) = horizon_unit(model, cov);
    let (lo, hi) = model.init_pair();
    let o = model.o();
    let mut s = m;
    let mut last_gap = f64::INFINITY;
    loop {
        if s > s_max {
            return Err(Error::NonConvergence(Box::new(ConvergenceReport {
                s_used: s_max,
                s_max,
                tol,
                gap: last_gap,
                coalesced: false,
                coalescence_time: None,
                certificate: Some(cert),
            })));
        }
        let mut states = vec![lo.clone(), hi.clone()];
        run_forward(model, tape, &mut states, t - s as i64 + 1, t)?;
        last_gap = state_gap(&states[0], &states[1], o);
        if last_gap <= tol {
            let exact = last_gap == 0.0;
            let state = states.swap_remove(0);
            return Ok((
                StateVector::new(q, k, state),
                ConvergenceReport {
                    s_used: s,
                    s_max,
                    tol,
                    gap: last_gap,
                    coalesced: exact,
                    coalescence_time: None,
                    certificate: Some(cert),
                },
            ));
        }
        s *= 2;
    }
}

/// Gap between the two initializations after exactly `s` backward steps at time `t`.
pub fn initialization_gap(model: &ModelSpec, cov: &CovariateSpec, stream: SeedStream, t: i64, s: usize) -> Result<f64> {
    model.validate(cov)?;
    let mut tape = Tape::new(stream, cov, None);
    let (lo, hi) = model.init_pair();
    let mut states = vec![lo, hi];
    run_forward(model, &mut tape, &mut states, t - s as i64 + 1, t)?;
    Ok(state_gap(&states[0], &states[1], model.o()))
}

/// Gaps after `1..=s_max` steps from the two initializations, started at time 1.
/// In law this is the backward gap profile at every horizon.
pub fn gap_profile(model: &ModelSpec, cov: &CovariateSpec, stream: SeedStream, s_max: usize) -> Result<Vec<f64>> {
    let mut tape = Tape::new(stream, cov, None);
    let (lo, hi) = model.init_pair();
    let mut states = vec![lo, hi];
    let mut out = Vec::with_capacity(s_max);
    for t in 1..=s_max as i64 {
        run_forward(model, &mut tape, &mut states, t, t)?;
        out.push(state_gap(&states[0], &states[1], model.o()));
    }
    Ok(out)
}

/// State after `burn_in` forward steps from the low initialization, ending at time 0.
pub fn forward_sample(model: &ModelSpec, cov: &CovariateSpec, stream: SeedStream, burn_in: usize) -> Result<StateVector> {
    model.validate(cov)?;
    let mut tape = Tape::new(stream, cov, None);
    let mut states = vec![model.init_pair().0];
    run_forward(model, &mut tape, &mut states, 1 - burn_in as i64, 0)?;
    Ok(StateVector::new(model.order(), model.point_dim(), states.swap_remove(0)))
}

/// One record of a stationary path.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub k: usize,
    pub dim: usize,
    pub t: Vec<i64>,
    /// Head points `X_t`, `k` values per record.
    pub states: Vec<f64>,
    /// Covariates `Z_t`, `dim` values per record.
    pub z: Vec<f64>,
    pub eps: Vec<f64>,
    pub report: ConvergenceReport,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.k..(i + 1) * self.k]
    }

    /// First coordinate of every head point.
    pub fn first_coordinate(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.states[i * self.k]).collect()
    }
}

/// One backward sample at time 0 followed by `n − 1` forward steps.
pub fn stationary_path(
    model: &ModelSpec,
    cov: &CovariateSpec,
    stream: SeedStream,
    n: usize,
    tol: f64,
    s_max: usize,
) -> Result<Trajectory> {
    model.validate(cov)?;
    if n == 0 {
        return Err(Error::Domain("path length must be positive".into()));
    }
    let mut tape = Tape::new(stream, cov, None);
    let (x0, report) = backward_on_tape(model, cov, &mut tape, 0, tol, s_max)?;
    let k = model.point_dim();
    let dim = cov.dim;
    let mut traj = Trajectory {
        k,
        dim,
        t: Vec::with_capacity(n),
        states: Vec::with_capacity(n * k),
        z: Vec::with_capacity(n * dim),
        eps: Vec::with_capacity(n),
        report,
    };
    let lags = model.covariate_lags();
    let mut state = x0.data;
    let mut buf = vec![0.0; state.len()];
    let mut zl = Vec::new();
    for t in 0..n as i64 {
        if t > 0 {
            tape.z_lags(t, lags, &mut zl);
            let mut shock = Shock::from_tape(model, &mut tape, t);
            model.step_into(&state, &zl, &mut shock, &mut buf)?;
            std::mem::swap(&mut state, &mut buf);
        }
        let u = tape.u_eps(t);
        traj.t.push(t);
        traj.states.extend_from_slice(&state[..k]);
        traj.z.extend_from_slice(tape.z(t));
        traj.eps.push(model.eps_from_uniform(u));
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{CoefFn, LinearRc};
    use crate::noise::Law;

    fn ar(k: f64) -> ModelSpec {
        ModelSpec::LinearRc(LinearRc { kappa: CoefFn::Const(k), noise: Law::standard_gaussian(), p: 1.0 })
    }

    #[test]
    fn linear_gap_is_geometric() {
        let m = ar(0.5);
        let cov = CovariateSpec::iid(1, Law::standard_gaussian());
        for s in [1usize, 2, 5, 13, 30] {
            let g = initialization_gap(&m, &cov, SeedStream::new(3, 0), 0, s).unwrap();
            // exact up to the rounding of the shared additive noise
            assert!((g - 10.0 * 0.5f64.powi(s as i32)).abs() < 1e-13);
        }
    }

    #[test]
    fn backward_samples_agree_across_starts() {
        let m = ar(0.5);
        let cov = CovariateSpec::iid(1, Law::standard_gaussian());
        let (x, r) = backward_sample(&m, &cov, SeedStream::new(1, 4), 7, 1e-10, 1 << 12).unwrap();
        assert!(r.gap <= 1e-10);
        // a longer horizon only changes the draw below tolerance
        let mut tape = Tape::new(SeedStream::new(1, 4), &cov, None);
        let mut st = vec![vec![-3.0]];
        run_forward(&m, &mut tape, &mut st, 7 - 200 + 1, 7).unwrap();
        assert!((st[0][0] - x.data[0]).abs() < 1e-9);
    }

    #[test]
    fn expanding_map_is_reported() {
        let m = ar(1.5);
        let cov = CovariateSpec::iid(1, Law::standard_gaussian());
        let e = backward_sample(&m, &cov, SeedStream::new(1, 0), 0, 1e-8, 256).unwrap_err();
        match e {
            Error::NonConvergence(r) => assert_eq!(r.s_max, 256),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn path_is_reproducible() {
        let m = ar(0.5);
        let cov = CovariateSpec::iid(1, Law::standard_gaussian());
        let a = stationary_path(&m, &cov, SeedStream::new(9, 2), 100, 1e-8, 1 << 10).unwrap();
        let b = stationary_path(&m, &cov, SeedStream::new(9, 2), 100, 1e-8, 1 << 10).unwrap();
        assert_eq!(a, b);
        for i in 1..100 {
            let want = 0.5 * a.state(i - 1)[0] + a.eps[i];
            assert!((a.state(i)[0] - want).abs() < 1e-14);
        }
    }
}
