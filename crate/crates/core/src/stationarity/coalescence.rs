//! Coalescence of backward iterations for finite-alphabet models.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::{ModelSpec, Shock};
use crate::noise::{CovariateSpec, SeedStream, Tape};

/// Default cap on the coalescence horizon.
pub const DEFAULT_CAP: usize = 10_000;

fn encode(state: &[f64], alphabet: &[f64]) -> usize {
    let n = alphabet.len();
    state.iter().fold(0, |acc, v| {
        let i = alphabet.iter().position(|a| a == v).expect("state outside the alphabet");
        acc * n + i
    })
}

/// Composes the maps backward from time `t` until the composition is constant.
///
/// Returns the common image and the coalescence time `T`, or `(None, None)`
/// when `cap` steps pass without agreement.
pub(crate) fn coalesce_on_tape(
    model: &ModelSpec,
    tape: &mut Tape<'_>,
    t: i64,
    cap: usize,
) -> Result<(Option<Vec<f64>>, Option<usize>)> {
    let alphabet = model.finite_alphabet().expect("finite alphabet");
    let states = model.enumerate_states().expect("finite alphabet");
    let lags = model.covariate_lags();
    let n = model.state_len();
    // composition[x] = index of f_t ∘ … ∘ f_{t-s+1}(x)
    let mut composition: Vec<usize> = (0..states.len()).collect();
    let mut image = vec![0usize; states.len()];
    let mut buf = vec![0.0; n];
    let mut z = Vec::new();
    for s in 1..=cap {
        let time = t - s as i64 + 1;
        tape.z_lags(time, lags, &mut z);
        let mut shock = Shock::from_tape(model, tape, time);
        for (i, x) in states.iter().enumerate() {
            model.step_into(x, &z, &mut shock, &mut buf)?;
            image[i] = encode(&buf, &alphabet);
        }
        composition = image.iter().map(|j| composition[*j]).collect();
        if composition.iter().all(|c| *c == composition[0]) {
            return Ok((Some(states[composition[0]].clone()), Some(s)));
        }
    }
    Ok((None, None))
}

/// Coalescence time `T` at time 0 of one stream; `None` when censored at `cap`.
pub fn coalescence_time(model: &ModelSpec, cov: &CovariateSpec, stream: SeedStream, cap: usize) -> Result<Option<usize>> {
    if model.finite_alphabet().is_none() {
        return Err(Error::Unsupported("coalescence needs a finite-alphabet model".into()));
    }
    model.validate(cov)?;
    let mut tape = Tape::new(stream, cov, None);
    Ok(coalesce_on_tape(model, &mut tape, 0, cap)?.1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoalescenceReport {
    pub cap: usize,
    /// `T` per replicate, `None` when censored.
    pub times: Vec<Option<usize>>,
    /// `η₋^q`, when a uniform lower bound exists.
    pub refresh_probability: Option<f64>,
    pub q: usize,
}

impl CoalescenceReport {
    pub fn censored(&self) -> usize {
        self.times.iter().filter(|t| t.is_none()).count()
    }

    pub fn censoring_rate(&self) -> f64 {
        self.censored() as f64 / self.times.len() as f64
    }

    /// Empirical `P(T > k)` and its binomial standard error.
    pub fn survival(&self, k: usize) -> (f64, f64) {
        let r = self.times.len() as f64;
        let above = self.times.iter().filter(|t| t.map_or(true, |v| v > k)).count() as f64;
        let p = above / r;
        (p, (p * (1.0 - p) / r).sqrt())
    }

    /// Domination bound `(1 − η₋^q)^{⌊k/q⌋}`.
    pub fn survival_bound(&self, k: usize) -> Option<f64> {
        self.refresh_probability.map(|d| (1.0 - d).powi((k / self.q) as i32))
    }

    /// Mean of the uncensored times.
    pub fn mean_time(&self) -> f64 {
        let v: Vec<f64> = self.times.iter().flatten().map(|t| *t as f64).collect();
        crate::stats::mean(&v)
    }

    /// Mean of the geometric law with success probability `η₋^q` per block of `q` steps.
    pub fn bound_mean(&self) -> Option<f64> {
        self.refresh_probability.filter(|d| *d > 0.0).map(|d| self.q as f64 / d)
    }
}

/// Coalescence times over `replicates` streams of `master_seed`.
pub fn coalescence_times(
    model: &ModelSpec,
    cov: &CovariateSpec,
    master_seed: u64,
    replicates: usize,
    cap: usize,
) -> Result<CoalescenceReport> {
    if model.finite_alphabet().is_none() {
        return Err(Error::Unsupported("coalescence needs a finite-alphabet model".into()));
    }
    model.validate(cov)?;
    let times = (0..replicates as u64)
        .into_par_iter()
        .map(|r| coalescence_time(model, cov, SeedStream::new(master_seed, r), cap))
        .collect::<Result<Vec<_>>>()?;
    let cert = model.contraction_metadata(cov);
    let refresh = match model {
        ModelSpec::Categorical(_) => cert.scalar("delta_coalescence").filter(|d| *d > 0.0),
        _ => None,
    };
    Ok(CoalescenceReport { cap, times, refresh_probability: refresh, q: model.order() })
}
