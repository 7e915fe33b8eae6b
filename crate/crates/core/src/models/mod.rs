//! Model families as random maps `F(x_1, …, x_q, z, ε)` on lifted states.

pub mod apgarch;
pub mod benchmark;
pub mod binary;
pub mod categorical;
pub mod charn;
pub mod coef;
pub mod parx;

use nalgebra::DMatrix;

pub use apgarch::Apgarch;
pub use benchmark::{ArArch, LinearRc};
pub use binary::{Binary, BinaryForm};
pub use categorical::Categorical;
pub use charn::Charn;
pub use coef::CoefFn;
pub use parx::{Parx, PoissonArrivalView};

use crate::error::{Error, Result};
use crate::linalg;
use crate::noise::{CovariateSpec, Law, SeedStream, Tape};
use crate::stationarity::{Condition, ContractionCertificate};
use crate::stats;

/// Coordinate value of the upper initialization for continuous models.
pub const INIT_HIGH: f64 = 10.0;

/// `q` stacked state points of dimension `k`, most recent first.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub q: usize,
    pub k: usize,
    pub data: Vec<f64>,
}

impl StateVector {
    pub fn new(q: usize, k: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), q * k);
        Self { q, k, data }
    }

    pub fn filled(q: usize, k: usize, v: f64) -> Self {
        Self::new(q, k, vec![v; q * k])
    }

    /// State point at lag `i + 1`.
    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.k..(i + 1) * self.k]
    }

    pub fn head(&self) -> &[f64] {
        self.point(0)
    }
}

/// Randomness of one time step as seen by a model: the ε-uniform, ε itself and,
/// for count models, the Poisson arrivals attached to that time.
pub struct Shock {
    pub t: i64,
    pub u: f64,
    pub eps: f64,
    stream: SeedStream,
    prime: bool,
    arrivals: Option<PoissonArrivalView>,
}

impl Shock {
    pub fn new(stream: SeedStream, t: i64, prime: bool, u: f64, eps: f64) -> Self {
        Self { t, u, eps, stream, prime, arrivals: None }
    }

    pub fn from_tape(model: &ModelSpec, tape: &mut Tape<'_>, t: i64) -> Self {
        let u = tape.u_eps(t);
        Self::new(tape.stream(), t, tape.is_replaced(t), u, model.eps_from_uniform(u))
    }

    pub fn arrivals(&mut self) -> &mut PoissonArrivalView {
        let (s, t, p, u) = (self.stream, self.t, self.prime, self.u);
        self.arrivals.get_or_insert_with(|| PoissonArrivalView::new(s, t, p, u))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Charn(Charn),
    Apgarch(Apgarch),
    Parx(Parx),
    Binary(Binary),
    Categorical(Categorical),
    ArArch(ArArch),
    LinearRc(LinearRc),
}

impl ModelSpec {
    pub fn family(&self) -> &'static str {
        match self {
            ModelSpec::Charn(_) => "charn",
            ModelSpec::Apgarch(_) => "apgarch_x",
            ModelSpec::Parx(_) => "parx",
            ModelSpec::Binary(_) => "binary_choice",
            ModelSpec::Categorical(_) => "categorical",
            ModelSpec::ArArch(_) => "ar_arch_benchmark",
            ModelSpec::LinearRc(_) => "linear_random_coef",
        }
    }

    /// Number of lags `q`.
    pub fn order(&self) -> usize {
        match self {
            ModelSpec::Charn(m) => m.q,
            ModelSpec::Apgarch(m) => m.q,
            ModelSpec::Parx(m) => m.q,
            ModelSpec::Binary(m) => m.q,
            ModelSpec::Categorical(m) => m.q,
            ModelSpec::ArArch(_) | ModelSpec::LinearRc(_) => 1,
        }
    }

    /// Dimension `k` of one state point.
    pub fn point_dim(&self) -> usize {
        match self {
            ModelSpec::Apgarch(_) => 3,
            ModelSpec::Parx(_) => 2,
            _ => 1,
        }
    }

    pub fn state_len(&self) -> usize {
        self.order() * self.point_dim()
    }

    /// How many covariate lags the head reads.
    pub fn covariate_lags(&self) -> usize {
        match self {
            ModelSpec::Binary(m) => m.covariate_lags(),
            _ => 1,
        }
    }

    /// Moment order `p` of the contraction metric.
    pub fn p(&self) -> f64 {
        match self {
            ModelSpec::Charn(m) => m.p,
            ModelSpec::ArArch(m) => m.p,
            ModelSpec::LinearRc(m) => m.p,
            _ => 1.0,
        }
    }

    /// Metric exponent `o` of `d(x, y) = |x − y|^o`.
    pub fn o(&self) -> f64 {
        1.0
    }

    /// Law of ε; `None` when ε is the uniform itself.
    pub fn eps_law(&self) -> Option<Law> {
        match self {
            ModelSpec::Charn(m) => Some(m.noise),
            ModelSpec::Apgarch(m) => Some(m.noise),
            ModelSpec::Binary(m) => Some(m.noise),
            ModelSpec::ArArch(m) => Some(m.noise),
            ModelSpec::LinearRc(m) => Some(m.noise),
            ModelSpec::Parx(_) => Some(Law::Uniform { lo: 0.0, hi: 1.0 }),
            ModelSpec::Categorical(_) => None,
        }
    }

    pub fn eps_from_uniform(&self, u: f64) -> f64 {
        match self.eps_law() {
            Some(Law::Uniform { lo, hi }) if lo == 0.0 && hi == 1.0 => u,
            Some(l) => l.quantile(u),
            None => u,
        }
    }

    pub fn validate(&self, cov: &CovariateSpec) -> Result<()> {
        cov.validate()?;
        match self {
            ModelSpec::Charn(m) => m.validate(cov),
            ModelSpec::Apgarch(m) => m.validate(cov),
            ModelSpec::Parx(m) => m.validate(cov),
            ModelSpec::Binary(m) => m.validate(cov),
            ModelSpec::Categorical(m) => m.validate(cov),
            ModelSpec::ArArch(m) => m.validate(cov),
            ModelSpec::LinearRc(m) => m.validate(cov),
        }
    }

    /// Values a state point can take, for finite-alphabet models.
    pub fn finite_alphabet(&self) -> Option<Vec<f64>> {
        match self {
            ModelSpec::Binary(_) => Some(vec![0.0, 1.0]),
            ModelSpec::Categorical(m) => Some(m.alphabet()),
            _ => None,
        }
    }

    /// Every lifted state of a finite-alphabet model, in lexicographic order.
    pub fn enumerate_states(&self) -> Option<Vec<Vec<f64>>> {
        let alpha = self.finite_alphabet()?;
        let q = self.order();
        let n = alpha.len();
        let total = n.pow(q as u32);
        Some(
            (0..total)
                .map(|mut code| {
                    let mut s = vec![0.0; q];
                    for v in s.iter_mut().rev() {
                        *v = alpha[code % n];
                        code /= n;
                    }
                    s
                })
                .collect(),
        )
    }

    /// Low and high initializations used by the dual-start stopping rule.
    pub fn init_pair(&self) -> (Vec<f64>, Vec<f64>) {
        if let Some(states) = self.enumerate_states() {
            return (states[0].clone(), states[states.len() - 1].clone());
        }
        let n = self.state_len();
        (vec![0.0; n], vec![INIT_HIGH; n])
    }

    /// Scalar observation `Y_t` carried by a state point.
    pub fn observation(&self, point: &[f64]) -> f64 {
        match self {
            ModelSpec::Apgarch(m) => m.observation(point),
            _ => point[0],
        }
    }

    /// New head point of the lifted map.
    pub fn head(&self, state: &[f64], zlags: &[f64], shock: &mut Shock, out: &mut [f64]) -> Result<()> {
        match self {
            ModelSpec::Charn(m) => out[0] = m.head(state, zlags, shock.eps),
            ModelSpec::Apgarch(m) => m.head(state, zlags, shock.eps, out)?,
            ModelSpec::Parx(m) => m.head(state, zlags, shock, out)?,
            ModelSpec::Binary(m) => out[0] = m.head(state, zlags, shock.eps),
            ModelSpec::Categorical(m) => out[0] = m.head(state, zlags, shock.u)?,
            ModelSpec::ArArch(m) => out[0] = m.head(state[0], zlags, shock.eps),
            ModelSpec::LinearRc(m) => out[0] = m.head(state[0], zlags, shock.eps),
        }
        Ok(())
    }

    /// `f_t(x)`: new head followed by the first `q − 1` lags of `state`.
    pub fn step_into(&self, state: &[f64], zlags: &[f64], shock: &mut Shock, out: &mut [f64]) -> Result<()> {
        let k = self.point_dim();
        let n = self.state_len();
        out[k..n].copy_from_slice(&state[..n - k]);
        self.head(state, zlags, shock, &mut out[..k])
    }

    pub fn step(&self, state: &StateVector, zlags: &[f64], shock: &mut Shock) -> Result<StateVector> {
        if state.q != self.order() || state.k != self.point_dim() {
            return Err(Error::Domain(format!(
                "state has shape ({}, {}), model expects ({}, {})",
                state.q,
                state.k,
                self.order(),
                self.point_dim()
            )));
        }
        let mut out = vec![0.0; self.state_len()];
        self.step_into(&state.data, zlags, shock, &mut out)?;
        Ok(StateVector::new(state.q, state.k, out))
    }

    /// Random Lipschitz matrix of `f_t` (companion form for `q > 1`).
    pub fn lipschitz_matrix(&self, zlags: &[f64], eps: f64) -> Result<DMatrix<f64>> {
        match self {
            ModelSpec::LinearRc(m) => Ok(DMatrix::from_element(1, 1, m.kappa.eval(zlags).abs())),
            ModelSpec::ArArch(m) => Ok(DMatrix::from_element(1, 1, m.lipschitz(zlags, eps))),
            ModelSpec::Charn(m) => Ok(linalg::companion(&m.lipschitz_blocks(zlags, eps))),
            ModelSpec::Apgarch(m) => Ok(linalg::companion(&m.lipschitz_blocks(eps))),
            _ => Err(Error::Unsupported(format!(
                "no random Lipschitz matrix for the {} family",
                self.family()
            ))),
        }
    }

    pub fn contraction_metadata(&self, cov: &CovariateSpec) -> ContractionCertificate {
        match self {
            ModelSpec::Charn(m) => m.metadata(cov),
            ModelSpec::Apgarch(m) => m.metadata(),
            ModelSpec::Parx(m) => m.metadata(),
            ModelSpec::Binary(m) => m.metadata(cov),
            ModelSpec::Categorical(m) => m.metadata(cov),
            ModelSpec::ArArch(m) => m.metadata(cov),
            ModelSpec::LinearRc(m) => m.metadata(cov),
        }
    }

    pub fn conditions(&self, cov: &CovariateSpec) -> Vec<Condition> {
        match self {
            ModelSpec::Charn(m) => m.conditions(cov),
            ModelSpec::Apgarch(m) => m.conditions(),
            ModelSpec::Parx(m) => m.conditions(cov),
            ModelSpec::Binary(m) => m.conditions(cov),
            ModelSpec::Categorical(m) => m.conditions(cov),
            ModelSpec::ArArch(m) => m.conditions(cov),
            ModelSpec::LinearRc(m) => m.conditions(cov),
        }
    }
}

/// Seed of the fixed stream used for Monte-Carlo expectations inside checks.
const MC_SEED: u64 = 0x5eed_c0de;
const MC_DRAWS: u64 = 4000;

/// `E g(Z_0)`: by quadrature when the marginal is closed-form, else by Monte
/// Carlo over independent streams (the standard error is returned then).
pub(crate) fn covariate_expectation<G: Fn(&[f64]) -> f64>(cov: &CovariateSpec, g: G) -> (f64, Option<f64>) {
    if let Some(m) = cov.marginal() {
        return (m.expect(|z| g(&[z])), None);
    }
    let xs: Vec<f64> = (0..MC_DRAWS)
        .map(|i| {
            let mut tape = Tape::new(SeedStream::new(MC_SEED, i), cov, None);
            g(tape.z(0))
        })
        .collect();
    (stats::mean(&xs), Some(stats::std_error(&xs)))
}
