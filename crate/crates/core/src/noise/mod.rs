//! Replicable innovations ξ_t = (ε_t, η_t) and covariate paths.

pub mod covariate;
pub mod law;
pub mod rng;

use nalgebra::DMatrix;

pub use covariate::{CovariateFamily, CovariateSpec, Link, Marginal};
pub use law::Law;
pub use rng::{Channel, SeedStream, SlotRng};

use crate::error::Result;

/// One time step of the driving pair.
#[derive(Debug, Clone, PartialEq)]
pub struct InnovationDraw {
    pub eps: f64,
    pub eta: Vec<f64>,
    /// The uniform behind `eps`.
    pub u_eps: f64,
}

fn draw_raw(stream: &SeedStream, t: i64, prime: bool, spec: &CovariateSpec, eta_out: &mut [f64]) -> f64 {
    let mut rng = stream.slot(t, Channel::Innovation, prime);
    let u_eps = rng.uniform();
    for v in eta_out.iter_mut() {
        let u = rng.uniform();
        let aux = rng.uniform();
        let src = match spec.link {
            Link::CommonShock { weight } if aux < weight => u_eps,
            _ => u,
        };
        *v = spec.eta_law.quantile(src);
    }
    u_eps
}

/// ξ_t for one stream; ε is the `eps_law` quantile of the ε-uniform.
pub fn draw_innovation(stream: &SeedStream, t: i64, spec: &CovariateSpec, eps_law: &Law) -> Result<InnovationDraw> {
    spec.validate()?;
    let mut eta = vec![0.0; spec.dim];
    let u_eps = draw_raw(stream, t, false, spec, &mut eta);
    Ok(InnovationDraw {
        eps: eps_law.quantile(u_eps),
        eta,
        u_eps,
    })
}

/// Lazily extended record of the innovations and covariates of one stream.
///
/// With `replaced_at = Some(s)` every draw at time `s` comes from the
/// independent copy, which realizes the ξ_s-replacement coupling.
pub struct Tape<'a> {
    stream: SeedStream,
    spec: &'a CovariateSpec,
    replaced_at: Option<i64>,
    powers: Vec<DMatrix<f64>>,
    lo: i64,
    len: usize,
    u_eps: Vec<f64>,
    eta: Vec<f64>,
    z: Vec<f64>,
    z_ready: Vec<bool>,
}

impl<'a> Tape<'a> {
    pub fn new(stream: SeedStream, spec: &'a CovariateSpec, replaced_at: Option<i64>) -> Self {
        Self {
            stream,
            spec,
            replaced_at,
            powers: spec.var1_powers(),
            lo: 0,
            len: 0,
            u_eps: Vec::new(),
            eta: Vec::new(),
            z: Vec::new(),
            z_ready: Vec::new(),
        }
    }

    pub fn stream(&self) -> SeedStream {
        self.stream
    }

    pub fn spec(&self) -> &CovariateSpec {
        self.spec
    }

    pub fn is_replaced(&self, t: i64) -> bool {
        self.replaced_at == Some(t)
    }

    fn generate(&self, a: i64, b: i64) -> (Vec<f64>, Vec<f64>) {
        let e = self.spec.dim;
        let n = (b - a) as usize;
        let mut u = Vec::with_capacity(n);
        let mut eta = vec![0.0; n * e];
        for (i, t) in (a..b).enumerate() {
            u.push(draw_raw(&self.stream, t, self.is_replaced(t), self.spec, &mut eta[i * e..(i + 1) * e]));
        }
        (u, eta)
    }

    /// Make sure draws for every index in `[a, b]` are stored.
    pub fn ensure(&mut self, a: i64, b: i64) {
        let e = self.spec.dim;
        if self.len == 0 {
            let (u, eta) = self.generate(a, b + 1);
            self.lo = a;
            self.len = u.len();
            self.z = vec![0.0; eta.len()];
            self.z_ready = vec![false; u.len()];
            self.u_eps = u;
            self.eta = eta;
            return;
        }
        if a < self.lo {
            // grow backwards by at least the current length to amortize copies
            let new_lo = a.min(self.lo - self.len as i64);
            let (mut u, mut eta) = self.generate(new_lo, self.lo);
            let extra = u.len();
            u.extend_from_slice(&self.u_eps);
            eta.extend_from_slice(&self.eta);
            let mut z = vec![0.0; extra * e];
            z.extend_from_slice(&self.z);
            let mut ready = vec![false; extra];
            ready.extend_from_slice(&self.z_ready);
            self.u_eps = u;
            self.eta = eta;
            self.z = z;
            self.z_ready = ready;
            self.lo = new_lo;
            self.len += extra;
        }
        let hi = self.lo + self.len as i64;
        if b >= hi {
            let (u, eta) = self.generate(hi, b + 1);
            self.z.extend(std::iter::repeat(0.0).take(eta.len()));
            self.z_ready.extend(std::iter::repeat(false).take(u.len()));
            self.len += u.len();
            self.u_eps.extend(u);
            self.eta.extend(eta);
        }
    }

    fn idx(&self, t: i64) -> usize {
        (t - self.lo) as usize
    }

    pub fn u_eps(&mut self, t: i64) -> f64 {
        self.ensure(t, t);
        self.u_eps[self.idx(t)]
    }

    pub fn eta(&mut self, t: i64) -> &[f64] {
        self.ensure(t, t);
        let e = self.spec.dim;
        let i = self.idx(t);
        &self.eta[i * e..(i + 1) * e]
    }

    /// `Z_t`, computed from η_{t-memory+1..t} and cached.
    pub fn z(&mut self, t: i64) -> &[f64] {
        let e = self.spec.dim;
        let mem = self.spec.memory() as i64;
        self.ensure(t - mem + 1, t);
        let i = self.idx(t);
        if !self.z_ready[i] {
            let mut out = vec![0.0; e];
            let eta = &self.eta;
            self.spec
                .evaluate(&self.powers, |j| &eta[(i - j) * e..(i - j + 1) * e], &mut out);
            self.z[i * e..(i + 1) * e].copy_from_slice(&out);
            self.z_ready[i] = true;
        }
        &self.z[i * e..(i + 1) * e]
    }

    /// Covariate lags `Z_{t-1}, …, Z_{t-lags}` written contiguously into `out`.
    pub fn z_lags(&mut self, t: i64, lags: usize, out: &mut Vec<f64>) {
        out.clear();
        for l in 1..=lags as i64 {
            let z = self.z(t - l);
            out.extend_from_slice(z);
        }
    }
}

/// `Z_{t0..=t1}` for one stream.
pub fn covariate_path(stream: &SeedStream, spec: &CovariateSpec, t0: i64, t1: i64) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    if t0 > t1 {
        return Err(crate::error::Error::Domain(format!("empty range {t0}..={t1}")));
    }
    let mut tape = Tape::new(*stream, spec, None);
    Ok((t0..=t1).map(|t| tape.z(t).to_vec()).collect())
}

/// `(Z_{0..=t1}, Z̄_{0..=t1})` where the second path uses an independent copy of η_0.
pub fn coupled_covariate_path(
    stream: &SeedStream,
    spec: &CovariateSpec,
    t1: i64,
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    spec.validate()?;
    if t1 < 0 {
        return Err(crate::error::Error::Domain("coupled path needs t1 ≥ 0".into()));
    }
    let mut a = Tape::new(*stream, spec, None);
    let mut b = Tape::new(*stream, spec, Some(0));
    let za = (0..=t1).map(|t| a.z(t).to_vec()).collect();
    let zb = (0..=t1).map(|t| b.z(t).to_vec()).collect();
    Ok((za, zb))
}
