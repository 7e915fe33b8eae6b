//! Experiment configuration in a sectioned `key = value` text format.
//!
//! ```text
//! # comment
//! [model]
//! family = parx
//! q = 1
//! beta0 = 1
//! beta = 0.5
//! alpha = 0.3
//! pi = 0
//!
//! [covariate]
//! family = iid
//! eta_law = gaussian(0, 1)
//!
//! [run]
//! seed = 7
//! ```
//!
//! Vectors are comma lists, matrices are rows of comma lists separated by `;`.
//! Functional coefficients are a plain number, `affine(base; slopes; lo, hi)`
//! or `logistic(base; slopes; lo, hi)`. Every key is checked: unknown, repeated
//! or missing keys are configuration errors naming the key.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::limits::{Functional, FunctionalKind, MomentAssertion};
use crate::models::{Apgarch, ArArch, Binary, BinaryForm, Categorical, Charn, CoefFn, LinearRc, ModelSpec, Parx};
use crate::noise::covariate::DEFAULT_TRUNCATION;
use crate::noise::{CovariateFamily, CovariateSpec, Law, Link};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Check,
    Lyapunov,
    Dependence,
    Clt,
    Coalescence,
    Counterexample,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Simulate,
        Command::Check,
        Command::Lyapunov,
        Command::Dependence,
        Command::Clt,
        Command::Coalescence,
        Command::Counterexample,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Check => "check",
            Command::Lyapunov => "lyapunov",
            Command::Dependence => "dependence",
            Command::Clt => "clt",
            Command::Coalescence => "coalescence",
            Command::Counterexample => "counterexample",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s.trim())
            .ok_or_else(|| Error::config("run.command", format!("unknown command `{}`", s.trim())))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub seed: u64,
    /// Path length (simulate, lyapunov, clt).
    pub n: usize,
    pub replicates: usize,
    pub tol: f64,
    pub s_max: usize,
    pub t_max: usize,
    /// `None` lets the certificate pick the burn-in.
    pub burn_in: Option<usize>,
    /// Coalescence cap.
    pub cap: usize,
    pub functional: Functional,
    pub moment: Option<MomentAssertion>,
    /// Largest lag `j` of the mean-gap table.
    pub horizon: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            seed: 1,
            n: 1000,
            replicates: 100,
            tol: crate::stationarity::DEFAULT_TOL,
            s_max: crate::stationarity::DEFAULT_S_MAX,
            t_max: crate::dependence::DEFAULT_T_MAX,
            burn_in: None,
            cap: crate::stationarity::DEFAULT_CAP,
            functional: Functional::identity(),
            moment: None,
            horizon: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub covariate: CovariateSpec,
    pub run: RunConfig,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate(&self.covariate)?;
        self.run.functional.validate()?;
        let r = &self.run;
        if !(r.tol > 0.0 && r.tol.is_finite()) {
            return Err(Error::config("run.tol", "tolerance must be positive"));
        }
        for (key, v) in [("run.n", r.n), ("run.replicates", r.replicates), ("run.s_max", r.s_max), ("run.cap", r.cap)] {
            if v == 0 {
                return Err(Error::config(key, "must be positive"));
            }
        }
        if let Some(m) = r.moment {
            if !(m.q_prime > 2.0 && m.q_prime.is_finite()) {
                return Err(Error::config("run.moment_q_prime", "need a finite q' > 2"));
            }
            if !(m.bound >= 0.0 && m.bound.is_finite()) {
                return Err(Error::config("run.moment_bound", "need a finite nonnegative bound"));
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = Document::parse(text)?;
        let mut cov_sec = doc.take_section("covariate")?;
        let covariate = parse_covariate(&mut cov_sec)?;
        cov_sec.finish()?;
        let mut model_sec = doc.take_section("model")?;
        let model = parse_model(&mut model_sec, covariate.dim)?;
        model_sec.finish()?;
        let run = match doc.sections.remove("run") {
            Some(mut s) => {
                let r = parse_run(&mut s)?;
                s.finish()?;
                r
            }
            None => RunConfig::default(),
        };
        doc.finish()?;
        let cfg = Self { model, covariate, run };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("config", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Canonical text form; [`ExperimentConfig::parse`] reads it back unchanged.
    pub fn serialize(&self) -> String {
        let mut out = String::from("[model]\n");
        write_model(&mut out, &self.model);
        out.push_str("\n[covariate]\n");
        write_covariate(&mut out, &self.covariate);
        out.push_str("\n[run]\n");
        write_run(&mut out, &self.run);
        out
    }
}

struct Entry {
    value: String,
    line: usize,
}

struct Section {
    name: String,
    entries: BTreeMap<String, Entry>,
}

impl Section {
    fn key(&self, k: &str) -> String {
        format!("{}.{}", self.name, k)
    }

    fn take(&mut self, k: &str) -> Option<(String, String)> {
        let key = self.key(k);
        self.entries.remove(k).map(|e| (e.value, key))
    }

    fn required(&mut self, k: &str) -> Result<(String, String)> {
        let key = self.key(k);
        self.take(k).ok_or_else(|| Error::config(key, "missing required key"))
    }

    fn f64_or(&mut self, k: &str, default: f64) -> Result<f64> {
        match self.take(k) {
            Some((v, key)) => parse_f64(&v, &key),
            None => Ok(default),
        }
    }

    fn f64(&mut self, k: &str) -> Result<f64> {
        let (v, key) = self.required(k)?;
        parse_f64(&v, &key)
    }

    fn usize(&mut self, k: &str) -> Result<usize> {
        let (v, key) = self.required(k)?;
        parse_usize(&v, &key)
    }

    fn usize_or(&mut self, k: &str, default: usize) -> Result<usize> {
        match self.take(k) {
            Some((v, key)) => parse_usize(&v, &key),
            None => Ok(default),
        }
    }

    fn vec(&mut self, k: &str) -> Result<Vec<f64>> {
        let (v, key) = self.required(k)?;
        parse_vec(&v, &key)
    }

    fn matrix(&mut self, k: &str) -> Result<Vec<Vec<f64>>> {
        let (v, key) = self.required(k)?;
        v.split(';').map(|row| parse_vec(row, &key)).collect()
    }

    fn law(&mut self, k: &str, default: Option<Law>) -> Result<Law> {
        match (self.take(k), default) {
            (Some((v, key)), _) => Law::parse(&v, &key),
            (None, Some(d)) => Ok(d),
            (None, None) => Err(Error::config(self.key(k), "missing required key")),
        }
    }

    fn coef(&mut self, k: &str) -> Result<CoefFn> {
        let (v, key) = self.required(k)?;
        parse_coef(&v, &key)
    }

    fn finish(self) -> Result<()> {
        match self.entries.into_iter().min_by_key(|(_, e)| e.line) {
            Some((k, e)) => Err(Error::config(
                format!("{}.{}", self.name, k),
                format!("unknown key (line {})", e.line),
            )),
            None => Ok(()),
        }
    }
}

struct Document {
    sections: BTreeMap<String, Section>,
}

impl Document {
    fn parse(text: &str) -> Result<Self> {
        let mut sections: BTreeMap<String, Section> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = match raw.find('#') {
                Some(j) => &raw[..j],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| Error::config("config", format!("line {line_no}: malformed section header")))?
                    .trim()
                    .to_string();
                if !matches!(name.as_str(), "model" | "covariate" | "run") {
                    return Err(Error::config(name, format!("unknown section (line {line_no})")));
                }
                if sections.contains_key(&name) {
                    return Err(Error::config(name, format!("section repeated (line {line_no})")));
                }
                sections.insert(name.clone(), Section { name: name.clone(), entries: BTreeMap::new() });
                current = Some(name);
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::config("config", format!("line {line_no}: expected `key = value`")))?;
            let k = k.trim().to_string();
            let Some(sec) = current.as_ref() else {
                return Err(Error::config(k, format!("key outside any section (line {line_no})")));
            };
            let s = sections.get_mut(sec).unwrap();
            if s.entries.contains_key(&k) {
                return Err(Error::config(format!("{sec}.{k}"), format!("key repeated (line {line_no})")));
            }
            s.entries.insert(k, Entry { value: v.trim().to_string(), line: line_no });
        }
        Ok(Self { sections })
    }

    fn take_section(&mut self, name: &str) -> Result<Section> {
        self.sections
            .remove(name)
            .ok_or_else(|| Error::config(name, "missing required section"))
    }

    fn finish(self) -> Result<()> {
        match self.sections.into_keys().next() {
            Some(k) => Err(Error::config(k, "unknown section")),
            None => Ok(()),
        }
    }
}

fn parse_f64(v: &str, key: &str) -> Result<f64> {
    v.trim()
        .parse::<f64>()
        .map_err(|_| Error::config(key, format!("expected a number, got `{}`", v.trim())))
}

fn parse_usize(v: &str, key: &str) -> Result<usize> {
    v.trim()
        .parse::<usize>()
        .map_err(|_| Error::config(key, format!("expected a non-negative integer, got `{}`", v.trim())))
}

fn parse_vec(v: &str, key: &str) -> Result<Vec<f64>> {
    if v.trim().is_empty() {
        return Err(Error::config(key, "empty list"));
    }
    v.split(',').map(|x| parse_f64(x, key)).collect()
}

fn parse_coef(v: &str, key: &str) -> Result<CoefFn> {
    let v = v.trim();
    let form = |name: &str| -> Option<&str> { v.strip_prefix(name)?.trim().strip_prefix('(')?.strip_suffix(')') };
    let body = |inner: &str| -> Result<(f64, Vec<f64>, f64, f64)> {
        let parts: Vec<&str> = inner.split(';').collect();
        if parts.len() != 3 {
            return Err(Error::config(key, "expected `(base; slopes; lo, hi)`"));
        }
        let range = parse_vec(parts[2], key)?;
        if range.len() != 2 {
            return Err(Error::config(key, "expected `lo, hi` after the second `;`"));
        }
        Ok((parse_f64(parts[0], key)?, parse_vec(parts[1], key)?, range[0], range[1]))
    };
    if let Some(inner) = form("affine") {
        let (base, slope, lo, hi) = body(inner)?;
        return Ok(CoefFn::Affine { base, slope, lo, hi });
    }
    if let Some(inner) = form("logistic") {
        let (base, slope, lo, hi) = body(inner)?;
        return Ok(CoefFn::Logistic { base, slope, lo, hi });
    }
    parse_f64(v, key).map(CoefFn::Const)
}

fn parse_functional(v: &str, key: &str) -> Result<FunctionalKind> {
    let v = v.trim();
    if v == "identity" {
        return Ok(FunctionalKind::Identity);
    }
    let args = |name: &str| -> Option<&str> { v.strip_prefix(name)?.trim().strip_prefix('(')?.strip_suffix(')') };
    if let Some(a) = args("clipped_power") {
        let xs = parse_vec(a, key)?;
        if xs.len() != 2 {
            return Err(Error::config(key, "clipped_power takes (ell, cap)"));
        }
        return Ok(FunctionalKind::ClippedPower { ell: xs[0], cap: xs[1] });
    }
    if let Some(a) = args("lag_product") {
        return Ok(FunctionalKind::LagProduct { lag: parse_usize(a, key)? });
    }
    Err(Error::config(key, format!("unknown functional `{v}`")))
}

fn parse_covariate(s: &mut Section) -> Result<CovariateSpec> {
    let (family_name, family_key) = s.required("family")?;
    let dim = s.usize_or("dim", 1)?;
    let eta_law = s.law("eta_law", Some(Law::standard_gaussian()))?;
    let link = match s.take("link") {
        None => Link::Independent,
        Some((v, key)) => match v.as_str() {
            "independent" => Link::Independent,
            "common_shock" => Link::CommonShock { weight: s.f64("shock_weight")? },
            other => return Err(Error::config(key, format!("unknown link `{other}`"))),
        },
    };
    let truncation = s.usize_or("truncation", DEFAULT_TRUNCATION)?;
    let offset = match s.take("offset") {
        Some((v, key)) => parse_vec(&v, &key)?,
        None => vec![0.0; dim],
    };
    let family = match family_name.as_str() {
        "iid" => CovariateFamily::Iid,
        "finite_moving_average" => CovariateFamily::MovingAverage { coefs: s.vec("coefs")? },
        "var1" => {
            let rows = s.matrix("phi")?;
            let key = s.key("phi");
            if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                return Err(Error::config(key, format!("phi must be {dim} × {dim}")));
            }
            let flat: Vec<f64> = rows.concat();
            CovariateFamily::Var1 { phi: DMatrix::from_row_slice(dim, dim, &flat) }
        }
        "bounded_transform" => CovariateFamily::BoundedTransform {
            coefs: s.vec("coefs")?,
            lo: s.vec("lo")?,
            hi: s.vec("hi")?,
        },
        "product_chain" => CovariateFamily::ProductChain { order: s.usize("order")? },
        other => return Err(Error::config(family_key, format!("unknown covariate family `{other}`"))),
    };
    let spec = CovariateSpec { family, dim, eta_law, link, truncation, offset };
    spec.validate()?;
    Ok(spec)
}

fn parse_model(s: &mut Section, dim: usize) -> Result<ModelSpec> {
    let (family, family_key) = s.required("family")?;
    let m = match family.as_str() {
        "charn" => {
            let q = s.usize("q")?;
            let theta = (0..=2 * q).map(|i| s.coef(&format!("theta_{i}"))).collect::<Result<_>>()?;
            let w = (0..=q).map(|i| s.coef(&format!("w_{i}"))).collect::<Result<_>>()?;
            ModelSpec::Charn(Charn {
                q,
                theta,
                w,
                delta: s.f64_or("delta", 1.0)?,
                noise: s.law("noise", Some(Law::standard_gaussian()))?,
                p: s.f64_or("p", 1.0)?,
            })
        }
        "apgarch_x" => ModelSpec::Apgarch(Apgarch {
            q: s.usize("q")?,
            delta: s.f64("delta")?,
            pi: s.vec("pi")?,
            beta: s.vec("beta")?,
            alpha_plus: s.vec("alpha_plus")?,
            alpha_minus: s.vec("alpha_minus")?,
            noise: s.law("noise", Some(Law::standard_gaussian()))?,
        }),
        "parx" => ModelSpec::Parx(Parx {
            q: s.usize("q")?,
            beta0: s.f64("beta0")?,
            beta: s.vec("beta")?,
            alpha: s.vec("alpha")?,
            pi: s.vec("pi")?,
        }),
        "binary_choice" => {
            let q = s.usize("q")?;
            let form = match s.take("form") {
                None => BinaryForm::Linear { a: s.vec("a")?, pi: s.vec("pi")? },
                Some((v, key)) => match v.as_str() {
                    "linear" => BinaryForm::Linear { a: s.vec("a")?, pi: s.vec("pi")? },
                    "interaction" => BinaryForm::Interaction { c: s.vec("c")?, a: s.matrix("a")?, b: s.matrix("b")? },
                    other => return Err(Error::config(key, format!("unknown binary form `{other}`"))),
                },
            };
            ModelSpec::Binary(Binary { q, form, noise: s.law("noise", Some(Law::Logistic { loc: 0.0, scale: 1.0 }))? })
        }
        "categorical" => {
            let n = s.usize("n")?;
            let q = s.usize("q")?;
            let c = match s.take("c") {
                Some((v, key)) => parse_vec(&v, &key)?,
                None => vec![0.0; n],
            };
            let a = s.matrix("a")?;
            let gamma = match s.take("gamma") {
                Some((v, key)) => v.split(';').map(|r| parse_vec(r, &key)).collect::<Result<_>>()?,
                None => vec![vec![0.0; dim]; n],
            };
            ModelSpec::Categorical(Categorical { n, q, c, a, gamma })
        }
        "ar_arch_benchmark" => ModelSpec::ArArch(ArArch {
            a0: s.coef("a0")?,
            a1: s.coef("a1")?,
            b0: s.coef("b0")?,
            b1: s.coef("b1")?,
            noise: s.law("noise", Some(Law::standard_gaussian()))?,
            p: s.f64_or("p", 2.0)?,
        }),
        "linear_random_coef" => ModelSpec::LinearRc(LinearRc {
            kappa: s.coef("kappa")?,
            noise: s.law("noise", Some(Law::standard_gaussian()))?,
            p: s.f64_or("p", 1.0)?,
        }),
        other => return Err(Error::config(family_key, format!("unknown model family `{other}`"))),
    };
    Ok(m)
}

fn parse_run(s: &mut Section) -> Result<RunConfig> {
    let d = RunConfig::default();
    let command = match s.take("command") {
        Some((v, _)) => Some(v.parse()?),
        None => None,
    };
    let seed = match s.take("seed") {
        Some((v, key)) => v
            .parse::<u64>()
            .map_err(|_| Error::config(key, format!("expected a 64-bit unsigned seed, got `{v}`")))?,
        None => d.seed,
    };
    let burn_in = match s.take("burn_in") {
        None => None,
        Some((v, _)) if v == "auto" => None,
        Some((v, key)) => Some(parse_usize(&v, &key)?),
    };
    let kind = match s.take("functional") {
        Some((v, key)) => parse_functional(&v, &key)?,
        None => FunctionalKind::Identity,
    };
    let scale = s.f64_or("functional_scale", 1.0)?;
    let moment = match (s.take("moment_q_prime"), s.take("moment_bound")) {
        (None, None) => None,
        (Some((q, qk)), Some((m, mk))) => Some(MomentAssertion { q_prime: parse_f64(&q, &qk)?, bound: parse_f64(&m, &mk)? }),
        (Some(_), None) => return Err(Error::config("run.moment_bound", "required with run.moment_q_prime")),
        (None, Some(_)) => return Err(Error::config("run.moment_q_prime", "required with run.moment_bound")),
    };
    Ok(RunConfig {
        command,
        seed,
        n: s.usize_or("n", d.n)?,
        replicates: s.usize_or("replicates", d.replicates)?,
        tol: s.f64_or("tol", d.tol)?,
        s_max: s.usize_or("s_max", d.s_max)?,
        t_max: s.usize_or("t_max", d.t_max)?,
        burn_in,
        cap: s.usize_or("cap", d.cap)?,
        functional: Functional { kind, scale },
        moment,
        horizon: s.usize_or("horizon", d.horizon)?,
    })
}

fn list(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn matrix(rows: &[Vec<f64>]) -> String {
    rows.iter().map(|r| list(r)).collect::<Vec<_>>().join("; ")
}

fn coef(c: &CoefFn) -> String {
    match c {
        CoefFn::Const(v) => v.to_string(),
        CoefFn::Affine { base, slope, lo, hi } => format!("affine({base}; {}; {lo}, {hi})", list(slope)),
        CoefFn::Logistic { base, slope, lo, hi } => format!("logistic({base}; {}; {lo}, {hi})", list(slope)),
    }
}

fn write_model(out: &mut String, m: &ModelSpec) {
    let _ = writeln!(out, "family = {}", m.family());
    match m {
        ModelSpec::Charn(c) => {
            let _ = writeln!(out, "q = {}", c.q);
            for (i, t) in c.theta.iter().enumerate() {
                let _ = writeln!(out, "theta_{i} = {}", coef(t));
            }
            for (i, w) in c.w.iter().enumerate() {
                let _ = writeln!(out, "w_{i} = {}", coef(w));
            }
            let _ = writeln!(out, "delta = {}\nnoise = {}\np = {}", c.delta, c.noise, c.p);
        }
        ModelSpec::Apgarch(g) => {
            let _ = writeln!(
                out,
                "q = {}\ndelta = {}\npi = {}\nbeta = {}\nalpha_plus = {}\nalpha_minus = {}\nnoise = {}",
                g.q,
                g.delta,
                list(&g.pi),
                list(&g.beta),
                list(&g.alpha_plus),
                list(&g.alpha_minus),
                g.noise
            );
        }
        ModelSpec::Parx(p) => {
            let _ = writeln!(
                out,
                "q = {}\nbeta0 = {}\nbeta = {}\nalpha = {}\npi = {}",
                p.q,
                p.beta0,
                list(&p.beta),
                list(&p.alpha),
                list(&p.pi)
            );
        }
        ModelSpec::Binary(b) => {
            let _ = writeln!(out, "q = {}", b.q);
            match &b.form {
                BinaryForm::Linear { a, pi } => {
                    let _ = writeln!(out, "form = linear\na = {}\npi = {}", list(a), list(pi));
                }
                BinaryForm::Interaction { c, a, b } => {
                    let _ = writeln!(out, "form = interaction\nc = {}\na = {}\nb = {}", list(c), matrix(a), matrix(b));
                }
            }
            let _ = writeln!(out, "noise = {}", b.noise);
        }
        ModelSpec::Categorical(c) => {
            let _ = writeln!(
                out,
                "n = {}\nq = {}\nc = {}\na = {}\ngamma = {}",
                c.n,
                c.q,
                list(&c.c),
                matrix(&c.a),
                matrix(&c.gamma)
            );
        }
        ModelSpec::ArArch(a) => {
            let _ = writeln!(
                out,
                "a0 = {}\na1 = {}\nb0 = {}\nb1 = {}\nnoise = {}\np = {}",
                coef(&a.a0),
                coef(&a.a1),
                coef(&a.b0),
                coef(&a.b1),
                a.noise,
                a.p
            );
        }
        ModelSpec::LinearRc(l) => {
            let _ = writeln!(out, "kappa = {}\nnoise = {}\np = {}", coef(&l.kappa), l.noise, l.p);
        }
    }
}

fn write_covariate(out: &mut String, c: &CovariateSpec) {
    let _ = writeln!(out, "family = {}\ndim = {}\neta_law = {}", c.family.name(), c.dim, c.eta_law);
    match c.link {
        Link::Independent => {
            let _ = writeln!(out, "link = independent");
        }
        Link::CommonShock { weight } => {
            let _ = writeln!(out, "link = common_shock\nshock_weight = {weight}");
        }
    }
    let _ = writeln!(out, "truncation = {}\noffset = {}", c.truncation, list(&c.offset));
    match &c.family {
        CovariateFamily::Iid => {}
        CovariateFamily::MovingAverage { coefs } => {
            let _ = writeln!(out, "coefs = {}", list(coefs));
        }
        CovariateFamily::Var1 { phi } => {
            let rows: Vec<Vec<f64>> = (0..phi.nrows()).map(|r| phi.row(r).iter().copied().collect()).collect();
            let _ = writeln!(out, "phi = {}", matrix(&rows));
        }
        CovariateFamily::BoundedTransform { coefs, lo, hi } => {
            let _ = writeln!(out, "coefs = {}\nlo = {}\nhi = {}", list(coefs), list(lo), list(hi));
        }
        CovariateFamily::ProductChain { order } => {
            let _ = writeln!(out, "order = {order}");
        }
    }
}

fn write_run(out: &mut String, r: &RunConfig) {
    if let Some(c) = r.command {
        let _ = writeln!(out, "command = {c}");
    }
    let _ = writeln!(
        out,
        "seed = {}\nn = {}\nreplicates = {}\ntol = {}\ns_max = {}\nt_max = {}",
        r.seed, r.n, r.replicates, r.tol, r.s_max, r.t_max
    );
    match r.burn_in {
        Some(b) => {
            let _ = writeln!(out, "burn_in = {b}");
        }
        None => {
            let _ = writeln!(out, "burn_in = auto");
        }
    }
    let f = match r.functional.kind {
        FunctionalKind::Identity => "identity".to_string(),
        FunctionalKind::ClippedPower { ell, cap } => format!("clipped_power({ell}, {cap})"),
        FunctionalKind::LagProduct { lag } => format!("lag_product({lag})"),
    };
    let _ = writeln!(out, "cap = {}\nfunctional = {f}\nfunctional_scale = {}", r.cap, r.functional.scale);
    if let Some(m) = r.moment {
        let _ = writeln!(out, "moment_q_prime = {}\nmoment_bound = {}", m.q_prime, m.bound);
    }
    let _ = writeln!(out, "horizon = {}", r.horizon);
}

#[cfg(test)]
mod tests {
    use super::*;

    const PARX: &str = "
        [model]
        family = parx   # counts
        q = 1
        beta0 = 1
        beta = 0.5
        alpha = 0.6
        pi = 0

        [covariate]
        family = iid
        eta_law = uniform(0, 1)
    ";

    #[test]
    fn parses_minimal_config() {
        let c = ExperimentConfig::parse(PARX).unwrap();
        let ModelSpec::Parx(p) = &c.model else { panic!() };
        assert_eq!(p.alpha, vec![0.6]);
        assert_eq!(c.run, RunConfig::default());
    }

    #[test]
    fn unknown_key_names_itself() {
        let text = PARX.replace("alpha = 0.6", "alpha = 0.6\n alpha_1 = 0.2");
        match ExperimentConfig::parse(&text) {
            Err(Error::Config { key, .. }) => assert_eq!(key, "model.alpha_1"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_values_name_their_key() {
        let text = PARX.replace("beta0 = 1", "beta0 = one");
        assert!(matches!(ExperimentConfig::parse(&text), Err(Error::Config { key, .. }) if key == "model.beta0"));
        let text = PARX.replace("alpha = 0.6", "alpha = -0.6");
        assert!(matches!(ExperimentConfig::parse(&text), Err(Error::Config { key, .. }) if key.starts_with("model.alpha")));
        let text = PARX.replace("q = 1", "");
        assert!(matches!(ExperimentConfig::parse(&text), Err(Error::Config { key, .. }) if key == "model.q"));
    }

    #[test]
    fn coefficient_forms_round_trip() {
        for c in [
            CoefFn::Const(-0.25),
            CoefFn::Affine { base: 0.0, slope: vec![1.0, -2.5], lo: f64::NEG_INFINITY, hi: 0.9 },
            CoefFn::Logistic { base: 0.1, slope: vec![3.0], lo: 0.2, hi: 0.4 },
        ] {
            assert_eq!(parse_coef(&coef(&c), "k").unwrap(), c);
        }
    }

    #[test]
    fn serialized_config_parses_back() {
        let mut c = ExperimentConfig::parse(PARX).unwrap();
        c.run.burn_in = Some(40);
        c.run.command = Some(Command::Check);
        c.run.functional = Functional { kind: FunctionalKind::ClippedPower { ell: 2.0, cap: 9.5 }, scale: 0.1 };
        c.run.moment = Some(MomentAssertion { q_prime: 4.0, bound: 3.0 });
        assert_eq!(ExperimentConfig::parse(&c.serialize()).unwrap(), c);
    }
}
