//! Ready-made experiment configurations.

use nalgebra::DMatrix;

use crate::config::{Command, ExperimentConfig, RunConfig};
use crate::error::{Error, Result};
use crate::models::{
    Apgarch, ArArch, Binary, BinaryForm, Categorical, Charn, CoefFn, LinearRc, ModelSpec, Parx,
};
use crate::noise::{CovariateFamily, CovariateSpec, Law};

pub const PRESETS: &[&str] = &[
    "garch_iid",
    "apgarch_leverage",
    "parx_var1",
    "charn_threshold",
    "ar_arch",
    "ar_arch_clt",
    "linear_ar",
    "lyapunov_lognormal",
    "counterexample_l1",
    "counterexample_linf",
    "binary_logit",
    "binary_frozen",
    "categorical_eta02",
    "coalescence_n3",
    "coalescence_uniform",
];

fn run(command: Command) -> RunConfig {
    RunConfig { command: Some(command), ..RunConfig::default() }
}

fn product_chain(order: usize, hi: f64) -> CovariateSpec {
    let mut c = CovariateSpec::iid(1, Law::Uniform { lo: 0.0, hi });
    c.family = CovariateFamily::ProductChain { order };
    c
}

fn identity_kappa() -> CoefFn {
    CoefFn::Affine { base: 0.0, slope: vec![1.0], lo: f64::NEG_INFINITY, hi: f64::INFINITY }
}

fn counterexample(hi: f64) -> ExperimentConfig {
    ExperimentConfig {
        model: ModelSpec::LinearRc(LinearRc { kappa: identity_kappa(), noise: Law::standard_gaussian(), p: 1.0 }),
        covariate: product_chain(2, hi),
        run: RunConfig { replicates: 20_000, horizon: 30, s_max: 4096, ..run(Command::Counterexample) },
    }
}

fn coalescence(c: Vec<f64>, a: Vec<Vec<f64>>, gamma: Vec<Vec<f64>>, cov: CovariateSpec) -> ExperimentConfig {
    ExperimentConfig {
        model: ModelSpec::Categorical(Categorical { n: c.len(), q: 1, c, a, gamma }),
        covariate: cov,
        run: RunConfig { replicates: 2000, ..run(Command::Coalescence) },
    }
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let cfg = match name {
        "garch_iid" => ExperimentConfig {
            model: ModelSpec::Apgarch(Apgarch {
                q: 1,
                delta: 2.0,
                pi: vec![0.1],
                beta: vec![0.6],
                alpha_plus: vec![0.2],
                alpha_minus: vec![0.2],
                noise: Law::standard_gaussian(),
            }),
            covariate: CovariateSpec::iid(1, Law::Uniform { lo: 0.0, hi: 1.0 }),
            run: run(Command::Check),
        },
        "apgarch_leverage" => ExperimentConfig {
            model: ModelSpec::Apgarch(Apgarch {
                q: 2,
                delta: 1.0,
                pi: vec![0.2],
                beta: vec![0.5, 0.1],
                alpha_plus: vec![0.05, 0.02],
                alpha_minus: vec![0.2, 0.05],
                noise: Law::standard_gaussian(),
            }),
            covariate: CovariateSpec::iid(1, Law::LogNormal { mu: 0.0, sigma: 0.5 }),
            run: run(Command::Check),
        },
        "parx_var1" => {
            let mut cov = CovariateSpec::iid(1, Law::Uniform { lo: 0.0, hi: 1.0 });
            cov.family = CovariateFamily::Var1 { phi: DMatrix::from_element(1, 1, 0.8) };
            cov.truncation = 128;
            ExperimentConfig {
                model: ModelSpec::Parx(Parx { q: 1, beta0: 1.0, beta: vec![0.2], alpha: vec![0.2], pi: vec![1.0] }),
                covariate: cov,
                run: RunConfig { replicates: 20_000, t_max: 40, ..run(Command::Dependence) },
            }
        }
        "charn_threshold" => ExperimentConfig {
            model: ModelSpec::Charn(Charn {
                q: 2,
                theta: vec![
                    CoefFn::Const(0.0),
                    CoefFn::Logistic { base: 0.0, slope: vec![1.0], lo: 0.1, hi: 0.3 },
                    CoefFn::Const(0.1),
                    CoefFn::Const(-0.2),
                    CoefFn::Const(0.1),
                ],
                w: vec![CoefFn::Const(1.0), CoefFn::Const(0.05), CoefFn::Const(0.02)],
                delta: 2.0,
                noise: Law::standard_gaussian(),
                p: 1.0,
            }),
            covariate: CovariateSpec::iid(1, Law::standard_gaussian()),
            run: run(Command::Simulate),
        },
        "ar_arch" => ExperimentConfig {
            model: ModelSpec::ArArch(ArArch {
                a0: CoefFn::Const(0.0),
                a1: CoefFn::Logistic { base: 0.0, slope: vec![2.0], lo: -0.4, hi: 0.4 },
                b0: CoefFn::Const(1.0),
                b1: CoefFn::Affine { base: 0.2, slope: vec![0.1], lo: 0.05, hi: 0.3 },
                noise: Law::standard_gaussian(),
                p: 2.0,
            }),
            covariate: CovariateSpec::iid(1, Law::standard_gaussian()),
            run: run(Command::Check),
        },
        "ar_arch_clt" => ExperimentConfig {
            model: ModelSpec::ArArch(ArArch {
                a0: CoefFn::Const(0.0),
                a1: CoefFn::Const(0.3),
                b0: CoefFn::Const(1.0),
                b1: CoefFn::Const(0.2),
                noise: Law::standard_gaussian(),
                p: 4.0,
            }),
            covariate: CovariateSpec::iid(1, Law::standard_gaussian()),
            run: RunConfig { n: 10_000, replicates: 500, ..run(Command::Clt) },
        },
        "linear_ar" => ExperimentConfig {
            model: ModelSpec::LinearRc(LinearRc { kappa: CoefFn::Const(0.5), noise: Law::standard_gaussian(), p: 4.0 }),
            covariate: CovariateSpec::iid(1, Law::standard_gaussian()),
            run: RunConfig { n: 100_000, replicates: 20, ..run(Command::Clt) },
        },
        "lyapunov_lognormal" => ExperimentConfig {
            model: ModelSpec::LinearRc(LinearRc { kappa: identity_kappa(), noise: Law::standard_gaussian(), p: 1.0 }),
            covariate: CovariateSpec::iid(1, Law::LogNormal { mu: -0.3, sigma: 0.2 }),
            run: RunConfig { n: 10_000, replicates: 100, ..run(Command::Lyapunov) },
        },
        "counterexample_l1" => counterexample(1.9),
        "counterexample_linf" => counterexample(0.9),
        "binary_logit" => ExperimentConfig {
            model: ModelSpec::Binary(Binary {
                q: 2,
                form: BinaryForm::Linear { a: vec![0.8, -0.5], pi: vec![0.5] },
                noise: Law::Logistic { loc: 0.0, scale: 1.0 },
            }),
            covariate: CovariateSpec::iid(1, Law::standard_gaussian()),
            run: run(Command::Simulate),
        },
        "binary_frozen" => ExperimentConfig {
            model: ModelSpec::Binary(Binary {
                q: 1,
                form: BinaryForm::Linear { a: vec![1.0], pi: vec![0.0] },
                noise: Law::Uniform { lo: -0.9, hi: -0.1 },
            }),
            covariate: CovariateSpec::iid(1, Law::standard_gaussian()),
            run: run(Command::Check),
        },
        "categorical_eta02" => {
            let l4 = 4f64.ln();
            let mut cfg = coalescence(
                vec![3.0 * l4, 0.0],
                vec![vec![-2.0 * l4], vec![0.0]],
                vec![vec![0.0], vec![0.0]],
                CovariateSpec::iid(1, Law::standard_gaussian()),
            );
            cfg.run.replicates = 20_000;
            cfg
        }
        "coalescence_n3" => coalescence(
            vec![0.2, 0.0, -0.2],
            vec![vec![0.1], vec![0.0], vec![-0.1]],
            vec![vec![0.2], vec![0.0], vec![-0.2]],
            CovariateSpec::iid(1, Law::Uniform { lo: -1.0, hi: 1.0 }),
        ),
        "coalescence_uniform" => {
            let mut cfg = coalescence(
                vec![0.0; 3],
                vec![vec![0.0]; 3],
                vec![vec![0.0]; 3],
                CovariateSpec::iid(1, Law::standard_gaussian()),
            );
            cfg.run.replicates = 1000;
            cfg
        }
        other => {
            return Err(Error::config(
                "preset",
                format!("unknown preset `{other}`; available: {}", PRESETS.join(", ")),
            ))
        }
    };
    Ok(cfg)
}
