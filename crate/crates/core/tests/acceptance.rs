//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
//! if any criterion fails.

use std::path::Path;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use ergodyn::config::{Command, ExperimentConfig};
use ergodyn::dependence::{estimate_theta, log_linear_rate};
use ergodyn::limits::{partial_sum_stats, Functional};
use ergodyn::linalg::{companion, spectral_radius_eigen, spectral_radius_power, sum_blocks};
use ergodyn::models::{Apgarch, CoefFn, LinearRc, ModelSpec, PoissonArrivalView};
use ergodyn::noise::{CovariateSpec, Law, SeedStream};
use ergodyn::presets::preset;
use ergodyn::runner;
use ergodyn::stationarity::{
    backward_sample, check_conditions, coalescence_times, forward_sample, gap_profile, initialization_gap,
    lyapunov_estimate,
};
use ergodyn::stats;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn linear(kappa: f64, p: f64) -> ModelSpec {
    ModelSpec::LinearRc(LinearRc { kappa: CoefFn::Const(kappa), noise: Law::standard_gaussian(), p })
}

fn gaussian_iid() -> CovariateSpec {
    CovariateSpec::iid(1, Law::standard_gaussian())
}

fn companion_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut sign_mismatch, mut worst) = (0, 0.0f64);
    for _ in 0..200 {
        let q = rng.gen_range(1..=4);
        let k = rng.gen_range(1..=3);
        // scale so that the radius of ΣA lands on both sides of one
        let scale = rng.gen_range(0.2..2.0) / (q * k) as f64;
        let blocks: Vec<DMatrix<f64>> =
            (0..q).map(|_| DMatrix::from_fn(k, k, |_, _| scale * rng.gen::<f64>())).collect();
        let rs = spectral_radius_eigen(&sum_blocks(&blocks));
        let b = companion(&blocks);
        let rb = spectral_radius_eigen(&b);
        if (rs < 1.0) != (rb < 1.0) || (rs > 1.0) != (rb > 1.0) {
            sign_mismatch += 1;
        }
        worst = worst.max((spectral_radius_power(&b).rho - rb).abs());
    }
    check(
        sign_mismatch == 0 && worst <= 1e-10,
        format!("sign mismatches {sign_mismatch}/200, max |rho_eigen - rho_power| = {worst:.2e}"),
    )
}

fn garch_parx_certificates() -> Outcome {
    let parx = preset("parx_var1").unwrap();
    let mut parx_model = parx.model.clone();
    if let ModelSpec::Parx(p) = &mut parx_model {
        p.alpha = vec![0.3];
        p.beta = vec![0.5];
    }
    let cert = check_conditions(&parx_model, &parx.covariate).certificate;
    let mut ev: Vec<f64> = cert.sum_eigenvalues.iter().map(|(re, _)| *re).collect();
    ev.sort_by(f64::total_cmp);
    let parx_err = (ev[0] - 0.0).abs().max((ev[1] - 0.8).abs());

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let q = rng.gen_range(2..=3);
        let mut v = || (0..q).map(|_| rng.gen_range(0.0..0.3)).collect::<Vec<f64>>();
        let (beta, alpha_plus, alpha_minus) = (v(), v(), v());
        let m = Apgarch {
            q,
            delta: rng.gen_range(0.5..3.0),
            pi: vec![0.1],
            beta,
            alpha_plus,
            alpha_minus,
            noise: Law::standard_gaussian(),
        };
        let (sp, sm) = m.half_moments();
        let (e1, e2) = m.eigen_formula(sp, sm);
        let c = m.metadata();
        for e in [e1, e2] {
            let d = c
                .sum_eigenvalues
                .iter()
                .map(|(re, im)| ((re - e).powi(2) + im * im).sqrt())
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(d);
        }
    }
    check(
        parx_err <= 1e-12 && worst <= 1e-10,
        format!("PARX eigenvalues {ev:?} (err {parx_err:.1e}); APGARCH formula max err {worst:.2e} over 50 sets"),
    )
}

fn poisson_coupling() -> Outcome {
    let n = 100_000u64;
    let mut parts = Vec::new();
    let mut ok = true;
    for (h, g) in [(2.0, 1.0), (5.0, 0.5), (0.3, 0.3)] {
        let d: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let s = SeedStream::new(3, i);
                let u = s.slot(0, ergodyn::noise::Channel::Innovation, false).uniform();
                let mut v = PoissonArrivalView::new(s, 0, false, u);
                (v.count(h).unwrap() as f64 - v.count(g).unwrap() as f64).abs()
            })
            .collect();
        let (m, se) = (stats::mean(&d), stats::std_error(&d));
        let want = (h - g).abs();
        let pass = if want == 0.0 { m == 0.0 } else { (m - want).abs() <= 4.0 * se };
        ok &= pass;
        parts.push(format!("({h},{g}): {m:.4} vs {want} (se {se:.4})"));
    }
    check(ok, parts.join("; "))
}

fn backward_rate() -> Outcome {
    let m = linear(0.5, 4.0);
    let cov = gaussian_iid();
    let mut worst = 0.0f64;
    for s in 1..=40 {
        let g = initialization_gap(&m, &cov, SeedStream::new(4, s as u64), 0, s).unwrap();
        let want = 10.0 * 0.5f64.powi(s as i32);
        worst = worst.max((g - want).abs() / want);
    }
    let cfg = preset("charn_threshold").unwrap();
    let cert = check_conditions(&cfg.model, &cfg.covariate).certificate;
    let (mm, kappa) = (cert.m.unwrap(), cert.kappa.unwrap());
    let horizon = 20 * mm;
    let profiles: Vec<Vec<f64>> = (0..500u64)
        .into_par_iter()
        .map(|i| gap_profile(&cfg.model, &cfg.covariate, SeedStream::new(5, i), horizon).unwrap())
        .collect();
    let mean: Vec<f64> = (0..=horizon)
        .map(|s| if s == 0 { f64::NAN } else { stats::mean(&profiles.iter().map(|p| p[s - 1]).collect::<Vec<_>>()) })
        .collect();
    let slope = log_linear_rate(&mean, (mm, horizon)).unwrap().ln();
    let bound = kappa.ln() / mm as f64;
    check(
        worst <= 1e-12 && slope <= bound + 0.1 * bound.abs(),
        format!(
            "linear gap max rel err {worst:.1e}; CHARN slope {slope:.4} vs (log kappa)/m = {bound:.4} (m={mm}, kappa={kappa:.4})"
        ),
    )
}

fn backward_forward_agreement() -> Outcome {
    let r = 2000u64;
    let mut parts = Vec::new();
    let mut ok = true;
    for name in ["parx_var1", "categorical_eta02"] {
        let cfg = preset(name).unwrap();
        let (m, cov) = (&cfg.model, &cfg.covariate);
        let back: Vec<f64> = (0..r)
            .into_par_iter()
            .map(|i| m.observation(backward_sample(m, cov, SeedStream::new(6, i), 0, 1e-10, 1 << 14).unwrap().0.head()))
            .collect();
        let fwd: Vec<f64> = (0..r)
            .into_par_iter()
            .map(|i| m.observation(forward_sample(m, cov, SeedStream::new(7, i), 500).unwrap().head()))
            .collect();
        let dm = (stats::mean(&back) - stats::mean(&fwd)).abs();
        let sm = stats::std_error(&back).hypot(stats::std_error(&fwd));
        let dv = (stats::variance(&back) - stats::variance(&fwd)).abs();
        let sv = stats::variance_std_error(&back).hypot(stats::variance_std_error(&fwd));
        ok &= dm <= 3.0 * sm && dv <= 3.0 * sv;
        parts.push(format!("{name}: mean diff {:.2} se, var diff {:.2} se", dm / sm, dv / sv));
    }
    check(ok, parts.join("; "))
}

fn coalescence() -> Outcome {
    let u = preset("coalescence_uniform").unwrap();
    let rep = coalescence_times(&u.model, &u.covariate, 8, 1000, 100).unwrap();
    let all_one = rep.times.iter().all(|t| *t == Some(1));
    let e = preset("categorical_eta02").unwrap();
    let rep = coalescence_times(&e.model, &e.covariate, 9, 20_000, 10_000).unwrap();
    let d = rep.refresh_probability.unwrap();
    let mut worst = f64::NEG_INFINITY;
    for k in 0..=20 {
        let (p, se) = rep.survival(k);
        worst = worst.max(p - ((1.0 - d).powi(k as i32) + 3.0 * se));
    }
    check(
        all_one && (d - 0.2).abs() < 1e-12 && worst <= 0.0,
        format!(
            "uniform kernel T=1 on all 1000 runs: {all_one}; eta=0.2 survival max excess over bound+3se {worst:.4}"
        ),
    )
}

fn lyapunov() -> Outcome {
    let c = lyapunov_estimate(&linear(0.5, 4.0), &gaussian_iid(), 10, 1000, 4).unwrap();
    let err = (c.chi - 0.5f64.ln()).abs();
    let cfg = preset("lyapunov_lognormal").unwrap();
    let e = lyapunov_estimate(&cfg.model, &cfg.covariate, 11, 10_000, 100).unwrap();
    let z = (e.chi + 0.3).abs() / e.stderr;
    check(
        err <= 1e-12 && z <= 3.0,
        format!("constant factor err {err:.1e}; lognormal chi {:.5} (stderr {:.5}, {z:.2} se from -0.3)", e.chi, e.stderr),
    )
}

fn dependence_decay() -> Outcome {
    let m = linear(0.5, 1.0);
    let cov = gaussian_iid();
    let p = estimate_theta(&m, &cov, 12, 20, Some(64), 20_000).unwrap();
    let e_abs_diff = 2.0 / std::f64::consts::PI.sqrt();
    let mut worst = 0.0f64;
    for t in 0..=20 {
        let want = 0.5f64.powi(t as i32) * e_abs_diff;
        worst = worst.max((p.theta_hat[t] - want).abs() / p.stderr[t]);
    }
    let cfg = preset("parx_var1").unwrap();
    let d = estimate_theta(&cfg.model, &cfg.covariate, cfg.run.seed, cfg.run.t_max, cfg.run.burn_in, cfg.run.replicates)
        .unwrap();
    let (fit, env) = (d.rho_fit.unwrap().ln(), d.bound_rate.unwrap().ln());
    let rel = (fit - env).abs() / env.abs();
    check(
        worst <= 3.0 && rel <= 0.1,
        format!("linear max |theta - 0.5^t E|e-e'|| = {worst:.2} se; PARX-var1 log-slope {fit:.4} vs envelope {env:.4} ({:.1}%)", 100.0 * rel),
    )
}

fn counterexample() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for name in ["counterexample_l1", "counterexample_linf"] {
        let cfg = preset(name).unwrap();
        let out = dir.path().join(name);
        let o = runner::run(&cfg, Command::Counterexample, &out).unwrap();
        reports.push((o.exit_code, o.report));
    }
    let l1 = reports[0].1.contains("verdict: non-convergence") && reports[0].1.contains("mean gap: grows");
    let linf = reports[1].1.contains("verdict: convergence") && reports[1].1.contains("mean gap: decays");
    check(
        l1 && linf && reports[0].0 == 2 && reports[1].0 == 0,
        format!("L1-only spec flags non-convergence: {l1}; sup-norm spec converges: {linf}"),
    )
}

fn clt() -> Outcome {
    let cfg = preset("linear_ar").unwrap();
    let r = partial_sum_stats(&cfg.model, &cfg.covariate, 13, &Functional::identity(), 100_000, cfg.run.replicates, None)
        .unwrap();
    let rel = (r.sigma2_hat - 4.0).abs() / 4.0;
    let cfg = preset("ar_arch_clt").unwrap();
    let a = partial_sum_stats(&cfg.model, &cfg.covariate, 14, &Functional::identity(), 10_000, 500, None).unwrap();
    check(
        rel <= 0.05 && a.ks < 0.0608,
        format!(
            "linear sigma2 {:.4} ({:.1}% from 4); AR-ARCH KS {:.4} < 0.0608 (skew {:.3}, ex.kurt {:.3})",
            r.sigma2_hat,
            100.0 * rel,
            a.ks,
            a.skewness,
            a.excess_kurtosis
        ),
    )
}

fn run_all_commands(dir: &Path, threads: usize) -> Vec<(String, Vec<u8>)> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    let mut jobs: Vec<(Command, ExperimentConfig)> = Vec::new();
    let mut add = |name: &str, cmd: Command, tweak: &dyn Fn(&mut ExperimentConfig)| {
        let mut c = preset(name).unwrap();
        tweak(&mut c);
        jobs.push((cmd, c));
    };
    add("charn_threshold", Command::Simulate, &|_| {});
    add("garch_iid", Command::Check, &|_| {});
    add("lyapunov_lognormal", Command::Lyapunov, &|c| c.run.n = 500);
    add("parx_var1", Command::Dependence, &|c| c.run.replicates = 500);
    add("ar_arch_clt", Command::Clt, &|c| {
        c.run.n = 2000;
        c.run.replicates = 50;
    });
    add("coalescence_n3", Command::Coalescence, &|_| {});
    add("counterexample_l1", Command::Counterexample, &|c| c.run.replicates = 500);
    let mut files = Vec::new();
    for (i, (cmd, cfg)) in jobs.iter().enumerate() {
        let out = dir.join(format!("{i}-{cmd}"));
        let o = pool.install(|| runner::run(cfg, *cmd, &out)).unwrap();
        for f in o.files {
            files.push((f.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&f).unwrap()));
        }
    }
    files
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let a = run_all_commands(&dir.path().join("a"), 1);
    let b = run_all_commands(&dir.path().join("b"), 4);
    let c = run_all_commands(&dir.path().join("c"), 4);
    let differing: Vec<&str> =
        a.iter().zip(&b).zip(&c).filter(|((x, y), z)| x != y || x != z).map(|((x, _), _)| x.0.as_str()).collect();
    let csvs = a.iter().filter(|f| f.0.ends_with(".csv")).count();
    check(
        differing.is_empty() && a.len() == b.len(),
        format!("{} files ({csvs} CSV) over 7 commands, 1 vs 4 threads; differing: {differing:?}", a.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("companion-matrix equivalence", companion_equivalence),
        ("PARX and APGARCH certificates", garch_parx_certificates),
        ("Poisson coupling identity", poisson_coupling),
        ("backward-iteration rate", backward_rate),
        ("backward/forward law agreement", backward_forward_agreement),
        ("coalescence", coalescence),
        ("Lyapunov estimator", lyapunov),
        ("dependence decay", dependence_decay),
        ("counterexample regression", counterexample),
        ("CLT harness", clt),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("acceptance {:>2} PASS {name} [{secs:.1}s]: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("acceptance {:>2} FAIL {name} [{secs:.1}s]: {d}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
