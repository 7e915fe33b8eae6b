use nalgebra::DMatrix;
use proptest::prelude::*;

use ergodyn::config::ExperimentConfig;
use ergodyn::dependence::tail_sums;
use ergodyn::limits::plugin_variance;
use ergodyn::linalg::{companion, spectral_radius_eigen, spectral_radius_power, sum_blocks};
use ergodyn::models::{Apgarch, Categorical, Charn, CoefFn, ModelSpec, Parx, PoissonArrivalView, Shock};
use ergodyn::noise::{CovariateFamily, CovariateSpec, Law, SeedStream, Tape};
use ergodyn::stationarity::stationary_path;

fn blocks() -> impl Strategy<Value = Vec<DMatrix<f64>>> {
    (1usize..=4, 1usize..=3).prop_flat_map(|(q, k)| {
        prop::collection::vec(prop::collection::vec(0.0..0.7f64, k * k), q)
            .prop_map(move |v| v.into_iter().map(|d| DMatrix::from_vec(k, k, d)).collect())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn companion_and_sum_agree_on_stability(a in blocks()) {
        let rs = spectral_radius_eigen(&sum_blocks(&a));
        let rb = spectral_radius_eigen(&companion(&a));
        prop_assume!((rs - 1.0).abs() > 1e-9);
        prop_assert_eq!(rs < 1.0, rb < 1.0, "rho_sum={} rho_B={}", rs, rb);
    }

    #[test]
    fn power_bounds_bracket_the_eigen_radius(a in blocks()) {
        let b = companion(&a);
        let r = spectral_radius_eigen(&b);
        let p = spectral_radius_power(&b);
        prop_assert!(p.lower <= r + 1e-9 && r <= p.upper + 1e-9, "{:?} vs {}", p, r);
    }

    #[test]
    fn poisson_counts_are_coupled(seed in any::<u64>(), t in -50i64..50, u in 0.001..0.999f64, g in 0.0..20.0f64, d in 0.0..20.0f64) {
        let h = g + d;
        let mut v = PoissonArrivalView::new(SeedStream::new(seed, 0), t, false, u);
        let nh = v.count(h).unwrap();
        let ng = v.count(g).unwrap();
        prop_assert!(nh >= ng);
        let between = v.times().iter().filter(|a| **a > g && **a <= h).count() as u64;
        prop_assert_eq!(nh - ng, between);
    }

    #[test]
    fn charn_step_obeys_its_lipschitz_bound(
        x in prop::collection::vec(-5.0..5.0f64, 2),
        y in prop::collection::vec(-5.0..5.0f64, 2),
        z in -3.0..3.0f64,
        eps in -4.0..4.0f64,
    ) {
        let m = Charn {
            q: 2,
            theta: vec![
                CoefFn::Const(0.1),
                CoefFn::Logistic { base: 0.0, slope: vec![1.0], lo: -0.5, hi: 0.5 },
                CoefFn::Const(0.2),
                CoefFn::Affine { base: 0.0, slope: vec![0.3], lo: -0.4, hi: 0.4 },
                CoefFn::Const(-0.3),
            ],
            w: vec![CoefFn::Const(1.0), CoefFn::Const(0.3), CoefFn::Logistic { base: 0.0, slope: vec![1.0], lo: 0.0, hi: 0.2 }],
            delta: 1.5,
            noise: Law::standard_gaussian(),
            p: 1.0,
        };
        let zs = [z];
        let d = (m.head(&x, &zs, eps) - m.head(&y, &zs, eps)).abs();
        let bound: f64 = (0..2)
            .map(|i| {
                let (a1, a2) = m.lipschitz_pair(i, &zs);
                (a1 + a2 * eps.abs()) * (x[i] - y[i]).abs()
            })
            .sum();
        prop_assert!(d <= bound * (1.0 + 1e-12) + 1e-12, "{} > {}", d, bound);
    }

    #[test]
    fn garch_and_parx_heads_are_monotone(
        lo in prop::collection::vec(0.0..5.0f64, 6),
        bump in prop::collection::vec(0.0..2.0f64, 6),
        z in 0.0..2.0f64,
        u in 0.001..0.999f64,
        seed in any::<u64>(),
    ) {
        let hi: Vec<f64> = lo.iter().zip(&bump).map(|(a, b)| a + b).collect();
        let garch = ModelSpec::Apgarch(Apgarch {
            q: 2,
            delta: 1.5,
            pi: vec![0.3],
            beta: vec![0.4, 0.1],
            alpha_plus: vec![0.1, 0.05],
            alpha_minus: vec![0.2, 0.0],
            noise: Law::standard_gaussian(),
        });
        let parx = ModelSpec::Parx(Parx { q: 3, beta0: 0.5, beta: vec![0.3, 0.1, 0.0], alpha: vec![0.2, 0.1, 0.1], pi: vec![0.5] });
        for m in [garch, parx] {
            let n = m.state_len();
            let eps = m.eps_from_uniform(u);
            let mut shock = Shock::new(SeedStream::new(seed, 1), 3, false, u, eps);
            let mut a = vec![0.0; m.point_dim()];
            let mut b = vec![0.0; m.point_dim()];
            let (x, y) = if let ModelSpec::Parx(_) = m {
                // counts are integers, intensities are reals
                let r = |v: &[f64]| -> Vec<f64> { v[..n].iter().enumerate().map(|(i, s)| if i % 2 == 0 { s.floor() } else { *s }).collect() };
                (r(&lo), r(&hi))
            } else {
                (lo[..n].to_vec(), hi[..n].to_vec())
            };
            m.head(&x, &[z], &mut shock, &mut a).unwrap();
            m.head(&y, &[z], &mut shock, &mut b).unwrap();
            for (p, q) in a.iter().zip(&b) {
                prop_assert!(p <= q, "{}: {:?} vs {:?}", m.family(), a, b);
            }
        }
    }

    #[test]
    fn plugin_variance_scales_quadratically(ys in prop::collection::vec(-10.0..10.0f64, 50..200), c in -5.0..5.0f64, lags in 0usize..10) {
        let scaled: Vec<f64> = ys.iter().map(|y| c * y).collect();
        let v = plugin_variance(&ys, lags);
        let w = plugin_variance(&scaled, lags);
        prop_assert!((w - c * c * v).abs() <= 1e-12 * (1.0 + (c * c * v).abs()), "{} vs {}", w, c * c * v);
    }

    #[test]
    fn tail_sums_are_nonincreasing(theta in prop::collection::vec(0.0..3.0f64, 1..60)) {
        let t = tail_sums(&theta);
        for h in 0..t.len() {
            let direct = theta[h..].iter().rev().fold(0.0, |acc, v| acc + v);
            prop_assert_eq!(t[h], direct);
            if h > 0 {
                prop_assert!(t[h] <= t[h - 1]);
            }
        }
    }

    #[test]
    fn parx_config_round_trips(beta0 in 0.0..5.0f64, b in 0.0..0.5f64, a in 0.0..0.5f64, pi in 0.0..3.0f64, seed in any::<u64>()) {
        let text = format!(
            "[model]\nfamily = parx\nq = 1\nbeta0 = {beta0}\nbeta = {b}\nalpha = {a}\npi = {pi}\n\
             [covariate]\nfamily = iid\neta_law = uniform(0, 1)\n[run]\nseed = {seed}\n"
        );
        let cfg = ExperimentConfig::parse(&text).unwrap();
        prop_assert_eq!(ExperimentConfig::parse(&cfg.serialize()).unwrap(), cfg);
    }

    #[test]
    fn kernel_rows_sum_to_one(c in prop::collection::vec(-3.0..3.0f64, 3), a in prop::collection::vec(-2.0..2.0f64, 3), y in 1usize..=3, z in -2.0..2.0f64) {
        let m = Categorical { n: 3, q: 1, c, a: a.into_iter().map(|v| vec![v]).collect(), gamma: vec![vec![0.5], vec![0.0], vec![-0.5]] };
        let k = m.kernel(&[z], &[y as f64]);
        prop_assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(k.iter().all(|p| *p > 0.0));
    }
}

#[test]
fn kernel_inverse_reproduces_kernel_law() {
    let m = Categorical {
        n: 3,
        q: 1,
        c: vec![0.5, 0.0, -1.0],
        a: vec![vec![0.3], vec![0.0], vec![-0.2]],
        gamma: vec![vec![1.0], vec![0.0], vec![0.0]],
    };
    let s = SeedStream::new(17, 0);
    for (z, y) in [(0.4, 1.0), (-1.0, 3.0)] {
        let k = m.kernel(&[z], &[y]);
        let n = 100_000;
        let mut counts = [0usize; 3];
        for t in 0..n {
            let u = s.slot(t, ergodyn::noise::Channel::Innovation, false).uniform();
            counts[m.kernel_inverse(u, &[z], &[y]).unwrap() - 1] += 1;
        }
        for i in 0..3 {
            let f = counts[i] as f64 / n as f64;
            let se = (k[i] * (1.0 - k[i]) / n as f64).sqrt();
            assert!((f - k[i]).abs() < 4.0 * se, "category {}: {f} vs {}", i + 1, k[i]);
        }
    }
}

#[test]
fn coupled_tapes_share_every_draw_but_time_zero() {
    let mut cov = CovariateSpec::iid(2, Law::standard_gaussian());
    cov.family = CovariateFamily::MovingAverage { coefs: vec![1.0, 0.5] };
    let s = SeedStream::new(5, 2);
    let mut a = Tape::new(s, &cov, None);
    let mut b = Tape::new(s, &cov, Some(0));
    for t in -20..20 {
        let (ea, eb) = (a.eta(t).to_vec(), b.eta(t).to_vec());
        if t == 0 {
            assert_ne!(ea, eb);
        } else {
            assert_eq!(ea, eb);
            assert_eq!(a.u_eps(t), b.u_eps(t));
        }
    }
}

#[test]
fn var1_covariate_is_stationary_across_windows() {
    let mut cov = CovariateSpec::iid(1, Law::standard_gaussian());
    cov.family = CovariateFamily::Var1 { phi: DMatrix::from_element(1, 1, 0.6) };
    let mut tape = Tape::new(SeedStream::new(3, 0), &cov, None);
    let n = 40_000i64;
    let w1: Vec<f64> = (0..n).map(|t| tape.z(t)[0]).collect();
    let w2: Vec<f64> = (n..2 * n).map(|t| tape.z(t)[0]).collect();
    // long-run variance of an AR(1) with unit innovations
    let lrv = 1.0 / (0.4f64 * 0.4);
    let se = (2.0 * lrv / n as f64).sqrt();
    let (m1, m2) = (ergodyn::stats::mean(&w1), ergodyn::stats::mean(&w2));
    assert!((m1 - m2).abs() < 4.0 * se, "{m1} vs {m2}");
    let (v1, v2) = (ergodyn::stats::variance(&w1), ergodyn::stats::variance(&w2));
    let want = 1.0 / (1.0 - 0.36);
    assert!((v1 - want).abs() < 0.05 && (v2 - want).abs() < 0.05, "{v1} {v2} vs {want}");
}

#[test]
fn paths_are_pure_functions_of_the_stream() {
    let cfg = ergodyn::presets::preset("charn_threshold").unwrap();
    let run = |id| stationary_path(&cfg.model, &cfg.covariate, SeedStream::new(11, id), 300, 1e-10, 1 << 12).unwrap();
    assert_eq!(run(0), run(0));
    assert_ne!(run(0).states, run(1).states);
}
