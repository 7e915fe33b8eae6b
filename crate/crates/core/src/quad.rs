//! Adaptive numerical integration on top of the double-exponential rule.
//!
//! The underlying rule stops after a fixed number of nodes, so intervals whose
//! error estimate exceeds the target are bisected. Half-infinite ranges are
//! mapped to `[0, 1)` through `x = a + u / (1 - u)`.

use quadrature::{double_exponential, Output};

const MAX_DEPTH: u32 = 16;

/// Integrate `f` over the finite interval `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if a > b {
        return -integrate(f, b, a, tol);
    }
    let whole = double_exponential::integrate(&f, a, b, tol);
    adaptive(&f, a, b, tol, whole, 0)
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, whole: Output, depth: u32) -> f64 {
    if whole.error_estimate <= tol || depth >= MAX_DEPTH {
        return whole.integral;
    }
    let mid = 0.5 * (a + b);
    let left = double_exponential::integrate(f, a, mid, 0.5 * tol);
    let right = double_exponential::integrate(f, mid, b, 0.5 * tol);
    // a noisy integrand never meets the error estimate; stop once halving no longer moves the value
    if (left.integral + right.integral - whole.integral).abs() <= tol {
        return left.integral + right.integral;
    }
    adaptive(f, a, mid, 0.5 * tol, left, depth + 1) + adaptive(f, mid, b, 0.5 * tol, right, depth + 1)
}

/// `∫_a^∞ f(x) dx`.
pub fn integrate_upper<F: Fn(f64) -> f64>(f: F, a: f64, tol: f64) -> f64 {
    integrate(
        |u| {
            let w = 1.0 - u;
            if w <= 0.0 {
                return 0.0;
            }
            f(a + u / w) / (w * w)
        },
        0.0,
        1.0,
        tol,
    )
}

/// `∫_{-∞}^b f(x) dx`.
pub fn integrate_lower<F: Fn(f64) -> f64>(f: F, b: f64, tol: f64) -> f64 {
    integrate_upper(|x| f(2.0 * b - x), b, tol)
}

/// Integrate over `[lo, hi]` where either end may be infinite; `breaks` are
/// interior points where the integrand has a kink or singularity.
pub fn integrate_range<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, breaks: &[f64], tol: f64) -> f64 {
    let mut points: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|x| *x > lo && *x < hi && x.is_finite())
        .collect();
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    points.dedup();
    let mut nodes = Vec::with_capacity(points.len() + 2);
    nodes.push(lo);
    nodes.extend(points);
    nodes.push(hi);
    let pieces = (nodes.len() - 1) as f64;
    let piece_tol = tol / pieces;
    let mut total = 0.0;
    for w in nodes.windows(2) {
        let (a, b) = (w[0], w[1]);
        total += match (a.is_finite(), b.is_finite()) {
            (true, true) => integrate(&f, a, b, piece_tol),
            (true, false) => integrate_upper(&f, a, piece_tol),
            (false, true) => integrate_lower(&f, b, piece_tol),
            (false, false) => {
                integrate_lower(&f, 0.0, 0.5 * piece_tol) + integrate_upper(&f, 0.0, 0.5 * piece_tol)
            }
        };
    }
    total
}
