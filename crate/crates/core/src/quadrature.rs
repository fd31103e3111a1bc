//! Double-exponential (tanh-sinh) quadrature.
//!
//! Used as an independent numerical oracle for normalizing constants and
//! CDFs. Handles integrable endpoint singularities of the form `x^{a-1}`.

use std::f64::consts::FRAC_PI_2;

const T_MAX: f64 = 4.0;
const MAX_LEVEL: u32 = 12;

/// Integrates `f` over `[a, b]` to relative tolerance `tol`.
///
/// Abscissae are generated from their distance to the nearest endpoint so
/// that singular integrands are never evaluated at the endpoint itself.
/// Non-finite integrand values (underflowed abscissae) are dropped.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let (lo, hi) = (a.min(b), a.max(b));
    integrate_split(|x, _, _| if x <= lo || x >= hi { 0.0 } else { f(x) }, a, b, tol)
}

/// As [`integrate`], but `f(x, x − a, b − x)` also receives both endpoint
/// distances without cancellation, for integrands singular at `b`.
pub fn integrate_split<F: Fn(f64, f64, f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let half = 0.5 * (b - a);
    let eval = |t: f64| -> f64 {
        let u = FRAC_PI_2 * t.sinh();
        let e = (-2.0 * u.abs()).exp();
        let dist = 2.0 * half * e / (1.0 + e);
        let (x, lo, hi) = if t < 0.0 {
            (a + dist, dist, 2.0 * half - dist)
        } else if t > 0.0 {
            (b - dist, 2.0 * half - dist, dist)
        } else {
            (a + half, half, half)
        };
        if dist == 0.0 {
            return 0.0;
        }
        let weight = half * FRAC_PI_2 * t.cosh() * 4.0 * e / ((1.0 + e) * (1.0 + e));
        let v = f(x, lo, hi) * weight;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };

    let mut h = 1.0;
    let mut sum = eval(0.0);
    let mut k = 1;
    while k as f64 * h <= T_MAX {
        let t = k as f64 * h;
        sum += eval(t) + eval(-t);
        k += 1;
    }
    let mut estimate = sum * h;
    for _ in 1..=MAX_LEVEL {
        h *= 0.5;
        // only the new odd nodes
        let mut k = 1;
        while k as f64 * h <= T_MAX {
            let t = k as f64 * h;
            sum += eval(t) + eval(-t);
            k += 2;
        }
        let next = sum * h;
        let done = (next - estimate).abs() <= tol * next.abs().max(f64::MIN_POSITIVE);
        estimate = next;
        if done {
            break;
        }
    }
    estimate
}

/// Integrates `f` over `(0, ∞)` through the substitution `x = t / (1 − t)`.
pub fn integrate_half_line<F: Fn(f64) -> f64>(f: F, tol: f64) -> f64 {
    integrate(
        |t| {
            let s = 1.0 - t;
            f(t / s) / (s * s)
        },
        0.0,
        1.0,
        tol,
    )
}
