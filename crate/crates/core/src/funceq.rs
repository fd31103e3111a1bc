//! The six-function logarithmic family solving
//! `g₁(y₁) + g₂(y₂) + g₃(y₃) = g₄(z₁) + g₅(z₂) + g₆(z₃)` with `z = Ψ(y)`,
//! and the residual of that equation on interior grids.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::UnitCube3;
use crate::error::{domain, positive, Result};
use crate::special::log_beta;
use crate::transforms::big_psi_raw;

/// Constants `(α, β, γ, A₁..A₆)` of one family member. It solves the
/// equation exactly when `A₁ + A₂ + A₃ = A₄ + A₅ + A₆`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolutionParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    #[serde(rename = "A")]
    pub a: [f64; 6],
}

impl SolutionParams {
    pub fn zero() -> Self {
        SolutionParams {
            alpha: 0.0,
            beta: 0.0,
            gamma: 0.0,
            a: [0.0; 6],
        }
    }

    /// `(A₁ + A₂ + A₃) − (A₄ + A₅ + A₆)`.
    pub fn constraint_gap(&self) -> f64 {
        (self.a[0] + self.a[1] + self.a[2]) - (self.a[3] + self.a[4] + self.a[5])
    }

    pub fn is_family_member(&self) -> bool {
        self.constraint_gap().abs() <= 1e-12
    }

    /// Coefficients `(c_ln_x, c_ln_1mx)` of `gᵢ` for `i ∈ 1..=6`.
    fn coefficients(&self, i: usize) -> (f64, f64) {
        let (a, b, g) = (self.alpha, self.beta, self.gamma);
        match i {
            1 | 4 => (a + g, b + g),
            2 | 5 => (a, b + g),
            _ => (g, b),
        }
    }
}

fn g_unchecked(i: usize, x: f64, params: &SolutionParams) -> f64 {
    let (cx, c1x) = params.coefficients(i);
    let mut v = params.a[i - 1];
    if cx != 0.0 {
        v += cx * x.ln();
    }
    if c1x != 0.0 {
        v += c1x * (-x).ln_1p();
    }
    v
}

/// Evaluates `gᵢ(x)`, `i ∈ 1..=6`:
/// `(α+γ) ln x + (β+γ) ln(1−x) + Aᵢ` for `i ∈ {1, 4}`,
/// `α ln x + (β+γ) ln(1−x) + Aᵢ` for `i ∈ {2, 5}`,
/// `γ ln x + β ln(1−x) + Aᵢ` for `i ∈ {3, 6}`.
pub fn g_eval(i: usize, x: f64, params: &SolutionParams) -> Result<f64> {
    if !(1..=6).contains(&i) {
        return domain(format!("function index must be in 1..=6, got {i}"));
    }
    if !(x > 0.0 && x < 1.0) {
        return domain(format!("g_{i} requires x in (0,1), got {x}"));
    }
    Ok(g_unchecked(i, x, params))
}

/// Left side minus right side for arbitrary functions `g[0..6]`.
pub fn residual_with<G: Fn(f64) -> f64>(y: &UnitCube3, g: &[G; 6]) -> f64 {
    let [y1, y2, y3] = y.to_array();
    let [z1, z2, z3] = big_psi_raw(y.to_array());
    (g[0](y1) + g[1](y2) + g[2](y3)) - (g[3](z1) + g[4](z2) + g[5](z3))
}

/// Signed residual `LHS − RHS` of the functional equation for a family member.
pub fn residual(y: &UnitCube3, params: &SolutionParams) -> f64 {
    let [y1, y2, y3] = y.to_array();
    let [z1, z2, z3] = big_psi_raw(y.to_array());
    let lhs = g_unchecked(1, y1, params) + g_unchecked(2, y2, params) + g_unchecked(3, y3, params);
    let rhs = g_unchecked(4, z1, params) + g_unchecked(5, z2, params) + g_unchecked(6, z3, params);
    lhs - rhs
}

/// The interior lattice `{1/(k+1), …, k/(k+1)}³`.
pub fn interior_grid(k: usize) -> Vec<UnitCube3> {
    let step = 1.0 / (k + 1) as f64;
    let mut out = Vec::with_capacity(k * k * k);
    for i in 1..=k {
        for j in 1..=k {
            for l in 1..=k {
                out.push(UnitCube3 {
                    y1: i as f64 * step,
                    y2: j as f64 * step,
                    y3: l as f64 * step,
                });
            }
        }
    }
    out
}

/// Largest `|residual|` over the `k³` interior lattice.
pub fn max_grid_residual(params: &SolutionParams, k: usize) -> Result<f64> {
    if k < 2 {
        return domain(format!("grid size must be at least 2, got {k}"));
    }
    Ok(interior_grid(k)
        .par_iter()
        .map(|y| residual(y, params).abs())
        .reduce(|| 0.0, f64::max))
}

/// Constants for the densities of `B_I(p+r, q+r)`, `B_I(p, q+r)`, `B_I(r, q)`:
/// `(α, β, γ) = (p − 1, q − 1, r)`, with `g₃` taken as `ln(x f(x))` of the
/// third law and `A` the negated log-normalizers (identical on both sides).
pub fn params_from_shapes(p: f64, q: f64, r: f64) -> Result<SolutionParams> {
    positive("p", p)?;
    positive("q", q)?;
    positive("r", r)?;
    let a1 = -log_beta(p + r, q + r)?;
    let a2 = -log_beta(p, q + r)?;
    let a3 = -log_beta(r, q)?;
    Ok(SolutionParams {
        alpha: p - 1.0,
        beta: q - 1.0,
        gamma: r,
        a: [a1, a2, a3, a1, a2, a3],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::beta_logpdf;
    use proptest::prelude::*;

    fn cube(y: [f64; 3]) -> UnitCube3 {
        UnitCube3::from_array(y).unwrap()
    }

    #[test]
    fn zero_params_vanish() {
        let z = SolutionParams::zero();
        for i in 1..=6 {
            assert_eq!(g_eval(i, 0.37, &z).unwrap(), 0.0);
        }
        assert_eq!(max_grid_residual(&z, 7).unwrap(), 0.0);
    }

    #[test]
    fn g_eval_examples() {
        let p = SolutionParams {
            alpha: 1.0,
            ..SolutionParams::zero()
        };
        assert!((g_eval(1, 0.5, &p).unwrap() - 0.5f64.ln()).abs() < 1e-15);
        let q = SolutionParams {
            alpha: 0.3,
            beta: -1.2,
            gamma: 2.0,
            a: [0.1, 0.2, 0.7, 0.4, 0.5, 0.7],
        };
        for x in [0.01, 0.5, 0.93] {
            assert_eq!(g_eval(3, x, &q).unwrap(), g_eval(6, x, &q).unwrap());
        }
        assert!(g_eval(0, 0.5, &q).is_err());
        assert!(g_eval(7, 0.5, &q).is_err());
        assert!(g_eval(2, 1.0, &q).is_err());
        assert!(max_grid_residual(&q, 1).is_err());
    }

    #[test]
    fn broken_constraint_shifts_residual_by_one() {
        let mut p = params_from_shapes(2.0, 1.5, 1.0).unwrap();
        p.a[0] += 1.0;
        for y in interior_grid(5) {
            assert!((residual(&y, &p) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn non_member_is_detected() {
        let p = params_from_shapes(2.0, 1.5, 1.0).unwrap();
        let family = |i: usize| move |x: f64| g_unchecked(i, x, &p);
        let g: [Box<dyn Fn(f64) -> f64>; 6] = [
            Box::new(|x: f64| x * x),
            Box::new(family(2)),
            Box::new(family(3)),
            Box::new(family(4)),
            Box::new(family(5)),
            Box::new(family(6)),
        ];
        let worst = interior_grid(10)
            .iter()
            .map(|y| residual_with(y, &g).abs())
            .fold(0.0, f64::max);
        assert!(worst > 0.01, "{worst}");
        let probe = residual_with(&cube([0.9, 0.5, 0.5]), &g);
        assert!(probe.abs() > 0.01);
    }

    #[test]
    fn shapes_map_to_family() {
        let p = params_from_shapes(1.0, 1.0, 1.0).unwrap();
        assert_eq!((p.alpha, p.beta, p.gamma), (0.0, 0.0, 1.0));
        assert!(p.is_family_member());

        let (pp, qq, rr) = (2.0, 1.5, 0.7);
        let p = params_from_shapes(pp, qq, rr).unwrap();
        let diffs: Vec<f64> = (1..=100)
            .map(|k| {
                let x = k as f64 / 101.0;
                g_eval(1, x, &p).unwrap() - beta_logpdf(x, pp + rr, qq + rr).unwrap()
            })
            .collect();
        let spread = diffs.iter().cloned().fold(f64::MIN, f64::max) - diffs.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread <= 1e-12, "{spread}");
        assert!(max_grid_residual(&p, 10).unwrap() <= 1e-9);
        assert!(params_from_shapes(0.0, 1.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn family_members_solve_the_equation(
            alpha in -2.0f64..3.0, beta in -2.0f64..3.0, gamma in -2.0f64..3.0,
            a in prop::array::uniform5(-5.0f64..5.0),
        ) {
            let a6 = a[0] + a[1] + a[2] - a[3] - a[4];
            let p = SolutionParams { alpha, beta, gamma, a: [a[0], a[1], a[2], a[3], a[4], a6] };
            prop_assert!(max_grid_residual(&p, 6).unwrap() <= 1e-9);
        }

        #[test]
        fn matched_shift_is_invisible(kappa in -10.0f64..10.0, y in prop::array::uniform3(0.01f64..0.99)) {
            let p = params_from_shapes(1.3, 0.8, 2.1).unwrap();
            let mut shifted = p;
            shifted.a[0] += kappa;
            shifted.a[3] += kappa;
            let y = UnitCube3::from_array(y).unwrap();
            prop_assert!((residual(&y, &p) - residual(&y, &shifted)).abs() < 1e-12);
        }

        #[test]
        fn first_minus_second_is_gamma_log(x in 0.001f64..0.999, gamma in -3.0f64..3.0) {
            let p = SolutionParams { alpha: 0.4, beta: -0.6, gamma, a: [0.0; 6] };
            let d = g_eval(1, x, &p).unwrap() - g_eval(2, x, &p).unwrap();
            prop_assert!((d - gamma * x.ln()).abs() < 1e-12);
        }
    }
}
