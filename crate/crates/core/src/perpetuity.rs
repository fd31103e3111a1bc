//! Iterated random affine and Möbius-type maps whose stationary laws are
//! coordinates of the `Ψ`-invariant product law:
//!
//! * `R = A R + B` with `(A, B) = (−(1−Y₂)Y₃, Y₂ + (1−Y₂)Y₃)`, solved by `R ~ Y₁`;
//! * `S = C S + D` with `(C, D) = ((1−Y₁)Y₃/Y₁, (1 − (1−Y₁)Y₃)/Y₁)`, solved by `S ~ 1/Y₂`;
//! * `T = a T + b + c/T` with `(a, b, c) = (Y₂/Y₁, (1 − 2Y₂ + Y₁Y₂)/Y₁, −(1−Y₁)(1−Y₂)/Y₁)`,
//!   solved by `T ~ 1/Y₃`. Whether that solution is unique is open, so
//!   chains of this kind are only ever reported on.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{BetaI, TriShapeParams};
use crate::error::{domain, Error, Result};
use crate::stat_tests::ks_two_sample_statistic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EqKind {
    AffineR,
    AffineS,
    MobiusT,
}

impl EqKind {
    pub fn in_state_space(self, state: f64) -> bool {
        match self {
            EqKind::AffineR => state > 0.0 && state < 1.0,
            EqKind::AffineS | EqKind::MobiusT => state > 1.0 && state.is_finite(),
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            EqKind::AffineR => "r",
            EqKind::AffineS => "s",
            EqKind::MobiusT => "t",
        }
    }

    /// Default pair of starting points for the two-start diagnostic.
    pub fn default_inits(self) -> [f64; 2] {
        match self {
            EqKind::AffineR => [0.1, 0.9],
            EqKind::AffineS => [1.5, 50.0],
            EqKind::MobiusT => [1.01, 100.0],
        }
    }
}

impl fmt::Display for EqKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for EqKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "r" | "R" => Ok(EqKind::AffineR),
            "s" | "S" => Ok(EqKind::AffineS),
            "t" | "T" => Ok(EqKind::MobiusT),
            other => Err(Error::Usage(format!("unknown equation '{other}', expected r, s or t"))),
        }
    }
}

/// One coefficient draw, together with the beta variables it was built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CoeffDraw {
    AffineR { a: f64, b: f64, y2: f64, y3: f64 },
    AffineS { c: f64, d: f64, y1: f64, y3: f64 },
    MobiusT { a: f64, b: f64, c: f64, y1: f64, y2: f64 },
}

impl CoeffDraw {
    pub fn kind(&self) -> EqKind {
        match self {
            CoeffDraw::AffineR { .. } => EqKind::AffineR,
            CoeffDraw::AffineS { .. } => EqKind::AffineS,
            CoeffDraw::MobiusT { .. } => EqKind::MobiusT,
        }
    }

    /// Deviation from the exact identity of the draw: `|A + B − Y₂|`,
    /// `|(C + D) Y₁ − 1|` (relative) or `|a + b + c − 1|`.
    pub fn identity_error(&self) -> f64 {
        match *self {
            CoeffDraw::AffineR { a, b, y2, .. } => (a + b - y2).abs(),
            CoeffDraw::AffineS { c, d, y1, .. } => ((c + d) * y1 - 1.0).abs(),
            CoeffDraw::MobiusT { a, b, c, .. } => (a + b + c - 1.0).abs(),
        }
    }

    pub fn satisfies_invariants(&self) -> bool {
        match *self {
            CoeffDraw::AffineR { a, b, y2, .. } => a > -1.0 && a < 0.0 && y2 > 0.0 && y2 < 1.0 && (a + b - y2).abs() <= 1e-13,
            CoeffDraw::AffineS { c, .. } => c > 0.0 && self.identity_error() <= 1e-13,
            CoeffDraw::MobiusT { a, c, .. } => a > 0.0 && c < 0.0 && self.identity_error() <= 1e-12,
        }
    }
}

/// Draws coefficients for one equation from the `Ψ`-invariant product law
/// `Y₁ ~ B_I(p+r, q+r)`, `Y₂ ~ B_I(p, q+r)`, `Y₃ ~ B_I(r, q)`.
#[derive(Debug, Clone)]
pub struct CoeffSampler {
    kind: EqKind,
    shapes: TriShapeParams,
    y1: BetaI,
    y2: BetaI,
    y3: BetaI,
}

impl CoeffSampler {
    pub fn new(kind: EqKind, shapes: TriShapeParams) -> Result<Self> {
        shapes.validate()?;
        let TriShapeParams { p, q, r } = shapes;
        Ok(CoeffSampler {
            kind,
            shapes,
            y1: BetaI::new(p + r, q + r)?,
            y2: BetaI::new(p, q + r)?,
            y3: BetaI::new(r, q)?,
        })
    }

    pub fn kind(&self) -> EqKind {
        self.kind
    }

    pub fn shapes(&self) -> TriShapeParams {
        self.shapes
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> CoeffDraw {
        match self.kind {
            EqKind::AffineR => {
                let (y2, y3) = (self.y2.sample(rng), self.y3.sample(rng));
                let w = (1.0 - y2) * y3;
                CoeffDraw::AffineR { a: -w, b: y2 + w, y2, y3 }
            }
            EqKind::AffineS => {
                let (y1, y3) = (self.y1.sample(rng), self.y3.sample(rng));
                let w = (1.0 - y1) * y3;
                CoeffDraw::AffineS { c: w / y1, d: (1.0 - w) / y1, y1, y3 }
            }
            EqKind::MobiusT => {
                let (y1, y2) = (self.y1.sample(rng), self.y2.sample(rng));
                CoeffDraw::MobiusT {
                    a: y2 / y1,
                    b: (1.0 - 2.0 * y2 + y1 * y2) / y1,
                    c: -(1.0 - y1) * (1.0 - y2) / y1,
                    y1,
                    y2,
                }
            }
        }
    }

    /// Draws from the known stationary solution: `Y₁`, `1/Y₂` or `1/Y₃`.
    pub fn sample_target<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            EqKind::AffineR => self.y1.sample(rng),
            EqKind::AffineS => 1.0 / self.y2.sample(rng),
            EqKind::MobiusT => 1.0 / self.y3.sample(rng),
        }
    }
}

pub fn sample_coeffs<R: Rng + ?Sized>(eq: EqKind, rng: &mut R, shapes: TriShapeParams) -> Result<CoeffDraw> {
    Ok(CoeffSampler::new(eq, shapes)?.sample(rng))
}

fn step_unchecked(state: f64, coeffs: &CoeffDraw) -> f64 {
    match *coeffs {
        CoeffDraw::AffineR { a, b, .. } => a * state + b,
        CoeffDraw::AffineS { c, d, .. } => c * state + d,
        // a T + b + c/T rewritten with a + b + c = 1 so that T > 1 maps
        // strictly above 1 even after rounding
        CoeffDraw::MobiusT { a, c, .. } => 1.0 + (state - 1.0) * (a - c / state),
    }
}

/// One application of the random map.
pub fn step(eq: EqKind, state: f64, coeffs: &CoeffDraw) -> Result<f64> {
    if coeffs.kind() != eq {
        return domain(format!("coefficients for {} used with equation {eq}", coeffs.kind()));
    }
    if !eq.in_state_space(state) {
        return domain(format!("state {state} is outside the state space of equation {eq}"));
    }
    if let CoeffDraw::MobiusT { .. } = coeffs {
        if coeffs.identity_error() > 1e-12 {
            return domain("Möbius coefficients must satisfy a + b + c = 1");
        }
    }
    let next = step_unchecked(state, coeffs);
    if !eq.in_state_space(next) {
        return domain(format!("step left the state space of equation {eq}: {next}"));
    }
    Ok(next)
}

/// Runs one chain from `init`, discarding `n_burn` states and keeping the
/// next `n_keep`.
pub fn run_chain<R: Rng + ?Sized>(
    eq: EqKind,
    rng: &mut R,
    shapes: TriShapeParams,
    n_burn: usize,
    n_keep: usize,
    init: f64,
) -> Result<Vec<f64>> {
    let sampler = CoeffSampler::new(eq, shapes)?;
    if !eq.in_state_space(init) {
        return domain(format!("initial state {init} is outside the state space of equation {eq}"));
    }
    let mut state = init;
    let mut kept = Vec::with_capacity(n_keep);
    for i in 0..n_burn + n_keep {
        let coeffs = sampler.sample(rng);
        state = step(eq, state, &coeffs)?;
        if i >= n_burn {
            kept.push(state);
        }
    }
    Ok(kept)
}

/// Two chains driven by the same coefficient draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoStart {
    pub inits: [f64; 2],
    /// Two-sample KS distance between the kept states of the chains.
    pub ks: f64,
    /// Largest `|state₁ − state₂|` over the kept steps.
    pub max_gap: f64,
    /// `|state₁ − state₂|` after the last step.
    pub final_gap: f64,
}

pub fn two_start_diagnostic<R: Rng + ?Sized>(
    eq: EqKind,
    rng: &mut R,
    shapes: TriShapeParams,
    inits: [f64; 2],
    n_burn: usize,
    n_keep: usize,
) -> Result<TwoStart> {
    let sampler = CoeffSampler::new(eq, shapes)?;
    for init in inits {
        if !eq.in_state_space(init) {
            return domain(format!("initial state {init} is outside the state space of equation {eq}"));
        }
    }
    let (mut s1, mut s2) = (inits[0], inits[1]);
    let mut kept1 = Vec::with_capacity(n_keep);
    let mut kept2 = Vec::with_capacity(n_keep);
    let mut max_gap: f64 = 0.0;
    for i in 0..n_burn + n_keep {
        let coeffs = sampler.sample(rng);
        s1 = step(eq, s1, &coeffs)?;
        s2 = step(eq, s2, &coeffs)?;
        if i >= n_burn {
            kept1.push(s1);
            kept2.push(s2);
            max_gap = max_gap.max((s1 - s2).abs());
        }
    }
    let ks = if n_keep == 0 { 0.0 } else { ks_two_sample_statistic(&kept1, &kept2) };
    Ok(TwoStart {
        inits,
        ks,
        max_gap,
        final_gap: (s1 - s2).abs(),
    })
}
