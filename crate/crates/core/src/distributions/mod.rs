//! Samplers and log-densities: univariate beta laws of both kinds, the
//! three-part Dirichlet, the trivariate law `B(p, q, r)` on `H`, the 2×2
//! matrix beta `β₂(p, q)` and the wider three-parameter matrix family that
//! shares its Tan-triple independence structure.

mod matrix;
mod trivariate;
mod univariate;

pub use matrix::{
    gen_matrix_logpdf, matrix_beta2_logpdf, sample_gen_matrix, sample_matrix_beta2, GenMatrix,
    MatrixBeta2,
};
pub use trivariate::{sample_trivariate_h, trivariate_h_logpdf, ProductBeta3, TrivariateH};
pub use univariate::{
    beta2_logpdf, beta_logpdf, sample_beta, sample_beta2, sample_dirichlet3, BetaI, BetaII,
    Dirichlet3,
};

use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};

/// Shapes `(p, q, r)` of `B(p, q, r)` and of the product law
/// `B_I(p+r, q+r) ⊗ B_I(p, q+r) ⊗ B_I(r, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriShapeParams {
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

impl TriShapeParams {
    pub fn new(p: f64, q: f64, r: f64) -> Result<Self> {
        Ok(TriShapeParams {
            p: positive("p", p)?,
            q: positive("q", q)?,
            r: positive("r", r)?,
        })
    }

    pub(crate) fn validate(&self) -> Result<()> {
        TriShapeParams::new(self.p, self.q, self.r).map(|_| ())
    }
}

/// Shapes `(p, q, r, s)` of the completely neutral product law
/// `B_I(p, q+r+s) ⊗ B_I(q, r+s) ⊗ B_I(r, s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadShapeParams {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub s: f64,
}

impl QuadShapeParams {
    pub fn new(p: f64, q: f64, r: f64, s: f64) -> Result<Self> {
        Ok(QuadShapeParams {
            p: positive("p", p)?,
            q: positive("q", q)?,
            r: positive("r", r)?,
            s: positive("s", s)?,
        })
    }
}

/// Parameters `(a, b, c)` of the three-parameter matrix family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenMatrixParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl GenMatrixParams {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        Ok(GenMatrixParams {
            a: positive("a", a)?,
            b: positive("b", b)?,
            c: positive("c", c)?,
        })
    }

    pub(crate) fn validate(&self) -> Result<()> {
        GenMatrixParams::new(self.a, self.b, self.c).map(|_| ())
    }
}

/// Parameters of `β₂(p, q)`; both must exceed 1/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatrixBetaParams {
    pub p: f64,
    pub q: f64,
}

impl MatrixBetaParams {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        for (name, v) in [("p", p), ("q", q)] {
            if !(v.is_finite() && v > 0.5) {
                return Err(Error::Parameter(format!(
                    "matrix beta requires {name} > 1/2, got {v}"
                )));
            }
        }
        Ok(MatrixBetaParams { p, q })
    }

    pub(crate) fn validate(&self) -> Result<()> {
        MatrixBetaParams::new(self.p, self.q).map(|_| ())
    }
}
