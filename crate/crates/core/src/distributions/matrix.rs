use rand::Rng;

use super::{GenMatrixParams, MatrixBetaParams};
use crate::distributions::BetaI;
use crate::domain::Sym2;
use crate::error::Result;
use crate::special::{log_beta, log_matrix_beta_const};
use crate::transforms::{tan_triple_inv_raw, Pivot, TanTriple};

/// The 2×2 matrix beta law `β₂(p, q)` on `D₂`.
#[derive(Debug, Clone)]
pub struct MatrixBeta2 {
    params: MatrixBetaParams,
    t11_sq: BetaI,
    t22_sq: BetaI,
    v_sq: BetaI,
    log_norm: f64,
}

impl MatrixBeta2 {
    pub fn new(params: MatrixBetaParams) -> Result<Self> {
        params.validate()?;
        let MatrixBetaParams { p, q } = params;
        Ok(MatrixBeta2 {
            params,
            t11_sq: BetaI::new(p, q)?,
            t22_sq: BetaI::new(p - 0.5, q)?,
            v_sq: BetaI::new(0.5, q - 0.5)?,
            log_norm: log_matrix_beta_const(2, p, q)?,
        })
    }

    pub fn params(&self) -> MatrixBetaParams {
        self.params
    }

    /// `(det x)^{p−3/2} (det(e−x))^{q−3/2} / B₂(p, q)` in log space.
    pub fn ln_pdf(&self, x: &Sym2) -> Result<f64> {
        x.check_d2()?;
        let MatrixBetaParams { p, q } = self.params;
        Ok((p - 1.5) * x.det().ln() + (q - 1.5) * x.det_complement().ln() - self.log_norm)
    }

    /// Draws the triangular factor with `TᵀT = X`: independent
    /// `t11² ~ B_I(p, q)`, `t22² ~ B_I(p − 1/2, q)` and `v = ±√u` with
    /// `u ~ B_I(1/2, q − 1/2)`, then `t12 = √(1−t11²) √(1−t22²) v`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Sym2 {
        loop {
            let a = self.t11_sq.sample(rng);
            let b = self.t22_sq.sample(rng);
            let v = self.v_sq.sample(rng).sqrt();
            let v = if rng.random::<bool>() { v } else { -v };
            let t11 = a.sqrt();
            let t12 = ((1.0 - a) * (1.0 - b)).sqrt() * v;
            let x = Sym2::new(a, t11 * t12, t12 * t12 + b);
            if x.in_d2() {
                return x;
            }
        }
    }
}

pub fn matrix_beta2_logpdf(x: &Sym2, params: MatrixBetaParams) -> Result<f64> {
    MatrixBeta2::new(params)?.ln_pdf(x)
}

pub fn sample_matrix_beta2<R: Rng + ?Sized>(rng: &mut R, params: MatrixBetaParams) -> Result<Sym2> {
    Ok(MatrixBeta2::new(params)?.sample(rng))
}

/// The three-parameter family on `D₂` with density
/// `(det x)^{a−1} (det(e−x))^{b−1} |x12|^{2c−1} / (B(a,b) B(a+b,c) B(a+c,b+c))`.
///
/// At `c = 1/2` it coincides with `β₂(a + 1/2, b + 1/2)`.
#[derive(Debug, Clone)]
pub struct GenMatrix {
    params: GenMatrixParams,
    diag: BetaI,
    schur: BetaI,
    v_sq: BetaI,
    log_norm: f64,
}

impl GenMatrix {
    pub fn new(params: GenMatrixParams) -> Result<Self> {
        params.validate()?;
        let GenMatrixParams { a, b, c } = params;
        Ok(GenMatrix {
            params,
            diag: BetaI::new(a + c, b + c)?,
            schur: BetaI::new(a, b + c)?,
            v_sq: BetaI::new(c, b)?,
            log_norm: log_beta(a, b)? + log_beta(a + b, c)? + log_beta(a + c, b + c)?,
        })
    }

    pub fn params(&self) -> GenMatrixParams {
        self.params
    }

    /// Log-density. On the null set `x12 = 0` the `|x12|^{2c−1}` factor is
    /// reported as a signed infinity (`−∞` for `c > 1/2`, `+∞` for `c < 1/2`).
    pub fn ln_pdf(&self, x: &Sym2) -> Result<f64> {
        x.check_d2()?;
        let GenMatrixParams { a, b, c } = self.params;
        let exponent = 2.0 * c - 1.0;
        let off = if exponent == 0.0 {
            0.0
        } else if x.x12 == 0.0 {
            if exponent > 0.0 {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }
        } else {
            exponent * x.x12.abs().ln()
        };
        Ok((a - 1.0) * x.det().ln() + (b - 1.0) * x.det_complement().ln() + off - self.log_norm)
    }

    /// Draws the Tan triple `X11 ~ B_I(a+c, b+c)`, `X₂.₁ ~ B_I(a, b+c)`,
    /// `V₁ = ±√u` with `u ~ B_I(c, b)`, and inverts it.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Sym2 {
        loop {
            let diag = self.diag.sample(rng);
            let schur = self.schur.sample(rng);
            let v = self.v_sq.sample(rng).sqrt();
            let v = if rng.random::<bool>() { v } else { -v };
            if v.abs() >= 1.0 {
                continue;
            }
            let x = tan_triple_inv_raw(Pivot::First, &TanTriple { diag, schur, v });
            if x.in_d2() {
                return x;
            }
        }
    }
}

pub fn gen_matrix_logpdf(x: &Sym2, params: GenMatrixParams) -> Result<f64> {
    GenMatrix::new(params)?.ln_pdf(x)
}

pub fn sample_gen_matrix<R: Rng + ?Sized>(rng: &mut R, params: GenMatrixParams) -> Result<Sym2> {
    Ok(GenMatrix::new(params)?.sample(rng))
}
