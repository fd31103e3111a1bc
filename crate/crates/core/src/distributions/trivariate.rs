use rand::Rng;

use super::{QuadShapeParams, TriShapeParams};
use crate::distributions::BetaI;
use crate::domain::{HPoint, UnitCube3};
use crate::error::{domain, Result};
use crate::special::log_beta;
use crate::transforms::{psi_inv_raw, Pivot};

/// A product of three independent `B_I` laws on the unit cube.
#[derive(Debug, Clone)]
pub struct ProductBeta3 {
    laws: [BetaI; 3],
}

impl ProductBeta3 {
    pub fn new(shapes: [(f64, f64); 3]) -> Result<Self> {
        let [a, b, c] = shapes;
        Ok(ProductBeta3 {
            laws: [BetaI::new(a.0, a.1)?, BetaI::new(b.0, b.1)?, BetaI::new(c.0, c.1)?],
        })
    }

    /// `B_I(p+r, q+r) ⊗ B_I(p, q+r) ⊗ B_I(r, q)`, the law preserved by `Ψ`.
    pub fn invariant(params: TriShapeParams) -> Result<Self> {
        let TriShapeParams { p, q, r } = params;
        Self::new([(p + r, q + r), (p, q + r), (r, q)])
    }

    /// `B_I(p, q+r+s) ⊗ B_I(q, r+s) ⊗ B_I(r, s)`, the input law of the
    /// complete-neutrality map.
    pub fn neutral(params: QuadShapeParams) -> Result<Self> {
        let QuadShapeParams { p, q, r, s } = params;
        Self::new([(p, q + r + s), (q, r + s), (r, s)])
    }

    pub fn marginals(&self) -> &[BetaI; 3] {
        &self.laws
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> UnitCube3 {
        UnitCube3 {
            y1: self.laws[0].sample(rng),
            y2: self.laws[1].sample(rng),
            y3: self.laws[2].sample(rng),
        }
    }

    pub fn sample_n<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<UnitCube3> {
        (0..n).map(|_| self.sample(rng)).collect()
    }

    pub fn ln_pdf(&self, y: &UnitCube3) -> Result<f64> {
        let mut acc = 0.0;
        for (law, v) in self.laws.iter().zip(y.to_array()) {
            acc += law.ln_pdf(v)?;
        }
        Ok(acc)
    }
}

/// The law `B(p, q, r)` on `H`, with density proportional to
/// `(x₁x₂ − x₃)^{p−1} ((1−x₁)(1−x₂) − x₃)^{q−1} x₃^{r−1}`.
///
/// The normalizer `1 / (B(p+r, q+r) B(p, q+r) B(r, q))` follows from the
/// pushforward of the product law under `ψ₁⁻¹`.
#[derive(Debug, Clone)]
pub struct TrivariateH {
    params: TriShapeParams,
    product: ProductBeta3,
    log_norm: f64,
}

impl TrivariateH {
    pub fn new(params: TriShapeParams) -> Result<Self> {
        params.validate()?;
        let TriShapeParams { p, q, r } = params;
        Ok(TrivariateH {
            params,
            product: ProductBeta3::invariant(params)?,
            log_norm: log_beta(p + r, q + r)? + log_beta(p, q + r)? + log_beta(r, q)?,
        })
    }

    pub fn params(&self) -> TriShapeParams {
        self.params
    }

    /// Log of the normalizing constant `B(p+r, q+r) B(p, q+r) B(r, q)`.
    pub fn log_normalizer(&self) -> f64 {
        self.log_norm
    }

    pub fn ln_pdf(&self, x: &HPoint) -> Result<f64> {
        if !x.is_valid() {
            return domain(format!("{:?} is not in H", x.to_array()));
        }
        let TriShapeParams { p, q, r } = self.params;
        let [g1, g2, g3] = x.gaps();
        Ok((p - 1.0) * g1.ln() + (q - 1.0) * g2.ln() + (r - 1.0) * g3.ln() - self.log_norm)
    }

    /// `ψ₁⁻¹` applied to a product-beta draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> HPoint {
        loop {
            let y = self.product.sample(rng);
            let [x1, x2, x3] = psi_inv_raw(Pivot::First, y.to_array());
            let x = HPoint { x1, x2, x3 };
            // rounding can push extreme draws onto the boundary of H
            if x.is_valid() {
                return x;
            }
        }
    }
}

pub fn trivariate_h_logpdf(x: &HPoint, params: TriShapeParams) -> Result<f64> {
    TrivariateH::new(params)?.ln_pdf(x)
}

pub fn sample_trivariate_h<R: Rng + ?Sized>(rng: &mut R, params: TriShapeParams) -> Result<HPoint> {
    Ok(TrivariateH::new(params)?.sample(rng))
}
