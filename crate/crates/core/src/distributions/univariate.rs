use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{domain, positive, Error, Result};
use crate::special::{log_beta, reg_inc_beta};

/// The beta law of the first kind, `B_I(a, b)` on `(0, 1)`.
#[derive(Debug, Clone)]
pub struct BetaI {
    a: f64,
    b: f64,
    gamma_a: Gamma<f64>,
    gamma_b: Gamma<f64>,
    log_norm: f64,
}

impl BetaI {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        let a = positive("a", a)?;
        let b = positive("b", b)?;
        let gamma = |shape: f64| {
            Gamma::new(shape, 1.0).map_err(|e| Error::Parameter(format!("gamma({shape}): {e}")))
        };
        Ok(BetaI {
            a,
            b,
            gamma_a: gamma(a)?,
            gamma_b: gamma(b)?,
            log_norm: log_beta(a, b)?,
        })
    }

    pub fn shapes(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    /// One draw as `G_a / (G_a + G_b)`. Draws that round to 0 or 1 are
    /// redrawn rather than clamped.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let x = self.gamma_a.sample(rng);
            let y = self.gamma_b.sample(rng);
            let u = x / (x + y);
            if u > 0.0 && u < 1.0 {
                return u;
            }
        }
    }

    pub fn sample_n<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.sample(rng)).collect()
    }

    pub fn ln_pdf(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x < 1.0) {
            return domain(format!("beta density requires x in (0,1), got {x}"));
        }
        Ok((self.a - 1.0) * x.ln() + (self.b - 1.0) * (-x).ln_1p() - self.log_norm)
    }

    /// CDF extended by 0 below the support and 1 above it.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else if x >= 1.0 {
            1.0
        } else {
            reg_inc_beta(x, self.a, self.b).expect("shapes validated")
        }
    }

    pub fn mean(&self) -> f64 {
        self.a / (self.a + self.b)
    }

    pub fn variance(&self) -> f64 {
        let s = self.a + self.b;
        self.a * self.b / (s * s * (s + 1.0))
    }
}

pub fn sample_beta<R: Rng + ?Sized>(rng: &mut R, a: f64, b: f64) -> Result<f64> {
    Ok(BetaI::new(a, b)?.sample(rng))
}

/// `(a−1) ln x + (b−1) ln(1−x) − ln B(a, b)`.
pub fn beta_logpdf(x: f64, a: f64, b: f64) -> Result<f64> {
    BetaI::new(a, b)?.ln_pdf(x)
}

/// The beta law of the second kind (beta prime), `B_II(alpha, beta)` on
/// `(0, ∞)`; the law of `U / (1 − U)` for `U ~ B_I(alpha, beta)`.
#[derive(Debug, Clone)]
pub struct BetaII {
    inner: BetaI,
}

impl BetaII {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        Ok(BetaII {
            inner: BetaI::new(alpha, beta)?,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u = self.inner.sample(rng);
        u / (1.0 - u)
    }

    pub fn ln_pdf(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x.is_finite()) {
            return domain(format!("beta-prime density requires x > 0, got {x}"));
        }
        let (alpha, beta) = self.inner.shapes();
        Ok((alpha - 1.0) * x.ln() - (alpha + beta) * x.ln_1p() - self.inner.log_norm)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else if x.is_infinite() {
            1.0
        } else {
            self.inner.cdf(x / (1.0 + x))
        }
    }
}

/// `(alpha−1) ln x − (alpha+beta) ln(1+x) − ln B(alpha, beta)`.
pub fn beta2_logpdf(x: f64, alpha: f64, beta: f64) -> Result<f64> {
    BetaII::new(alpha, beta)?.ln_pdf(x)
}

pub fn sample_beta2<R: Rng + ?Sized>(rng: &mut R, alpha: f64, beta: f64) -> Result<f64> {
    Ok(BetaII::new(alpha, beta)?.sample(rng))
}

/// The Dirichlet law `D(p, r, q)` on the open 2-simplex, returned as the
/// three proportions `(w1, w2, w3)` with shapes in that order.
#[derive(Debug, Clone)]
pub struct Dirichlet3 {
    gammas: [Gamma<f64>; 3],
}

impl Dirichlet3 {
    pub fn new(p: f64, r: f64, q: f64) -> Result<Self> {
        let gamma = |name: &str, shape: f64| -> Result<Gamma<f64>> {
            let shape = positive(name, shape)?;
            Gamma::new(shape, 1.0).map_err(|e| Error::Parameter(format!("gamma({shape}): {e}")))
        };
        Ok(Dirichlet3 {
            gammas: [gamma("p", p)?, gamma("r", r)?, gamma("q", q)?],
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 3] {
        loop {
            let g = self.gammas.each_ref().map(|d| d.sample(rng));
            let total = g[0] + g[1] + g[2];
            let w = g.map(|v| v / total);
            if w.iter().all(|&v| v > 0.0 && v < 1.0) {
                return w;
            }
        }
    }
}

pub fn sample_dirichlet3<R: Rng + ?Sized>(rng: &mut R, p: f64, r: f64, q: f64) -> Result<[f64; 3]> {
    Ok(Dirichlet3::new(p, r, q)?.sample(rng))
}
