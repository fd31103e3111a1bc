//! Deterministic maps between the supports: the two bijections `ψ₁, ψ₂`
//! from `H` onto the unit cube, the involution `Ψ = ψ₂ ∘ ψ₁⁻¹`, Tan
//! triples of 2×2 matrices, the triangular (Kshirsagar) factor, the
//! complete-neutrality map, and the Dirichlet representation quantities.
//!
//! Inputs within [`BOUNDARY_EPS`](crate::domain::BOUNDARY_EPS) of a domain
//! boundary are rejected.

use serde::{Deserialize, Serialize};

use crate::domain::{HPoint, Sym2, UnitCube3, BOUNDARY_EPS};
use crate::error::{domain, Result};

/// Which coordinate (or diagonal entry) plays the leading role.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pivot {
    First,
    Second,
}

impl Pivot {
    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(Pivot::First),
            2 => Ok(Pivot::Second),
            _ => domain(format!("pivot index must be 1 or 2, got {i}")),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Pivot::First => 1,
            Pivot::Second => 2,
        }
    }
}

pub(crate) fn psi_raw(pivot: Pivot, x: [f64; 3]) -> [f64; 3] {
    let [x1, x2, x3] = x;
    let (xi, xj) = match pivot {
        Pivot::First => (x1, x2),
        Pivot::Second => (x2, x1),
    };
    // xᵢ − x₁x₂ = xᵢ(1 − xⱼ) avoids cancelling against the rounded product
    [xi, xi.mul_add(xj, -x3) / xi, x3 / ((1.0 - xi) * xi.mul_add(1.0 - xj, x3))]
}

pub(crate) fn psi_inv_raw(pivot: Pivot, y: [f64; 3]) -> [f64; 3] {
    let [y1, y2, y3] = y;
    let w = (1.0 - y1) * y3;
    let other = y2 + (1.0 - y2) * w;
    // equals y1 (1−y1)(1−y2) y3, but written through the rounded `other` so
    // that ψ recovers y3 even when 1 − other is tiny
    let x3 = y1 * w * (1.0 - other) / (1.0 - w);
    match pivot {
        Pivot::First => [y1, other, x3],
        Pivot::Second => [other, y1, x3],
    }
}

pub(crate) fn big_psi_raw(y: [f64; 3]) -> [f64; 3] {
    let [y1, y2, y3] = y;
    let z1 = y2 + (1.0 - y1) * (1.0 - y2) * y3;
    let z2 = y1 * y2 / z1;
    let z3 = y1 * y3 / ((1.0 - (1.0 - y1) * y3) * (y2 + y3 * (1.0 - y2)));
    [z1, z2, z3]
}

/// `ψᵢ(x) = (xᵢ, (x₁x₂ − x₃)/xᵢ, x₃ / ((1 − xᵢ)(xᵢ − x₁x₂ + x₃)))`.
pub fn psi(pivot: Pivot, x: &HPoint) -> Result<UnitCube3> {
    x.check_interior()?;
    let [y1, y2, y3] = psi_raw(pivot, x.to_array());
    Ok(UnitCube3 { y1, y2, y3 })
}

/// Inverse of [`psi`]. For the first pivot
/// `x = (y₁, y₂ + (1−y₁)(1−y₂)y₃, y₁(1−y₁)(1−y₂)y₃)`; the second pivot swaps
/// the first two output coordinates. Membership in `H` follows from
/// `x₁x₂ − x₃ = y₁y₂` and `(1−x₁)(1−x₂) − x₃ = (1−y₁)(1−y₂)(1−y₃)`.
pub fn psi_inv(pivot: Pivot, y: &UnitCube3) -> Result<HPoint> {
    y.check_interior()?;
    let [x1, x2, x3] = psi_inv_raw(pivot, y.to_array());
    let x = HPoint { x1, x2, x3 };
    if !x.is_valid() {
        return domain(format!("psi_inv of {:?} lost H membership to rounding", y.to_array()));
    }
    Ok(x)
}

/// The involution `Ψ = ψ₂ ∘ ψ₁⁻¹`, evaluated in closed form.
pub fn big_psi(y: &UnitCube3) -> Result<UnitCube3> {
    y.check_interior()?;
    let [y1, y2, y3] = big_psi_raw(y.to_array());
    Ok(UnitCube3 { y1, y2, y3 })
}

/// `Ψ` computed as the composition `ψ₂ ∘ ψ₁⁻¹`. Kept as a regression oracle
/// for [`big_psi`].
pub fn big_psi_composed(y: &UnitCube3) -> Result<UnitCube3> {
    y.check_interior()?;
    let [y1, y2, y3] = psi_raw(Pivot::Second, psi_inv_raw(Pivot::First, y.to_array()));
    Ok(UnitCube3 { y1, y2, y3 })
}

/// `|det ∂ψᵢ/∂x| = 1 / ((1 − xᵢ)(xᵢ − x₁x₂ + x₃))`.
pub fn psi_jacobian(pivot: Pivot, x: &HPoint) -> Result<f64> {
    x.check_interior()?;
    let xi = match pivot {
        Pivot::First => x.x1,
        Pivot::Second => x.x2,
    };
    Ok(1.0 / ((1.0 - xi) * (xi - x.x1 * x.x2 + x.x3)))
}

/// `|det|` of the central-difference Jacobian of [`psi`], step
/// `1e−6 · max(1, |xⱼ|)` per coordinate.
pub fn psi_jacobian_numeric(pivot: Pivot, x: &HPoint) -> Result<f64> {
    x.check_interior()?;
    let base = x.to_array();
    let mut jac = [[0.0; 3]; 3];
    for j in 0..3 {
        let h = 1e-6 * base[j].abs().max(1.0);
        let mut plus = base;
        let mut minus = base;
        plus[j] += h;
        minus[j] -= h;
        let fp = psi_raw(pivot, plus);
        let fm = psi_raw(pivot, minus);
        for i in 0..3 {
            jac[i][j] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    Ok(det3(&jac).abs())
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// `(Xᵢᵢ, X_{j·i}, Vᵢ)`: a diagonal entry, the Schur complement of the
/// other entry and the normalized off-diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TanTriple {
    pub diag: f64,
    pub schur: f64,
    pub v: f64,
}

impl TanTriple {
    pub fn new(diag: f64, schur: f64, v: f64) -> Result<Self> {
        let t = TanTriple { diag, schur, v };
        if t.is_valid() {
            Ok(t)
        } else {
            domain(format!("({diag}, {schur}, {v}) is not a valid Tan triple"))
        }
    }

    pub fn is_valid(&self) -> bool {
        let unit = |v: f64| v > 0.0 && v < 1.0;
        unit(self.diag) && unit(self.schur) && self.v > -1.0 && self.v < 1.0
    }

    fn check_interior(&self) -> Result<()> {
        let unit = |v: f64| v > BOUNDARY_EPS && v < 1.0 - BOUNDARY_EPS;
        if unit(self.diag) && unit(self.schur) && self.v.abs() < 1.0 - BOUNDARY_EPS {
            Ok(())
        } else {
            domain(format!(
                "({}, {}, {}) is not a Tan triple or lies within {BOUNDARY_EPS:e} of the boundary",
                self.diag, self.schur, self.v
            ))
        }
    }
}

/// Tan triple of `x ∈ D₂`; for the first pivot
/// `(x11, x22 − x12²/x11, x12 / √((1 − x11)(x11 − x11·x22 + x12²)))`.
pub fn tan_triple(pivot: Pivot, x: &Sym2) -> Result<TanTriple> {
    x.check_interior()?;
    Ok(tan_triple_raw(pivot, x))
}

pub(crate) fn tan_triple_raw(pivot: Pivot, x: &Sym2) -> TanTriple {
    let (d, o) = match pivot {
        Pivot::First => (x.x11, x.x22),
        Pivot::Second => (x.x22, x.x11),
    };
    let c = x.x12;
    let schur = o - c * c / d;
    // d − d·o + c² = d(1 − o) + c², with 1 − o exact near o = 1
    let v = c / ((1.0 - d) * d.mul_add(1.0 - o, c * c)).sqrt();
    TanTriple { diag: d, schur, v }
}

pub(crate) fn tan_triple_inv_raw(pivot: Pivot, t: &TanTriple) -> Sym2 {
    let w = t.v * t.v * (1.0 - t.diag);
    let other = t.schur + w * (1.0 - t.schur);
    // u = v² diag (1−diag)(1−schur), written through the rounded `other`
    let u = t.diag * w * (1.0 - other) / (1.0 - w);
    let off = if t.v == 0.0 { 0.0 } else { u.sqrt().copysign(t.v) };
    match pivot {
        Pivot::First => Sym2::new(t.diag, off, other),
        Pivot::Second => Sym2::new(other, off, t.diag),
    }
}

/// Inverse of [`tan_triple`]: with `u = v²·diag·(1−diag)·(1−schur)`,
/// `x12 = sign(v)√u` and the other diagonal entry is `schur + u/diag`.
/// The result lies in `D₂` since `det x = diag·schur` and
/// `det(e − x) = (1−diag)(1−schur)(1−v²)`.
pub fn tan_triple_inv(pivot: Pivot, t: &TanTriple) -> Result<Sym2> {
    t.check_interior()?;
    let x = tan_triple_inv_raw(pivot, t);
    x.check_d2()?;
    Ok(x)
}

/// Upper-triangular `T` with `TᵀT = X`; `t22² = X₂.₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriFactor {
    pub t11: f64,
    pub t12: f64,
    pub t22: f64,
}

impl TriFactor {
    /// `TᵀT = (t11², t11·t12, t12² + t22²)`.
    pub fn reconstruct(&self) -> Sym2 {
        Sym2::new(
            self.t11 * self.t11,
            self.t11 * self.t12,
            self.t12 * self.t12 + self.t22 * self.t22,
        )
    }
}

pub fn kshirsagar_decompose(x: &Sym2) -> Result<TriFactor> {
    x.check_interior()?;
    Ok(kshirsagar_raw(x))
}

pub(crate) fn kshirsagar_raw(x: &Sym2) -> TriFactor {
    let t11 = x.x11.sqrt();
    let t12 = x.x12 / t11;
    let t22 = (x.x22 - x.x12 * x.x12 / x.x11).sqrt();
    TriFactor { t11, t12, t22 }
}

/// The complete-neutrality map
/// `(y₁ / (1 − (1−y₁)[y₂ + (1−y₂)y₃]), (1−y₁)y₂ / (1 − (1−y₁)(1−y₂)y₃), (1−y₁)(1−y₂)y₃)`.
pub fn neutrality_map(y: &UnitCube3) -> Result<UnitCube3> {
    y.check_interior()?;
    let [y1, y2, y3] = neutrality_map_raw(y.to_array());
    Ok(UnitCube3 { y1, y2, y3 })
}

pub(crate) fn neutrality_map_raw([y1, y2, y3]: [f64; 3]) -> [f64; 3] {
    let tail = (1.0 - y1) * (1.0 - y2) * y3;
    [
        y1 / (1.0 - (1.0 - y1) * (y2 + (1.0 - y2) * y3)),
        (1.0 - y1) * y2 / (1.0 - tail),
        tail,
    ]
}

/// `U = Y₁ / (Y₂ + (1−Y₁)(1−Y₂)Y₃)`, `V₁ = Y₂`,
/// `V₂ = (1−Y₁)Y₃ / (1 − (1−Y₁)Y₃)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirichletRep {
    pub u: f64,
    pub v1: f64,
    pub v2: f64,
}

impl DirichletRep {
    /// `((V₁+V₂)/(1+V₂), U·V₁, U·V₂/(1 − U·V₁))`, which equals `Ψ(y)`.
    pub fn to_psi_image(&self) -> [f64; 3] {
        let uv1 = self.u * self.v1;
        [
            (self.v1 + self.v2) / (1.0 + self.v2),
            uv1,
            self.u * self.v2 / (1.0 - uv1),
        ]
    }

    /// `U·(V₁, V₂)`, distributed as `D(p, r, q)` on the first two proportions.
    pub fn proportions(&self) -> (f64, f64) {
        (self.u * self.v1, self.u * self.v2)
    }
}

pub fn dirichlet_rep(y: &UnitCube3) -> Result<DirichletRep> {
    y.check_interior()?;
    Ok(dirichlet_rep_raw(y.to_array()))
}

pub(crate) fn dirichlet_rep_raw([y1, y2, y3]: [f64; 3]) -> DirichletRep {
    let w = (1.0 - y1) * y3;
    DirichletRep {
        u: y1 / (y2 + (1.0 - y1) * (1.0 - y2) * y3),
        v1: y2,
        v2: w / (1.0 - w),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    use crate::rng::RngStream;

    fn cube(y: [f64; 3]) -> UnitCube3 {
        UnitCube3::from_array(y).unwrap()
    }

    fn random_cube(rng: &mut RngStream, margin: f64) -> UnitCube3 {
        let mut draw = || margin + (1.0 - 2.0 * margin) * rng.random::<f64>();
        cube([draw(), draw(), draw()])
    }

    fn random_d2(rng: &mut RngStream) -> Sym2 {
        loop {
            let x = Sym2::new(rng.random(), 2.0 * rng.random::<f64>() - 1.0, rng.random());
            if x.check_interior().is_ok() {
                return x;
            }
        }
    }

    fn max_abs_diff(a: [f64; 3], b: [f64; 3]) -> f64 {
        (0..3).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn psi_worked_example() {
        let x = HPoint::new(0.5, 0.5, 0.1).unwrap();
        let y = psi(Pivot::First, &x).unwrap();
        assert!(max_abs_diff(y.to_array(), [0.5, 0.3, 4.0 / 7.0]) < 1e-15);
        let back = psi_inv(Pivot::First, &y).unwrap();
        assert!(max_abs_diff(back.to_array(), [0.5, 0.5, 0.1]) < 1e-15);
    }

    #[test]
    fn psi_index_symmetry() {
        let x = HPoint::new(0.3, 0.6, 0.05).unwrap();
        let swapped = HPoint::new(0.6, 0.3, 0.05).unwrap();
        assert_eq!(psi(Pivot::Second, &x).unwrap(), psi(Pivot::First, &swapped).unwrap());
        assert_eq!(
            psi_jacobian(Pivot::Second, &x).unwrap(),
            psi_jacobian(Pivot::First, &swapped).unwrap()
        );
    }

    #[test]
    fn psi_rejects_outside_h() {
        assert!(psi(Pivot::First, &HPoint { x1: 0.5, x2: 0.5, x3: 0.3 }).is_err());
        assert!(psi_jacobian(Pivot::Second, &HPoint { x1: 0.9, x2: 0.9, x3: 0.05 }).is_err());
        assert!(Pivot::from_index(3).is_err());
    }

    #[test]
    fn psi_inv_boundary_limit() {
        let x = psi_inv(Pivot::First, &cube([0.4, 0.7, 1e-9])).unwrap();
        assert!(x.x3 < 1e-9);
        assert!((x.x2 - 0.7).abs() < 1e-9);
    }

    #[test]
    fn psi_inv_range_algebra() {
        let mut rng = RngStream::new(3, 1);
        for _ in 0..10_000 {
            let y = random_cube(&mut rng, 1e-6);
            for pivot in [Pivot::First, Pivot::Second] {
                let x = psi_inv(pivot, &y).unwrap();
                let [g1, g2, _] = x.gaps();
                assert!((g1 - y.y1 * y.y2).abs() < 1e-14);
                assert!((g2 - (1.0 - y.y1) * (1.0 - y.y2) * (1.0 - y.y3)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn big_psi_worked_examples() {
        let z = big_psi(&cube([0.5, 0.5, 0.5])).unwrap();
        assert!(max_abs_diff(z.to_array(), [5.0 / 8.0, 0.4, 4.0 / 9.0]) < 1e-15);
        let back = big_psi(&z).unwrap();
        assert!(max_abs_diff(back.to_array(), [0.5, 0.5, 0.5]) < 1e-15);
    }

    #[test]
    fn big_psi_direct_matches_composition() {
        let mut rng = RngStream::new(3, 2);
        for _ in 0..10_000 {
            let y = random_cube(&mut rng, 1e-6);
            let a = big_psi(&y).unwrap().to_array();
            let b = big_psi_composed(&y).unwrap().to_array();
            // the composed route cancels in 1 − x₂
            let cond = a.iter().map(|v| 1.0 - v).fold(1.0, f64::min);
            assert!(max_abs_diff(a, b) < 1e-13 / cond, "{y:?} {a:?} {b:?}");
        }
    }

    #[test]
    fn jacobian_worked_example() {
        let j = psi_jacobian(Pivot::First, &HPoint::new(0.5, 0.5, 0.1).unwrap()).unwrap();
        assert!((j - 40.0 / 7.0).abs() < 1e-13);
    }

    #[test]
    fn tan_triple_worked_example() {
        let x = Sym2::new(0.5, 0.2, 0.5);
        let t = tan_triple(Pivot::First, &x).unwrap();
        assert!((t.diag - 0.5).abs() < 1e-15);
        assert!((t.schur - 0.42).abs() < 1e-15);
        assert!((t.v - 0.2 / 0.145f64.sqrt()).abs() < 1e-15);
        let back = tan_triple_inv(Pivot::First, &TanTriple::new(0.5, 0.42, 0.525_225_7).unwrap()).unwrap();
        assert!(max_abs_diff(back.to_array(), [0.5, 0.2, 0.5]) < 1e-7);
    }

    #[test]
    fn tan_triple_diagonal_cases() {
        let t = tan_triple(Pivot::First, &Sym2::new(0.3, 0.0, 0.6)).unwrap();
        assert_eq!((t.diag, t.schur, t.v), (0.3, 0.6, 0.0));
        let x = tan_triple_inv(Pivot::First, &TanTriple::new(0.3, 0.6, 0.0).unwrap()).unwrap();
        assert_eq!(x.to_array(), [0.3, 0.0, 0.6]);
        let x = tan_triple_inv(Pivot::Second, &TanTriple::new(0.3, 0.6, 0.0).unwrap()).unwrap();
        assert_eq!(x.to_array(), [0.6, 0.0, 0.3]);
        assert!(tan_triple(Pivot::First, &Sym2::new(0.5, 0.5, 0.5)).is_err());
    }

    #[test]
    fn tan_inverse_determinant_identities() {
        let mut rng = RngStream::new(3, 3);
        for _ in 0..10_000 {
            let t = TanTriple::new(
                0.001 + 0.998 * rng.random::<f64>(),
                0.001 + 0.998 * rng.random::<f64>(),
                0.998 * (2.0 * rng.random::<f64>() - 1.0),
            )
            .unwrap();
            for pivot in [Pivot::First, Pivot::Second] {
                let x = tan_triple_inv(pivot, &t).unwrap();
                assert!((x.det() - t.diag * t.schur).abs() < 1e-13);
                let expected = (1.0 - t.diag) * (1.0 - t.schur) * (1.0 - t.v * t.v);
                assert!((x.det_complement() - expected).abs() < 1e-13);
                assert_eq!(x.x12.is_sign_negative(), t.v.is_sign_negative());
            }
        }
    }

    #[test]
    fn kshirsagar_examples() {
        let f = kshirsagar_decompose(&Sym2::new(0.5, 0.0, 0.5)).unwrap();
        let s = 0.5f64.sqrt();
        assert!((f.t11 - s).abs() < 1e-15 && f.t12 == 0.0 && (f.t22 - s).abs() < 1e-15);
        let mut rng = RngStream::new(3, 4);
        for _ in 0..10_000 {
            let x = random_d2(&mut rng);
            let back = kshirsagar_decompose(&x).unwrap().reconstruct();
            assert!(max_abs_diff(back.to_array(), x.to_array()) < 1e-14);
        }
        assert!(kshirsagar_decompose(&Sym2::new(0.5, 0.6, 0.5)).is_err());
    }

    #[test]
    fn neutrality_worked_example() {
        let z = neutrality_map(&cube([0.5, 0.5, 0.5])).unwrap();
        assert!(max_abs_diff(z.to_array(), [0.8, 2.0 / 7.0, 0.125]) < 1e-15);
        let mut rng = RngStream::new(3, 5);
        for _ in 0..1000 {
            let y = random_cube(&mut rng, 1e-6);
            let z = neutrality_map(&y).unwrap();
            assert_eq!(z.y3, (1.0 - y.y1) * (1.0 - y.y2) * y.y3);
            assert!(z.is_valid());
        }
    }

    #[test]
    fn dirichlet_rep_matches_big_psi() {
        let mut rng = RngStream::new(3, 6);
        for _ in 0..10_000 {
            let y = random_cube(&mut rng, 1e-6);
            let rep = dirichlet_rep(&y).unwrap();
            let z = big_psi(&y).unwrap().to_array();
            assert!(max_abs_diff(rep.to_psi_image(), z) < 1e-12);
            assert!(rep.u > 0.0 && rep.v1 > 0.0 && rep.v1 < 1.0 && rep.v2 > 0.0);
        }
    }

    #[test]
    fn boundary_policy() {
        assert!(big_psi(&UnitCube3 { y1: 0.5, y2: 1.0 - 1e-13, y3: 0.5 }).is_err());
        assert!(neutrality_map(&UnitCube3 { y1: 1e-14, y2: 0.5, y3: 0.5 }).is_err());
        assert!(dirichlet_rep(&UnitCube3 { y1: 0.0, y2: 0.5, y3: 0.5 }).is_err());
        assert!(TanTriple::new(0.5, 0.5, 1.0).is_err());
    }
}
