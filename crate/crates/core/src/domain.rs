//! Points of the supports used throughout: the open unit cube, the region
//! `H ⊂ (0,1)² × (0,∞)` and 2×2 symmetric matrices with the `D₂` test.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Inputs closer than this to a domain boundary are rejected by the
/// deterministic maps.
pub const BOUNDARY_EPS: f64 = 1e-12;

fn in_open_unit(v: f64) -> bool {
    v > 0.0 && v < 1.0
}

fn in_unit_interior(v: f64) -> bool {
    v > BOUNDARY_EPS && v < 1.0 - BOUNDARY_EPS
}

/// A point of the open cube `(0,1)³`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitCube3 {
    pub y1: f64,
    pub y2: f64,
    pub y3: f64,
}

impl UnitCube3 {
    pub fn new(y1: f64, y2: f64, y3: f64) -> Result<Self> {
        let y = UnitCube3 { y1, y2, y3 };
        if y.is_valid() {
            Ok(y)
        } else {
            domain(format!("({y1}, {y2}, {y3}) is not in (0,1)^3"))
        }
    }

    pub fn from_array(y: [f64; 3]) -> Result<Self> {
        Self::new(y[0], y[1], y[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.y1, self.y2, self.y3]
    }

    pub fn is_valid(&self) -> bool {
        self.to_array().iter().all(|&v| in_open_unit(v))
    }

    /// Validity plus the [`BOUNDARY_EPS`] margin.
    pub fn check_interior(&self) -> Result<()> {
        if self.to_array().iter().all(|&v| in_unit_interior(v)) {
            Ok(())
        } else {
            domain(format!(
                "({}, {}, {}) is outside (0,1)^3 or within {BOUNDARY_EPS:e} of its boundary",
                self.y1, self.y2, self.y3
            ))
        }
    }
}

/// A point of `H = {x ∈ (0,1)² × (0,∞) : min{x₁x₂, (1−x₁)(1−x₂)} > x₃}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HPoint {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl HPoint {
    pub fn new(x1: f64, x2: f64, x3: f64) -> Result<Self> {
        let x = HPoint { x1, x2, x3 };
        if x.is_valid() {
            Ok(x)
        } else {
            domain(format!("({x1}, {x2}, {x3}) is not in H"))
        }
    }

    pub fn from_array(x: [f64; 3]) -> Result<Self> {
        Self::new(x[0], x[1], x[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x1, self.x2, self.x3]
    }

    /// `(x₁x₂ − x₃, (1−x₁)(1−x₂) − x₃, x₃)`: all three are positive exactly on H.
    pub fn gaps(&self) -> [f64; 3] {
        [
            self.x1 * self.x2 - self.x3,
            (1.0 - self.x1) * (1.0 - self.x2) - self.x3,
            self.x3,
        ]
    }

    pub fn is_valid(&self) -> bool {
        let [a, b, c] = self.gaps();
        in_open_unit(self.x1) && in_open_unit(self.x2) && a > 0.0 && b > 0.0 && c > 0.0
    }

    pub fn check_interior(&self) -> Result<()> {
        let [a, b, c] = self.gaps();
        let ok = in_unit_interior(self.x1)
            && in_unit_interior(self.x2)
            && a > BOUNDARY_EPS
            && b > BOUNDARY_EPS
            && c > BOUNDARY_EPS;
        if ok {
            Ok(())
        } else {
            domain(format!(
                "({}, {}, {}) is outside H or within {BOUNDARY_EPS:e} of its boundary",
                self.x1, self.x2, self.x3
            ))
        }
    }
}

/// The symmetric matrix `[[x11, x12], [x12, x22]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sym2 {
    pub x11: f64,
    pub x12: f64,
    pub x22: f64,
}

impl Sym2 {
    pub fn new(x11: f64, x12: f64, x22: f64) -> Self {
        Sym2 { x11, x12, x22 }
    }

    pub fn from_array(x: [f64; 3]) -> Self {
        Sym2::new(x[0], x[1], x[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x11, self.x12, self.x22]
    }

    pub fn det(&self) -> f64 {
        self.x11 * self.x22 - self.x12 * self.x12
    }

    /// `det(e − x)`.
    pub fn det_complement(&self) -> f64 {
        (1.0 - self.x11) * (1.0 - self.x22) - self.x12 * self.x12
    }

    /// Membership in `D₂`: both `x` and `e − x` positive definite.
    pub fn in_d2(&self) -> bool {
        self.x12.is_finite()
            && in_open_unit(self.x11)
            && in_open_unit(self.x22)
            && self.det() > 0.0
            && self.det_complement() > 0.0
    }

    pub fn check_d2(&self) -> Result<()> {
        if self.in_d2() {
            Ok(())
        } else {
            domain(format!("{:?} is not in D2", self.to_array()))
        }
    }

    pub fn check_interior(&self) -> Result<()> {
        let ok = self.x12.is_finite()
            && in_unit_interior(self.x11)
            && in_unit_interior(self.x22)
            && self.det() > BOUNDARY_EPS
            && self.det_complement() > BOUNDARY_EPS;
        if ok {
            Ok(())
        } else {
            domain(format!(
                "{:?} is outside D2 or within {BOUNDARY_EPS:e} of its boundary",
                self.to_array()
            ))
        }
    }
}
