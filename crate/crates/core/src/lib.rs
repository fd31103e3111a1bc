//! Beta laws on the region `H = {x ∈ (0,1)³ : x₃ < min(x₁x₂, (1−x₁)(1−x₂))}`,
//! the involution of the unit cube that preserves a product of three beta
//! laws, and the matrix, functional-equation and perpetuity results built on
//! top of it.

pub mod distributions;
pub mod domain;
pub mod error;
pub mod funceq;
pub mod perpetuity;
pub mod quadrature;
pub mod rng;
pub mod special;
pub mod transforms;
pub mod verify;

pub use domain::{HPoint, Sym2, UnitCube3, BOUNDARY_EPS};
pub use error::{Error, Result};
pub use rng::RngStream;
