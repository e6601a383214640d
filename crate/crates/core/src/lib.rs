//! Numerical (α,β)-Finsler geometry over expression-defined Riemannian charts.

pub mod conformal;
pub mod error;
pub mod exprcore;
pub mod finsler;
pub mod homogeneous;
pub mod riemann;
pub mod sampling;

pub use error::{GeometryError, Result};
