use thiserror::Error;

use crate::exprcore::ExprError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("{what}: expected dimension {expected}, got {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("metric is not positive definite at {point:?}")]
    NotPositiveDefinite { point: Vec<f64> },
    #[error("singular matrix ({what})")]
    Singular { what: &'static str },
    #[error("point {point:?} violates the model domain")]
    OutsideDomain { point: Vec<f64> },
    #[error("degenerate flag or plane: denominator {denominator:e}")]
    DegenerateFlag { denominator: f64 },
    #[error("zero tangent vector")]
    ZeroVector,
    #[error("|X| = {norm} is not below the validity radius b0 = {b0}")]
    Admissibility { norm: f64, b0: f64 },
    #[error("radius b = {b} must satisfy 0 <= b < b0 = {b0}")]
    PhiRadius { b: f64, b0: f64 },
    #[error("Kropina metric evaluated off its cone: s = {s} < {min}")]
    KropinaCone { s: f64, min: f64 },
    #[error("beta is not parallel (max |b_i;j| = {residual:e})")]
    NotParallel { residual: f64 },
    #[error("beta is not closed (max |db| = {residual:e})")]
    NotClosed { residual: f64 },
    #[error("model has no {0}")]
    Missing(&'static str),
    #[error("unknown model {0:?}")]
    UnknownModel(String),
    #[error("{0}")]
    Unsupported(String),
    #[error("could not draw {wanted} admissible sample points (accepted {found})")]
    Sampling { wanted: usize, found: usize },
}

pub type Result<T, E = GeometryError> = std::result::Result<T, E>;
