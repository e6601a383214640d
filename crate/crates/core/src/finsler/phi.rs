use std::fmt;

use crate::error::{GeometryError, Result};
use crate::exprcore::{Expr, Scalar, ScalarExpr};

/// Variables of every φ expression: `w = b²`, then `s = β/α`.
pub const PHI_VARS: [&str; 2] = ["w", "s"];

/// Kropina is evaluated only where `s ≥ KROPINA_BAND · b`.
pub const KROPINA_BAND: f64 = 0.02;

/// Lower end of the Kropina admissibility grid.
pub const KROPINA_GRID_START: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhiKind {
    Riemannian,
    Randers,
    Kropina,
    Matsumoto,
    /// `φ(s)` from a user expression in `s`.
    CustomClassic,
    /// `φ(b², s)` from a user expression in `w, s`.
    CustomGeneral,
}

impl PhiKind {
    pub fn name(self) -> &'static str {
        match self {
            PhiKind::Riemannian => "riemannian",
            PhiKind::Randers => "randers",
            PhiKind::Kropina => "kropina",
            PhiKind::Matsumoto => "matsumoto",
            PhiKind::CustomClassic => "custom",
            PhiKind::CustomGeneral => "custom-general",
        }
    }
}

/// The profile function φ of an (α,β)-metric together with its validity
/// radius `b0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiFamily {
    kind: PhiKind,
    expr: ScalarExpr,
    b0: f64,
}

/// `φ`, `φ₂ = ∂φ/∂s` and `φ₂₂ = ∂²φ/∂s²` at one `(b², s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiPartials {
    pub phi: f64,
    pub phi2: f64,
    pub phi22: f64,
}

/// Coefficients of the fundamental tensor of `F = αφ(b², β/α)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalCoefficients {
    pub rho: f64,
    pub rho0: f64,
    pub rho1: f64,
    /// `φ₂₂ / (φ − sφ₂)`.
    pub d: f64,
}

impl FundamentalCoefficients {
    pub fn new(p: PhiPartials, s: f64) -> Self {
        let PhiPartials { phi, phi2, phi22 } = p;
        FundamentalCoefficients {
            rho: phi * (phi - s * phi2),
            rho0: phi * phi22 + phi2 * phi2,
            rho1: (phi - s * phi2) * phi2 - s * phi * phi22,
            d: phi22 / (phi - s * phi2),
        }
    }
}

impl PhiFamily {
    fn builtin(kind: PhiKind, text: &str, b0: f64) -> Self {
        PhiFamily {
            kind,
            expr: ScalarExpr::parse(text, &PHI_VARS).expect("built-in φ parses"),
            b0,
        }
    }

    pub fn riemannian() -> Self {
        Self::builtin(PhiKind::Riemannian, "1", f64::INFINITY)
    }

    pub fn randers() -> Self {
        Self::builtin(PhiKind::Randers, "1 + s", 1.0)
    }

    pub fn kropina() -> Self {
        Self::builtin(PhiKind::Kropina, "1/s", f64::INFINITY)
    }

    pub fn matsumoto() -> Self {
        Self::builtin(PhiKind::Matsumoto, "1/(1 - s)", 1.0)
    }

    /// A built-in family by name.
    pub fn named(name: &str) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "riemannian" => Ok(Self::riemannian()),
            "randers" => Ok(Self::randers()),
            "kropina" => Ok(Self::kropina()),
            "matsumoto" => Ok(Self::matsumoto()),
            other => Err(GeometryError::Unsupported(format!(
                "unknown φ family {other:?}"
            ))),
        }
    }

    /// `φ(s)` from an expression in `s`.
    pub fn custom(text: &str, b0: f64) -> Result<Self> {
        let in_s = ScalarExpr::parse(text, &["s"])?;
        let tree = in_s.tree().remap_vars(&|_| Expr::Var(1));
        Self::checked(
            PhiKind::CustomClassic,
            ScalarExpr::from_tree(tree, &PHI_VARS)?,
            b0,
        )
    }

    /// `φ(b², s)` from an expression in `w = b²` and `s`.
    pub fn custom_general(text: &str, b0: f64) -> Result<Self> {
        Self::checked(
            PhiKind::CustomGeneral,
            ScalarExpr::parse(text, &PHI_VARS)?,
            b0,
        )
    }

    fn checked(kind: PhiKind, expr: ScalarExpr, b0: f64) -> Result<Self> {
        if !(b0 > 0.0) {
            return Err(GeometryError::Unsupported(format!(
                "b0 must be positive, got {b0}"
            )));
        }
        Ok(PhiFamily { kind, expr, b0 })
    }

    pub fn kind(&self) -> PhiKind {
        self.kind
    }

    pub fn b0(&self) -> f64 {
        self.b0
    }

    /// The expression over `(w, s)`.
    pub fn expr(&self) -> &ScalarExpr {
        &self.expr
    }

    /// Kropina is only defined on the cone `β > 0`.
    pub fn is_conic(&self) -> bool {
        self.kind == PhiKind::Kropina
    }

    pub fn eval<T: Scalar>(&self, w: T, s: T) -> Result<T> {
        Ok(self.expr.eval_with(&[w, s])?)
    }

    pub fn partials(&self, w: f64, s: f64) -> Result<PhiPartials> {
        let jet = self.expr.jet(&[w, s], 2)?;
        Ok(PhiPartials {
            phi: jet.value(),
            phi2: jet.partial(&[1]).expect("order 2"),
            phi22: jet.partial(&[1, 1]).expect("order 2"),
        })
    }

    pub fn coefficients(&self, w: f64, s: f64) -> Result<FundamentalCoefficients> {
        Ok(FundamentalCoefficients::new(self.partials(w, s)?, s))
    }
}

impl fmt::Display for PhiFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: φ = {}", self.kind.name(), self.expr)?;
        if self.b0.is_finite() {
            write!(f, ", b0 = {}", self.b0)?;
        }
        Ok(())
    }
}

/// Smallest values over the grid of the quantities whose positivity makes
/// `αφ(b², β/α)` a Finsler metric.
#[derive(Debug, Clone, PartialEq)]
pub struct Admissibility {
    pub b: f64,
    pub s_range: (f64, f64),
    pub grid_points: usize,
    /// `min φ`.
    pub positivity: f64,
    /// `min (φ − sφ₂)`; not required in dimension 2.
    pub first: Option<f64>,
    /// `min (φ − sφ₂ + (b² − s²)φ₂₂)`.
    pub second: f64,
}

impl Admissibility {
    pub fn admissible(&self) -> bool {
        self.positivity > 0.0 && self.first.is_none_or(|m| m > 0.0) && self.second > 0.0
    }

    /// The smallest margin among the checked conditions.
    pub fn worst_margin(&self) -> f64 {
        self.positivity
            .min(self.second)
            .min(self.first.unwrap_or(f64::INFINITY))
    }
}

/// Evaluates the admissibility conditions for radius `b` on `grid_points`
/// evenly spaced values of `s` in `[−b, b]` (Kropina: `[0.05, b]`).
/// Dimension 2 checks only the second condition.
pub fn phi_admissible(
    phi: &PhiFamily,
    b: f64,
    grid_points: usize,
    dim: usize,
) -> Result<Admissibility> {
    if !(b >= 0.0 && b < phi.b0()) {
        return Err(GeometryError::PhiRadius { b, b0: phi.b0() });
    }
    let (lo, hi) = if phi.is_conic() {
        if b <= KROPINA_GRID_START {
            return Err(GeometryError::KropinaCone {
                s: b,
                min: KROPINA_GRID_START,
            });
        }
        (KROPINA_GRID_START, b)
    } else {
        (-b, b)
    };
    let count = grid_points.max(2);
    let w = b * b;
    let mut positivity = f64::INFINITY;
    let mut first = f64::INFINITY;
    let mut second = f64::INFINITY;
    for k in 0..count {
        let s = lo + (hi - lo) * k as f64 / (count - 1) as f64;
        let p = phi.partials(w, s)?;
        positivity = positivity.min(p.phi);
        first = first.min(p.phi - s * p.phi2);
        second = second.min(p.phi - s * p.phi2 + (w - s * s) * p.phi22);
    }
    Ok(Admissibility {
        b,
        s_range: (lo, hi),
        grid_points: count,
        positivity,
        first: (dim >= 3).then_some(first),
        second,
    })
}
