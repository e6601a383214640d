//! Conformal changes `F̃ = e^f F` of (α,β)-metrics and the residuals that
//! decide when `F̃` is of Berwald or Douglas type.

use crate::error::{GeometryError, Result};
use crate::exprcore::{ScalarExpr, Taylor};
use crate::finsler::{FinslerInstance, PhiFamily, PhiKind};
use crate::riemann::{self, linalg, GeometryModel, VectorFieldExpr};

/// Threshold on `|dβ|` for the closedness precondition.
pub const CLOSED_TOL: f64 = 1e-9;

/// Base data `(g, X)`, the factor `f`, and the transformed data
/// `(e^{2f}g, e^{-f}X)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalPair {
    base: GeometryModel,
    field: VectorFieldExpr,
    f: ScalarExpr,
    transformed: GeometryModel,
    transformed_field: VectorFieldExpr,
}

/// Which vector fields a residual is maximized over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Coordinate,
    /// The model frame; falls back to coordinates when none is declared.
    Frame,
}

pub fn conformal_transform(
    model: &GeometryModel,
    field: &VectorFieldExpr,
    f: &ScalarExpr,
) -> Result<ConformalPair> {
    if field.coords() != model.coords() {
        return Err(GeometryError::Dimension {
            what: "vector field chart",
            expected: model.dim(),
            found: field.dim(),
        });
    }
    Ok(ConformalPair {
        base: model.clone(),
        field: field.clone(),
        f: f.clone(),
        transformed: model.conformal(f)?,
        transformed_field: field.scaled_by(&f.neg().exp()),
    })
}

impl ConformalPair {
    pub fn base(&self) -> &GeometryModel {
        &self.base
    }

    pub fn field(&self) -> &VectorFieldExpr {
        &self.field
    }

    pub fn factor(&self) -> &ScalarExpr {
        &self.f
    }

    pub fn transformed(&self) -> &GeometryModel {
        &self.transformed
    }

    pub fn transformed_field(&self) -> &VectorFieldExpr {
        &self.transformed_field
    }

    pub fn base_instance(&self, phi: PhiFamily) -> Result<FinslerInstance> {
        FinslerInstance::new(self.base.clone(), self.field.clone(), phi)
    }

    /// The instance of `F̃ = e^f F`.
    pub fn instance(&self, phi: PhiFamily) -> Result<FinslerInstance> {
        FinslerInstance::with_conformal(&self.base, &self.field, phi, &self.f)
    }

    /// `(‖X‖_g, ‖X̃‖_g̃)` at `x`.
    pub fn norms(&self, x: &[f64]) -> Result<(f64, f64)> {
        let g = riemann::metric_at(&self.base, x)?;
        let gt = riemann::metric_at(&self.transformed, x)?;
        Ok((
            g.norm(&self.field.eval(x)?),
            gt.norm(&self.transformed_field.eval(x)?),
        ))
    }

    /// Basis fields for residual maximization.
    pub fn basis_fields(&self, basis: Basis) -> Result<Vec<VectorFieldExpr>> {
        match (basis, self.base.frame()) {
            (Basis::Frame, Some(frame)) => Ok(frame.fields.clone()),
            _ => coordinate_fields(&self.base),
        }
    }
}

/// `∂/∂x^1, …, ∂/∂x^n` as constant fields.
pub fn coordinate_fields(model: &GeometryModel) -> Result<Vec<VectorFieldExpr>> {
    let n = model.dim();
    (0..n)
        .map(|k| {
            let mut e = vec![0.0; n];
            e[k] = 1.0;
            VectorFieldExpr::constant(&e, model.coords())
        })
        .collect()
}

/// `∇̃_Y Z = ∇_Y Z + (Yf)Z + (Zf)Y − g(Y, Z)∇f`, using only base data.
pub fn conformal_connection(
    pair: &ConformalPair,
    y: &VectorFieldExpr,
    z: &VectorFieldExpr,
    x: &[f64],
) -> Result<Vec<f64>> {
    let g = riemann::metric_at(&pair.base, x)?;
    let nabla = riemann::covariant_derivative(&pair.base, y, z, x)?;
    let (yv, zv) = (y.eval(x)?, z.eval(x)?);
    let yf = riemann::directional_derivative(y, &pair.f, x)?;
    let zf = riemann::directional_derivative(z, &pair.f, x)?;
    let grad = riemann::gradient(&pair.base, &pair.f, x)?;
    let gyz = g.inner(&yv, &zv);
    Ok((0..x.len())
        .map(|i| nabla[i] + yf * zv[i] + zf * yv[i] - gyz * grad[i])
        .collect())
}

/// `∇̃_Y Z` from the Christoffel symbols of the transformed metric.
pub fn transformed_connection(
    pair: &ConformalPair,
    y: &VectorFieldExpr,
    z: &VectorFieldExpr,
    x: &[f64],
) -> Result<Vec<f64>> {
    riemann::covariant_derivative(&pair.transformed, y, z, x)
}

/// `‖∇_Y X − g(X, Y)∇f + (Xf)Y‖_g` at `x`.
pub fn berwald_residual_at(pair: &ConformalPair, y: &VectorFieldExpr, x: &[f64]) -> Result<f64> {
    let g = riemann::metric_at(&pair.base, x)?;
    let nabla = riemann::covariant_derivative(&pair.base, y, &pair.field, x)?;
    let (yv, xv) = (y.eval(x)?, pair.field.eval(x)?);
    let xf = riemann::directional_derivative(&pair.field, &pair.f, x)?;
    let grad = riemann::gradient(&pair.base, &pair.f, x)?;
    let gxy = g.inner(&xv, &yv);
    let r: Vec<f64> = (0..x.len())
        .map(|i| nabla[i] - gxy * grad[i] + xf * yv[i])
        .collect();
    Ok(g.norm(&r))
}

/// Largest Berwald residual over samples and the model frame (coordinate
/// fields when the model declares none). Zero exactly when `F̃` is Berwald.
pub fn berwald_residual(pair: &ConformalPair, samples: &[Vec<f64>]) -> Result<f64> {
    berwald_residual_with(pair, samples, Basis::Frame)
}

pub fn berwald_residual_with(
    pair: &ConformalPair,
    samples: &[Vec<f64>],
    basis: Basis,
) -> Result<f64> {
    let fields = pair.basis_fields(basis)?;
    let mut worst = 0.0f64;
    for x in samples {
        for y in &fields {
            worst = worst.max(berwald_residual_at(pair, y, x)?);
        }
    }
    Ok(worst)
}

/// `β(W) = g(X, W)` as a Taylor polynomial of order 1 around `x`.
fn pairing(
    model: &GeometryModel,
    a: &VectorFieldExpr,
    w: &VectorFieldExpr,
    x: &[f64],
) -> Result<Taylor> {
    let (_, vars) = riemann::local_vars(x, 1);
    let g = model.metric_with(&vars)?;
    Ok(linalg::bilinear(
        &g,
        &a.eval_with(&vars)?,
        &w.eval_with(&vars)?,
    ))
}

fn along(v: &[f64], t: &Taylor) -> f64 {
    v.iter()
        .enumerate()
        .map(|(j, vj)| vj * t.partial_along(&[j]))
        .sum()
}

/// `dβ(Y, Z) = Yβ(Z) − Zβ(Y) − β([Y, Z])` for `β = g(X, ·)`.
pub fn exterior_derivative(
    model: &GeometryModel,
    field: &VectorFieldExpr,
    y: &VectorFieldExpr,
    z: &VectorFieldExpr,
    x: &[f64],
) -> Result<f64> {
    let g = riemann::metric_at(model, x)?;
    let (yv, zv) = (y.eval(x)?, z.eval(x)?);
    let bz = pairing(model, field, z, x)?;
    let by = pairing(model, field, y, x)?;
    let bracket = riemann::bracket(y, z, x)?;
    Ok(along(&yv, &bz) - along(&zv, &by) - g.inner(&field.eval(x)?, &bracket))
}

/// `dβ(Y, Z) + (Yf)g(X, Z) − (Zf)g(X, Y)`; vanishing on all pairs of fields
/// characterizes Douglas type for conformally changed Randers metrics.
pub fn douglas_residual(
    pair: &ConformalPair,
    y: &VectorFieldExpr,
    z: &VectorFieldExpr,
    x: &[f64],
) -> Result<f64> {
    let g = riemann::metric_at(&pair.base, x)?;
    let xv = pair.field.eval(x)?;
    let d_beta = exterior_derivative(&pair.base, &pair.field, y, z, x)?;
    let yf = riemann::directional_derivative(y, &pair.f, x)?;
    let zf = riemann::directional_derivative(z, &pair.f, x)?;
    Ok(d_beta + yf * g.inner(&xv, &z.eval(x)?) - zf * g.inner(&xv, &y.eval(x)?))
}

/// `dβ̃(Y, Z)` for `β̃ = g̃(X̃, ·)`.
pub fn transformed_exterior_derivative(
    pair: &ConformalPair,
    y: &VectorFieldExpr,
    z: &VectorFieldExpr,
    x: &[f64],
) -> Result<f64> {
    exterior_derivative(&pair.transformed, &pair.transformed_field, y, z, x)
}

/// Largest `|douglas_residual|` over samples and pairs of basis fields.
pub fn douglas_max(pair: &ConformalPair, samples: &[Vec<f64>], basis: Basis) -> Result<f64> {
    let fields = pair.basis_fields(basis)?;
    let mut worst = 0.0f64;
    for x in samples {
        for (i, y) in fields.iter().enumerate() {
            for z in &fields[i + 1..] {
                worst = worst.max(douglas_residual(pair, y, z, x)?.abs());
            }
        }
    }
    Ok(worst)
}

/// Largest `|dβ̃|` over samples and pairs of basis fields.
pub fn transformed_closedness(
    pair: &ConformalPair,
    samples: &[Vec<f64>],
    basis: Basis,
) -> Result<f64> {
    let fields = pair.basis_fields(basis)?;
    let mut worst = 0.0f64;
    for x in samples {
        for (i, y) in fields.iter().enumerate() {
            for z in &fields[i + 1..] {
                worst = worst.max(transformed_exterior_derivative(pair, y, z, x)?.abs());
            }
        }
    }
    Ok(worst)
}

/// The Douglas residuals are established for Randers metrics only.
pub fn require_randers(phi: &PhiFamily) -> Result<()> {
    if phi.kind() != PhiKind::Randers {
        return Err(GeometryError::Unsupported(format!(
            "Douglas criterion is available for Randers metrics only, got {}",
            phi.kind().name()
        )));
    }
    Ok(())
}

/// `max |f_i b_j − f_j b_i|` over samples, after checking that β is closed.
pub fn gradient_proportionality(pair: &ConformalPair, samples: &[Vec<f64>]) -> Result<f64> {
    let coords = coordinate_fields(&pair.base)?;
    let n = pair.base.dim();
    let mut closed = 0.0f64;
    for x in samples {
        for i in 0..n {
            for j in i + 1..n {
                closed = closed.max(
                    exterior_derivative(&pair.base, &pair.field, &coords[i], &coords[j], x)?.abs(),
                );
            }
        }
    }
    if closed > CLOSED_TOL {
        return Err(GeometryError::NotClosed { residual: closed });
    }
    let mut worst = 0.0f64;
    for x in samples {
        let g = riemann::metric_at(&pair.base, x)?;
        let b = g.lower(&pair.field.eval(x)?);
        let jet = pair.f.jet(x, 1)?;
        let df: Vec<f64> = (0..n)
            .map(|k| jet.partial(&[k]).expect("first order"))
            .collect();
        for i in 0..n {
            for j in i + 1..n {
                worst = worst.max((df[i] * b[j] - df[j] * b[i]).abs());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn plane_pair(x: [f64; 2], f: &str) -> ConformalPair {
        let m = GeometryModel::euclidean(2).unwrap();
        let field = VectorFieldExpr::constant(&x, m.coords()).unwrap();
        conformal_transform(&m, &field, &m.expr(f).unwrap()).unwrap()
    }

    #[test]
    fn identity_transform() {
        let pair = plane_pair([1.0, 0.5], "0");
        let x = [0.3, 0.2];
        let (a, b) = pair.norms(&x).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-15);
        assert_eq!(berwald_residual(&pair, &[x.to_vec()]).unwrap(), 0.0);
    }

    #[test]
    fn douglas_by_hand() {
        let pair = plane_pair([1.0, 0.0], "y");
        let c = coordinate_fields(pair.base()).unwrap();
        let r = douglas_residual(&pair, &c[0], &c[1], &[0.4, -0.2]).unwrap();
        assert_relative_eq!(r, -1.0, max_relative = 1e-15);
        let g = gradient_proportionality(&pair, &[vec![0.1, 0.2], vec![1.0, -1.0]]).unwrap();
        assert_relative_eq!(g, 1.0, max_relative = 1e-15);
        let ok = plane_pair([1.0, 0.0], "x^2");
        assert_eq!(
            gradient_proportionality(&ok, &[vec![0.5, 0.5]]).unwrap(),
            0.0
        );
        assert_eq!(
            douglas_max(&ok, &[vec![0.5, 0.5]], Basis::Coordinate).unwrap(),
            0.0
        );
    }

    #[test]
    fn proportionality_needs_closed_form() {
        let m = GeometryModel::euclidean(2).unwrap();
        let rot = m.field(&["-y", "x"]).unwrap();
        let pair = conformal_transform(&m, &rot, &m.expr("0").unwrap()).unwrap();
        assert!(matches!(
            gradient_proportionality(&pair, &[vec![0.0, 0.0]]),
            Err(GeometryError::NotClosed { .. })
        ));
    }

    #[test]
    fn randers_only() {
        assert!(require_randers(&PhiFamily::randers()).is_ok());
        assert!(require_randers(&PhiFamily::matsumoto()).is_err());
    }
}
