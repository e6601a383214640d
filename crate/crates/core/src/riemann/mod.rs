//! Riemannian geometry on a single chart: metric, Levi-Civita connection,
//! curvature, gradients and the Riemannian spray.
//!
//! Curvature convention: `R(u,v)w = ∇_u∇_v w − ∇_v∇_u w − ∇_[u,v] w`, with
//! components `R(∂_k, ∂_l)∂_j = R^i_jkl ∂_i`. Under this convention the
//! hyperbolic plane has sectional curvature −1.

pub mod linalg;
mod model;

use std::sync::Arc;

pub use model::{
    Comparison, Constraint, Frame, GeometryModel, MetricSource, Multiplication, VectorFieldExpr,
};

use crate::error::{GeometryError, Result};
use crate::exprcore::{Jet, Scalar, ScalarExpr, Taylor, TaylorSpace};

/// Absolute floor for plane denominators `g(u,u)g(v,v) − g(u,v)²`.
pub const DEGENERATE_PLANE_TOL: f64 = 1e-12;

pub(crate) fn local_vars(x: &[f64], order: usize) -> (Arc<TaylorSpace>, Vec<Taylor>) {
    let space = TaylorSpace::new(x.len(), order);
    let vars = Taylor::variables(&space, x);
    (space, vars)
}

/// The metric and its inverse at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricAt {
    pub g: Vec<Vec<f64>>,
    pub inverse: Vec<Vec<f64>>,
}

impl MetricAt {
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        linalg::bilinear(&self.g, u, v)
    }

    pub fn norm(&self, u: &[f64]) -> f64 {
        self.inner(u, u).max(0.0).sqrt()
    }

    /// Index lowering `u_i = g_ij u^j`.
    pub fn lower(&self, u: &[f64]) -> Vec<f64> {
        linalg::mat_vec(&self.g, u)
    }

    /// Index raising `w^i = g^ij w_j`.
    pub fn raise(&self, w: &[f64]) -> Vec<f64> {
        linalg::mat_vec(&self.inverse, w)
    }
}

/// Metric and inverse at `x`, after checking the domain and positive
/// definiteness (all leading principal minors positive).
pub fn metric_at(model: &GeometryModel, x: &[f64]) -> Result<MetricAt> {
    model.check_point(x)?;
    let g = model.metric_with(x)?;
    if linalg::leading_minors(&g).iter().any(|&m| !(m > 0.0)) {
        return Err(GeometryError::NotPositiveDefinite { point: x.to_vec() });
    }
    let inverse = linalg::invert(&g).ok_or(GeometryError::Singular { what: "metric" })?;
    Ok(MetricAt { g, inverse })
}

/// Entrywise jets of `g_ij` through total order `order` at `x`.
pub fn metric_jets(model: &GeometryModel, x: &[f64], order: usize) -> Result<Vec<Vec<Jet>>> {
    model.check_point(x)?;
    if order > crate::exprcore::MAX_JET_ORDER {
        return Err(crate::exprcore::ExprError::OrderTooHigh {
            requested: order,
            max: crate::exprcore::MAX_JET_ORDER,
        }
        .into());
    }
    let (_, vars) = local_vars(x, order);
    let g = model.metric_with(&vars)?;
    Ok(g.iter()
        .map(|row| row.iter().map(|t| Jet::from_taylor(x, t)).collect())
        .collect())
}

/// Christoffel symbols `Γ^i_jk` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    n: usize,
    values: Vec<f64>,
}

impl Christoffel {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[(i * self.n + j) * self.n + k]
    }

    /// `Γ^i_jk a^j b^k`.
    pub fn contract(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let mut s = 0.0;
                for j in 0..self.n {
                    for k in 0..self.n {
                        s += self.get(i, j, k) * a[j] * b[k];
                    }
                }
                s
            })
            .collect()
    }
}

/// Christoffel symbols as Taylor polynomials valid through `order`,
/// indexed `(i * n + j) * n + k`.
pub(crate) fn christoffel_taylor(
    model: &GeometryModel,
    x: &[f64],
    order: usize,
) -> Result<Vec<Taylor>> {
    let n = model.dim();
    let (_, vars) = local_vars(x, order + 1);
    let g = model.metric_with(&vars)?;
    let ginv = linalg::invert(&g).ok_or(GeometryError::Singular { what: "metric" })?;
    // dg[l][i][j] = ∂_l g_ij
    let dg: Vec<Vec<Vec<Taylor>>> = (0..n)
        .map(|l| {
            g.iter()
                .map(|row| row.iter().map(|t| t.derivative(l)).collect())
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut acc = vars[0].lift(0.0);
                for l in 0..n {
                    let lowered = dg[j][l][k].clone() + dg[k][j][l].clone() - dg[l][j][k].clone();
                    acc = acc + ginv[i][l].clone() * lowered;
                }
                out.push(acc.scale(0.5));
            }
        }
    }
    Ok(out)
}

/// `Γ^i_jk = ½ g^il (∂_j g_lk + ∂_k g_jl − ∂_l g_jk)` at `x`.
pub fn christoffel(model: &GeometryModel, x: &[f64]) -> Result<Christoffel> {
    metric_at(model, x)?;
    let values = christoffel_taylor(model, x, 0)?
        .iter()
        .map(Taylor::value)
        .collect();
    Ok(Christoffel {
        n: model.dim(),
        values,
    })
}

/// `Y(h) = Y^j ∂_j h` at `x`.
pub fn directional_derivative(y: &VectorFieldExpr, h: &ScalarExpr, x: &[f64]) -> Result<f64> {
    let yv = y.eval(x)?;
    let jet = h.jet(x, 1)?;
    Ok((0..x.len())
        .map(|j| yv[j] * jet.partial(&[j]).expect("first order"))
        .sum())
}

/// Lie bracket `[Y, Z]^k = Y^l ∂_l Z^k − Z^l ∂_l Y^k` at `x`.
pub fn bracket(y: &VectorFieldExpr, z: &VectorFieldExpr, x: &[f64]) -> Result<Vec<f64>> {
    let (_, vars) = local_vars(x, 1);
    let yt = y.eval_with(&vars)?;
    let zt = z.eval_with(&vars)?;
    let n = x.len();
    Ok((0..n)
        .map(|k| {
            (0..n)
                .map(|l| {
                    yt[l].value() * zt[k].partial_along(&[l])
                        - zt[l].value() * yt[k].partial_along(&[l])
                })
                .sum()
        })
        .collect())
}

/// `(∇_Y X)^i = Y^j ∂_j X^i + Γ^i_jk Y^j X^k` at `x`.
pub fn covariant_derivative(
    model: &GeometryModel,
    y: &VectorFieldExpr,
    x_field: &VectorFieldExpr,
    x: &[f64],
) -> Result<Vec<f64>> {
    let gamma = christoffel(model, x)?;
    let yv = y.eval(x)?;
    let (_, vars) = local_vars(x, 1);
    let xt = x_field.eval_with(&vars)?;
    let xv: Vec<f64> = xt.iter().map(Taylor::value).collect();
    let n = model.dim();
    let turn = gamma.contract(&yv, &xv);
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| yv[j] * xt[i].partial_along(&[j]))
                .sum::<f64>()
                + turn[i]
        })
        .collect())
}

/// The curvature tensor `R^i_jkl` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct RiemannTensor {
    n: usize,
    values: Vec<f64>,
}

impl RiemannTensor {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.n;
        self.values[((i * n + j) * n + k) * n + l]
    }

    /// `R(u, v)w`.
    pub fn apply(&self, u: &[f64], v: &[f64], w: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut s = 0.0;
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            s += self.get(i, j, k, l) * w[j] * u[k] * v[l];
                        }
                    }
                }
                s
            })
            .collect()
    }
}

/// `R^i_jkl = ∂_k Γ^i_lj − ∂_l Γ^i_kj + Γ^i_km Γ^m_lj − Γ^i_lm Γ^m_kj`.
pub fn riemann_tensor(model: &GeometryModel, x: &[f64]) -> Result<RiemannTensor> {
    metric_at(model, x)?;
    let n = model.dim();
    let gt = christoffel_taylor(model, x, 1)?;
    let at = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
    let gamma = |i, j, k| gt[at(i, j, k)].value();
    let dgamma = |i, j, k, l: usize| gt[at(i, j, k)].partial_along(&[l]);
    let mut values = Vec::with_capacity(n.pow(4));
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut r = dgamma(i, l, j, k) - dgamma(i, k, j, l);
                    for m in 0..n {
                        r += gamma(i, k, m) * gamma(m, l, j) - gamma(i, l, m) * gamma(m, k, j);
                    }
                    values.push(r);
                }
            }
        }
    }
    Ok(RiemannTensor { n, values })
}

/// Sectional curvature `g(R(u,v)v, u) / (g(u,u)g(v,v) − g(u,v)²)`.
pub fn sectional_curvature(model: &GeometryModel, x: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
    model.check_vector("u", u)?;
    model.check_vector("v", v)?;
    let metric = metric_at(model, x)?;
    let denominator = metric.inner(u, u) * metric.inner(v, v) - metric.inner(u, v).powi(2);
    if denominator.abs() < DEGENERATE_PLANE_TOL {
        return Err(GeometryError::DegenerateFlag { denominator });
    }
    let r = riemann_tensor(model, x)?;
    Ok(metric.inner(&r.apply(u, v, v), u) / denominator)
}

/// Riemannian gradient `(∇f)^i = g^ij ∂_j f`.
pub fn gradient(model: &GeometryModel, f: &ScalarExpr, x: &[f64]) -> Result<Vec<f64>> {
    let metric = metric_at(model, x)?;
    let jet = f.jet(x, 1)?;
    let df: Vec<f64> = (0..x.len())
        .map(|j| jet.partial(&[j]).expect("first order"))
        .collect();
    Ok(metric.raise(&df))
}

/// Geodesic spray coefficients `G^i = ½ Γ^i_jk y^j y^k`.
pub fn spray_alpha(model: &GeometryModel, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    model.check_vector("y", y)?;
    if y.iter().all(|&v| v == 0.0) {
        return Err(GeometryError::ZeroVector);
    }
    let gamma = christoffel(model, x)?;
    Ok(gamma.contract(y, y).into_iter().map(|v| 0.5 * v).collect())
}

/// Max over `i, j` of `|b_i;j|` at `x`, where `b_i = g_ij X^j` and
/// `b_i;j = ∂_j b_i − Γ^k_ij b_k`.
pub fn parallel_residual_at(
    model: &GeometryModel,
    field: &VectorFieldExpr,
    x: &[f64],
) -> Result<f64> {
    let gamma = christoffel(model, x)?;
    let n = model.dim();
    let (_, vars) = local_vars(x, 1);
    let g = model.metric_with(&vars)?;
    let xt = field.eval_with(&vars)?;
    let b: Vec<Taylor> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| g[i][j].clone() * xt[j].clone())
                .reduce(|p, q| p + q)
                .expect("n >= 2")
        })
        .collect();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let turn: f64 = (0..n).map(|k| gamma.get(k, i, j) * b[k].value()).sum();
            worst = worst.max((b[i].partial_along(&[j]) - turn).abs());
        }
    }
    Ok(worst)
}

/// Largest parallelism residual over the sample points; 0 exactly when the
/// 1-form dual to `field` is parallel on the samples.
pub fn is_parallel(
    model: &GeometryModel,
    field: &VectorFieldExpr,
    samples: &[Vec<f64>],
) -> Result<f64> {
    samples.iter().try_fold(0.0f64, |acc, x| {
        Ok(acc.max(parallel_residual_at(model, field, x)?))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sol2() -> GeometryModel {
        GeometryModel::from_components(
            "sol2",
            &["x", "y"],
            &[vec!["1/y^2", "0"], vec!["0", "1/y^2"]],
        )
        .unwrap()
        .with_domain(&["y > 0"])
        .unwrap()
    }

    #[test]
    fn euclidean_is_flat() {
        let m = GeometryModel::euclidean(3).unwrap();
        let x = [0.3, -1.0, 2.0];
        assert_eq!(metric_at(&m, &x).unwrap().g[1], vec![0.0, 1.0, 0.0]);
        let gamma = christoffel(&m, &x).unwrap();
        assert!(gamma.values.iter().all(|&v| v == 0.0));
        let k = sectional_curvature(&m, &x, &[1.0, 0.0, 0.0], &[0.0, 1.0, 1.0]).unwrap();
        assert_eq!(k, 0.0);
        assert_eq!(spray_alpha(&m, &x, &[1.0, 2.0, 3.0]).unwrap(), vec![0.0; 3]);
        let f = m.expr("x").unwrap();
        assert_eq!(gradient(&m, &f, &x).unwrap(), vec![1.0, 0.0, 0.0]);
        let c = VectorFieldExpr::constant(&[1.0, 2.0, 0.5], m.coords()).unwrap();
        assert_eq!(parallel_residual_at(&m, &c, &x).unwrap(), 0.0);
    }

    #[test]
    fn hyperbolic_plane_values() {
        let m = sol2();
        let x = [0.7, 1.5];
        let k = sectional_curvature(&m, &x, &[1.0, 0.0], &[0.2, 1.0]).unwrap();
        assert_relative_eq!(k, -1.0, max_relative = 1e-12);
        // Γ^y_xx = 1/y, Γ^x_xy = -1/y, Γ^y_yy = -1/y
        let gamma = christoffel(&m, &x).unwrap();
        assert_relative_eq!(gamma.get(1, 0, 0), 1.0 / 1.5, max_relative = 1e-14);
        assert_relative_eq!(gamma.get(0, 0, 1), -1.0 / 1.5, max_relative = 1e-14);
        assert_relative_eq!(gamma.get(1, 1, 1), -1.0 / 1.5, max_relative = 1e-14);
        let g = spray_alpha(&m, &[0.0, 1.0], &[1.0, 0.0]).unwrap();
        assert_relative_eq!(g[1], 0.5, max_relative = 1e-14);
        assert_eq!(g[0], 0.0);
    }

    #[test]
    fn error_paths() {
        let m = sol2();
        assert!(matches!(
            metric_at(&m, &[0.0, -1.0]),
            Err(GeometryError::OutsideDomain { .. })
        ));
        assert!(matches!(
            metric_at(&m, &[0.0]),
            Err(GeometryError::Dimension { .. })
        ));
        assert!(matches!(
            sectional_curvature(&m, &[0.0, 1.0], &[1.0, 0.0], &[2.0, 0.0]),
            Err(GeometryError::DegenerateFlag { .. })
        ));
        assert!(matches!(
            spray_alpha(&m, &[0.0, 1.0], &[0.0, 0.0]),
            Err(GeometryError::ZeroVector)
        ));
        let indefinite =
            GeometryModel::from_components("bad", &["x", "y"], &[vec!["1", "0"], vec!["0", "-1"]])
                .unwrap();
        assert!(matches!(
            metric_at(&indefinite, &[0.0, 0.0]),
            Err(GeometryError::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn frame_defined_metric_matches_components() {
        let framed =
            GeometryModel::from_frame("sol2f", &["x", "y"], &[vec!["0", "y"], vec!["y", "0"]])
                .unwrap();
        let m = sol2();
        for x in [[0.1, 0.5], [-1.0, 2.5]] {
            let a = metric_at(&framed, &x).unwrap().g;
            let b = metric_at(&m, &x).unwrap().g;
            for i in 0..2 {
                for j in 0..2 {
                    assert_relative_eq!(a[i][j], b[i][j], max_relative = 1e-14);
                }
            }
        }
    }
}
