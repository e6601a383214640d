//! (α,β)-metrics `F = αφ(b², β/α)` over a Riemannian chart: evaluation,
//! fundamental tensor, spray, Riemann curvature and flag curvature.

mod phi;

pub use phi::{
    phi_admissible, Admissibility, FundamentalCoefficients, PhiFamily, PhiKind, PhiPartials,
    KROPINA_BAND, KROPINA_GRID_START, PHI_VARS,
};

use crate::error::{GeometryError, Result};
use crate::exprcore::{Scalar, ScalarExpr, Taylor, TaylorSpace};
use crate::riemann::{self, linalg, GeometryModel, VectorFieldExpr, DEGENERATE_PLANE_TOL};
use crate::sampling::Sampler;

/// Taylor order for the spray when second derivatives of `G` are needed.
const SPRAY_ORDER_CURVATURE: usize = 4;
/// Taylor order for the spray when third derivatives of `G` are needed.
const SPRAY_ORDER_WITNESS: usize = 5;

/// Residual above which parallelism of β is considered violated.
pub const PARALLEL_TOL: f64 = 1e-8;

/// Residual above which two closed-form evaluations are reported as
/// disagreeing.
pub const ORTHONORMAL_TOL: f64 = 1e-12;

/// Riemannian data of an instance at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointData {
    pub metric: riemann::MetricAt,
    /// `X^i`.
    pub field: Vec<f64>,
    /// `b_i = g_ij X^j`.
    pub b_lower: Vec<f64>,
    /// `b² = g(X, X)`.
    pub b2: f64,
}

/// An (α,β)-metric built from a model, a vector field `X` with
/// `β(y) = g(X, y)`, a profile φ, and an optional conformal factor.
///
/// With a conformal factor `f` the instance stores the transformed data
/// `g̃ = e^{2f}g`, `X̃ = e^{-f}X`, so every method works with `F̃ = e^f F`.
#[derive(Debug, Clone, PartialEq)]
pub struct FinslerInstance {
    geometry: GeometryModel,
    field: VectorFieldExpr,
    phi: PhiFamily,
    conformal: Option<ScalarExpr>,
}

/// Spray coefficients at `(x, y)` together with their Taylor expansion in
/// the `2n` variables `(x, y)`.
#[derive(Debug, Clone)]
pub struct SprayData {
    n: usize,
    values: Vec<f64>,
    jets: Vec<Taylor>,
    valid_order: usize,
}

impl SprayData {
    pub fn coefficients(&self) -> &[f64] {
        &self.values
    }

    /// Highest derivative order available.
    pub fn valid_order(&self) -> usize {
        self.valid_order
    }

    /// Partial of `G^i` along variables indexed `0..n` for `x` and `n..2n`
    /// for `y`.
    pub fn partial(&self, i: usize, vars: &[usize]) -> f64 {
        assert!(
            vars.len() <= self.valid_order,
            "spray derivative above the expansion order"
        );
        self.jets[i].partial_along(vars)
    }

    pub fn dx(&self, i: usize, k: usize) -> f64 {
        self.partial(i, &[k])
    }

    pub fn dy(&self, i: usize, k: usize) -> f64 {
        self.partial(i, &[self.n + k])
    }

    /// `∂²G^i/∂x^j∂y^k`.
    pub fn dxy(&self, i: usize, j: usize, k: usize) -> f64 {
        self.partial(i, &[j, self.n + k])
    }

    /// `∂²G^i/∂y^j∂y^k`.
    pub fn dyy(&self, i: usize, j: usize, k: usize) -> f64 {
        self.partial(i, &[self.n + j, self.n + k])
    }
}

/// Flag curvature from the closed form for parallel β.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormFlag {
    /// The general expression with the Riemannian sectional curvature.
    pub value: f64,
    /// `K^g / (φ²(1 + g(X,u)²D))`, present when `{y, u}` is g-orthonormal.
    pub d_form: Option<f64>,
    pub sectional: f64,
}

impl FinslerInstance {
    pub fn new(geometry: GeometryModel, field: VectorFieldExpr, phi: PhiFamily) -> Result<Self> {
        if field.coords() != geometry.coords() {
            return Err(GeometryError::Dimension {
                what: "vector field chart",
                expected: geometry.dim(),
                found: field.dim(),
            });
        }
        Ok(FinslerInstance {
            geometry,
            field,
            phi,
            conformal: None,
        })
    }

    /// `e^f · αφ(b², β/α)` realized as the (α,β)-metric of `(e^{2f}g, e^{-f}X)`.
    pub fn with_conformal(
        geometry: &GeometryModel,
        field: &VectorFieldExpr,
        phi: PhiFamily,
        f: &ScalarExpr,
    ) -> Result<Self> {
        let mut inst = Self::new(geometry.conformal(f)?, field.scaled_by(&f.neg().exp()), phi)?;
        inst.conformal = Some(f.clone());
        Ok(inst)
    }

    pub fn geometry(&self) -> &GeometryModel {
        &self.geometry
    }

    pub fn field(&self) -> &VectorFieldExpr {
        &self.field
    }

    pub fn phi(&self) -> &PhiFamily {
        &self.phi
    }

    pub fn conformal_factor(&self) -> Option<&ScalarExpr> {
        self.conformal.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.geometry.dim()
    }

    pub fn point_data(&self, x: &[f64]) -> Result<PointData> {
        let metric = riemann::metric_at(&self.geometry, x)?;
        let field = self.field.eval(x)?;
        let b_lower = metric.lower(&field);
        let b2 = linalg::dot(&b_lower, &field);
        Ok(PointData {
            metric,
            field,
            b_lower,
            b2,
        })
    }

    /// `b(x) = ‖X‖_α`, failing when it reaches the validity radius.
    pub fn check_admissible(&self, x: &[f64]) -> Result<f64> {
        let b = self.point_data(x)?.b2.sqrt();
        if b >= self.phi.b0() {
            return Err(GeometryError::Admissibility {
                norm: b,
                b0: self.phi.b0(),
            });
        }
        Ok(b)
    }

    fn check_direction(&self, y: &[f64]) -> Result<()> {
        self.geometry.check_vector("y", y)?;
        if y.iter().all(|&v| v == 0.0) {
            return Err(GeometryError::ZeroVector);
        }
        Ok(())
    }

    /// `F²` over any scalar type, with `x` and `y` as independent inputs.
    fn f_squared_with<T: Scalar>(&self, x: &[T], y: &[T]) -> Result<T> {
        let g = self.geometry.metric_with(x)?;
        let xf = self.field.eval_with(x)?;
        let n = y.len();
        let mut alpha2 = x[0].lift(0.0);
        let mut beta = x[0].lift(0.0);
        let mut b2 = x[0].lift(0.0);
        for i in 0..n {
            for j in 0..n {
                alpha2 = alpha2 + g[i][j].clone() * y[i].clone() * y[j].clone();
                beta = beta + g[i][j].clone() * xf[i].clone() * y[j].clone();
                b2 = b2 + g[i][j].clone() * xf[i].clone() * xf[j].clone();
            }
        }
        let b = b2.value().max(0.0).sqrt();
        if b >= self.phi.b0() {
            return Err(GeometryError::Admissibility {
                norm: b,
                b0: self.phi.b0(),
            });
        }
        let s = beta / alpha2.sqrt();
        if self.phi.is_conic() && !(s.value() >= KROPINA_BAND * b && s.value() > 0.0) {
            return Err(GeometryError::KropinaCone {
                s: s.value(),
                min: KROPINA_BAND * b,
            });
        }
        let phi = self.phi.eval(b2, s)?;
        Ok(alpha2 * phi.clone() * phi)
    }

    /// `F(x, y)`.
    pub fn eval_f(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.geometry.check_point(x)?;
        self.check_direction(y)?;
        Ok(self.f_squared_with(x, y)?.sqrt())
    }

    /// `α`, `s = β/α` and the φ coefficients at `(x, y)`.
    fn flag_data(
        &self,
        x: &[f64],
        y: &[f64],
    ) -> Result<(PointData, f64, f64, FundamentalCoefficients)> {
        self.eval_f(x, y)?;
        let data = self.point_data(x)?;
        let alpha = data.metric.norm(y);
        let s = linalg::dot(&data.b_lower, y) / alpha;
        let coeffs = self.phi.coefficients(data.b2, s)?;
        Ok((data, alpha, s, coeffs))
    }

    /// `g^F_ij = ρg_ij + ρ₀b_ib_j + ρ₁(b_iα_{y^j} + b_jα_{y^i}) − sρ₁α_{y^i}α_{y^j}`.
    pub fn fundamental_tensor_formula(&self, x: &[f64], y: &[f64]) -> Result<Vec<Vec<f64>>> {
        let (data, alpha, s, c) = self.flag_data(x, y)?;
        let alpha_y: Vec<f64> = data.metric.lower(y).iter().map(|v| v / alpha).collect();
        let b = &data.b_lower;
        let n = self.dim();
        Ok((0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        c.rho * data.metric.g[i][j]
                            + c.rho0 * b[i] * b[j]
                            + c.rho1 * (b[i] * alpha_y[j] + b[j] * alpha_y[i])
                            - s * c.rho1 * alpha_y[i] * alpha_y[j]
                    })
                    .collect()
            })
            .collect())
    }

    /// `½ ∂²F²/∂y^i∂y^j` by differentiating `F²` directly.
    pub fn fundamental_tensor_hessian(&self, x: &[f64], y: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.eval_f(x, y)?;
        let n = self.dim();
        let space = TaylorSpace::new(n, 2);
        let xs: Vec<Taylor> = x.iter().map(|&v| Taylor::constant(&space, v)).collect();
        let ys = Taylor::variables(&space, y);
        let e = self.f_squared_with(&xs, &ys)?;
        Ok((0..n)
            .map(|i| (0..n).map(|j| 0.5 * e.partial_along(&[i, j])).collect())
            .collect())
    }

    /// `G^i = ¼ g^{il}([F²]_{x^k y^l} y^k − [F²]_{x^l})` expanded to `order`;
    /// the expansion is exact through `order − 2`.
    fn spray_expansion(&self, x: &[f64], y: &[f64], order: usize) -> Result<SprayData> {
        self.eval_f(x, y)?;
        let n = self.dim();
        let point: Vec<f64> = x.iter().chain(y).copied().collect();
        let space = TaylorSpace::new(2 * n, order);
        let vars = Taylor::variables(&space, &point);
        let e = self.f_squared_with(&vars[..n], &vars[n..])?;
        let ey: Vec<Taylor> = (0..n).map(|l| e.derivative(n + l)).collect();
        let hessian: Vec<Vec<Taylor>> = (0..n)
            .map(|i| (0..n).map(|l| ey[i].derivative(n + l).scale(0.5)).collect())
            .collect();
        let inverse = linalg::invert(&hessian).ok_or(GeometryError::Singular {
            what: "fundamental tensor",
        })?;
        let w: Vec<Taylor> = (0..n)
            .map(|l| {
                (0..n).fold(-e.derivative(l), |acc, k| {
                    acc + ey[l].derivative(k) * vars[n + k].clone()
                })
            })
            .collect();
        let jets: Vec<Taylor> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|l| inverse[i][l].clone() * w[l].clone())
                    .reduce(|a, b| a + b)
                    .expect("n >= 2")
                    .scale(0.25)
            })
            .collect();
        Ok(SprayData {
            n,
            values: jets.iter().map(Taylor::value).collect(),
            jets,
            valid_order: order - 2,
        })
    }

    /// Spray coefficients with derivatives through second order.
    pub fn spray(&self, x: &[f64], y: &[f64]) -> Result<SprayData> {
        self.spray_expansion(x, y, SPRAY_ORDER_CURVATURE)
    }

    fn riemann_from_spray(sp: &SprayData, y: &[f64]) -> Vec<Vec<f64>> {
        let n = sp.n;
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|k| {
                        let mut r = 2.0 * sp.dx(i, k);
                        for j in 0..n {
                            r -= y[j] * sp.dxy(i, j, k);
                            r += 2.0 * sp.values[j] * sp.dyy(i, j, k);
                            r -= sp.dy(i, j) * sp.dy(j, k);
                        }
                        r
                    })
                    .collect()
            })
            .collect()
    }

    /// Riemann curvature `R^i_k` of the spray.
    pub fn riemann_spray(&self, x: &[f64], y: &[f64]) -> Result<Vec<Vec<f64>>> {
        Ok(Self::riemann_from_spray(&self.spray(x, y)?, y))
    }

    /// `R_ij u^i u^j / (F² g^F(u,u) − g^F(y,u)²)` with `R_ij = g^F_im R^m_j`.
    pub fn flag_curvature_spray(&self, x: &[f64], y: &[f64], u: &[f64]) -> Result<f64> {
        self.geometry.check_vector("u", u)?;
        let r = self.riemann_spray(x, y)?;
        let gf = self.fundamental_tensor_hessian(x, y)?;
        let denominator = flag_denominator(&gf, y, u)?;
        let ru = linalg::mat_vec(&r, u);
        Ok(linalg::bilinear(&gf, u, &ru) / denominator)
    }

    /// Closed-form flag curvature for parallel β. Refuses when β is not
    /// parallel at `x` or `b²` is not stationary there.
    pub fn flag_curvature_closed_form(
        &self,
        x: &[f64],
        y: &[f64],
        u: &[f64],
    ) -> Result<ClosedFormFlag> {
        self.geometry.check_vector("u", u)?;
        let parallel = riemann::parallel_residual_at(&self.geometry, &self.field, x)?;
        let b2_drift = self
            .b_squared_gradient(x)?
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        if parallel > PARALLEL_TOL || b2_drift > PARALLEL_TOL {
            return Err(GeometryError::NotParallel {
                residual: parallel.max(b2_drift),
            });
        }
        let (data, alpha, s, c) = self.flag_data(x, y)?;
        let gf = self.fundamental_tensor_formula(x, y)?;
        let denominator = flag_denominator(&gf, y, u)?;
        let sectional = riemann::sectional_curvature(&self.geometry, x, u, y)?;
        let g = &data.metric;
        let numerator = alpha * alpha * g.inner(u, u) - g.inner(y, u).powi(2);
        let value = numerator / denominator * c.rho * sectional;
        let orthonormal = (g.inner(y, y) - 1.0).abs() <= ORTHONORMAL_TOL
            && (g.inner(u, u) - 1.0).abs() <= ORTHONORMAL_TOL
            && g.inner(y, u).abs() <= ORTHONORMAL_TOL;
        let d_form = orthonormal.then(|| {
            let phi = self
                .phi
                .partials(data.b2, s)
                .expect("φ evaluated above")
                .phi;
            let xu = linalg::dot(&data.b_lower, u);
            sectional / (phi * phi * (1.0 + xu * xu * c.d))
        });
        Ok(ClosedFormFlag {
            value,
            d_form,
            sectional,
        })
    }

    /// `∂_k b²` at `x`.
    pub fn b_squared_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.geometry.check_point(x)?;
        let (_, vars) = riemann::local_vars(x, 1);
        let g = self.geometry.metric_with(&vars)?;
        let xf = self.field.eval_with(&vars)?;
        let b2 = linalg::bilinear(&g, &xf, &xf);
        Ok((0..x.len()).map(|k| b2.partial_along(&[k])).collect())
    }

    /// `max |∂³G^i/∂y^j∂y^k∂y^l|` at `(x, y)`; zero exactly when the spray
    /// is quadratic in `y` near `y`.
    pub fn berwald_witness_at(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let sp = self.spray_expansion(x, y, SPRAY_ORDER_WITNESS)?;
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in j..n {
                    for l in k..n {
                        worst = worst.max(sp.partial(i, &[n + j, n + k, n + l]).abs());
                    }
                }
            }
        }
        Ok(worst)
    }

    /// A direction at `x` on which `F` is defined, drawn from `sampler`.
    pub fn sample_direction(&self, sampler: &mut Sampler, x: &[f64]) -> Result<Vec<f64>> {
        let mut last = GeometryError::Sampling {
            wanted: 1,
            found: 0,
        };
        for _ in 0..1000 {
            let y = sampler.vector(self.dim());
            match self.eval_f(x, &y) {
                Ok(_) => return Ok(y),
                Err(e @ GeometryError::KropinaCone { .. }) => last = e,
                Err(e) => return Err(e),
            }
        }
        Err(last)
    }

    /// `count` seeded `(x, y)` pairs on which `F` is defined.
    pub fn sample_flags(&self, count: usize, seed: u64) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
        let mut sampler = Sampler::new(seed);
        (0..count)
            .map(|_| {
                let x = sampler.point(&self.geometry)?;
                let y = self.sample_direction(&mut sampler, &x)?;
                Ok((x, y))
            })
            .collect()
    }
}

/// `F²g^F(u,u) − g^F(y,u)²` with `F² = g^F(y,y)`.
fn flag_denominator(gf: &[Vec<f64>], y: &[f64], u: &[f64]) -> Result<f64> {
    let denominator = linalg::bilinear(gf, y, y) * linalg::bilinear(gf, u, u)
        - linalg::bilinear(gf, y, u).powi(2);
    if denominator.abs() < DEGENERATE_PLANE_TOL {
        return Err(GeometryError::DegenerateFlag { denominator });
    }
    Ok(denominator)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn euclid_randers(bx: f64) -> FinslerInstance {
        let m = GeometryModel::euclidean(2).unwrap();
        let x = VectorFieldExpr::constant(&[bx, 0.0], m.coords()).unwrap();
        FinslerInstance::new(m, x, PhiFamily::randers()).unwrap()
    }

    #[test]
    fn randers_values() {
        let inst = euclid_randers(0.5);
        assert_relative_eq!(
            inst.eval_f(&[0.3, 0.1], &[1.0, 0.0]).unwrap(),
            1.5,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            inst.eval_f(&[0.3, 0.1], &[0.0, 1.0]).unwrap(),
            1.0,
            max_relative = 1e-15
        );
        assert!(matches!(
            inst.eval_f(&[0.0, 0.0], &[0.0, 0.0]),
            Err(GeometryError::ZeroVector)
        ));
        assert!(matches!(
            euclid_randers(1.5).eval_f(&[0.0, 0.0], &[1.0, 0.0]),
            Err(GeometryError::Admissibility { .. })
        ));
    }

    #[test]
    fn tensor_two_ways() {
        let inst = euclid_randers(0.4);
        let (x, y) = ([0.0, 0.0], [0.3, -0.8]);
        let a = inst.fundamental_tensor_formula(&x, &y).unwrap();
        let b = inst.fundamental_tensor_hessian(&x, &y).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(a[i][j], b[i][j], max_relative = 1e-12);
            }
        }
        assert_relative_eq!(
            linalg::bilinear(&a, &y, &y),
            inst.eval_f(&x, &y).unwrap().powi(2),
            max_relative = 1e-14
        );
    }

    #[test]
    fn flat_parallel_spray_vanishes() {
        let inst = euclid_randers(0.4);
        let sp = inst.spray(&[0.1, 0.2], &[0.5, 0.7]).unwrap();
        assert!(sp.coefficients().iter().all(|g| g.abs() < 1e-15));
        assert!(inst.berwald_witness_at(&[0.1, 0.2], &[0.5, 0.7]).unwrap() < 1e-14);
        let r = inst.riemann_spray(&[0.1, 0.2], &[0.5, 0.7]).unwrap();
        assert!(r.iter().flatten().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn kropina_cone() {
        let m = GeometryModel::euclidean(2).unwrap();
        let x = VectorFieldExpr::constant(&[0.5, 0.0], m.coords()).unwrap();
        let inst = FinslerInstance::new(m, x, PhiFamily::kropina()).unwrap();
        assert_relative_eq!(
            inst.eval_f(&[0.0, 0.0], &[1.0, 1.0]).unwrap(),
            4.0,
            max_relative = 1e-14
        );
        assert!(matches!(
            inst.eval_f(&[0.0, 0.0], &[-1.0, 1.0]),
            Err(GeometryError::KropinaCone { .. })
        ));
        let mut sampler = Sampler::new(3);
        let y = inst.sample_direction(&mut sampler, &[0.0, 0.0]).unwrap();
        assert!(y[0] > 0.0);
    }

    #[test]
    fn closed_form_refuses_non_parallel() {
        let m = GeometryModel::from_frame("h2", &["x", "y"], &[vec!["0", "y"], vec!["y", "0"]])
            .unwrap()
            .with_domain(&["y > 0"])
            .unwrap();
        let e1 = m.frame_combination(&[0.5, 0.0]).unwrap();
        let inst = FinslerInstance::new(m, e1, PhiFamily::randers()).unwrap();
        assert!(matches!(
            inst.flag_curvature_closed_form(&[0.0, 1.0], &[1.0, 0.0], &[0.0, 1.0]),
            Err(GeometryError::NotParallel { .. })
        ));
    }
}
