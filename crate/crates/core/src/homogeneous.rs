//! Left-invariant data on three built-in Lie groups: the Heisenberg group
//! and the solvable groups `ℝ⋊ℝ⁺` and `ℝ²⋊ℝ⁺`.

use crate::conformal::{self, ConformalPair};
use crate::error::{GeometryError, Result};
use crate::exprcore::ScalarExpr;
use crate::riemann::{self, linalg, GeometryModel, VectorFieldExpr};

/// Names accepted by [`builtin_model`].
pub const BUILTIN_MODELS: [&str; 3] = ["heisenberg", "sol2", "sol3"];

/// `[e_i, e_j] = Σ_k coefficients[k] e_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeclaredBracket {
    pub i: usize,
    pub j: usize,
    pub coefficients: Vec<f64>,
}

/// A group chart with an orthonormal left-invariant frame and its declared
/// structure constants.
#[derive(Debug, Clone, PartialEq)]
pub struct LieModel {
    pub geometry: GeometryModel,
    pub brackets: Vec<DeclaredBracket>,
}

impl LieModel {
    pub fn name(&self) -> &str {
        self.geometry.name()
    }

    /// Declared structure constants of `[e_i, e_j]` (zero when undeclared).
    pub fn structure(&self, i: usize, j: usize) -> Vec<f64> {
        let n = self.geometry.dim();
        for b in &self.brackets {
            if (b.i, b.j) == (i, j) {
                return b.coefficients.clone();
            }
            if (b.j, b.i) == (i, j) {
                return b.coefficients.iter().map(|c| -c).collect();
            }
        }
        vec![0.0; n]
    }
}

/// A left-invariant field `Σ c_a e_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantField {
    pub coefficients: Vec<f64>,
}

impl InvariantField {
    pub fn new(coefficients: Vec<f64>) -> Self {
        InvariantField { coefficients }
    }

    pub fn to_field(&self, model: &GeometryModel) -> Result<VectorFieldExpr> {
        if self.coefficients.len() != model.dim() {
            return Err(GeometryError::Dimension {
                what: "frame coefficients",
                expected: model.dim(),
                found: self.coefficients.len(),
            });
        }
        model.frame_combination(&self.coefficients)
    }
}

fn bracket(i: usize, j: usize, coefficients: &[f64]) -> DeclaredBracket {
    DeclaredBracket {
        i,
        j,
        coefficients: coefficients.to_vec(),
    }
}

pub fn builtin_model(name: &str) -> Result<LieModel> {
    match name {
        "heisenberg" => Ok(LieModel {
            geometry: GeometryModel::from_components(
                "heisenberg",
                &["x", "y", "z"],
                &[
                    vec!["1 + y^2/4", "-x*y/4", "y/2"],
                    vec!["-x*y/4", "1 + x^2/4", "-x/2"],
                    vec!["y/2", "-x/2", "1"],
                ],
            )?
            .with_frame(
                &[
                    vec!["1", "0", "-y/2"],
                    vec!["0", "1", "x/2"],
                    vec!["0", "0", "1"],
                ],
                true,
            )?
            .with_multiplication(
                &["x' + x", "y' + y", "z' + z + (1/2)*y*x' - (1/2)*y'*x"],
                vec![0.0; 3],
            )?,
            brackets: vec![bracket(0, 1, &[0.0, 0.0, 1.0])],
        }),
        "sol2" => Ok(LieModel {
            geometry: GeometryModel::from_components(
                "sol2",
                &["x", "y"],
                &[vec!["1/y^2", "0"], vec!["0", "1/y^2"]],
            )?
            .with_frame(&[vec!["0", "y"], vec!["y", "0"]], true)?
            .with_domain(&["y > 0"])?
            .with_sample_box(vec![(-2.0, 2.0), (0.25, 3.0)])?,
            brackets: vec![bracket(0, 1, &[0.0, 1.0])],
        }),
        "sol3" => Ok(LieModel {
            geometry: GeometryModel::from_components(
                "sol3",
                &["x", "y", "z"],
                &[
                    vec!["1/z^2", "0", "0"],
                    vec!["0", "1/z^2", "0"],
                    vec!["0", "0", "1/z^2"],
                ],
            )?
            .with_frame(
                &[
                    vec!["0", "0", "z"],
                    vec!["z", "0", "0"],
                    vec!["0", "z", "0"],
                ],
                true,
            )?
            .with_domain(&["z > 0"])?
            .with_sample_box(vec![(-2.0, 2.0), (-2.0, 2.0), (0.25, 3.0)])?,
            brackets: vec![
                bracket(0, 1, &[0.0, 1.0, 0.0]),
                bracket(0, 2, &[0.0, 0.0, 1.0]),
            ],
        }),
        other => Err(GeometryError::UnknownModel(other.to_string())),
    }
}

/// `[e_i, e_j]` at `x` in coordinates.
pub fn lie_bracket(model: &GeometryModel, i: usize, j: usize, x: &[f64]) -> Result<Vec<f64>> {
    model.check_point(x)?;
    let frame = model.frame_fields()?;
    riemann::bracket(&frame[i], &frame[j], x)
}

/// Coefficients of the coordinate vector `v` in the frame at `x`.
pub fn frame_components(model: &GeometryModel, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let frame = model.frame_fields()?;
    let n = model.dim();
    let values: Vec<Vec<f64>> = frame.iter().map(|e| e.eval(x)).collect::<Result<_>>()?;
    let e: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|a| values[a][i]).collect())
        .collect();
    let inverse = linalg::invert(&e).ok_or(GeometryError::Singular { what: "frame" })?;
    Ok(linalg::mat_vec(&inverse, v))
}

/// Largest deviation between computed and declared brackets, in frame
/// coefficients, over all frame pairs and samples.
pub fn bracket_residual(lie: &LieModel, samples: &[Vec<f64>]) -> Result<f64> {
    let n = lie.geometry.dim();
    let mut worst = 0.0f64;
    for x in samples {
        for i in 0..n {
            for j in 0..n {
                let computed =
                    frame_components(&lie.geometry, x, &lie_bracket(&lie.geometry, i, j, x)?)?;
                let declared = lie.structure(i, j);
                for (c, d) in computed.iter().zip(&declared) {
                    worst = worst.max((c - d).abs());
                }
            }
        }
    }
    Ok(worst)
}

/// Largest `|g(e_a, e_b) − δ_ab|` over samples.
pub fn frame_orthonormality(model: &GeometryModel, samples: &[Vec<f64>]) -> Result<f64> {
    let frame = model.frame_fields()?;
    let mut worst = 0.0f64;
    for x in samples {
        let g = riemann::metric_at(model, x)?;
        let values: Vec<Vec<f64>> = frame.iter().map(|e| e.eval(x)).collect::<Result<_>>()?;
        for (a, ea) in values.iter().enumerate() {
            for (b, eb) in values.iter().enumerate() {
                let delta = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((g.inner(ea, eb) - delta).abs());
            }
        }
    }
    Ok(worst)
}

/// For each pair `(a, p)`: compares `g_{ap}(dL_a u, dL_a v)` with
/// `g_p(u, v)` on frame vectors and `dL_a e_i(p)` with `e_i(ap)`.
/// Returns the largest deviation.
pub fn left_invariance_check(model: &GeometryModel, pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<f64> {
    let law = model
        .multiplication()
        .ok_or(GeometryError::Missing("multiplication"))?;
    let frame = model.frame_fields()?;
    let mut worst = 0.0f64;
    for (a, p) in pairs {
        let q = law.apply(a, p)?;
        let jac = law.left_differential(a, p)?;
        let gp = riemann::metric_at(model, p)?;
        let gq = riemann::metric_at(model, &q)?;
        let at_p: Vec<Vec<f64>> = frame.iter().map(|e| e.eval(p)).collect::<Result<_>>()?;
        let pushed: Vec<Vec<f64>> = at_p.iter().map(|v| linalg::mat_vec(&jac, v)).collect();
        for (e, moved) in frame.iter().zip(&pushed) {
            for (m, t) in moved.iter().zip(e.eval(&q)?) {
                worst = worst.max((m - t).abs());
            }
        }
        for i in 0..at_p.len() {
            for j in 0..at_p.len() {
                let before = gp.inner(&at_p[i], &at_p[j]);
                let after = gq.inner(&pushed[i], &pushed[j]);
                worst = worst.max((before - after).abs());
            }
        }
    }
    Ok(worst)
}

/// `b²` at the first sample and the largest deviation from it elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BSquared {
    pub base: f64,
    pub deviation: f64,
}

pub fn b_squared_constancy(
    model: &GeometryModel,
    field: &VectorFieldExpr,
    samples: &[Vec<f64>],
) -> Result<BSquared> {
    let mut values = samples.iter().map(|x| -> Result<f64> {
        let g = riemann::metric_at(model, x)?;
        let v = field.eval(x)?;
        Ok(g.inner(&v, &v))
    });
    let base = values.next().ok_or(GeometryError::Sampling {
        wanted: 1,
        found: 0,
    })??;
    let mut deviation = 0.0f64;
    for v in values {
        deviation = deviation.max((v? - base).abs());
    }
    Ok(BSquared { base, deviation })
}

/// Douglas residuals of one frame pair `(Y, Z) = (e_i, e_j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FramePairResidual {
    pub i: usize,
    pub j: usize,
    /// `g(X, [Z, Y]) + (Yf)g(X, Z) − (Zf)g(X, Y)`.
    pub frame_level: f64,
    /// Same with `g(X, [Y, Z])` in place of `g(X, [Z, Y])`.
    pub opposite_sign: f64,
    /// Chart-level residual with the three-term exterior derivative.
    pub chart_level: f64,
}

/// Frame-level and chart-level Douglas residuals on every pair `i < j`.
pub fn left_invariant_douglas_residual(
    model: &GeometryModel,
    field: &InvariantField,
    f: &ScalarExpr,
    x: &[f64],
) -> Result<Vec<FramePairResidual>> {
    let frame = model.frame_fields()?;
    let xf = field.to_field(model)?;
    let pair: ConformalPair = conformal::conformal_transform(model, &xf, f)?;
    let g = riemann::metric_at(model, x)?;
    let xv = xf.eval(x)?;
    let values: Vec<Vec<f64>> = frame.iter().map(|e| e.eval(x)).collect::<Result<_>>()?;
    let ef: Vec<f64> = frame
        .iter()
        .map(|e| riemann::directional_derivative(e, f, x))
        .collect::<Result<_>>()?;
    let n = model.dim();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let yz = riemann::bracket(&frame[i], &frame[j], x)?;
            let g_x_yz = g.inner(&xv, &yz);
            let rest = ef[i] * g.inner(&xv, &values[j]) - ef[j] * g.inner(&xv, &values[i]);
            out.push(FramePairResidual {
                i,
                j,
                frame_level: -g_x_yz + rest,
                opposite_sign: g_x_yz + rest,
                chart_level: conformal::douglas_residual(&pair, &frame[i], &frame[j], x)?,
            });
        }
    }
    Ok(out)
}

/// Whether a named residual transcribes a published condition or was
/// re-derived from the exterior-derivative formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualSource {
    Published,
    Derived,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedResidual {
    pub name: String,
    pub value: f64,
    pub source: ResidualSource,
}

fn named(name: &str, value: f64, source: ResidualSource) -> NamedResidual {
    NamedResidual {
        name: name.to_string(),
        value,
        source,
    }
}

/// The per-group PDE conditions for Douglas type of `e^f(α + β)` with
/// `X = Σ c_a e_a`, as left-hand side minus right-hand side at `x`.
///
/// On the Heisenberg group two of the published equations differ from the
/// exterior-derivative computation in their `f_z` coefficient; both forms
/// are returned.
pub fn pde_residuals(
    lie: &LieModel,
    field: &InvariantField,
    f: &ScalarExpr,
    x: &[f64],
) -> Result<Vec<NamedResidual>> {
    use ResidualSource::{Derived, Published};
    let model = &lie.geometry;
    model.check_point(x)?;
    field.to_field(model)?;
    let jet = f.jet(x, 1)?;
    let d = |k: usize| jet.partial(&[k]).expect("first order");
    let c = &field.coefficients;
    match lie.name() {
        "heisenberg" => {
            let (a, b, c) = (c[0], c[1], c[2]);
            let (px, py) = (x[0], x[1]);
            let (fx, fy, fz) = (d(0), d(1), d(2));
            Ok(vec![
                named(
                    "e1e2",
                    b * fx - a * fy - (b * py + a * px / 2.0) * fz - c,
                    Published,
                ),
                named("e1e3", c * fx - (c * py + a) * fz, Published),
                named("e2e3", c * fy + (c * px / 2.0 - b) * fz, Published),
                named(
                    "e1e2",
                    b * fx - a * fy - (b * py / 2.0 + a * px / 2.0) * fz - c,
                    Derived,
                ),
                named("e1e3", c * fx - (c * py / 2.0 + a) * fz, Derived),
                named("e2e3", c * fy + (c * px / 2.0 - b) * fz, Derived),
                named("c", c, Published),
                named("f_z", fz, Published),
                named("b*f_x-a*f_y", b * fx - a * fy, Published),
            ])
        }
        "sol2" => {
            let (a, b) = (c[0], c[1]);
            let y = x[1];
            Ok(vec![named(
                "e1e2",
                b * y * d(1) - a * y * d(0) - b,
                Published,
            )])
        }
        "sol3" => {
            let (a, b, c) = (c[0], c[1], c[2]);
            let z = x[2];
            let (fx, fy, fz) = (d(0), d(1), d(2));
            Ok(vec![
                named("e1e2", b * z * fz - a * z * fx - b, Published),
                named("e2e3", c * z * fx - b * z * fy, Published),
                named("e1e3", c * z * fz - a * z * fy - c, Published),
            ])
        }
        other => Err(GeometryError::UnknownModel(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn builtins_at_base_points() {
        let h = builtin_model("heisenberg").unwrap();
        let g = riemann::metric_at(&h.geometry, &[0.0, 0.0, 0.0]).unwrap().g;
        assert_eq!(
            g,
            vec![
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0]
            ]
        );
        assert!(matches!(
            builtin_model("nil"),
            Err(GeometryError::UnknownModel(_))
        ));
        let s = builtin_model("sol2").unwrap();
        let b = lie_bracket(&s.geometry, 0, 1, &[0.3, 2.0]).unwrap();
        assert_eq!(b, vec![2.0, 0.0]);
    }

    #[test]
    fn structure_constants() {
        for name in BUILTIN_MODELS {
            let lie = builtin_model(name).unwrap();
            let samples = crate::sampling::sample_points(&lie.geometry, 10, 5).unwrap();
            assert!(bracket_residual(&lie, &samples).unwrap() <= 1e-12, "{name}");
            assert!(
                frame_orthonormality(&lie.geometry, &samples).unwrap() <= 1e-12,
                "{name}"
            );
        }
    }

    #[test]
    fn identity_translation_is_exact() {
        let h = builtin_model("heisenberg").unwrap();
        let pairs = vec![(vec![0.0; 3], vec![0.4, -1.2, 0.7])];
        assert_eq!(left_invariance_check(&h.geometry, &pairs).unwrap(), 0.0);
        let s = builtin_model("sol2").unwrap();
        assert!(matches!(
            left_invariance_check(&s.geometry, &[]),
            Err(GeometryError::Missing("multiplication"))
        ));
    }

    #[test]
    fn sol2_pde_by_hand() {
        let lie = builtin_model("sol2").unwrap();
        let f = lie.geometry.expr("ln(y)").unwrap();
        let r = pde_residuals(&lie, &InvariantField::new(vec![0.0, 1.5]), &f, &[0.2, 1.7]).unwrap();
        assert_relative_eq!(r[0].value, 0.0, epsilon = 1e-15);
    }
}
