use crate::error::{GeometryError, Result};
use crate::exprcore::{Expr, ExprError, Scalar, ScalarExpr};

use super::linalg;

/// A vector field given by coordinate-component expressions.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFieldExpr {
    components: Vec<ScalarExpr>,
}

impl VectorFieldExpr {
    pub fn new(components: Vec<ScalarExpr>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(GeometryError::Dimension {
                what: "vector field",
                expected: 1,
                found: 0,
            });
        };
        if first.dim() != components.len()
            || components.iter().any(|c| c.coords() != first.coords())
        {
            return Err(GeometryError::Dimension {
                what: "vector field components",
                expected: first.dim(),
                found: components.len(),
            });
        }
        Ok(VectorFieldExpr { components })
    }

    pub fn parse<S: AsRef<str>, C: AsRef<str>>(texts: &[S], coords: &[C]) -> Result<Self> {
        let components = texts
            .iter()
            .map(|t| ScalarExpr::parse(t.as_ref(), coords))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(components)
    }

    pub fn constant<C: AsRef<str>>(values: &[f64], coords: &[C]) -> Result<Self> {
        let components = values
            .iter()
            .map(|&v| ScalarExpr::constant(v, coords))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(components)
    }

    pub fn zero<C: AsRef<str>>(coords: &[C]) -> Result<Self> {
        Self::constant(&vec![0.0; coords.len()], coords)
    }

    /// `Σ coeffs[a] · fields[a]` as expressions.
    pub fn combination(coeffs: &[ScalarExpr], fields: &[VectorFieldExpr]) -> Result<Self> {
        if coeffs.len() != fields.len() || fields.is_empty() {
            return Err(GeometryError::Dimension {
                what: "frame coefficients",
                expected: fields.len(),
                found: coeffs.len(),
            });
        }
        let n = fields[0].dim();
        let components = (0..n)
            .map(|i| {
                let terms = coeffs
                    .iter()
                    .zip(fields)
                    .filter(|(c, _)| !matches!(c.tree(), Expr::Num(v) if *v == 0.0))
                    .map(|(c, e)| c.mul(&e.components[i]))
                    .reduce(|a, b| a.add(&b));
                terms.unwrap_or_else(|| coeffs[0].scale(0.0))
            })
            .collect();
        Self::new(components)
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn coords(&self) -> &[String] {
        self.components[0].coords()
    }

    pub fn components(&self) -> &[ScalarExpr] {
        &self.components
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.eval_with(x)
    }

    pub fn eval_with<T: Scalar>(&self, x: &[T]) -> Result<Vec<T>> {
        Ok(self
            .components
            .iter()
            .map(|c| c.eval_with(x))
            .collect::<Result<Vec<_>, _>>()?)
    }

    /// Every component multiplied by the scalar expression `factor`.
    pub fn scaled_by(&self, factor: &ScalarExpr) -> VectorFieldExpr {
        VectorFieldExpr {
            components: self.components.iter().map(|c| factor.mul(c)).collect(),
        }
    }
}

/// Comparison operator of a domain constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Gt,
    Ge,
    Lt,
    Le,
    Ne,
}

impl Comparison {
    fn symbol(self) -> &'static str {
        match self {
            Comparison::Gt => ">",
            Comparison::Ge => ">=",
            Comparison::Lt => "<",
            Comparison::Le => "<=",
            Comparison::Ne => "!=",
        }
    }
}

/// An inequality such as `y > 0` restricting the chart.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    lhs: ScalarExpr,
    op: Comparison,
    rhs: ScalarExpr,
}

impl Constraint {
    pub fn parse<C: AsRef<str>>(text: &str, coords: &[C]) -> Result<Self> {
        const OPS: [(&str, Comparison); 5] = [
            (">=", Comparison::Ge),
            ("<=", Comparison::Le),
            ("!=", Comparison::Ne),
            (">", Comparison::Gt),
            ("<", Comparison::Lt),
        ];
        for (sym, op) in OPS {
            if let Some((l, r)) = text.split_once(sym) {
                return Ok(Constraint {
                    lhs: ScalarExpr::parse(l, coords)?,
                    op,
                    rhs: ScalarExpr::parse(r, coords)?,
                });
            }
        }
        Err(GeometryError::Unsupported(format!(
            "domain constraint {text:?} has no comparison operator"
        )))
    }

    pub fn holds(&self, x: &[f64]) -> bool {
        let (Ok(l), Ok(r)) = (self.lhs.eval(x), self.rhs.eval(x)) else {
            return false;
        };
        match self.op {
            Comparison::Gt => l > r,
            Comparison::Ge => l >= r,
            Comparison::Lt => l < r,
            Comparison::Le => l <= r,
            Comparison::Ne => l != r,
        }
    }
}

impl std::fmt::Display for Constraint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.op.symbol(), self.rhs)
    }
}

/// A group law `(a, p) ↦ a·p` on the chart. The law's expressions are over
/// the primed coordinates of `a` followed by the plain coordinates of `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct Multiplication {
    law: Vec<ScalarExpr>,
    identity: Vec<f64>,
}

impl Multiplication {
    /// Variable names of the law: `x'` for each coordinate `x`, then `x`.
    pub fn law_coords(coords: &[String]) -> Vec<String> {
        coords
            .iter()
            .map(|c| format!("{c}'"))
            .chain(coords.iter().cloned())
            .collect()
    }

    pub fn parse<S: AsRef<str>>(
        texts: &[S],
        coords: &[String],
        identity: Vec<f64>,
    ) -> Result<Self> {
        let vars = Self::law_coords(coords);
        let law = texts
            .iter()
            .map(|t| ScalarExpr::parse(t.as_ref(), &vars))
            .collect::<Result<Vec<_>, _>>()?;
        if law.len() != coords.len() || identity.len() != coords.len() {
            return Err(GeometryError::Dimension {
                what: "multiplication law",
                expected: coords.len(),
                found: law.len(),
            });
        }
        Ok(Multiplication { law, identity })
    }

    pub fn law(&self) -> &[ScalarExpr] {
        &self.law
    }

    pub fn identity(&self) -> &[f64] {
        &self.identity
    }

    fn joined(a: &[f64], p: &[f64]) -> Vec<f64> {
        a.iter().chain(p).copied().collect()
    }

    pub fn apply(&self, a: &[f64], p: &[f64]) -> Result<Vec<f64>> {
        let v = Self::joined(a, p);
        Ok(self
            .law
            .iter()
            .map(|e| e.eval(&v))
            .collect::<Result<Vec<_>, _>>()?)
    }

    /// Differential of left translation by `a` at `p`: `J[i][j] = ∂(a·p)^i/∂p^j`.
    pub fn left_differential(&self, a: &[f64], p: &[f64]) -> Result<Vec<Vec<f64>>> {
        let n = p.len();
        let v = Self::joined(a, p);
        self.law
            .iter()
            .map(|e| {
                let jet = e.jet(&v, 1)?;
                Ok((0..n)
                    .map(|j| jet.partial(&[n + j]).expect("first-order entry"))
                    .collect())
            })
            .collect()
    }
}

/// How the metric tensor is specified.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricSource {
    /// Explicit components `g_ij`.
    Components(Vec<Vec<ScalarExpr>>),
    /// The metric making the model's frame orthonormal.
    OrthonormalFrame,
}

/// Frame fields `e_1 … e_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub fields: Vec<VectorFieldExpr>,
    /// Whether the frame is declared orthonormal for the model metric.
    pub orthonormal: bool,
}

/// A Riemannian metric on a single chart, with optional frame, group law and
/// domain constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryModel {
    name: String,
    coords: Vec<String>,
    metric: MetricSource,
    frame: Option<Frame>,
    multiplication: Option<Multiplication>,
    domain: Vec<Constraint>,
    sample_box: Vec<(f64, f64)>,
}

impl GeometryModel {
    pub fn from_components<S: AsRef<str>>(
        name: &str,
        coords: &[&str],
        metric: &[Vec<S>],
    ) -> Result<Self> {
        let n = coords.len();
        if n < 2 {
            return Err(GeometryError::Dimension {
                what: "chart",
                expected: 2,
                found: n,
            });
        }
        if metric.len() != n || metric.iter().any(|r| r.len() != n) {
            return Err(GeometryError::Dimension {
                what: "metric matrix",
                expected: n,
                found: metric.len(),
            });
        }
        let components = metric
            .iter()
            .map(|row| {
                row.iter()
                    .map(|t| ScalarExpr::parse(t.as_ref(), coords))
                    .collect::<Result<Vec<_>, ExprError>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::base(
            name,
            coords,
            MetricSource::Components(components),
        ))
    }

    /// A model whose metric is defined by declaring `fields` orthonormal.
    pub fn from_frame<S: AsRef<str>>(
        name: &str,
        coords: &[&str],
        fields: &[Vec<S>],
    ) -> Result<Self> {
        let n = coords.len();
        if n < 2 || fields.len() != n {
            return Err(GeometryError::Dimension {
                what: "frame",
                expected: n,
                found: fields.len(),
            });
        }
        let fields = fields
            .iter()
            .map(|f| VectorFieldExpr::parse(f, coords))
            .collect::<Result<Vec<_>>>()?;
        let mut model = Self::base(name, coords, MetricSource::OrthonormalFrame);
        model.frame = Some(Frame {
            fields,
            orthonormal: true,
        });
        Ok(model)
    }

    fn base(name: &str, coords: &[&str], metric: MetricSource) -> Self {
        GeometryModel {
            name: name.to_string(),
            coords: coords.iter().map(|c| c.to_string()).collect(),
            metric,
            frame: None,
            multiplication: None,
            domain: Vec::new(),
            sample_box: vec![(-2.0, 2.0); coords.len()],
        }
    }

    /// Euclidean space with coordinates `x1 … xn` (or `x, y, z` for n ≤ 3).
    pub fn euclidean(n: usize) -> Result<Self> {
        let names: Vec<String> = if n <= 3 {
            ["x", "y", "z"][..n].iter().map(|s| s.to_string()).collect()
        } else {
            (1..=n).map(|i| format!("x{i}")).collect()
        };
        let coords: Vec<&str> = names.iter().map(String::as_str).collect();
        let metric: Vec<Vec<&str>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { "1" } else { "0" }).collect())
            .collect();
        let mut model = Self::from_components(&format!("euclidean{n}"), &coords, &metric)?;
        let fields: Vec<Vec<&str>> = metric.clone();
        model = model.with_frame(&fields, true)?;
        Ok(model)
    }

    /// The product `ℝ × H²` with `g = dt² + (dx² + dy²)/y²` on `y > 0`.
    pub fn product_line_hyperbolic() -> Result<Self> {
        let model = Self::from_components(
            "product",
            &["t", "x", "y"],
            &[
                vec!["1", "0", "0"],
                vec!["0", "1/y^2", "0"],
                vec!["0", "0", "1/y^2"],
            ],
        )?
        .with_frame(
            &[
                vec!["1", "0", "0"],
                vec!["0", "y", "0"],
                vec!["0", "0", "y"],
            ],
            true,
        )?
        .with_domain(&["y > 0"])?
        .with_sample_box(vec![(-2.0, 2.0), (-2.0, 2.0), (0.5, 3.0)])?;
        Ok(model)
    }

    pub fn with_frame<S: AsRef<str>>(
        mut self,
        fields: &[Vec<S>],
        orthonormal: bool,
    ) -> Result<Self> {
        if fields.len() != self.dim() {
            return Err(GeometryError::Dimension {
                what: "frame",
                expected: self.dim(),
                found: fields.len(),
            });
        }
        let fields = fields
            .iter()
            .map(|f| VectorFieldExpr::parse(f, &self.coords))
            .collect::<Result<Vec<_>>>()?;
        self.frame = Some(Frame {
            fields,
            orthonormal,
        });
        Ok(self)
    }

    pub fn with_domain<S: AsRef<str>>(mut self, constraints: &[S]) -> Result<Self> {
        for c in constraints {
            self.domain
                .push(Constraint::parse(c.as_ref(), &self.coords)?);
        }
        Ok(self)
    }

    pub fn with_sample_box(mut self, bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.len() != self.dim() {
            return Err(GeometryError::Dimension {
                what: "sample box",
                expected: self.dim(),
                found: bounds.len(),
            });
        }
        if bounds
            .iter()
            .any(|(lo, hi)| !(lo <= hi) || !lo.is_finite() || !hi.is_finite())
        {
            return Err(GeometryError::Unsupported(
                "sample box bounds must be finite with lo <= hi".into(),
            ));
        }
        self.sample_box = bounds;
        Ok(self)
    }

    pub fn with_multiplication<S: AsRef<str>>(
        mut self,
        law: &[S],
        identity: Vec<f64>,
    ) -> Result<Self> {
        self.multiplication = Some(Multiplication::parse(law, &self.coords, identity)?);
        Ok(self)
    }

    pub fn renamed(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn metric_source(&self) -> &MetricSource {
        &self.metric
    }

    pub fn frame(&self) -> Option<&Frame> {
        self.frame.as_ref()
    }

    pub fn frame_fields(&self) -> Result<&[VectorFieldExpr]> {
        self.frame
            .as_ref()
            .map(|f| f.fields.as_slice())
            .ok_or(GeometryError::Missing("frame"))
    }

    pub fn multiplication(&self) -> Option<&Multiplication> {
        self.multiplication.as_ref()
    }

    pub fn domain(&self) -> &[Constraint] {
        &self.domain
    }

    pub fn sample_box(&self) -> &[(f64, f64)] {
        &self.sample_box
    }

    pub fn in_domain(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().all(|v| v.is_finite())
            && self.domain.iter().all(|c| c.holds(x))
    }

    pub(crate) fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(GeometryError::Dimension {
                what: "point",
                expected: self.dim(),
                found: x.len(),
            });
        }
        if !self.in_domain(x) {
            return Err(GeometryError::OutsideDomain { point: x.to_vec() });
        }
        Ok(())
    }

    pub(crate) fn check_vector(&self, what: &'static str, v: &[f64]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(GeometryError::Dimension {
                what,
                expected: self.dim(),
                found: v.len(),
            });
        }
        Ok(())
    }

    /// A scalar expression over this chart.
    pub fn expr(&self, text: &str) -> Result<ScalarExpr> {
        Ok(ScalarExpr::parse(text, &self.coords)?)
    }

    /// A vector field over this chart from component texts.
    pub fn field<S: AsRef<str>>(&self, texts: &[S]) -> Result<VectorFieldExpr> {
        if texts.len() != self.dim() {
            return Err(GeometryError::Dimension {
                what: "vector field",
                expected: self.dim(),
                found: texts.len(),
            });
        }
        VectorFieldExpr::parse(texts, &self.coords)
    }

    /// `Σ c_a e_a` for constant frame coefficients.
    pub fn frame_combination(&self, coefficients: &[f64]) -> Result<VectorFieldExpr> {
        let coeffs = coefficients
            .iter()
            .map(|&c| ScalarExpr::constant(c, &self.coords))
            .collect::<Result<Vec<_>, _>>()?;
        self.frame_combination_expr(&coeffs)
    }

    /// `Σ c_a e_a` for expression frame coefficients.
    pub fn frame_combination_expr(&self, coefficients: &[ScalarExpr]) -> Result<VectorFieldExpr> {
        VectorFieldExpr::combination(coefficients, self.frame_fields()?)
    }

    /// Metric components evaluated over any scalar type.
    pub fn metric_with<T: Scalar>(&self, x: &[T]) -> Result<Vec<Vec<T>>> {
        match &self.metric {
            MetricSource::Components(rows) => rows
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|e| Ok(e.eval_with(x)?))
                        .collect::<Result<Vec<_>>>()
                })
                .collect(),
            MetricSource::OrthonormalFrame => {
                let fields = self.frame_fields()?;
                let n = self.dim();
                // columns of E are the frame fields; g = E^{-T} E^{-1}
                let values: Vec<Vec<T>> = fields
                    .iter()
                    .map(|f| f.eval_with(x))
                    .collect::<Result<_>>()?;
                let e: Vec<Vec<T>> = (0..n)
                    .map(|i| (0..n).map(|a| values[a][i].clone()).collect())
                    .collect();
                let inv = linalg::invert(&e).ok_or(GeometryError::Singular { what: "frame" })?;
                Ok((0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| {
                                (0..n)
                                    .map(|a| inv[a][i].clone() * inv[a][j].clone())
                                    .reduce(|p, q| p + q)
                                    .expect("n >= 1")
                            })
                            .collect()
                    })
                    .collect())
            }
        }
    }

    /// The conformally scaled model `g̃ = e^{2f} g`, built at the expression
    /// level. A declared frame is rescaled to `e^{-f} e_a`, which stays
    /// orthonormal for `g̃`. The group law is dropped.
    pub fn conformal(&self, f: &ScalarExpr) -> Result<GeometryModel> {
        if f.coords() != self.coords.as_slice() {
            return Err(GeometryError::Unsupported(
                "conformal factor must be an expression over the model coordinates".into(),
            ));
        }
        let weight_metric = f.scale(2.0).exp();
        let weight_frame = f.neg().exp();
        let metric = match &self.metric {
            MetricSource::Components(rows) => MetricSource::Components(
                rows.iter()
                    .map(|row| row.iter().map(|g| weight_metric.mul(g)).collect())
                    .collect(),
            ),
            MetricSource::OrthonormalFrame => MetricSource::OrthonormalFrame,
        };
        let frame = self.frame.as_ref().map(|fr| Frame {
            fields: fr
                .fields
                .iter()
                .map(|e| e.scaled_by(&weight_frame))
                .collect(),
            orthonormal: fr.orthonormal,
        });
        Ok(GeometryModel {
            name: format!("{}~conformal", self.name),
            coords: self.coords.clone(),
            metric,
            frame,
            multiplication: None,
            domain: self.domain.clone(),
            sample_box: self.sample_box.clone(),
        })
    }
}
