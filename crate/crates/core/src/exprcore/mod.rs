//! Scalar expressions over chart coordinates with exact partial derivatives.

mod ast;
mod jet;
mod parser;
mod scalar;
mod taylor;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use ast::{Exponent, Expr, Func};
pub use jet::{jet_eval, Jet, MAX_JET_ORDER};
pub use scalar::Scalar;
pub use taylor::{Taylor, TaylorSpace};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("empty expression")]
    Empty,
    #[error("{line}:{column}: unexpected character {found:?}")]
    Lex {
        line: usize,
        column: usize,
        found: String,
    },
    #[error("{line}:{column}: unexpected {found:?}, expected {expected}")]
    Syntax {
        line: usize,
        column: usize,
        found: String,
        expected: String,
    },
    #[error("{line}:{column}: unknown identifier {name:?}")]
    UnknownIdentifier {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("{line}:{column}: unknown function {name:?}")]
    UnknownFunction {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("{line}:{column}: {name} takes {expected} argument(s), got {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
        line: usize,
        column: usize,
    },
    #[error("invalid coordinate list: {0}")]
    Coordinates(String),
    #[error("domain violation: {op} of {value}")]
    Domain { op: &'static str, value: f64 },
    #[error("derivative order {requested} exceeds the supported maximum {max}")]
    OrderTooHigh { requested: usize, max: usize },
    #[error("expected {expected} coordinate values, got {found}")]
    PointDimension { expected: usize, found: usize },
}

/// A parsed expression bound to an ordered list of chart coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarExpr {
    tree: Expr,
    coords: Arc<[String]>,
}

/// Parses `text` against the coordinate names `coords`.
pub fn parse(text: &str, coords: &[&str]) -> Result<ScalarExpr, ExprError> {
    ScalarExpr::parse(text, coords)
}

fn check_coords<S: AsRef<str>>(coords: &[S]) -> Result<Arc<[String]>, ExprError> {
    let mut names: Vec<String> = Vec::with_capacity(coords.len());
    for c in coords {
        let c = c.as_ref();
        if !parser::is_identifier(c) || Func::from_name(c).is_some() {
            return Err(ExprError::Coordinates(format!(
                "{c:?} is not a usable name"
            )));
        }
        if names.iter().any(|n| n == c) {
            return Err(ExprError::Coordinates(format!("{c:?} declared twice")));
        }
        names.push(c.to_string());
    }
    Ok(names.into())
}

impl ScalarExpr {
    pub fn parse<S: AsRef<str>>(text: &str, coords: &[S]) -> Result<ScalarExpr, ExprError> {
        let coords = check_coords(coords)?;
        let tree = parser::parse_tree(text, &coords)?;
        Ok(ScalarExpr { tree, coords })
    }

    /// Wraps an existing tree. Fails if the tree references a variable index
    /// outside `coords`.
    pub fn from_tree<S: AsRef<str>>(tree: Expr, coords: &[S]) -> Result<ScalarExpr, ExprError> {
        let coords = check_coords(coords)?;
        if let Some(i) = tree.max_var() {
            if i >= coords.len() {
                return Err(ExprError::Coordinates(format!(
                    "variable index {i} out of range for {} coordinates",
                    coords.len()
                )));
            }
        }
        Ok(ScalarExpr { tree, coords })
    }

    pub fn constant<S: AsRef<str>>(c: f64, coords: &[S]) -> Result<ScalarExpr, ExprError> {
        Self::from_tree(Expr::num(c), coords)
    }

    pub fn tree(&self) -> &Expr {
        &self.tree
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_constant(&self) -> bool {
        self.tree.is_constant()
    }

    fn with_tree(&self, tree: Expr) -> ScalarExpr {
        ScalarExpr {
            tree,
            coords: self.coords.clone(),
        }
    }

    fn assert_same_chart(&self, other: &ScalarExpr) {
        assert_eq!(
            self.coords, other.coords,
            "combining expressions over different coordinate lists"
        );
    }

    pub fn add(&self, other: &ScalarExpr) -> ScalarExpr {
        self.assert_same_chart(other);
        self.with_tree(Expr::add(self.tree.clone(), other.tree.clone()))
    }

    pub fn sub(&self, other: &ScalarExpr) -> ScalarExpr {
        self.assert_same_chart(other);
        self.with_tree(Expr::sub(self.tree.clone(), other.tree.clone()))
    }

    pub fn mul(&self, other: &ScalarExpr) -> ScalarExpr {
        self.assert_same_chart(other);
        self.with_tree(Expr::mul(self.tree.clone(), other.tree.clone()))
    }

    pub fn scale(&self, c: f64) -> ScalarExpr {
        self.with_tree(Expr::mul(Expr::num(c), self.tree.clone()))
    }

    pub fn neg(&self) -> ScalarExpr {
        self.with_tree(Expr::neg(self.tree.clone()))
    }

    pub fn exp(&self) -> ScalarExpr {
        self.with_tree(Expr::call(Func::Exp, self.tree.clone()))
    }

    /// Evaluates at a point given as plain coordinates.
    pub fn eval(&self, point: &[f64]) -> Result<f64, ExprError> {
        self.eval_with(point)
    }

    /// Evaluates over any [`Scalar`]; `vars[i]` stands for coordinate `i`.
    pub fn eval_with<T: Scalar>(&self, vars: &[T]) -> Result<T, ExprError> {
        if vars.len() != self.coords.len() {
            return Err(ExprError::PointDimension {
                expected: self.coords.len(),
                found: vars.len(),
            });
        }
        let Some(proto) = vars.first() else {
            return Err(ExprError::PointDimension {
                expected: 1,
                found: 0,
            });
        };
        eval_tree(&self.tree, vars, proto)
    }

    /// Partial derivatives through total order `order` at `point`.
    pub fn jet(&self, point: &[f64], order: usize) -> Result<Jet, ExprError> {
        jet_eval(self, point, order)
    }
}

fn eval_tree<T: Scalar>(e: &Expr, vars: &[T], proto: &T) -> Result<T, ExprError> {
    Ok(match e {
        Expr::Num(c) => proto.lift(*c),
        Expr::Var(i) => vars[*i].clone(),
        Expr::Neg(a) => -eval_tree(a, vars, proto)?,
        Expr::Add(a, b) => eval_tree(a, vars, proto)? + eval_tree(b, vars, proto)?,
        Expr::Sub(a, b) => eval_tree(a, vars, proto)? - eval_tree(b, vars, proto)?,
        Expr::Mul(a, b) => eval_tree(a, vars, proto)? * eval_tree(b, vars, proto)?,
        Expr::Div(a, b) => {
            let num = eval_tree(a, vars, proto)?;
            let den = eval_tree(b, vars, proto)?;
            if den.value() == 0.0 {
                return Err(ExprError::Domain {
                    op: "division",
                    value: 0.0,
                });
            }
            num * den.recip()
        }
        Expr::Pow(a, exponent) => {
            let base = eval_tree(a, vars, proto)?;
            match exponent.as_integer() {
                Some(n) => {
                    if n < 0 && base.value() == 0.0 {
                        return Err(ExprError::Domain {
                            op: "negative power",
                            value: 0.0,
                        });
                    }
                    base.powi(n)
                }
                None => {
                    if base.value() <= 0.0 {
                        return Err(ExprError::Domain {
                            op: "fractional power",
                            value: base.value(),
                        });
                    }
                    base.powf(exponent.as_f64())
                }
            }
        }
        Expr::Call(f, a) => {
            let arg = eval_tree(a, vars, proto)?;
            match f {
                Func::Exp => arg.exp(),
                Func::Sin => arg.sin(),
                Func::Cos => arg.cos(),
                Func::Ln | Func::Sqrt => {
                    if arg.value() <= 0.0 {
                        return Err(ExprError::Domain {
                            op: f.name(),
                            value: arg.value(),
                        });
                    }
                    if *f == Func::Ln {
                        arg.ln()
                    } else {
                        arg.sqrt()
                    }
                }
            }
        }
    })
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tree.render(&self.coords))
    }
}
