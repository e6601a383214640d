use super::taylor::{Taylor, TaylorSpace};
use super::{ExprError, ScalarExpr};

/// Deepest total derivative order served by [`jet_eval`].
pub const MAX_JET_ORDER: usize = 4;

/// All partial derivatives of an expression through a total order, at one
/// point. Entries are stored in graded-lexicographic multi-index order.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    point: Vec<f64>,
    order: usize,
    entries: Vec<(Vec<u8>, f64)>,
}

impl Jet {
    pub(crate) fn from_taylor(point: &[f64], t: &Taylor) -> Jet {
        let entries = t
            .space()
            .monomials()
            .iter()
            .map(|m| (m.clone(), t.partial(m)))
            .collect();
        Jet {
            point: point.to_vec(),
            order: t.space().order(),
            entries,
        }
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.entries[0].1
    }

    /// `(multi-index, ∂^α f)` pairs in graded-lexicographic order.
    pub fn entries(&self) -> &[(Vec<u8>, f64)] {
        &self.entries
    }

    /// Partial derivative for a multi-index, `None` above the jet's order.
    pub fn get(&self, multi_index: &[u8]) -> Option<f64> {
        self.entries
            .iter()
            .find(|(m, _)| m.as_slice() == multi_index)
            .map(|(_, v)| *v)
    }

    /// Partial along a list of coordinate indices, e.g. `[0, 1]` for ∂x∂y.
    pub fn partial(&self, vars: &[usize]) -> Option<f64> {
        let mut m = vec![0u8; self.point.len()];
        for &v in vars {
            *m.get_mut(v)? += 1;
        }
        self.get(&m)
    }

    /// The same jet truncated to a lower order.
    pub fn restrict(&self, order: usize) -> Jet {
        Jet {
            point: self.point.clone(),
            order: order.min(self.order),
            entries: self
                .entries
                .iter()
                .filter(|(m, _)| m.iter().map(|&e| e as usize).sum::<usize>() <= order)
                .cloned()
                .collect(),
        }
    }
}

/// Evaluates `expr` and all its partials through total order `order` at
/// `point`.
pub fn jet_eval(expr: &ScalarExpr, point: &[f64], order: usize) -> Result<Jet, ExprError> {
    if order > MAX_JET_ORDER {
        return Err(ExprError::OrderTooHigh {
            requested: order,
            max: MAX_JET_ORDER,
        });
    }
    if point.len() != expr.dim() {
        return Err(ExprError::PointDimension {
            expected: expr.dim(),
            found: point.len(),
        });
    }
    let space = TaylorSpace::new(point.len(), order);
    let vars = Taylor::variables(&space, point);
    let t = expr.eval_with(&vars)?;
    Ok(Jet::from_taylor(point, &t))
}
