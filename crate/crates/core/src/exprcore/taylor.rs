//! Truncated multivariate Taylor polynomials.
//!
//! A [`Taylor`] holds the normalized coefficients `c_α = ∂^α f / α!` of a
//! function around an expansion point, for every multi-index `α` of total
//! degree at most the space's order. Arithmetic is exact up to truncation, so
//! mixed partials come out to rounding accuracy instead of finite-difference
//! accuracy.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

/// Monomial layout and multiplication table for a fixed number of variables
/// and truncation order. Shared read-only by every polynomial in the space.
pub struct TaylorSpace {
    nvars: usize,
    order: usize,
    monomials: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    degree_start: Vec<usize>,
    products: Vec<(u32, u32, u32)>,
    derivatives: Vec<Vec<(u32, u32, f64)>>,
}

impl fmt::Debug for TaylorSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TaylorSpace")
            .field("nvars", &self.nvars)
            .field("order", &self.order)
            .field("len", &self.monomials.len())
            .finish()
    }
}

/// All exponent vectors of `nvars` variables with total degree `deg`, in
/// lexicographically decreasing order (`x0^deg` first).
fn monomials_of_degree(nvars: usize, deg: usize) -> Vec<Vec<u8>> {
    if nvars == 0 {
        return if deg == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in (0..=deg).rev() {
        for mut rest in monomials_of_degree(nvars - 1, deg - first) {
            let mut m = Vec::with_capacity(nvars);
            m.push(first as u8);
            m.append(&mut rest);
            out.push(m);
        }
    }
    out
}

impl TaylorSpace {
    pub fn new(nvars: usize, order: usize) -> Arc<TaylorSpace> {
        let mut monomials = Vec::new();
        let mut degree_start = Vec::with_capacity(order + 2);
        for deg in 0..=order {
            degree_start.push(monomials.len());
            monomials.extend(monomials_of_degree(nvars, deg));
        }
        degree_start.push(monomials.len());
        let index: HashMap<Vec<u8>, usize> = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();

        let degree = |m: &[u8]| m.iter().map(|&e| e as usize).sum::<usize>();
        let mut products = Vec::new();
        for (i, a) in monomials.iter().enumerate() {
            let da = degree(a);
            for (j, b) in monomials
                .iter()
                .enumerate()
                .take(degree_start[order - da + 1])
            {
                let sum: Vec<u8> = a.iter().zip(b).map(|(p, q)| p + q).collect();
                products.push((i as u32, j as u32, index[&sum] as u32));
            }
        }

        let derivatives = (0..nvars)
            .map(|v| {
                monomials
                    .iter()
                    .enumerate()
                    .filter(|(_, m)| m[v] > 0)
                    .map(|(i, m)| {
                        let mut lowered = m.clone();
                        lowered[v] -= 1;
                        (i as u32, index[&lowered] as u32, m[v] as f64)
                    })
                    .collect()
            })
            .collect();

        Arc::new(TaylorSpace {
            nvars,
            order,
            monomials,
            index,
            degree_start,
            products,
            derivatives,
        })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    /// Multi-indices in storage (graded-lexicographic) order.
    pub fn monomials(&self) -> &[Vec<u8>] {
        &self.monomials
    }

    pub fn index_of(&self, multi_index: &[u8]) -> Option<usize> {
        self.index.get(multi_index).copied()
    }

    /// Index range of the monomials of total degree `deg`.
    pub fn degree_range(&self, deg: usize) -> std::ops::Range<usize> {
        self.degree_start[deg]..self.degree_start[deg + 1]
    }
}

/// A truncated Taylor polynomial in a [`TaylorSpace`].
#[derive(Clone)]
pub struct Taylor {
    space: Arc<TaylorSpace>,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Taylor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Taylor")
            .field("space", &self.space)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl Taylor {
    pub fn constant(space: &Arc<TaylorSpace>, c: f64) -> Taylor {
        let mut coeffs = vec![0.0; space.len()];
        coeffs[0] = c;
        Taylor {
            space: space.clone(),
            coeffs,
        }
    }

    /// The coordinate function `x_var` expanded around `value`.
    pub fn variable(space: &Arc<TaylorSpace>, var: usize, value: f64) -> Taylor {
        assert!(var < space.nvars, "variable index out of range");
        let mut t = Taylor::constant(space, value);
        if space.order >= 1 {
            let mut m = vec![0u8; space.nvars];
            m[var] = 1;
            t.coeffs[space.index[&m]] = 1.0;
        }
        t
    }

    /// All coordinate variables of the space, expanded around `point`.
    pub fn variables(space: &Arc<TaylorSpace>, point: &[f64]) -> Vec<Taylor> {
        assert_eq!(point.len(), space.nvars, "point dimension");
        point
            .iter()
            .enumerate()
            .map(|(i, &v)| Taylor::variable(space, i, v))
            .collect()
    }

    pub fn space(&self) -> &Arc<TaylorSpace> {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Normalized coefficient `∂^α f / α!`.
    pub fn coeff(&self, multi_index: &[u8]) -> f64 {
        self.space
            .index_of(multi_index)
            .map_or(0.0, |i| self.coeffs[i])
    }

    /// The partial derivative `∂^α f` at the expansion point.
    pub fn partial(&self, multi_index: &[u8]) -> f64 {
        let factorial: f64 = multi_index
            .iter()
            .map(|&e| (1..=e as u64).product::<u64>() as f64)
            .product();
        self.coeff(multi_index) * factorial
    }

    /// Partial derivative along a list of variables, e.g. `[0, 1, 1]` for
    /// `∂³f/∂x0∂x1²`. Order of the list does not matter.
    pub fn partial_along(&self, vars: &[usize]) -> f64 {
        let mut m = vec![0u8; self.space.nvars];
        for &v in vars {
            m[v] += 1;
        }
        self.partial(&m)
    }

    /// Exact derivative with respect to `var`. The result is valid through
    /// one degree less than the operand; its top-degree coefficients are zero.
    pub fn derivative(&self, var: usize) -> Taylor {
        let mut coeffs = vec![0.0; self.coeffs.len()];
        for &(src, dst, factor) in &self.space.derivatives[var] {
            coeffs[dst as usize] += factor * self.coeffs[src as usize];
        }
        Taylor {
            space: self.space.clone(),
            coeffs,
        }
    }

    pub fn scale(&self, c: f64) -> Taylor {
        Taylor {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().map(|v| v * c).collect(),
        }
    }

    fn same_space(&self, other: &Taylor) {
        debug_assert!(
            Arc::ptr_eq(&self.space, &other.space),
            "Taylor polynomials from different spaces"
        );
    }

    fn product(&self, other: &Taylor) -> Taylor {
        self.same_space(other);
        let mut coeffs = vec![0.0; self.coeffs.len()];
        let (a, b) = (&self.coeffs, &other.coeffs);
        for &(i, j, k) in &self.space.products {
            coeffs[k as usize] += a[i as usize] * b[j as usize];
        }
        Taylor {
            space: self.space.clone(),
            coeffs,
        }
    }

    /// `g(self)` for a univariate `g` given by its derivatives
    /// `[g(a), g'(a), …, g^(K)(a)]` at `a = self.value()`.
    pub fn compose(&self, derivs: &[f64]) -> Taylor {
        let order = self.space.order;
        assert!(
            derivs.len() > order,
            "need derivatives through the space order"
        );
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let mut result = Taylor::constant(&self.space, derivs[0]);
        let mut power = Taylor::constant(&self.space, 1.0);
        let mut factorial = 1.0;
        for (k, d) in derivs.iter().enumerate().take(order + 1).skip(1) {
            power = power.product(&h);
            factorial *= k as f64;
            let w = d / factorial;
            if w != 0.0 {
                for (r, p) in result.coeffs.iter_mut().zip(&power.coeffs) {
                    *r += w * p;
                }
            }
        }
        result
    }

    pub fn recip(&self) -> Taylor {
        let a = self.value();
        let mut derivs = Vec::with_capacity(self.space.order + 1);
        let mut d = 1.0 / a;
        for k in 0..=self.space.order {
            derivs.push(d);
            d *= -((k + 1) as f64) / a;
        }
        self.compose(&derivs)
    }
}

impl Add for Taylor {
    type Output = Taylor;
    fn add(mut self, rhs: Taylor) -> Taylor {
        self.same_space(&rhs);
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
        self
    }
}

impl Sub for Taylor {
    type Output = Taylor;
    fn sub(mut self, rhs: Taylor) -> Taylor {
        self.same_space(&rhs);
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
        self
    }
}

impl Mul for Taylor {
    type Output = Taylor;
    fn mul(self, rhs: Taylor) -> Taylor {
        self.product(&rhs)
    }
}

impl Div for Taylor {
    type Output = Taylor;
    fn div(self, rhs: Taylor) -> Taylor {
        self.product(&rhs.recip())
    }
}

impl Neg for Taylor {
    type Output = Taylor;
    fn neg(mut self) -> Taylor {
        for a in &mut self.coeffs {
            *a = -*a;
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn layout_is_graded_lexicographic() {
        let s = TaylorSpace::new(2, 2);
        let m: Vec<Vec<u8>> = s.monomials().to_vec();
        assert_eq!(
            m,
            vec![
                vec![0, 0],
                vec![1, 0],
                vec![0, 1],
                vec![2, 0],
                vec![1, 1],
                vec![0, 2]
            ]
        );
        assert_eq!(s.degree_range(1), 1..3);
    }

    #[test]
    fn product_of_linear_terms() {
        let s = TaylorSpace::new(2, 3);
        let x = Taylor::variable(&s, 0, 1.0);
        let y = Taylor::variable(&s, 1, 3.0);
        let p = x * y;
        assert_eq!(p.value(), 3.0);
        assert_eq!(p.partial_along(&[0]), 3.0);
        assert_eq!(p.partial_along(&[1]), 1.0);
        assert_eq!(p.partial_along(&[0, 1]), 1.0);
        assert_eq!(p.partial_along(&[0, 0]), 0.0);
    }

    #[test]
    fn reciprocal_series() {
        let s = TaylorSpace::new(1, 4);
        let x = Taylor::variable(&s, 0, 2.0);
        let r = x.recip();
        // d^k/dx^k 1/x = (-1)^k k! / x^(k+1)
        for k in 0..=4u8 {
            let fact: f64 = (1..=k as u64).product::<u64>() as f64;
            let expect = (-1f64).powi(k as i32) * fact / 2f64.powi(k as i32 + 1);
            assert_relative_eq!(r.partial(&[k]), expect, max_relative = 1e-14);
        }
    }

    #[test]
    fn derivative_lowers_degree() {
        let s = TaylorSpace::new(2, 3);
        let x = Taylor::variable(&s, 0, 0.5);
        let y = Taylor::variable(&s, 1, -1.0);
        let f = x.clone() * x.clone() * y.clone();
        let fx = f.derivative(0);
        // ∂x(x²y) = 2xy
        assert_relative_eq!(fx.value(), 2.0 * 0.5 * -1.0);
        assert_relative_eq!(fx.partial_along(&[1]), 2.0 * 0.5);
        assert_relative_eq!(fx.partial_along(&[0]), 2.0 * -1.0);
    }
}
