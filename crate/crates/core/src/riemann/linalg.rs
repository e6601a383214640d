//! Small dense linear algebra over any [`Scalar`].

use crate::exprcore::Scalar;

/// Gauss–Jordan inverse with partial pivoting on the point values.
/// Returns `None` when a pivot vanishes relative to the matrix scale.
pub fn invert<T: Scalar>(m: &[Vec<T>]) -> Option<Vec<Vec<T>>> {
    let n = m.len();
    let scale = m
        .iter()
        .flatten()
        .map(|v| v.value().abs())
        .fold(0.0, f64::max);
    if n == 0 || scale == 0.0 || !scale.is_finite() {
        return None;
    }
    let one = m[0][0].lift(1.0);
    let zero = m[0][0].lift(0.0);
    let mut a: Vec<Vec<T>> = m.to_vec();
    let mut inv: Vec<Vec<T>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { one.clone() } else { zero.clone() })
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&p, &q| a[p][col].value().abs().total_cmp(&a[q][col].value().abs()))
            .expect("non-empty range");
        if a[pivot][col].value().abs() <= 1e-14 * scale {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let r = a[col][col].recip();
        for j in 0..n {
            a[col][j] = a[col][j].clone() * r.clone();
            inv[col][j] = inv[col][j].clone() * r.clone();
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = a[row][col].clone();
            for j in 0..n {
                a[row][j] = a[row][j].clone() - factor.clone() * a[col][j].clone();
                inv[row][j] = inv[row][j].clone() - factor.clone() * inv[col][j].clone();
            }
        }
    }
    Some(inv)
}

/// `Σ_i a_i b_i`.
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.clone() * y.clone())
        .reduce(|p, q| p + q)
        .expect("non-empty vectors")
}

/// `Σ_ij a_i m_ij b_j`.
pub fn bilinear<T: Scalar>(m: &[Vec<T>], a: &[T], b: &[T]) -> T {
    let rows: Vec<T> = m.iter().map(|row| dot(row, b)).collect();
    dot(a, &rows)
}

/// Matrix–vector product.
pub fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// Leading principal minors, smallest first.
pub fn leading_minors(m: &[Vec<f64>]) -> Vec<f64> {
    (1..=m.len())
        .map(|k| nalgebra::DMatrix::from_fn(k, k, |i, j| m[i][j]).determinant())
        .collect()
}
