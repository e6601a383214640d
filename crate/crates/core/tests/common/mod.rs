#![allow(dead_code)]

use finsler_core::finsler::FinslerInstance;
use finsler_core::homogeneous::builtin_model;
use finsler_core::riemann::GeometryModel;

pub fn model(name: &str) -> GeometryModel {
    match name {
        "euclidean" => GeometryModel::euclidean(3).unwrap(),
        "product" => GeometryModel::product_line_hyperbolic().unwrap(),
        other => builtin_model(other).unwrap().geometry,
    }
}

pub fn max_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &[Vec<f64>]) -> f64 {
    a.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max)
}

/// `(x, y)` pairs on which the instance is defined.
pub fn flags(inst: &FinslerInstance, count: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    inst.sample_flags(count, seed).unwrap()
}

/// `½ F²` as a function of the concatenated `(x, y)`.
fn lagrangian(inst: &FinslerInstance, z: &[f64]) -> f64 {
    let n = z.len() / 2;
    0.5 * inst.eval_f(&z[..n], &z[n..]).unwrap().powi(2)
}

fn fd_second(inst: &FinslerInstance, z: &[f64], a: usize, b: usize, h: f64) -> f64 {
    let mut w = z.to_vec();
    let mut at = |da: f64, db: f64| {
        w.copy_from_slice(z);
        w[a] += da;
        w[b] += db;
        lagrangian(inst, &w)
    };
    (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h)
}

fn fd_first(inst: &FinslerInstance, z: &[f64], a: usize, h: f64) -> f64 {
    let mut w = z.to_vec();
    w[a] += h;
    let up = lagrangian(inst, &w);
    w[a] -= 2.0 * h;
    (up - lagrangian(inst, &w)) / (2.0 * h)
}

/// Geodesic acceleration from the Euler–Lagrange equations of `½F²`, with
/// every derivative taken by central finite differences of `F` alone:
/// `L_{yy} ẍ = L_x − L_{yx} ẏ`. Spray coefficients are `−ẍ/2`.
pub fn fd_spray(inst: &FinslerInstance, x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let z: Vec<f64> = x.iter().chain(y).copied().collect();
    let h = 1e-4;
    let lyy = nalgebra::DMatrix::from_fn(n, n, |i, j| fd_second(inst, &z, n + i, n + j, h));
    let rhs = nalgebra::DVector::from_fn(n, |i, _| {
        fd_first(inst, &z, i, h)
            - (0..n)
                .map(|k| fd_second(inst, &z, n + i, k, h) * y[k])
                .sum::<f64>()
    });
    let acc = lyy.lu().solve(&rhs).unwrap();
    acc.iter().map(|a| -0.5 * a).collect()
}

/// Classical RK4 for `ẍ = −2G(x, ẋ)`.
pub fn integrate_geodesic(
    inst: &FinslerInstance,
    x: &[f64],
    y: &[f64],
    t: f64,
    steps: usize,
) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let rhs = |s: &[f64]| -> Vec<f64> {
        let g = inst.spray(&s[..n], &s[n..]).unwrap();
        s[n..]
            .iter()
            .copied()
            .chain(g.coefficients().iter().map(|v| -2.0 * v))
            .collect()
    };
    let mut s: Vec<f64> = x.iter().chain(y).copied().collect();
    let h = t / steps as f64;
    let axpy = |a: &[f64], k: &[f64], c: f64| -> Vec<f64> {
        a.iter().zip(k).map(|(p, q)| p + c * q).collect()
    };
    for _ in 0..steps {
        let k1 = rhs(&s);
        let k2 = rhs(&axpy(&s, &k1, h / 2.0));
        let k3 = rhs(&axpy(&s, &k2, h / 2.0));
        let k4 = rhs(&axpy(&s, &k3, h));
        for i in 0..2 * n {
            s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    (s[..n].to_vec(), s[n..].to_vec())
}
