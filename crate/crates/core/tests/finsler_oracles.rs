mod common;

use approx::assert_relative_eq;
use common::{fd_spray, flags, integrate_geodesic, max_abs, max_abs_diff, model};
use finsler_core::finsler::{FinslerInstance, PhiFamily};
use finsler_core::riemann::{self, linalg};
use finsler_core::sampling::{sample_points, Sampler};

const MODELS: [&str; 4] = ["heisenberg", "sol2", "sol3", "euclidean"];

fn instance(name: &str, phi: PhiFamily, b: f64) -> FinslerInstance {
    let m = model(name);
    let mut c = vec![0.0; m.dim()];
    c[0] = b;
    let x = m.frame_combination(&c).unwrap();
    FinslerInstance::new(m, x, phi).unwrap()
}

fn families() -> [PhiFamily; 3] {
    [
        PhiFamily::randers(),
        PhiFamily::kropina(),
        PhiFamily::matsumoto(),
    ]
}

#[test]
fn tensor_formula_matches_hessian() {
    for name in MODELS {
        for phi in families() {
            let inst = instance(name, phi.clone(), 0.3);
            let mut worst = 0.0f64;
            for (x, y) in flags(&inst, 200, 11) {
                let a = inst.fundamental_tensor_formula(&x, &y).unwrap();
                let b = inst.fundamental_tensor_hessian(&x, &y).unwrap();
                worst = worst.max(max_abs_diff(&a, &b) / max_abs(&b));
            }
            assert!(worst <= 1e-8, "{name} {phi}: {worst:e}");
        }
    }
}

#[test]
fn normalization_and_convexity() {
    for name in MODELS {
        for phi in families() {
            let inst = instance(name, phi, 0.3);
            for (x, y) in flags(&inst, 20, 12) {
                let g = inst.fundamental_tensor_hessian(&x, &y).unwrap();
                let f = inst.eval_f(&x, &y).unwrap();
                assert!(f > 0.0);
                assert_relative_eq!(linalg::bilinear(&g, &y, &y), f * f, max_relative = 1e-10);
                assert!(linalg::leading_minors(&g).iter().all(|&m| m > 0.0));
            }
        }
    }
}

#[test]
fn homogeneity_in_y() {
    for name in MODELS {
        let inst = instance(name, PhiFamily::matsumoto(), 0.3);
        for (x, y) in flags(&inst, 10, 13) {
            let f = inst.eval_f(&x, &y).unwrap();
            let g = inst.fundamental_tensor_hessian(&x, &y).unwrap();
            let sp = inst.spray(&x, &y).unwrap();
            for lambda in [2.0, 3.0, 0.5] {
                let ly: Vec<f64> = y.iter().map(|v| lambda * v).collect();
                assert_relative_eq!(
                    inst.eval_f(&x, &ly).unwrap(),
                    lambda * f,
                    max_relative = 1e-13
                );
                let gl = inst.fundamental_tensor_hessian(&x, &ly).unwrap();
                assert!(max_abs_diff(&g, &gl) <= 1e-12 * max_abs(&g));
                let spl = inst.spray(&x, &ly).unwrap();
                for (a, b) in sp.coefficients().iter().zip(spl.coefficients()) {
                    assert!((lambda * lambda * a - b).abs() <= 1e-11 * (1.0 + b.abs()));
                }
                let ga = riemann::spray_alpha(inst.geometry(), &x, &y).unwrap();
                let gal = riemann::spray_alpha(inst.geometry(), &x, &ly).unwrap();
                for (a, b) in ga.iter().zip(&gal) {
                    assert!((lambda * lambda * a - b).abs() <= 1e-12 * (1.0 + b.abs()));
                }
            }
        }
    }
}

#[test]
fn riemannian_profile_reduces_to_metric() {
    for name in MODELS {
        let inst = instance(name, PhiFamily::riemannian(), 0.3);
        let m = inst.geometry();
        let mut sampler = Sampler::new(14);
        for _ in 0..50 {
            let x = sampler.point(m).unwrap();
            let (y, u) = (sampler.vector(m.dim()), sampler.vector(m.dim()));
            let g = riemann::metric_at(m, &x).unwrap().g;
            assert!(max_abs_diff(&inst.fundamental_tensor_formula(&x, &y).unwrap(), &g) <= 1e-10);
            assert!(max_abs_diff(&inst.fundamental_tensor_hessian(&x, &y).unwrap(), &g) <= 1e-10);
            let sp = inst.spray(&x, &y).unwrap();
            let ga = riemann::spray_alpha(m, &x, &y).unwrap();
            for (a, b) in sp.coefficients().iter().zip(&ga) {
                assert!((a - b).abs() <= 1e-10, "{name}: {a} vs {b}");
            }
            let kf = inst.flag_curvature_spray(&x, &y, &u).unwrap();
            let kg = riemann::sectional_curvature(m, &x, &u, &y).unwrap();
            assert!((kf - kg).abs() <= 1e-8, "{name}: {kf} vs {kg}");
            let r = inst.riemann_spray(&x, &y).unwrap();
            let ry = linalg::mat_vec(&r, &y);
            assert!(ry.iter().all(|v| v.abs() <= 1e-8), "{name}: R y = {ry:?}");
        }
    }
}

#[test]
fn spray_matches_euler_lagrange_differences() {
    for name in ["sol2", "heisenberg"] {
        for phi in families() {
            let inst = instance(name, phi.clone(), 0.3);
            for (x, y) in flags(&inst, 5, 15) {
                let exact = inst.spray(&x, &y).unwrap();
                let fd = fd_spray(&inst, &x, &y);
                let scale = 1.0 + fd.iter().map(|v| v.abs()).fold(0.0, f64::max);
                for (a, b) in exact.coefficients().iter().zip(&fd) {
                    assert!((a - b).abs() <= 1e-5 * scale, "{name} {phi}: {a} vs {b}");
                }
            }
        }
    }
}

#[test]
fn hyperbolic_geodesic_is_a_semicircle() {
    let inst = instance("sol2", PhiFamily::riemannian(), 0.0);
    let g = inst.spray(&[0.0, 1.0], &[1.0, 0.0]).unwrap();
    assert_relative_eq!(g.coefficients()[1], 0.5, max_relative = 1e-14);
    assert_eq!(g.coefficients()[0], 0.0);
    // unit-speed geodesic (tanh t, sech t)
    let (x, v) = integrate_geodesic(&inst, &[0.0, 1.0], &[1.0, 0.0], 1.0, 200);
    assert_relative_eq!(x[0], 1f64.tanh(), max_relative = 1e-8);
    assert_relative_eq!(x[1], 1.0 / 1f64.cosh(), max_relative = 1e-8);
    assert_relative_eq!(inst.eval_f(&x, &v).unwrap(), 1.0, max_relative = 1e-8);
}

#[test]
fn finsler_geodesics_conserve_speed() {
    let inst = instance("sol2", PhiFamily::matsumoto(), 0.3);
    let (x0, y0) = (vec![0.1, 1.2], vec![0.6, 0.3]);
    let f0 = inst.eval_f(&x0, &y0).unwrap();
    let (x, v) = integrate_geodesic(&inst, &x0, &y0, 0.5, 100);
    assert_relative_eq!(inst.eval_f(&x, &v).unwrap(), f0, max_relative = 1e-8);
}

#[test]
fn parallel_field_closed_form() {
    let m = model("product");
    let samples = sample_points(&m, 50, 16).unwrap();
    let field = m.field(&["0.3", "0", "0"]).unwrap();
    assert!(riemann::is_parallel(&m, &field, &samples).unwrap() <= 1e-10);
    for phi in [PhiFamily::randers(), PhiFamily::matsumoto()] {
        let inst = FinslerInstance::new(m.clone(), field.clone(), phi.clone()).unwrap();
        let mut sampler = Sampler::new(17);
        for x in &samples {
            let y = inst.sample_direction(&mut sampler, x).unwrap();
            let u = sampler.vector(3);
            let spray = inst.flag_curvature_spray(x, &y, &u).unwrap();
            let closed = inst.flag_curvature_closed_form(x, &y, &u).unwrap();
            assert!(
                (spray - closed.value).abs() <= 1e-6,
                "{phi}: {spray} vs {}",
                closed.value
            );
            let sp = inst.spray(x, &y).unwrap();
            let ga = riemann::spray_alpha(&m, x, &y).unwrap();
            for (a, b) in sp.coefficients().iter().zip(&ga) {
                assert!((a - b).abs() <= 1e-7);
            }
            assert!(inst.berwald_witness_at(x, &y).unwrap() <= 1e-6);
        }
    }
}

#[test]
fn flag_curvature_ignores_flagpole_shift() {
    let inst = instance("heisenberg", PhiFamily::matsumoto(), 0.3);
    for (x, y) in flags(&inst, 10, 18) {
        let u = vec![0.2, -0.7, 0.5];
        let k = inst.flag_curvature_spray(&x, &y, &u).unwrap();
        for c in [1.0, -2.0] {
            let shifted: Vec<f64> = u.iter().zip(&y).map(|(a, b)| a + c * b).collect();
            let ks = inst.flag_curvature_spray(&x, &y, &shifted).unwrap();
            assert!((k - ks).abs() <= 1e-8 * (1.0 + k.abs()), "{k} vs {ks}");
        }
    }
}

#[test]
fn orthonormal_flags_use_d_form() {
    let m = model("product");
    let field = m.field(&["0.3", "0", "0"]).unwrap();
    // at y = 2 the orthonormal frame is (∂t, 2∂x, 2∂y)
    let x = [0.0, 0.0, 2.0];
    let c = std::f64::consts::FRAC_1_SQRT_2;
    let y = [0.6, 0.8 * 2.0, 0.0];
    let u = [-0.8 * c, 0.6 * c * 2.0, c * 2.0];
    for phi in [PhiFamily::randers(), PhiFamily::matsumoto()] {
        let inst = FinslerInstance::new(m.clone(), field.clone(), phi.clone()).unwrap();
        let closed = inst.flag_curvature_closed_form(&x, &y, &u).unwrap();
        let d_form = closed.d_form.expect("orthonormal flag");
        assert!(closed.sectional < -0.1);
        assert!((d_form - closed.value).abs() <= 1e-10, "{phi}");
        let spray = inst.flag_curvature_spray(&x, &y, &u).unwrap();
        assert!((spray - closed.value).abs() <= 1e-6, "{phi}");
    }
    let randers = FinslerInstance::new(m, field, PhiFamily::randers()).unwrap();
    let closed = randers.flag_curvature_closed_form(&x, &y, &u).unwrap();
    let s: f64 = 0.3 * 0.6;
    assert_relative_eq!(
        closed.d_form.unwrap(),
        closed.sectional / (1.0 + s).powi(2),
        max_relative = 1e-12
    );
}
