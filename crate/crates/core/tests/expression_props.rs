use finsler_core::exprcore::{parse, ScalarExpr};
use proptest::prelude::*;

const COORDS: [&str; 3] = ["x", "y", "z"];

/// Expression text that stays smooth and defined on [-1, 1]^3.
fn smooth_text() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("x".to_string()),
        Just("y".to_string()),
        Just("z".to_string()),
        (0u32..40).prop_map(|k| format!("{}", k as f64 / 8.0)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) + ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) - ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})*({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})/(1 + ({b})^2)")),
            inner.clone().prop_map(|a| format!("-({a})")),
            (inner.clone(), 0i64..4).prop_map(|(a, k)| format!("({a})^{k}")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("cos({a})")),
            inner.clone().prop_map(|a| format!("exp(({a})/4)")),
            inner.clone().prop_map(|a| format!("ln(2 + sin({a}))")),
            inner.clone().prop_map(|a| format!("sqrt(1 + ({a})^2)")),
            inner.prop_map(|a| format!("(1 + ({a})^2)^(1/3)")),
        ]
    })
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 3)
}

fn expr(text: &str) -> ScalarExpr {
    parse(text, &COORDS).unwrap()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

fn shifted(x: &[f64], i: usize, h: f64) -> Vec<f64> {
    let mut p = x.to_vec();
    p[i] += h;
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn jets_match_central_differences(text in smooth_text(), x in point()) {
        let e = expr(&text);
        let h = 1e-4;
        let jet = e.jet(&x, 2).unwrap();
        for i in 0..3 {
            let fd = (e.eval(&shifted(&x, i, h)).unwrap() - e.eval(&shifted(&x, i, -h)).unwrap()) / (2.0 * h);
            let exact = jet.partial(&[i]).unwrap();
            prop_assert!(close(exact, fd, 1e-5), "{text}: d{i} {exact} vs {fd}");
            for j in 0..3 {
                let up = e.jet(&shifted(&x, j, h), 1).unwrap().partial(&[i]).unwrap();
                let down = e.jet(&shifted(&x, j, -h), 1).unwrap().partial(&[i]).unwrap();
                let fd = (up - down) / (2.0 * h);
                let exact = jet.partial(&[i, j]).unwrap();
                prop_assert!(close(exact, fd, 1e-5), "{text}: d{i}d{j} {exact} vs {fd}");
            }
        }
    }

    #[test]
    fn rendering_parses_back(text in smooth_text()) {
        let e = expr(&text);
        let again = expr(&e.to_string());
        prop_assert_eq!(again.tree(), e.tree());
        prop_assert_eq!(again.to_string(), e.to_string());
    }

    #[test]
    fn restricted_jets_agree(text in smooth_text(), x in point()) {
        let e = expr(&text);
        let full = e.jet(&x, 4).unwrap();
        for order in 0..4 {
            let low = e.jet(&x, order).unwrap();
            let cut = full.restrict(order);
            prop_assert_eq!(cut.entries().len(), low.entries().len());
            for ((m, a), (n, b)) in cut.entries().iter().zip(low.entries()) {
                prop_assert_eq!(m, n);
                prop_assert!(close(*a, *b, 1e-12), "{text}: {m:?} {a} vs {b}");
            }
        }
        prop_assert_eq!(full.value(), e.eval(&x).unwrap());
    }

    #[test]
    fn jets_are_linear(a in smooth_text(), b in smooth_text(), s in -3.0f64..3.0, x in point()) {
        let (ea, eb) = (expr(&a), expr(&b));
        let combined = ea.scale(s).add(&eb).jet(&x, 3).unwrap();
        let (ja, jb) = (ea.jet(&x, 3).unwrap(), eb.jet(&x, 3).unwrap());
        for (((m, c), (_, p)), (_, q)) in combined.entries().iter().zip(ja.entries()).zip(jb.entries()) {
            let expected = s * p + q;
            prop_assert!(close(*c, expected, 1e-12), "{m:?}: {c} vs {expected}");
        }
    }
}
