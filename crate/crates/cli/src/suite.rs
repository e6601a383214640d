//! The full verification corpus behind `check-paper`, one block per
//! acceptance criterion.

use finsler_core::conformal::{self, Basis, ConformalPair};
use finsler_core::finsler::{phi_admissible, FinslerInstance, PhiFamily};
use finsler_core::homogeneous::{
    builtin_model, left_invariance_check, left_invariant_douglas_residual, pde_residuals,
    InvariantField, LieModel, ResidualSource,
};
use finsler_core::riemann::{self, linalg, GeometryModel, VectorFieldExpr};
use finsler_core::sampling::Sampler;

use crate::error::CliError;
use crate::model_file::ModelFile;
use crate::report::{CheckRecord, CheckReport};

type Res<T> = Result<T, CliError>;

/// Models the suite draws on.
pub fn corpus_models() -> Res<Vec<LieModel>> {
    let mut out: Vec<LieModel> = ["heisenberg", "sol2", "sol3"]
        .into_iter()
        .map(builtin_model)
        .collect::<Result<_, _>>()?;
    for geometry in [
        GeometryModel::euclidean(2)?,
        GeometryModel::euclidean(3)?,
        GeometryModel::product_line_hyperbolic()?,
    ] {
        out.push(LieModel {
            geometry,
            brackets: Vec::new(),
        });
    }
    Ok(out)
}

fn model(name: &str) -> Res<GeometryModel> {
    corpus_models()?
        .into_iter()
        .find(|m| m.name() == name)
        .map(|m| m.geometry)
        .ok_or_else(|| CliError::Input(format!("no corpus model {name}")))
}

/// The general profile used where Randers would leave its radius.
fn general_phi() -> Res<PhiFamily> {
    Ok(PhiFamily::custom_general("1 + s/(1 + w)", f64::INFINITY)?)
}

fn pair(name: &str, coefficients: &[f64], f: &str) -> Res<ConformalPair> {
    let m = model(name)?;
    let x = m.frame_combination(coefficients)?;
    Ok(conformal::conformal_transform(&m, &x, &m.expr(f)?)?)
}

fn max_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max)
}

fn max_abs(a: &[Vec<f64>]) -> f64 {
    a.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max)
}

/// Builds the report for criteria 1–9 from one base seed.
pub fn corpus_report(seed: u64) -> Res<CheckReport> {
    let digest_source: String = corpus_models()?
        .iter()
        .map(|m| ModelFile::describe(m).to_json())
        .collect();
    let mut report = CheckReport::new("check-paper", "corpus", &digest_source, seed, 50);
    let blocks: [fn(u64) -> Res<Vec<CheckRecord>>; 9] = [
        tensor_oracle,
        riemannian_reduction,
        parallel_closed_form,
        berwald_witness,
        douglas_agreement,
        corollaries,
        ground_truths,
        conformal_invariants,
        admissibility,
    ];
    for (k, block) in blocks.iter().enumerate() {
        let id = k as u8 + 1;
        for record in block(seed.wrapping_add(1000 * id as u64))? {
            report.push(record.criterion(id));
        }
    }
    Ok(report)
}

/// Criteria 1–9, then a second build of the same report compared byte for
/// byte (criterion 10).
pub fn check_paper(seed: u64) -> Res<CheckReport> {
    let mut report = corpus_report(seed)?;
    let again = corpus_report(seed)?;
    let identical = report.to_json() == again.to_json();
    report.push(
        CheckRecord::new(
            "repeat_run_identical",
            if identical { 0.0 } else { 1.0 },
            0.0,
            seed,
            2,
        )
        .criterion(10)
        .note("0 when two builds of the structured report are byte-identical"),
    );
    report.summarize_criteria();
    Ok(report)
}

const MODELS: [&str; 4] = ["heisenberg", "sol2", "sol3", "euclidean3"];

fn instance(name: &str, phi: PhiFamily, b: f64) -> Res<FinslerInstance> {
    let m = model(name)?;
    let mut c = vec![0.0; m.dim()];
    c[0] = b;
    let x = m.frame_combination(&c)?;
    Ok(FinslerInstance::new(m, x, phi)?)
}

fn tensor_oracle(seed: u64) -> Res<Vec<CheckRecord>> {
    let mut out = Vec::new();
    for name in MODELS {
        for phi in [
            PhiFamily::randers(),
            PhiFamily::kropina(),
            PhiFamily::matsumoto(),
        ] {
            let inst = instance(name, phi.clone(), 0.3)?;
            let mut worst = 0.0f64;
            for (x, y) in inst.sample_flags(200, seed)? {
                let a = inst.fundamental_tensor_formula(&x, &y)?;
                let b = inst.fundamental_tensor_hessian(&x, &y)?;
                worst = worst.max(max_abs_diff(&a, &b) / max_abs(&b));
            }
            out.push(CheckRecord::new(
                format!("tensor_formula_vs_hessian/{name}/{}", phi.kind().name()),
                worst,
                1e-8,
                seed,
                200,
            ));
        }
    }
    Ok(out)
}

fn riemannian_reduction(seed: u64) -> Res<Vec<CheckRecord>> {
    let mut out = Vec::new();
    for name in MODELS {
        let inst = instance(name, PhiFamily::riemannian(), 0.3)?;
        let m = inst.geometry();
        let mut sampler = Sampler::new(seed);
        let (mut tensor, mut spray, mut flag) = (0.0f64, 0.0f64, 0.0f64);
        for _ in 0..50 {
            let x = sampler.point(m)?;
            let (y, u) = (sampler.vector(m.dim()), sampler.vector(m.dim()));
            let g = riemann::metric_at(m, &x)?.g;
            tensor = tensor
                .max(max_abs_diff(&inst.fundamental_tensor_formula(&x, &y)?, &g))
                .max(max_abs_diff(&inst.fundamental_tensor_hessian(&x, &y)?, &g));
            let sp = inst.spray(&x, &y)?;
            for (a, b) in sp
                .coefficients()
                .iter()
                .zip(riemann::spray_alpha(m, &x, &y)?)
            {
                spray = spray.max((a - b).abs());
            }
            let kf = inst.flag_curvature_spray(&x, &y, &u)?;
            flag = flag.max((kf - riemann::sectional_curvature(m, &x, &u, &y)?).abs());
        }
        out.push(CheckRecord::new(
            format!("riemannian_tensor/{name}"),
            tensor,
            1e-10,
            seed,
            50,
        ));
        out.push(CheckRecord::new(
            format!("riemannian_spray/{name}"),
            spray,
            1e-10,
            seed,
            50,
        ));
        out.push(CheckRecord::new(
            format!("riemannian_flag_curvature/{name}"),
            flag,
            1e-8,
            seed,
            50,
        ));
    }
    Ok(out)
}

/// Gram–Schmidt of `(y, u)` in the metric `g`.
fn orthonormalize(g: &[Vec<f64>], y: &[f64], u: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let ny = linalg::bilinear(g, y, y).sqrt();
    let e1: Vec<f64> = y.iter().map(|v| v / ny).collect();
    let c = linalg::bilinear(g, u, &e1);
    let w: Vec<f64> = u.iter().zip(&e1).map(|(a, b)| a - c * b).collect();
    let nw = linalg::bilinear(g, &w, &w).sqrt();
    (e1, w.iter().map(|v| v / nw).collect())
}

fn parallel_closed_form(seed: u64) -> Res<Vec<CheckRecord>> {
    let m = model("product")?;
    let field = m.field(&["0.3", "0", "0"])?;
    let samples = Sampler::new(seed).points(&m, 50)?;
    let mut out = vec![CheckRecord::new(
        "product_dt_parallel",
        riemann::is_parallel(&m, &field, &samples)?,
        1e-10,
        seed,
        50,
    )];
    for phi in [PhiFamily::randers(), PhiFamily::matsumoto()] {
        let inst = FinslerInstance::new(m.clone(), field.clone(), phi.clone())?;
        let mut sampler = Sampler::new(seed + 1);
        let (mut general, mut d_form) = (0.0f64, 0.0f64);
        for x in &samples {
            let y = inst.sample_direction(&mut sampler, x)?;
            let u = sampler.vector(3);
            let closed = inst.flag_curvature_closed_form(x, &y, &u)?;
            general = general.max((inst.flag_curvature_spray(x, &y, &u)? - closed.value).abs());
            let g = riemann::metric_at(&m, x)?.g;
            let (e1, e2) = orthonormalize(&g, &y, &u);
            let on = inst.flag_curvature_closed_form(x, &e1, &e2)?;
            let d = on
                .d_form
                .ok_or_else(|| CliError::Input("orthonormalized flag was not detected".into()))?;
            d_form = d_form.max((d - on.value).abs());
        }
        out.push(CheckRecord::new(
            format!("spray_vs_closed_form/{}", phi.kind().name()),
            general,
            1e-6,
            seed + 1,
            50,
        ));
        out.push(CheckRecord::new(
            format!("d_form_vs_closed_form/{}", phi.kind().name()),
            d_form,
            1e-10,
            seed + 1,
            50,
        ));
    }
    Ok(out)
}

/// Berwald residual and spray witness of the transformed instance.
fn berwald_case(name: &str, c: &[f64], f: &str, phi: PhiFamily, seed: u64) -> Res<(f64, f64)> {
    let p = pair(name, c, f)?;
    let samples = Sampler::new(seed).points(p.base(), 50)?;
    let residual = conformal::berwald_residual(&p, &samples)?;
    let inst = p.instance(phi)?;
    let mut witness = 0.0f64;
    for (x, y) in inst.sample_flags(20, seed)? {
        witness = witness.max(inst.berwald_witness_at(&x, &y)?);
    }
    Ok((residual, witness))
}

fn berwald_witness(seed: u64) -> Res<Vec<CheckRecord>> {
    let mut out = Vec::new();
    let mut cases: Vec<(String, &str, Vec<f64>, &str, PhiFamily, Option<f64>)> = Vec::new();
    for a in [1.0, -2.0] {
        cases.push((
            format!("sol2/a={a}/f=ln(y)"),
            "sol2",
            vec![a, 0.0],
            "ln(y)",
            general_phi()?,
            None,
        ));
        cases.push((
            format!("sol2/a={a}/f=0"),
            "sol2",
            vec![a, 0.0],
            "0",
            general_phi()?,
            Some(a),
        ));
        cases.push((
            format!("sol3/a={a}/f=ln(z)"),
            "sol3",
            vec![0.0, 0.0, a],
            "ln(z)",
            general_phi()?,
            None,
        ));
        cases.push((
            format!("sol3/a={a}/f=0"),
            "sol3",
            vec![0.0, 0.0, a],
            "0",
            general_phi()?,
            Some(a),
        ));
    }
    cases.push((
        "sol2/randers/a=0.5/f=ln(y)".into(),
        "sol2",
        vec![0.5, 0.0],
        "ln(y)",
        PhiFamily::randers(),
        None,
    ));
    cases.push((
        "sol3/kropina/a=0.5/f=ln(z)".into(),
        "sol3",
        vec![0.0, 0.0, 0.5],
        "ln(z)",
        PhiFamily::kropina(),
        None,
    ));
    for (label, name, c, f, phi, negative) in cases {
        let (r, w) = berwald_case(name, &c, f, phi, seed)?;
        let agree = (r <= 1e-9) == (w <= 1e-6);
        out.push(
            CheckRecord::new(
                format!("residual_witness_agreement/{label}"),
                if agree { 0.0 } else { 1.0 },
                0.0,
                seed,
                50,
            )
            .note(format!("residual {r:e}, witness {w:e}")),
        );
        match negative {
            None => out.push(CheckRecord::new(
                format!("berwald_residual/{label}"),
                r,
                1e-9,
                seed,
                50,
            )),
            Some(a) => out.push(
                CheckRecord::new(
                    format!("berwald_residual_floor/{label}"),
                    a.abs() - r,
                    1e-9,
                    seed,
                    50,
                )
                .note("|a| minus the residual"),
            ),
        }
    }
    Ok(out)
}

/// Largest |value| per record kind for one Heisenberg input.
fn heisenberg_douglas(field: &[f64], f: &str, samples: &[Vec<f64>]) -> Res<[Vec<f64>; 3]> {
    let lie = builtin_model("heisenberg")?;
    let f = lie.geometry.expr(f)?;
    let inv = InvariantField::new(field.to_vec());
    let (mut chart, mut frame, mut pde) = (Vec::new(), Vec::new(), Vec::new());
    for x in samples {
        let pairs = left_invariant_douglas_residual(&lie.geometry, &inv, &f, x)?;
        chart.push(
            pairs
                .iter()
                .map(|p| p.chart_level.abs())
                .fold(0.0, f64::max),
        );
        frame.push(
            pairs
                .iter()
                .map(|p| p.frame_level.abs())
                .fold(0.0, f64::max),
        );
        pde.push(
            pde_residuals(&lie, &inv, &f, x)?
                .iter()
                .filter(|r| r.source == ResidualSource::Published)
                .map(|r| r.value.abs())
                .fold(0.0, f64::max),
        );
    }
    Ok([chart, frame, pde])
}

fn douglas_agreement(seed: u64) -> Res<Vec<CheckRecord>> {
    let h = model("heisenberg")?;
    let samples = Sampler::new(seed).points(&h, 20)?;
    let labels = ["chart", "frame", "pde"];
    let mut out = Vec::new();
    let good = heisenberg_douglas(&[2.0, 1.0, 0.0], "x + y/2", &samples)?;
    for (label, values) in labels.iter().zip(&good) {
        let worst = values.iter().copied().fold(0.0, f64::max);
        out.push(CheckRecord::new(
            format!("vanishes/{label}/(2,1,0)/f=x+y/2"),
            worst,
            1e-9,
            seed,
            20,
        ));
    }
    let bad = heisenberg_douglas(&[0.0, 0.0, 1.0], "0", &samples)?;
    for (label, values) in labels.iter().zip(&bad) {
        let least = values.iter().copied().fold(f64::INFINITY, f64::min);
        out.push(
            CheckRecord::new(
                format!("obstructed/{label}/(0,0,1)/f=0"),
                0.99 - least,
                0.0,
                seed,
                20,
            )
            .note("0.99 minus the smallest magnitude over samples"),
        );
    }
    Ok(out)
}

fn corollaries(seed: u64) -> Res<Vec<CheckRecord>> {
    let mut out = Vec::new();
    for (label, name, c, f) in [
        (
            "sol2/X=0.8e2/f=ln(y)+x",
            "sol2",
            vec![0.0, 0.8],
            "ln(y) + x",
        ),
        (
            "sol3/X=0.6e1-0.4e3/f=ln(z)+0.7",
            "sol3",
            vec![0.6, 0.0, -0.4],
            "ln(z) + 0.7",
        ),
    ] {
        let p = pair(name, &c, f)?;
        let samples = Sampler::new(seed).points(p.base(), 50)?;
        out.push(CheckRecord::new(
            format!("douglas/{label}"),
            conformal::douglas_max(&p, &samples, Basis::Frame)?,
            1e-9,
            seed,
            50,
        ));
    }
    let flat = model("euclidean2")?;
    let b = VectorFieldExpr::constant(&[1.0, 0.0], flat.coords())?;
    let p = conformal::conformal_transform(&flat, &b, &flat.expr("y")?)?;
    let samples = Sampler::new(seed).points(&flat, 50)?;
    let r = conformal::gradient_proportionality(&p, &samples)?;
    out.push(
        CheckRecord::new(
            "proportionality/f=y/b=(1,0)",
            (r - 1.0).abs(),
            1e-12,
            seed,
            50,
        )
        .note("distance of the residual from 1"),
    );
    Ok(out)
}

fn ground_truths(seed: u64) -> Res<Vec<CheckRecord>> {
    let mut out = Vec::new();
    let sol2 = model("sol2")?;
    let mut sampler = Sampler::new(seed);
    let mut worst = 0.0f64;
    let mut planes = 0;
    while planes < 50 {
        let x = sampler.point(&sol2)?;
        let (u, v) = (sampler.vector(2), sampler.vector(2));
        match riemann::sectional_curvature(&sol2, &x, &u, &v) {
            Ok(k) => {
                worst = worst.max((k + 1.0).abs());
                planes += 1;
            }
            Err(finsler_core::GeometryError::DegenerateFlag { .. }) => {}
            Err(e) => return Err(e.into()),
        }
    }
    out.push(CheckRecord::new(
        "sol2_curvature_minus_one",
        worst,
        1e-9,
        seed,
        50,
    ));

    let h = model("heisenberg")?;
    let e = h.frame_fields()?.to_vec();
    let samples = Sampler::new(seed).points(&h, 50)?;
    for ((i, j), expected) in [((0, 1), -0.75), ((0, 2), 0.25), ((1, 2), 0.25)] {
        let mut worst = 0.0f64;
        for x in &samples {
            let k = riemann::sectional_curvature(&h, x, &e[i].eval(x)?, &e[j].eval(x)?)?;
            worst = worst.max((k - expected).abs());
        }
        out.push(CheckRecord::new(
            format!("heisenberg_K(e{},e{})={expected}", i + 1, j + 1),
            worst,
            1e-9,
            seed,
            50,
        ));
    }
    let mut sampler = Sampler::new(seed);
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..50)
        .map(|_| {
            let a = (0..3).map(|_| sampler.uniform(-2.0, 2.0)).collect();
            let p = (0..3).map(|_| sampler.uniform(-2.0, 2.0)).collect();
            (a, p)
        })
        .collect();
    out.push(CheckRecord::new(
        "heisenberg_left_invariance",
        left_invariance_check(&h, &pairs)?,
        1e-9,
        seed,
        50,
    ));
    Ok(out)
}

fn conformal_invariants(seed: u64) -> Res<Vec<CheckRecord>> {
    let corpus: [(&str, Vec<f64>, &str); 9] = [
        ("sol2", vec![1.0, 0.0], "ln(y)"),
        ("sol2", vec![-2.0, 0.0], "ln(y)"),
        ("sol3", vec![0.0, 0.0, 1.0], "ln(z)"),
        ("sol3", vec![0.0, 0.0, -2.0], "ln(z)"),
        ("heisenberg", vec![2.0, 1.0, 0.0], "x + y/2"),
        ("sol2", vec![0.0, 0.8], "ln(y) + x"),
        ("sol3", vec![0.6, 0.0, -0.4], "ln(z) + 0.7"),
        ("sol2", vec![0.4, 0.3], "ln(y) + x"),
        ("heisenberg", vec![0.3, 0.2, 0.0], "x + y/2"),
    ];
    let mut out = Vec::new();
    for (name, c, f) in corpus {
        let p = pair(name, &c, f)?;
        let base = p.base_instance(general_phi()?)?;
        let changed = p.instance(general_phi()?)?;
        let (mut norms, mut scaled) = (0.0f64, 0.0f64);
        for (x, y) in base.sample_flags(100, seed)? {
            let (b, bt) = p.norms(&x)?;
            norms = norms.max((b - bt).abs());
            let rhs = p
                .factor()
                .eval(&x)
                .map_err(finsler_core::GeometryError::from)?
                .exp()
                * base.eval_f(&x, &y)?;
            scaled = scaled.max((changed.eval_f(&x, &y)? - rhs).abs() / rhs.abs());
        }
        let coefficients: Vec<String> = c.iter().map(|v| v.to_string()).collect();
        let label = format!(
            "{name}/X=({})/f={}",
            coefficients.join(","),
            f.replace(' ', "")
        );
        out.push(CheckRecord::new(
            format!("norm_preserved/{label}"),
            norms,
            1e-12,
            seed,
            100,
        ));
        out.push(
            CheckRecord::new(format!("scaled_metric/{label}"), scaled, 1e-12, seed, 100)
                .note("relative"),
        );
    }
    let fields = |m: &GeometryModel| -> Res<Vec<VectorFieldExpr>> {
        Ok(if m.dim() == 2 {
            vec![m.field(&["x*y", "1 + x^2"])?, m.field(&["1", "y"])?]
        } else {
            vec![
                m.field(&["sin(x)", "y*z", "1 + x"])?,
                m.field(&["z", "1", "x*y"])?,
            ]
        })
    };
    for (name, f) in [
        ("sol2", "ln(y) + x^2"),
        ("heisenberg", "sin(x) + y*z/3"),
        ("sol3", "x - ln(z)"),
    ] {
        let m = model(name)?;
        let fs = fields(&m)?;
        let p = conformal::conformal_transform(&m, &fs[0], &m.expr(f)?)?;
        let mut sampler = Sampler::new(seed);
        let mut worst = 0.0f64;
        for x in Sampler::new(seed).points(&m, 50)? {
            let y = VectorFieldExpr::constant(&sampler.vector(m.dim()), m.coords())?;
            for z in [&fs[0], &fs[1], p.transformed_field()] {
                let a = conformal::conformal_connection(&p, &y, z, &x)?;
                let b = conformal::transformed_connection(&p, &y, z, &x)?;
                let scale = 1.0 + b.iter().map(|v| v.abs()).fold(0.0, f64::max);
                for (u, v) in a.iter().zip(&b) {
                    worst = worst.max((u - v).abs() / scale);
                }
            }
        }
        out.push(
            CheckRecord::new(
                format!("kuhnel_formula/{name}/f={}", f.replace(' ', "")),
                worst,
                1e-8,
                seed,
                50,
            )
            .note("scaled by 1 + max |∇̃|"),
        );
    }
    Ok(out)
}

fn admissibility(seed: u64) -> Res<Vec<CheckRecord>> {
    let grid = 401;
    let mut out = Vec::new();
    let record = |label: String, margin: f64, expect_pass: bool| {
        let (residual, note) = if expect_pass {
            (-margin, "negated smallest margin")
        } else {
            (margin, "smallest margin, expected non-positive")
        };
        CheckRecord::new(label, residual, 0.0, seed, grid).note(note)
    };
    for b in [0.1, 0.5, 0.9] {
        let a = phi_admissible(&PhiFamily::randers(), b, grid, 3)?;
        out.push(record(
            format!("admissible/randers/b={b}"),
            a.worst_margin(),
            true,
        ));
    }
    let m = PhiFamily::matsumoto();
    out.push(record(
        "admissible/matsumoto/b=0.4".into(),
        phi_admissible(&m, 0.4, grid, 3)?.worst_margin(),
        true,
    ));
    out.push(record(
        "inadmissible/matsumoto/b=0.6".into(),
        phi_admissible(&m, 0.6, grid, 3)?.worst_margin(),
        false,
    ));
    Ok(out)
}
