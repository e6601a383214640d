//! Single-model subcommands.

use finsler_core::conformal::{self, Basis, ConformalPair};
use finsler_core::finsler::{phi_admissible, FinslerInstance, PhiFamily, PhiKind};
use finsler_core::homogeneous::{
    bracket_residual, frame_orthonormality, left_invariance_check, left_invariant_douglas_residual,
    pde_residuals, InvariantField, ResidualSource,
};
use finsler_core::riemann::{self, GeometryModel, VectorFieldExpr};
use finsler_core::sampling::Sampler;
use finsler_core::GeometryError;

use crate::error::CliError;
use crate::model_file::{FieldSpec, LoadedModel, PhiSpec};
use crate::report::{CheckRecord, CheckReport, Sample};

pub const FRAME_TOL: f64 = 1e-10;
pub const INVARIANCE_TOL: f64 = 1e-9;
pub const BERWALD_TOL: f64 = 1e-9;
pub const WITNESS_TOL: f64 = 1e-6;
pub const DOUGLAS_TOL: f64 = 1e-9;
pub const CLOSED_FORM_TOL: f64 = 1e-6;
const ADMISSIBILITY_GRID: usize = 201;

/// Everything a subcommand needs after flags and model file are merged.
#[derive(Debug, Clone)]
pub struct Setup {
    pub model: LoadedModel,
    pub field: Option<FieldSpec>,
    pub phi: Option<PhiSpec>,
    pub f: Option<String>,
    pub seed: u64,
    pub count: usize,
}

impl Setup {
    fn geometry(&self) -> &GeometryModel {
        self.model.geometry()
    }

    fn report(&self, command: &str) -> CheckReport {
        CheckReport::new(
            command,
            self.geometry().name(),
            &self.model.file.to_json(),
            self.seed,
            self.count,
        )
    }

    fn samples(&self) -> Result<Vec<Vec<f64>>, CliError> {
        Ok(Sampler::new(self.seed).points(self.geometry(), self.count)?)
    }

    fn phi(&self) -> Result<PhiFamily, CliError> {
        match &self.phi {
            Some(spec) => spec.build(),
            None => Ok(PhiFamily::randers()),
        }
    }

    fn factor(&self) -> Result<finsler_core::exprcore::ScalarExpr, CliError> {
        Ok(self.geometry().expr(self.f.as_deref().unwrap_or("0"))?)
    }

    fn invariant_field(&self) -> Option<InvariantField> {
        match &self.field {
            Some(FieldSpec::Frame(c)) => Some(InvariantField::new(c.clone())),
            _ => None,
        }
    }

    fn vector_field(&self) -> Result<Option<VectorFieldExpr>, CliError> {
        let g = self.geometry();
        Ok(match &self.field {
            None => None,
            Some(FieldSpec::Frame(c)) => {
                if g.frame().is_none() {
                    return Err(CliError::Input(
                        "--X needs a model with a frame; use --X-chart".into(),
                    ));
                }
                Some(InvariantField::new(c.clone()).to_field(g)?)
            }
            Some(FieldSpec::Chart(texts)) => Some(g.field(texts)?),
        })
    }

    fn required_field(&self) -> Result<VectorFieldExpr, CliError> {
        self.vector_field()?.ok_or_else(|| {
            CliError::Input("this command needs a vector field (--X or --X-chart)".into())
        })
    }

    fn pair(&self) -> Result<ConformalPair, CliError> {
        Ok(conformal::conformal_transform(
            self.geometry(),
            &self.required_field()?,
            &self.factor()?,
        )?)
    }

    fn basis(&self) -> Basis {
        if self.geometry().frame().is_some() {
            Basis::Frame
        } else {
            Basis::Coordinate
        }
    }
}

fn check_len(what: &str, v: &[f64], n: usize) -> Result<(), CliError> {
    if v.len() != n {
        return Err(CliError::Input(format!(
            "{what} needs {n} components, got {}",
            v.len()
        )));
    }
    Ok(())
}

pub fn validate(setup: &Setup) -> Result<CheckReport, CliError> {
    let mut report = setup.report("validate");
    let g = setup.geometry();
    let samples = setup.samples()?;
    let (seed, count) = (setup.seed, setup.count);
    let tol = setup.model.tolerances();

    let mut failures = 0usize;
    for x in &samples {
        match riemann::metric_at(g, x) {
            Ok(_) => {}
            Err(GeometryError::NotPositiveDefinite { .. } | GeometryError::Singular { .. }) => {
                failures += 1
            }
            Err(e) => return Err(e.into()),
        }
    }
    report.push(CheckRecord::new(
        "positive_definite_failures",
        failures as f64,
        0.0,
        seed,
        count,
    ));
    if failures > 0 {
        return Ok(report);
    }
    if g.frame().is_some() {
        let r = frame_orthonormality(g, &samples)?;
        report.push(CheckRecord::new(
            "frame_orthonormality",
            r,
            tol.frame.unwrap_or(FRAME_TOL),
            seed,
            count,
        ));
    }
    if !setup.model.lie.brackets.is_empty() {
        let r = bracket_residual(&setup.model.lie, &samples)?;
        report.push(CheckRecord::new(
            "structure_constants",
            r,
            tol.frame.unwrap_or(FRAME_TOL),
            seed,
            count,
        ));
    }
    if g.multiplication().is_some() {
        let mut sampler = Sampler::new(seed);
        let pairs = (0..count)
            .map(|_| Ok((sampler.point(g)?, sampler.point(g)?)))
            .collect::<Result<Vec<_>, GeometryError>>()?;
        let r = left_invariance_check(g, &pairs)?;
        report.push(CheckRecord::new(
            "left_invariance",
            r,
            tol.invariance.unwrap_or(INVARIANCE_TOL),
            seed,
            count,
        ));
    }
    if let Some(field) = setup.vector_field()? {
        let phi = setup.phi()?;
        let inst = FinslerInstance::new(g.clone(), field, phi.clone())?;
        let mut b_max = 0.0f64;
        for x in &samples {
            b_max = b_max.max(inst.point_data(x)?.b2.sqrt());
        }
        report.push(
            CheckRecord::new("field_norm_below_b0", b_max, phi.b0(), seed, count)
                .note("max ‖X‖ over samples against the validity radius b0"),
        );
        if b_max < phi.b0()
            && phi.kind() != PhiKind::Riemannian
            && !(phi.is_conic() && b_max <= 0.05)
        {
            let adm = phi_admissible(&phi, b_max, ADMISSIBILITY_GRID, g.dim())?;
            report.push(
                CheckRecord::new(
                    "phi_admissibility",
                    -adm.worst_margin(),
                    0.0,
                    seed,
                    ADMISSIBILITY_GRID,
                )
                .note("negated smallest margin of the admissibility conditions at b = max ‖X‖"),
            );
        }
    }
    Ok(report)
}

pub fn curvature(
    setup: &Setup,
    at: Option<Vec<f64>>,
    u: Option<Vec<f64>>,
    v: Option<Vec<f64>>,
) -> Result<CheckReport, CliError> {
    let mut report = setup.report("curvature");
    let g = setup.geometry();
    let n = g.dim();
    let planes = match (at, u, v) {
        (Some(x), Some(u), Some(v)) => {
            for (what, w) in [("--at", &x), ("--u", &u), ("--v", &v)] {
                check_len(what, w, n)?;
            }
            vec![(x, u, v)]
        }
        (None, None, None) => {
            let mut sampler = Sampler::new(setup.seed);
            (0..setup.count)
                .map(|_| Ok((sampler.point(g)?, sampler.vector(n), sampler.vector(n))))
                .collect::<Result<Vec<_>, GeometryError>>()?
        }
        _ => return Err(CliError::Input("--at, --u and --v go together".into())),
    };
    for (x, u, v) in planes {
        let k = riemann::sectional_curvature(g, &x, &u, &v)?;
        report.sample(Sample {
            quantity: "sectional_curvature".into(),
            x,
            y: None,
            u: Some(u),
            v: Some(v),
            value: k,
        });
    }
    Ok(report)
}

pub fn flag_curvature(
    setup: &Setup,
    at: Option<Vec<f64>>,
    y: Option<Vec<f64>>,
    u: Option<Vec<f64>>,
) -> Result<CheckReport, CliError> {
    let mut report = setup.report("flag-curvature");
    let g = setup.geometry();
    let n = g.dim();
    let phi = setup.phi()?;
    let field = match setup.vector_field()? {
        Some(f) => f,
        None => VectorFieldExpr::zero(g.coords())?,
    };
    let inst = match &setup.f {
        Some(f) => FinslerInstance::with_conformal(g, &field, phi, &g.expr(f)?)?,
        None => FinslerInstance::new(g.clone(), field, phi)?,
    };
    let flags = match (at, y, u) {
        (Some(x), Some(y), Some(u)) => {
            for (what, w) in [("--at", &x), ("--y", &y), ("--u", &u)] {
                check_len(what, w, n)?;
            }
            vec![(x, y, u)]
        }
        (None, None, None) => {
            let mut sampler = Sampler::new(setup.seed);
            let mut out = Vec::with_capacity(setup.count);
            for _ in 0..setup.count {
                let x = sampler.point(inst.geometry())?;
                let y = inst.sample_direction(&mut sampler, &x)?;
                out.push((x, y, sampler.vector(n)));
            }
            out
        }
        _ => return Err(CliError::Input("--at, --y and --u go together".into())),
    };
    let mut closed_gap: Option<f64> = None;
    let total = flags.len();
    for (x, y, u) in flags {
        let k = inst.flag_curvature_spray(&x, &y, &u)?;
        match inst.flag_curvature_closed_form(&x, &y, &u) {
            Ok(c) => closed_gap = Some(closed_gap.unwrap_or(0.0).max((k - c.value).abs())),
            Err(GeometryError::NotParallel { .. }) => {}
            Err(e) => return Err(e.into()),
        }
        report.sample(Sample {
            quantity: "flag_curvature".into(),
            x,
            y: Some(y),
            u: Some(u),
            v: None,
            value: k,
        });
    }
    if let Some(gap) = closed_gap {
        report.push(
            CheckRecord::new(
                "closed_form_agreement",
                gap,
                CLOSED_FORM_TOL,
                setup.seed,
                total,
            )
            .note("spray-based value against the closed form for parallel β"),
        );
    }
    Ok(report)
}

pub fn check_berwald(setup: &Setup, witness: bool) -> Result<CheckReport, CliError> {
    let mut report = setup.report("check-berwald");
    let pair = setup.pair()?;
    let samples = setup.samples()?;
    let tol = setup.model.tolerances();
    let r = conformal::berwald_residual_with(&pair, &samples, setup.basis())?;
    report.push(
        CheckRecord::new(
            "berwald_residual",
            r,
            tol.berwald.unwrap_or(BERWALD_TOL),
            setup.seed,
            setup.count,
        )
        .note("max ‖∇_Y X − g(X,Y)∇f + (Xf)Y‖_g over basis fields Y"),
    );
    if witness {
        let inst = pair.instance(setup.phi()?)?;
        let mut worst = 0.0f64;
        for (x, y) in inst.sample_flags(setup.count, setup.seed)? {
            worst = worst.max(inst.berwald_witness_at(&x, &y)?);
        }
        report.push(
            CheckRecord::new(
                "spray_witness",
                worst,
                tol.witness.unwrap_or(WITNESS_TOL),
                setup.seed,
                setup.count,
            )
            .note("max |∂³G̃^i/∂y³| of the transformed metric"),
        );
    }
    Ok(report)
}

pub fn check_douglas(setup: &Setup) -> Result<CheckReport, CliError> {
    let mut report = setup.report("check-douglas");
    conformal::require_randers(&setup.phi()?)?;
    let pair = setup.pair()?;
    let samples = setup.samples()?;
    let (seed, count) = (setup.seed, setup.count);
    let tol = setup.model.tolerances().douglas.unwrap_or(DOUGLAS_TOL);
    let basis = setup.basis();
    report.push(
        CheckRecord::new(
            "douglas_residual",
            conformal::douglas_max(&pair, &samples, basis)?,
            tol,
            seed,
            count,
        )
        .note("max |dβ(Y,Z) + (Yf)g(X,Z) − (Zf)g(X,Y)| over basis pairs"),
    );
    report.push(
        CheckRecord::new(
            "transformed_closedness",
            conformal::transformed_closedness(&pair, &samples, basis)?,
            tol,
            seed,
            count,
        )
        .informational()
        .note("max |dβ̃| of the transformed 1-form"),
    );
    let (Some(field), true) = (setup.invariant_field(), setup.geometry().frame().is_some()) else {
        return Ok(report);
    };
    let f = setup.factor()?;
    let (mut frame, mut opposite) = (0.0f64, 0.0f64);
    for x in &samples {
        for p in left_invariant_douglas_residual(setup.geometry(), &field, &f, x)? {
            frame = frame.max(p.frame_level.abs());
            opposite = opposite.max(p.opposite_sign.abs());
        }
    }
    report.push(
        CheckRecord::new("frame_level_residual", frame, tol, seed, count)
            .informational()
            .note("g(X,[Z,Y]) + (Yf)g(X,Z) − (Zf)g(X,Y) on frame pairs"),
    );
    report.push(
        CheckRecord::new("frame_level_opposite_sign", opposite, tol, seed, count)
            .informational()
            .note("same with g(X,[Y,Z])"),
    );
    if setup.model.builtin {
        let mut names: Vec<(String, ResidualSource, f64)> = Vec::new();
        for x in &samples {
            for r in pde_residuals(&setup.model.lie, &field, &f, x)? {
                match names
                    .iter_mut()
                    .find(|(n, s, _)| *n == r.name && *s == r.source)
                {
                    Some(entry) => entry.2 = entry.2.max(r.value.abs()),
                    None => names.push((r.name, r.source, r.value.abs())),
                }
            }
        }
        for (name, source, value) in names {
            let (prefix, note) = match source {
                ResidualSource::Published => ("pde", "published condition"),
                ResidualSource::Derived => (
                    "pde_derived",
                    "condition re-derived from the exterior derivative",
                ),
            };
            report.push(
                CheckRecord::new(format!("{prefix}:{name}"), value, tol, seed, count)
                    .informational()
                    .note(note),
            );
        }
    }
    Ok(report)
}
