//! On-disk model description, in the same JSON encoding as reports.

use std::path::Path;

use finsler_core::finsler::PhiFamily;
use finsler_core::homogeneous::{builtin_model, DeclaredBracket, LieModel};
use finsler_core::riemann::{GeometryModel, MetricSource};
use finsler_core::sampling::{DEFAULT_SAMPLE_COUNT, DEFAULT_SEED};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSpec {
    pub fields: Vec<Vec<String>>,
    pub orthonormal: bool,
}

/// Group law over the primed coordinates of the left factor followed by the
/// plain coordinates of the right factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiplicationSpec {
    pub law: Vec<String>,
    pub identity: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketSpec {
    pub i: usize,
    pub j: usize,
    pub coefficients: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldSpec {
    /// Constant coefficients in the model frame.
    Frame(Vec<f64>),
    /// Chart components as expressions.
    Chart(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiSpec {
    /// `riemannian`, `randers`, `kropina`, `matsumoto`, `custom` (in `s`) or
    /// `custom-general` (in `w = b²` and `s`).
    pub family: String,
    /// Validity radius; absent means unbounded for custom families.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expression: Option<String>,
}

impl PhiSpec {
    pub fn build(&self) -> Result<PhiFamily, CliError> {
        let b0 = self.b0.unwrap_or(f64::INFINITY);
        let expression = || {
            self.expression.as_deref().ok_or_else(|| {
                CliError::Input(format!("φ family {:?} needs an expression", self.family))
            })
        };
        let phi = match self.family.as_str() {
            "custom" => PhiFamily::custom(expression()?, b0)?,
            "custom-general" => PhiFamily::custom_general(expression()?, b0)?,
            name => {
                let phi = PhiFamily::named(name)?;
                match self.b0 {
                    Some(b0) if b0 != phi.b0() => {
                        return Err(CliError::Input(format!(
                            "the {name} family has b0 = {}; use a custom family for another radius",
                            phi.b0()
                        )))
                    }
                    _ => phi,
                }
            }
        };
        Ok(phi)
    }
}

/// Per-check tolerance overrides.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub berwald: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub douglas: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invariance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub name: String,
    pub dim: usize,
    pub coords: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<FrameSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplication: Option<MultiplicationSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub domain: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_box: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub brackets: Vec<BracketSpec>,
    #[serde(default, rename = "X", skip_serializing_if = "Option::is_none")]
    pub x: Option<FieldSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<PhiSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
}

/// A model ready for evaluation, with the built-in group data when it came
/// from `builtin:NAME`.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub file: ModelFile,
    pub lie: LieModel,
    pub builtin: bool,
}

impl LoadedModel {
    pub fn geometry(&self) -> &GeometryModel {
        &self.lie.geometry
    }

    pub fn seed(&self) -> u64 {
        self.file.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn sample_count(&self) -> usize {
        self.file.sample_count.unwrap_or(DEFAULT_SAMPLE_COUNT)
    }

    pub fn tolerances(&self) -> Tolerances {
        self.file.tolerances.clone().unwrap_or_default()
    }
}

impl ModelFile {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| CliError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        file.check()?;
        Ok(file)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        crate::report::to_json(self)
    }

    fn check(&self) -> Result<(), CliError> {
        if self.coords.len() != self.dim {
            return Err(CliError::Input(format!(
                "dim is {} but {} coordinates are declared",
                self.dim,
                self.coords.len()
            )));
        }
        if self.metric.is_some() == self.frame.is_some() {
            return Err(CliError::Input(
                "exactly one of `metric` and `frame` must be given".into(),
            ));
        }
        if self.sample_count == Some(0) {
            return Err(CliError::Input("sample_count must be at least 1".into()));
        }
        Ok(())
    }

    pub fn build(&self) -> Result<LieModel, CliError> {
        self.check()?;
        let coords: Vec<&str> = self.coords.iter().map(String::as_str).collect();
        let mut geometry = match (&self.metric, &self.frame) {
            (Some(metric), None) => GeometryModel::from_components(&self.name, &coords, metric)?,
            (None, Some(frame)) if frame.orthonormal => {
                GeometryModel::from_frame(&self.name, &coords, &frame.fields)?
            }
            (None, Some(_)) => {
                return Err(CliError::Input(
                    "a frame without a metric must be declared orthonormal".into(),
                ))
            }
            _ => unreachable!("checked above"),
        };
        if !self.domain.is_empty() {
            geometry = geometry.with_domain(&self.domain)?;
        }
        if let Some(bounds) = &self.sample_box {
            geometry = geometry.with_sample_box(bounds.iter().map(|b| (b[0], b[1])).collect())?;
        }
        if let Some(m) = &self.multiplication {
            geometry = geometry.with_multiplication(&m.law, m.identity.clone())?;
        }
        let n = self.dim;
        let mut brackets = Vec::with_capacity(self.brackets.len());
        for b in &self.brackets {
            if b.i >= n || b.j >= n || b.coefficients.len() != n {
                return Err(CliError::Input(format!(
                    "bracket [e{}, e{}] does not fit dimension {n}",
                    b.i + 1,
                    b.j + 1
                )));
            }
            brackets.push(DeclaredBracket {
                i: b.i,
                j: b.j,
                coefficients: b.coefficients.clone(),
            });
        }
        Ok(LieModel { geometry, brackets })
    }

    /// Frame-form description of a built-in group.
    pub fn from_builtin(name: &str) -> Result<Self, CliError> {
        let lie = builtin_model(name)?;
        Ok(Self::describe(&lie))
    }

    /// Serializable description of a model. Frame-bearing models with an
    /// orthonormal frame are written in frame form.
    pub fn describe(lie: &LieModel) -> Self {
        let g = &lie.geometry;
        let render = |fields: &[finsler_core::riemann::VectorFieldExpr]| -> Vec<Vec<String>> {
            fields
                .iter()
                .map(|e| e.components().iter().map(|c| c.to_string()).collect())
                .collect()
        };
        let (metric, frame) = match (g.frame(), g.metric_source()) {
            (Some(frame), _) if frame.orthonormal => (
                None,
                Some(FrameSpec {
                    fields: render(&frame.fields),
                    orthonormal: true,
                }),
            ),
            (_, MetricSource::Components(rows)) => (
                Some(
                    rows.iter()
                        .map(|r| r.iter().map(|c| c.to_string()).collect())
                        .collect(),
                ),
                None,
            ),
            (_, MetricSource::OrthonormalFrame) => {
                unreachable!("frame-defined metrics carry their frame")
            }
        };
        ModelFile {
            name: g.name().to_string(),
            dim: g.dim(),
            coords: g.coords().to_vec(),
            metric,
            frame,
            multiplication: g.multiplication().map(|m| MultiplicationSpec {
                law: m.law().iter().map(|e| e.to_string()).collect(),
                identity: m.identity().to_vec(),
            }),
            domain: g.domain().iter().map(|c| c.to_string()).collect(),
            sample_box: Some(g.sample_box().iter().map(|&(lo, hi)| [lo, hi]).collect()),
            brackets: lie
                .brackets
                .iter()
                .map(|b| BracketSpec {
                    i: b.i,
                    j: b.j,
                    coefficients: b.coefficients.clone(),
                })
                .collect(),
            x: None,
            phi: None,
            f: None,
            seed: Some(DEFAULT_SEED),
            sample_count: Some(DEFAULT_SAMPLE_COUNT),
            tolerances: None,
        }
    }
}

/// Resolves `builtin:NAME` or a path to a model file.
pub fn load_model(source: &str) -> Result<LoadedModel, CliError> {
    if let Some(name) = source.strip_prefix("builtin:") {
        let lie = builtin_model(name)?;
        let file = ModelFile::describe(&lie);
        return Ok(LoadedModel {
            file,
            lie,
            builtin: true,
        });
    }
    let file = ModelFile::read(Path::new(source))?;
    let lie = file.build()?;
    Ok(LoadedModel {
        file,
        lie,
        builtin: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use finsler_core::finsler::PhiKind;

    #[test]
    fn builtins_round_trip() {
        for name in finsler_core::homogeneous::BUILTIN_MODELS {
            let file = ModelFile::from_builtin(name).unwrap();
            assert!(file.metric.is_none() && file.frame.is_some());
            let again = ModelFile::from_json(&file.to_json()).unwrap();
            assert_eq!(again, file);
            let lie = again.build().unwrap();
            assert_eq!(lie.brackets, builtin_model(name).unwrap().brackets);
        }
    }

    #[test]
    fn rejects_both_metric_and_frame() {
        let mut file = ModelFile::from_builtin("sol2").unwrap();
        file.metric = Some(vec![
            vec!["1".into(), "0".into()],
            vec!["0".into(), "1".into()],
        ]);
        assert!(matches!(
            ModelFile::from_json(&file.to_json()),
            Err(CliError::Input(_))
        ));
        file.metric = None;
        file.frame = None;
        assert!(matches!(
            ModelFile::from_json(&file.to_json()),
            Err(CliError::Input(_))
        ));
    }

    #[test]
    fn json_errors_carry_positions() {
        match ModelFile::from_json("{\n  \"name\": 3\n}") {
            Err(CliError::Json { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn phi_specs() {
        let spec = |family: &str, b0: Option<f64>, expression: Option<&str>| PhiSpec {
            family: family.into(),
            b0,
            expression: expression.map(String::from),
        };
        assert_eq!(
            spec("randers", None, None).build().unwrap().kind(),
            PhiKind::Randers
        );
        assert_eq!(
            spec("randers", Some(1.0), None).build().unwrap().kind(),
            PhiKind::Randers
        );
        assert!(spec("matsumoto", Some(0.5), None).build().is_err());
        let general = spec("custom-general", None, Some("1 + s/(1 + w)"))
            .build()
            .unwrap();
        assert!(general.b0().is_infinite());
        assert!(spec("custom", None, None).build().is_err());
    }
}
