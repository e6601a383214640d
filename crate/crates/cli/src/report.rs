//! Check reports: structured JSON with 17 significant digits per number,
//! plus a plain-text table for the terminal.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use sha2::{Digest, Sha256};

pub const ARTIFACT: &str = "finsler-cli";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    /// `Pass` iff `residual ≤ tolerance`; NaN fails.
    pub fn of(residual: f64, tolerance: f64) -> Self {
        if residual <= tolerance {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criterion: Option<u8>,
    pub residual: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    /// Non-gating records are reported but never change the exit status.
    pub gating: bool,
    pub seed: u64,
    pub count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckRecord {
    pub fn new(
        name: impl Into<String>,
        residual: f64,
        tolerance: f64,
        seed: u64,
        count: usize,
    ) -> Self {
        CheckRecord {
            name: name.into(),
            criterion: None,
            residual,
            tolerance,
            verdict: Verdict::of(residual, tolerance),
            gating: true,
            seed,
            count,
            note: None,
        }
    }

    pub fn criterion(mut self, id: u8) -> Self {
        self.criterion = Some(id);
        self
    }

    pub fn informational(mut self) -> Self {
        self.gating = false;
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// A raw evaluated quantity, kept for external plotting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    pub quantity: String,
    pub x: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<f64>>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionSummary {
    pub id: u8,
    pub verdict: Verdict,
    pub checks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSummary {
    pub name: String,
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub artifact: &'static str,
    pub version: &'static str,
    pub command: String,
    pub model: ModelSummary,
    pub seed: u64,
    pub sample_count: usize,
    pub checks: Vec<CheckRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub criteria: Vec<CriterionSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub samples: Vec<Sample>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl CheckReport {
    pub fn new(
        command: &str,
        model: &str,
        model_json: &str,
        seed: u64,
        sample_count: usize,
    ) -> Self {
        CheckReport {
            artifact: ARTIFACT,
            version: VERSION,
            command: command.to_string(),
            model: ModelSummary {
                name: model.to_string(),
                digest: digest(model_json),
            },
            seed,
            sample_count,
            checks: Vec::new(),
            criteria: Vec::new(),
            samples: Vec::new(),
            wall_time_s: None,
        }
    }

    pub fn push(&mut self, record: CheckRecord) {
        self.checks.push(record);
    }

    pub fn sample(&mut self, sample: Sample) {
        self.samples.push(sample);
    }

    /// True when every gating record passes.
    pub fn passed(&self) -> bool {
        self.checks
            .iter()
            .all(|c| !c.gating || c.verdict == Verdict::Pass)
    }

    /// Fills `criteria` from the gating records tagged with a criterion id.
    pub fn summarize_criteria(&mut self) {
        let mut ids: Vec<u8> = self.checks.iter().filter_map(|c| c.criterion).collect();
        ids.sort_unstable();
        ids.dedup();
        self.criteria = ids
            .into_iter()
            .map(|id| {
                let records: Vec<&CheckRecord> = self
                    .checks
                    .iter()
                    .filter(|c| c.criterion == Some(id) && c.gating)
                    .collect();
                let ok = records.iter().all(|c| c.verdict == Verdict::Pass);
                CriterionSummary {
                    id,
                    verdict: if ok { Verdict::Pass } else { Verdict::Fail },
                    checks: records.len(),
                }
            })
            .collect();
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }

    pub fn table(&self) -> String {
        let mut out = format!(
            "{} {}  model {} ({})  seed {}  samples {}\n",
            self.command,
            self.version,
            self.model.name,
            &self.model.digest[..12],
            self.seed,
            self.sample_count
        );
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        for c in &self.checks {
            let tag = if c.gating { c.verdict.label() } else { "info" };
            out.push_str(&format!(
                "{tag:<4}  {:<width$}  residual {}  tolerance {}\n",
                c.name,
                number(c.residual),
                number(c.tolerance)
            ));
        }
        for s in &self.samples {
            out.push_str(&format!(
                "{}  x = {:?}  value {}\n",
                s.quantity,
                s.x,
                number(s.value)
            ));
        }
        for c in &self.criteria {
            out.push_str(&format!("criterion {:>2}: {}\n", c.id, c.verdict.label()));
        }
        if let Some(t) = self.wall_time_s {
            out.push_str(&format!("wall time {t:.3} s\n"));
        }
        let verdict = if self.passed() {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        out.push_str(&format!("overall: {}\n", verdict.label()));
        out
    }
}

/// Seventeen significant digits in scientific notation.
pub fn number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// Lower-case hex SHA-256.
pub fn digest(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

struct SignificantDigits<'a>(PrettyFormatter<'a>);

impl Formatter for SignificantDigits<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(number(value).as_bytes())
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Pretty JSON with every float at 17 significant digits; non-finite floats
/// become `null`.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut out, SignificantDigits(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .expect("report types serialize infallibly");
    out.push(b'\n');
    String::from_utf8(out).expect("JSON output is UTF-8")
}
