//! Command-line surface of the `finsler` tool.

pub mod commands;
pub mod error;
pub mod model_file;
pub mod report;
pub mod suite;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::commands::Setup;
pub use crate::error::CliError;
use crate::model_file::{load_model, FieldSpec, ModelFile, PhiSpec};
use crate::report::CheckReport;

#[derive(Debug, Parser)]
#[command(
    name = "finsler",
    version,
    about = "Checks for (α,β)-Finsler metrics on expression-defined charts"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Positive definiteness, frame, structure constants, left invariance
    /// and admissibility of the model's data.
    Validate {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        instance: InstanceArgs,
    },
    /// Riemannian sectional curvature at one plane or at sampled planes.
    Curvature {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_name = "POINT")]
        at: Option<String>,
        #[arg(long)]
        u: Option<String>,
        #[arg(long)]
        v: Option<String>,
    },
    /// Flag curvature at one flag or at sampled flags.
    FlagCurvature {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, value_name = "POINT")]
        at: Option<String>,
        #[arg(long)]
        y: Option<String>,
        #[arg(long)]
        u: Option<String>,
    },
    /// Berwald residual of the conformally changed metric.
    CheckBerwald {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        instance: InstanceArgs,
        /// Also bound the third y-derivatives of the transformed spray.
        #[arg(long)]
        witness: bool,
    },
    /// Douglas residual of the conformally changed Randers metric.
    CheckDouglas {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        instance: InstanceArgs,
    },
    /// The full verification corpus, summarized per criterion.
    CheckPaper {
        #[arg(long, env = "FINSLER_SEED")]
        seed: Option<u64>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[arg(long)]
        timings: bool,
    },
    /// Writes a built-in model as an editable model file.
    EmitModel {
        name: String,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// `builtin:NAME` or a model file path.
    #[arg(long)]
    pub model: String,
    #[arg(long, env = "FINSLER_SEED")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Structured report destination.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Record wall time in the report.
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct InstanceArgs {
    /// Constant frame coefficients of X, comma separated.
    #[arg(
        long = "X",
        value_name = "COEFFS",
        conflicts_with = "x_chart",
        allow_hyphen_values = true
    )]
    pub x: Option<String>,
    /// Chart components of X as expressions, comma separated.
    #[arg(long = "X-chart", value_name = "EXPRS", allow_hyphen_values = true)]
    pub x_chart: Option<String>,
    /// Conformal factor.
    #[arg(long, allow_hyphen_values = true)]
    pub f: Option<String>,
    /// riemannian, randers, kropina, matsumoto, custom or custom-general.
    #[arg(long)]
    pub phi: Option<String>,
    /// Expression for the custom families.
    #[arg(long = "phi-expr", allow_hyphen_values = true)]
    pub phi_expr: Option<String>,
    #[arg(long)]
    pub b0: Option<f64>,
}

/// Parses a comma-separated list of numbers.
pub fn parse_numbers(what: &str, text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Input(format!("{what}: {t:?} is not a number")))
        })
        .collect()
}

fn numbers(what: &str, text: Option<String>) -> Result<Option<Vec<f64>>, CliError> {
    text.map(|t| parse_numbers(what, &t)).transpose()
}

fn setup(common: &CommonArgs, instance: Option<&InstanceArgs>) -> Result<Setup, CliError> {
    let model = load_model(&common.model)?;
    let mut field = model.file.x.clone();
    let mut phi = model.file.phi.clone();
    let mut f = model.file.f.clone();
    if let Some(i) = instance {
        if let Some(x) = &i.x {
            field = Some(FieldSpec::Frame(parse_numbers("--X", x)?));
        }
        if let Some(x) = &i.x_chart {
            field = Some(FieldSpec::Chart(
                x.split(',').map(|s| s.trim().to_string()).collect(),
            ));
        }
        if let Some(family) = &i.phi {
            phi = Some(PhiSpec {
                family: family.clone(),
                b0: i.b0,
                expression: i.phi_expr.clone(),
            });
        } else if i.b0.is_some() || i.phi_expr.is_some() {
            return Err(CliError::Input("--b0 and --phi-expr need --phi".into()));
        }
        if i.f.is_some() {
            f = i.f.clone();
        }
    }
    let seed = common.seed.unwrap_or(model.seed());
    let count = common.samples.unwrap_or(model.sample_count());
    if count == 0 {
        return Err(CliError::Input("--samples must be at least 1".into()));
    }
    Ok(Setup {
        model,
        field,
        phi,
        f,
        seed,
        count,
    })
}

fn write_file(path: &PathBuf, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Exit status of a completed command: 0 when every gating check passes.
pub fn exit_code(report: &CheckReport) -> i32 {
    if report.passed() {
        0
    } else {
        1
    }
}

fn finish(
    mut report: CheckReport,
    out: &Option<PathBuf>,
    started: Option<Instant>,
) -> Result<i32, CliError> {
    report.wall_time_s = started.map(|t| t.elapsed().as_secs_f64());
    if let Some(path) = out {
        write_file(path, &report.to_json())?;
    }
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(report.table().as_bytes());
    Ok(exit_code(&report))
}

/// Runs one command and returns the process exit status.
pub fn execute(cli: Cli) -> Result<i32, CliError> {
    let clock = |timings: bool| timings.then(Instant::now);
    match cli.command {
        Command::Validate { common, instance } => {
            let started = clock(common.timings);
            let report = commands::validate(&setup(&common, Some(&instance))?)?;
            finish(report, &common.out, started)
        }
        Command::Curvature { common, at, u, v } => {
            let started = clock(common.timings);
            let report = commands::curvature(
                &setup(&common, None)?,
                numbers("--at", at)?,
                numbers("--u", u)?,
                numbers("--v", v)?,
            )?;
            finish(report, &common.out, started)
        }
        Command::FlagCurvature {
            common,
            instance,
            at,
            y,
            u,
        } => {
            let started = clock(common.timings);
            let report = commands::flag_curvature(
                &setup(&common, Some(&instance))?,
                numbers("--at", at)?,
                numbers("--y", y)?,
                numbers("--u", u)?,
            )?;
            finish(report, &common.out, started)
        }
        Command::CheckBerwald {
            common,
            instance,
            witness,
        } => {
            let started = clock(common.timings);
            let report = commands::check_berwald(&setup(&common, Some(&instance))?, witness)?;
            finish(report, &common.out, started)
        }
        Command::CheckDouglas { common, instance } => {
            let started = clock(common.timings);
            let report = commands::check_douglas(&setup(&common, Some(&instance))?)?;
            finish(report, &common.out, started)
        }
        Command::CheckPaper { seed, out, timings } => {
            let started = clock(timings);
            let report = suite::check_paper(seed.unwrap_or(finsler_core::sampling::DEFAULT_SEED))?;
            finish(report, &out, started)
        }
        Command::EmitModel { name, out } => {
            let text = ModelFile::from_builtin(&name)?.to_json();
            match out {
                Some(path) => write_file(&path, &text)?,
                None => print!("{text}"),
            }
            Ok(0)
        }
    }
}

/// Parses `args` and runs the command; usage and input errors give 2.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                CliError::EXIT_CODE
            } else {
                0
            };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            CliError::EXIT_CODE
        }
    }
}
