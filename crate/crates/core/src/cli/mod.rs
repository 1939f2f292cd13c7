//! The `schottky-lab` command line.
//!
//! Every command writes canonical JSON (or SVG/CSV where stated) to stdout.
//! Failures write a JSON object to stderr and map to exit codes:
//! `0` success, `1` validation or numerical failure, `2` budget exceeded,
//! `3` I/O or parse error.

mod commands;
pub mod svg;

use crate::config::{to_canonical_json, ConfigError};
use crate::error::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

pub const THREADS_ENV: &str = "SCHOTTKY_THREADS";

#[derive(Debug, Parser)]
#[command(name = "schottky-lab", version, about = "Schottky sets, their groups and test constructions")]
pub struct Cli {
    /// RNG seed; defaults to the config's `seed`, then 0.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to $SCHOTTKY_THREADS, then all cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that the caps are pairwise disjoint (tangency allowed).
    Validate { config: PathBuf },
    /// Exact spherical measure, optionally with a Monte Carlo estimate.
    Measure {
        config: PathBuf,
        #[arg(long)]
        monte_carlo: Option<usize>,
    },
    /// Orbit balls of diameter at least the threshold.
    Orbit {
        config: PathBuf,
        #[arg(long)]
        min_diam: f64,
        #[arg(long)]
        max_depth: Option<usize>,
        #[arg(long, default_value_t = 1_000_000)]
        max_balls: usize,
        /// Include every ball in the output.
        #[arg(long)]
        list: bool,
    },
    /// Word of the tile containing a point.
    CodePoint {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        point: Vec<f64>,
        #[arg(long, default_value_t = 64)]
        max_depth: usize,
    },
    /// Sampled displacement gap over random non-identity words.
    DiscretenessGap {
        config: PathBuf,
        #[arg(long, default_value_t = 1000)]
        words: usize,
        #[arg(long, default_value_t = 1000)]
        points: usize,
        #[arg(long, default_value_t = 8)]
        max_len: usize,
    },
    /// Double the set along one peripheral sphere.
    Double {
        config: PathBuf,
        #[arg(long)]
        index: usize,
    },
    /// Repeated doubling along the largest peripheral sphere.
    DoublingSeq {
        config: PathBuf,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 4096)]
        max_caps: usize,
    },
    /// Sample the equivariant extension of a boundary map.
    Extend(ExtendArgs),
    /// Ratio distortion envelope.
    QsEnvelope(EnvelopeArgs),
    /// Cross-ratio distortion envelope.
    QmEnvelope(EnvelopeArgs),
    /// Sphere-ladder dilatation estimate at a point.
    Dilatation {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        point: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [1e-2, 1e-3, 1e-4])]
        radii: Vec<f64>,
        #[arg(long, default_value_t = 2)]
        rungs: usize,
    },
    /// Least-squares Möbius fit to sampled point pairs.
    MobiusFit {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
    /// Singular-value conformality defect of the chart Jacobian.
    Conformality {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        point: Vec<f64>,
        #[arg(long, default_value_t = 1e-5)]
        step: f64,
    },
    /// Example constructions.
    #[command(subcommand)]
    Construct(ConstructCommand),
    /// Invariant Beltrami coefficients (n = 2).
    #[command(subcommand)]
    Beltrami(BeltramiCommand),
    /// Convex hulls in the Poincaré ball bounded by the cap hyperplanes.
    #[command(subcommand)]
    Hull(HullCommand),
    /// Chart picture of the orbit balls (n = 2).
    RenderSvg {
        config: PathBuf,
        /// `x0,y0,x1,y1` in chart coordinates.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 1, required = true)]
        window: Vec<f64>,
        /// Pixels per chart unit.
        #[arg(long)]
        scale: f64,
        #[arg(long)]
        min_diam: f64,
        #[arg(long, default_value_t = 100_000)]
        max_balls: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MapKind {
    Mobius,
    Linear,
    Nonrigid,
}

/// A map under test together with its sampling box.
#[derive(Debug, Clone, Args)]
pub struct MapArgs {
    #[arg(long, value_enum)]
    pub map: MapKind,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Row-major matrix: `n × n` for `linear`, `(n+2) × (n+2)` Lorentz for
    /// `mobius` (random when omitted).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub matrix: Option<Vec<f64>>,
    /// Reflections composed for a random Möbius map.
    #[arg(long, default_value_t = 3)]
    pub reflections: usize,
    #[command(flatten)]
    pub nonrigid: NonrigidArgs,
    /// Sampling box corner (chart maps); defaults to `-1` in every axis.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub lo: Option<Vec<f64>>,
    /// Sampling box corner (chart maps); defaults to `1` in every axis.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub hi: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct NonrigidArgs {
    #[arg(long, default_value_t = 2)]
    pub cantor_depth: usize,
    #[arg(long, default_value_t = 0.5)]
    pub window_width: f64,
    #[arg(long, default_value_t = 1.0 / 32.0)]
    pub margin: f64,
    #[arg(long, default_value_t = 200_000)]
    pub max_balls: usize,
}

#[derive(Debug, Clone, Args)]
pub struct EnvelopeArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 4)]
    pub bins_per_decade: usize,
    /// Also report `max η̂(t) - k·t`.
    #[arg(long)]
    pub linear_bound: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ExtendArgs {
    /// Source set; required for `--map mobius`.
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub map: MapKind,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 8)]
    pub max_len: usize,
    /// Words used by the well-definedness check.
    #[arg(long, default_value_t = 20)]
    pub check_words: usize,
    #[arg(long, default_value_t = 8)]
    pub per_cap: usize,
    #[arg(long, default_value_t = 3)]
    pub reflections: usize,
    #[command(flatten)]
    pub nonrigid: NonrigidArgs,
}

#[derive(Debug, Subcommand)]
pub enum ConstructCommand {
    /// Truncated fat Cantor set and its gap function `h`.
    FatCantor {
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        list: bool,
    },
    /// Greedy porous relative Schottky set in a chart box or ball.
    Porous {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, value_enum, default_value_t = DomainKind::Box)]
        domain: DomainKind,
        /// Box half-width or ball radius.
        #[arg(long, default_value_t = 4.0)]
        size: f64,
        #[arg(long, default_value_t = 4_000_000)]
        grid_budget: usize,
        /// Run the porosity check at this many points with this constant.
        #[arg(long)]
        check_points: Option<usize>,
        #[arg(long, default_value_t = 64.0)]
        check_c: f64,
        #[arg(long)]
        list: bool,
    },
    /// The non-rigid example and its Möbius-fit residual.
    Nonrigid {
        #[command(flatten)]
        params: NonrigidArgs,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long)]
        list: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DomainKind {
    Box,
    Ball,
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    /// Constant base coefficient `re,im` on the set.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [0.5, 0.0])]
    pub nu: Vec<f64>,
    #[arg(long, default_value_t = 64)]
    pub max_depth: usize,
}

#[derive(Debug, Subcommand)]
pub enum BeltramiCommand {
    /// Tile word of a chart point.
    Locate {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        point: Vec<f64>,
        #[arg(long, default_value_t = 64)]
        max_depth: usize,
    },
    /// Invariant coefficient on a grid, as CSV.
    Mu {
        config: PathBuf,
        #[command(flatten)]
        field: FieldArgs,
        /// `x0,y0,x1,y1`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 1, required = true)]
        window: Vec<f64>,
        /// Grid points per axis.
        #[arg(long, default_value_t = 32)]
        resolution: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Invariance residual for every generator.
    Residual {
        config: PathBuf,
        #[command(flatten)]
        field: FieldArgs,
        /// `x0,y0,x1,y1`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 1, required = true)]
        window: Vec<f64>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum HullCommand {
    /// Bounding hyperplanes of the hull.
    Build { config: PathBuf },
    /// Whether a point of the ball lies in the hull.
    Contains {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        point: Vec<f64>,
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
    },
    /// Hyperbolic distance between two points of the ball.
    Distance {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        from: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        to: Vec<f64>,
    },
}

/// Command output: JSON or preformatted text.
#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Json(Value),
    Text(String),
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("{summary}")]
    Rejected { summary: String, report: Value },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::BudgetExceeded(_)) => 2,
            CliError::Core(_) | CliError::Invalid(_) | CliError::Rejected { .. } => 1,
            CliError::Config(_) | CliError::Io { .. } | CliError::Usage(_) => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Core(Error::BudgetExceeded(_)) => "budget_exceeded",
            CliError::Core(_) => "numerical",
            CliError::Invalid(_) | CliError::Rejected { .. } => "validation",
            CliError::Config(ConfigError::Syntax { .. }) => "parse",
            CliError::Config(ConfigError::Field { .. }) => "config_field",
            CliError::Io { .. } => "io",
            CliError::Usage(_) => "usage",
        }
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        match self {
            CliError::Config(ConfigError::Syntax { line, column, .. }) => {
                v["line"] = json!(line);
                v["column"] = json!(column);
            }
            CliError::Config(ConfigError::Field { field, .. }) => v["field"] = json!(field),
            CliError::Rejected { report, .. } => v["report"] = report.clone(),
            _ => {}
        }
        v
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            return report(stderr, &CliError::Usage(e.to_string().trim_end().to_string()));
        }
    };
    let threads = match cli.threads {
        Some(t) => t,
        None => match std::env::var(THREADS_ENV) {
            Ok(s) => match s.trim().parse() {
                Ok(t) => t,
                Err(_) => return report(stderr, &CliError::Usage(format!("{THREADS_ENV}={s:?} is not a count"))),
            },
            Err(_) => 0,
        },
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => return report(stderr, &CliError::Usage(e.to_string())),
    };
    match pool.install(|| commands::execute(&cli)) {
        Ok(Output::Json(v)) => finish(stdout, stderr, to_canonical_json(&v)),
        Ok(Output::Text(t)) => finish(stdout, stderr, t),
        Err(e) => report(stderr, &e),
    }
}

fn finish(stdout: &mut dyn Write, stderr: &mut dyn Write, text: String) -> i32 {
    match stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
        Ok(()) => 0,
        Err(source) => report(
            stderr,
            &CliError::Io {
                path: "<stdout>".into(),
                source,
            },
        ),
    }
}

fn report(stderr: &mut dyn Write, e: &CliError) -> i32 {
    let _ = stderr.write_all(to_canonical_json(&e.to_json()).as_bytes());
    e.exit_code()
}
