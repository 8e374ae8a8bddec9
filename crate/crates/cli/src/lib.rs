//! Command-line front end for `tgl`: config-driven pipelines that write
//! deterministic outputs, an effective-config echo and a checksum manifest.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use thiserror::Error;

pub use config::{Override, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Validation(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 2,
            _ => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<tgl::io::IoError> for CliError {
    fn from(e: tgl::io::IoError) -> Self {
        match e {
            tgl::io::IoError::Io(io) => CliError::Io(io.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

macro_rules! validation_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Validation(e.to_string())
            }
        }
    )*};
}

validation_from!(
    tgl::eval::EvalError,
    tgl::sampling::SamplingError,
    tgl::snapshot::SnapshotError,
    tgl::negatives::NegativeError,
    tgl::edgebank::EdgeBankError,
    tgl::index::IndexError,
    tgl::graph::IngestError
);

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Parse and validate a dataset, write the binary cache.
    Ingest,
    /// Snapshot counts, degree histogram and recurrence statistics.
    Stats,
    /// Discretize into snapshot edge lists.
    Snapshot,
    /// Chronological train/validation/test split.
    Split,
    /// Dump k-hop temporal neighborhood batches.
    Sample,
    /// Dump evaluation negatives for the test period.
    Negatives,
    /// Future link prediction with a reference scorer.
    EvalLink,
    /// Node classification with the persistence baseline.
    EvalNode,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Ingest => "ingest",
            Command::Stats => "stats",
            Command::Snapshot => "snapshot",
            Command::Split => "split",
            Command::Sample => "sample",
            Command::Negatives => "negatives",
            Command::EvalLink => "eval-link",
            Command::EvalNode => "eval-node",
        }
    }

    /// Config section searched for override keys that are not full paths.
    pub fn section(self) -> Option<&'static str> {
        match self {
            Command::Snapshot | Command::Stats => Some("snapshot"),
            Command::Split => Some("split"),
            Command::Sample => Some("sampler"),
            Command::Negatives => Some("negatives"),
            Command::EvalLink | Command::EvalNode => Some("eval"),
            Command::Ingest => None,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "tgl",
    version,
    about = "Temporal graph pipelines",
    after_help = "Any config key can be overridden as --key.path=value (e.g. --sampler.fanouts=[5,5]). \
                  Keys of the command's own section may omit the prefix (snapshot --k=4)."
)]
struct Args {
    command: Command,
    /// YAML config file.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Config overrides, `--key.path=value`.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, num_args = 0..)]
    overrides: Vec<String>,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    // `--config` may also appear after the first override.
    let mut config = args.config;
    let mut overrides = Vec::new();
    let mut rest = args.overrides.into_iter();
    while let Some(arg) = rest.next() {
        if arg == "--config" || arg == "-c" {
            match rest.next() {
                Some(path) => config = Some(PathBuf::from(path)),
                None => {
                    eprintln!("tgl: {arg} needs a path");
                    return 1;
                }
            }
        } else if let Some(path) = arg.strip_prefix("--config=") {
            config = Some(PathBuf::from(path));
        } else {
            overrides.push(arg);
        }
    }
    match run(args.command, config.as_deref(), &overrides) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("tgl {}: {e}", args.command.name());
            e.exit_code()
        }
    }
}

/// Runs `command` with an optional config file and raw override arguments.
pub fn run(command: Command, config: Option<&std::path::Path>, raw_overrides: &[String]) -> Result<(), CliError> {
    let yaml = match config {
        Some(p) => Some(std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?),
        None => None,
    };
    let overrides = raw_overrides.iter().map(|a| Override::parse(a)).collect::<Result<Vec<_>, _>>()?;
    let cfg = RunConfig::resolve(yaml.as_deref(), &overrides, command.section())?;
    commands::execute(command, &cfg)
}
