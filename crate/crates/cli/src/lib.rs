//! The `fatoulab` command line: experiment files in, reports and plot data
//! out.

pub mod commands;
pub mod config;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use fatoulab::scalar::Precision;

pub use config::ExperimentConfig;

#[derive(Debug, Parser)]
#[command(name = "fatoulab", version, about = "Modulus, growth and escape experiments on entire functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment file (TOML).
    #[arg(long, global = true, env = "FATOULAB_CONFIG")]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `out` in the experiment file.
    #[arg(long, global = true, env = "FATOULAB_OUT")]
    pub out: Option<PathBuf>,
    /// Working precision; overrides `precision_bits` in the experiment file.
    #[arg(long, global = true, env = "FATOULAB_PRECISION_BITS")]
    pub precision_bits: Option<u32>,
    /// Worker threads; 0 or unset uses every core.
    #[arg(long, global = true, env = "FATOULAB_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Build the radii table of a product and write it as CSV + JSON.
    Construct,
    /// Run the growth checks listed under `[[analysis]]`.
    Analyze,
    /// Check the annulus claims on a product and report B-ratios.
    VerifyBaker,
    /// Classify a grid of starting points by escape.
    Render,
}

pub mod exit {
    pub const OK: i32 = 0;
    pub const FAIL: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const TRUNCATED: i32 = 3;
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            code: exit::CONFIG,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

/// Settings shared by every command after flags, environment and file are
/// merged.
#[derive(Debug, Clone)]
pub struct Run {
    pub config: ExperimentConfig,
    pub out: PathBuf,
    pub bits: u32,
    pub precision: Precision,
}

impl Run {
    pub fn new(cli: &Cli) -> Result<Run, CliError> {
        let path = cli
            .config
            .as_ref()
            .ok_or_else(|| CliError::config("no experiment file given (--config or FATOULAB_CONFIG)"))?;
        let config = ExperimentConfig::load(path)?;
        Run::from_config(config, cli.out.clone(), cli.precision_bits)
    }

    pub fn from_config(
        config: ExperimentConfig,
        out: Option<PathBuf>,
        bits: Option<u32>,
    ) -> Result<Run, CliError> {
        let bits = bits
            .or(config.precision_bits)
            .unwrap_or(config::DEFAULT_PRECISION_BITS);
        let precision = Precision::for_bits(bits)
            .ok_or_else(|| CliError::config(format!("precision of {bits} bits is not available (1..=237)")))?;
        let out = out
            .or_else(|| config.out.clone())
            .unwrap_or_else(|| PathBuf::from("."));
        Ok(Run {
            config,
            out,
            bits,
            precision,
        })
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    pub fn prepare_out(&self) -> Result<(), CliError> {
        std::fs::create_dir_all(&self.out)
            .map_err(|e| CliError::config(format!("{}: {e}", self.out.display())))
    }
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

pub(crate) fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    write_file(path, text.as_bytes())
}

/// Runs `$body` with `$t` bound to the scalar type of `$precision`.
macro_rules! with_scalar {
    ($precision:expr, $t:ident => $body:expr) => {
        match $precision {
            fatoulab::scalar::Precision::Single => {
                type $t = f32;
                $body
            }
            fatoulab::scalar::Precision::Double => {
                type $t = f64;
                $body
            }
            fatoulab::scalar::Precision::Octuple => {
                type $t = fatoulab::f256;
                $body
            }
        }
    };
}
pub(crate) use with_scalar;

/// Runs one command; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    if let Some(n) = cli.threads.filter(|&n| n > 0) {
        // ignored when a global pool exists already
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let result = Run::new(cli).and_then(|run| {
        run.prepare_out()?;
        match cli.command {
            Command::Construct => commands::construct(&run),
            Command::Analyze => commands::analyze(&run),
            Command::VerifyBaker => commands::verify_baker(&run),
            Command::Render => commands::render(&run),
        }
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(bits: Option<u32>) -> ExperimentConfig {
        let mut c = ExperimentConfig::from_toml("[function]\nkind = \"exp\"\nterms = 10\ntolerance = 1e-9\n").unwrap();
        c.precision_bits = bits;
        c
    }

    #[test]
    fn precision_flag_beats_file_beats_default() {
        let run = Run::from_config(config(None), None, None).unwrap();
        assert_eq!(run.bits, config::DEFAULT_PRECISION_BITS);
        assert_eq!(run.precision, Precision::Octuple);
        let run = Run::from_config(config(Some(53)), None, None).unwrap();
        assert_eq!(run.precision, Precision::Double);
        let run = Run::from_config(config(Some(53)), None, Some(24)).unwrap();
        assert_eq!((run.bits, run.precision), (24, Precision::Single));
    }

    #[test]
    fn unsupported_precision_is_a_config_error() {
        for bits in [0, 238, 1000] {
            let e = Run::from_config(config(None), None, Some(bits)).unwrap_err();
            assert_eq!(e.code, exit::CONFIG);
        }
    }

    #[test]
    fn out_flag_beats_file() {
        let mut c = config(None);
        c.out = Some(PathBuf::from("from_file"));
        let run = Run::from_config(c.clone(), None, None).unwrap();
        assert_eq!(run.file("a.json"), PathBuf::from("from_file/a.json"));
        let run = Run::from_config(c, Some(PathBuf::from("flag")), None).unwrap();
        assert_eq!(run.out, PathBuf::from("flag"));
    }

    #[test]
    fn flags_parse() {
        let cli = Cli::try_parse_from([
            "fatoulab",
            "verify-baker",
            "--config",
            "x.toml",
            "--precision-bits",
            "64",
            "--threads",
            "2",
        ])
        .unwrap();
        assert_eq!(cli.command, Command::VerifyBaker);
        assert_eq!(cli.precision_bits, Some(64));
        assert_eq!(cli.threads, Some(2));
        assert!(Cli::try_parse_from(["fatoulab", "plot"]).is_err());
    }
}
