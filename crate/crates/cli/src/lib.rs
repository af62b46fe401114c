//! Command-line driver for the warped-product soliton residual suites.

pub mod commands;
pub mod config;
pub mod error;
pub mod external;
pub mod model;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::{cmd_oracle, cmd_sample, cmd_verify, Outcome, Overrides};
pub use config::RunConfig;
pub use error::CliError;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "wpsoliton", version)]
#[command(about = "Residual checks and curvature oracle runs for warped-product gradient solitons")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate the reduced and base-coordinate residuals on a grid
    Verify(CommonArgs),
    /// Tabulate the profiles and their derivatives
    Sample(CommonArgs),
    /// Run the finite-difference curvature oracle
    Oracle(CommonArgs),
}

#[derive(Args, Debug)]
pub struct CommonArgs {
    /// Run configuration (TOML)
    #[arg(long)]
    pub config: PathBuf,

    /// Output directory; overrides [output].dir
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,

    /// Absolute tolerance for the ODE and PDE residuals
    #[arg(long)]
    pub tolerance: Option<f64>,

    /// Finest oracle step h; the oracle runs at 4h, 2h and h
    #[arg(long)]
    pub fd_step: Option<f64>,

    #[arg(long, short)]
    pub quiet: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            out: self.out.clone(),
            format: self.format.map(|f| match f {
                FormatArg::Csv => config::Format::Csv,
                FormatArg::Json => config::Format::Json,
            }),
            tolerance: self.tolerance,
            fd_step: self.fd_step,
            quiet: self.quiet,
        }
    }
}

type CommandFn = fn(&RunConfig, &Overrides) -> Result<Outcome, CliError>;

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
        }
    };
    let (common, f): (&CommonArgs, CommandFn) = match &cli.command {
        Command::Verify(a) => (a, cmd_verify),
        Command::Sample(a) => (a, cmd_sample),
        Command::Oracle(a) => (a, cmd_oracle),
    };
    let result = RunConfig::load(&common.config).and_then(|run| f(&run, &common.overrides()));
    match result {
        Ok(o) if o.passed => EXIT_PASS,
        Ok(_) => EXIT_FAIL,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}
