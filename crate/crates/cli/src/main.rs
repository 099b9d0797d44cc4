use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod output;

/// Schmidt modes and angular statistics of bright squeezed vacuum.
#[derive(Debug, Parser)]
#[command(name = "bsvsim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Parametric gain G; overrides the config.
    #[arg(long)]
    pub gain: Option<f64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Radial quadrature points; overrides the config.
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Largest azimuthal harmonic; overrides the config.
    #[arg(long)]
    pub n_max: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mean photon-number spectrum along the configured cut, or a 2D map.
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Emit the (θx, θy) map instead of the cut.
        #[arg(long)]
        two_d: bool,
        /// Keep photons per mrad² instead of normalizing to the maximum.
        #[arg(long)]
        raw: bool,
    },
    /// Schmidt eigenvalues, radial profiles and Schmidt numbers.
    Modes {
        #[command(flatten)]
        common: Common,
        /// Number of leading modes whose profiles are exported.
        #[arg(long, default_value_t = 20)]
        profiles: usize,
    },
    /// Normalized Var(N(θ) - N(θ0)) along the cut, one file per θ0.
    VarianceDiff {
        #[command(flatten)]
        common: Common,
        /// Reference angles in mrad; defaults to the config list.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        theta0: Vec<f64>,
    },
    /// Schmidt number, covariance width and photon number versus gain.
    GainScan {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        g_min: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        g_max: Option<f64>,
        #[arg(long)]
        n_steps: Option<usize>,
    },
    /// Gaussian moments against a truncated Fock-space calculation.
    OracleCheck {
        /// Squeezing parameters.
        #[arg(long, value_delimiter = ',', default_value = "0.5,1.0,1.5")]
        r: Vec<f64>,
        /// Photon-number cutoff per mode.
        #[arg(long, default_value_t = 60)]
        cutoff: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

pub enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<bsvsim_core::Error> for Failure {
    fn from(e: bsvsim_core::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(format!("io: {e}"))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Usage(format!("csv: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Spectrum { common, two_d, raw } => commands::spectrum(&common, two_d, raw),
        Command::Modes { common, profiles } => commands::modes(&common, profiles),
        Command::VarianceDiff { common, theta0 } => commands::variance_diff(&common, &theta0),
        Command::GainScan { common, g_min, g_max, n_steps } => commands::gain_scan(&common, g_min, g_max, n_steps),
        Command::OracleCheck { r, cutoff, out } => commands::oracle_check(&r, cutoff, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}
