mod commands;
mod range;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use range::Range;

/// Weak values, group delay and phase singularities of a rotatable waveplate.
#[derive(Debug, Parser)]
#[command(name = "weakvalue", version)]
pub struct Cli {
    /// Model file (`key = value` lines).
    #[arg(long, global = true, conflicts_with = "preset")]
    config: Option<PathBuf>,

    /// Built-in model. Defaults to `reference` when no config is given.
    #[arg(long, global = true, value_enum)]
    preset: Option<Preset>,

    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Relative finite-difference step.
    #[arg(long, global = true, default_value_t = 1e-5)]
    step: f64,

    /// Finite-difference stencil order.
    #[arg(long, global = true, default_value = "4", value_parser = ["2", "4"])]
    stencil: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// 16.7 GHz half-waveplate model.
    Paper,
    /// slope_te = 1.2, slope_tm = 0.8, no intercepts.
    Reference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PointerAxisArg {
    Omega,
    Beta,
    Direction,
}

/// Frequency line, either in GHz or in rad/ns.
#[derive(Debug, Clone, clap::Args)]
pub struct OmegaLine {
    /// Frequency range in GHz, `lo:hi:n`.
    #[arg(
        long = "f-ghz",
        value_name = "LO:HI:N",
        conflicts_with = "omega_range",
        allow_hyphen_values = true
    )]
    f_ghz: Option<Range>,

    /// Angular frequency range in rad/ns, `lo:hi:n`.
    #[arg(
        long = "omega-range",
        value_name = "LO:HI:N",
        allow_hyphen_values = true
    )]
    omega_range: Option<Range>,
}

/// Fixed frequency, given one of three ways.
#[derive(Debug, Clone, clap::Args)]
pub struct OmegaPoint {
    /// Fixed angular frequency in rad/ns.
    #[arg(long = "at-omega", conflicts_with_all = ["at_f_ghz", "at_ws"])]
    at_omega: Option<f64>,

    /// Fixed frequency in GHz.
    #[arg(long = "at-f-ghz", conflicts_with = "at_ws")]
    at_f_ghz: Option<f64>,

    /// Fix the frequency at the first half-waveplate frequency.
    #[arg(long = "at-ws")]
    at_ws: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Complex transfer along a frequency sweep at fixed rotation.
    Sweep {
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
        #[command(flatten)]
        omega: OmegaLine,
    },
    /// Pointer (weak value) curve along a frequency or rotation line.
    Pointer {
        /// Parameter the pointer differentiates along.
        #[arg(long, value_enum, default_value = "omega")]
        axis: PointerAxisArg,
        /// Unit direction `d_omega,d_beta` for `--axis direction` (normalized on input).
        #[arg(long, value_name = "D_OMEGA,D_BETA", allow_hyphen_values = true)]
        dir: Option<String>,
        /// Fixed rotation for a frequency line.
        #[arg(long, allow_negative_numbers = true)]
        beta: Option<f64>,
        #[command(flatten)]
        omega: OmegaLine,
        /// Rotation range in rad, `lo:hi:n`, for a rotation line.
        #[arg(
            long = "beta-range",
            value_name = "LO:HI:N",
            allow_hyphen_values = true
        )]
        beta_range: Option<Range>,
        #[command(flatten)]
        at: OmegaPoint,
        /// Add the closed-form pointer as an extra column.
        #[arg(long)]
        analytic: bool,
        /// Cross-check every row against the operator-form weak value.
        #[arg(long)]
        verify: bool,
    },
    /// Phase and magnitude of the transfer on a frequency-rotation grid.
    Map {
        #[command(flatten)]
        omega: OmegaLine,
        #[arg(
            long = "beta-range",
            value_name = "LO:HI:N",
            allow_hyphen_values = true
        )]
        beta_range: Range,
    },
    /// Locate, refine and classify phase singularities in a window.
    Singularities {
        #[command(flatten)]
        omega: OmegaLine,
        #[arg(
            long = "beta-range",
            value_name = "LO:HI:N",
            allow_hyphen_values = true
        )]
        beta_range: Range,
        /// Classify coarse cells from their corners only.
        #[arg(long = "no-subdivide")]
        no_subdivide: bool,
        /// Residual bound for refinement.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long = "max-iter", default_value_t = 50)]
        max_iter: usize,
    },
    /// Pointer curves from measured or simulated sweep files.
    Ingest {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Run the self-check suite on the selected model.
    Validate,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
