use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "junction",
    version,
    about = "Scattering on a rectangular quantum well with attached wires"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Junction configuration (TOML). Defaults to the built-in example.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<String>,
    /// Print the report as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,
    /// Include wall-clock timing in the report (makes it non-reproducible).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Interior eigenvalues in the open band, thresholds and validity diagnostics.
    Spectrum,
    /// Self-consistent resonance of one eigen-group.
    Resonance {
        #[command(flatten)]
        select: Selection,
        /// Also report λ0 − C for a supplied linearization constant C.
        #[arg(long, value_name = "C", allow_negative_numbers = true)]
        shift_constant: Option<f64>,
    },
    /// Scattering matrices on a λ grid, written as CSV.
    Sweep {
        #[arg(long, allow_negative_numbers = true)]
        min: f64,
        #[arg(long, allow_negative_numbers = true)]
        max: f64,
        /// Number of grid points (endpoints included).
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        steps: u32,
        #[arg(long, value_enum, default_value_t = SweepMethod::Exact)]
        method: SweepMethod,
        #[command(flatten)]
        select: Selection,
        /// CSV destination (default: standard output).
        #[arg(long, value_name = "PATH")]
        out: Option<String>,
        /// Also write a line plot of the transmissions.
        #[arg(long, value_name = "PATH")]
        svg: Option<String>,
    },
    /// Energy-dependent and low-temperature vertex conditions.
    Bc {
        #[command(flatten)]
        select: Selection,
        /// Fermi energy (default: the resonance λ0F).
        #[arg(long, value_name = "LAMBDA")]
        lambda_f: Option<f64>,
        /// Half-width of the Fermi window.
        #[arg(long, default_value_t = 0.0)]
        halfwidth: f64,
        /// Largest accepted |Θ + 1| over the window.
        #[arg(long, default_value_t = 0.1)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = AssignmentArg::ResonanceLimit)]
        assignment: AssignmentArg,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Selection {
    /// In-band eigen-group, 1 = lowest.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub group: u32,
    /// Use only this member of a degenerate group (1-based, by (m, n) label).
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub member: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepMethod {
    Exact,
    Pole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AssignmentArg {
    /// P0 ψ = 0, P0⊥ ψ′ = 0.
    ResonanceLimit,
    /// P0⊥ ψ = 0, P0 ψ′ = 0.
    WeightedContinuity,
}
