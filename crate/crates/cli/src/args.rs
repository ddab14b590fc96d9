use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use oxy_fbp_core::reference::Column;
use oxy_fbp_core::Method;

#[derive(Debug, Parser)]
#[command(
    name = "oxy-fbp",
    version,
    about = "Oxygen diffusion with constant absorption: moment-method and finite-difference solvers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one method and write the (t, s, a) trajectory
    Solve(SolveArgs),
    /// Compare a run against a reference table
    Compare(CompareArgs),
    /// Sample concentration profiles u(x) at given times
    Profile(ProfileArgs),
    /// Steady-state penetration depth before sealing
    Steady(SteadyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Deg3,
    Deg6,
    Oracle,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Deg3 => Method::Deg3,
            MethodArg::Deg6 => Method::Deg6,
            MethodArg::Oracle => Method::Oracle,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ColumnArg {
    Ref10,
    Present,
}

impl From<ColumnArg> for Column {
    fn from(c: ColumnArg) -> Self {
        match c {
            ColumnArg::Ref10 => Column::Ref10,
            ColumnArg::Present => Column::Present,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value = "deg6")]
    pub method: MethodArg,
    /// Initial sealed-face concentration (default 29/128)
    #[arg(long)]
    pub a0: Option<f64>,
    /// Start a0 on the constraint boundary (0.2 for deg3)
    #[arg(long, conflicts_with = "a0")]
    pub constraint_start: bool,
    /// Reported time of the initial state (default 0.05; 0 for the oracle)
    #[arg(long)]
    pub t0: Option<f64>,
    /// Fixed RK4 step
    #[arg(long)]
    pub dt: Option<f64>,
    /// End of the run on the reported clock
    #[arg(long)]
    pub t_end: Option<f64>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Output file (standard output if omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Oracle grid size
    #[arg(long)]
    pub nx: Option<usize>,
    /// Oracle sampling interval
    #[arg(long, default_value_t = 1e-3)]
    pub sample_dt: f64,
    /// Comma-separated a0 values to run as a sweep (moment methods)
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["a0", "constraint_start"])]
    pub sweep_a0: Vec<f64>,
    /// Run sweep members on separate threads; output order is unchanged
    #[arg(long, requires = "sweep_a0")]
    pub parallel: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Oracle grid size
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub table: u8,
    #[arg(long, value_enum, default_value = "present")]
    pub column: ColumnArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Comma-separated sample times on the reported clock
    #[arg(long, value_delimiter = ',', required = true)]
    pub times: Vec<f64>,
    /// Number of x samples on [0, s(t)]
    #[arg(long, default_value_t = 101)]
    pub nx: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SteadyArgs {
    /// Surface concentration before sealing
    #[arg(long)]
    pub c0: f64,
    /// Absorption rate
    #[arg(long)]
    pub m: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}
