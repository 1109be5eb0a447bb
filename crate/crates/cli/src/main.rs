//! `fgps`: periodic fractional derivatives, error sweeps and periodic
//! fractional optimal control from the command line.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use output::Format;

pub const SCHEMA_VERSION: u32 = 1;

pub mod exit {
    pub const OK: u8 = 0;
    pub const IO: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const NOT_CONVERGED: u8 = 3;
    pub const NUMERIC: u8 = 4;
}

#[derive(Parser, Debug)]
#[command(name = "fgps", version, about = "Periodic fractional derivatives and optimal control")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Grid and quadrature parameters. Unset values fall back to per-command defaults.
#[derive(Args, Debug, Clone)]
pub struct OperatorArgs {
    /// Number of collocation nodes (even).
    #[arg(long)]
    pub n: Option<usize>,
    /// Gegenbauer quadrature degree N_G.
    #[arg(long)]
    pub ng: Option<usize>,
    /// Fractional order in (0, 1).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Sliding memory length L.
    #[arg(long)]
    pub memory_length: Option<f64>,
    /// Gegenbauer index, greater than -1/2.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub period: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fractional derivative of sin on the node grid, with the exact values and errors.
    Fd {
        #[command(flatten)]
        op: OperatorArgs,
        /// Comma-separated orders; overrides --alpha.
        #[arg(long)]
        alpha_grid: Option<String>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Export the quadrature matrix Q.
    Matrix {
        #[command(flatten)]
        op: OperatorArgs,
        /// Emit only the first row and first column.
        #[arg(long)]
        toeplitz: bool,
        /// Multiply by L^(1-a)/Gamma(2-a), giving the derivative matrix.
        #[arg(long)]
        scaled: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Exact fractional derivative of sin at equispaced points of [0, 2pi].
    ExactSin {
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long)]
        alpha_grid: Option<String>,
        #[arg(long, default_value_t = 30.0)]
        memory_length: f64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Add an adaptive quadrature column as an independent check.
        #[arg(long)]
        quadrature: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// A-priori error estimates over a grid of memory lengths and N_G values.
    ErrorSweep {
        #[command(flatten)]
        op: OperatorArgs,
        /// Comma-separated memory lengths (default 10,20,...,100).
        #[arg(long)]
        memory_grid: Option<String>,
        /// Comma-separated N_G values (default 10,20,40,80).
        #[arg(long)]
        ng_grid: Option<String>,
        /// Add the observed error of the sin test at every point.
        #[arg(long)]
        observed: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// The gamma amplification factor over a grid of orders.
    Gamma {
        /// Comma-separated orders (default 0.01,0.02,...,0.99).
        #[arg(long)]
        alpha_grid: Option<String>,
        /// Comma-separated N_G values.
        #[arg(long, default_value = "50,100")]
        ng_grid: String,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Solve a periodic fractional optimal control problem.
    SolvePfocp {
        #[command(flatten)]
        op: OperatorArgs,
        /// Polynomial problem file (JSON); the built-in benchmark when omitted.
        #[arg(long)]
        problem: Option<PathBuf>,
        /// Solve once per order; requires --out.
        #[arg(long)]
        alpha_grid: Option<String>,
        /// Trajectory sample count.
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 5000)]
        max_iter: usize,
        #[arg(long, default_value_t = 1e-8)]
        feas_tol: f64,
        /// Value of every entry of the initial guess.
        #[arg(long, default_value_t = fgps::ocp::DEFAULT_INITIAL_VALUE)]
        initial_value: f64,
        /// Result JSON; the trajectory CSV is written next to it.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Trajectory CSV path, overriding the default next to --out.
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Fd { op, alpha_grid, out } => commands::fd(&op, alpha_grid.as_deref(), &out),
        Command::Matrix {
            op,
            toeplitz,
            scaled,
            out,
        } => commands::matrix(&op, toeplitz, scaled, &out),
        Command::ExactSin {
            alpha,
            alpha_grid,
            memory_length,
            samples,
            quadrature,
            out,
        } => commands::exact_sin(alpha, alpha_grid.as_deref(), memory_length, samples, quadrature, &out),
        Command::ErrorSweep {
            op,
            memory_grid,
            ng_grid,
            observed,
            out,
        } => commands::error_sweep(&op, memory_grid.as_deref(), ng_grid.as_deref(), observed, &out),
        Command::Gamma {
            alpha_grid,
            ng_grid,
            out,
        } => commands::gamma(alpha_grid.as_deref(), &ng_grid, &out),
        Command::SolvePfocp {
            op,
            problem,
            alpha_grid,
            samples,
            max_iter,
            feas_tol,
            initial_value,
            out,
            trajectory,
        } => commands::solve_pfocp(&commands::SolveArgs {
            op,
            problem,
            alpha_grid,
            samples,
            max_iter,
            feas_tol,
            initial_value,
            out,
            trajectory,
        }),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("fgps: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
