//! `taperwin`: optimal tapered moving-average windows for cyclic signals.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use taperwin::cli::{run, Method, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    /// Closed forms first, projection as needed.
    Auto,
    /// Closed-form stages only; exits 3 if neither is feasible.
    Closed,
    /// Projection stage only.
    Project,
    /// Dense grid search (slow reference mode).
    Grid,
}

impl From<MethodArg> for Method {
    fn from(value: MethodArg) -> Self {
        match value {
            MethodArg::Auto => Method::Auto,
            MethodArg::Closed => Method::Closed,
            MethodArg::Project => Method::Project,
            MethodArg::Grid => Method::Grid,
        }
    }
}

/// Finds the symmetric tapered weight window minimising the cyclic smoothing
/// error of a signal, and reports it as a deterministic JSON document.
#[derive(Debug, Parser)]
#[command(name = "taperwin", version)]
struct Args {
    /// Input file: real samples separated by commas and/or newlines.
    #[arg(long)]
    input: PathBuf,

    /// Averaging half-width; defaults to the maximum (n - 1) / 2.
    #[arg(long)]
    k: Option<usize>,

    /// Solution strategy.
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    method: MethodArg,

    /// Feasibility tolerance and projection certificate tolerance.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,

    /// Iteration budget of the projection stage.
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,

    /// Steps per mixture coefficient for --method grid.
    #[arg(long, default_value_t = 50)]
    grid_resolution: usize,

    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,

    /// Also write the smoothed signal here, one sample per line.
    #[arg(long)]
    smoothed: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let config = RunConfig {
        input: args.input,
        order: args.k,
        method: args.method.into(),
        tol: args.tol,
        max_iter: args.max_iter,
        grid_resolution: args.grid_resolution,
        output: args.output,
        smoothed: args.smoothed,
    };
    ExitCode::from(run(&config) as u8)
}
