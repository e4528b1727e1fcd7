//! Command-line front end: input parsing, report rendering, exit codes.
//!
//! The binary reads one period of a cyclic signal from a UTF-8 text file
//! (real numbers separated by commas and/or newlines), solves for the optimal
//! tapered window, and emits a deterministic report document. Numbers are
//! rendered with 17 significant digits, so reruns on the same input are
//! byte-identical and round-trip exactly through `f64`.
//!
//! Exit codes: 0 on success, 2 on malformed input or unusable parameters
//! (with a one-line diagnostic on stderr), 3 when the solver fails to
//! converge (the report is still written, with `"converged": false`).

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::PathBuf;

use crate::error::{BestIterate, Error};
use crate::numerics::eig_sym;
use crate::oracle::{grid_search, GridSpec};
use crate::polytope::{window_from_mixture, Mixture};
use crate::qp::{build_qp, solve, Route, SolveOptions, SolveReport, Stage};
use crate::signal::Signal;

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

/// Solution strategy selected on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Closed forms first, projection as needed.
    #[default]
    Auto,
    /// Closed forms only; fails (exit 3) when neither is feasible.
    Closed,
    /// Projection stage only.
    Project,
    /// Dense grid search; a slow reference mode.
    Grid,
}

/// One resolved invocation of the tool.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Signal file to read.
    pub input: PathBuf,
    /// Averaging half-width; defaults to the maximum `(n - 1) / 2`.
    pub order: Option<usize>,
    pub method: Method,
    /// Feasibility tolerance and projection certificate tolerance.
    pub tol: f64,
    /// Major-cycle budget of the projection stage.
    pub max_iter: usize,
    /// Steps per coefficient for [`Method::Grid`].
    pub grid_resolution: usize,
    /// Report destination; stdout when absent.
    pub output: Option<PathBuf>,
    /// Optional destination for the smoothed signal, one sample per line.
    pub smoothed: Option<PathBuf>,
}

impl RunConfig {
    /// A config with the documented defaults for everything but the input.
    pub fn new(input: PathBuf) -> Self {
        Self {
            input,
            order: None,
            method: Method::Auto,
            tol: 1e-9,
            max_iter: 10_000,
            grid_resolution: 50,
            output: None,
            smoothed: None,
        }
    }
}

struct RunOutcome {
    document: String,
    smoothed: Option<String>,
    exit_code: i32,
}

struct Failure {
    message: String,
    exit_code: i32,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            exit_code: EXIT_INPUT,
        }
    }

    fn solver(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            exit_code: EXIT_SOLVER,
        }
    }
}

/// Runs one invocation end to end and returns the process exit code,
/// printing diagnostics to stderr and the report to its destination.
pub fn run(config: &RunConfig) -> i32 {
    match execute(config) {
        Ok(outcome) => {
            if let Err(failure) = deliver(config, &outcome) {
                eprintln!("error: {}", failure.message);
                return failure.exit_code;
            }
            outcome.exit_code
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.exit_code
        }
    }
}

fn deliver(config: &RunConfig, outcome: &RunOutcome) -> Result<(), Failure> {
    match &config.output {
        Some(path) => fs::write(path, &outcome.document)
            .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))?,
        None => {
            let stdout = std::io::stdout();
            let mut handle = stdout.lock();
            handle
                .write_all(outcome.document.as_bytes())
                .map_err(|e| Failure::input(format!("cannot write report: {e}")))?;
        }
    }
    if let (Some(path), Some(text)) = (&config.smoothed, &outcome.smoothed) {
        fs::write(path, text)
            .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn execute(config: &RunConfig) -> Result<RunOutcome, Failure> {
    if !(config.tol > 0.0 && config.tol.is_finite()) {
        return Err(Failure::input(format!(
            "tol must be a positive number: got {}",
            config.tol
        )));
    }
    if config.max_iter == 0 {
        return Err(Failure::input("max-iter must be at least 1"));
    }

    let text = fs::read_to_string(&config.input)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", config.input.display())))?;
    let samples = parse_signal_text(&text).map_err(Failure::input)?;
    let sample_count = samples.len();
    let signal = Signal::new(samples).map_err(|e| Failure::input(e.to_string()))?;
    let max_order = signal.half_width();
    let order = config.order.unwrap_or(max_order);
    if order < 1 || order > max_order {
        return Err(Failure::input(format!(
            "window half-width must satisfy 1 <= k <= {max_order} for {sample_count} samples: got {order}"
        )));
    }

    match config.method {
        Method::Grid => run_grid(config, &signal, order),
        method => run_solver(config, &signal, order, method),
    }
}

fn run_solver(
    config: &RunConfig,
    signal: &Signal,
    order: usize,
    method: Method,
) -> Result<RunOutcome, Failure> {
    let route = match method {
        Method::Auto => Route::Auto,
        Method::Closed => Route::ClosedOnly,
        Method::Project => Route::Projection,
        Method::Grid => unreachable!("grid handled separately"),
    };
    let options = SolveOptions {
        route,
        feas_tol: config.tol,
        minnorm_tol: config.tol,
        max_iter: config.max_iter,
        ..SolveOptions::default()
    };
    match solve(signal, order, &options) {
        Ok(report) => success_outcome(config, signal, &report),
        Err(Error::ClosedFormInfeasible { best }) => Ok(failure_outcome(signal, order, &best)),
        Err(Error::SolverFailure { best, .. }) => Ok(failure_outcome(signal, order, &best)),
        Err(other) => Err(Failure::solver(other.to_string())),
    }
}

fn run_grid(config: &RunConfig, signal: &Signal, order: usize) -> Result<RunOutcome, Failure> {
    let grid = GridSpec::new(config.grid_resolution)
        .map_err(|_| Failure::input("grid-resolution must be at least 1"))?;
    let result = match grid_search(signal, order, &grid) {
        Ok(result) => result,
        Err(e @ Error::GridTooLarge { .. }) => return Err(Failure::input(e.to_string())),
        Err(other) => return Err(Failure::solver(other.to_string())),
    };
    let qp = build_qp(signal, order).map_err(|e| Failure::solver(e.to_string()))?;
    let spectrum = eig_sym(qp.q_tilde()).map_err(|e| Failure::solver(e.to_string()))?;
    let lambda_max = spectrum.values.first().copied().unwrap_or(0.0).max(0.0);
    let rank = spectrum
        .values
        .iter()
        .filter(|&&v| v > 1e-10 * lambda_max)
        .count();
    let mixture = Mixture::new(result.mixture).map_err(|e| Failure::solver(e.to_string()))?;
    let window =
        window_from_mixture(&mixture, qp.vertices()).map_err(|e| Failure::solver(e.to_string()))?;
    let loss = signal
        .loss_direct(window.weights())
        .map_err(|e| Failure::solver(e.to_string()))?;
    let report = SolveReport {
        mixture,
        window,
        loss,
        stage: Stage::GridFallback,
        iterations: result.evaluations,
        degenerate: rank < order,
        signal_len: signal.len(),
        order,
    };
    success_outcome(config, signal, &report)
}

fn success_outcome(
    config: &RunConfig,
    signal: &Signal,
    report: &SolveReport,
) -> Result<RunOutcome, Failure> {
    let document = render_report(
        report.window.weights(),
        report.mixture.as_slice(),
        report.loss,
        report.stage.name(),
        report.iterations,
        report.degenerate,
        report.signal_len,
        report.order,
        true,
    );
    let smoothed = if config.smoothed.is_some() {
        let samples = signal
            .apply_window(report.window.weights())
            .map_err(|e| Failure::solver(e.to_string()))?;
        Some(render_samples(&samples))
    } else {
        None
    };
    Ok(RunOutcome {
        document,
        smoothed,
        exit_code: EXIT_SUCCESS,
    })
}

/// A non-converged run still reports its best iterate, flagged `converged:
/// false`, and exits 3. The smoothed signal is only written on success.
fn failure_outcome(signal: &Signal, order: usize, best: &BestIterate) -> RunOutcome {
    let document = render_report(
        &best.weights,
        &best.mixture,
        best.loss,
        best.stage.name(),
        best.iterations,
        best.degenerate,
        signal.len(),
        order,
        false,
    );
    RunOutcome {
        document,
        smoothed: None,
        exit_code: EXIT_SOLVER,
    }
}

/// Parses comma- and/or newline-separated real numbers. Empty tokens (blank
/// lines, trailing commas) are skipped; the first unparseable or non-finite
/// token produces a diagnostic naming its line.
pub fn parse_signal_text(text: &str) -> Result<Vec<f64>, String> {
    let mut samples = Vec::new();
    for (line_index, line) in text.lines().enumerate() {
        for token in line.split(',') {
            let token = token.trim();
            if token.is_empty() {
                continue;
            }
            let value: f64 = token.parse().map_err(|_| {
                format!(
                    "line {}: cannot parse '{}' as a number",
                    line_index + 1,
                    token
                )
            })?;
            if !value.is_finite() {
                return Err(format!(
                    "line {}: sample '{}' is not finite",
                    line_index + 1,
                    token
                ));
            }
            samples.push(value);
        }
    }
    Ok(samples)
}

/// Formats one float with 17 significant digits (round-trip exact). Negative
/// zero is normalised so equal values render identically.
fn fmt_float(value: f64) -> String {
    format!("{:.16e}", value + 0.0)
}

fn fmt_array(values: &[f64]) -> String {
    let mut out = String::from("[");
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&fmt_float(*v));
    }
    out.push(']');
    out
}

/// Renders the report document. Key order and formatting are fixed; the
/// output is a stable function of the field values.
#[allow(clippy::too_many_arguments)]
fn render_report(
    weights: &[f64],
    mixture: &[f64],
    loss: f64,
    stage: &str,
    iterations: usize,
    degenerate: bool,
    n: usize,
    k: usize,
    converged: bool,
) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"weights\": {},", fmt_array(weights));
    let _ = writeln!(out, "  \"mixture\": {},", fmt_array(mixture));
    let _ = writeln!(out, "  \"loss\": {},", fmt_float(loss));
    let _ = writeln!(out, "  \"stage\": \"{stage}\",");
    let _ = writeln!(out, "  \"iterations\": {iterations},");
    let _ = writeln!(out, "  \"degenerate\": {degenerate},");
    let _ = writeln!(out, "  \"n\": {n},");
    let _ = writeln!(out, "  \"k\": {k},");
    let _ = writeln!(out, "  \"converged\": {converged}");
    out.push_str("}\n");
    out
}

/// Renders the smoothed signal, one sample per line.
fn render_samples(samples: &[f64]) -> String {
    let mut out = String::new();
    for sample in samples {
        out.push_str(&fmt_float(*sample));
        out.push('\n');
    }
    out
}
