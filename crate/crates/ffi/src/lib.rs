//! C ABI for the taperwin solver.
//!
//! The interface follows the usual opaque-handle pattern: [`tw_solve`]
//! allocates a [`TwReport`] behind a pointer, accessor functions read scalar
//! fields or copy arrays into caller-provided buffers, and
//! [`tw_report_free`] releases the handle. All functions return a
//! [`TwStatus`]; on any non-OK status a human-readable message is retrievable
//! with [`tw_last_error_message`] (thread-local, valid until the next failing
//! call on the same thread).
//!
//! The generated C header lives at `include/taperwin.h` and is refreshed by
//! the build script.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::ptr;

use taperwin::cli::Method;
use taperwin::{
    build_qp, eig_sym, grid_search, solve, window_from_mixture, Error, GridSpec, Mixture, Route,
    Signal, SolveOptions, SolveReport, Stage,
};

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: impl Into<Vec<u8>>) {
    let message = CString::new(message).unwrap_or_else(|_| {
        CString::new("error message contained an interior NUL byte").unwrap()
    });
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

/// Status codes returned by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwStatus {
    /// Success.
    TwOk = 0,
    /// A required pointer argument was NULL.
    TwNullPointer = 1,
    /// The input signal or a parameter was unusable.
    TwInvalidInput = 2,
    /// The solver failed to converge.
    TwSolverFailure = 3,
    /// A caller-provided buffer had the wrong length.
    TwBadBuffer = 4,
}

/// Solution strategy, mirroring the command-line `--method` choices.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwMethod {
    TwMethodAuto = 0,
    TwMethodClosed = 1,
    TwMethodProject = 2,
    TwMethodGrid = 3,
}

/// Which stage of the cascade produced the result.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwStage {
    TwStageUnconstrained = 0,
    TwStageEquality = 1,
    TwStageProjection = 2,
    TwStageGrid = 3,
}

impl From<Stage> for TwStage {
    fn from(stage: Stage) -> Self {
        match stage {
            Stage::Unconstrained => TwStage::TwStageUnconstrained,
            Stage::Equality => TwStage::TwStageEquality,
            Stage::Projection => TwStage::TwStageProjection,
            Stage::GridFallback => TwStage::TwStageGrid,
        }
    }
}

/// An opaque solver report. Allocate with [`tw_solve`], read through the
/// accessor functions, release with [`tw_report_free`].
pub struct TwReport {
    report: SolveReport,
}

/// Solver parameters. Zero-initialise and overwrite what you need:
/// a zero field means "use the documented default".
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TwOptions {
    /// Averaging half-width; 0 selects the maximum `(n - 1) / 2`.
    pub order: usize,
    /// Solution strategy.
    pub method: TwMethod,
    /// Feasibility / certificate tolerance; 0 selects 1e-9.
    pub tol: f64,
    /// Projection iteration budget; 0 selects 10000.
    pub max_iter: usize,
    /// Grid steps per coefficient for `TW_METHOD_GRID`; 0 selects 50.
    pub grid_resolution: usize,
}

/// The default options: auto method, maximum order, documented tolerances.
#[no_mangle]
pub extern "C" fn tw_options_default() -> TwOptions {
    TwOptions {
        order: 0,
        method: TwMethod::TwMethodAuto,
        tol: 0.0,
        max_iter: 0,
        grid_resolution: 0,
    }
}

/// Solves for the optimal tapered window of a cyclic signal.
///
/// `samples`/`len` describe one period (odd length >= 3, finite values).
/// On success, `*out` receives a fresh report handle. On failure the status
/// tells the class of problem and [`tw_last_error_message`] the details;
/// `*out` is left untouched.
///
/// # Safety
///
/// `samples` must point to `len` readable doubles and `out` to a writable
/// pointer slot.
#[no_mangle]
pub unsafe extern "C" fn tw_solve(
    samples: *const f64,
    len: usize,
    options: *const TwOptions,
    out: *mut *mut TwReport,
) -> TwStatus {
    if samples.is_null() || out.is_null() {
        set_last_error("samples and out must not be NULL");
        return TwStatus::TwNullPointer;
    }
    let options = if options.is_null() {
        tw_options_default()
    } else {
        *options
    };
    let values = std::slice::from_raw_parts(samples, len).to_vec();
    let signal = match Signal::new(values) {
        Ok(signal) => signal,
        Err(e) => {
            set_last_error(e.to_string());
            return TwStatus::TwInvalidInput;
        }
    };
    let max_order = signal.half_width();
    let order = if options.order == 0 {
        max_order
    } else {
        options.order
    };
    if order > max_order {
        set_last_error(format!(
            "window half-width must satisfy 1 <= k <= {max_order}: got {order}"
        ));
        return TwStatus::TwInvalidInput;
    }
    let tol = if options.tol == 0.0 { 1e-9 } else { options.tol };
    if !(tol > 0.0 && tol.is_finite()) {
        set_last_error(format!("tol must be a positive number: got {tol}"));
        return TwStatus::TwInvalidInput;
    }
    let max_iter = if options.max_iter == 0 {
        10_000
    } else {
        options.max_iter
    };

    let method = match options.method {
        TwMethod::TwMethodAuto => Method::Auto,
        TwMethod::TwMethodClosed => Method::Closed,
        TwMethod::TwMethodProject => Method::Project,
        TwMethod::TwMethodGrid => Method::Grid,
    };
    let solved = match method {
        Method::Grid => {
            let resolution = if options.grid_resolution == 0 {
                50
            } else {
                options.grid_resolution
            };
            grid_report(&signal, order, resolution)
        }
        _ => {
            let route = match method {
                Method::Closed => Route::ClosedOnly,
                Method::Project => Route::Projection,
                _ => Route::Auto,
            };
            let solver_options = SolveOptions {
                route,
                feas_tol: tol,
                minnorm_tol: tol,
                max_iter,
                ..SolveOptions::default()
            };
            solve(&signal, order, &solver_options)
        }
    };
    match solved {
        Ok(report) => {
            let handle = Box::new(TwReport { report });
            *out = Box::into_raw(handle);
            TwStatus::TwOk
        }
        Err(e @ (Error::SolverFailure { .. } | Error::ClosedFormInfeasible { .. })) => {
            set_last_error(e.to_string());
            TwStatus::TwSolverFailure
        }
        Err(e @ (Error::GridTooLarge { .. } | Error::InvalidOrder { .. })) => {
            set_last_error(e.to_string());
            TwStatus::TwInvalidInput
        }
        Err(e) => {
            set_last_error(e.to_string());
            TwStatus::TwSolverFailure
        }
    }
}

/// Grid-search counterpart of the staged solver, mirroring the CLI's
/// `--method grid`.
fn grid_report(signal: &Signal, order: usize, resolution: usize) -> Result<SolveReport, Error> {
    let grid = GridSpec::new(resolution)?;
    let result = grid_search(signal, order, &grid)?;
    let qp = build_qp(signal, order)?;
    let spectrum = eig_sym(qp.q_tilde())?;
    let lambda_max = spectrum.values.first().copied().unwrap_or(0.0).max(0.0);
    let rank = spectrum
        .values
        .iter()
        .filter(|&&v| v > 1e-10 * lambda_max)
        .count();
    let mixture = Mixture::new(result.mixture)?;
    let window = window_from_mixture(&mixture, qp.vertices())?;
    let loss = signal.loss_direct(window.weights())?;
    Ok(SolveReport {
        mixture,
        window,
        loss,
        stage: Stage::GridFallback,
        iterations: result.evaluations,
        degenerate: rank < order,
        signal_len: signal.len(),
        order,
    })
}

/// Releases a report handle. NULL is a no-op.
///
/// # Safety
///
/// `report` must be a pointer returned by [`tw_solve`] that has not already
/// been freed.
#[no_mangle]
pub unsafe extern "C" fn tw_report_free(report: *mut TwReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Signal length `n` of a report, or 0 for NULL.
///
/// # Safety
///
/// `report` must be a live report handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn tw_report_signal_len(report: *const TwReport) -> usize {
    report.as_ref().map_or(0, |r| r.report.signal_len)
}

/// Window half-width `k` of a report, or 0 for NULL.
///
/// # Safety
///
/// `report` must be a live report handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn tw_report_order(report: *const TwReport) -> usize {
    report.as_ref().map_or(0, |r| r.report.order)
}

/// The directly recomputed smoothing loss, or NaN for NULL.
///
/// # Safety
///
/// `report` must be a live report handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn tw_report_loss(report: *const TwReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.report.loss)
}

/// Which stage produced the result; NULL maps to the unconstrained stage.
///
/// # Safety
///
/// `report` must be a live report handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn tw_report_stage(report: *const TwReport) -> TwStage {
    report
        .as_ref()
        .map_or(TwStage::TwStageUnconstrained, |r| r.report.stage.into())
}

/// Whether the optimal mixture was non-unique (rank-deficient objective).
///
/// # Safety
///
/// `report` must be a live report handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn tw_report_degenerate(report: *const TwReport) -> bool {
    report.as_ref().is_some_and(|r| r.report.degenerate)
}

/// Projection major cycles (or grid evaluations); 0 for closed forms.
///
/// # Safety
///
/// `report` must be a live report handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn tw_report_iterations(report: *const TwReport) -> usize {
    report.as_ref().map_or(0, |r| r.report.iterations)
}

/// Copies the full-length window weights (length `n`, centre at index
/// `n / 2`) into `buffer`.
///
/// # Safety
///
/// `report` must be a live report handle; `buffer` must point to `buffer_len`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn tw_report_weights(
    report: *const TwReport,
    buffer: *mut f64,
    buffer_len: usize,
) -> TwStatus {
    copy_array(
        report,
        buffer,
        buffer_len,
        |r| r.report.window.weights(),
        "weights",
    )
}

/// Copies the mixture coefficients (length `k`) into `buffer`.
///
/// # Safety
///
/// `report` must be a live report handle; `buffer` must point to `buffer_len`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn tw_report_mixture(
    report: *const TwReport,
    buffer: *mut f64,
    buffer_len: usize,
) -> TwStatus {
    copy_array(
        report,
        buffer,
        buffer_len,
        |r| r.report.mixture.as_slice(),
        "mixture",
    )
}

unsafe fn copy_array(
    report: *const TwReport,
    buffer: *mut f64,
    buffer_len: usize,
    select: impl Fn(&TwReport) -> &[f64],
    what: &str,
) -> TwStatus {
    let Some(report) = report.as_ref() else {
        set_last_error("report must not be NULL");
        return TwStatus::TwNullPointer;
    };
    if buffer.is_null() {
        set_last_error("buffer must not be NULL");
        return TwStatus::TwNullPointer;
    }
    let source = select(report);
    if buffer_len != source.len() {
        set_last_error(format!(
            "{what} buffer must hold {} values, got space for {buffer_len}",
            source.len()
        ));
        return TwStatus::TwBadBuffer;
    }
    ptr::copy_nonoverlapping(source.as_ptr(), buffer, source.len());
    TwStatus::TwOk
}

/// Smooths `samples` with the report's window, writing `len` samples to
/// `out`. `len` must equal the report's signal length.
///
/// # Safety
///
/// `report` must be a live report handle; `samples` and `out` must point to
/// `len` readable / writable doubles respectively.
#[no_mangle]
pub unsafe extern "C" fn tw_smooth(
    report: *const TwReport,
    samples: *const f64,
    len: usize,
    out: *mut f64,
) -> TwStatus {
    let Some(report) = report.as_ref() else {
        set_last_error("report must not be NULL");
        return TwStatus::TwNullPointer;
    };
    if samples.is_null() || out.is_null() {
        set_last_error("samples and out must not be NULL");
        return TwStatus::TwNullPointer;
    }
    if len != report.report.signal_len {
        set_last_error(format!(
            "expected {} samples, got {len}",
            report.report.signal_len
        ));
        return TwStatus::TwBadBuffer;
    }
    let values = std::slice::from_raw_parts(samples, len).to_vec();
    let signal = match Signal::new(values) {
        Ok(signal) => signal,
        Err(e) => {
            set_last_error(e.to_string());
            return TwStatus::TwInvalidInput;
        }
    };
    match signal.apply_window(report.report.window.weights()) {
        Ok(smoothed) => {
            ptr::copy_nonoverlapping(smoothed.as_ptr(), out, len);
            TwStatus::TwOk
        }
        Err(e) => {
            set_last_error(e.to_string());
            TwStatus::TwInvalidInput
        }
    }
}

/// The message describing this thread's most recent failure, or NULL if no
/// failure has occurred. The pointer stays valid until the next failing call
/// on the same thread; do not free it.
#[no_mangle]
pub extern "C" fn tw_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(ptr::null(), |message| message.as_ptr())
    })
}

/// Stable lowercase name of a stage value.
#[no_mangle]
pub extern "C" fn tw_stage_name(stage: TwStage) -> *const c_char {
    let name: &'static [u8] = match stage {
        TwStage::TwStageUnconstrained => b"unconstrained\0",
        TwStage::TwStageEquality => b"equality\0",
        TwStage::TwStageProjection => b"projection\0",
        TwStage::TwStageGrid => b"grid\0",
    };
    name.as_ptr().cast()
}
