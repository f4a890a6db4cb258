//! C ABI for the benchmark generator and the three solvers.
//!
//! Instances and reports are opaque handles owned by the caller and released
//! with the matching `*_free` function. Every fallible call returns a
//! [`GadmmStatus`]; on failure the message is available from
//! [`gadmm_last_error_message`] until the next failing call on the same
//! thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gadmm::bench::{generate_instance, to_problem_spec, BenchInstance, ChiMode};
use gadmm::diagnostics::objective_value;
use gadmm::{solve, Error, PreparedProblem, SolveReport, SolverConfig, SolverKind, Termination};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GadmmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    InvalidConfig = 4,
    SolveFailed = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GadmmSolver {
    MAdmm = 0,
    MGadmm = 1,
    GadmmM = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GadmmTermination {
    Converged = 0,
    MaxIter = 1,
    SubproblemFailure = 2,
}

/// Solver parameters. Fill with [`gadmm_config_default`] before editing.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GadmmConfig {
    pub sigma: f64,
    /// Relaxation for G-ADMM-M and M-GADMM, in `(0, 2)`.
    pub rho: f64,
    /// Dual step for M-ADMM, in `(0, (1 + sqrt 5) / 2)`.
    pub tau: f64,
    pub tol: f64,
    pub max_iter: u64,
}

/// A generated benchmark instance.
pub struct GadmmInstance {
    inst: BenchInstance,
}

/// The outcome of one solve.
pub struct GadmmReport {
    report: SolveReport,
    objective: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn fail(status: GadmmStatus, msg: impl Into<String>) -> GadmmStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> GadmmStatus {
    let status = match e {
        Error::InvalidArgument(_) | Error::Parse(_) => GadmmStatus::InvalidArgument,
        Error::DimensionMismatch { .. } => GadmmStatus::DimensionMismatch,
        Error::InvalidConfig(_) => GadmmStatus::InvalidConfig,
        _ => GadmmStatus::SolveFailed,
    };
    fail(status, e.to_string())
}

/// Runs `body`, turning panics into [`GadmmStatus::Panic`].
fn guarded(body: impl FnOnce() -> GadmmStatus) -> GadmmStatus {
    catch_unwind(AssertUnwindSafe(body)).unwrap_or_else(|_| fail(GadmmStatus::Panic, "internal panic"))
}

impl From<GadmmConfig> for SolverConfig {
    fn from(c: GadmmConfig) -> Self {
        SolverConfig {
            sigma: c.sigma,
            rho: c.rho,
            tau: c.tau,
            tol: c.tol,
            max_iter: usize::try_from(c.max_iter).unwrap_or(usize::MAX),
            ..SolverConfig::default()
        }
    }
}

impl From<GadmmSolver> for SolverKind {
    fn from(s: GadmmSolver) -> Self {
        match s {
            GadmmSolver::MAdmm => SolverKind::MAdmm,
            GadmmSolver::MGadmm => SolverKind::MGadmm,
            GadmmSolver::GadmmM => SolverKind::GadmmM,
        }
    }
}

/// Message of the last failing call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gadmm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Writes the default parameters to `out`.
///
/// # Safety
/// `out` must be NULL or point to writable memory for one `GadmmConfig`.
#[no_mangle]
pub unsafe extern "C" fn gadmm_config_default(out: *mut GadmmConfig) -> GadmmStatus {
    if out.is_null() {
        return fail(GadmmStatus::NullPointer, "config output is NULL");
    }
    let d = SolverConfig::default();
    // SAFETY: checked non-null; the caller guarantees it is writable.
    out.write(GadmmConfig {
        sigma: d.sigma,
        rho: d.rho,
        tau: d.tau,
        tol: d.tol,
        max_iter: d.max_iter as u64,
    });
    GadmmStatus::Ok
}

/// Generates the seeded benchmark instance with `m` constraints and `n`
/// variables. `chi` is the penalty weight; pass a negative value for the
/// default `2 mu`.
///
/// # Safety
/// `out` must be NULL or point to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn gadmm_instance_generate(
    m: usize,
    n: usize,
    chi: f64,
    seed: u64,
    out: *mut *mut GadmmInstance,
) -> GadmmStatus {
    if out.is_null() {
        return fail(GadmmStatus::NullPointer, "instance output is NULL");
    }
    guarded(|| {
        let mode = if chi < 0.0 { ChiMode::TwiceMu } else { ChiMode::Value(chi) };
        match generate_instance(m, n, mode, seed) {
            Ok(inst) => {
                // SAFETY: checked non-null above.
                out.write(Box::into_raw(Box::new(GadmmInstance { inst })));
                GadmmStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Writes the constraint count and variable count of `inst`.
///
/// # Safety
/// `inst` must be NULL or a live handle; `m` and `n` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn gadmm_instance_dims(inst: *const GadmmInstance, m: *mut usize, n: *mut usize) -> GadmmStatus {
    // SAFETY: the caller guarantees a non-null `inst` is live.
    let Some(h) = inst.as_ref() else {
        return fail(GadmmStatus::NullPointer, "instance is NULL");
    };
    if m.is_null() || n.is_null() {
        return fail(GadmmStatus::NullPointer, "dimension output is NULL");
    }
    m.write(h.inst.m);
    n.write(h.inst.n);
    GadmmStatus::Ok
}

/// Releases an instance. NULL is ignored.
///
/// # Safety
/// `inst` must be NULL or a handle from [`gadmm_instance_generate`] that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn gadmm_instance_free(inst: *mut GadmmInstance) {
    if !inst.is_null() {
        // SAFETY: the handle came from Box::into_raw and is freed once.
        drop(Box::from_raw(inst));
    }
}

/// Solves `inst` from the zero point. `config` may be NULL for defaults.
///
/// # Safety
/// `inst` must be NULL or a live handle, `config` NULL or readable, and
/// `out` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn gadmm_solve(
    inst: *const GadmmInstance,
    solver: GadmmSolver,
    config: *const GadmmConfig,
    out: *mut *mut GadmmReport,
) -> GadmmStatus {
    // SAFETY: the caller guarantees a non-null `inst` is live.
    let Some(h) = inst.as_ref() else {
        return fail(GadmmStatus::NullPointer, "instance is NULL");
    };
    if out.is_null() {
        return fail(GadmmStatus::NullPointer, "report output is NULL");
    }
    // SAFETY: the caller guarantees a non-null `config` is readable.
    let cfg: SolverConfig = config.as_ref().map_or_else(SolverConfig::default, |c| (*c).into());
    guarded(|| {
        let run = || -> gadmm::Result<GadmmReport> {
            cfg.validate()?;
            let prob = PreparedProblem::new(&to_problem_spec(&h.inst, cfg.sigma)?, cfg.sigma)?;
            let report = solve(solver.into(), &prob, &cfg)?;
            let fin = &report.final_iterate;
            let objective = objective_value(prob.spec(), &fin.x, &fin.y);
            Ok(GadmmReport { report, objective })
        };
        match run() {
            Ok(r) => {
                // SAFETY: checked non-null above.
                out.write(Box::into_raw(Box::new(r)));
                GadmmStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Applies `get` to a live report, or returns `null_value` for NULL.
///
/// # Safety
/// `report` must be NULL or a live handle.
unsafe fn with_report<T>(report: *const GadmmReport, null_value: T, get: impl FnOnce(&GadmmReport) -> T) -> T {
    // SAFETY: the caller guarantees a non-null `report` is live.
    report.as_ref().map_or(null_value, get)
}

/// Number of iterations performed, 0 for NULL.
///
/// # Safety
/// `report` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gadmm_report_iterations(report: *const GadmmReport) -> u64 {
    with_report(report, 0, |r| r.report.iterations as u64)
}

/// Relative KKT residual at the final iterate, NaN for NULL.
///
/// # Safety
/// `report` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gadmm_report_residual(report: *const GadmmReport) -> f64 {
    with_report(report, f64::NAN, |r| r.report.final_residual())
}

/// Objective value at the final iterate, NaN for NULL.
///
/// # Safety
/// `report` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gadmm_report_objective(report: *const GadmmReport) -> f64 {
    with_report(report, f64::NAN, |r| r.objective)
}

/// Wall time of the solve in seconds, NaN for NULL.
///
/// # Safety
/// `report` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gadmm_report_wall_time(report: *const GadmmReport) -> f64 {
    with_report(report, f64::NAN, |r| r.report.wall_time.as_secs_f64())
}

/// Why the solve stopped. NULL reads as a subproblem failure.
///
/// # Safety
/// `report` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gadmm_report_termination(report: *const GadmmReport) -> GadmmTermination {
    with_report(report, GadmmTermination::SubproblemFailure, |r| match r.report.termination {
        Termination::Converged => GadmmTermination::Converged,
        Termination::MaxIter => GadmmTermination::MaxIter,
        Termination::SubproblemFailure => GadmmTermination::SubproblemFailure,
    })
}

/// Copies the final `y` into `buf`. `len` must be at least the variable
/// count; the count is written to `written` when it is non-NULL.
///
/// # Safety
/// `report` must be NULL or a live handle, `buf` NULL or writable for `len`
/// doubles, and `written` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn gadmm_report_copy_y(
    report: *const GadmmReport,
    buf: *mut f64,
    len: usize,
    written: *mut usize,
) -> GadmmStatus {
    // SAFETY: the caller guarantees a non-null `report` is live.
    let Some(r) = report.as_ref() else {
        return fail(GadmmStatus::NullPointer, "report is NULL");
    };
    let y = &r.report.final_iterate.y;
    if !written.is_null() {
        written.write(y.len());
    }
    if buf.is_null() {
        return fail(GadmmStatus::NullPointer, "buffer is NULL");
    }
    if len < y.len() {
        return fail(
            GadmmStatus::BufferTooSmall,
            format!("buffer holds {len} values, need {}", y.len()),
        );
    }
    // SAFETY: `buf` is writable for `len >= y.len()` doubles.
    ptr::copy_nonoverlapping(y.as_ptr(), buf, y.len());
    GadmmStatus::Ok
}

/// Releases a report. NULL is ignored.
///
/// # Safety
/// `report` must be NULL or a handle from [`gadmm_solve`] that has not been
/// freed.
#[no_mangle]
pub unsafe extern "C" fn gadmm_report_free(report: *mut GadmmReport) {
    if !report.is_null() {
        // SAFETY: the handle came from Box::into_raw and is freed once.
        drop(Box::from_raw(report));
    }
}
