//! C interface to `fracpk`.
//!
//! Objects are opaque handles created by `fpk_*_new` functions and released
//! with the matching `fpk_*_free`. Every fallible call returns an
//! [`FpkStatus`]; on failure a message for the calling thread is available
//! through [`fpk_last_error`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use fracpk::pkpd::{self, BisParams, PatientProfile, Sex};
use fracpk::solver::{self, FractionalOrder, InfusionSchedule, LinearFracSystem, Trajectory};
use fracpk::{FracError, PsiFunction, SquareMatrix, TruncationPolicy};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FpkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Dimension = 4,
    Convergence = 5,
    Accuracy = 6,
    Validation = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FpkSex {
    Male = 0,
    Female = 1,
}

/// Linear fractional system `D y = A y + B u`.
pub struct FpkSystem(LinearFracSystem);

/// Piecewise-constant scalar input.
pub struct FpkSchedule(InfusionSchedule);

/// States sampled on a time grid.
pub struct FpkTrajectory(Trajectory);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: FpkStatus, msg: impl Into<String>) -> FpkStatus {
    set_error(msg.into());
    status
}

fn from_frac(err: FracError) -> FpkStatus {
    let status = match err {
        FracError::Domain(_) => FpkStatus::Domain,
        FracError::Dimension(_) => FpkStatus::Dimension,
        FracError::Convergence { .. } => FpkStatus::Convergence,
        FracError::Accuracy { .. } => FpkStatus::Accuracy,
        FracError::Validation { .. } => FpkStatus::Validation,
    };
    fail(status, err.to_string())
}

fn guard<F: FnOnce() -> Result<(), FpkStatus>>(f: F) -> FpkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FpkStatus::Ok,
        Ok(Err(status)) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(FpkStatus::Panic, format!("panic: {msg}"))
        }
    }
}

fn check<T>(r: fracpk::Result<T>) -> Result<T, FpkStatus> {
    r.map_err(from_frac)
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), FpkStatus> {
    if p.is_null() {
        Err(fail(FpkStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

unsafe fn read_slice<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], FpkStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    non_null(p, name)?;
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn parse_psi(spec: *const c_char) -> Result<PsiFunction, FpkStatus> {
    if spec.is_null() {
        return Ok(PsiFunction::Identity);
    }
    let s = CStr::from_ptr(spec)
        .to_str()
        .map_err(|_| fail(FpkStatus::InvalidArgument, "psi spec is not UTF-8"))?;
    check(s.parse())
}

unsafe fn write_out<T>(out: *mut T, value: T) {
    *out = value;
}

/// Copies into `buf` (if `len` fits) and reports the required length.
unsafe fn copy_out(
    values: &[f64],
    buf: *mut f64,
    cap: usize,
    written: *mut usize,
) -> Result<(), FpkStatus> {
    if !written.is_null() {
        *written = values.len();
    }
    if cap < values.len() {
        return Err(fail(
            FpkStatus::BufferTooSmall,
            format!("buffer holds {cap} values, {} needed", values.len()),
        ));
    }
    non_null(buf, "buf")?;
    ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fpk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `cap`). Returns the full message length without the NUL, or 0
/// when there is no error recorded.
///
/// # Safety
/// `buf` must be null or valid for `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn fpk_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

#[no_mangle]
pub extern "C" fn fpk_clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// E_{α,α′}(z) with the default truncation policy.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn fpk_mittag_leffler(
    alpha: f64,
    alpha_prime: f64,
    z: f64,
    out: *mut f64,
) -> FpkStatus {
    guard(|| {
        non_null(out, "out")?;
        let v = check(fracpk::mittag_leffler_scalar(
            alpha,
            alpha_prime,
            z,
            &TruncationPolicy::default(),
        ))?;
        write_out(out, v);
        Ok(())
    })
}

/// BIS value for an effect-site concentration.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn fpk_bis(
    y4: f64,
    bis0: f64,
    ec50: f64,
    gamma: f64,
    out: *mut f64,
) -> FpkStatus {
    guard(|| {
        non_null(out, "out")?;
        let params = BisParams { bis0, ec50, gamma };
        check(params.validate())?;
        write_out(out, check(pkpd::bis(y4, &params))?);
        Ok(())
    })
}

/// System from an explicit row-major `n`×`n` matrix, input column `b` and
/// initial state `y0` (both of length `n`). `psi_spec` uses the forms
/// "identity", "shift:c", "power:p", "sqrt"; null means identity.
///
/// # Safety
/// Array arguments must be valid for the stated lengths; `psi_spec` must be
/// null or NUL-terminated; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn fpk_system_new(
    a: *const f64,
    n: usize,
    b: *const f64,
    y0: *const f64,
    alpha: f64,
    psi_spec: *const c_char,
    start: f64,
    out: *mut *mut FpkSystem,
) -> FpkStatus {
    guard(|| {
        non_null(out, "out")?;
        if n == 0 {
            return Err(fail(FpkStatus::InvalidArgument, "n must be positive"));
        }
        let a = read_slice(a, n * n, "a")?;
        let b = read_slice(b, n, "b")?;
        let y0 = read_slice(y0, n, "y0")?;
        let psi = parse_psi(psi_spec)?;
        let m = check(SquareMatrix::from_row_major(a.to_vec()))?;
        let order = check(FractionalOrder::new(alpha))?;
        let sys = check(LinearFracSystem::new(
            m,
            b.to_vec(),
            order,
            psi,
            start,
            y0.to_vec(),
        ))?;
        write_out(out, Box::into_raw(Box::new(FpkSystem(sys))));
        Ok(())
    })
}

/// Four-compartment propofol system for a patient, starting empty at t = 0.
///
/// # Safety
/// `psi_spec` must be null or NUL-terminated; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn fpk_system_schnider(
    age: f64,
    weight: f64,
    height: f64,
    sex: FpkSex,
    alpha: f64,
    psi_spec: *const c_char,
    out: *mut *mut FpkSystem,
) -> FpkStatus {
    guard(|| {
        non_null(out, "out")?;
        let sex = match sex {
            FpkSex::Male => Sex::Male,
            FpkSex::Female => Sex::Female,
        };
        let profile = check(PatientProfile::new(age, weight, height, sex))?;
        let params = check(pkpd::schnider_params(&profile))?;
        let (a, b) = check(pkpd::assemble_system(&params))?;
        let psi = parse_psi(psi_spec)?;
        let order = check(FractionalOrder::new(alpha))?;
        let sys = check(LinearFracSystem::new(a, b, order, psi, 0.0, vec![0.0; 4]))?;
        write_out(out, Box::into_raw(Box::new(FpkSystem(sys))));
        Ok(())
    })
}

/// Dimension of the state, or 0 for a null handle.
///
/// # Safety
/// `sys` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fpk_system_dim(sys: *const FpkSystem) -> usize {
    sys.as_ref().map_or(0, |s| s.0.dim())
}

/// # Safety
/// `sys` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fpk_system_free(sys: *mut FpkSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Schedule with `n_breakpoints` increasing times and `n_breakpoints − 1`
/// rates; rate k applies on [t_k, t_{k+1}).
///
/// # Safety
/// `breakpoints` must hold `n_breakpoints` values and `rates` one fewer;
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn fpk_schedule_new(
    breakpoints: *const f64,
    n_breakpoints: usize,
    rates: *const f64,
    out: *mut *mut FpkSchedule,
) -> FpkStatus {
    guard(|| {
        non_null(out, "out")?;
        if n_breakpoints < 2 {
            return Err(fail(
                FpkStatus::InvalidArgument,
                "need at least two breakpoints",
            ));
        }
        let bp = read_slice(breakpoints, n_breakpoints, "breakpoints")?;
        let r = read_slice(rates, n_breakpoints - 1, "rates")?;
        let sched = check(InfusionSchedule::new(bp.to_vec(), r.to_vec()))?;
        write_out(out, Box::into_raw(Box::new(FpkSchedule(sched))));
        Ok(())
    })
}

/// # Safety
/// `sched` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fpk_schedule_free(sched: *mut FpkSchedule) {
    if !sched.is_null() {
        drop(Box::from_raw(sched));
    }
}

/// Closed-form solution on the `n` increasing times of `grid`.
///
/// # Safety
/// Handles must be live, `grid` valid for `n` values and `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn fpk_solve_piecewise(
    sys: *const FpkSystem,
    sched: *const FpkSchedule,
    grid: *const f64,
    n: usize,
    out: *mut *mut FpkTrajectory,
) -> FpkStatus {
    guard(|| {
        non_null(sys, "sys")?;
        non_null(sched, "sched")?;
        non_null(out, "out")?;
        let grid = read_slice(grid, n, "grid")?;
        let traj = check(solver::solve_piecewise(&(*sys).0, &(*sched).0, grid))?;
        write_out(out, Box::into_raw(Box::new(FpkTrajectory(traj))));
        Ok(())
    })
}

/// Predictor-corrector reference solution with `steps` uniform steps in
/// transformed time, over the whole schedule.
///
/// # Safety
/// Handles must be live and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn fpk_solve_oracle(
    sys: *const FpkSystem,
    sched: *const FpkSchedule,
    steps: usize,
    out: *mut *mut FpkTrajectory,
) -> FpkStatus {
    guard(|| {
        non_null(sys, "sys")?;
        non_null(sched, "sched")?;
        non_null(out, "out")?;
        let traj = check(solver::oracle_substitution_solve(
            &(*sys).0,
            &(*sched).0,
            steps,
        ))?;
        write_out(out, Box::into_raw(Box::new(FpkTrajectory(traj))));
        Ok(())
    })
}

/// Number of time points, or 0 for a null handle.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fpk_trajectory_len(traj: *const FpkTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.len())
}

/// State dimension, or 0 for a null handle.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fpk_trajectory_dim(traj: *const FpkTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.dim())
}

/// Copies the time grid. `written` (optional) receives the required length.
///
/// # Safety
/// `traj` must be live; `buf` valid for `cap` values; `written` null or valid.
#[no_mangle]
pub unsafe extern "C" fn fpk_trajectory_times(
    traj: *const FpkTrajectory,
    buf: *mut f64,
    cap: usize,
    written: *mut usize,
) -> FpkStatus {
    guard(|| {
        non_null(traj, "traj")?;
        copy_out(&(*traj).0.times, buf, cap, written)
    })
}

/// Copies the state at time index `k`.
///
/// # Safety
/// As for [`fpk_trajectory_times`].
#[no_mangle]
pub unsafe extern "C" fn fpk_trajectory_state(
    traj: *const FpkTrajectory,
    k: usize,
    buf: *mut f64,
    cap: usize,
    written: *mut usize,
) -> FpkStatus {
    guard(|| {
        non_null(traj, "traj")?;
        let t = &(*traj).0;
        let state = t.states.get(k).ok_or_else(|| {
            fail(
                FpkStatus::InvalidArgument,
                format!("index {k} outside {} points", t.len()),
            )
        })?;
        copy_out(state, buf, cap, written)
    })
}

/// Copies component `i` over all time points.
///
/// # Safety
/// As for [`fpk_trajectory_times`].
#[no_mangle]
pub unsafe extern "C" fn fpk_trajectory_component(
    traj: *const FpkTrajectory,
    i: usize,
    buf: *mut f64,
    cap: usize,
    written: *mut usize,
) -> FpkStatus {
    guard(|| {
        non_null(traj, "traj")?;
        let t = &(*traj).0;
        if i >= t.dim() {
            return Err(fail(
                FpkStatus::InvalidArgument,
                format!("component {i} outside dimension {}", t.dim()),
            ));
        }
        copy_out(&t.component(i), buf, cap, written)
    })
}

/// BIS curve of a four-compartment trajectory (component 4 is the effect site).
///
/// # Safety
/// As for [`fpk_trajectory_times`].
#[no_mangle]
pub unsafe extern "C" fn fpk_trajectory_bis(
    traj: *const FpkTrajectory,
    bis0: f64,
    ec50: f64,
    gamma: f64,
    buf: *mut f64,
    cap: usize,
    written: *mut usize,
) -> FpkStatus {
    guard(|| {
        non_null(traj, "traj")?;
        let params = BisParams { bis0, ec50, gamma };
        check(params.validate())?;
        let curve = check(pkpd::bis_curve(&(*traj).0, &params))?;
        copy_out(&curve, buf, cap, written)
    })
}

/// # Safety
/// `traj` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fpk_trajectory_free(traj: *mut FpkTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}
