//! C ABI for the simulator. Objects cross the boundary as opaque handles,
//! every call returns a status code, and the most recent error message is
//! kept per thread for retrieval with `urel_last_error`. All entry points
//! catch panics; a caught panic reports `URel_Status_Panic` instead of
//! unwinding into the caller.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use urel::linear::LinearSolution;
use urel::piecewise::PiecewiseData;
use urel::scheme::{run, GridSpec, RunOptions, SimulationResult};
use urel::verify::run_suite;
use urel::UrelError;

/// Result of every API call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum UrelStatus {
    /// The call succeeded.
    Ok = 0,
    /// A pointer was null, a string was not UTF-8, or a value was rejected
    /// by validation.
    InvalidInput = 1,
    /// The computation failed on valid input (state left the admissible
    /// region, grid violated the stability bound, ...).
    Domain = 2,
    /// An internal panic was caught at the boundary.
    Panic = 3,
}

/// Initial data profile (opaque).
pub struct UrelData {
    data: PiecewiseData,
}

/// Completed simulation (opaque).
pub struct UrelSim {
    result: SimulationResult,
}

/// Closed-form solution of the linearized system (opaque).
pub struct UrelLinear {
    solution: LinearSolution,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let cleaned: String = message.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(cleaned).expect("nul bytes were removed");
    });
}

fn status_of(e: &UrelError) -> UrelStatus {
    match e {
        UrelError::Io(_)
        | UrelError::Config(_)
        | UrelError::ConfigAt { .. }
        | UrelError::InvalidState { .. }
        | UrelError::Piecewise(_)
        | UrelError::InvalidGrid(_)
        | UrelError::CflViolation(_)
        | UrelError::NegativeTime(_) => UrelStatus::InvalidInput,
        _ => UrelStatus::Domain,
    }
}

fn fail(status: UrelStatus, message: &str) -> UrelStatus {
    set_error(message);
    status
}

fn guard<F: FnOnce() -> UrelStatus>(body: F) -> UrelStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic of unknown type".into());
            fail(UrelStatus::Panic, &message)
        }
    }
}

/// Message of the most recent error on this thread. The pointer stays valid
/// until the next failing call on the same thread. Never null.
#[no_mangle]
pub extern "C" fn urel_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Static version string of the library.
#[no_mangle]
pub extern "C" fn urel_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Constant initial state; fails unless |b| < a.
///
/// # Safety
/// `out` must be a valid pointer. On success it receives a handle that must
/// be released with `urel_data_free`.
#[no_mangle]
pub unsafe extern "C" fn urel_data_constant(a: f64, b: f64, out: *mut *mut UrelData) -> UrelStatus {
    guard(|| {
        let Some(out) = (unsafe { out.as_mut() }) else {
            return fail(UrelStatus::InvalidInput, "out pointer is null");
        };
        match PiecewiseData::constant(a, b) {
            Ok(data) => {
                *out = Box::into_raw(Box::new(UrelData { data }));
                UrelStatus::Ok
            }
            Err(e) => fail(status_of(&e), &e.to_string()),
        }
    })
}

/// Piecewise constant initial state: `n_edges` interior jump radii in
/// increasing order and `n_edges + 1` values of a and b per interval.
///
/// # Safety
/// `edges` must point to `n_edges` readable doubles, `a_values` and
/// `b_values` to `n_edges + 1` each; `out` as in `urel_data_constant`.
#[no_mangle]
pub unsafe extern "C" fn urel_data_piecewise_constant(
    edges: *const f64,
    n_edges: usize,
    a_values: *const f64,
    b_values: *const f64,
    out: *mut *mut UrelData,
) -> UrelStatus {
    guard(|| {
        let Some(out) = (unsafe { out.as_mut() }) else {
            return fail(UrelStatus::InvalidInput, "out pointer is null");
        };
        if (edges.is_null() && n_edges > 0) || a_values.is_null() || b_values.is_null() {
            return fail(UrelStatus::InvalidInput, "value pointer is null");
        }
        let edges = unsafe { slice::from_raw_parts(edges, n_edges) };
        let a_values = unsafe { slice::from_raw_parts(a_values, n_edges + 1) };
        let b_values = unsafe { slice::from_raw_parts(b_values, n_edges + 1) };
        match PiecewiseData::piecewise_constant(edges, a_values, b_values) {
            Ok(data) => {
                *out = Box::into_raw(Box::new(UrelData { data }));
                UrelStatus::Ok
            }
            Err(e) => fail(status_of(&e), &e.to_string()),
        }
    })
}

/// Releases a data handle. Null is ignored.
///
/// # Safety
/// `data` must have come from this library and not been freed before.
#[no_mangle]
pub unsafe extern "C" fn urel_data_free(data: *mut UrelData) {
    if !data.is_null() {
        drop(unsafe { Box::from_raw(data) });
    }
}

/// Runs the scheme on [0, x_star] x [0, t_star] with 2N time steps,
/// capturing a snapshot at each requested time (`times` may be null when
/// `n_times` is zero).
///
/// # Safety
/// `data` must be a live handle, `times` readable for `n_times` doubles and
/// `out` a valid pointer; the returned handle must be released with
/// `urel_sim_free`.
#[no_mangle]
pub unsafe extern "C" fn urel_sim_run(
    data: *const UrelData,
    t_star: f64,
    x_star: f64,
    n: usize,
    times: *const f64,
    n_times: usize,
    out: *mut *mut UrelSim,
) -> UrelStatus {
    guard(|| {
        let Some(out) = (unsafe { out.as_mut() }) else {
            return fail(UrelStatus::InvalidInput, "out pointer is null");
        };
        let Some(data) = (unsafe { data.as_ref() }) else {
            return fail(UrelStatus::InvalidInput, "data handle is null");
        };
        if times.is_null() && n_times > 0 {
            return fail(UrelStatus::InvalidInput, "times pointer is null");
        }
        let snapshot_times = if n_times == 0 {
            Vec::new()
        } else {
            unsafe { slice::from_raw_parts(times, n_times) }.to_vec()
        };
        let grid = match GridSpec::new(t_star, x_star, n) {
            Ok(grid) => grid,
            Err(e) => return fail(status_of(&e), &e.to_string()),
        };
        let options = RunOptions { snapshot_times, ..RunOptions::default() };
        match run(|x| Ok(data.data.sample(x)), &grid, &options) {
            Ok(result) => {
                *out = Box::into_raw(Box::new(UrelSim { result }));
                UrelStatus::Ok
            }
            Err(e) => fail(status_of(&e), &e.to_string()),
        }
    })
}

/// Releases a simulation handle. Null is ignored.
///
/// # Safety
/// `sim` must have come from this library and not been freed before.
#[no_mangle]
pub unsafe extern "C" fn urel_sim_free(sim: *mut UrelSim) {
    if !sim.is_null() {
        drop(unsafe { Box::from_raw(sim) });
    }
}

/// Grid actually used by a run: time step, cell width and the mesh ratio.
///
/// # Safety
/// `sim` must be a live handle; each non-null out pointer must be writable.
#[no_mangle]
pub unsafe extern "C" fn urel_sim_grid(
    sim: *const UrelSim,
    dt: *mut f64,
    dx: *mut f64,
    lambda: *mut f64,
) -> UrelStatus {
    guard(|| {
        let Some(sim) = (unsafe { sim.as_ref() }) else {
            return fail(UrelStatus::InvalidInput, "sim handle is null");
        };
        let grid = &sim.result.grid;
        for (slot, value) in [(dt, grid.dt), (dx, grid.dx), (lambda, grid.lambda)] {
            if let Some(slot) = unsafe { slot.as_mut() } {
                *slot = value;
            }
        }
        UrelStatus::Ok
    })
}

/// Number of nodes in snapshot `k`, or in the final level when `k` is
/// `SIZE_MAX`.
///
/// # Safety
/// `sim` must be a live handle and `len` writable.
#[no_mangle]
pub unsafe extern "C" fn urel_sim_len(
    sim: *const UrelSim,
    k: usize,
    len: *mut usize,
) -> UrelStatus {
    guard(|| {
        let Some(sim) = (unsafe { sim.as_ref() }) else {
            return fail(UrelStatus::InvalidInput, "sim handle is null");
        };
        let Some(len) = (unsafe { len.as_mut() }) else {
            return fail(UrelStatus::InvalidInput, "len pointer is null");
        };
        if k == usize::MAX {
            *len = sim.result.final_level.states.len();
            return UrelStatus::Ok;
        }
        match sim.result.snapshots.get(k) {
            Some(snap) => {
                *len = snap.states.len();
                UrelStatus::Ok
            }
            None => fail(
                UrelStatus::InvalidInput,
                &format!("snapshot {k} of {} requested", sim.result.snapshots.len()),
            ),
        }
    })
}

/// Copies snapshot `k` (or the final level when `k` is `SIZE_MAX`) into the
/// caller's arrays: node radii and conserved values. Each destination may be
/// null to skip that field; `capacity` is the length of every non-null
/// destination and must cover the level.
///
/// # Safety
/// `sim` must be a live handle; every non-null destination must be writable
/// for `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn urel_sim_copy(
    sim: *const UrelSim,
    k: usize,
    xs: *mut f64,
    a: *mut f64,
    b: *mut f64,
    capacity: usize,
) -> UrelStatus {
    guard(|| {
        let Some(sim) = (unsafe { sim.as_ref() }) else {
            return fail(UrelStatus::InvalidInput, "sim handle is null");
        };
        let (positions, states) = if k == usize::MAX {
            let level = &sim.result.final_level;
            (level.positions(&sim.result.grid), &level.states)
        } else {
            match sim.result.snapshots.get(k) {
                Some(snap) => (snap.positions.clone(), &snap.states),
                None => {
                    return fail(
                        UrelStatus::InvalidInput,
                        &format!("snapshot {k} of {} requested", sim.result.snapshots.len()),
                    )
                }
            }
        };
        if capacity < states.len() {
            return fail(
                UrelStatus::InvalidInput,
                &format!("capacity {capacity} below the level size {}", states.len()),
            );
        }
        if !xs.is_null() {
            unsafe { slice::from_raw_parts_mut(xs, states.len()) }.copy_from_slice(&positions);
        }
        if !a.is_null() {
            let dst = unsafe { slice::from_raw_parts_mut(a, states.len()) };
            for (slot, s) in dst.iter_mut().zip(states.iter()) {
                *slot = s.a;
            }
        }
        if !b.is_null() {
            let dst = unsafe { slice::from_raw_parts_mut(b, states.len()) };
            for (slot, s) in dst.iter_mut().zip(states.iter()) {
                *slot = s.b;
            }
        }
        UrelStatus::Ok
    })
}

/// Closed-form solution of the linearized system for the given data.
///
/// # Safety
/// `data` must be a live handle and `out` writable; the returned handle must
/// be released with `urel_linear_free`.
#[no_mangle]
pub unsafe extern "C" fn urel_linear_new(
    data: *const UrelData,
    out: *mut *mut UrelLinear,
) -> UrelStatus {
    guard(|| {
        let Some(out) = (unsafe { out.as_mut() }) else {
            return fail(UrelStatus::InvalidInput, "out pointer is null");
        };
        let Some(data) = (unsafe { data.as_ref() }) else {
            return fail(UrelStatus::InvalidInput, "data handle is null");
        };
        let solution = LinearSolution::new(data.data.clone());
        *out = Box::into_raw(Box::new(UrelLinear { solution }));
        UrelStatus::Ok
    })
}

/// Releases a linear solution handle. Null is ignored.
///
/// # Safety
/// `linear` must have come from this library and not been freed before.
#[no_mangle]
pub unsafe extern "C" fn urel_linear_free(linear: *mut UrelLinear) {
    if !linear.is_null() {
        drop(unsafe { Box::from_raw(linear) });
    }
}

/// Evaluates the linearized solution at (t, x), t >= 0, x > 0.
///
/// # Safety
/// `linear` must be a live handle; non-null `a` and `b` must be writable.
#[no_mangle]
pub unsafe extern "C" fn urel_linear_eval(
    linear: *const UrelLinear,
    t: f64,
    x: f64,
    a: *mut f64,
    b: *mut f64,
) -> UrelStatus {
    guard(|| {
        let Some(linear) = (unsafe { linear.as_ref() }) else {
            return fail(UrelStatus::InvalidInput, "linear handle is null");
        };
        match linear.solution.eval(t, x) {
            Ok((va, vb)) => {
                if let Some(a) = unsafe { a.as_mut() } {
                    *a = va;
                }
                if let Some(b) = unsafe { b.as_mut() } {
                    *b = vb;
                }
                UrelStatus::Ok
            }
            Err(e) => fail(status_of(&e), &e.to_string()),
        }
    })
}

/// Runs a named property suite ("lemmas", "stationary", "linear" or "all")
/// and reports how many properties failed.
///
/// # Safety
/// `selector` must be a nul-terminated string and `failed` writable.
#[no_mangle]
pub unsafe extern "C" fn urel_verify(selector: *const c_char, failed: *mut usize) -> UrelStatus {
    guard(|| {
        let Some(failed) = (unsafe { failed.as_mut() }) else {
            return fail(UrelStatus::InvalidInput, "failed pointer is null");
        };
        if selector.is_null() {
            return fail(UrelStatus::InvalidInput, "selector is null");
        }
        let Ok(selector) = (unsafe { CStr::from_ptr(selector) }).to_str() else {
            return fail(UrelStatus::InvalidInput, "selector is not UTF-8");
        };
        match run_suite(selector) {
            Ok(results) => {
                *failed = results.iter().filter(|r| !r.passed).count();
                UrelStatus::Ok
            }
            Err(e) => fail(status_of(&e), &e.to_string()),
        }
    })
}
