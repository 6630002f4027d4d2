//! C ABI over `uav_planner`.
//!
//! Handles are opaque and owned by the caller, who releases them with the
//! matching `*_free` function. Every function returns a [`UavStatus`]; on
//! failure the message is kept per thread and read with
//! [`uav_last_error_message`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use uav_planner::baselines::{run_scheme, BaselineResult, Scheme};
use uav_planner::config::{load_config, Profile, RunConfig};
use uav_planner::output::{lower_bound_model, write_results};
use uav_planner::PlanError;

/// Result code of every exported function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UavStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Bad configuration, argument or string encoding.
    InvalidArgument = 2,
    /// The mission cannot be planned (unreachable endpoints, margin cap).
    Infeasible = 3,
    Solver = 4,
    Io = 5,
    /// An output buffer has the wrong length.
    BufferSize = 6,
    /// A Rust panic was caught; the library state is unaffected.
    Panic = 7,
}

/// Run configuration handle.
pub struct UavPlanner {
    config: RunConfig,
}

/// Result of one planning run.
pub struct UavPlan {
    result: BaselineResult,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(UavStatus, String);

impl From<PlanError> for Failure {
    fn from(e: PlanError) -> Self {
        let status = match e {
            PlanError::Domain(_) | PlanError::DimensionMismatch(_) | PlanError::Config(_) => UavStatus::InvalidArgument,
            PlanError::Infeasible(_) => UavStatus::Infeasible,
            PlanError::Solver(_) => UavStatus::Solver,
            PlanError::Io { .. } => UavStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> UavStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            UavStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("panic: {msg}"));
            UavStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(UavStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(UavStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_slice<'a, T>(p: *mut T, len: usize, expected: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    if len != expected {
        return Err(Failure(UavStatus::BufferSize, format!("{what} must hold {expected} values, got {len}")));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn boxed_planner(config: RunConfig, out: *mut *mut UavPlanner) -> Result<(), Failure> {
    unsafe { put(out, Box::into_raw(Box::new(UavPlanner { config })), "out") }
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn uav_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Planner with the built-in reference configuration.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn uav_planner_default(out: *mut *mut UavPlanner) -> UavStatus {
    guard(|| boxed_planner(RunConfig::default(), out))
}

/// Planner from a JSON configuration document.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn uav_planner_from_json(json: *const c_char, out: *mut *mut UavPlanner) -> UavStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        boxed_planner(RunConfig::from_json(text)?, out)
    })
}

/// Planner from a JSON configuration file.
///
/// # Safety
/// `path` must be a nul-terminated string and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn uav_planner_from_file(path: *const c_char, out: *mut *mut UavPlanner) -> UavStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        boxed_planner(load_config(path)?, out)
    })
}

/// Switches to the reduced CI problem size.
///
/// # Safety
/// `planner` must be null or a live planner handle.
#[no_mangle]
pub unsafe extern "C" fn uav_planner_apply_ci_profile(planner: *mut UavPlanner) -> UavStatus {
    guard(|| {
        let p = planner.as_mut().ok_or_else(|| null("planner"))?;
        p.config.apply_profile(Profile::Ci);
        Ok(())
    })
}

/// Sets the Monte Carlo seed.
///
/// # Safety
/// `planner` must be null or a live planner handle.
#[no_mangle]
pub unsafe extern "C" fn uav_planner_set_seed(planner: *mut UavPlanner, seed: u64) -> UavStatus {
    guard(|| {
        let p = planner.as_mut().ok_or_else(|| null("planner"))?;
        p.config.validation.seed = seed;
        Ok(())
    })
}

/// # Safety
/// `planner` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn uav_planner_free(planner: *mut UavPlanner) {
    if !planner.is_null() {
        drop(Box::from_raw(planner));
    }
}

/// Plans with `scheme` (`proposed`, `ac`, `fixed-slot`, `fixed-alt`,
/// `fixed-traj`), or with the configured scheme when `scheme` is null.
///
/// # Safety
/// `planner` must be a live handle, `scheme` null or nul-terminated, and
/// `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn uav_planner_solve(planner: *const UavPlanner, scheme: *const c_char, out: *mut *mut UavPlan) -> UavStatus {
    guard(|| {
        let p = handle(planner, "planner")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let scheme: Scheme = if scheme.is_null() {
            p.config.scheme
        } else {
            str_arg(scheme, "scheme")?.parse()?
        };
        let cfg = &p.config;
        let result = run_scheme(scheme, &cfg.scenario(), &cfg.env(), &cfg.scheme_config())?;
        put(out, Box::into_raw(Box::new(UavPlan { result })), "out")
    })
}

/// # Safety
/// `plan` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn uav_plan_free(plan: *mut UavPlan) {
    if !plan.is_null() {
        drop(Box::from_raw(plan));
    }
}

/// Mission completion time (s).
///
/// # Safety
/// `plan` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn uav_plan_completion_time(plan: *const UavPlan, out: *mut f64) -> UavStatus {
    guard(|| put(out, handle(plan, "plan")?.result.completion_time, "out"))
}

/// 1 when the run converged without residual slack and passed Monte Carlo
/// validation, else 0.
///
/// # Safety
/// `plan` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn uav_plan_is_feasible(plan: *const UavPlan, out: *mut i32) -> UavStatus {
    guard(|| put(out, i32::from(handle(plan, "plan")?.result.is_feasible()), "out"))
}

/// Number of slots `N`.
///
/// # Safety
/// `plan` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn uav_plan_num_slots(plan: *const UavPlan, out: *mut usize) -> UavStatus {
    guard(|| put(out, handle(plan, "plan")?.result.plan.num_slots(), "out"))
}

/// Number of ground nodes `K`.
///
/// # Safety
/// `plan` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn uav_plan_num_gns(plan: *const UavPlan, out: *mut usize) -> UavStatus {
    guard(|| put(out, handle(plan, "plan")?.result.plan.num_gns(), "out"))
}

/// Copies the `N + 1` waypoints as `x, y, z` triples; `len` must be `3 (N + 1)`.
///
/// # Safety
/// `plan` must be a live handle and `xyz` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn uav_plan_waypoints(plan: *const UavPlan, xyz: *mut f64, len: usize) -> UavStatus {
    guard(|| {
        let traj = &handle(plan, "plan")?.result.plan.trajectory;
        let dst = out_slice(xyz, len, 3 * traj.len(), "xyz")?;
        for (chunk, q) in dst.chunks_exact_mut(3).zip(traj) {
            chunk.copy_from_slice(&[q.x, q.y, q.z]);
        }
        Ok(())
    })
}

/// Copies the `N` slot lengths (s).
///
/// # Safety
/// `plan` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn uav_plan_slot_lengths(plan: *const UavPlan, out: *mut f64, len: usize) -> UavStatus {
    guard(|| {
        let slots = &handle(plan, "plan")?.result.plan.slots;
        out_slice(out, len, slots.len(), "out")?.copy_from_slice(slots);
        Ok(())
    })
}

/// Copies the GN served in each of the `N` slots, or -1 for idle slots.
///
/// # Safety
/// `plan` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn uav_plan_assignment(plan: *const UavPlan, out: *mut i64, len: usize) -> UavStatus {
    guard(|| {
        let plan = &handle(plan, "plan")?.result.plan;
        let dst = out_slice(out, len, plan.num_slots(), "out")?;
        for (d, a) in dst.iter_mut().zip(plan.assignment()) {
            *d = a.map_or(-1, |k| k as i64);
        }
        Ok(())
    })
}

/// Copies the per-GN Monte Carlo mean rates and their standard errors
/// (bps/Hz); both buffers hold `K` values.
///
/// # Safety
/// `plan` must be a live handle and both buffers valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn uav_plan_mc_rates(plan: *const UavPlan, mean: *mut f64, stderr: *mut f64, len: usize) -> UavStatus {
    guard(|| {
        let mc = &handle(plan, "plan")?.result.mc;
        out_slice(mean, len, mc.mean.len(), "mean")?.copy_from_slice(&mc.mean);
        out_slice(stderr, len, mc.stderr.len(), "stderr")?.copy_from_slice(&mc.stderr);
        Ok(())
    })
}

/// Writes the result files of `plan` into `dir`.
///
/// # Safety
/// `planner` and `plan` must be live handles and `dir` nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn uav_plan_write_results(planner: *const UavPlanner, plan: *const UavPlan, dir: *const c_char) -> UavStatus {
    guard(|| {
        let cfg = &handle(planner, "planner")?.config;
        let plan = handle(plan, "plan")?;
        let dir = str_arg(dir, "dir")?;
        let env = cfg.env();
        write_results(Path::new(dir), &plan.result, &cfg.scenario(), &lower_bound_model(cfg, &env)?)?;
        Ok(())
    })
}
