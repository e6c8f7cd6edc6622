//! C ABI for the `atmr` optimizer.
//!
//! Problems and runs are opaque handles created by `atmr_*_new`/`atmr_run`
//! and released with the matching `_free`. Every fallible call returns an
//! [`AtmrStatus`]; on failure [`atmr_last_error_message`] describes the error
//! for the calling thread. Matrices are row-major `double` buffers.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;
use std::sync::Arc;

use atmr::metrics;
use atmr::{
    Algorithm, AlgorithmConfig, Error, Evaluation, ProblemDefinition, ProblemParams,
    ProblemRegistry, RunResult,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AtmrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownProblem = 3,
    /// Invalid algorithm configuration.
    Config = 4,
    /// An objective or constraint evaluated to NaN or infinity.
    Evaluation = 5,
    /// The request is outside what the library supports.
    Unsupported = 6,
    /// Output buffer too small.
    BufferTooSmall = 7,
    Panic = 8,
    Internal = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AtmrAlgorithm {
    Atmr = 0,
    Nsga2Cdp = 1,
}

/// Algorithm settings. Obtain defaults from [`atmr_config_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AtmrConfig {
    /// Population size; even and at least 4.
    pub n: usize,
    pub max_fes: u64,
    /// Equality constraint tolerance.
    pub delta: f64,
    pub pc: f64,
    pub pm: f64,
    pub eta_c: f64,
    pub eta_m: f64,
    pub seed: u64,
}

impl From<&AtmrConfig> for AlgorithmConfig {
    fn from(c: &AtmrConfig) -> Self {
        AlgorithmConfig {
            n: c.n,
            max_fes: c.max_fes,
            delta: c.delta,
            pc: c.pc,
            pm: c.pm,
            eta_c: c.eta_c,
            eta_m: c.eta_m,
            seed: c.seed,
        }
    }
}

impl From<AlgorithmConfig> for AtmrConfig {
    fn from(c: AlgorithmConfig) -> Self {
        AtmrConfig {
            n: c.n,
            max_fes: c.max_fes,
            delta: c.delta,
            pc: c.pc,
            pm: c.pm,
            eta_c: c.eta_c,
            eta_m: c.eta_m,
            seed: c.seed,
        }
    }
}

/// Opaque problem handle.
pub struct AtmrProblem {
    inner: ProblemDefinition,
}

/// Opaque handle to a finished run.
pub struct AtmrRun {
    inner: RunResult,
}

/// Evaluates `x` (length `n_var`) into `f` (`n_obj`), `g` (`n_ineq`) and `h`
/// (`n_eq`). Returns 0 on success; anything else fails the run. May be called
/// from several threads at once.
pub type AtmrEvalFn = Option<
    unsafe extern "C" fn(
        x: *const f64,
        n_var: usize,
        f: *mut f64,
        g: *mut f64,
        h: *mut f64,
        user_data: *mut c_void,
    ) -> c_int,
>;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> AtmrStatus {
    match e {
        Error::UnknownProblem { .. } => AtmrStatus::UnknownProblem,
        Error::Config(_) => AtmrStatus::Config,
        Error::NonFinite { .. } => AtmrStatus::Evaluation,
        Error::Generation { source, .. } => status_of(source),
        Error::Capability(_) => AtmrStatus::Unsupported,
        Error::Structural(_) | Error::Contract(_) => AtmrStatus::InvalidArgument,
        _ => AtmrStatus::Internal,
    }
}

fn fail(e: Error) -> AtmrStatus {
    set_error(e.to_string());
    status_of(&e)
}

/// Runs `f`, turning panics into [`AtmrStatus::Panic`].
fn guard(f: impl FnOnce() -> AtmrStatus) -> AtmrStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| {
        set_error("internal panic");
        AtmrStatus::Panic
    })
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            set_error(concat!("`", stringify!($p), "` is null"));
            return AtmrStatus::NullPointer;
        })+
    };
}

unsafe fn c_str<'a>(p: *const c_char) -> Result<&'a str, AtmrStatus> {
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("string is not valid UTF-8");
        AtmrStatus::InvalidArgument
    })
}

unsafe fn doubles<'a>(p: *const f64, len: usize) -> &'a [f64] {
    if len == 0 {
        &[]
    } else {
        slice::from_raw_parts(p, len)
    }
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn atmr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Instantiates a built-in problem. `param_keys`/`param_values` hold
/// `n_params` entries and may be NULL when `n_params` is 0.
///
/// # Safety
/// Pointers must be valid for the given lengths; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn atmr_problem_new(
    name: *const c_char,
    param_keys: *const *const c_char,
    param_values: *const f64,
    n_params: usize,
    out: *mut *mut AtmrProblem,
) -> AtmrStatus {
    guard(|| {
        non_null!(name, out);
        *out = ptr::null_mut();
        if n_params > 0 {
            non_null!(param_keys, param_values);
        }
        let name = match c_str(name) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let mut params = ProblemParams::new();
        for i in 0..n_params {
            let key = *param_keys.add(i);
            non_null!(key);
            match c_str(key) {
                Ok(k) => params.insert(k.to_string(), *param_values.add(i)),
                Err(s) => return s,
            };
        }
        match ProblemRegistry::builtin().get(name, &params) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(AtmrProblem { inner: p }));
                AtmrStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

struct UserData(*mut c_void);
// The caller promises the callback and its data tolerate concurrent use.
unsafe impl Send for UserData {}
unsafe impl Sync for UserData {}

/// Defines a problem evaluated by a C callback.
///
/// # Safety
/// `lower`/`upper` must hold `n_var` values. `eval` and `user_data` must stay
/// valid, and be safe to call from any thread, until the handle is freed.
#[no_mangle]
pub unsafe extern "C" fn atmr_problem_new_callback(
    name: *const c_char,
    n_var: usize,
    n_obj: usize,
    n_ineq: usize,
    n_eq: usize,
    lower: *const f64,
    upper: *const f64,
    eval: AtmrEvalFn,
    user_data: *mut c_void,
    out: *mut *mut AtmrProblem,
) -> AtmrStatus {
    guard(|| {
        non_null!(name, lower, upper, out);
        *out = ptr::null_mut();
        let Some(eval) = eval else {
            set_error("`eval` is null");
            return AtmrStatus::NullPointer;
        };
        let name = match c_str(name) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let lo = doubles(lower, n_var).to_vec();
        let hi = doubles(upper, n_var).to_vec();
        let data = UserData(user_data);
        let evaluator = Arc::new(move |x: &[f64]| {
            let data = &data;
            let mut f = vec![0.0; n_obj];
            let mut g = vec![0.0; n_ineq];
            let mut h = vec![0.0; n_eq];
            let rc = eval(
                x.as_ptr(),
                x.len(),
                f.as_mut_ptr(),
                g.as_mut_ptr(),
                h.as_mut_ptr(),
                data.0,
            );
            if rc != 0 {
                // Surfaces as a non-finite evaluation error.
                f.iter_mut().for_each(|v| *v = f64::NAN);
            }
            Evaluation::new(f, g, h)
        });
        match ProblemDefinition::new(name, n_obj, n_ineq, n_eq, lo, hi, evaluator) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(AtmrProblem { inner: p }));
                AtmrStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `problem` must come from `atmr_problem_new*` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn atmr_problem_free(problem: *mut AtmrProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Writes the problem dimensions; any output pointer may be NULL.
///
/// # Safety
/// Non-null pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn atmr_problem_dims(
    problem: *const AtmrProblem,
    n_var: *mut usize,
    n_obj: *mut usize,
    n_ineq: *mut usize,
    n_eq: *mut usize,
) -> AtmrStatus {
    guard(|| {
        non_null!(problem);
        let p = &(*problem).inner;
        for (dst, v) in [
            (n_var, p.n_var()),
            (n_obj, p.n_obj()),
            (n_ineq, p.n_ineq()),
            (n_eq, p.n_eq()),
        ] {
            if !dst.is_null() {
                *dst = v;
            }
        }
        AtmrStatus::Ok
    })
}

/// Default settings for `problem` (population 100, 60000 evaluations,
/// mutation rate 1/D, seed 0). Writes zeros if `problem` is NULL.
///
/// # Safety
/// `problem` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn atmr_config_default(problem: *const AtmrProblem) -> AtmrConfig {
    if problem.is_null() {
        return AtmrConfig {
            n: 0,
            max_fes: 0,
            delta: 0.0,
            pc: 0.0,
            pm: 0.0,
            eta_c: 0.0,
            eta_m: 0.0,
            seed: 0,
        };
    }
    AlgorithmConfig::for_problem(&(*problem).inner).into()
}

/// Runs an algorithm to completion.
///
/// # Safety
/// `problem` and `config` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn atmr_run(
    problem: *const AtmrProblem,
    algorithm: AtmrAlgorithm,
    config: *const AtmrConfig,
    out: *mut *mut AtmrRun,
) -> AtmrStatus {
    guard(|| {
        non_null!(problem, config, out);
        *out = ptr::null_mut();
        let algorithm = match algorithm {
            AtmrAlgorithm::Atmr => Algorithm::Atmr,
            AtmrAlgorithm::Nsga2Cdp => Algorithm::Nsga2Cdp,
        };
        let cfg = AlgorithmConfig::from(&*config);
        match algorithm.run(&(*problem).inner, &cfg) {
            Ok(r) => {
                *out = Box::into_raw(Box::new(AtmrRun { inner: r }));
                AtmrStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `run` must come from `atmr_run` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn atmr_run_free(run: *mut AtmrRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Number of solutions in the final population (0 for NULL).
///
/// # Safety
/// `run` must be NULL or live.
#[no_mangle]
pub unsafe extern "C" fn atmr_run_size(run: *const AtmrRun) -> usize {
    run.as_ref().map_or(0, |r| r.inner.final_population.len())
}

/// Function evaluations spent (0 for NULL).
///
/// # Safety
/// `run` must be NULL or live.
#[no_mangle]
pub unsafe extern "C" fn atmr_run_fes(run: *const AtmrRun) -> u64 {
    run.as_ref().map_or(0, |r| r.inner.fes)
}

/// Number of traced generations, including the initial population.
///
/// # Safety
/// `run` must be NULL or live.
#[no_mangle]
pub unsafe extern "C" fn atmr_run_generations(run: *const AtmrRun) -> usize {
    run.as_ref().map_or(0, |r| r.inner.trace.len())
}

unsafe fn copy_rows(
    run: *const AtmrRun,
    out: *mut f64,
    len: usize,
    row: impl Fn(&atmr::Solution) -> &[f64],
) -> AtmrStatus {
    guard(|| {
        non_null!(run);
        let pop = &(*run).inner.final_population;
        let need: usize = pop.iter().map(|s| row(s).len()).sum();
        if len < need {
            set_error(format!("buffer holds {len} values, {need} needed"));
            return AtmrStatus::BufferTooSmall;
        }
        if need == 0 {
            return AtmrStatus::Ok;
        }
        non_null!(out);
        let dst = slice::from_raw_parts_mut(out, need);
        let mut k = 0;
        for s in pop {
            let r = row(s);
            dst[k..k + r.len()].copy_from_slice(r);
            k += r.len();
        }
        AtmrStatus::Ok
    })
}

/// Copies final objectives, `size * n_obj` values row-major, into `out`.
///
/// # Safety
/// `out` must be writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn atmr_run_objectives(
    run: *const AtmrRun,
    out: *mut f64,
    len: usize,
) -> AtmrStatus {
    copy_rows(run, out, len, |s| &s.objectives)
}

/// Copies final decision vectors, `size * n_var` values row-major, into `out`.
///
/// # Safety
/// `out` must be writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn atmr_run_decisions(
    run: *const AtmrRun,
    out: *mut f64,
    len: usize,
) -> AtmrStatus {
    copy_rows(run, out, len, |s| &s.x)
}

/// Copies the constraint violation of each final solution (`size` values).
///
/// # Safety
/// `out` must be writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn atmr_run_violations(
    run: *const AtmrRun,
    out: *mut f64,
    len: usize,
) -> AtmrStatus {
    copy_rows(run, out, len, |s| slice::from_ref(&s.violation))
}

unsafe fn rows(p: *const f64, n: usize, m: usize) -> Vec<Vec<f64>> {
    doubles(p, n * m).chunks(m).map(<[f64]>::to_vec).collect()
}

/// Inverted generational distance of `approx` (`n_approx` x `m`) against
/// `reference` (`n_ref` x `m`). Writes NaN when either set is empty.
///
/// # Safety
/// Buffers must hold the stated number of values; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn atmr_igd(
    approx: *const f64,
    n_approx: usize,
    reference: *const f64,
    n_ref: usize,
    m: usize,
    out: *mut f64,
) -> AtmrStatus {
    guard(|| {
        non_null!(out);
        if m == 0 {
            set_error("`m` must be positive");
            return AtmrStatus::InvalidArgument;
        }
        if (n_approx > 0 && approx.is_null()) || (n_ref > 0 && reference.is_null()) {
            set_error("point buffer is null");
            return AtmrStatus::NullPointer;
        }
        *out = metrics::igd(&rows(approx, n_approx, m), &rows(reference, n_ref, m))
            .unwrap_or(f64::NAN);
        AtmrStatus::Ok
    })
}

/// Hypervolume of `points` (`n` x `m`, minimization) bounded by `ref_point`.
/// Supports `m` of 2 or 3.
///
/// # Safety
/// Buffers must hold the stated number of values; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn atmr_hypervolume(
    points: *const f64,
    n: usize,
    m: usize,
    ref_point: *const f64,
    out: *mut f64,
) -> AtmrStatus {
    guard(|| {
        non_null!(ref_point, out);
        if n > 0 {
            non_null!(points);
        }
        if m == 0 {
            set_error("`m` must be positive");
            return AtmrStatus::InvalidArgument;
        }
        match metrics::hypervolume(&rows(points, n, m), doubles(ref_point, m)) {
            Ok(v) => {
                *out = v;
                AtmrStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
