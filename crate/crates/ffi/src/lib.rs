//! C ABI for the `reszo` library.
//!
//! Every entry point returns a [`ReszoStatus`]. On failure a message is kept
//! per thread and can be read with [`reszo_last_error_message`]. Experiments
//! and their results live behind opaque handles that the caller frees.
//!
//! Objectives supplied through [`reszo_minimize`] are called on the calling
//! thread only.

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use reszo::harness::{export_results, run_experiment, ExperimentConfig, ExperimentResult};
use reszo::linalg::DenseVector;
use reszo::optimizers::{Method, OptimizerConfig};
use reszo::{BlackBoxObjective, FnProblem, ZoError};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReszoStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    EvaluationFailed = 4,
    Numeric = 5,
    NotEnoughSamples = 6,
    SingularUpdate = 7,
    /// The run left the finite region. Outputs still hold the last iterate.
    Diverged = 8,
    ExperimentFailed = 9,
    Config = 10,
    Export = 11,
    Io = 12,
    /// A Rust panic was caught at the boundary.
    Panic = 13,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReszoMethod {
    Szo = 0,
    Rszo = 1,
    Tzo = 2,
    LReszo = 3,
    QReszo = 4,
}

impl From<ReszoMethod> for Method {
    fn from(m: ReszoMethod) -> Self {
        match m {
            ReszoMethod::Szo => Method::Szo,
            ReszoMethod::Rszo => Method::Rszo,
            ReszoMethod::Tzo => Method::Tzo,
            ReszoMethod::LReszo => Method::LReszo,
            ReszoMethod::QReszo => Method::QReszo,
        }
    }
}

/// Optimizer settings for [`reszo_minimize`]. Fill with
/// [`reszo_options_default`] and adjust.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ReszoOptions {
    pub method: ReszoMethod,
    pub eta: f64,
    pub delta: f64,
    /// Warm-start step size and radius (regression methods only).
    pub warm_eta: f64,
    pub warm_delta: f64,
    /// Regression window length.
    pub window_m: usize,
    pub iterations: usize,
    pub adaptive_delta: bool,
    pub fast_path: bool,
    /// When true the objective is called once more per iteration, outside
    /// the query budget, to record `f(x_{t+1})`.
    pub record_iterate_values: bool,
    pub seed: u64,
}

impl ReszoOptions {
    fn to_config(self) -> OptimizerConfig {
        let mut cfg = OptimizerConfig::new(self.method.into(), self.eta, self.delta, self.iterations);
        cfg.warm_eta = self.warm_eta;
        cfg.warm_delta = self.warm_delta;
        cfg.window_m = self.window_m;
        cfg.adaptive_delta = self.adaptive_delta;
        cfg.fast_path = self.fast_path;
        cfg.record_iterate_values = self.record_iterate_values;
        cfg.seed = self.seed;
        cfg
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct ReszoRunSummary {
    /// Last queried objective value.
    pub last_query_value: f64,
    /// `f` at the returned point, or NaN when iterate values are not recorded.
    pub final_value: f64,
    /// Black-box queries spent.
    pub queries: u64,
    pub iterations: usize,
    pub diverged: bool,
}

/// Objective callback: `x` points at `dim` doubles.
pub type ReszoObjectiveFn = Option<unsafe extern "C" fn(x: *const f64, dim: usize, user_data: *mut c_void) -> f64>;

/// Opaque experiment configuration.
pub struct ReszoExperiment {
    config: ExperimentConfig,
}

/// Opaque experiment outcome.
pub struct ReszoResult {
    inner: ExperimentResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure {
    status: ReszoStatus,
    message: String,
}

fn failure(status: ReszoStatus, msg: impl Into<String>) -> Failure {
    Failure {
        status,
        message: msg.into(),
    }
}

fn status_of(err: &ZoError) -> ReszoStatus {
    match err {
        ZoError::Precondition(_) => ReszoStatus::InvalidArgument,
        ZoError::DimensionMismatch { .. } => ReszoStatus::DimensionMismatch,
        ZoError::EvaluationFailed { .. } => ReszoStatus::EvaluationFailed,
        ZoError::Numeric(_) => ReszoStatus::Numeric,
        ZoError::NotEnoughSamples { .. } => ReszoStatus::NotEnoughSamples,
        ZoError::SingularUpdate { .. } => ReszoStatus::SingularUpdate,
        ZoError::Diverged { .. } => ReszoStatus::Diverged,
        ZoError::ExperimentFailed(_) => ReszoStatus::ExperimentFailed,
        ZoError::Config(_) => ReszoStatus::Config,
        ZoError::Export(_) => ReszoStatus::Export,
        ZoError::Io(_) => ReszoStatus::Io,
    }
}

impl From<ZoError> for Failure {
    fn from(e: ZoError) -> Self {
        failure(status_of(&e), e.to_string())
    }
}

/// Run `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> ReszoStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => ReszoStatus::Ok,
        Ok(Err(f)) => {
            set_last_error(f.message);
            f.status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            ReszoStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(failure(ReszoStatus::NullArgument, format!("{name} is null")))
    } else {
        Ok(())
    }
}

unsafe fn c_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    non_null(p, name)?;
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| failure(ReszoStatus::InvalidArgument, format!("{name} is not valid UTF-8")))
}

unsafe fn experiment_mut<'a>(p: *mut ReszoExperiment) -> Result<&'a mut ReszoExperiment, Failure> {
    p.as_mut()
        .ok_or_else(|| failure(ReszoStatus::NullArgument, "experiment is null"))
}

unsafe fn result_ref<'a>(p: *const ReszoResult) -> Result<&'a ReszoResult, Failure> {
    p.as_ref()
        .ok_or_else(|| failure(ReszoStatus::NullArgument, "result is null"))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn reszo_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn reszo_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Defaults for `method` with zero step size and radius; set `eta`,
/// `delta` and `iterations` before use.
///
/// # Safety
/// `out` must point to writable memory for one `ReszoOptions`.
#[no_mangle]
pub unsafe extern "C" fn reszo_options_default(method: ReszoMethod, out: *mut ReszoOptions) -> ReszoStatus {
    guard(|| {
        non_null(out, "out")?;
        let cfg = OptimizerConfig::new(method.into(), 0.0, 0.0, 0);
        out.write(ReszoOptions {
            method,
            eta: cfg.eta,
            delta: cfg.delta,
            warm_eta: cfg.warm_eta,
            warm_delta: cfg.warm_delta,
            window_m: cfg.window_m,
            iterations: cfg.iterations,
            adaptive_delta: cfg.adaptive_delta,
            fast_path: cfg.fast_path,
            record_iterate_values: cfg.record_iterate_values,
            seed: cfg.seed,
        });
        Ok(())
    })
}

struct Callback {
    f: unsafe extern "C" fn(*const f64, usize, *mut c_void) -> f64,
    user_data: *mut c_void,
}

// The optimizer calls the objective only on the thread that entered
// `reszo_minimize`; the bounds are needed by the problem trait alone.
unsafe impl Send for Callback {}
unsafe impl Sync for Callback {}

/// Minimize a black-box function from `x0`.
///
/// On `RESZO_STATUS_OK` and `RESZO_STATUS_DIVERGED`, `x_out` receives the
/// last iterate and `summary_out` (optional) the run summary.
///
/// # Safety
/// `x0` and `x_out` must each point to `dim` doubles; they may alias.
/// `options` must point to a valid `ReszoOptions`. `objective` must be safe
/// to call with any `dim`-vector and the given `user_data`.
#[no_mangle]
pub unsafe extern "C" fn reszo_minimize(
    objective: ReszoObjectiveFn,
    user_data: *mut c_void,
    dim: usize,
    x0: *const f64,
    options: *const ReszoOptions,
    x_out: *mut f64,
    summary_out: *mut ReszoRunSummary,
) -> ReszoStatus {
    guard(|| {
        let f = objective.ok_or_else(|| failure(ReszoStatus::NullArgument, "objective is null"))?;
        non_null(x0, "x0")?;
        non_null(options, "options")?;
        non_null(x_out, "x_out")?;
        if dim == 0 {
            return Err(failure(ReszoStatus::InvalidArgument, "dim must be positive"));
        }
        let cfg = (*options).to_config();
        cfg.validate()?;
        let start = DenseVector::from_column_slice(std::slice::from_raw_parts(x0, dim));

        let cb = Callback { f, user_data };
        let problem = FnProblem::new("callback", dim, move |x: &DenseVector| {
            let cb = &cb;
            unsafe { (cb.f)(x.as_ptr(), x.len(), cb.user_data) }
        });
        let mut bb = BlackBoxObjective::from_problem(problem);
        let (trace, status) = match reszo::run(&mut bb, &cfg, &start) {
            Ok(t) => (t, Ok(())),
            Err(ZoError::Diverged { trace, iteration }) => (
                *trace,
                Err(failure(
                    ReszoStatus::Diverged,
                    format!("run diverged at iteration {iteration}"),
                )),
            ),
            Err(e) => return Err(e.into()),
        };

        ptr::copy_nonoverlapping(trace.final_iterate.as_ptr(), x_out, dim);
        if !summary_out.is_null() {
            let last = trace.records.last();
            summary_out.write(ReszoRunSummary {
                last_query_value: last.map_or(f64::NAN, |r| r.f_value),
                final_value: last.map_or(trace.initial_value, |r| r.iterate_value),
                queries: bb.query_count(),
                iterations: trace.iterations(),
                diverged: trace.diverged,
            });
        }
        status
    })
}

fn boxed_experiment(config: ExperimentConfig, out: *mut *mut ReszoExperiment) -> Result<(), Failure> {
    config.validate()?;
    unsafe { out.write(Box::into_raw(Box::new(ReszoExperiment { config }))) };
    Ok(())
}

/// Parse an experiment from TOML text (a run manifest works too).
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn reszo_experiment_from_toml(
    toml: *const c_char,
    out: *mut *mut ReszoExperiment,
) -> ReszoStatus {
    guard(|| {
        non_null(out, "out")?;
        let text = c_str(toml, "toml")?;
        boxed_experiment(ExperimentConfig::from_toml_str(text)?, out)
    })
}

/// Load an experiment file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn reszo_experiment_load(path: *const c_char, out: *mut *mut ReszoExperiment) -> ReszoStatus {
    guard(|| {
        non_null(out, "out")?;
        let path = PathBuf::from(c_str(path, "path")?);
        boxed_experiment(ExperimentConfig::load(&path)?, out)
    })
}

/// # Safety
/// `experiment` must come from this library and not be freed.
#[no_mangle]
pub unsafe extern "C" fn reszo_experiment_set_trials(experiment: *mut ReszoExperiment, trials: usize) -> ReszoStatus {
    guard(|| {
        let e = experiment_mut(experiment)?;
        if trials == 0 {
            return Err(failure(ReszoStatus::InvalidArgument, "trials must be at least 1"));
        }
        e.config.trials = trials;
        Ok(())
    })
}

/// # Safety
/// `experiment` must come from this library and not be freed.
#[no_mangle]
pub unsafe extern "C" fn reszo_experiment_set_seed(experiment: *mut ReszoExperiment, base_seed: u64) -> ReszoStatus {
    guard(|| {
        experiment_mut(experiment)?.config.base_seed = base_seed;
        Ok(())
    })
}

/// # Safety
/// `experiment` must be NULL or come from this library; it is invalid
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn reszo_experiment_free(experiment: *mut ReszoExperiment) {
    if !experiment.is_null() {
        drop(Box::from_raw(experiment));
    }
}

/// Run every trial. Divergent trials are counted in the result; the call
/// fails only when all trials diverge.
///
/// # Safety
/// `experiment` must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn reszo_experiment_run(
    experiment: *const ReszoExperiment,
    out: *mut *mut ReszoResult,
) -> ReszoStatus {
    guard(|| {
        non_null(out, "out")?;
        let e = experiment
            .as_ref()
            .ok_or_else(|| failure(ReszoStatus::NullArgument, "experiment is null"))?;
        let inner = run_experiment(&e.config)?;
        out.write(Box::into_raw(Box::new(ReszoResult { inner })));
        Ok(())
    })
}

/// Number of points on the aggregated curve; 0 for NULL.
///
/// # Safety
/// `result` must be NULL or valid.
#[no_mangle]
pub unsafe extern "C" fn reszo_result_curve_len(result: *const ReszoResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.curve.len())
}

/// Copy the aggregated curve. Each non-NULL array must hold `capacity`
/// elements; `capacity` must be at least the curve length.
///
/// # Safety
/// `result` must be valid; every non-NULL array must be writable for
/// `capacity` elements.
#[no_mangle]
pub unsafe extern "C" fn reszo_result_copy_curve(
    result: *const ReszoResult,
    queries: *mut u64,
    mean_gap: *mut f64,
    ci_low: *mut f64,
    ci_high: *mut f64,
    capacity: usize,
) -> ReszoStatus {
    guard(|| {
        let curve = &result_ref(result)?.inner.curve;
        let n = curve.len();
        if capacity < n {
            return Err(failure(
                ReszoStatus::InvalidArgument,
                format!("capacity {capacity} is below the curve length {n}"),
            ));
        }
        if !queries.is_null() {
            ptr::copy_nonoverlapping(curve.queries.as_ptr(), queries, n);
        }
        for (src, dst) in [
            (&curve.mean_gap, mean_gap),
            (&curve.ci_low, ci_low),
            (&curve.ci_high, ci_high),
        ] {
            if !dst.is_null() {
                ptr::copy_nonoverlapping(src.as_ptr(), dst, n);
            }
        }
        Ok(())
    })
}

/// Mean optimality gap at the end of the curve, and the number of trials
/// that diverged. Either output may be NULL.
///
/// # Safety
/// `result` must be valid; non-NULL outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn reszo_result_final_gap(
    result: *const ReszoResult,
    gap_out: *mut f64,
    diverged_out: *mut usize,
) -> ReszoStatus {
    guard(|| {
        let curve = &result_ref(result)?.inner.curve;
        if !gap_out.is_null() {
            gap_out.write(curve.final_mean());
        }
        if !diverged_out.is_null() {
            diverged_out.write(curve.diverged);
        }
        Ok(())
    })
}

/// Write curve, per-trial and manifest files into `dir`.
///
/// # Safety
/// `result` must be valid; `dir` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn reszo_result_export(result: *const ReszoResult, dir: *const c_char) -> ReszoStatus {
    guard(|| {
        let r = result_ref(result)?;
        let dir = PathBuf::from(c_str(dir, "dir")?);
        export_results(&r.inner, &dir)?;
        Ok(())
    })
}

/// # Safety
/// `result` must be NULL or come from this library; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn reszo_result_free(result: *mut ReszoResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}
