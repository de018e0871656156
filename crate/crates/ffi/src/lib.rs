//! C interface to `trk-core`.
//!
//! Every function returns a [`TrkStatus`]. On failure the message of the most
//! recent error on the calling thread is available from
//! [`trk_last_error_message`]. Datasets and models are opaque handles owned by
//! the caller and released with their `_free` functions. Matrices are passed
//! row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use trk_core::benchmarks::eval_benchmark;
use trk_core::model::{Dataset, FittedModel, RegressionBasis};
use trk_core::nalgebra::{DMatrix, DVector};
use trk_core::objective::{PenaltyKind, PenaltySpec};
use trk_core::optimizer::{fit_trk, FitOptions};
use trk_core::runner::{load_model, save_model};
use trk_core::sampling::lhs;
use trk_core::TrkError;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    DuplicatePoints = 4,
    NumericalFailure = 5,
    FitFailed = 6,
    TuningFailed = 7,
    SingularConfiguration = 8,
    VersionMismatch = 9,
    Deserialization = 10,
    UnknownBenchmark = 11,
    Io = 12,
    Panic = 13,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrkBasis {
    Constant = 0,
    Linear = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrkPenalty {
    None = 0,
    Lasso = 1,
    Ridge = 2,
    ElasticNet = 3,
}

/// Optimizer settings. `theta_init` is broadcast to every dimension.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrkFitOptions {
    pub theta_init: f64,
    pub theta_lower: f64,
    pub theta_upper: f64,
    pub max_iters: usize,
    pub epsilon: f64,
}

/// Training data.
pub struct TrkDataset(Dataset);

/// A fitted predictor.
pub struct TrkModel(FittedModel);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &TrkError) -> TrkStatus {
    match e {
        TrkError::InvalidArgument(_) | TrkError::UnderdeterminedBasis { .. } => TrkStatus::InvalidArgument,
        TrkError::DimensionMismatch { .. } => TrkStatus::DimensionMismatch,
        TrkError::DuplicatePoints { .. } => TrkStatus::DuplicatePoints,
        TrkError::IllConditionedCorrelation { .. } | TrkError::SingularRegression { .. } => TrkStatus::NumericalFailure,
        TrkError::FitFailed(_) => TrkStatus::FitFailed,
        TrkError::TuningFailed => TrkStatus::TuningFailed,
        TrkError::SingularConfiguration(_) => TrkStatus::SingularConfiguration,
        TrkError::VersionMismatch { .. } => TrkStatus::VersionMismatch,
        TrkError::Deserialization(_) => TrkStatus::Deserialization,
        TrkError::UnknownBenchmark(_) => TrkStatus::UnknownBenchmark,
        TrkError::Io(_) | TrkError::Csv(_) => TrkStatus::Io,
    }
}

struct Failure(TrkStatus, String);

impl From<TrkError> for Failure {
    fn from(e: TrkError) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(TrkStatus::NullPointer, format!("`{what}` is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TrkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            TrkStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            TrkStatus::Panic
        }
    }
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn trk_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn trk_fit_options_default() -> TrkFitOptions {
    let d = FitOptions::default();
    TrkFitOptions {
        theta_init: d.theta_init[0],
        theta_lower: d.theta_bounds.0,
        theta_upper: d.theta_bounds.1,
        max_iters: d.max_iters,
        epsilon: d.epsilon,
    }
}

/// Copies `n x d` inputs `x` and `n` responses `y` into a new dataset.
///
/// # Safety
/// `x` must point to `n * d` doubles, `y` to `n` doubles and `out` to
/// writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn trk_dataset_new(
    x: *const f64,
    n: usize,
    d: usize,
    y: *const f64,
    out: *mut *mut TrkDataset,
) -> TrkStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let len = n.checked_mul(d).ok_or_else(|| Failure(TrkStatus::InvalidArgument, "n * d overflows".into()))?;
        let xs = slice(x, len, "x")?;
        let ys = slice(y, n, "y")?;
        let data = Dataset::new(DMatrix::from_row_slice(n, d, xs), DVector::from_column_slice(ys))?;
        *out = Box::into_raw(Box::new(TrkDataset(data)));
        Ok(())
    })
}

/// # Safety
/// `dataset` must be null or a handle from `trk_dataset_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn trk_dataset_free(dataset: *mut TrkDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Fits a model. `coefficient` is the penalty weight of `penalty`; `alpha` is
/// used by the elastic net only. `options` may be null for the defaults.
///
/// # Safety
/// `dataset` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn trk_fit(
    dataset: *const TrkDataset,
    basis: TrkBasis,
    penalty: TrkPenalty,
    coefficient: f64,
    alpha: f64,
    options: *const TrkFitOptions,
    out: *mut *mut TrkModel,
) -> TrkStatus {
    guard(|| {
        let data = &handle(dataset, "dataset")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        let basis = match basis {
            TrkBasis::Constant => RegressionBasis::Constant,
            TrkBasis::Linear => RegressionBasis::Linear,
        };
        let kind = match penalty {
            TrkPenalty::None => PenaltyKind::None,
            TrkPenalty::Lasso => PenaltyKind::Lasso,
            TrkPenalty::Ridge => PenaltyKind::Ridge,
            TrkPenalty::ElasticNet => PenaltyKind::ElasticNet,
        };
        let mut opts = FitOptions::default();
        if let Some(o) = options.as_ref() {
            opts.theta_init = vec![o.theta_init];
            opts.theta_bounds = (o.theta_lower, o.theta_upper);
            opts.max_iters = o.max_iters;
            opts.epsilon = o.epsilon;
        }
        let fit = fit_trk(data, basis, &PenaltySpec::from_kind(kind, coefficient, alpha), &opts)?;
        *out = Box::into_raw(Box::new(TrkModel(fit.model)));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a live model handle.
#[no_mangle]
pub unsafe extern "C" fn trk_model_free(model: *mut TrkModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Input dimension of `model`, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live model handle.
#[no_mangle]
pub unsafe extern "C" fn trk_model_dim(model: *const TrkModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.dim())
}

/// Copies the fitted `theta` (normalized input space) into `out[0..d]`.
///
/// # Safety
/// `model` must be live and `out` must hold `d` doubles.
#[no_mangle]
pub unsafe extern "C" fn trk_model_theta(model: *const TrkModel, out: *mut f64, d: usize) -> TrkStatus {
    guard(|| {
        let m = &handle(model, "model")?.0;
        let theta = m.theta().values();
        if d != theta.len() {
            return Err(TrkError::DimensionMismatch { expected: theta.len(), actual: d }.into());
        }
        if out.is_null() {
            return Err(null("out"));
        }
        std::slice::from_raw_parts_mut(out, d).copy_from_slice(theta);
        Ok(())
    })
}

/// Predicts at the `d`-vector `x`.
///
/// # Safety
/// `model` must be live, `x` must hold `d` doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn trk_model_predict(model: *const TrkModel, x: *const f64, d: usize, out: *mut f64) -> TrkStatus {
    guard(|| {
        let m = &handle(model, "model")?.0;
        let xs = slice(x, d, "x")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = m.predict(xs)?;
        Ok(())
    })
}

/// Predictive mean squared error at the `d`-vector `x`.
///
/// # Safety
/// As for [`trk_model_predict`].
#[no_mangle]
pub unsafe extern "C" fn trk_model_predict_mse(model: *const TrkModel, x: *const f64, d: usize, out: *mut f64) -> TrkStatus {
    guard(|| {
        let m = &handle(model, "model")?.0;
        let xs = slice(x, d, "x")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = m.predict_mse(xs)?;
        Ok(())
    })
}

/// Serializes `model` to a JSON document; release it with `trk_string_free`.
///
/// # Safety
/// `model` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn trk_model_to_json(model: *const TrkModel, out: *mut *mut c_char) -> TrkStatus {
    guard(|| {
        let m = &handle(model, "model")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CString::new(save_model(m)?).map_err(|e| Failure(TrkStatus::InvalidArgument, e.to_string()))?;
        *out = text.into_raw();
        Ok(())
    })
}

/// Parses a document produced by `trk_model_to_json`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn trk_model_from_json(json: *const c_char, out: *mut *mut TrkModel) -> TrkStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Failure(TrkStatus::Deserialization, e.to_string()))?;
        *out = Box::into_raw(Box::new(TrkModel(load_model(text)?)));
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn trk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Evaluates the registered benchmark `name` at the `d`-vector `x`.
///
/// # Safety
/// `name` must be NUL-terminated, `x` must hold `d` doubles and `out` be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn trk_benchmark_eval(name: *const c_char, x: *const f64, d: usize, out: *mut f64) -> TrkStatus {
    guard(|| {
        if name.is_null() {
            return Err(null("name"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let name = CStr::from_ptr(name).to_string_lossy();
        *out = eval_benchmark(&name, slice(x, d, "x")?)?;
        Ok(())
    })
}

/// Writes an `n x d` Latin Hypercube design in `[0, 1)^d` to `out`.
///
/// # Safety
/// `out` must hold `n * d` doubles.
#[no_mangle]
pub unsafe extern "C" fn trk_lhs(n: usize, d: usize, seed: u64, out: *mut f64) -> TrkStatus {
    guard(|| {
        if n == 0 || d == 0 {
            return Err(Failure(TrkStatus::InvalidArgument, "n and d must be positive".into()));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let design = lhs(n, d, seed);
        let dst = std::slice::from_raw_parts_mut(out, n * d);
        for i in 0..n {
            for k in 0..d {
                dst[i * d + k] = design[(i, k)];
            }
        }
        Ok(())
    })
}
