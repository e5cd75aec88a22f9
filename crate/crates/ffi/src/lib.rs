//! C interface for fitting, persisting, and applying anomaly detection
//! models over multivariate time series.
//!
//! Every function is safe to call from any thread. Fallible calls return a
//! [`FcmwdtwStatus`]; on failure a human-readable message is stored per
//! thread and stays valid until that thread's next failing call. Series
//! values are passed row-major: observation t, dimension d lives at index
//! `t * dims + d`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ndarray::Array2;

use fcmwdtw::detector::score_series;
use fcmwdtw::{
    fit_series, pr_auc, roc_auc, wdtw_distance, Aggregation, DimensionWeights, Error, FcmModel,
    MultivariateSeries, RunConfig,
};

/// Outcome of a call. Anything other than `Ok` leaves a message readable
/// through `fcmwdtw_last_error`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FcmwdtwStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidString = 2,
    /// The inputs were rejected (bad shapes, hyperparameters, labels, ...).
    InvalidInput = 3,
    /// Reading or writing a file failed.
    IoFailure = 4,
    /// An internal invariant broke; the library state is still usable.
    Internal = 5,
}

/// How per-window scores are folded into per-observation scores.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FcmwdtwAggregation {
    /// Average over every window covering the observation.
    Mean = 0,
    /// Maximum over every window covering the observation.
    Max = 1,
}

/// Fit settings. Fill with `fcmwdtw_fit_options_default` first, then adjust.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FcmwdtwFitOptions {
    /// Sliding window length a (at least 2).
    pub window_length: usize,
    /// Step between consecutive window starts (at least 1).
    pub stride: usize,
    /// Cluster count c (at least 2).
    pub clusters: usize,
    /// Fuzzy coefficient m in (1, 2].
    pub fuzziness: f64,
    /// Dimension weight exponent q, below 0 or above 1.
    pub weight_exponent: f64,
    /// Relative loss improvement that counts as converged.
    pub epsilon: f64,
    /// Iteration cap.
    pub max_iters: usize,
    /// Seed for the density peak initialization.
    pub seed: u64,
    /// Rescale each dimension to [0, 1] before windowing; the model
    /// remembers the transform and applies it when scoring.
    pub normalize: bool,
}

/// Shape and fit summary of a model.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FcmwdtwModelInfo {
    pub clusters: usize,
    pub dims: usize,
    pub window_length: usize,
    pub center_length: usize,
    pub stride: usize,
    pub fuzziness: f64,
    pub weight_exponent: f64,
    pub final_loss: f64,
    pub iterations: usize,
}

/// Opaque fitted model. Create with `fcmwdtw_fit` or `fcmwdtw_model_load`,
/// release with `fcmwdtw_model_free`.
pub struct FcmwdtwModel {
    inner: FcmModel,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: String) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn fail(status: FcmwdtwStatus, message: String) -> FcmwdtwStatus {
    set_error(message);
    status
}

fn fail_with(error: Error) -> FcmwdtwStatus {
    let status = match error {
        Error::Io(_) | Error::Csv(_) => FcmwdtwStatus::IoFailure,
        _ => FcmwdtwStatus::InvalidInput,
    };
    fail(status, error.to_string())
}

/// Run a fallible body behind a panic guard so unwinding never crosses the
/// language boundary.
fn guarded(body: impl FnOnce() -> FcmwdtwStatus) -> FcmwdtwStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unexpected panic".to_string());
            fail(FcmwdtwStatus::Internal, message)
        }
    }
}

/// # Safety
/// `values` must point to `observations * dims` doubles.
unsafe fn series_from_raw(
    values: *const f64,
    observations: usize,
    dims: usize,
) -> Result<MultivariateSeries, Error> {
    let len = observations
        .checked_mul(dims)
        .ok_or(Error::EmptyInput("series size overflows"))?;
    let slice = std::slice::from_raw_parts(values, len);
    let array = Array2::from_shape_vec((observations, dims), slice.to_vec())
        .map_err(|e| Error::Config(e.to_string()))?;
    MultivariateSeries::new(array, None, None)
}

unsafe fn str_from_raw<'a>(pointer: *const c_char) -> Result<&'a str, FcmwdtwStatus> {
    if pointer.is_null() {
        return Err(FcmwdtwStatus::NullArgument);
    }
    CStr::from_ptr(pointer)
        .to_str()
        .map_err(|_| FcmwdtwStatus::InvalidString)
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn fcmwdtw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message describing this thread's most recent failure. Never null; empty
/// before the first failure. Valid until the next failing call on the same
/// thread.
#[no_mangle]
pub extern "C" fn fcmwdtw_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Write the default fit settings into `options`.
#[no_mangle]
pub unsafe extern "C" fn fcmwdtw_fit_options_default(
    options: *mut FcmwdtwFitOptions,
) -> FcmwdtwStatus {
    guarded(|| {
        if options.is_null() {
            return fail(FcmwdtwStatus::NullArgument, "options is null".to_string());
        }
        let defaults = RunConfig::default();
        options.write(FcmwdtwFitOptions {
            window_length: defaults.window_length,
            stride: defaults.stride,
            clusters: defaults.clusters,
            fuzziness: defaults.fuzziness,
            weight_exponent: defaults.weight_exponent,
            epsilon: defaults.epsilon,
            max_iters: defaults.max_iters,
            seed: defaults.seed,
            normalize: defaults.normalize,
        });
        FcmwdtwStatus::Ok
    })
}

/// Fit a model on a row-major series of `observations` x `dims` values and
/// store the new handle in `out_model`.
#[no_mangle]
pub unsafe extern "C" fn fcmwdtw_fit(
    values: *const f64,
    observations: usize,
    dims: usize,
    options: *const FcmwdtwFitOptions,
    out_model: *mut *mut FcmwdtwModel,
) -> FcmwdtwStatus {
    guarded(|| {
        if values.is_null() || options.is_null() || out_model.is_null() {
            return fail(
                FcmwdtwStatus::NullArgument,
                "values, options, and out_model must be non-null".to_string(),
            );
        }
        let opts = options.read();
        let config = RunConfig {
            window_length: opts.window_length,
            stride: opts.stride,
            clusters: opts.clusters,
            fuzziness: opts.fuzziness,
            weight_exponent: opts.weight_exponent,
            epsilon: opts.epsilon,
            max_iters: opts.max_iters,
            seed: opts.seed,
            normalize: opts.normalize,
            ..RunConfig::default()
        };
        let series = match series_from_raw(values, observations, dims) {
            Ok(series) => series,
            Err(error) => return fail_with(error),
        };
        match fit_series(&series, &config, &config.params(), opts.seed) {
            Ok((model, _)) => {
                out_model.write(Box::into_raw(Box::new(FcmwdtwModel { inner: model })));
                FcmwdtwStatus::Ok
            }
            Err(error) => fail_with(error),
        }
    })
}

/// Save a model as JSON.
#[no_mangle]
pub unsafe extern "C" fn fcmwdtw_model_save(
    model: *const FcmwdtwModel,
    path: *const c_char,
) -> FcmwdtwStatus {
    guarded(|| {
        if model.is_null() {
            return fail(FcmwdtwStatus::NullArgument, "model is null".to_string());
        }
        let path = match str_from_raw(path) {
            Ok(path) => path,
            Err(status) => return fail(status, "path is not a valid string".to_string()),
        };
        match (*model).inner.save(std::path::Path::new(path)) {
            Ok(()) => FcmwdtwStatus::Ok,
            Err(error) => fail_with(error),
        }
    })
}

/// Load a model saved by `fcmwdtw_model_save` and store the new handle in
/// `out_model`.
#[no_mangle]
pub unsafe extern "C" fn fcmwdtw_model_load(
    path: *const c_char,
    out_model: *mut *mut FcmwdtwModel,
) -> FcmwdtwStatus {
    guarded(|| {
        if out_model.is_null() {
            return fail(FcmwdtwStatus::NullArgument, "out_model is null".to_string());
        }
        let path = match str_from_raw(path) {
            Ok(path) => path,
            Err(status) => return fail(status, "path is not a valid string".to_string()),
        };
        match FcmModel::load(std::path::Path::new(path)) {
            Ok(model) => {
                out_model.write(Box::into_raw(Box::new(FcmwdtwModel { inner: model })));
                FcmwdtwStatus::Ok
            }
            Err(error) => fail_with(error),
        }
    })
}

/// Release a model handle. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn fcmwdtw_model_free(model: *mut FcmwdtwModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Describe a model's shape and fit summary.
#[no_mangle]
pub unsafe extern "C" fn fcmwdtw_model_info(
    model: *const FcmwdtwModel,
    out_info: *mut FcmwdtwModelInfo,
) -> FcmwdtwStatus {
    guarded(|| {
        if model.is_null() || out_info.is_null() {
            return fail(
                FcmwdtwStatus::NullArgument,
                "model and out_info must be non-null".to_string(),
            );
        }
        let inner = &(*model).inner;
        out_info.write(FcmwdtwModelInfo {
            clusters: inner.clusters,
            dims: inner.dims,
            window_length: inner.window_length,
            center_length: inner.center_length,
            stride: inner.stride,
            fuzziness: inner.fuzziness,
            weight_exponent: inner.weight_exponent,
            final_loss: inner.final_loss,
            iterations: inner.iterations,
        });
        FcmwdtwStatus::Ok
    })
}

/// Score a row-major series of `observations` x `dims` values. Writes one
/// score per observation into `out_scores` (length `observations`); spots no
/// window covers become NaN.
#[no_mangle]
pub unsafe extern "C" fn fcmwdtw_score_series(
    model: *const FcmwdtwModel,
    values: *const f64,
    observations: usize,
    dims: usize,
    aggregation: FcmwdtwAggregation,
    out_scores: *mut f64,
) -> FcmwdtwStatus {
    guarded(|| {
        if model.is_null() || values.is_null() || out_scores.is_null() {
            return fail(
                FcmwdtwStatus::NullArgument,
                "model, values, and out_scores must be non-null".to_string(),
            );
        }
        let series = match series_from_raw(values, observations, dims) {
            Ok(series) => series,
            Err(error) => return fail_with(error),
        };
        let aggregation = match aggregation {
            FcmwdtwAggregation::Mean => Aggregation::Mean,
            FcmwdtwAggregation::Max => Aggregation::Max,
        };
        match score_series(&(*model).inner, &series, aggregation) {
            Ok(scored) => {
                for (t, score) in scored.scores.iter().enumerate() {
                    out_scores.add(t).write(score.unwrap_or(f64::NAN));
                }
                FcmwdtwStatus::Ok
            }
            Err(error) => fail_with(error),
        }
    })
}

/// Locally weighted warping distance between two row-major samples with
/// `dims` columns. `lambdas` may be null for uniform weights; otherwise it
/// must hold `dims` values on the probability simplex.
#[no_mangle]
pub unsafe extern "C" fn fcmwdtw_distance(
    x: *const f64,
    x_len: usize,
    y: *const f64,
    y_len: usize,
    dims: usize,
    lambdas: *const f64,
    weight_exponent: f64,
    out_distance: *mut f64,
) -> FcmwdtwStatus {
    guarded(|| {
        if x.is_null() || y.is_null() || out_distance.is_null() {
            return fail(
                FcmwdtwStatus::NullArgument,
                "x, y, and out_distance must be non-null".to_string(),
            );
        }
        let weights = if lambdas.is_null() {
            DimensionWeights::uniform(dims, weight_exponent)
        } else {
            let slice = std::slice::from_raw_parts(lambdas, dims);
            DimensionWeights::new(slice.to_vec(), weight_exponent)
        };
        let weights = match weights {
            Ok(weights) => weights,
            Err(error) => return fail_with(error),
        };
        let build = |pointer: *const f64, rows: usize| {
            let len = rows.checked_mul(dims)?;
            let slice = std::slice::from_raw_parts(pointer, len);
            Array2::from_shape_vec((rows, dims), slice.to_vec()).ok()
        };
        let (Some(xs), Some(ys)) = (build(x, x_len), build(y, y_len)) else {
            return fail(
                FcmwdtwStatus::InvalidInput,
                "sample size overflows".to_string(),
            );
        };
        match wdtw_distance(xs.view(), ys.view(), &weights) {
            Ok((distance, _)) => {
                out_distance.write(distance);
                FcmwdtwStatus::Ok
            }
            Err(error) => fail_with(error),
        }
    })
}

unsafe fn area_metric(
    scores: *const f64,
    labels: *const u8,
    len: usize,
    out_area: *mut f64,
    metric: fn(&[f64], &[u8]) -> Result<f64, Error>,
) -> FcmwdtwStatus {
    if scores.is_null() || labels.is_null() || out_area.is_null() {
        return fail(
            FcmwdtwStatus::NullArgument,
            "scores, labels, and out_area must be non-null".to_string(),
        );
    }
    let scores = std::slice::from_raw_parts(scores, len);
    let labels = std::slice::from_raw_parts(labels, len);
    match metric(scores, labels) {
        Ok(area) => {
            out_area.write(area);
            FcmwdtwStatus::Ok
        }
        Err(error) => fail_with(error),
    }
}

/// Area under the ROC curve for `len` scored observations with 0/1 labels.
#[no_mangle]
pub unsafe extern "C" fn fcmwdtw_roc_auc(
    scores: *const f64,
    labels: *const u8,
    len: usize,
    out_area: *mut f64,
) -> FcmwdtwStatus {
    guarded(|| area_metric(scores, labels, len, out_area, roc_auc))
}

/// Area under the precision-recall curve for `len` scored observations with
/// 0/1 labels.
#[no_mangle]
pub unsafe extern "C" fn fcmwdtw_pr_auc(
    scores: *const f64,
    labels: *const u8,
    len: usize,
    out_area: *mut f64,
) -> FcmwdtwStatus {
    guarded(|| area_metric(scores, labels, len, out_area, pr_auc))
}
