//! C ABI over `updrs-core`: load a checkpoint, score raw feature rows, map
//! UPDRS values to severity labels.
//!
//! Every fallible call returns an [`UpdrsStatus`]. On failure a message is
//! available from [`updrs_last_error_message`] on the same thread. Models are
//! opaque handles released with [`updrs_model_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use updrs_core::checkpoint::load_checkpoint;
use updrs_core::dataset::{Score, FEATURE_COUNT};
use updrs_core::experiment::TrainedModel;
use updrs_core::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UpdrsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    FileNotFound = 3,
    Checkpoint = 4,
    Shape = 5,
    BufferTooSmall = 6,
    Io = 7,
    Runtime = 8,
    Panic = 9,
}

/// A loaded checkpoint.
pub struct UpdrsModel {
    model: TrainedModel,
    columns: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

type Failure = (UpdrsStatus, String);

fn from_core(err: Error) -> Failure {
    let status = match &err {
        Error::FileNotFound(_) => UpdrsStatus::FileNotFound,
        Error::Checkpoint(_) | Error::Json(_) | Error::MissingEncoder(_) => UpdrsStatus::Checkpoint,
        Error::Shape(_) => UpdrsStatus::Shape,
        Error::Io { .. } => UpdrsStatus::Io,
        _ => UpdrsStatus::Runtime,
    };
    (status, err.to_string())
}

fn null(what: &str) -> Failure {
    (UpdrsStatus::NullPointer, format!("`{what}` is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> UpdrsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => UpdrsStatus::Ok,
        Ok(Err((status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            UpdrsStatus::Panic
        }
    }
}

/// Message of the last failed call on this thread, or null if none.
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn updrs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn updrs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Number of raw features each input row must carry.
#[no_mangle]
pub extern "C" fn updrs_feature_count() -> usize {
    FEATURE_COUNT
}

/// Loads a JSON checkpoint. On success `*out` owns a new handle.
///
/// # Safety
/// `path` must be null or a NUL-terminated string; `out` must be null or
/// valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn updrs_model_load(
    path: *const c_char,
    out: *mut *mut UpdrsModel,
) -> UpdrsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|e| (UpdrsStatus::InvalidUtf8, format!("path is not UTF-8: {e}")))?;
        let model = load_checkpoint(path).map_err(from_core)?;
        let columns = model
            .output_columns()
            .into_iter()
            .map(|c| CString::new(c).expect("column names have no NUL"))
            .collect();
        *out = Box::into_raw(Box::new(UpdrsModel { model, columns }));
        Ok(())
    })
}

/// Releases a handle from [`updrs_model_load`]. Null is ignored.
///
/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn updrs_model_free(model: *mut UpdrsModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Raw features per input row (0 for a null handle).
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn updrs_model_input_dim(model: *const UpdrsModel) -> usize {
    model.as_ref().map_or(0, |_| FEATURE_COUNT)
}

/// Values written per input row by [`updrs_model_predict`] (0 for a null handle).
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn updrs_model_output_count(model: *const UpdrsModel) -> usize {
    model.as_ref().map_or(0, |m| m.columns.len())
}

/// Name of output column `index`, or null when out of range. Owned by the handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn updrs_model_output_name(
    model: *const UpdrsModel,
    index: usize,
) -> *const c_char {
    model
        .as_ref()
        .and_then(|m| m.columns.get(index))
        .map_or(ptr::null(), |c| c.as_ptr())
}

/// Scores `n_rows` row-major raw feature rows into `out`, which must hold
/// `n_rows * updrs_model_output_count(model)` values.
///
/// # Safety
/// `features` must point to `n_rows * updrs_feature_count()` readable values
/// and `out` to `out_len` writable values; both may be null when `n_rows` is 0.
#[no_mangle]
pub unsafe extern "C" fn updrs_model_predict(
    model: *const UpdrsModel,
    features: *const f64,
    n_rows: usize,
    out: *mut f64,
    out_len: usize,
) -> UpdrsStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        if n_rows == 0 {
            return Ok(());
        }
        if features.is_null() {
            return Err(null("features"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let needed = n_rows * model.columns.len();
        if out_len < needed {
            return Err((
                UpdrsStatus::BufferTooSmall,
                format!("output buffer holds {out_len} values, {needed} needed"),
            ));
        }
        let flat = std::slice::from_raw_parts(features, n_rows * FEATURE_COUNT);
        let rows: Vec<[f64; FEATURE_COUNT]> = flat
            .chunks_exact(FEATURE_COUNT)
            .map(|c| c.try_into().expect("exact chunk"))
            .collect();
        let predictions = model.model.predict_rows(&rows).map_err(from_core)?;
        let out = std::slice::from_raw_parts_mut(out, needed);
        for (dst, v) in out.iter_mut().zip(predictions.into_iter().flatten()) {
            *dst = v;
        }
        Ok(())
    })
}

/// Severity labels for a pair of UPDRS values (1 = severe).
///
/// # Safety
/// Both output pointers must be valid for writing one byte.
#[no_mangle]
pub unsafe extern "C" fn updrs_severity_labels(
    motor_updrs: f64,
    total_updrs: f64,
    motor_severe: *mut u8,
    total_severe: *mut u8,
) -> UpdrsStatus {
    guard(|| {
        if motor_severe.is_null() {
            return Err(null("motor_severe"));
        }
        if total_severe.is_null() {
            return Err(null("total_severe"));
        }
        *motor_severe = u8::from(Score::Motor.is_severe(motor_updrs));
        *total_severe = u8::from(Score::Total.is_severe(total_updrs));
        Ok(())
    })
}
