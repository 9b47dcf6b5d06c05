//! C ABI over the `l2cds` library.
//!
//! Every fallible function returns an [`L2cdsStatus`]; on failure a message
//! is kept per thread and can be read with [`l2cds_last_error_message`].
//! Datasets and models are opaque handles that must be released with their
//! `*_free` function. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use l2cds::dynsys::{collect_dataset, CollectOptions, SystemKind, SystemSpec, TrajectoryDataset};
use l2cds::eval::{msnn_rows, project, ProjectionPath};
use l2cds::linalg::Matrix;
use l2cds::model::CorrespondenceModel;
use l2cds::trainer::{load_model, save_model, train, Preset};
use l2cds::L2cdsError;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum L2cdsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Io = 4,
    Malformed = 5,
    Numerical = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// A collected or loaded trajectory dataset.
pub struct L2cdsDataset(TrajectoryDataset);

/// A trained or loaded correspondence model.
pub struct L2cdsModel(CorrespondenceModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nuls removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(L2cdsStatus, String);

impl From<L2cdsError> for Failure {
    fn from(e: L2cdsError) -> Self {
        let status = match &e {
            L2cdsError::InvalidArgument(_)
            | L2cdsError::Empty(_)
            | L2cdsError::IllTypedPath(_)
            | L2cdsError::DegenerateDesign(_) => L2cdsStatus::InvalidArgument,
            L2cdsError::DimensionMismatch { .. } => L2cdsStatus::DimensionMismatch,
            L2cdsError::Io { .. } => L2cdsStatus::Io,
            L2cdsError::Malformed { .. } | L2cdsError::VersionMismatch { .. } => L2cdsStatus::Malformed,
            L2cdsError::NumericalBlowup(_)
            | L2cdsError::NonFiniteLoss { .. }
            | L2cdsError::NonFiniteGradient { .. } => L2cdsStatus::Numerical,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(L2cdsStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> L2cdsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            L2cdsStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            L2cdsStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(L2cdsStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn matrix_arg(data: *const f64, rows: usize, cols: usize, what: &str) -> Result<Matrix, Failure> {
    if data.is_null() {
        return Err(null(what));
    }
    let len = rows
        .checked_mul(cols)
        .ok_or_else(|| Failure(L2cdsStatus::InvalidArgument, format!("{what} is too large")))?;
    Ok(Matrix::from_vec(rows, cols, std::slice::from_raw_parts(data, len).to_vec())?)
}

fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

/// Message describing the last failed call on this thread, or null if the
/// last call succeeded. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn l2cds_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Simulates `resets` trajectories of `horizon` steps of the named system
/// (`pendulum`, `two-link`, `wedge-left`, `wedge-right`) with default
/// parameters and noise levels.
///
/// # Safety
/// `system` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn l2cds_dataset_collect(
    system: *const c_char,
    horizon: usize,
    resets: usize,
    seed: u64,
    out: *mut *mut L2cdsDataset,
) -> L2cdsStatus {
    guard(|| {
        let kind: SystemKind = str_arg(system, "system")?.parse()?;
        let ds = collect_dataset(&SystemSpec::new(kind), CollectOptions::new(horizon, resets, seed))?;
        put(out, L2cdsDataset(ds))
    })
}

/// # Safety
/// `path` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn l2cds_dataset_load(path: *const c_char, out: *mut *mut L2cdsDataset) -> L2cdsStatus {
    guard(|| {
        let ds = TrajectoryDataset::load(str_arg(path, "path")?)?;
        put(out, L2cdsDataset(ds))
    })
}

/// # Safety
/// `dataset` must come from this library; `path` must be nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn l2cds_dataset_save(dataset: *const L2cdsDataset, path: *const c_char) -> L2cdsStatus {
    guard(|| {
        let ds = ref_arg(dataset, "dataset")?;
        Ok(ds.0.save(str_arg(path, "path")?)?)
    })
}

/// Number of transition pairs, or 0 for a null handle.
///
/// # Safety
/// `dataset` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn l2cds_dataset_len(dataset: *const L2cdsDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.0.len())
}

/// # Safety
/// `dataset` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn l2cds_dataset_state_dim(dataset: *const L2cdsDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.0.state_dim())
}

/// # Safety
/// `dataset` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn l2cds_dataset_free(dataset: *mut L2cdsDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Trains a model on two datasets with a named preset (`wedge`, `periodic`,
/// `walker-pendulum`, `walker-ostrich`). `steps == 0` keeps the preset's
/// step count.
///
/// # Safety
/// Handles must come from this library; `preset` must be nul-terminated;
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn l2cds_train(
    dataset_a: *const L2cdsDataset,
    dataset_b: *const L2cdsDataset,
    preset: *const c_char,
    steps: usize,
    seed: u64,
    out: *mut *mut L2cdsModel,
) -> L2cdsStatus {
    guard(|| {
        let a = ref_arg(dataset_a, "dataset_a")?;
        let b = ref_arg(dataset_b, "dataset_b")?;
        let mut cfg = str_arg(preset, "preset")?.parse::<Preset>()?.config();
        if steps > 0 {
            cfg.steps = steps;
        }
        cfg.seed = seed;
        let trained = train(&a.0, &b.0, &cfg)?;
        put(out, L2cdsModel(trained.model))
    })
}

/// # Safety
/// `path` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn l2cds_model_load(path: *const c_char, out: *mut *mut L2cdsModel) -> L2cdsStatus {
    guard(|| {
        let m = load_model(str_arg(path, "path")?)?;
        put(out, L2cdsModel(m))
    })
}

/// Saves the model without optimizer state.
///
/// # Safety
/// `model` must come from this library; `path` must be nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn l2cds_model_save(model: *const L2cdsModel, path: *const c_char) -> L2cdsStatus {
    guard(|| {
        let m = ref_arg(model, "model")?;
        Ok(save_model(&m.0, str_arg(path, "path")?)?)
    })
}

/// Writes the state widths of systems A and B and the latent width.
///
/// # Safety
/// `model` must come from this library; the outputs must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn l2cds_model_dims(
    model: *const L2cdsModel,
    dim_a: *mut usize,
    dim_b: *mut usize,
    latent_dim: *mut usize,
) -> L2cdsStatus {
    guard(|| {
        let m = &ref_arg(model, "model")?.0;
        if dim_a.is_null() || dim_b.is_null() || latent_dim.is_null() {
            return Err(null("output dimension"));
        }
        *dim_a = m.dim_a();
        *dim_b = m.dim_b();
        *latent_dim = m.latent_dim;
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn l2cds_model_free(model: *mut L2cdsModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Projects `rows` row-major states of width `cols` along `path` (e.g.
/// `"ALB"`). The result is written row-major to `output`, which must hold
/// `output_len` doubles; its width goes to `out_cols`. If the buffer is too
/// small nothing is written except `out_cols`, and `BufferTooSmall` is
/// returned.
///
/// # Safety
/// `input` must point to `rows * cols` doubles and `output` to `output_len`.
#[no_mangle]
pub unsafe extern "C" fn l2cds_project(
    model: *const L2cdsModel,
    path: *const c_char,
    input: *const f64,
    rows: usize,
    cols: usize,
    output: *mut f64,
    output_len: usize,
    out_cols: *mut usize,
) -> L2cdsStatus {
    guard(|| {
        let m = &ref_arg(model, "model")?.0;
        let path = ProjectionPath::parse(str_arg(path, "path")?)?;
        let x = matrix_arg(input, rows, cols, "input")?;
        if output.is_null() || out_cols.is_null() {
            return Err(null("output"));
        }
        let y = project(m, &path, &x)?;
        *out_cols = y.cols();
        let data = y.as_slice();
        if data.len() > output_len {
            return Err(Failure(
                L2cdsStatus::BufferTooSmall,
                format!("output needs {} values, buffer holds {output_len}", data.len()),
            ));
        }
        std::slice::from_raw_parts_mut(output, data.len()).copy_from_slice(data);
        Ok(())
    })
}

/// Mean symmetric nearest-neighbour distance between two row-major sets of
/// `rows` points of width `cols`.
///
/// # Safety
/// `a` and `b` must each point to `rows * cols` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn l2cds_msnn(
    a: *const f64,
    b: *const f64,
    rows: usize,
    cols: usize,
    out: *mut f64,
) -> L2cdsStatus {
    guard(|| {
        let x = matrix_arg(a, rows, cols, "a")?;
        let y = matrix_arg(b, rows, cols, "b")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = msnn_rows(&x, &y)?;
        Ok(())
    })
}
