//! C interface to `luconc`.
//!
//! Every fallible function returns a [`LuconcStatus`] and writes its result
//! through an out-pointer. On failure the message is available from
//! [`luconc_last_error_message`] on the same thread. Objects handed out as
//! pointers are opaque and must be released with the matching `_free`
//! function; strings returned by this library are released with
//! [`luconc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use luconc::dataset::{Dataset, LabelSet, PointFormat, PointSet, SoftLabelSet};
use luconc::geometry::{Metric, Region};
use luconc::search::{SearchOptions, SearchParams, Searcher};
use luconc::{gaussmix, normal, pipeline, uncertainty, Error};

/// Result codes. Values 2 to 6 match the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LuconcStatus {
    Ok = 0,
    /// Null pointer, bad enum value or invalid UTF-8 argument.
    InvalidArgument = 1,
    Config = 2,
    Io = 3,
    Format = 4,
    Infeasible = 5,
    /// Domain, dimension, empty-region or convergence failure.
    Numeric = 6,
    /// A Rust panic was caught at the boundary.
    Internal = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LuconcMetric {
    L2 = 0,
    Linf = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct LuconcSearchParams {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
    /// Number of balls (T).
    pub balls: usize,
    pub metric: LuconcMetric,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct LuconcEvaluation {
    pub risk: f64,
    pub adv_risk: f64,
    /// NaN when no evaluated point falls in the region or there are no soft labels.
    pub region_lu: f64,
}

/// Loaded or constructed dataset.
pub struct LuconcDataset {
    inner: Dataset,
}

/// Union of balls produced by a search.
pub struct LuconcRegion {
    inner: Region,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(LuconcStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e.exit_code() {
            2 => LuconcStatus::Config,
            3 => LuconcStatus::Io,
            4 => LuconcStatus::Format,
            5 => LuconcStatus::Infeasible,
            _ => LuconcStatus::Numeric,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(LuconcStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LuconcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            LuconcStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal error");
            LuconcStatus::Internal
        }
    }
}

unsafe fn path_arg(p: *const c_char, what: &str) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(invalid(format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(PathBuf::from)
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| invalid(format!("{what} is null")))
}

unsafe fn dataset_ref<'a>(d: *const LuconcDataset) -> Result<&'a Dataset, Failure> {
    d.as_ref()
        .map(|d| &d.inner)
        .ok_or_else(|| invalid("dataset is null"))
}

unsafe fn region_ref<'a>(r: *const LuconcRegion) -> Result<&'a Region, Failure> {
    r.as_ref()
        .map(|r| &r.inner)
        .ok_or_else(|| invalid("region is null"))
}

fn metric(m: LuconcMetric) -> Metric {
    match m {
        LuconcMetric::L2 => Metric::L2,
        LuconcMetric::Linf => Metric::Linf,
    }
}

unsafe fn params_arg(p: *const LuconcSearchParams) -> Result<SearchParams, Failure> {
    let p = p.as_ref().ok_or_else(|| invalid("params is null"))?;
    // read the enum as an integer first so a bad value is an error, not UB
    let raw = ptr::addr_of!(p.metric).cast::<u32>().read();
    let metric = match raw {
        0 => Metric::L2,
        1 => Metric::Linf,
        other => return Err(invalid(format!("unknown metric {other}"))),
    };
    Ok(SearchParams {
        alpha: p.alpha,
        gamma: p.gamma,
        epsilon: p.epsilon,
        balls: p.balls,
        metric,
    })
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).expect("JSON has no NUL bytes").into_raw()
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn luconc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Loads a dataset. `points_path` ending in `.csv` is read as CSV, anything
/// else as the binary point format. `soft_path` may be null.
///
/// # Safety
/// Path arguments must be null or NUL-terminated strings; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn luconc_dataset_load(
    points_path: *const c_char,
    labels_path: *const c_char,
    soft_path: *const c_char,
    out: *mut *mut LuconcDataset,
) -> LuconcStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let points = path_arg(points_path, "points_path")?;
        let labels = path_arg(labels_path, "labels_path")?;
        let soft = if soft_path.is_null() {
            None
        } else {
            Some(path_arg(soft_path, "soft_path")?)
        };
        let d = Dataset::load(
            &points,
            PointFormat::from_path(&points),
            &labels,
            soft.as_deref(),
        )?;
        *out = Box::into_raw(Box::new(LuconcDataset { inner: d }));
        Ok(())
    })
}

/// Builds a dataset from row-major `coords` (`m * n`), `labels` (`m`,
/// each below `k`) and optional row-major `soft` (`m * k`, may be null).
/// Ids are `"0"` to `"m-1"`.
///
/// # Safety
/// Non-null arrays must hold the stated number of elements.
#[no_mangle]
pub unsafe extern "C" fn luconc_dataset_from_arrays(
    m: usize,
    n: usize,
    coords: *const f32,
    labels: *const u32,
    k: usize,
    soft: *const f64,
    out: *mut *mut LuconcDataset,
) -> LuconcStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if coords.is_null() || labels.is_null() {
            return Err(invalid("coords and labels must not be null"));
        }
        let len = m.checked_mul(n).ok_or_else(|| invalid("m * n overflows"))?;
        let points = PointSet::new(m, n, std::slice::from_raw_parts(coords, len).to_vec())?;
        let labels = LabelSet::new(std::slice::from_raw_parts(labels, m).to_vec(), k)?;
        let soft = if soft.is_null() {
            None
        } else {
            let len = m.checked_mul(k).ok_or_else(|| invalid("m * k overflows"))?;
            Some(SoftLabelSet::new(
                k,
                std::slice::from_raw_parts(soft, len).to_vec(),
            )?)
        };
        let d = Dataset::with_index_ids(points, labels, soft)?;
        *out = Box::into_raw(Box::new(LuconcDataset { inner: d }));
        Ok(())
    })
}

/// # Safety
/// `d` must be null or a pointer from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn luconc_dataset_free(d: *mut LuconcDataset) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Number of examples, or 0 for a null handle.
///
/// # Safety
/// `d` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn luconc_dataset_len(d: *const LuconcDataset) -> usize {
    d.as_ref().map_or(0, |d| d.inner.len())
}

/// Point dimension, or 0 for a null handle.
///
/// # Safety
/// `d` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn luconc_dataset_dim(d: *const LuconcDataset) -> usize {
    d.as_ref().map_or(0, |d| d.inner.dim())
}

/// Label uncertainty of one example with soft label `soft_row` (`k` entries).
///
/// # Safety
/// `soft_row` must hold `k` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn luconc_example_lu(
    soft_row: *const f64,
    k: usize,
    label: usize,
    out: *mut f64,
) -> LuconcStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if soft_row.is_null() {
            return Err(invalid("soft_row is null"));
        }
        *out = uncertainty::example_lu(std::slice::from_raw_parts(soft_row, k), label)?.value();
        Ok(())
    })
}

/// Mean label uncertainty over `members` (indices into `d`).
///
/// # Safety
/// `members` must hold `count` indices; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn luconc_region_lu(
    d: *const LuconcDataset,
    members: *const usize,
    count: usize,
    out: *mut f64,
) -> LuconcStatus {
    guard(|| {
        let d = dataset_ref(d)?;
        let out = out_ptr(out, "out")?;
        let members = if count == 0 {
            &[][..]
        } else if members.is_null() {
            return Err(invalid("members is null"));
        } else {
            std::slice::from_raw_parts(members, count)
        };
        if let Some(&i) = members.iter().find(|&&i| i >= d.len()) {
            return Err(invalid(format!("member {i} out of range")));
        }
        *out = uncertainty::region_lu(d, members)?.value();
        Ok(())
    })
}

/// Runs the greedy search on `train`. `mem_cap_bytes` of 0 selects the
/// default distance-cache budget.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn luconc_search_run(
    train: *const LuconcDataset,
    params: *const LuconcSearchParams,
    mem_cap_bytes: usize,
    out: *mut *mut LuconcRegion,
) -> LuconcStatus {
    guard(|| {
        let d = dataset_ref(train)?;
        let params = params_arg(params)?;
        let out = out_ptr(out, "out")?;
        let options = SearchOptions {
            mem_cap_bytes: (mem_cap_bytes > 0).then_some(mem_cap_bytes),
        };
        let outcome = Searcher::new(d, params, options)?.run()?;
        *out = Box::into_raw(Box::new(LuconcRegion {
            inner: outcome.region,
        }));
        Ok(())
    })
}

/// # Safety
/// `r` must be null or a live region handle.
#[no_mangle]
pub unsafe extern "C" fn luconc_region_free(r: *mut LuconcRegion) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// # Safety
/// `r` must be null or a live region handle.
#[no_mangle]
pub unsafe extern "C" fn luconc_region_ball_count(r: *const LuconcRegion) -> usize {
    r.as_ref().map_or(0, |r| r.inner.balls.len())
}

/// Center index (into the training set) and radius of ball `i`.
///
/// # Safety
/// `r` must be a live region handle; out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn luconc_region_ball(
    r: *const LuconcRegion,
    i: usize,
    center_index: *mut usize,
    radius: *mut f64,
) -> LuconcStatus {
    guard(|| {
        let r = region_ref(r)?;
        let ball = r
            .balls
            .get(i)
            .ok_or_else(|| invalid(format!("ball {i} out of range")))?;
        *out_ptr(center_index, "center_index")? = ball.center_index;
        *out_ptr(radius, "radius")? = ball.radius;
        Ok(())
    })
}

/// Region as JSON; free the string with `luconc_string_free`.
///
/// # Safety
/// `r` must be a live region handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn luconc_region_to_json(
    r: *const LuconcRegion,
    out: *mut *mut c_char,
) -> LuconcStatus {
    guard(|| {
        let r = region_ref(r)?;
        let out = out_ptr(out, "out")?;
        *out = into_c_string(serde_json::to_string(&r.to_spec()).map_err(Error::from)?);
        Ok(())
    })
}

/// Risk and expansion measure of `region` on `eval`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn luconc_evaluate_region(
    region: *const LuconcRegion,
    eval: *const LuconcDataset,
    epsilon: f64,
    out: *mut LuconcEvaluation,
) -> LuconcStatus {
    guard(|| {
        let r = region_ref(region)?;
        let d = dataset_ref(eval)?;
        let out = out_ptr(out, "out")?;
        let e = pipeline::evaluate_region(r, d, epsilon)?;
        *out = LuconcEvaluation {
            risk: e.risk,
            adv_risk: e.adv_risk,
            region_lu: e.region_lu.unwrap_or(f64::NAN),
        };
        Ok(())
    })
}

/// Split, search and evaluate `n_trials` times with seeds `base_seed + i`;
/// writes the summary report as JSON.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn luconc_repeated_trials_json(
    d: *const LuconcDataset,
    params: *const LuconcSearchParams,
    n_trials: usize,
    base_seed: u64,
    out: *mut *mut c_char,
) -> LuconcStatus {
    guard(|| {
        let d = dataset_ref(d)?;
        let params = params_arg(params)?;
        let out = out_ptr(out, "out")?;
        let report =
            pipeline::repeated_trials(d, params, n_trials, base_seed, SearchOptions::default())?;
        *out = into_c_string(serde_json::to_string(&report).map_err(Error::from)?);
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn luconc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// `Phi(Phi^-1(alpha) + epsilon_std)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn luconc_gaussian_expansion(
    alpha: f64,
    epsilon_std: f64,
    out: *mut f64,
) -> LuconcStatus {
    guard(|| {
        *out_ptr(out, "out")? = gaussmix::gaussian_expansion(alpha, epsilon_std)?;
        Ok(())
    })
}

/// Optimal l2 concentration of the mixture `N(-theta, sigma^2 I)/2 + N(theta, sigma^2 I)/2`.
///
/// # Safety
/// `theta` must hold `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn luconc_analytic_concentration(
    theta: *const f64,
    n: usize,
    sigma: f64,
    alpha: f64,
    epsilon: f64,
    out: *mut f64,
) -> LuconcStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if theta.is_null() {
            return Err(invalid("theta is null"));
        }
        let model =
            gaussmix::GaussMixModel::new(std::slice::from_raw_parts(theta, n).to_vec(), sigma)?;
        *out = gaussmix::analytic_concentration(&model, alpha, epsilon)?;
        Ok(())
    })
}

/// Standard normal CDF.
#[no_mangle]
pub extern "C" fn luconc_normal_cdf(x: f64) -> f64 {
    normal::cdf(x)
}

/// Standard normal quantile; NaN outside `[0, 1]`.
#[no_mangle]
pub extern "C" fn luconc_normal_quantile(p: f64) -> f64 {
    normal::quantile(p)
}

/// Metric name for diagnostics (`"l2"` or `"linf"`); static storage.
#[no_mangle]
pub extern "C" fn luconc_metric_name(m: LuconcMetric) -> *const c_char {
    match metric(m) {
        Metric::L2 => c"l2".as_ptr(),
        Metric::Linf => c"linf".as_ptr(),
    }
}
