//! C ABI over the skillcomp library.
//!
//! Every fallible function returns an [`SkcStatus`]; on failure the message is
//! kept per thread and read back with [`skc_last_error`]. Objects cross the
//! boundary as opaque handles that the caller releases with the matching
//! `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use skillcomp::distributions::{DistributionKind, RankOrdering, SkillDistribution};
use skillcomp::experiment::{run_experiment, ExperimentConfig, RunOverrides, RunReport};
use skillcomp::generators::arithmetic::eval_arithmetic;
use skillcomp::generators::s5::{s5_compose, Perm};
use skillcomp::population::{population_gradient, population_loss};
use skillcomp::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Diverged = 3,
    Parse = 4,
    Generation = 5,
    Config = 6,
    Io = 7,
    Panic = 8,
}

/// Distribution family selector for [`skc_distribution_new`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkcDistributionKind {
    Uniform = 0,
    Zipf = 1,
    BinnedZipf = 2,
}

/// Opaque skill distribution.
pub struct SkcDistribution(SkillDistribution);

/// Opaque result of a finished experiment run.
pub struct SkcRunReport {
    report: RunReport,
    dir: CString,
    artifacts: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: SkcStatus, msg: impl Into<String>) -> SkcStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> SkcStatus {
    let status = match &e {
        Error::InvalidArgument(_) => SkcStatus::InvalidArgument,
        Error::Divergence { .. } => SkcStatus::Diverged,
        Error::Parse { .. } => SkcStatus::Parse,
        Error::Generation { .. } => SkcStatus::Generation,
        Error::Config(_) | Error::Toml(_) => SkcStatus::Config,
        Error::Io(_) | Error::Json(_) => SkcStatus::Io,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> SkcStatus) -> SkcStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(SkcStatus::Panic, "internal panic"),
    }
}

unsafe fn slice<'a>(p: *const f64, len: usize) -> Option<&'a [f64]> {
    if p.is_null() {
        (len == 0).then_some(&[])
    } else {
        Some(std::slice::from_raw_parts(p, len))
    }
}

unsafe fn string(p: *const c_char) -> Result<String, SkcStatus> {
    if p.is_null() {
        return Err(fail(SkcStatus::NullPointer, "string argument is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| fail(SkcStatus::InvalidArgument, "string argument is not UTF-8"))
}

/// Message of the last failed call on this thread, or null if it succeeded.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn skc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn skc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a distribution over `d` skills in identity rank order. `alpha` is
/// ignored for the uniform family and `m` is used only by the binned family.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn skc_distribution_new(
    kind: SkcDistributionKind,
    d: usize,
    alpha: f64,
    m: usize,
    out: *mut *mut SkcDistribution,
) -> SkcStatus {
    guard(|| {
        if out.is_null() {
            return fail(SkcStatus::NullPointer, "out is null");
        }
        let kind = match kind {
            SkcDistributionKind::Uniform => DistributionKind::Uniform,
            SkcDistributionKind::Zipf => DistributionKind::Zipf { alpha },
            SkcDistributionKind::BinnedZipf => DistributionKind::BinnedZipf { m, alpha },
        };
        match SkillDistribution::new(kind, d, RankOrdering::Identity) {
            Ok(dist) => {
                *out = Box::into_raw(Box::new(SkcDistribution(dist)));
                SkcStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `dist` must be null or a handle from [`skc_distribution_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn skc_distribution_free(dist: *mut SkcDistribution) {
    if !dist.is_null() {
        drop(Box::from_raw(dist));
    }
}

/// Number of skills, or 0 for a null handle.
///
/// # Safety
/// `dist` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn skc_distribution_len(dist: *const SkcDistribution) -> usize {
    dist.as_ref().map_or(0, |h| h.0.d())
}

/// Copies the per-skill probabilities into `out[0..len]`; `len` must equal the
/// number of skills.
///
/// # Safety
/// `dist` must be a live handle and `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn skc_distribution_weights(dist: *const SkcDistribution, out: *mut f64, len: usize) -> SkcStatus {
    guard(|| {
        let Some(h) = dist.as_ref() else {
            return fail(SkcStatus::NullPointer, "distribution is null");
        };
        if out.is_null() {
            return fail(SkcStatus::NullPointer, "out is null");
        }
        let w = h.0.weights();
        if len != w.len() {
            return fail(SkcStatus::InvalidArgument, format!("buffer holds {len} values, distribution has {}", w.len()));
        }
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(w);
        SkcStatus::Ok
    })
}

/// Learner weights, hidden vector and skill probabilities.
type ModelInputs<'a> = (&'a [f64], &'a [f64], &'a [f64]);

unsafe fn model_inputs<'a>(
    dist: *const SkcDistribution,
    w: *const f64,
    wstar: *const f64,
    len: usize,
) -> Result<ModelInputs<'a>, SkcStatus> {
    let h = dist.as_ref().ok_or_else(|| fail(SkcStatus::NullPointer, "distribution is null"))?;
    let p = h.0.weights();
    if len != p.len() {
        return Err(fail(SkcStatus::InvalidArgument, format!("vectors have {len} entries, distribution has {}", p.len())));
    }
    let w = slice(w, len).ok_or_else(|| fail(SkcStatus::NullPointer, "w is null"))?;
    let wstar = slice(wstar, len).ok_or_else(|| fail(SkcStatus::NullPointer, "wstar is null"))?;
    Ok((w, wstar, p))
}

/// Closed-form population loss of the `k`-fold product model at `w`.
///
/// # Safety
/// `w` and `wstar` must point to `len` doubles, `out` to one writable double.
#[no_mangle]
pub unsafe extern "C" fn skc_population_loss(
    dist: *const SkcDistribution,
    w: *const f64,
    wstar: *const f64,
    len: usize,
    k: usize,
    out: *mut f64,
) -> SkcStatus {
    guard(|| {
        if out.is_null() {
            return fail(SkcStatus::NullPointer, "out is null");
        }
        let (w, wstar, p) = match model_inputs(dist, w, wstar, len) {
            Ok(v) => v,
            Err(s) => return s,
        };
        match population_loss(w, wstar, p, k) {
            Ok(l) => {
                *out = l;
                SkcStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Closed-form population gradient, written to `out[0..len]`.
///
/// # Safety
/// `w`, `wstar` and `out` must each point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn skc_population_gradient(
    dist: *const SkcDistribution,
    w: *const f64,
    wstar: *const f64,
    len: usize,
    k: usize,
    out: *mut f64,
) -> SkcStatus {
    guard(|| {
        if out.is_null() {
            return fail(SkcStatus::NullPointer, "out is null");
        }
        let (w, wstar, p) = match model_inputs(dist, w, wstar, len) {
            Ok(v) => v,
            Err(s) => return s,
        };
        // Validates k and the sign pattern of w*.
        if let Err(e) = population_loss(w, wstar, p, k) {
            return from_error(e);
        }
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(&population_gradient(w, wstar, p, k));
        SkcStatus::Ok
    })
}

/// Composes two permutations of {1..5} given as one-line images: `g` first, then `h`.
///
/// # Safety
/// `g`, `h` and `out` must each point to 5 bytes.
#[no_mangle]
pub unsafe extern "C" fn skc_s5_compose(g: *const u8, h: *const u8, out: *mut u8) -> SkcStatus {
    guard(|| {
        if g.is_null() || h.is_null() || out.is_null() {
            return fail(SkcStatus::NullPointer, "permutation buffer is null");
        }
        let read = |p: *const u8| {
            let mut m = [0u8; 5];
            m.copy_from_slice(std::slice::from_raw_parts(p, 5));
            Perm::new(m)
        };
        match (read(g), read(h)) {
            (Ok(g), Ok(h)) => {
                std::slice::from_raw_parts_mut(out, 5).copy_from_slice(&s5_compose(&g, &h).mapping());
                SkcStatus::Ok
            }
            (Err(e), _) | (_, Err(e)) => from_error(e),
        }
    })
}

/// Evaluates an integer expression over `+`, `-` and `*` with the usual precedence.
///
/// # Safety
/// `expr` must be a NUL-terminated string and `out` a writable `int64_t`.
#[no_mangle]
pub unsafe extern "C" fn skc_eval_arithmetic(expr: *const c_char, out: *mut i64) -> SkcStatus {
    guard(|| {
        if out.is_null() {
            return fail(SkcStatus::NullPointer, "out is null");
        }
        let text = match string(expr) {
            Ok(s) => s,
            Err(s) => return s,
        };
        match eval_arithmetic(&text) {
            Ok(v) => {
                *out = v;
                SkcStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Runs the experiment described by a TOML config file. `output_root` may be
/// null to use the environment or config default; `parallelism` of 0 means no cap.
/// A run whose trials diverged still succeeds; check [`skc_run_report_exit_code`].
///
/// # Safety
/// `config_path` must be a NUL-terminated string, `output_root` null or one,
/// and `out` a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn skc_run_experiment(
    config_path: *const c_char,
    output_root: *const c_char,
    parallelism: usize,
    out: *mut *mut SkcRunReport,
) -> SkcStatus {
    guard(|| {
        if out.is_null() {
            return fail(SkcStatus::NullPointer, "out is null");
        }
        let path = match string(config_path) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let root = if output_root.is_null() {
            None
        } else {
            match string(output_root) {
                Ok(s) => Some(PathBuf::from(s)),
                Err(s) => return s,
            }
        };
        let cfg = match ExperimentConfig::load(std::path::Path::new(&path)) {
            Ok(c) => c,
            Err(e) => return from_error(e),
        };
        let overrides = RunOverrides { output_root: root, parallelism: (parallelism > 0).then_some(parallelism), seed: None };
        match run_experiment(&cfg, &overrides) {
            Ok(report) => {
                let dir = CString::new(report.dir.display().to_string()).unwrap_or_default();
                let artifacts = report
                    .manifest
                    .artifacts
                    .iter()
                    .map(|a| CString::new(a.path.as_str()).unwrap_or_default())
                    .collect();
                *out = Box::into_raw(Box::new(SkcRunReport { report, dir, artifacts }));
                SkcStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `report` must be null or a handle from [`skc_run_experiment`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn skc_run_report_free(report: *mut SkcRunReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Output directory of the run, valid while the handle lives.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn skc_run_report_dir(report: *const SkcRunReport) -> *const c_char {
    report.as_ref().map_or(ptr::null(), |r| r.dir.as_ptr())
}

/// Process exit code the CLI would use for this run: 0, or 2 if any trial diverged.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn skc_run_report_exit_code(report: *const SkcRunReport) -> i32 {
    report.as_ref().map_or(1, |r| r.report.exit_code())
}

/// Number of artifacts listed in the run manifest.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn skc_run_report_artifact_count(report: *const SkcRunReport) -> usize {
    report.as_ref().map_or(0, |r| r.artifacts.len())
}

/// Relative path of artifact `index`, or null when out of range.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn skc_run_report_artifact(report: *const SkcRunReport, index: usize) -> *const c_char {
    report
        .as_ref()
        .and_then(|r| r.artifacts.get(index))
        .map_or(ptr::null(), |c| c.as_ptr())
}
