//! C ABI for the careerflow engine.
//!
//! Every fallible function returns a [`CfStatus`]; on failure the message is
//! available from [`cf_last_error`] on the same thread until the next call.
//! Objects cross the boundary as opaque handles that must be released with
//! their `*_free` function. Panics are caught and reported as
//! `CF_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use careerflow::classes::{assign_classes, Class, ProductivityType};
use careerflow::corpus::{
    filter_sample, parse_corpus_files, write_corpus_files, Corpus, CorpusFiles, FilterGate,
    SampleFilterConfig,
};
use careerflow::mobility::percent_tenths;
use careerflow::pipeline::{self, AnalyzeConfig};
use careerflow::regression::{collinearity_diagonal, fit_logistic, Design, FitOptions, FitResult};
use careerflow::synth::{gen_corpus, CohortConfig, CorpusConfig};
use careerflow::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    InvalidInput = 5,
    Numeric = 6,
    Panic = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> CfStatus {
    match e {
        Error::Read { .. } | Error::Write { .. } | Error::Io(_) | Error::Manifest(_) => CfStatus::Io,
        Error::Cache(_) => CfStatus::Parse,
        Error::RankDeficient { .. }
        | Error::Separation { .. }
        | Error::SingularCorrelation { .. }
        | Error::ConstantPredictor(_)
        | Error::ConstantOutcome { .. }
        | Error::CalibrationRange { .. } => CfStatus::Numeric,
        Error::Stage { source, .. } => status_of(source),
        _ => CfStatus::InvalidInput,
    }
}

struct Failure(CfStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CfStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal error: {msg}"));
            CfStatus::Panic
        }
    }
}

fn null(name: &str) -> Failure {
    Failure(CfStatus::NullArgument, format!("`{name}` is null"))
}

unsafe fn path_arg(p: *const c_char, name: &str) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(CfStatus::InvalidUtf8, format!("`{name}` is not valid UTF-8")))?;
    Ok(PathBuf::from(s))
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(name))
}

unsafe fn slice_arg<'a, T>(p: *const T, n: usize, name: &str) -> Result<&'a [T], Failure> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn cf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Opaque validated corpus.
pub struct CfCorpus {
    corpus: Corpus,
    rejects: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CfCorpusCounts {
    pub journals: usize,
    pub authors: usize,
    pub publications: usize,
    /// Input lines rejected during parsing.
    pub rejects: usize,
}

/// Sample filter thresholds; country and discipline lists keep their
/// defaults (OECD members, 16 STEMM disciplines).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CfFilterConfig {
    pub min_publications: u32,
    pub min_academic_age: i32,
    pub max_academic_age: i32,
    pub active_window_years: i32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CfFilterReport {
    pub total: usize,
    pub removed_country: usize,
    pub removed_discipline: usize,
    pub removed_nonoccasional: usize,
    pub removed_academic_age: usize,
    pub removed_active: usize,
    pub retained: usize,
}

/// Default filter thresholds.
#[no_mangle]
pub extern "C" fn cf_filter_config_default() -> CfFilterConfig {
    let d = SampleFilterConfig::default();
    CfFilterConfig {
        min_publications: d.min_publications,
        min_academic_age: d.min_academic_age,
        max_academic_age: d.max_academic_age,
        active_window_years: d.active_window_years,
    }
}

fn filter_config(cfg: Option<&CfFilterConfig>) -> Result<SampleFilterConfig, Failure> {
    let mut filter = SampleFilterConfig::default();
    if let Some(c) = cfg {
        filter.min_publications = c.min_publications;
        filter.min_academic_age = c.min_academic_age;
        filter.max_academic_age = c.max_academic_age;
        filter.active_window_years = c.active_window_years;
    }
    filter.validate()?;
    Ok(filter)
}

/// Reads the three JSON Lines input files. Schema-violating lines are
/// skipped and counted; unreadable files fail with `CF_STATUS_IO`.
///
/// # Safety
/// Paths must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cf_corpus_load(
    publications: *const c_char,
    journals: *const c_char,
    authors: *const c_char,
    reference_year: i32,
    out: *mut *mut CfCorpus,
) -> CfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let files = CorpusFiles {
            publications: path_arg(publications, "publications")?,
            journals: path_arg(journals, "journals")?,
            authors: path_arg(authors, "authors")?,
        };
        let parsed = parse_corpus_files(&files, reference_year)?;
        *out = Box::into_raw(Box::new(CfCorpus {
            corpus: parsed.corpus,
            rejects: parsed.rejects.len(),
        }));
        Ok(())
    })
}

/// Reads a cache written by `careerflow ingest`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cf_corpus_load_cache(path: *const c_char, out: *mut *mut CfCorpus) -> CfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let (header, corpus) = pipeline::read_cache(&path_arg(path, "path")?)?;
        *out = Box::into_raw(Box::new(CfCorpus {
            corpus,
            rejects: header.rejects,
        }));
        Ok(())
    })
}

/// # Safety
/// `corpus` must come from a `cf_corpus_load*` call and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cf_corpus_free(corpus: *mut CfCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

/// # Safety
/// `corpus` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cf_corpus_counts(corpus: *const CfCorpus, out: *mut CfCorpusCounts) -> CfStatus {
    guard(|| {
        let c = corpus.as_ref().ok_or_else(|| null("corpus"))?;
        *out_arg(out, "out")? = CfCorpusCounts {
            journals: c.corpus.journals.len(),
            authors: c.corpus.authors.len(),
            publications: c.corpus.publications.len(),
            rejects: c.rejects,
        };
        Ok(())
    })
}

/// Applies the sample filter. `config` may be null for the defaults.
///
/// # Safety
/// `corpus` must be a live handle; `config` null or readable; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cf_corpus_filter(
    corpus: *const CfCorpus,
    config: *const CfFilterConfig,
    out: *mut CfFilterReport,
) -> CfStatus {
    guard(|| {
        let c = corpus.as_ref().ok_or_else(|| null("corpus"))?;
        let out = out_arg(out, "out")?;
        let filter = filter_config(config.as_ref())?;
        let index = c.corpus.author_publications();
        let r = filter_sample(&c.corpus, &index, &filter).report;
        *out = CfFilterReport {
            total: r.total,
            removed_country: r.removed(FilterGate::Country),
            removed_discipline: r.removed(FilterGate::Discipline),
            removed_nonoccasional: r.removed(FilterGate::Nonoccasional),
            removed_academic_age: r.removed(FilterGate::AcademicAge),
            removed_active: r.removed(FilterGate::Active),
            retained: r.retained,
        };
        Ok(())
    })
}

/// Runs the full analysis into `out_dir`. `ptypes` holds productivity type
/// numbers 1-4 (null/0 entries: all four); `config` may be null for the
/// default filter; `workers` 0 uses every core. Writes the number of output
/// files (manifest excluded) to `n_files` when it is not null.
///
/// # Safety
/// `corpus` must be a live handle, `out_dir` NUL-terminated, `ptypes`
/// readable for `n_ptypes` entries.
#[no_mangle]
pub unsafe extern "C" fn cf_analyze(
    corpus: *const CfCorpus,
    out_dir: *const c_char,
    config: *const CfFilterConfig,
    ptypes: *const u32,
    n_ptypes: usize,
    workers: usize,
    n_files: *mut usize,
) -> CfStatus {
    guard(|| {
        let c = corpus.as_ref().ok_or_else(|| null("corpus"))?;
        let dir = path_arg(out_dir, "out_dir")?;
        let mut chosen = Vec::new();
        for &p in slice_arg(ptypes, n_ptypes, "ptypes")? {
            let t = p
                .to_string()
                .parse::<ProductivityType>()
                .map_err(|e| Failure(CfStatus::InvalidInput, e))?;
            chosen.push(t);
        }
        if chosen.is_empty() {
            chosen = ProductivityType::ALL.to_vec();
        }
        let config = AnalyzeConfig {
            filter: filter_config(config.as_ref())?,
            ptypes: chosen,
            ..AnalyzeConfig::default()
        };
        let summary = pipeline::with_workers(workers, || pipeline::analyze(&c.corpus, &config, &dir))??;
        if let Some(n) = n_files.as_mut() {
            *n = summary.manifest.len();
        }
        Ok(())
    })
}

/// 20/60/20 classes of one cohort: 0 bottom, 1 middle, 2 top. Cohorts below
/// five members are all middle and set `too_small` (if not null).
///
/// # Safety
/// `values` readable and `classes` writable for `n` entries.
#[no_mangle]
pub unsafe extern "C" fn cf_assign_classes(
    values: *const f64,
    n: usize,
    classes: *mut u8,
    too_small: *mut bool,
) -> CfStatus {
    guard(|| {
        let values = slice_arg(values, n, "values")?;
        if values.iter().any(|v| v.is_nan()) {
            return Err(Failure(CfStatus::InvalidInput, "values contain NaN".into()));
        }
        if n > 0 && classes.is_null() {
            return Err(null("classes"));
        }
        let a = assign_classes(values);
        for (i, c) in a.classes.iter().enumerate() {
            *classes.add(i) = match c {
                Class::Bottom => 0,
                Class::Middle => 1,
                Class::Top => 2,
            };
        }
        if let Some(t) = too_small.as_mut() {
            *t = a.too_small;
        }
        Ok(())
    })
}

/// Row percentage in tenths of a percent, rounded half away from zero
/// (36,373 of 65,023 gives 559).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cf_percent_tenths(count: u64, size: u64, out: *mut u64) -> CfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = percent_tenths(count, size)
            .ok_or_else(|| Failure(CfStatus::InvalidInput, "class size is zero".into()))?;
        Ok(())
    })
}

/// Opaque logistic fit.
pub struct CfLogitFit {
    fit: FitResult,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CfCoefficient {
    pub estimate: f64,
    pub std_error: f64,
    pub odds_ratio: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub p_value: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CfFitSummary {
    pub n_used: usize,
    pub n_coefficients: usize,
    pub log_likelihood: f64,
    pub null_log_likelihood: f64,
    pub pseudo_r2: f64,
    pub converged: bool,
    pub iterations: usize,
}

unsafe fn design_arg(x: *const f64, n: usize, p: usize, y: Option<*const u8>) -> Result<Design, Failure> {
    let cells = n
        .checked_mul(p)
        .ok_or_else(|| Failure(CfStatus::InvalidInput, "n x p overflows".into()))?;
    let x = slice_arg(x, cells, "x")?.to_vec();
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Failure(CfStatus::InvalidInput, "x contains non-finite values".into()));
    }
    let y = match y {
        Some(y) => slice_arg(y, n, "y")?.iter().map(|&v| v != 0).collect(),
        None => vec![false; n],
    };
    let names = (0..p).map(|j| format!("x{}", j + 1)).collect();
    Ok(Design::new(names, x, y))
}

/// Maximum-likelihood logistic fit of `y` (0/1, length `n`) on the
/// row-major `n x p` matrix `x`; an intercept is added.
///
/// # Safety
/// `x` readable for `n * p` values, `y` for `n`; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cf_logit_fit(
    x: *const f64,
    y: *const u8,
    n: usize,
    p: usize,
    out: *mut *mut CfLogitFit,
) -> CfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        if n == 0 {
            return Err(Failure(CfStatus::InvalidInput, "no rows".into()));
        }
        let design = design_arg(x, n, p, Some(y))?;
        if design.y.iter().all(|&v| v == design.y[0]) {
            return Err(Failure(CfStatus::Numeric, "outcome is constant".into()));
        }
        let fit = fit_logistic(&design, &FitOptions::default())?;
        *out = Box::into_raw(Box::new(CfLogitFit { fit }));
        Ok(())
    })
}

/// # Safety
/// `fit` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cf_logit_summary(fit: *const CfLogitFit, out: *mut CfFitSummary) -> CfStatus {
    guard(|| {
        let f = &fit.as_ref().ok_or_else(|| null("fit"))?.fit;
        *out_arg(out, "out")? = CfFitSummary {
            n_used: f.n_used,
            n_coefficients: f.coefficients.len() + 1,
            log_likelihood: f.log_likelihood,
            null_log_likelihood: f.null_log_likelihood,
            pseudo_r2: f.pseudo_r2,
            converged: f.converged,
            iterations: f.iterations,
        };
        Ok(())
    })
}

/// Coefficient `j`: 0 is the intercept, `1..=p` the predictors in column
/// order. Intercept bounds are on the log-odds scale.
///
/// # Safety
/// `fit` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cf_logit_coefficient(
    fit: *const CfLogitFit,
    j: usize,
    out: *mut CfCoefficient,
) -> CfStatus {
    guard(|| {
        let f = &fit.as_ref().ok_or_else(|| null("fit"))?.fit;
        let out = out_arg(out, "out")?;
        let c = if j == 0 {
            &f.intercept
        } else {
            f.coefficients.get(j - 1).ok_or_else(|| {
                Failure(CfStatus::InvalidInput, format!("coefficient {j} out of range"))
            })?
        };
        let (lo, hi) = if j == 0 { c.log_odds_ci() } else { (c.ci_lower, c.ci_upper) };
        *out = CfCoefficient {
            estimate: c.estimate,
            std_error: c.std_error,
            odds_ratio: c.odds_ratio,
            ci_lower: lo,
            ci_upper: hi,
            p_value: c.p_value,
        };
        Ok(())
    })
}

/// # Safety
/// `fit` must come from `cf_logit_fit` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cf_logit_free(fit: *mut CfLogitFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// Inverse-correlation diagonal of the `p` columns of the row-major
/// `n x p` matrix `x`, written to `out` (`p` values).
///
/// # Safety
/// `x` readable for `n * p` values; `out` writable for `p`.
#[no_mangle]
pub unsafe extern "C" fn cf_vif(x: *const f64, n: usize, p: usize, out: *mut f64) -> CfStatus {
    guard(|| {
        let design = design_arg(x, n, p, None)?;
        let report = collinearity_diagonal(&design)?;
        if out.is_null() {
            return Err(null("out"));
        }
        std::slice::from_raw_parts_mut(out, p).copy_from_slice(&report.diagonal);
        Ok(())
    })
}

/// Writes a synthetic corpus (publications/journals/authors.jsonl) into
/// `out_dir`, all other generator settings at their defaults.
///
/// # Safety
/// `out_dir` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cf_synth_write(
    out_dir: *const c_char,
    seed: u64,
    n_authors: usize,
    n_disciplines: usize,
    rho: f64,
    reference_year: i32,
) -> CfStatus {
    guard(|| {
        let dir = path_arg(out_dir, "out_dir")?;
        let config = CorpusConfig {
            cohort: CohortConfig {
                n_authors,
                n_disciplines,
                rho,
                seed,
                ..CohortConfig::default()
            },
            reference_year,
            ..CorpusConfig::default()
        };
        let generated = gen_corpus(&config)?;
        std::fs::create_dir_all(&dir).map_err(|e| Failure(CfStatus::Io, format!("{}: {e}", dir.display())))?;
        write_corpus_files(&generated.corpus, &CorpusFiles::in_dir(&dir))?;
        Ok(())
    })
}
