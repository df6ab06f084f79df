//! C ABI for seqsynth.
//!
//! Objects are opaque heap handles released with their `*_free` function.
//! Every fallible call returns a [`SeqsynthStatus`]; on failure the message is
//! available from [`seqsynth_last_error`] on the same thread.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use seqsynth::corpus::{LengthDistribution, StartDistribution};
use seqsynth::fidelity::matrix_fidelity;
use seqsynth::generator::{generate_set_with_workers, MbrwConfig, MemoryDistribution};
use seqsynth::seqgraph::{load_matrix, save_matrix, MatrixKind};
use seqsynth::{
    build_cvs, build_ds, k_anonymity_filter, load_clickstreams, save_clickstreams, ClickstreamSet, CountingMode,
    CvsMatrix, DsMatrix, Error, SparseCountMatrix,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeqsynthStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    DimensionMismatch = 5,
    /// A Rust panic was caught at the boundary.
    Internal = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeqsynthMatrixKind {
    Ds = 0,
    Cvs = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeqsynthCountingMode {
    PerStream = 0,
    PerOccurrence = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeqsynthLengthKind {
    /// Length histogram of the reference corpus.
    Empirical = 0,
    /// `param_a` = length.
    Constant = 1,
    /// `param_a` = success probability p; lengths are failures + 1.
    Geometric = 2,
    /// `param_a` = lambda.
    Poisson = 3,
    /// `param_a` = mean, `param_b` = standard deviation.
    Normal = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeqsynthStartKind {
    Uniform = 0,
    /// First-item frequencies of the reference corpus.
    Empirical = 1,
}

/// Generation parameters. A `memory_std` of zero means constant memory
/// `round(memory_mean)`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SeqsynthGenerateConfig {
    pub memory_mean: f64,
    pub memory_std: f64,
    pub length_kind: SeqsynthLengthKind,
    pub length_param_a: f64,
    pub length_param_b: f64,
    pub start_kind: SeqsynthStartKind,
    pub epsilon: f64,
    pub stream_count: usize,
    pub seed: u64,
    /// Zero selects the number of available CPUs.
    pub workers: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SeqsynthGenerationStats {
    pub dead_end_fallbacks: u64,
    pub zero_memory_walks: u64,
    pub items_emitted: u64,
}

/// Opaque clickstream corpus with its vocabulary.
pub struct SeqsynthCorpus(ClickstreamSet);

/// Opaque sparse count matrix (DS or CVS).
pub struct SeqsynthMatrix(SparseCountMatrix);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(SeqsynthStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } => SeqsynthStatus::Io,
            Error::Parse { .. } | Error::EmptyCorpus(_) | Error::UnknownLabel(_) | Error::InvalidLabel(_) => {
                SeqsynthStatus::Parse
            }
            Error::DimensionMismatch(_) | Error::ItemOutOfRange { .. } => SeqsynthStatus::DimensionMismatch,
            Error::InvalidArgument(_) => SeqsynthStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SeqsynthStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(SeqsynthStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SeqsynthStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SeqsynthStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".to_string());
            SeqsynthStatus::Internal
        }
    }
}

unsafe fn path_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

fn counting_mode(mode: SeqsynthCountingMode) -> CountingMode {
    match mode {
        SeqsynthCountingMode::PerStream => CountingMode::PerStream,
        SeqsynthCountingMode::PerOccurrence => CountingMode::PerOccurrence,
    }
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn seqsynth_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn seqsynth_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Frees a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn seqsynth_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[no_mangle]
pub unsafe extern "C" fn seqsynth_corpus_load(path: *const c_char, out: *mut *mut SeqsynthCorpus) -> SeqsynthStatus {
    guard(|| {
        let path = path_arg(path, "path")?;
        let set = load_clickstreams(path)?;
        write_out(out, Box::into_raw(Box::new(SeqsynthCorpus(set))))
    })
}

#[no_mangle]
pub unsafe extern "C" fn seqsynth_corpus_save(corpus: *const SeqsynthCorpus, path: *const c_char) -> SeqsynthStatus {
    guard(|| {
        let corpus = handle(corpus, "corpus")?;
        save_clickstreams(&corpus.0, path_arg(path, "path")?)?;
        Ok(())
    })
}

/// Number of clickstreams.
#[no_mangle]
pub unsafe extern "C" fn seqsynth_corpus_len(corpus: *const SeqsynthCorpus, out: *mut usize) -> SeqsynthStatus {
    guard(|| write_out(out, handle(corpus, "corpus")?.0.len()))
}

/// Vocabulary size.
#[no_mangle]
pub unsafe extern "C" fn seqsynth_corpus_item_count(
    corpus: *const SeqsynthCorpus,
    out: *mut usize,
) -> SeqsynthStatus {
    guard(|| write_out(out, handle(corpus, "corpus")?.0.item_count()))
}

#[no_mangle]
pub unsafe extern "C" fn seqsynth_corpus_free(corpus: *mut SeqsynthCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

#[no_mangle]
pub unsafe extern "C" fn seqsynth_matrix_build(
    corpus: *const SeqsynthCorpus,
    kind: SeqsynthMatrixKind,
    mode: SeqsynthCountingMode,
    out: *mut *mut SeqsynthMatrix,
) -> SeqsynthStatus {
    guard(|| {
        let set = &handle(corpus, "corpus")?.0;
        let mode = counting_mode(mode);
        let m = match kind {
            SeqsynthMatrixKind::Ds => build_ds(set, mode)?.into_inner(),
            SeqsynthMatrixKind::Cvs => build_cvs(set, mode)?.into_inner(),
        };
        write_out(out, Box::into_raw(Box::new(SeqsynthMatrix(m))))
    })
}

#[no_mangle]
pub unsafe extern "C" fn seqsynth_matrix_load(path: *const c_char, out: *mut *mut SeqsynthMatrix) -> SeqsynthStatus {
    guard(|| {
        let m = load_matrix(path_arg(path, "path")?)?;
        write_out(out, Box::into_raw(Box::new(SeqsynthMatrix(m))))
    })
}

#[no_mangle]
pub unsafe extern "C" fn seqsynth_matrix_save(matrix: *const SeqsynthMatrix, path: *const c_char) -> SeqsynthStatus {
    guard(|| {
        let m = handle(matrix, "matrix")?;
        save_matrix(&m.0, path_arg(path, "path")?)?;
        Ok(())
    })
}

/// TSV text of the matrix; release with [`seqsynth_string_free`].
#[no_mangle]
pub unsafe extern "C" fn seqsynth_matrix_to_tsv(matrix: *const SeqsynthMatrix, out: *mut *mut c_char) -> SeqsynthStatus {
    guard(|| {
        let text = handle(matrix, "matrix")?.0.to_tsv();
        let c = CString::new(text).map_err(|_| invalid("matrix text contains NUL"))?;
        write_out(out, c.into_raw())
    })
}

/// Copy of `matrix` keeping only entries with count >= k.
#[no_mangle]
pub unsafe extern "C" fn seqsynth_matrix_filter(
    matrix: *const SeqsynthMatrix,
    k: u64,
    out: *mut *mut SeqsynthMatrix,
) -> SeqsynthStatus {
    guard(|| {
        let m = handle(matrix, "matrix")?;
        let filtered = k_anonymity_filter(&m.0, k);
        write_out(out, Box::into_raw(Box::new(SeqsynthMatrix(filtered))))
    })
}

#[no_mangle]
pub unsafe extern "C" fn seqsynth_matrix_kind(
    matrix: *const SeqsynthMatrix,
    out: *mut SeqsynthMatrixKind,
) -> SeqsynthStatus {
    guard(|| {
        let kind = match handle(matrix, "matrix")?.0.kind() {
            MatrixKind::Ds => SeqsynthMatrixKind::Ds,
            MatrixKind::Cvs => SeqsynthMatrixKind::Cvs,
        };
        write_out(out, kind)
    })
}

/// Number of items (rows = columns).
#[no_mangle]
pub unsafe extern "C" fn seqsynth_matrix_dim(matrix: *const SeqsynthMatrix, out: *mut usize) -> SeqsynthStatus {
    guard(|| write_out(out, handle(matrix, "matrix")?.0.n()))
}

/// Number of stored non-zero entries.
#[no_mangle]
pub unsafe extern "C" fn seqsynth_matrix_nnz(matrix: *const SeqsynthMatrix, out: *mut usize) -> SeqsynthStatus {
    guard(|| write_out(out, handle(matrix, "matrix")?.0.nnz()))
}

#[no_mangle]
pub unsafe extern "C" fn seqsynth_matrix_get(
    matrix: *const SeqsynthMatrix,
    row: u32,
    col: u32,
    out: *mut u64,
) -> SeqsynthStatus {
    guard(|| {
        let m = &handle(matrix, "matrix")?.0;
        let n = m.n();
        if row as usize >= n || col as usize >= n {
            return Err(Error::ItemOutOfRange { id: row.max(col) as usize, n }.into());
        }
        write_out(out, m.get(row, col))
    })
}

#[no_mangle]
pub unsafe extern "C" fn seqsynth_matrix_free(matrix: *mut SeqsynthMatrix) {
    if !matrix.is_null() {
        drop(Box::from_raw(matrix));
    }
}

fn generate_config(cfg: &SeqsynthGenerateConfig, reference: &ClickstreamSet) -> Result<MbrwConfig, Failure> {
    let memory = if cfg.memory_std == 0.0 {
        if !(cfg.memory_mean >= 0.0 && cfg.memory_mean <= u32::MAX as f64) {
            return Err(invalid(format!("memory must be >= 0, got {}", cfg.memory_mean)));
        }
        MemoryDistribution::Constant(cfg.memory_mean.round() as u32)
    } else {
        MemoryDistribution::RoundedGaussian { mean: cfg.memory_mean, std: cfg.memory_std }
    };
    let (a, b) = (cfg.length_param_a, cfg.length_param_b);
    let length = match cfg.length_kind {
        SeqsynthLengthKind::Empirical => reference.empirical_lengths()?,
        SeqsynthLengthKind::Constant => {
            if !(a >= 1.0 && a <= u32::MAX as f64) {
                return Err(invalid(format!("constant length must be >= 1, got {a}")));
            }
            LengthDistribution::Constant(a.round() as u32)
        }
        SeqsynthLengthKind::Geometric => LengthDistribution::Geometric { p: a },
        SeqsynthLengthKind::Poisson => LengthDistribution::Poisson { lambda: a },
        SeqsynthLengthKind::Normal => LengthDistribution::RoundedGaussian { mean: a, std: b },
    };
    let start = match cfg.start_kind {
        SeqsynthStartKind::Uniform => StartDistribution::uniform(reference.item_count())?,
        SeqsynthStartKind::Empirical => reference.empirical_starts()?,
    };
    Ok(MbrwConfig { memory, length, epsilon: cfg.epsilon, stream_count: cfg.stream_count, start, seed: cfg.seed })
}

/// Generates a synthetic corpus from DS and CVS matrices.
///
/// `reference` supplies the vocabulary and, when requested, the empirical
/// length and start distributions. `stats` may be null.
#[no_mangle]
pub unsafe extern "C" fn seqsynth_generate(
    ds: *const SeqsynthMatrix,
    cvs: *const SeqsynthMatrix,
    reference: *const SeqsynthCorpus,
    config: *const SeqsynthGenerateConfig,
    out: *mut *mut SeqsynthCorpus,
    stats: *mut SeqsynthGenerationStats,
) -> SeqsynthStatus {
    guard(|| {
        let ds = DsMatrix::try_from(handle(ds, "ds")?.0.clone())?;
        let cvs = CvsMatrix::try_from(handle(cvs, "cvs")?.0.clone())?;
        let reference = &handle(reference, "reference")?.0;
        let cfg = generate_config(handle(config, "config")?, reference)?;
        let workers = match (*config).workers {
            0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
            w => w,
        };
        let vocab = Arc::clone(reference.vocab());
        let output = generate_set_with_workers(&ds, &cvs, &vocab, &cfg, workers)?;
        if !stats.is_null() {
            stats.write(SeqsynthGenerationStats {
                dead_end_fallbacks: output.stats.dead_end_fallbacks,
                zero_memory_walks: output.stats.zero_memory_walks,
                items_emitted: output.stats.items_emitted,
            });
        }
        write_out(out, Box::into_raw(Box::new(SeqsynthCorpus(output.set))))
    })
}

/// Top-`z` rank correlation of every row of `real` against `syn`.
///
/// Writes the mean and population standard deviation over evaluated rows
/// (NaN when none could be evaluated) and the number of skipped rows.
#[no_mangle]
pub unsafe extern "C" fn seqsynth_fidelity(
    real: *const SeqsynthMatrix,
    syn: *const SeqsynthMatrix,
    z: usize,
    out_avg: *mut f64,
    out_std: *mut f64,
    out_skipped: *mut usize,
) -> SeqsynthStatus {
    guard(|| {
        let (real, syn) = (handle(real, "real")?, handle(syn, "syn")?);
        if out_avg.is_null() || out_std.is_null() || out_skipped.is_null() {
            return Err(null("output pointer"));
        }
        let report = matrix_fidelity(&real.0, &syn.0, z)?;
        out_avg.write(report.avg);
        out_std.write(report.std);
        out_skipped.write(report.skipped);
        Ok(())
    })
}
