//! C ABI over `aspect-sentiment`.
//!
//! Objects cross the boundary as opaque handles created by `as_*_load`,
//! `as_catalog_default` or `as_elm_fit` and released by the matching
//! `as_*_free`. Every fallible call returns an [`AsStatus`]; on failure
//! the message is available from [`as_last_error`] on the same thread
//! until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::ptr;

use aspect_sentiment::aspects::{load_catalog, AspectCatalog};
use aspect_sentiment::cascade::{score_by_elm_lookup, score_semi_random};
use aspect_sentiment::corpus::Label;
use aspect_sentiment::elm::{ElmConfig, ElmModel};
use aspect_sentiment::lexicon::Lexicon;
use aspect_sentiment::{profile, seed, Error};
use nalgebra::DMatrix;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    InvalidArgument = 5,
    Shape = 6,
    NotFitted = 7,
    ZeroVector = 8,
    Numerical = 9,
    Panic = 10,
}

/// Merged sentiment lexicon.
pub struct AsLexicon(Lexicon);

/// Aspect catalog.
pub struct AsCatalog(AspectCatalog);

/// Fitted extreme learning machine.
pub struct AsElm(ElmModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: AsStatus, message: impl Into<String>) -> AsStatus {
    set_error(message.into());
    status
}

fn status_of(err: &Error) -> AsStatus {
    match err {
        Error::Io { .. } => AsStatus::Io,
        Error::Parse { .. } | Error::Schema(_) | Error::Duplicate { .. } | Error::Json(_) => AsStatus::Parse,
        Error::Shape(_) => AsStatus::Shape,
        Error::NotFitted => AsStatus::NotFitted,
        Error::ZeroVector => AsStatus::ZeroVector,
        Error::NonFinite(_) | Error::ZeroVariance => AsStatus::Numerical,
        _ => AsStatus::InvalidArgument,
    }
}

fn from_error(err: Error) -> AsStatus {
    fail(status_of(&err), err.to_string())
}

/// Runs `body`, turning panics into `AsStatus::Panic`.
fn guard(body: impl FnOnce() -> Result<(), AsStatus>) -> AsStatus {
    match std::panic::catch_unwind(std::panic::AssertUnwindSafe(body)) {
        Ok(Ok(())) => AsStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(AsStatus::Panic, "internal panic"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, AsStatus> {
    if p.is_null() {
        return Err(fail(AsStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(AsStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], AsStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(AsStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, AsStatus> {
    p.as_mut().ok_or_else(|| fail(AsStatus::NullPointer, format!("{what} is null")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, AsStatus> {
    p.as_ref().ok_or_else(|| fail(AsStatus::NullPointer, format!("{what} is null")))
}

fn label_arg(label: i32) -> Result<Label, AsStatus> {
    u8::try_from(label)
        .ok()
        .and_then(|l| Label::try_from(l).ok())
        .ok_or_else(|| fail(AsStatus::InvalidArgument, format!("label must be 0 or 1, got {label}")))
}

/// Message of the last failing call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn as_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn as_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn as_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

// ---- lexicon

/// Loads a merged lexicon table and re-applies `threshold`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn as_lexicon_load(path: *const c_char, threshold: f64, out: *mut *mut AsLexicon) -> AsStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let out = out_arg(out, "out")?;
        let lex = Lexicon::load_merged(Path::new(path), threshold).map_err(from_error)?;
        *out = Box::into_raw(Box::new(AsLexicon(lex)));
        Ok(())
    })
}

/// # Safety
/// `lex` must come from [`as_lexicon_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn as_lexicon_free(lex: *mut AsLexicon) {
    if !lex.is_null() {
        drop(Box::from_raw(lex));
    }
}

/// Zero for a null handle.
///
/// # Safety
/// `lex` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn as_lexicon_len(lex: *const AsLexicon) -> usize {
    lex.as_ref().map_or(0, |l| l.0.len())
}

/// Polarity of `term`; `*found` is false and `*polarity` untouched when
/// the term is unknown.
///
/// # Safety
/// Pointers must be valid; `term` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn as_lexicon_lookup(
    lex: *const AsLexicon,
    term: *const c_char,
    polarity: *mut f64,
    found: *mut bool,
) -> AsStatus {
    guard(|| {
        let lex = handle(lex, "lexicon")?;
        let term = str_arg(term, "term")?;
        let found = out_arg(found, "found")?;
        let polarity = out_arg(polarity, "polarity")?;
        *found = false;
        if let Some(p) = lex.0.lookup(term) {
            *polarity = p;
            *found = true;
        }
        Ok(())
    })
}

// ---- catalog

/// The built-in 30-aspect catalog.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn as_catalog_default(out: *mut *mut AsCatalog) -> AsStatus {
    guard(|| {
        *out_arg(out, "out")? = Box::into_raw(Box::new(AsCatalog(AspectCatalog::default_catalog())));
        Ok(())
    })
}

/// Loads a TOML catalog.
///
/// # Safety
/// `path` must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn as_catalog_load(path: *const c_char, out: *mut *mut AsCatalog) -> AsStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let out = out_arg(out, "out")?;
        let cat = load_catalog(Path::new(path)).map_err(from_error)?;
        *out = Box::into_raw(Box::new(AsCatalog(cat)));
        Ok(())
    })
}

/// # Safety
/// `cat` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn as_catalog_free(cat: *mut AsCatalog) {
    if !cat.is_null() {
        drop(Box::from_raw(cat));
    }
}

/// Zero for a null handle.
///
/// # Safety
/// `cat` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn as_catalog_len(cat: *const AsCatalog) -> usize {
    cat.as_ref().map_or(0, |c| c.0.len())
}

/// Name of aspect `index`; free the result with [`as_string_free`].
///
/// # Safety
/// `cat` must be valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn as_catalog_name(cat: *const AsCatalog, index: usize, out: *mut *mut c_char) -> AsStatus {
    guard(|| {
        let cat = handle(cat, "catalog")?;
        let out = out_arg(out, "out")?;
        let name = cat
            .0
            .names()
            .nth(index)
            .ok_or_else(|| fail(AsStatus::InvalidArgument, format!("aspect index {index} out of range")))?;
        *out = CString::new(name).map_err(|e| fail(AsStatus::InvalidArgument, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// Aspect index matched by `term` (exact catalog term), or -1.
///
/// # Safety
/// `cat` must be valid; `term` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn as_catalog_aspect_for_term(cat: *const AsCatalog, term: *const c_char, out: *mut i64) -> AsStatus {
    guard(|| {
        let cat = handle(cat, "catalog")?;
        let term = str_arg(term, "term")?;
        *out_arg(out, "out")? = cat.0.aspect_for_term(term).map_or(-1, |i| i as i64);
        Ok(())
    })
}

// ---- ELM

/// Loads a fitted model saved by `train-elm`.
///
/// # Safety
/// `path` must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn as_elm_load(path: *const c_char, out: *mut *mut AsElm) -> AsStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let out = out_arg(out, "out")?;
        let model = ElmModel::load(Path::new(path)).map_err(from_error)?;
        *out = Box::into_raw(Box::new(AsElm(model)));
        Ok(())
    })
}

/// Fits a sigmoid ELM on `rows × cols` row-major `x` and `rows` targets.
///
/// # Safety
/// `x` must hold `rows * cols` values and `y` `rows` values; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn as_elm_fit(
    x: *const f64,
    rows: usize,
    cols: usize,
    y: *const f64,
    hidden: usize,
    ridge: f64,
    seed_value: u64,
    out: *mut *mut AsElm,
) -> AsStatus {
    guard(|| {
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| fail(AsStatus::InvalidArgument, "rows * cols overflows"))?;
        let x = slice_arg(x, len, "x")?;
        let y = slice_arg(y, rows, "y")?;
        let out = out_arg(out, "out")?;
        let config = ElmConfig { ridge, seed: seed_value, ..ElmConfig::new(cols, hidden) };
        let mut model = ElmModel::init(config).map_err(from_error)?;
        model.fit(&DMatrix::from_row_slice(rows, cols, x), y).map_err(from_error)?;
        *out = Box::into_raw(Box::new(AsElm(model)));
        Ok(())
    })
}

/// # Safety
/// `elm` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn as_elm_free(elm: *mut AsElm) {
    if !elm.is_null() {
        drop(Box::from_raw(elm));
    }
}

/// Zero for a null handle.
///
/// # Safety
/// `elm` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn as_elm_input_dim(elm: *const AsElm) -> usize {
    elm.as_ref().map_or(0, |m| m.0.config().input_dim)
}

/// Raw output `β·h(x)`.
///
/// # Safety
/// `x` must hold `len` values; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn as_elm_predict(elm: *const AsElm, x: *const f64, len: usize, out: *mut f64) -> AsStatus {
    guard(|| {
        let elm = handle(elm, "model")?;
        let x = slice_arg(x, len, "x")?;
        *out_arg(out, "out")? = elm.0.predict(x).map_err(from_error)?;
        Ok(())
    })
}

/// Thresholded label: 1 positive, 0 negative.
///
/// # Safety
/// `x` must hold `len` values; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn as_elm_classify(elm: *const AsElm, x: *const f64, len: usize, out: *mut i32) -> AsStatus {
    guard(|| {
        let elm = handle(elm, "model")?;
        let x = slice_arg(x, len, "x")?;
        *out_arg(out, "out")? = i32::from(u8::from(elm.0.classify(x).map_err(from_error)?));
        Ok(())
    })
}

// ---- scoring and similarity

/// Cosine similarity; `ZeroVector` when either side is all zeros.
///
/// # Safety
/// `a` and `b` must hold `len` values; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn as_cosine(a: *const f64, b: *const f64, len: usize, out: *mut f64) -> AsStatus {
    guard(|| {
        let a = slice_arg(a, len, "a")?;
        let b = slice_arg(b, len, "b")?;
        *out_arg(out, "out")? = profile::cosine(a, b).map_err(from_error)?;
        Ok(())
    })
}

/// Lexicon polarity of `word`, sign-flipped when `label` is 0.
///
/// # Safety
/// Pointers must be valid; `word` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn as_score_elm_lookup(
    lex: *const AsLexicon,
    word: *const c_char,
    label: i32,
    score: *mut f64,
    found: *mut bool,
) -> AsStatus {
    guard(|| {
        let lex = handle(lex, "lexicon")?;
        let word = str_arg(word, "word")?;
        let label = label_arg(label)?;
        let found = out_arg(found, "found")?;
        let score = out_arg(score, "score")?;
        *found = false;
        if let Some(s) = score_by_elm_lookup(word, label, &lex.0) {
            *score = s;
            *found = true;
        }
        Ok(())
    })
}

/// Deterministic draw in (0, 1) for label 1 or (-1, 0) for label 0.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn as_score_semi_random(label: i32, seed_value: u64, out: *mut f64) -> AsStatus {
    guard(|| {
        let label = label_arg(label)?;
        let mut rng = seed::rng(seed_value);
        *out_arg(out, "out")? = score_semi_random(label, &mut rng);
        Ok(())
    })
}
