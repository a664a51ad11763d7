//! C ABI over the evsearch engine.
//!
//! Handles are opaque. Every fallible call returns an [`EvsStatus`]; on
//! failure the message is kept per thread and read with
//! [`evs_last_error_message`]. Strings returned through `out` parameters are
//! owned by the caller and released with [`evs_string_free`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::ptr;

use evsearch::index::{score_condition, EventIndex, DEFAULT_BETA};
use evsearch::query::StructuredForm;
use evsearch::service::{ingest_jsonl, Config, Engine, DEFAULT_K};
use evsearch::Error;
use serde::Deserialize;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvsStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    InvalidInput = 5,
    UnsupportedLanguage = 6,
    Provider = 7,
    Internal = 8,
}

/// An extraction pipeline together with its event index.
pub struct EvsEngine {
    engine: Engine,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(EvsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } => EvsStatus::Io,
            Error::Parse { .. } | Error::Json(_) | Error::Config(_) | Error::Ontology(_) => EvsStatus::Parse,
            Error::UnsupportedLanguage(_) => EvsStatus::UnsupportedLanguage,
            Error::Provider { .. } => EvsStatus::Provider,
            Error::Graph(_) | Error::DimensionMismatch { .. } | Error::ShapeMismatch { .. } => EvsStatus::Internal,
            _ => EvsStatus::InvalidInput,
        };
        Failure(status, e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure(EvsStatus::Parse, e.to_string())
    }
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn run(f: impl FnOnce() -> Result<(), Failure>) -> EvsStatus {
    match std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            EvsStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            EvsStatus::Internal
        }
    }
}

unsafe fn arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(EvsStatus::NullArgument, format!("`{name}` is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(EvsStatus::InvalidUtf8, format!("`{name}` is not valid UTF-8")))
}

unsafe fn opt_arg<'a>(p: *const c_char, name: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        arg(p, name).map(Some)
    }
}

unsafe fn engine_ref<'a>(e: *const EvsEngine) -> Result<&'a Engine, Failure> {
    e.as_ref()
        .map(|h| &h.engine)
        .ok_or_else(|| Failure(EvsStatus::NullArgument, "`engine` is null".into()))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(EvsStatus::NullArgument, "`out` is null".into()));
    }
    *out = value;
    Ok(())
}

unsafe fn write_json(out: *mut *mut c_char, v: &impl serde::Serialize) -> Result<(), Failure> {
    let s = serde_json::to_string(v)?;
    let c = CString::new(s).map_err(|e| Failure(EvsStatus::Internal, e.to_string()))?;
    if out.is_null() {
        return Err(Failure(EvsStatus::NullArgument, "`out` is null".into()));
    }
    *out = c.into_raw();
    Ok(())
}

/// Opens an engine. `config_path` selects a TOML configuration (built-in
/// data when null); `index_path` selects a persistent index file (in memory
/// when null).
#[no_mangle]
pub unsafe extern "C" fn evs_engine_open(
    config_path: *const c_char,
    index_path: *const c_char,
    out: *mut *mut EvsEngine,
) -> EvsStatus {
    run(|| {
        if out.is_null() {
            return Err(Failure(EvsStatus::NullArgument, "`out` is null".into()));
        }
        *out = ptr::null_mut();
        let config = match opt_arg(config_path, "config_path")? {
            Some(p) => Config::load(Path::new(p))?,
            None => Config::default(),
        };
        let index = match opt_arg(index_path, "index_path")? {
            Some(p) => EventIndex::open(Path::new(p))?,
            None => EventIndex::in_memory(),
        };
        let engine = Engine::new(config.build()?, index);
        *out = Box::into_raw(Box::new(EvsEngine { engine }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn evs_engine_free(engine: *mut EvsEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Extracts events from `text` and writes the result JSON to `out`.
/// Translation and projection run when `translate` is nonzero.
#[no_mangle]
pub unsafe extern "C" fn evs_extract_json(
    engine: *const EvsEngine,
    id: *const c_char,
    language: *const c_char,
    text: *const c_char,
    translate: i32,
    out: *mut *mut c_char,
) -> EvsStatus {
    run(|| {
        let engine = engine_ref(engine)?;
        let mut result = engine
            .pipeline
            .extract(arg(id, "id")?, arg(language, "language")?, arg(text, "text")?)?;
        if translate != 0 {
            engine.pipeline.translate(&mut result);
        }
        write_json(out, &result)
    })
}

/// Ingests a JSON Lines corpus (`{"id","language","text"}` per line) and
/// writes the ingest report JSON to `out`.
#[no_mangle]
pub unsafe extern "C" fn evs_ingest_jsonl(
    engine: *const EvsEngine,
    corpus: *const c_char,
    out: *mut *mut c_char,
) -> EvsStatus {
    run(|| {
        let engine = engine_ref(engine)?;
        let report = ingest_jsonl(engine, arg(corpus, "corpus")?)?;
        write_json(out, &report)
    })
}

#[derive(Deserialize)]
struct SearchRequest {
    #[serde(default)]
    nl: Option<String>,
    #[serde(flatten)]
    form: StructuredForm,
}

/// Runs a search. `request` is either `{"nl": "..."}` or a structured form
/// (`types`, `agent`, `patient`, `location`, `context`). `k` of 0 uses the
/// default. Writes `{"query", "hits"}` JSON to `out`.
#[no_mangle]
pub unsafe extern "C" fn evs_search_json(
    engine: *const EvsEngine,
    request: *const c_char,
    k: usize,
    out: *mut *mut c_char,
) -> EvsStatus {
    run(|| {
        let engine = engine_ref(engine)?;
        let req: SearchRequest = serde_json::from_str(arg(request, "request")?)?;
        let query = match &req.nl {
            Some(nl) => engine.nl_query(nl)?,
            None => engine.structured_query(&req.form)?,
        };
        let hits = engine.search(&query, if k == 0 { DEFAULT_K } else { k })?;
        write_json(out, &serde_json::json!({ "query": query, "hits": hits }))
    })
}

/// Parses a natural-language query and writes the structured query JSON.
#[no_mangle]
pub unsafe extern "C" fn evs_nl_query_json(
    engine: *const EvsEngine,
    text: *const c_char,
    out: *mut *mut c_char,
) -> EvsStatus {
    run(|| {
        let engine = engine_ref(engine)?;
        let query = engine.nl_query(arg(text, "text")?)?;
        write_json(out, &query)
    })
}

/// Condition score with the engine's cross-lingual similarity provider.
/// `field` may be null (no field evidence); `beta` below 0 uses the default.
#[no_mangle]
pub unsafe extern "C" fn evs_score_condition(
    engine: *const EvsEngine,
    query_text: *const c_char,
    field: *const c_char,
    extraction_confidence: f64,
    sentence: *const c_char,
    beta: f64,
    out: *mut f64,
) -> EvsStatus {
    run(|| {
        let engine = engine_ref(engine)?;
        let field = opt_arg(field, "field")?.map(|f| (f, extraction_confidence));
        let beta = if beta < 0.0 { DEFAULT_BETA } else { beta };
        let cac = engine.pipeline.providers.cac.get();
        let v = score_condition(arg(query_text, "query_text")?, field, arg(sentence, "sentence")?, &*cac, beta)?;
        write_out(out, v)
    })
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn evs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub unsafe extern "C" fn evs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn evs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
