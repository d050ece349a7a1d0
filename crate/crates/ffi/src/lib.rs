//! C ABI for the xdoc analysis pipeline.
//!
//! Bundles and documents are opaque handles owned by the caller and released
//! with their `_free` function. Every entry point returns an [`XdocStatus`];
//! on failure a description is available from [`xdoc_last_error_message`]
//! on the same thread. Strings handed out by this library are NUL terminated
//! UTF-8 and must be released with [`xdoc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use xdoc::pipeline::{self, parse_stage_list, AnalysisOptions, AnnotatedDocument, PipelineError, Stage};
use xdoc::resource::{self, ResourceBundle, ResourceError, Severity};
use xdoc::tagger::parse_external_tags;

/// Result code of every `xdoc_*` call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XdocStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// Bundle file unreadable or malformed.
    ResourceError = 3,
    /// Bundle loaded but validation reported errors.
    InvalidBundle = 4,
    /// Bad input text, tag file or stage list.
    InputError = 5,
    /// A sentence could not be analyzed in strict mode.
    AnalysisError = 6,
    /// A Rust panic was caught at the boundary.
    Panic = 7,
}

/// A loaded resource bundle.
pub struct XdocBundle {
    bundle: ResourceBundle,
}

/// An analyzed document.
pub struct XdocDocument {
    doc: AnnotatedDocument,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl ToString) {
    let text = message.to_string().replace('\0', " ");
    let c = CString::new(text).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(XdocStatus, String);

impl From<ResourceError> for Failure {
    fn from(e: ResourceError) -> Self {
        Failure(XdocStatus::ResourceError, e.to_string())
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        let status = match &e {
            PipelineError::Resource(_) => XdocStatus::ResourceError,
            PipelineError::InvalidBundle(_) => XdocStatus::InvalidBundle,
            PipelineError::Input(_) | PipelineError::Config(_) => XdocStatus::InputError,
            PipelineError::UnmappedTag { .. } => XdocStatus::AnalysisError,
        };
        Failure(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> XdocStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => XdocStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            XdocStatus::Panic
        }
    }
}

/// # Safety
/// `s` is NULL or a valid NUL-terminated string.
unsafe fn str_arg<'a>(s: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(Failure(XdocStatus::NullArgument, format!("{name} is NULL")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Failure(XdocStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn stage_arg(stages: *const c_char) -> Result<Stage, Failure> {
    if stages.is_null() {
        return Ok(Stage::Rel);
    }
    Ok(parse_stage_list(str_arg(stages, "stages")?)?)
}

fn out_arg<T>(out: *mut T, name: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(XdocStatus::NullArgument, format!("{name} is NULL")));
    }
    Ok(())
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(XdocStatus::InputError, "output contains a NUL byte".into()))
}

unsafe fn bundle_ref<'a>(bundle: *const XdocBundle) -> Result<&'a ResourceBundle, Failure> {
    bundle
        .as_ref()
        .map(|b| &b.bundle)
        .ok_or_else(|| Failure(XdocStatus::NullArgument, "bundle is NULL".into()))
}

unsafe fn document_ref<'a>(doc: *const XdocDocument) -> Result<&'a AnnotatedDocument, Failure> {
    doc.as_ref()
        .map(|d| &d.doc)
        .ok_or_else(|| Failure(XdocStatus::NullArgument, "document is NULL".into()))
}

fn checked(bundle: &ResourceBundle) -> Result<(), Failure> {
    let errors = resource::validate_bundle(bundle).errors().count();
    if errors > 0 {
        return Err(PipelineError::InvalidBundle(errors).into());
    }
    Ok(())
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next `xdoc_*` call on the same thread.
#[no_mangle]
pub extern "C" fn xdoc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Loads a bundle from an XML file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn xdoc_bundle_load(path: *const c_char, out: *mut *mut XdocBundle) -> XdocStatus {
    guard(|| {
        out_arg(out, "out")?;
        let bundle = resource::load_bundle(str_arg(path, "path")?)?;
        *out = Box::into_raw(Box::new(XdocBundle { bundle }));
        Ok(())
    })
}

/// Parses a bundle from XML held in memory.
///
/// # Safety
/// `xml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn xdoc_bundle_parse(xml: *const c_char, out: *mut *mut XdocBundle) -> XdocStatus {
    guard(|| {
        out_arg(out, "out")?;
        let bundle = resource::parse_bundle(str_arg(xml, "xml")?)?;
        *out = Box::into_raw(Box::new(XdocBundle { bundle }));
        Ok(())
    })
}

/// # Safety
/// `bundle` is NULL or a handle from `xdoc_bundle_load`/`xdoc_bundle_parse`
/// that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn xdoc_bundle_free(bundle: *mut XdocBundle) {
    if !bundle.is_null() {
        drop(Box::from_raw(bundle));
    }
}

/// Counts validation findings. Either count pointer may be NULL.
///
/// # Safety
/// `bundle` must be a live handle; non-NULL counts must be writable.
#[no_mangle]
pub unsafe extern "C" fn xdoc_bundle_validate(
    bundle: *const XdocBundle,
    errors: *mut usize,
    warnings: *mut usize,
) -> XdocStatus {
    guard(|| {
        let report = resource::validate_bundle(bundle_ref(bundle)?);
        let count = |sev| report.findings.iter().filter(|f| f.severity == sev).count();
        if !errors.is_null() {
            *errors = count(Severity::Error);
        }
        if !warnings.is_null() {
            *warnings = count(Severity::Warning);
        }
        Ok(())
    })
}

/// Canonical XML of the bundle. Free the result with `xdoc_string_free`.
///
/// # Safety
/// `bundle` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn xdoc_bundle_serialize(bundle: *const XdocBundle, out: *mut *mut c_char) -> XdocStatus {
    guard(|| {
        out_arg(out, "out")?;
        *out = into_c_string(resource::serialize_bundle(bundle_ref(bundle)?))?;
        Ok(())
    })
}

/// Analyzes `text`. `stages` is a comma-separated stage prefix such as
/// `"tok,sent,tag"`; NULL runs every stage. A bundle with validation errors
/// is refused with `XDOC_STATUS_INVALID_BUNDLE`.
///
/// # Safety
/// `bundle` must be a live handle, `text` and non-NULL `stages` must be
/// NUL-terminated strings, and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn xdoc_analyze(
    bundle: *const XdocBundle,
    text: *const c_char,
    stages: *const c_char,
    lenient: bool,
    out: *mut *mut XdocDocument,
) -> XdocStatus {
    guard(|| {
        out_arg(out, "out")?;
        let bundle = bundle_ref(bundle)?;
        let text = str_arg(text, "text")?;
        let options = AnalysisOptions {
            last_stage: stage_arg(stages)?,
            lenient,
        };
        checked(bundle)?;
        let doc = pipeline::analyze(bundle, &options, text)?;
        *out = Box::into_raw(Box::new(XdocDocument { doc }));
        Ok(())
    })
}

/// Like `xdoc_analyze`, but starts from `form<TAB>tag` lines (blank line
/// between sentences) instead of raw text.
///
/// # Safety
/// As for `xdoc_analyze`.
#[no_mangle]
pub unsafe extern "C" fn xdoc_analyze_tagged(
    bundle: *const XdocBundle,
    tagged: *const c_char,
    stages: *const c_char,
    lenient: bool,
    out: *mut *mut XdocDocument,
) -> XdocStatus {
    guard(|| {
        out_arg(out, "out")?;
        let bundle = bundle_ref(bundle)?;
        let imported = parse_external_tags(str_arg(tagged, "tagged")?)
            .map_err(|e| Failure(XdocStatus::InputError, e.to_string()))?;
        let options = AnalysisOptions {
            last_stage: stage_arg(stages)?,
            lenient,
        };
        checked(bundle)?;
        let doc = pipeline::analyze_pretagged(bundle, &options, imported)?;
        *out = Box::into_raw(Box::new(XdocDocument { doc }));
        Ok(())
    })
}

/// Number of sentences in the document.
///
/// # Safety
/// `doc` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn xdoc_document_sentence_count(doc: *const XdocDocument, out: *mut usize) -> XdocStatus {
    guard(|| {
        out_arg(out, "out")?;
        *out = document_ref(doc)?.sentences.len();
        Ok(())
    })
}

/// Annotated XML. Free the result with `xdoc_string_free`.
///
/// # Safety
/// `doc` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn xdoc_document_xml(doc: *const XdocDocument, out: *mut *mut c_char) -> XdocStatus {
    guard(|| {
        out_arg(out, "out")?;
        *out = into_c_string(pipeline::emit_xml(document_ref(doc)?))?;
        Ok(())
    })
}

/// Relation table as tab-separated text with a header line. Requires the
/// `rel` stage. Free the result with `xdoc_string_free`.
///
/// # Safety
/// `doc` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn xdoc_document_relations_tsv(doc: *const XdocDocument, out: *mut *mut c_char) -> XdocStatus {
    guard(|| {
        out_arg(out, "out")?;
        let doc = document_ref(doc)?;
        if !doc.has_run(Stage::Rel) {
            return Err(Failure(XdocStatus::InputError, "relations need the rel stage".into()));
        }
        *out = into_c_string(pipeline::export_relations(doc))?;
        Ok(())
    })
}

/// # Safety
/// `doc` is NULL or a handle from `xdoc_analyze*` that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn xdoc_document_free(doc: *mut XdocDocument) {
    if !doc.is_null() {
        drop(Box::from_raw(doc));
    }
}

/// # Safety
/// `s` is NULL or a string returned by this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn xdoc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
