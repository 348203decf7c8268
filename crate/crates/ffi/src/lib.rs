//! C ABI over the figui core: parse, refine, IR, HTML generation, metrics
//! and MAE.
//!
//! Every function returns a [`FiguiStatus`]. On failure the message is kept
//! per thread and read with [`figui_last_error_message`]. Objects are opaque
//! handles released with their `_free` function; strings returned through
//! out-pointers are released with [`figui_string_free`]. Panics never cross
//! the boundary, they come back as `FIGUI_STATUS_PANIC`.

use figui::codegen::{generate, CodegenConfig, CodegenMode};
use figui::figma::{parse_document, serialize_document_pretty, AssetStore, FigmaDocument};
use figui::ir::{to_ir, UiIr};
use figui::metrics::{evaluate, MetricsReport};
use figui::refine::{refine, RefineConfig};
use figui::visual::{mae, ImageBuffer};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FiguiStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    RefineError = 4,
    IrError = 5,
    CodegenError = 6,
    MetricsError = 7,
    ImageError = 8,
    InvalidArgument = 9,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FiguiMode {
    FaithfulAbsolute = 0,
    ResponsiveFlow = 1,
}

/// One metric as numerator, denominator and value (0 when the
/// denominator is 0).
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FiguiFraction {
    pub numerator: u64,
    pub denominator: u64,
    pub value: f64,
}

/// Parsed Figma document.
pub struct FiguiDocument {
    doc: FigmaDocument,
}

/// Intermediate representation of a page.
pub struct FiguiIr {
    ir: UiIr,
}

/// Metric report of one HTML document.
pub struct FiguiMetrics {
    report: MetricsReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

type FfiResult = Result<(), (FiguiStatus, String)>;

fn guard(f: impl FnOnce() -> FfiResult) -> FiguiStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            FiguiStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(p) => {
            let msg = p.downcast_ref::<&str>().map(|s| s.to_string()).or_else(|| p.downcast_ref::<String>().cloned()).unwrap_or_default();
            set_error(&format!("panic: {msg}"));
            FiguiStatus::Panic
        }
    }
}

fn null(what: &str) -> (FiguiStatus, String) {
    (FiguiStatus::NullArgument, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (FiguiStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| (FiguiStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn put<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> FfiResult {
    let c = CString::new(s).map_err(|_| (FiguiStatus::InvalidArgument, "output contains a nul byte".to_string()))?;
    *out = c.into_raw();
    Ok(())
}

/// Message of the last failed call on this thread, or null. Valid until
/// the next call on the same thread.
#[no_mangle]
pub extern "C" fn figui_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn figui_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a Figma file or node JSON (UTF-8, nul-terminated).
///
/// # Safety
/// `json` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn figui_document_parse(json: *const c_char, out: *mut *mut FiguiDocument) -> FiguiStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = str_arg(json, "json")?;
        let doc = parse_document(text.as_bytes()).map_err(|e| (FiguiStatus::ParseError, e.to_string()))?;
        put(out, FiguiDocument { doc });
        Ok(())
    })
}

/// # Safety
/// `doc` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn figui_document_free(doc: *mut FiguiDocument) {
    if !doc.is_null() {
        drop(Box::from_raw(doc));
    }
}

/// Runs the refinement pipeline with default settings and no asset files.
///
/// # Safety
/// `doc` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn figui_document_refine(doc: *const FiguiDocument, out: *mut *mut FiguiDocument) -> FiguiStatus {
    guard(|| {
        let d = doc.as_ref().ok_or_else(|| null("doc"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let (refined, _, _) = refine(d.doc.clone(), AssetStore::default(), &RefineConfig::default()).map_err(|e| (FiguiStatus::RefineError, e.to_string()))?;
        put(out, FiguiDocument { doc: refined });
        Ok(())
    })
}

/// Pretty JSON of the document. Free with [`figui_string_free`].
///
/// # Safety
/// `doc` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn figui_document_to_json(doc: *const FiguiDocument, out: *mut *mut c_char) -> FiguiStatus {
    guard(|| {
        let d = doc.as_ref().ok_or_else(|| null("doc"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s = String::from_utf8(serialize_document_pretty(&d.doc)).expect("JSON is UTF-8");
        put_string(out, s)
    })
}

/// # Safety
/// `doc` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn figui_ir_from_document(doc: *const FiguiDocument, out: *mut *mut FiguiIr) -> FiguiStatus {
    guard(|| {
        let d = doc.as_ref().ok_or_else(|| null("doc"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let ir = to_ir(&d.doc).map_err(|e| (FiguiStatus::IrError, e.to_string()))?;
        put(out, FiguiIr { ir });
        Ok(())
    })
}

/// # Safety
/// `ir` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn figui_ir_free(ir: *mut FiguiIr) {
    if !ir.is_null() {
        drop(Box::from_raw(ir));
    }
}

/// # Safety
/// `ir` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn figui_ir_to_json(ir: *const FiguiIr, out: *mut *mut c_char) -> FiguiStatus {
    guard(|| {
        let i = ir.as_ref().ok_or_else(|| null("ir"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        put_string(out, i.ir.to_json())
    })
}

/// Complete HTML document for the IR. Free with [`figui_string_free`].
///
/// # Safety
/// `ir` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn figui_generate_html(ir: *const FiguiIr, mode: FiguiMode, out: *mut *mut c_char) -> FiguiStatus {
    guard(|| {
        let i = ir.as_ref().ok_or_else(|| null("ir"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = CodegenConfig::for_mode(match mode {
            FiguiMode::FaithfulAbsolute => CodegenMode::FaithfulAbsolute,
            FiguiMode::ResponsiveFlow => CodegenMode::ResponsiveFlow,
        });
        let page = generate(&i.ir, &cfg).map_err(|e| (FiguiStatus::CodegenError, e.to_string()))?;
        put_string(out, page.html)
    })
}

/// Evaluates the eight code metrics of an HTML document.
///
/// # Safety
/// `html` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn figui_metrics_evaluate(html: *const c_char, out: *mut *mut FiguiMetrics) -> FiguiStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = str_arg(html, "html")?;
        let report = evaluate(text).map_err(|e| (FiguiStatus::MetricsError, e.to_string()))?;
        put(out, FiguiMetrics { report });
        Ok(())
    })
}

/// Reads one metric by name: RUR, APR, FU, BC, STR, AVU, ISR or CCR.
///
/// # Safety
/// `m` must be a live handle, `name` a valid C string, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn figui_metrics_get(m: *const FiguiMetrics, name: *const c_char, out: *mut FiguiFraction) -> FiguiStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("metrics"))?;
        let name = str_arg(name, "name")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let (_, f) = m
            .report
            .metrics()
            .into_iter()
            .find(|(n, _)| n.eq_ignore_ascii_case(name))
            .ok_or_else(|| (FiguiStatus::InvalidArgument, format!("unknown metric {name:?}")))?;
        *out = FiguiFraction { numerator: f.numerator, denominator: f.denominator, value: f.value };
        Ok(())
    })
}

/// # Safety
/// `m` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn figui_metrics_free(m: *mut FiguiMetrics) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

unsafe fn rgb_arg(data: *const u8, w: u32, h: u32, what: &str) -> Result<ImageBuffer, (FiguiStatus, String)> {
    if data.is_null() {
        return Err(null(what));
    }
    let len = (w as usize) * (h as usize) * 3;
    let bytes = std::slice::from_raw_parts(data, len).to_vec();
    ImageBuffer::from_raw(w, h, bytes).ok_or_else(|| (FiguiStatus::InvalidArgument, format!("{what}: bad dimensions")))
}

/// MAE of two row-major RGB8 buffers; `b` is resized to `a` when needed.
///
/// # Safety
/// `a` must point to `a_w * a_h * 3` bytes, `b` to `b_w * b_h * 3` bytes.
#[no_mangle]
pub unsafe extern "C" fn figui_mae_rgb(a: *const u8, a_w: u32, a_h: u32, b: *const u8, b_w: u32, b_h: u32, out: *mut f64) -> FiguiStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let ia = rgb_arg(a, a_w, a_h, "a")?;
        let ib = rgb_arg(b, b_w, b_h, "b")?;
        *out = mae(&ia, &ib).map_err(|e| (FiguiStatus::ImageError, e.to_string()))?;
        Ok(())
    })
}
