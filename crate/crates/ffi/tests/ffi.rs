use figui_ffi::*;
use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::ptr;

fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(rel)
}

fn last_error() -> String {
    let p = figui_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn take(s: *mut c_char) -> String {
    let out = CStr::from_ptr(s).to_string_lossy().into_owned();
    figui_string_free(s);
    out
}

#[test]
fn pipeline_through_the_c_abi() {
    let json = CString::new(std::fs::read(fixture("figma/m00/figma.json")).unwrap()).unwrap();
    unsafe {
        let mut doc = ptr::null_mut();
        assert_eq!(figui_document_parse(json.as_ptr(), &mut doc), FiguiStatus::Ok);
        assert!(figui_last_error_message().is_null());

        // No image files are passed in, so the hero image reference cannot
        // be resolved and refinement reports it.
        let mut refined = ptr::null_mut();
        assert_eq!(figui_document_refine(doc, &mut refined), FiguiStatus::RefineError);
        assert!(last_error().contains("img0"), "{}", last_error());

        let mut ir = ptr::null_mut();
        assert_eq!(figui_ir_from_document(doc, &mut ir), FiguiStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(figui_ir_to_json(ir, &mut s), FiguiStatus::Ok);
        assert!(figui::ir::UiIr::from_json(&take(s)).is_ok());

        let mut html = ptr::null_mut();
        assert_eq!(figui_generate_html(ir, FiguiMode::ResponsiveFlow, &mut html), FiguiStatus::Ok);
        let html_c = CString::new(take(html)).unwrap();
        let mut m = ptr::null_mut();
        assert_eq!(figui_metrics_evaluate(html_c.as_ptr(), &mut m), FiguiStatus::Ok);
        let mut apr = FiguiFraction::default();
        let name = CString::new("apr").unwrap();
        assert_eq!(figui_metrics_get(m, name.as_ptr(), &mut apr), FiguiStatus::Ok);
        assert_eq!(apr.numerator, 0);
        let bogus = CString::new("XYZ").unwrap();
        assert_eq!(figui_metrics_get(m, bogus.as_ptr(), &mut apr), FiguiStatus::InvalidArgument);

        let mut out = ptr::null_mut();
        assert_eq!(figui_document_to_json(doc, &mut out), FiguiStatus::Ok);
        assert!(take(out).contains("\"Hero image\""));

        figui_metrics_free(m);
        figui_ir_free(ir);
        figui_document_free(doc);
    }
}

#[test]
fn refine_without_images() {
    let page = r#"{"document": {"id": "0:1", "type": "FRAME", "name": "P", "absoluteBoundingBox": {"x": 10, "y": 10, "width": 100, "height": 100},
        "children": [{"id": "1:1", "type": "GROUP", "name": "g", "absoluteBoundingBox": {"x": 20, "y": 20, "width": 10, "height": 10},
            "children": [{"id": "1:2", "type": "RECTANGLE", "name": "r", "absoluteBoundingBox": {"x": 20, "y": 20, "width": 10, "height": 10},
                "fills": [{"type": "SOLID", "color": {"r": 1, "g": 0, "b": 0, "a": 1}}]}]}]}}"#;
    let json = CString::new(page).unwrap();
    unsafe {
        let mut doc = ptr::null_mut();
        assert_eq!(figui_document_parse(json.as_ptr(), &mut doc), FiguiStatus::Ok);
        let mut refined = ptr::null_mut();
        assert_eq!(figui_document_refine(doc, &mut refined), FiguiStatus::Ok);
        let mut out = ptr::null_mut();
        assert_eq!(figui_document_to_json(refined, &mut out), FiguiStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        // The group wrapper is flattened away and coordinates start at 0.
        assert_eq!(v["document"]["children"][0]["id"], "1:2");
        assert_eq!(v["document"]["absoluteBoundingBox"]["x"], 0.0);
        figui_document_free(refined);
        figui_document_free(doc);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut doc = ptr::null_mut();
        assert_eq!(figui_document_parse(ptr::null(), &mut doc), FiguiStatus::NullArgument);
        assert!(last_error().contains("json"));
        let bad = CString::new("{\"document\": 3}").unwrap();
        assert_eq!(figui_document_parse(bad.as_ptr(), &mut doc), FiguiStatus::ParseError);
        assert!(doc.is_null());
        let latin1 = [0xE9u8, 0];
        assert_eq!(figui_document_parse(latin1.as_ptr() as *const c_char, &mut doc), FiguiStatus::InvalidUtf8);
        let html = CString::new("<div><p></div>").unwrap();
        let mut m = ptr::null_mut();
        assert_eq!(figui_metrics_evaluate(html.as_ptr(), &mut m), FiguiStatus::MetricsError);
        assert!(last_error().contains("unparsable"));
        let mut out = ptr::null_mut();
        assert_eq!(figui_generate_html(ptr::null(), FiguiMode::FaithfulAbsolute, &mut out), FiguiStatus::NullArgument);
        // Freeing null is a no-op.
        figui_document_free(ptr::null_mut());
        figui_ir_free(ptr::null_mut());
        figui_metrics_free(ptr::null_mut());
        figui_string_free(ptr::null_mut());
    }
}

#[test]
fn mae_over_raw_buffers() {
    let black = [0u8; 2 * 2 * 3];
    let white = [255u8; 2 * 2 * 3];
    let mut d = -1.0;
    unsafe {
        assert_eq!(figui_mae_rgb(black.as_ptr(), 2, 2, white.as_ptr(), 2, 2, &mut d), FiguiStatus::Ok);
        assert_eq!(d, 1.0);
        assert_eq!(figui_mae_rgb(black.as_ptr(), 2, 2, black.as_ptr(), 2, 2, &mut d), FiguiStatus::Ok);
        assert_eq!(d, 0.0);
        assert_eq!(figui_mae_rgb(black.as_ptr(), 0, 0, white.as_ptr(), 2, 2, &mut d), FiguiStatus::ImageError);
        assert_eq!(figui_mae_rgb(ptr::null(), 2, 2, white.as_ptr(), 2, 2, &mut d), FiguiStatus::NullArgument);
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/figui.h")).unwrap();
    let src = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = src.lines().filter_map(|l| l.split("extern \"C\" fn ").nth(1)).map(|l| l.split('(').next().unwrap()).collect();
    assert!(exports.len() >= 14);
    for f in exports {
        assert!(header.contains(&format!("{f}(")), "{f} missing from figui.h");
    }
    assert!(header.contains("FIGUI_STATUS_PANIC = 99"));
}
