mod common;

use figui::visual::{load_image, mae, render_page, render_page_to, RendererSpec, Sidecar, SidecarSpec, VisualError};
use std::fs;
use std::path::Path;

fn page(dir: &Path, name: &str, body_style: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, format!("<!DOCTYPE html><html><head></head><body style=\"{body_style}\"></body></html>\n")).unwrap();
    p
}

fn renderer() -> Option<RendererSpec> {
    Some(RendererSpec { command: Some(common::fake_renderer_command()?), timeout_secs: 20, ..Default::default() })
}

#[test]
fn solid_red_page_renders_red() {
    let Some(spec) = renderer() else { return };
    let dir = tempfile::tempdir().unwrap();
    let html = page(dir.path(), "red page.html", "background-color: #ff0000");
    let img = render_page(&html, (100.0, 80.0), &spec).unwrap();
    let close = img.pixels().filter(|p| p[0] >= 247 && p[1] <= 8 && p[2] <= 8).count();
    assert!(close as f64 >= 0.99 * (img.width() * img.height()) as f64);
}

#[test]
fn screenshot_is_twice_the_design_size() {
    let Some(spec) = renderer() else { return };
    let dir = tempfile::tempdir().unwrap();
    let html = page(dir.path(), "index.html", "");
    let out = dir.path().join("shot.png");
    let img = render_page_to(&html, (375.0, 812.0), &spec, &out).unwrap();
    assert_eq!(img.dimensions(), (750, 1624));
    assert_eq!(load_image(&out).unwrap().dimensions(), (750, 1624));
}

#[test]
fn missing_page_is_an_error() {
    let Some(spec) = renderer() else { return };
    let err = render_page(Path::new("/nonexistent/index.html"), (10.0, 10.0), &spec).unwrap_err();
    assert!(matches!(err, VisualError::RendererUnavailable(_)), "{err}");
}

#[test]
fn renderer_failures() {
    let dir = tempfile::tempdir().unwrap();
    let html = page(dir.path(), "index.html", "");
    let failing = RendererSpec { command: Some("sh -c 'echo broken >&2; exit 3'".into()), ..Default::default() };
    match render_page(&html, (10.0, 10.0), &failing).unwrap_err() {
        VisualError::RendererUnavailable(m) => assert!(m.contains("broken"), "{m}"),
        e => panic!("{e}"),
    }
    let slow = RendererSpec { command: Some("sleep 5".into()), timeout_secs: 1, ..Default::default() };
    assert!(matches!(render_page(&html, (10.0, 10.0), &slow), Err(VisualError::RenderTimeout(1))));
    let silent = RendererSpec { command: Some("true".into()), ..Default::default() };
    assert!(matches!(render_page(&html, (10.0, 10.0), &silent), Err(VisualError::DecodeFailure(_))));
}

#[test]
fn mae_between_rendered_pages() {
    let Some(spec) = renderer() else { return };
    let dir = tempfile::tempdir().unwrap();
    let black = render_page(&page(dir.path(), "a.html", "background: #000000"), (8.0, 8.0), &spec).unwrap();
    let grey = render_page(&page(dir.path(), "b.html", "background: #808080"), (4.0, 4.0), &spec).unwrap();
    // The second image is resized to the first; a flat colour survives that.
    assert!((mae(&black, &grey).unwrap() - 128.0 / 255.0).abs() < 1e-12);
}

fn sidecar() -> Option<Sidecar> {
    Some(Sidecar::spawn(&SidecarSpec { command: Some(common::fake_sidecar_command()?), timeout_secs: 20 }).unwrap())
}

#[test]
fn sidecar_contract() {
    let Some(mut sc) = sidecar() else { return };
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.png");
    let b = dir.path().join("b.png");
    fs::write(&a, common::tiny_png([250, 0, 0])).unwrap();
    fs::write(&b, common::tiny_png([0, 0, 250])).unwrap();
    let vs = sc.embed(&[&a, &b, &a]).unwrap();
    assert_eq!(vs.len(), 3);
    for v in &vs {
        assert!((v.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs() < 1e-6);
    }
    assert!((sc.ves(&a, &a).unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(sc.ves(&a, &b).unwrap(), sc.ves(&b, &a).unwrap());
    // The stand-in answers unreadable paths with an error object.
    assert!(matches!(sc.embed(&[&dir.path().join("missing.png")]), Err(VisualError::ProtocolError(_))));
}

#[test]
fn sidecar_protocol_violations() {
    let garbage = SidecarSpec { command: Some("sh -c 'while read l; do echo not-json; done'".into()), timeout_secs: 10 };
    let mut sc = Sidecar::spawn(&garbage).unwrap();
    assert!(matches!(sc.embed(&[Path::new("x.png")]), Err(VisualError::ProtocolError(_))));

    let short = SidecarSpec { command: Some(r#"sh -c 'while read l; do echo "{\"dim\": 2, \"vectors\": [[1, 0]]}"; done'"#.into()), timeout_secs: 10 };
    let mut sc = Sidecar::spawn(&short).unwrap();
    assert!(matches!(sc.embed(&[Path::new("a"), Path::new("b")]), Err(VisualError::ProtocolError(_))));

    let dead = SidecarSpec { command: Some("true".into()), timeout_secs: 5 };
    let mut sc = Sidecar::spawn(&dead).unwrap();
    assert!(sc.embed(&[Path::new("a")]).is_err());

    assert!(matches!(Sidecar::spawn(&SidecarSpec::default()), Err(VisualError::SidecarUnavailable(_))));
}
