#![allow(dead_code)]

use std::path::PathBuf;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

/// Hand-counted metric fixture: file stem and `(numerator, denominator)`
/// per metric in report order.
pub struct MetricCase {
    pub name: String,
    pub html: String,
    pub expected: Vec<(String, u64, u64)>,
}

pub fn metric_cases() -> Vec<MetricCase> {
    let dir = fixtures().join("metrics");
    let mut rdr = csv::Reader::from_path(dir.join("expected.csv")).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(str::to_string).collect();
    rdr.records()
        .map(|r| {
            let r = r.unwrap();
            let name = r[0].to_string();
            let html = std::fs::read_to_string(dir.join(format!("{name}.html"))).unwrap();
            let expected = header[1..]
                .iter()
                .zip(r.iter().skip(1))
                .map(|(m, cell)| {
                    let (n, d) = cell.split_once('/').unwrap();
                    (m.clone(), n.parse().unwrap(), d.parse().unwrap())
                })
                .collect();
            MetricCase { name, html, expected }
        })
        .collect()
}

use figui::figma::{parse_document, AssetKind, AssetStore, FigmaDocument, FigmaNode, NodeType, Paint, Rgba};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

/// The committed Figma corpus: `(sample id, document, raw asset store)`.
pub fn figma_corpus() -> Vec<(String, FigmaDocument, AssetStore)> {
    let dir = fixtures().join("figma");
    let mut ids: Vec<String> = std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    ids.sort();
    ids.into_iter()
        .map(|id| {
            let d = dir.join(&id);
            let doc = parse_document(&std::fs::read(d.join("figma.json")).unwrap()).unwrap();
            let store = AssetStore::load_raw_dir(&d.join("images")).unwrap();
            (id, doc, store)
        })
        .collect()
}

pub fn tiny_png(rgb: [u8; 3]) -> Vec<u8> {
    let img = image::RgbImage::from_pixel(4, 4, image::Rgb(rgb));
    let mut out = std::io::Cursor::new(Vec::new());
    img.write_to(&mut out, image::ImageFormat::Png).unwrap();
    out.into_inner()
}

fn frac(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo..hi) * 10_000.0).round() / 10_000.0
}

fn color(rng: &mut ChaCha8Rng) -> Rgba {
    Rgba::from_rgb8(rng.random(), rng.random(), rng.random())
}

struct Builder {
    rng: ChaCha8Rng,
    next: usize,
    images: Vec<String>,
}

impl Builder {
    fn id(&mut self) -> String {
        self.next += 1;
        format!("{}:{}", self.next / 10 + 1, self.next % 10)
    }

    fn node(&mut self, depth: usize, x: f64, y: f64, w: f64, h: f64) -> FigmaNode {
        let r = &mut self.rng;
        let leaf = depth >= 3 || r.random_bool(0.4);
        let ty = if leaf {
            [NodeType::Rectangle, NodeType::Ellipse, NodeType::Text, NodeType::Vector, NodeType::Line][r.random_range(0..5)].clone()
        } else {
            [NodeType::Frame, NodeType::Group, NodeType::Group][r.random_range(0..3)].clone()
        };
        let id = self.id();
        let r = &mut self.rng;
        let name = if r.random_bool(0.1) { "icon merge".to_string() } else { format!("n{id}") };
        let (cw, ch) = if r.random_bool(0.08) { (0.0, frac(r, 0.0, h)) } else { (frac(r, 1.0, w.max(2.0)), frac(r, 1.0, h.max(2.0))) };
        let (cx, cy) = (x + frac(r, 0.0, (w - cw).max(0.001)), y + frac(r, 0.0, (h - ch).max(0.001)));
        let mut n = FigmaNode::new(id, name, ty.clone()).with_box(cx, cy, cw, ch);
        n.visible = !r.random_bool(0.1);
        if r.random_bool(0.2) {
            n.opacity = frac(r, 0.1, 1.0);
        }
        if r.random_bool(0.7) {
            n.fills.push(Paint::solid(color(r)));
        }
        if leaf && ty == NodeType::Rectangle && r.random_bool(0.2) && !self.images.is_empty() {
            let i = r.random_range(0..self.images.len());
            n.fills = vec![Paint::image(self.images[i].clone())];
        }
        if r.random_bool(0.2) {
            n.corner_radius = Some(frac(r, 0.0, 12.0));
        }
        if r.random_bool(0.2) {
            n.extra.insert("exportSettings".into(), Value::Array(vec![]));
            n.extra.insert("locked".into(), Value::Bool(true));
        }
        if ty == NodeType::Text {
            n.characters = Some(format!("text {}", n.id));
        }
        if !leaf {
            let k = self.rng.random_range(1..5);
            n.children = (0..k).map(|_| self.node(depth + 1, cx, cy, cw, ch)).collect();
        }
        n
    }
}

/// Random document with hidden, empty, occluded, nested, icon-like and
/// image-filled nodes at fractional coordinates, plus its asset store.
pub fn random_doc(seed: u64) -> (FigmaDocument, AssetStore) {
    let mut b = Builder { rng: ChaCha8Rng::seed_from_u64(seed), next: 0, images: vec!["hashA".into(), "hashB".into()] };
    let (ox, oy) = (frac(&mut b.rng, -500.0, 500.0), frac(&mut b.rng, -500.0, 500.0));
    let (w, h) = (frac(&mut b.rng, 200.0, 500.0), frac(&mut b.rng, 300.0, 900.0));
    let k = b.rng.random_range(2..7);
    let children = (0..k).map(|_| b.node(1, ox, oy, w, h)).collect();
    let mut root = FigmaNode::new("0:1", "Page", NodeType::Frame).with_box(ox, oy, w, h).with_children(children);
    root.fills.push(Paint::solid(Rgba::from_rgb8(255, 255, 255)));
    let mut store = AssetStore::new();
    store.insert("hashA", tiny_png([200, 10, 10]), AssetKind::Png);
    store.insert("hashB", tiny_png([10, 10, 200]), AssetKind::Png);
    (FigmaDocument::new(root), store)
}

/// NONE-layout page built from vertically stacked sections, each holding a
/// horizontally aligned row, so stacking can be recovered from geometry.
pub fn none_layout_design(i: u64) -> FigmaDocument {
    let mut rng = ChaCha8Rng::seed_from_u64(1000 + i);
    let width = 375.0;
    let mut y = 24.0;
    let mut sections = Vec::new();
    let n_sections = rng.random_range(3..6);
    for s in 0..n_sections {
        let h = [48.0, 64.0, 80.0][rng.random_range(0..3)];
        let n_items = rng.random_range(2..4);
        let item_w = (width - 32.0 - 16.0 * (n_items as f64 + 1.0)) / n_items as f64;
        let mut items = Vec::new();
        for k in 0..n_items {
            let x = 16.0 + 16.0 + k as f64 * (item_w + 16.0);
            let ih = h - 16.0;
            let id = format!("{s}:{}", k + 1);
            let item = if k == 0 {
                let mut t = FigmaNode::text(id, "Label", format!("Item {s}.{k}")).with_box(x, y + 8.0, item_w, ih);
                t.fills.push(Paint::solid(Rgba::from_rgb8(20, 20, 30)));
                t
            } else {
                let mut r = FigmaNode::new(id, "Button", NodeType::Rectangle).with_box(x, y + 8.0, item_w, ih).with_fill(Paint::solid(color(&mut rng)));
                r.corner_radius = Some(8.0);
                r
            };
            items.push(item);
        }
        let section = FigmaNode::new(format!("{s}:0"), format!("Section {s}"), NodeType::Frame)
            .with_box(16.0, y, width - 32.0, h)
            .with_fill(Paint::solid(Rgba::from_rgb8(245, 245, 250)))
            .with_children(items);
        sections.push(section);
        y += h + 16.0;
    }
    let root = FigmaNode::new("0:0", "Page", NodeType::Frame)
        .with_box(0.0, 0.0, width, y + 8.0)
        .with_fill(Paint::solid(Rgba::from_rgb8(255, 255, 255)))
        .with_children(sections);
    FigmaDocument::new(root)
}

/// `python3` when it can run, for the stand-in renderer and sidecar.
pub fn python() -> Option<&'static str> {
    let ok = std::process::Command::new("python3").arg("--version").output().is_ok_and(|o| o.status.success());
    if !ok {
        eprintln!("python3 not found; skipping");
    }
    ok.then_some("python3")
}

pub fn fake_renderer_command() -> Option<String> {
    let script = fixtures().join("bin/fake_renderer.py");
    Some(format!("{} '{}' {{input_url}} {{width}} {{height}} {{output_png}}", python()?, script.display()))
}

pub fn fake_sidecar_command() -> Option<String> {
    let script = fixtures().join("bin/fake_sidecar.py");
    Some(format!("{} '{}'", python()?, script.display()))
}
