//! Software rasterizer for design documents. It draws what a faithful
//! render of the document would show for rectangles, ellipses, lines and
//! image fills (bitmaps and the rect/ellipse/line SVG subset written by
//! icon export), so documents can be compared before and after refinement
//! without a browser. Text, vector paths and effects are not drawn.

use super::{decode_image, ImageBuffer};
use crate::figma::{AssetStore, FigmaDocument, FigmaNode, NodeType, Paint, PaintType, Rect, Rgba};
use crate::refine::asset_id_for;
use regex::Regex;
use serde_json::Value;
use std::collections::HashMap;
use std::sync::OnceLock;

#[derive(Debug, thiserror::Error)]
pub enum PreviewError {
    #[error("page has no positive size")]
    EmptyPage,
    #[error("asset {0:?} is not in the store")]
    MissingAsset(String),
    #[error("asset {key:?} cannot be drawn: {message}")]
    BadAsset { key: String, message: String },
}

#[derive(Debug, Clone, Copy)]
enum Shape {
    Rect { r: Rect, radius: f64 },
    Ellipse { cx: f64, cy: f64, rx: f64, ry: f64 },
    Line { x1: f64, y1: f64, x2: f64, y2: f64, width: f64 },
}

impl Shape {
    fn bounds(&self) -> Rect {
        match *self {
            Shape::Rect { r, .. } => r,
            Shape::Ellipse { cx, cy, rx, ry } => Rect::new(cx - rx, cy - ry, 2.0 * rx, 2.0 * ry),
            Shape::Line { x1, y1, x2, y2, width } => {
                let h = width / 2.0;
                Rect::new(x1.min(x2) - h, y1.min(y2) - h, (x1 - x2).abs() + width, (y1 - y2).abs() + width)
            }
        }
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            Shape::Rect { r, radius } => {
                if x < r.x || y < r.y || x >= r.right() || y >= r.bottom() {
                    return false;
                }
                let rad = radius.min(r.width / 2.0).min(r.height / 2.0);
                if rad <= 0.0 {
                    return true;
                }
                let cx = x.clamp(r.x + rad, r.right() - rad);
                let cy = y.clamp(r.y + rad, r.bottom() - rad);
                (x - cx).powi(2) + (y - cy).powi(2) <= rad * rad
            }
            Shape::Ellipse { cx, cy, rx, ry } => {
                rx > 0.0 && ry > 0.0 && ((x - cx) / rx).powi(2) + ((y - cy) / ry).powi(2) <= 1.0
            }
            Shape::Line { x1, y1, x2, y2, width } => {
                let (dx, dy) = (x2 - x1, y2 - y1);
                let len2 = dx * dx + dy * dy;
                if len2 == 0.0 {
                    return false;
                }
                let t = ((x - x1) * dx + (y - y1) * dy) / len2;
                if !(0.0..=1.0).contains(&t) {
                    return false;
                }
                let (px, py) = (x1 + t * dx, y1 + t * dy);
                (x - px).powi(2) + (y - py).powi(2) <= (width / 2.0).powi(2)
            }
        }
    }

    /// Outer and inner outlines of a stroke centred on the shape edge.
    fn stroke_band(&self, w: f64) -> Option<(Shape, Option<Shape>)> {
        let h = w / 2.0;
        match *self {
            Shape::Rect { r, radius } => {
                let outer = Shape::Rect { r: Rect::new(r.x - h, r.y - h, r.width + w, r.height + w), radius: if radius > 0.0 { radius + h } else { 0.0 } };
                let inner = (r.width > w && r.height > w).then(|| Shape::Rect { r: Rect::new(r.x + h, r.y + h, r.width - w, r.height - w), radius: (radius - h).max(0.0) });
                Some((outer, inner))
            }
            Shape::Ellipse { cx, cy, rx, ry } => {
                let outer = Shape::Ellipse { cx, cy, rx: rx + h, ry: ry + h };
                let inner = (rx > h && ry > h).then_some(Shape::Ellipse { cx, cy, rx: rx - h, ry: ry - h });
                Some((outer, inner))
            }
            Shape::Line { .. } => None,
        }
    }
}

/// Colour in `[0, 1]` plus coverage alpha.
type Color = ([f64; 3], f64);

enum Decoded {
    Bitmap(ImageBuffer),
    Svg { w: f64, h: f64, items: Vec<SvgItem> },
}

struct SvgItem {
    shape: Shape,
    fill: Option<Color>,
    stroke: Option<(Color, f64)>,
}

struct Canvas<'a> {
    w: usize,
    h: usize,
    ox: f64,
    oy: f64,
    scale: f64,
    px: Vec<[f64; 3]>,
    store: &'a AssetStore,
    cache: HashMap<String, Decoded>,
}

/// Draws the document at `scale` device pixels per design pixel onto a
/// white canvas covering the root frame.
pub fn rasterize(doc: &FigmaDocument, store: &AssetStore, scale: f64) -> Result<ImageBuffer, PreviewError> {
    let root = doc.root.bounding_box.ok_or(PreviewError::EmptyPage)?;
    let (w, h) = ((root.width * scale).round(), (root.height * scale).round());
    if !(w >= 1.0 && h >= 1.0) {
        return Err(PreviewError::EmptyPage);
    }
    let (w, h) = (w as usize, h as usize);
    let mut c = Canvas { w, h, ox: root.x, oy: root.y, scale, px: vec![[1.0; 3]; w * h], store, cache: HashMap::new() };
    c.node(&doc.root, root, 1.0)?;
    Ok(ImageBuffer::from_fn(w as u32, h as u32, |x, y| {
        let p = c.px[y as usize * w + x as usize];
        image::Rgb(p.map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8))
    }))
}

fn paint_color(p: &Paint) -> Option<Rgba> {
    if !p.visible() {
        return None;
    }
    let c = match p.paint_type {
        PaintType::Solid => p.color?,
        PaintType::Gradient(_) => p.first_stop_color()?,
        _ => return None,
    };
    Some(c.with_alpha(c.a * p.opacity()))
}

fn clips(n: &FigmaNode) -> bool {
    matches!(n.node_type, NodeType::Frame | NodeType::Component | NodeType::Instance)
        && n.extra.get("clipsContent").and_then(Value::as_bool).unwrap_or(true)
}

impl Canvas<'_> {
    fn node(&mut self, n: &FigmaNode, clip: Rect, opacity: f64) -> Result<(), PreviewError> {
        let opacity = opacity * n.opacity;
        if !n.visible || opacity <= 0.0 {
            return Ok(());
        }
        if let Some(b) = n.bounding_box {
            self.own_paint(n, b, clip, opacity)?;
        }
        let clip = match n.bounding_box {
            Some(b) if clips(n) => clip.intersect(&b),
            _ => clip,
        };
        for c in &n.children {
            self.node(c, clip, opacity)?;
        }
        Ok(())
    }

    fn own_paint(&mut self, n: &FigmaNode, b: Rect, clip: Rect, opacity: f64) -> Result<(), PreviewError> {
        let stroke_w = n.extra.get("strokeWeight").and_then(Value::as_f64).unwrap_or(1.0);
        let shape = match n.node_type {
            NodeType::Text | NodeType::Vector | NodeType::Star | NodeType::RegularPolygon | NodeType::BooleanOperation => return Ok(()),
            NodeType::Ellipse => Shape::Ellipse { cx: b.x + b.width / 2.0, cy: b.y + b.height / 2.0, rx: b.width / 2.0, ry: b.height / 2.0 },
            NodeType::Line => {
                let color = n.strokes.iter().chain(&n.fills).find_map(paint_color).unwrap_or(Rgba::BLACK);
                let line = Shape::Line { x1: b.x, y1: b.y, x2: b.right(), y2: b.bottom(), width: stroke_w };
                self.fill(line, clip, (rgb(color), color.a * opacity));
                return Ok(());
            }
            NodeType::SvgAsset => {
                let key = n.extra.get("assetId").and_then(Value::as_str).map(str::to_string).unwrap_or_else(|| asset_id_for(&n.id));
                return self.image(&key, b, 0.0, clip, opacity);
            }
            _ => Shape::Rect { r: b, radius: n.corner_radius.unwrap_or(0.0) },
        };
        let radius = match shape {
            Shape::Rect { radius, .. } => radius,
            _ => 0.0,
        };
        for p in n.fills.iter().filter(|p| p.visible()) {
            if p.is_image() {
                if let (Some(key), Shape::Rect { .. }) = (p.image_ref.as_deref(), shape) {
                    self.image(key, b, radius, clip, opacity * p.opacity())?;
                }
            } else if let Some(c) = paint_color(p) {
                self.fill(shape, clip, (rgb(c), c.a * opacity));
            }
        }
        if let Some(c) = n.strokes.iter().find_map(paint_color) {
            self.stroke(shape, stroke_w, clip, (rgb(c), c.a * opacity));
        }
        Ok(())
    }

    /// Pixel index range whose centres may fall inside `r`.
    fn span(&self, r: Rect) -> Option<(usize, usize, usize, usize)> {
        let x0 = (((r.x - self.ox) * self.scale).floor().max(0.0)) as usize;
        let y0 = (((r.y - self.oy) * self.scale).floor().max(0.0)) as usize;
        let x1 = (((r.right() - self.ox) * self.scale).ceil().min(self.w as f64)).max(0.0) as usize;
        let y1 = (((r.bottom() - self.oy) * self.scale).ceil().min(self.h as f64)).max(0.0) as usize;
        (x0 < x1 && y0 < y1).then_some((x0, y0, x1, y1))
    }

    fn center(&self, i: usize, j: usize) -> (f64, f64) {
        (self.ox + (i as f64 + 0.5) / self.scale, self.oy + (j as f64 + 0.5) / self.scale)
    }

    fn blend(&mut self, i: usize, j: usize, (c, a): Color) {
        let p = &mut self.px[j * self.w + i];
        for k in 0..3 {
            p[k] = p[k] * (1.0 - a) + c[k] * a;
        }
    }

    fn covers(&self, shape: &Shape, hole: Option<&Shape>, clip: &Rect, x: f64, y: f64) -> bool {
        x >= clip.x && y >= clip.y && x < clip.right() && y < clip.bottom() && shape.contains(x, y) && !hole.is_some_and(|h| h.contains(x, y))
    }

    fn fill_band(&mut self, shape: Shape, hole: Option<Shape>, clip: Rect, color: Color) {
        if color.1 <= 0.0 {
            return;
        }
        let Some((x0, y0, x1, y1)) = self.span(shape.bounds().intersect(&clip)) else { return };
        for j in y0..y1 {
            for i in x0..x1 {
                let (x, y) = self.center(i, j);
                if self.covers(&shape, hole.as_ref(), &clip, x, y) {
                    self.blend(i, j, color);
                }
            }
        }
    }

    fn fill(&mut self, shape: Shape, clip: Rect, color: Color) {
        self.fill_band(shape, None, clip, color);
    }

    fn stroke(&mut self, shape: Shape, w: f64, clip: Rect, color: Color) {
        if w <= 0.0 {
            return;
        }
        if let Some((outer, inner)) = shape.stroke_band(w) {
            self.fill_band(outer, inner, clip, color);
        } else {
            self.fill(shape, clip, color);
        }
    }

    fn image(&mut self, key: &str, b: Rect, radius: f64, clip: Rect, opacity: f64) -> Result<(), PreviewError> {
        if !self.cache.contains_key(key) {
            let decoded = self.decode(key)?;
            self.cache.insert(key.to_string(), decoded);
        }
        let decoded = self.cache.remove(key).expect("cached");
        match &decoded {
            Decoded::Bitmap(img) => {
                let shape = Shape::Rect { r: b, radius };
                if let Some((x0, y0, x1, y1)) = self.span(b.intersect(&clip)) {
                    let (iw, ih) = (img.width() as f64, img.height() as f64);
                    for j in y0..y1 {
                        for i in x0..x1 {
                            let (x, y) = self.center(i, j);
                            if !self.covers(&shape, None, &clip, x, y) || b.width <= 0.0 || b.height <= 0.0 {
                                continue;
                            }
                            let u = (((x - b.x) / b.width * iw) as u32).min(img.width() - 1);
                            let v = (((y - b.y) / b.height * ih) as u32).min(img.height() - 1);
                            let p = img.get_pixel(u, v).0;
                            self.blend(i, j, (p.map(|c| c as f64 / 255.0), opacity));
                        }
                    }
                }
            }
            Decoded::Svg { w, h, items } => {
                let (sx, sy) = (b.width / w, b.height / h);
                let clip = clip.intersect(&b);
                for it in items {
                    let shape = map_shape(it.shape, b.x, b.y, sx, sy);
                    if let Some((c, a)) = it.fill {
                        self.fill(shape, clip, (c, a * opacity));
                    }
                    if let Some(((c, a), sw)) = it.stroke {
                        self.stroke(shape, sw * sx, clip, (c, a * opacity));
                    }
                }
            }
        }
        self.cache.insert(key.to_string(), decoded);
        Ok(())
    }

    fn decode(&self, key: &str) -> Result<Decoded, PreviewError> {
        let (_, bytes) = self.store.resolve(key).ok_or_else(|| PreviewError::MissingAsset(key.to_string()))?;
        let bad = |message: String| PreviewError::BadAsset { key: key.to_string(), message };
        if bytes.starts_with(b"\x89PNG") || bytes.starts_with(&[0xFF, 0xD8]) {
            return decode_image(bytes).map(Decoded::Bitmap).map_err(|e| bad(e.to_string()));
        }
        let text = std::str::from_utf8(bytes).map_err(|e| bad(e.to_string()))?;
        parse_svg(text).ok_or_else(|| bad("not an SVG document".into()))
    }
}

fn rgb(c: Rgba) -> [f64; 3] {
    [c.r, c.g, c.b]
}

fn map_shape(s: Shape, ox: f64, oy: f64, sx: f64, sy: f64) -> Shape {
    match s {
        Shape::Rect { r, radius } => Shape::Rect { r: Rect::new(ox + r.x * sx, oy + r.y * sy, r.width * sx, r.height * sy), radius: radius * sx },
        Shape::Ellipse { cx, cy, rx, ry } => Shape::Ellipse { cx: ox + cx * sx, cy: oy + cy * sy, rx: rx * sx, ry: ry * sy },
        Shape::Line { x1, y1, x2, y2, width } => Shape::Line { x1: ox + x1 * sx, y1: oy + y1 * sy, x2: ox + x2 * sx, y2: oy + y2 * sy, width: width * sx },
    }
}

fn hex_color(s: &str) -> Option<[f64; 3]> {
    let h = s.strip_prefix('#')?;
    if h.len() != 6 {
        return None;
    }
    let c = |i: usize| u8::from_str_radix(&h[i..i + 2], 16).ok().map(|v| v as f64 / 255.0);
    Some([c(0)?, c(2)?, c(4)?])
}

fn parse_svg(text: &str) -> Option<Decoded> {
    static ELEMENT: OnceLock<Regex> = OnceLock::new();
    static ATTR: OnceLock<Regex> = OnceLock::new();
    let element = ELEMENT.get_or_init(|| Regex::new(r"<(svg|rect|ellipse|line|path|circle|polygon)\b([^>]*)>").unwrap());
    let attr = ATTR.get_or_init(|| Regex::new(r#"([A-Za-z][A-Za-z0-9-]*)="([^"]*)""#).unwrap());
    let mut size = None;
    let mut items = Vec::new();
    for cap in element.captures_iter(text) {
        let attrs: HashMap<&str, &str> = attr.captures_iter(cap.get(2).unwrap().as_str()).map(|a| (a.get(1).unwrap().as_str(), a.get(2).unwrap().as_str())).collect();
        let num = |k: &str| attrs.get(k).and_then(|v| v.trim_end_matches("px").parse::<f64>().ok());
        let tag = &cap[1];
        if tag == "svg" {
            let vb: Option<Vec<f64>> = attrs.get("viewBox").map(|v| v.split([' ', ',']).filter(|s| !s.is_empty()).filter_map(|s| s.parse().ok()).collect());
            size = match vb.as_deref() {
                Some([_, _, w, h]) => Some((*w, *h)),
                _ => Some((num("width")?, num("height")?)),
            };
            continue;
        }
        let opacity = num("opacity").unwrap_or(1.0);
        let shape = match tag {
            "rect" => (|| Some(Shape::Rect { r: Rect::new(num("x").unwrap_or(0.0), num("y").unwrap_or(0.0), num("width")?, num("height")?), radius: num("rx").unwrap_or(0.0) }))(),
            "ellipse" => (|| Some(Shape::Ellipse { cx: num("cx").unwrap_or(0.0), cy: num("cy").unwrap_or(0.0), rx: num("rx")?, ry: num("ry")? }))(),
            "circle" => num("r").map(|r| Shape::Ellipse { cx: num("cx").unwrap_or(0.0), cy: num("cy").unwrap_or(0.0), rx: r, ry: r }),
            "line" => Some(Shape::Line {
                x1: num("x1").unwrap_or(0.0),
                y1: num("y1").unwrap_or(0.0),
                x2: num("x2").unwrap_or(0.0),
                y2: num("y2").unwrap_or(0.0),
                width: num("stroke-width").unwrap_or(1.0),
            }),
            _ => None,
        };
        let Some(shape) = shape else {
            log::debug!("preview skips svg <{tag}>");
            continue;
        };
        let fill = match attrs.get("fill") {
            Some(&"none") => None,
            Some(v) => hex_color(v).map(|c| (c, num("fill-opacity").unwrap_or(1.0) * opacity)),
            None => Some(([0.0; 3], opacity)),
        };
        let stroke = attrs.get("stroke").and_then(|v| hex_color(v)).map(|c| ((c, num("stroke-opacity").unwrap_or(1.0) * opacity), num("stroke-width").unwrap_or(1.0)));
        match shape {
            Shape::Line { .. } => {
                if let Some((c, _)) = stroke {
                    items.push(SvgItem { shape, fill: Some(c), stroke: None });
                }
            }
            _ => items.push(SvgItem { shape, fill, stroke }),
        }
    }
    let (w, h) = size?;
    (w > 0.0 && h > 0.0).then_some(Decoded::Svg { w, h, items })
}
