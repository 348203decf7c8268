use super::{RefineConfig, RefineReport};
use crate::figma::{FigmaDocument, FigmaNode, NodeType, Paint, PaintType, Rect, Rgba};
use serde_json::Value;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub struct ExportedIcon {
    pub asset_id: String,
    pub svg: Vec<u8>,
}

/// Replaces every maximal icon-like subtree by an SVG_ASSET node and
/// returns the SVG for each, keyed by the asset id stored on the node.
pub fn abstract_icons(mut doc: FigmaDocument, config: &RefineConfig) -> (FigmaDocument, RefineReport, Vec<ExportedIcon>) {
    let marker = config.icon_name_marker.to_lowercase();
    let mut icons = Vec::new();
    for c in &mut doc.root.children {
        visit(c, &marker, &mut icons);
    }
    let report = RefineReport { merged_icons: icons.len(), ..Default::default() };
    (doc, report, icons)
}

fn visit(n: &mut FigmaNode, marker: &str, icons: &mut Vec<ExportedIcon>) {
    if qualifies(n, marker) {
        let svg = export_icon_svg(n);
        let asset_id = asset_id_for(&n.id);
        let mut node = FigmaNode::new(n.id.clone(), n.name.clone(), NodeType::SvgAsset);
        node.opacity = n.opacity;
        node.bounding_box = n.bounding_box.or_else(|| leaf_union(n));
        node.extra.insert("assetId".into(), Value::String(asset_id.clone()));
        *n = node;
        icons.push(ExportedIcon { asset_id, svg });
        return;
    }
    for c in &mut n.children {
        visit(c, marker, icons);
    }
}

pub(crate) fn asset_id_for(node_id: &str) -> String {
    let safe: String = node_id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '-' }).collect();
    format!("svg-{safe}")
}

fn has_marker(n: &FigmaNode, marker: &str) -> bool {
    !marker.is_empty() && n.name.to_lowercase().contains(marker)
}

fn has_image_paint(n: &FigmaNode) -> bool {
    n.fills.iter().chain(n.strokes.iter()).any(Paint::is_image)
}

fn qualifies(n: &FigmaNode, marker: &str) -> bool {
    if matches!(n.node_type, NodeType::Text | NodeType::SvgAsset) || has_image_paint(n) || !n.visible {
        return false;
    }
    if n.children.is_empty() || n.node_type == NodeType::BooleanOperation {
        let operands_ok = n.children.iter().all(|c| qualifies(c, marker));
        return (n.node_type.is_icon_shape() || has_marker(n, marker)) && operands_ok;
    }
    (n.node_type.is_container() || has_marker(n, marker)) && n.children.iter().all(|c| qualifies(c, marker))
}

fn leaf_union(n: &FigmaNode) -> Option<Rect> {
    let mut acc: Option<Rect> = n.bounding_box;
    for c in &n.children {
        if let Some(r) = leaf_union(c) {
            acc = Some(match acc {
                None => r,
                Some(a) => {
                    let x = a.x.min(r.x);
                    let y = a.y.min(r.y);
                    Rect::new(x, y, a.right().max(r.right()) - x, a.bottom().max(r.bottom()) - y)
                }
            });
        }
    }
    acc
}

pub(crate) fn fmt_num(v: f64) -> String {
    let r = (v * 1000.0).round() / 1000.0;
    let r = if r == 0.0 { 0.0 } else { r };
    let s = format!("{r:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
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

fn fill_attrs(n: &FigmaNode, out: &mut String) {
    match n.fills.iter().find_map(paint_color) {
        Some(c) => {
            let _ = write!(out, " fill=\"{}\"", c.hex());
            if c.a < 1.0 {
                let _ = write!(out, " fill-opacity=\"{}\"", fmt_num(c.a));
            }
        }
        None => out.push_str(" fill=\"none\""),
    }
    if let Some(c) = n.strokes.iter().find_map(paint_color) {
        let w = n.extra.get("strokeWeight").and_then(Value::as_f64).unwrap_or(1.0);
        let _ = write!(out, " stroke=\"{}\" stroke-width=\"{}\"", c.hex(), fmt_num(w));
        if c.a < 1.0 {
            let _ = write!(out, " stroke-opacity=\"{}\"", fmt_num(c.a));
        }
    }
}

fn path_data(n: &FigmaNode) -> Vec<String> {
    let mut out = Vec::new();
    for (key, field) in [("fillGeometry", "path"), ("vectorPaths", "data")] {
        if let Some(Value::Array(items)) = n.extra.get(key) {
            out.extend(items.iter().filter_map(|g| g.get(field)?.as_str().map(str::to_string)));
        }
    }
    out
}

fn escape_attr(s: &str) -> String {
    s.replace('&', "&amp;").replace('"', "&quot;").replace('<', "&lt;")
}

/// Emits `n` (not the subtree root) and its descendants in paint order.
fn emit(n: &FigmaNode, origin: (f64, f64), opacity: f64, out: &mut String) {
    let opacity = opacity * n.opacity;
    let b = n.bounding_box.unwrap_or(Rect::new(origin.0, origin.1, 0.0, 0.0));
    let (x, y) = (b.x - origin.0, b.y - origin.1);
    let mut attrs = String::new();
    fill_attrs(n, &mut attrs);
    if opacity < 1.0 {
        let _ = write!(attrs, " opacity=\"{}\"", fmt_num(opacity));
    }
    let is_leaf = n.children.is_empty() || n.node_type == NodeType::BooleanOperation;
    if is_leaf {
        let paths = path_data(n);
        if !paths.is_empty() {
            for d in paths {
                let _ = writeln!(
                    out,
                    "  <path d=\"{}\" transform=\"translate({} {})\"{attrs}/>",
                    escape_attr(&d),
                    fmt_num(x),
                    fmt_num(y)
                );
            }
            return;
        }
        match n.node_type {
            NodeType::Ellipse => {
                let _ = writeln!(
                    out,
                    "  <ellipse cx=\"{}\" cy=\"{}\" rx=\"{}\" ry=\"{}\"{attrs}/>",
                    fmt_num(x + b.width / 2.0),
                    fmt_num(y + b.height / 2.0),
                    fmt_num(b.width / 2.0),
                    fmt_num(b.height / 2.0)
                );
            }
            NodeType::Line => {
                let color = n
                    .strokes
                    .iter()
                    .chain(n.fills.iter())
                    .find_map(paint_color)
                    .unwrap_or(Rgba::BLACK);
                let w = n.extra.get("strokeWeight").and_then(Value::as_f64).unwrap_or(1.0);
                let mut line_attrs = format!(" stroke=\"{}\" stroke-width=\"{}\"", color.hex(), fmt_num(w));
                if opacity < 1.0 {
                    let _ = write!(line_attrs, " opacity=\"{}\"", fmt_num(opacity));
                }
                let _ = writeln!(
                    out,
                    "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"{line_attrs}/>",
                    fmt_num(x),
                    fmt_num(y),
                    fmt_num(x + b.width),
                    fmt_num(y + b.height)
                );
            }
            _ => rect_element(n, x, y, &b, &attrs, out),
        }
        return;
    }
    if !n.fills.is_empty() || !n.strokes.is_empty() {
        rect_element(n, x, y, &b, &attrs, out);
    }
    for c in &n.children {
        emit(c, origin, opacity, out);
    }
}

fn rect_element(n: &FigmaNode, x: f64, y: f64, b: &Rect, attrs: &str, out: &mut String) {
    let rx = match n.corner_radius {
        Some(r) if r > 0.0 => format!(" rx=\"{}\"", fmt_num(r)),
        _ => String::new(),
    };
    let _ = writeln!(
        out,
        "  <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"{rx}{attrs}/>",
        fmt_num(x),
        fmt_num(y),
        fmt_num(b.width),
        fmt_num(b.height)
    );
}

/// Standalone SVG for an icon subtree, sized to the subtree's box. The
/// subtree root's own opacity is left to the node that references the file.
pub fn export_icon_svg(subtree: &FigmaNode) -> Vec<u8> {
    let b = subtree.bounding_box.or_else(|| leaf_union(subtree)).unwrap_or(Rect::new(0.0, 0.0, 0.0, 0.0));
    let (w, h) = (if b.width > 0.0 { b.width } else { 1.0 }, if b.height > 0.0 { b.height } else { 1.0 });
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">",
        fmt_num(w),
        fmt_num(h)
    );
    let mut root = subtree.clone();
    root.opacity = 1.0;
    emit(&root, (b.x, b.y), 1.0, &mut out);
    out.push_str("</svg>\n");
    out.into_bytes()
}
