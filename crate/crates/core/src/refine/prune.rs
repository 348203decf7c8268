use super::{prune_where, round_half_away, RefineConfig, RefineError, RefineReport};
use crate::figma::{FigmaDocument, FigmaNode, NodeType, Paint, PaintType, Rect};
use serde_json::Value;

pub fn prune_invisible(mut doc: FigmaDocument) -> (FigmaDocument, RefineReport) {
    let removed = prune_where(&mut doc.root, &|n| !n.visible || n.opacity == 0.0);
    (doc, RefineReport { removed_invisible: removed, ..Default::default() })
}

fn paints_something(p: &Paint) -> bool {
    p.visible() && p.opacity() > 0.0
}

/// Shape nodes whose fills and strokes paint nothing. Paints that are
/// hidden or fully transparent count as absent.
pub fn prune_empty_shapes(mut doc: FigmaDocument) -> (FigmaDocument, RefineReport) {
    let removed = prune_where(&mut doc.root, &|n| {
        let is_shape = !n.node_type.is_container() && !matches!(n.node_type, NodeType::Text | NodeType::SvgAsset);
        is_shape && !n.fills.iter().chain(n.strokes.iter()).any(paints_something)
    });
    (doc, RefineReport { removed_empty_shapes: removed, ..Default::default() })
}

struct Entry {
    /// One past the last preorder index of this node's subtree.
    end: usize,
    hidden: bool,
    /// Region the subtree may paint into (its boxes plus stroke and effect
    /// overhang).
    footprint: Rect,
    cover: Option<Rect>,
}

/// Removes nodes whose painted footprint lies inside the box of a single
/// opaque node above them in z-order.
pub fn prune_occluded(mut doc: FigmaDocument, config: &RefineConfig) -> Result<(FigmaDocument, RefineReport), RefineError> {
    if !config.occlusion_requires_full_cover {
        return Ok((doc, RefineReport::default()));
    }
    let origin = doc.root.bounding_box.map(|b| (b.x, b.y)).unwrap_or((0.0, 0.0));
    let std = Standardizer { origin, dp: config.decimal_places };
    let mut entries = Vec::with_capacity(doc.node_count());
    collect(&doc.root, 1.0, None, false, &std, &mut entries)?;

    let mut order = Vec::with_capacity(entries.len());
    reverse_z(&entries, 0, &mut order);

    let mut covers: Vec<(usize, Rect)> = Vec::new();
    let mut removed_ids = vec![false; entries.len()];
    for &i in &order {
        let e = &entries[i];
        if e.hidden {
            continue;
        }
        let inside = |j: usize| j > i && j < e.end;
        if i != 0 && covers.iter().any(|&(j, r)| !inside(j) && r.contains(&e.footprint)) {
            removed_ids[i] = true;
            covers.retain(|&(j, _)| !inside(j));
            continue;
        }
        if let Some(c) = e.cover {
            if c.area() > 0.0 {
                covers.push((i, c));
            }
        }
    }

    let mut idx = 0;
    let removed = remove_marked(&mut doc.root, &removed_ids, &mut idx);
    Ok((doc, RefineReport { removed_occluded: removed, ..Default::default() }))
}

pub(crate) struct Standardizer {
    pub origin: (f64, f64),
    pub dp: u32,
}

impl Standardizer {
    /// Page-relative box rounded the same way `relativize_and_round` does, so
    /// decisions do not flip between raw and refined input.
    pub fn rect(&self, r: &Rect) -> Rect {
        let q = |v: f64| round_half_away(v, self.dp);
        Rect::new(q(r.x - self.origin.0), q(r.y - self.origin.1), q(r.width), q(r.height))
    }
}

fn union(a: Rect, b: Rect) -> Rect {
    let x = a.x.min(b.x);
    let y = a.y.min(b.y);
    Rect::new(x, y, a.right().max(b.right()) - x, a.bottom().max(b.bottom()) - y)
}

fn grow(r: Rect, d: f64) -> Rect {
    Rect::new(r.x - d, r.y - d, r.width + 2.0 * d, r.height + 2.0 * d)
}

fn overhang(n: &FigmaNode) -> f64 {
    let mut d: f64 = 0.0;
    if n.strokes.iter().any(paints_something) {
        d = d.max(n.extra.get("strokeWeight").and_then(Value::as_f64).unwrap_or(1.0));
    }
    for e in n.effects.iter().filter(|e| e.visible) {
        let (ox, oy) = e.offset.unwrap_or((0.0, 0.0));
        let ext = ox.abs().max(oy.abs()) + e.radius.unwrap_or(0.0).abs() + e.spread.unwrap_or(0.0).abs();
        d = d.max(ext);
    }
    d
}

fn clips_content(n: &FigmaNode) -> bool {
    matches!(n.node_type, NodeType::Frame | NodeType::Component | NodeType::Instance)
        && n.extra.get("clipsContent").and_then(Value::as_bool).unwrap_or(true)
}

fn has_rounded_corners(n: &FigmaNode) -> bool {
    n.corner_radius.is_some_and(|r| r != 0.0)
        || n
            .extra
            .get("rectangleCornerRadii")
            .and_then(Value::as_array)
            .is_some_and(|a| a.iter().any(|v| v.as_f64().is_some_and(|r| r != 0.0)))
}

fn opaque_paint(p: &Paint) -> bool {
    if !p.visible() || p.opacity() != 1.0 {
        return false;
    }
    if p.extra.get("blendMode").and_then(Value::as_str).is_some_and(|m| m != "NORMAL" && m != "PASS_THROUGH") {
        return false;
    }
    match p.paint_type {
        PaintType::Solid => p.color.is_some_and(|c| c.a == 1.0),
        PaintType::Image => {
            let fills_box = p.extra.get("scaleMode").and_then(Value::as_str).is_none_or(|m| m == "FILL");
            // SVG assets carry their own transparency.
            fills_box && p.image_ref.as_deref().is_some_and(|r| !r.ends_with(".svg"))
        }
        _ => false,
    }
}

fn is_cover(n: &FigmaNode, effective_opacity: f64) -> bool {
    effective_opacity == 1.0
        && matches!(n.node_type, NodeType::Frame | NodeType::Rectangle | NodeType::Component | NodeType::Instance)
        && !has_rounded_corners(n)
        && n.fills.iter().any(opaque_paint)
}

fn collect(
    n: &FigmaNode,
    parent_opacity: f64,
    clip: Option<Rect>,
    parent_hidden: bool,
    std: &Standardizer,
    out: &mut Vec<Entry>,
) -> Result<Rect, RefineError> {
    let hidden = parent_hidden || !n.visible || n.opacity == 0.0;
    let eff = parent_opacity * n.opacity;
    let me = out.len();
    out.push(Entry { end: 0, hidden, footprint: Rect::new(0.0, 0.0, 0.0, 0.0), cover: None });

    let bbox = match n.bounding_box {
        Some(b) => std.rect(&b),
        None if hidden => Rect::new(0.0, 0.0, 0.0, 0.0),
        None => return Err(RefineError::GeometryMissing { node_id: n.id.clone() }),
    };
    let cover = (!hidden && is_cover(n, eff)).then(|| clip.map_or(bbox, |c| c.intersect(&bbox)));
    let child_clip = if clips_content(n) { Some(clip.map_or(bbox, |c| c.intersect(&bbox))) } else { clip };

    let mut footprint = grow(bbox, overhang(n));
    for c in &n.children {
        let f = collect(c, eff, child_clip, hidden, std, out)?;
        if !(hidden || !c.visible || c.opacity == 0.0) {
            footprint = union(footprint, f);
        }
    }
    out[me].end = out.len();
    out[me].footprint = footprint;
    out[me].cover = cover;
    Ok(footprint)
}

/// Reverse z-order over preorder indices: later siblings first, children
/// before their parent.
fn reverse_z(entries: &[Entry], i: usize, order: &mut Vec<usize>) {
    let mut kids = Vec::new();
    let mut j = i + 1;
    while j < entries[i].end {
        kids.push(j);
        j = entries[j].end;
    }
    for &k in kids.iter().rev() {
        reverse_z(entries, k, order);
    }
    order.push(i);
}

fn remove_marked(n: &mut FigmaNode, marked: &[bool], idx: &mut usize) -> usize {
    *idx += 1;
    let mut removed = 0;
    let kids = std::mem::take(&mut n.children);
    for mut c in kids {
        if marked[*idx] {
            let len = c.subtree_len();
            removed += len;
            *idx += len;
        } else {
            removed += remove_marked(&mut c, marked, idx);
            n.children.push(c);
        }
    }
    removed
}
