use super::RefineConfig;
use crate::figma::{Effect, FigmaDocument, FigmaNode, Paint, Rect, Rgba, TextStyle};
use serde_json::{Map, Value};

/// Rounds half away from zero. Values within 1e-9 of a tie (in units of
/// the last kept place) count as the tie, so binary representation noise
/// such as 2.0005 → 2.000499… does not flip the result.
pub fn round_half_away(x: f64, dp: u32) -> f64 {
    if !x.is_finite() {
        return x;
    }
    let m = 10f64.powi(dp as i32);
    let scaled = x * m;
    let floor = scaled.abs().floor();
    let frac = scaled.abs() - floor;
    let mag = if (frac - 0.5).abs() < 1e-9 || frac > 0.5 { floor + 1.0 } else { floor };
    let r = mag.copysign(x) / m;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Re-expresses boxes relative to the root's origin and rounds every
/// numeric style or geometry value to `config.decimal_places`.
pub fn relativize_and_round(mut doc: FigmaDocument, config: &RefineConfig) -> FigmaDocument {
    let origin = doc.root.bounding_box.map(|b| (b.x, b.y)).unwrap_or((0.0, 0.0));
    let dp = config.decimal_places;
    fix_node(&mut doc.root, Some(origin), dp);
    for def in doc.components.values_mut().chain(doc.component_sets.values_mut()) {
        if let Some(n) = def.node.as_mut() {
            fix_node(n, None, dp);
        }
        round_map(&mut def.extra, dp);
    }
    for s in doc.styles.values_mut() {
        round_map(&mut s.extra, dp);
    }
    doc
}

fn fix_node(n: &mut FigmaNode, origin: Option<(f64, f64)>, dp: u32) {
    let q = |v: f64| round_half_away(v, dp);
    let (ox, oy) = origin.unwrap_or((0.0, 0.0));
    if let Some(b) = n.bounding_box {
        n.bounding_box = Some(Rect::new(q(b.x - ox), q(b.y - oy), q(b.width), q(b.height)));
    }
    if origin.is_some() {
        if let Some(Value::Object(rb)) = n.extra.get_mut("absoluteRenderBounds") {
            for (k, d) in [("x", ox), ("y", oy)] {
                if let Some(v) = rb.get(k).and_then(Value::as_f64) {
                    rb.insert(k.into(), Value::from(v - d));
                }
            }
        }
    }
    n.opacity = q(n.opacity);
    n.corner_radius = n.corner_radius.map(q);
    n.fills.iter_mut().chain(n.strokes.iter_mut()).for_each(|p| round_paint(p, dp));
    n.effects.iter_mut().for_each(|e| round_effect(e, dp));
    if let Some(t) = n.text_style.as_mut() {
        round_text_style(t, dp);
    }
    round_map(&mut n.extra, dp);
    for c in &mut n.children {
        fix_node(c, origin, dp);
    }
}

fn round_color(c: &mut Rgba, dp: u32) {
    let q = |v: f64| round_half_away(v, dp);
    *c = Rgba::new(q(c.r), q(c.g), q(c.b), q(c.a));
}

fn round_paint(p: &mut Paint, dp: u32) {
    if let Some(c) = p.color.as_mut() {
        round_color(c, dp);
    }
    if let Some(stops) = p.gradient_stops.as_mut() {
        stops.iter_mut().for_each(|v| round_value(v, dp));
    }
    round_map(&mut p.extra, dp);
}

fn round_effect(e: &mut Effect, dp: u32) {
    let q = |v: f64| round_half_away(v, dp);
    if let Some(c) = e.color.as_mut() {
        round_color(c, dp);
    }
    e.offset = e.offset.map(|(x, y)| (q(x), q(y)));
    e.radius = e.radius.map(q);
    e.spread = e.spread.map(q);
    round_map(&mut e.extra, dp);
}

fn round_text_style(t: &mut TextStyle, dp: u32) {
    let q = |v: f64| round_half_away(v, dp);
    t.font_weight = t.font_weight.map(q);
    t.font_size = t.font_size.map(q);
    t.line_height_px = t.line_height_px.map(q);
    t.letter_spacing = t.letter_spacing.map(q);
    round_map(&mut t.extra, dp);
}

fn round_map(m: &mut Map<String, Value>, dp: u32) {
    m.values_mut().for_each(|v| round_value(v, dp));
}

/// Rounds non-integer numbers anywhere inside a JSON value.
fn round_value(v: &mut Value, dp: u32) {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => {
            if let Some(f) = n.as_f64() {
                *v = crate::figma::json_num(round_half_away(f, dp));
            }
        }
        Value::Array(a) => a.iter_mut().for_each(|x| round_value(x, dp)),
        Value::Object(o) => o.values_mut().for_each(|x| round_value(x, dp)),
        _ => {}
    }
}
