use super::prune::Standardizer;
use super::{RefineConfig, RefineReport};
use crate::figma::{FigmaDocument, FigmaNode, NodeType};
use serde_json::Value;

/// Replaces style-less single-child FRAME/GROUP wrappers by their child,
/// repeatedly, without moving anything.
///
/// A wrapper is kept when removing it could change pixels: non-unit
/// opacity, or a clipping frame whose child is not inside its box.
pub fn flatten_layers(mut doc: FigmaDocument, config: &RefineConfig) -> (FigmaDocument, RefineReport) {
    let origin = doc.root.bounding_box.map(|b| (b.x, b.y)).unwrap_or((0.0, 0.0));
    let std = Standardizer { origin, dp: config.decimal_places };
    let mut report = RefineReport::default();
    flatten_children(&mut doc.root, &std, &mut report);
    (doc, report)
}

fn flatten_children(n: &mut FigmaNode, std: &Standardizer, report: &mut RefineReport) {
    for c in &mut n.children {
        flatten_children(c, std, report);
        while can_flatten(c, std) {
            let only = c.children.pop().expect("single child");
            *c = only;
            report.flattened_containers += 1;
        }
    }
    if is_style_merge_candidate(n) {
        log::debug!("style-merge candidate {} ({} children share one style)", n.id, n.children.len());
        report.style_merge_candidates += 1;
    }
}

fn can_flatten(c: &FigmaNode, std: &Standardizer) -> bool {
    if !c.node_type.is_layer_container() || c.children.len() != 1 || c.has_own_style() {
        return false;
    }
    if !c.visible || c.opacity != 1.0 {
        return false;
    }
    if c.node_type == NodeType::Group {
        return true;
    }
    let clips = c.extra.get("clipsContent").and_then(Value::as_bool).unwrap_or(true);
    if !clips {
        return true;
    }
    match (c.bounding_box, c.children[0].bounding_box) {
        (Some(outer), Some(inner)) => std.rect(&outer).contains(&std.rect(&inner)),
        _ => false,
    }
}

fn is_style_merge_candidate(n: &FigmaNode) -> bool {
    n.node_type == NodeType::Group
        && n.children.len() > 1
        && !n.has_own_style()
        && n.children.iter().all(|c| !c.fills.is_empty())
        && n.children.windows(2).all(|w| w[0].fills == w[1].fills && w[0].strokes == w[1].strokes)
}
