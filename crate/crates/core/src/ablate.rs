//! Controlled removal of one class of design metadata at a time.

use crate::figma::{FigmaDocument, FigmaNode, NodeType, Paint};
use serde_json::{Map, Value};
use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AblationKind {
    Geometry,
    Style,
    ImageContent,
    Hierarchy,
    Text,
}

impl AblationKind {
    pub const ALL: [AblationKind; 5] =
        [AblationKind::Geometry, AblationKind::Style, AblationKind::ImageContent, AblationKind::Hierarchy, AblationKind::Text];

    pub fn as_str(&self) -> &'static str {
        match self {
            AblationKind::Geometry => "geometry",
            AblationKind::Style => "style",
            AblationKind::ImageContent => "image",
            AblationKind::Hierarchy => "hierarchy",
            AblationKind::Text => "text",
        }
    }

    /// Keys that must not survive anywhere in a document after this
    /// ablation. Hierarchy ablation removes structure, not keys.
    pub fn key_list(&self) -> &'static [&'static str] {
        match self {
            AblationKind::Geometry => GEOMETRY_KEYS,
            AblationKind::Style => STYLE_KEYS,
            AblationKind::ImageContent => IMAGE_KEYS,
            AblationKind::Hierarchy => &[],
            AblationKind::Text => TEXT_KEYS,
        }
    }
}

impl fmt::Display for AblationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AblationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AblationKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown ablation kind {s:?} (expected geometry, style, image, hierarchy or text)"))
    }
}

pub const GEOMETRY_KEYS: &[&str] = &[
    "x",
    "y",
    "width",
    "height",
    "absoluteBoundingBox",
    "absoluteRenderBounds",
    "relativeTransform",
    "transform",
    "size",
    "rotation",
];

pub const STYLE_KEYS: &[&str] = &[
    "fills",
    "strokes",
    "effects",
    "style",
    "opacity",
    "cornerRadius",
    "rectangleCornerRadii",
    "cornerSmoothing",
    "blendMode",
    "strokeWeight",
    "strokeAlign",
    "strokeCap",
    "strokeJoin",
    "strokeDashes",
    "strokeMiterAngle",
    "individualStrokeWeights",
    "fillStyleId",
    "strokeStyleId",
    "effectStyleId",
    "textStyleId",
    "styles",
    "fillOverrideTable",
    "styleOverrideTable",
    "characterStyleOverrides",
    "background",
    "backgroundColor",
    "fontName",
    "fontFamily",
    "fontPostScriptName",
    "fontWeight",
    "fontSize",
    "lineHeightPx",
    "lineHeightPercent",
    "letterSpacing",
    "textCase",
    "textDecoration",
];

pub const IMAGE_KEYS: &[&str] = &["imageRef", "imageHash", "gifRef"];

pub const TEXT_KEYS: &[&str] = &["characters", "text"];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AblateError {
    #[error("duplicate node id {0:?}")]
    DuplicateId(String),
}

pub fn ablate(doc: FigmaDocument, kind: AblationKind) -> Result<FigmaDocument, AblateError> {
    Ok(match kind {
        AblationKind::Geometry => ablate_geometry(doc),
        AblationKind::Style => ablate_style(doc),
        AblationKind::ImageContent => ablate_image_content(doc),
        AblationKind::Hierarchy => ablate_hierarchy(doc)?,
        AblationKind::Text => ablate_text(doc),
    })
}

fn strip_keys(v: &mut Value, keys: &[&str]) {
    match v {
        Value::Object(m) => strip_map(m, keys),
        Value::Array(a) => a.iter_mut().for_each(|x| strip_keys(x, keys)),
        _ => {}
    }
}

fn strip_map(m: &mut Map<String, Value>, keys: &[&str]) {
    for k in keys {
        m.remove(*k);
    }
    m.values_mut().for_each(|v| strip_keys(v, keys));
}

/// Applies `f` to every node of the page tree and of embedded definition
/// trees, in preorder (page tree first).
fn for_each_node(doc: &mut FigmaDocument, f: &mut dyn FnMut(&mut FigmaNode)) {
    fn rec(n: &mut FigmaNode, f: &mut dyn FnMut(&mut FigmaNode)) {
        f(n);
        for c in &mut n.children {
            rec(c, f);
        }
    }
    rec(&mut doc.root, f);
    for def in doc.components.values_mut().chain(doc.component_sets.values_mut()) {
        if let Some(n) = def.node.as_mut() {
            rec(n, f);
        }
    }
}

fn strip_definition_extras(doc: &mut FigmaDocument, keys: &[&str]) {
    for def in doc.components.values_mut().chain(doc.component_sets.values_mut()) {
        strip_map(&mut def.extra, keys);
    }
    for s in doc.styles.values_mut() {
        strip_map(&mut s.extra, keys);
    }
}

pub fn ablate_geometry(mut doc: FigmaDocument) -> FigmaDocument {
    for_each_node(&mut doc, &mut |n| {
        n.bounding_box = None;
        strip_map(&mut n.extra, GEOMETRY_KEYS);
        // Shadow offsets and gradient handles are positions too.
        for e in &mut n.effects {
            e.offset = None;
            strip_map(&mut e.extra, GEOMETRY_KEYS);
        }
        for p in n.fills.iter_mut().chain(n.strokes.iter_mut()) {
            strip_map(&mut p.extra, GEOMETRY_KEYS);
        }
    });
    strip_definition_extras(&mut doc, GEOMETRY_KEYS);
    strip_map(&mut doc.extra, GEOMETRY_KEYS);
    doc
}

/// Removes visual styling. Auto-layout mode is structure and stays.
pub fn ablate_style(mut doc: FigmaDocument) -> FigmaDocument {
    for_each_node(&mut doc, &mut |n| {
        n.fills.clear();
        n.strokes.clear();
        n.effects.clear();
        n.corner_radius = None;
        n.text_style = None;
        n.opacity = 1.0;
        strip_map(&mut n.extra, STYLE_KEYS);
    });
    strip_definition_extras(&mut doc, STYLE_KEYS);
    doc.styles.clear();
    doc
}

fn drop_image_paints(v: &mut Value) {
    if let Value::Array(a) = v {
        a.retain(|p| p.get("type").and_then(Value::as_str) != Some("IMAGE"));
    }
}

pub fn ablate_image_content(mut doc: FigmaDocument) -> FigmaDocument {
    for_each_node(&mut doc, &mut |n| {
        n.fills.retain(|p: &Paint| !p.is_image());
        n.strokes.retain(|p: &Paint| !p.is_image());
        for k in ["background", "fills", "strokes"] {
            if let Some(v) = n.extra.get_mut(k) {
                drop_image_paints(v);
            }
        }
        for p in n.fills.iter_mut().chain(n.strokes.iter_mut()) {
            strip_map(&mut p.extra, IMAGE_KEYS);
        }
        strip_map(&mut n.extra, IMAGE_KEYS);
    });
    strip_definition_extras(&mut doc, IMAGE_KEYS);
    doc
}

/// Every non-root node becomes a childless direct child of the root, in
/// preorder of the original tree.
pub fn ablate_hierarchy(mut doc: FigmaDocument) -> Result<FigmaDocument, AblateError> {
    fn take(children: Vec<FigmaNode>, seen: &mut HashSet<String>, out: &mut Vec<FigmaNode>) -> Result<(), AblateError> {
        for mut c in children {
            if !seen.insert(c.id.clone()) {
                return Err(AblateError::DuplicateId(c.id));
            }
            let kids = std::mem::take(&mut c.children);
            out.push(c);
            take(kids, seen, out)?;
        }
        Ok(())
    }
    let mut seen = HashSet::from([doc.root.id.clone()]);
    let mut flat = Vec::with_capacity(doc.node_count());
    take(std::mem::take(&mut doc.root.children), &mut seen, &mut flat)?;
    doc.root.children = flat;
    Ok(doc)
}

fn clear_text_properties(m: &mut Map<String, Value>) {
    for key in ["componentProperties", "componentPropertyDefinitions"] {
        if let Some(Value::Object(props)) = m.get_mut(key) {
            for prop in props.values_mut() {
                if prop.get("type").and_then(Value::as_str) == Some("TEXT") {
                    if let Value::Object(p) = prop {
                        for field in ["value", "defaultValue"] {
                            if p.contains_key(field) {
                                p.insert(field.into(), Value::String(String::new()));
                            }
                        }
                    }
                }
            }
        }
    }
    if let Some(Value::Array(overrides)) = m.get_mut("overrides") {
        for o in overrides.iter_mut() {
            if let Value::Object(o) = o {
                strip_map(o, TEXT_KEYS);
            }
        }
    }
}

/// Removes text content. TEXT nodes are renamed `text-<k>` with `k`
/// counting TEXT nodes in preorder, page tree first, then definitions.
pub fn ablate_text(mut doc: FigmaDocument) -> FigmaDocument {
    let mut k = 0usize;
    for_each_node(&mut doc, &mut |n| {
        n.characters = None;
        if n.node_type == NodeType::Text {
            n.name = format!("text-{k}");
            k += 1;
        }
        clear_text_properties(&mut n.extra);
        strip_map(&mut n.extra, TEXT_KEYS);
    });
    for def in doc.components.values_mut().chain(doc.component_sets.values_mut()) {
        clear_text_properties(&mut def.extra);
        strip_map(&mut def.extra, TEXT_KEYS);
    }
    doc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::figma::{Paint, Rgba};

    fn n(id: &str, kids: Vec<FigmaNode>) -> FigmaNode {
        FigmaNode::new(id, id, NodeType::Frame).with_box(0.0, 0.0, 10.0, 10.0).with_children(kids)
    }

    fn ids(nodes: &[FigmaNode]) -> Vec<&str> {
        nodes.iter().map(|c| c.id.as_str()).collect()
    }

    #[test]
    fn hierarchy_flattens_in_preorder() {
        let doc = FigmaDocument::new(n("root", vec![n("a", vec![n("b", vec![n("d", vec![])])]), n("c", vec![])]));
        let out = ablate_hierarchy(doc).unwrap();
        assert_eq!(ids(&out.root.children), ["a", "b", "d", "c"]);
        assert!(out.root.children.iter().all(|c| c.children.is_empty()));
    }

    #[test]
    fn hierarchy_rejects_duplicate_ids() {
        let doc = FigmaDocument::new(n("root", vec![n("a", vec![n("a", vec![])])]));
        assert_eq!(ablate_hierarchy(doc).unwrap_err(), AblateError::DuplicateId("a".into()));
    }

    #[test]
    fn image_paints_dropped_others_kept() {
        let r = FigmaNode::new("r", "r", NodeType::Rectangle)
            .with_fill(Paint::image("h1"))
            .with_fill(Paint::solid(Rgba::BLACK));
        let out = ablate_image_content(FigmaDocument::new(n("root", vec![r])));
        let fills = &out.root.children[0].fills;
        assert_eq!(fills.len(), 1);
        assert!(!fills[0].is_image());
    }

    #[test]
    fn text_anonymised() {
        let t = FigmaNode::text("t", "CTA", "Buy now");
        let mut inst = FigmaNode::new("i", "Button", NodeType::Instance);
        inst.extra.insert(
            "componentProperties".into(),
            serde_json::json!({"Label#1": {"type": "TEXT", "value": "Checkout"}, "On#2": {"type": "BOOLEAN", "value": true}}),
        );
        let out = ablate_text(FigmaDocument::new(n("root", vec![t, inst])));
        assert_eq!(out.root.children[0].name, "text-0");
        assert!(out.root.children[0].characters.is_none());
        let props = &out.root.children[1].extra["componentProperties"];
        assert_eq!(props["Label#1"]["value"], "");
        assert_eq!(props["On#2"]["value"], true);
    }

    #[test]
    fn style_keeps_layout_and_text() {
        let mut t = FigmaNode::text("t", "t", "hello");
        t.text_style = Some(Default::default());
        t.fills.push(Paint::solid(Rgba::BLACK));
        let mut root = n("root", vec![t]);
        root.layout_mode = crate::figma::LayoutMode::Vertical;
        let out = ablate_style(FigmaDocument::new(root));
        assert_eq!(out.root.layout_mode, crate::figma::LayoutMode::Vertical);
        assert_eq!(out.root.children[0].characters.as_deref(), Some("hello"));
        assert!(out.root.children[0].text_style.is_none());
        assert!(out.root.children[0].fills.is_empty());
    }

    #[test]
    fn kinds_round_trip_through_strings() {
        for k in AblationKind::ALL {
            assert_eq!(k.as_str().parse::<AblationKind>().unwrap(), k);
        }
        assert!("colour".parse::<AblationKind>().is_err());
    }
}
