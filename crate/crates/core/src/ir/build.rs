use super::*;
use crate::figma::{FigmaDocument, FigmaNode, LayoutMode, NodeType, Paint, PaintType};
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IrConfig {
    /// Cross-axis slack, in px, when recovering stacking for frames without
    /// auto layout.
    pub stacking_tolerance: f64,
}

impl Default for IrConfig {
    fn default() -> Self {
        IrConfig { stacking_tolerance: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IrError {
    #[error("unresolved reference {0:?}")]
    UnresolvedReference(String),
}

pub fn to_ir(doc: &FigmaDocument) -> Result<UiIr, IrError> {
    to_ir_with(doc, &IrConfig::default())
}

struct Ctx<'a> {
    doc: &'a FigmaDocument,
    config: &'a IrConfig,
    notes: Vec<String>,
}

pub fn to_ir_with(doc: &FigmaDocument, config: &IrConfig) -> Result<UiIr, IrError> {
    let mut ctx = Ctx { doc, config, notes: Vec::new() };
    let page = doc.root.bounding_box.unwrap_or(Rect::new(0.0, 0.0, 0.0, 0.0));
    let mut root = ctx.node(&doc.root, page)?;
    root.bbox = Rect::new(0.0, 0.0, page.width, page.height);
    let mut ir = UiIr::new(page.width, page.height, root);
    ir.notes = ctx.notes;
    Ok(ir)
}

fn f64_at(n: &FigmaNode, key: &str) -> Option<f64> {
    n.extra.get(key).and_then(Value::as_f64)
}

fn str_at<'a>(n: &'a FigmaNode, key: &str) -> Option<&'a str> {
    n.extra.get(key).and_then(Value::as_str)
}

fn visible_paints(paints: &[Paint]) -> impl DoubleEndedIterator<Item = &Paint> {
    paints.iter().filter(|p| p.visible() && p.opacity() > 0.0)
}

/// Topmost visible image paint of a node.
fn image_fill(n: &FigmaNode) -> Option<&str> {
    visible_paints(&n.fills).rev().find(|p| p.is_image()).and_then(|p| p.image_ref.as_deref())
}

fn axis_align(v: Option<&str>) -> Option<AxisAlign> {
    match v? {
        "MIN" => Some(AxisAlign::Start),
        "CENTER" => Some(AxisAlign::Center),
        "MAX" => Some(AxisAlign::End),
        "SPACE_BETWEEN" => Some(AxisAlign::SpaceBetween),
        _ => None,
    }
}

impl Ctx<'_> {
    fn note(&mut self, msg: String) {
        log::warn!("{msg}");
        self.notes.push(msg);
    }

    fn check_style_refs(&self, n: &FigmaNode) -> Result<(), IrError> {
        if let Some(Value::Object(refs)) = n.extra.get("styles") {
            for key in refs.values().filter_map(Value::as_str) {
                if !self.doc.styles.contains_key(key) {
                    return Err(IrError::UnresolvedReference(key.to_string()));
                }
            }
        }
        Ok(())
    }

    /// Childless instances take their subtree from the embedded component
    /// definition, with TEXT and BOOLEAN property overrides applied.
    fn inline_instance(&self, n: &FigmaNode) -> Result<Option<FigmaNode>, IrError> {
        if n.node_type != NodeType::Instance || !n.children.is_empty() {
            return Ok(None);
        }
        let Some(cid) = str_at(n, "componentId") else { return Ok(None) };
        let def = self.doc.components.get(cid).ok_or_else(|| IrError::UnresolvedReference(cid.to_string()))?;
        let Some(comp) = def.node.as_ref() else { return Ok(None) };
        let (dx, dy) = match (n.bounding_box, comp.bounding_box) {
            (Some(a), Some(b)) => (a.x - b.x, a.y - b.y),
            _ => (0.0, 0.0),
        };
        let props = n.extra.get("componentProperties").and_then(Value::as_object);
        let mut inlined = n.clone();
        inlined.children = comp.children.clone();
        if inlined.fills.is_empty() && inlined.strokes.is_empty() && inlined.effects.is_empty() {
            inlined.fills = comp.fills.clone();
            inlined.strokes = comp.strokes.clone();
            inlined.effects = comp.effects.clone();
            inlined.corner_radius = inlined.corner_radius.or(comp.corner_radius);
        }
        if inlined.layout_mode == LayoutMode::None {
            inlined.layout_mode = comp.layout_mode;
            for k in ["itemSpacing", "paddingTop", "paddingRight", "paddingBottom", "paddingLeft", "primaryAxisAlignItems", "counterAxisAlignItems"] {
                if let (None, Some(v)) = (inlined.extra.get(k), comp.extra.get(k)) {
                    inlined.extra.insert(k.into(), v.clone());
                }
            }
        }
        fn apply(n: &mut FigmaNode, dx: f64, dy: f64, props: Option<&serde_json::Map<String, Value>>) {
            if let Some(b) = n.bounding_box.as_mut() {
                *b = b.translated(dx, dy);
            }
            if let (Some(props), Some(Value::Object(refs))) = (props, n.extra.get("componentPropertyReferences").cloned()) {
                for (field, name) in refs {
                    let Some(value) = name.as_str().and_then(|k| props.get(k)).and_then(|p| p.get("value")) else { continue };
                    match (field.as_str(), value) {
                        ("characters", Value::String(s)) => n.characters = Some(s.clone()),
                        ("visible", Value::Bool(b)) => n.visible = *b,
                        _ => {}
                    }
                }
            }
            for c in &mut n.children {
                apply(c, dx, dy, props);
            }
        }
        for c in &mut inlined.children {
            apply(c, dx, dy, props);
        }
        Ok(Some(inlined))
    }

    fn style(&mut self, n: &FigmaNode) -> ResolvedStyle {
        let mut style = ResolvedStyle { opacity: n.opacity, radius: n.corner_radius.unwrap_or(0.0).max(0.0), ..Default::default() };
        if n.node_type != NodeType::Text {
            if let Some(p) = visible_paints(&n.fills).next_back() {
                style.background = match &p.paint_type {
                    PaintType::Solid => p.color.map(|c| Background::Color(c.with_alpha(c.a * p.opacity()))),
                    PaintType::Image => p.image_ref.clone().map(Background::Image),
                    PaintType::Gradient(g) => {
                        let c = p.first_stop_color();
                        self.note(format!("{}: {g} reduced to its first stop color", n.id));
                        c.map(|c| Background::Color(c.with_alpha(c.a * p.opacity())))
                    }
                    PaintType::Other(_) => None,
                };
            }
        }
        if let Some(c) = visible_paints(&n.strokes).find_map(|p| p.color.or_else(|| p.first_stop_color()).map(|c| c.with_alpha(c.a * p.opacity()))) {
            style.border = Some(Border { width: f64_at(n, "strokeWeight").unwrap_or(1.0), color: c });
        }
        if let Some(e) = n.effects.iter().find(|e| e.visible && e.effect_type == "DROP_SHADOW") {
            let (x, y) = e.offset.unwrap_or((0.0, 0.0));
            style.shadow = Some(Shadow { x, y, blur: e.radius.unwrap_or(0.0), color: e.color.unwrap_or(Rgba::new(0.0, 0.0, 0.0, 0.25)) });
        }
        if n.node_type == NodeType::Ellipse {
            if let Some(b) = n.bounding_box {
                style.radius = b.width.min(b.height) / 2.0;
            }
        }
        style
    }

    fn text_spec(&self, n: &FigmaNode) -> TextSpec {
        let ts = n.text_style.clone().unwrap_or_default();
        let color = visible_paints(&n.fills)
            .rev()
            .find_map(|p| match p.paint_type {
                PaintType::Solid => p.color.map(|c| c.with_alpha(c.a * p.opacity())),
                PaintType::Gradient(_) => p.first_stop_color(),
                _ => None,
            })
            .unwrap_or(Rgba::BLACK);
        let align = match ts.text_align_horizontal.as_deref() {
            Some("CENTER") => TextAlign::Center,
            Some("RIGHT") => TextAlign::Right,
            Some("JUSTIFIED") => TextAlign::Justified,
            _ => TextAlign::Left,
        };
        TextSpec {
            content: n.characters.clone().unwrap_or_default(),
            font_size: ts.font_size.unwrap_or(16.0),
            weight: ts.font_weight.map(|w| w.round() as u32).unwrap_or(400),
            color,
            align,
            font_family: ts.font_family,
            line_height: ts.line_height_px,
        }
    }

    fn node(&mut self, src: &FigmaNode, parent_abs: Rect) -> Result<IrNode, IrError> {
        self.check_style_refs(src)?;
        let inlined = self.inline_instance(src)?;
        let n = inlined.as_ref().unwrap_or(src);

        let abs = n.bounding_box.unwrap_or_else(|| Rect::new(parent_abs.x, parent_abs.y, 0.0, 0.0));
        let bbox = Rect::new(abs.x - parent_abs.x, abs.y - parent_abs.y, abs.width, abs.height);
        let mut out = IrNode::container(n.id.clone(), bbox);
        out.name = n.name.clone();

        match &n.node_type {
            NodeType::Text => {
                out.role = Role::Text;
                out.text = Some(self.text_spec(n));
                out.style = self.style(n);
                return Ok(out);
            }
            NodeType::Rectangle if image_fill(n).is_some() => {
                out.role = Role::Image;
                out.image_path = image_fill(n).map(str::to_string);
                out.style = self.style(n);
                out.style.background = None;
                return Ok(out);
            }
            NodeType::Line => {
                let mut style = self.style(n);
                if let Some(b) = style.border.take() {
                    style.background = Some(Background::Color(b.color));
                    if out.bbox.height < b.width {
                        out.bbox.height = b.width;
                    }
                }
                out.style = style;
                return Ok(out);
            }
            NodeType::Other(t) => {
                let msg = format!("{}: unknown node type {t} treated as a container", n.id);
                self.note(msg);
            }
            NodeType::SvgAsset => {
                let msg = format!("{}: unintegrated SVG asset treated as a container", n.id);
                self.note(msg);
            }
            _ => {}
        }
        out.style = self.style(n);
        out.layout = match n.layout_mode {
            LayoutMode::Horizontal => Layout::Row,
            LayoutMode::Vertical => Layout::Column,
            LayoutMode::None => Layout::Absolute,
        };
        if out.layout != Layout::Absolute {
            out.gap = f64_at(n, "itemSpacing").unwrap_or(0.0).max(0.0);
            let pad = |k: &str, legacy: &str| f64_at(n, k).or_else(|| f64_at(n, legacy)).unwrap_or(0.0);
            out.padding = [
                pad("paddingTop", "verticalPadding"),
                pad("paddingRight", "horizontalPadding"),
                pad("paddingBottom", "verticalPadding"),
                pad("paddingLeft", "horizontalPadding"),
            ];
            out.justify = axis_align(str_at(n, "primaryAxisAlignItems"));
            out.align = axis_align(str_at(n, "counterAxisAlignItems"));
        }
        for c in n.children.iter().filter(|c| c.visible && c.opacity > 0.0) {
            out.children.push(self.node(c, abs)?);
        }
        if out.layout == Layout::Absolute && out.children.len() >= 2 {
            let boxes: Vec<Rect> = out.children.iter().map(|c| c.bbox).collect();
            match infer_stacking(&boxes, self.config.stacking_tolerance) {
                Stacking::Row => {
                    out.flow_hint = Some(Layout::Row);
                    out.children.sort_by(|a, b| a.bbox.x.total_cmp(&b.bbox.x));
                }
                Stacking::Column => {
                    out.flow_hint = Some(Layout::Column);
                    out.children.sort_by(|a, b| a.bbox.y.total_cmp(&b.bbox.y));
                }
                Stacking::None => {}
            }
        } else if out.layout == Layout::Absolute && out.children.len() == 1 {
            out.flow_hint = Some(Layout::Column);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::figma::{ComponentDef, StyleDef};

    fn frame(id: &str, x: f64, y: f64, w: f64, h: f64) -> FigmaNode {
        FigmaNode::new(id, id, NodeType::Frame).with_box(x, y, w, h)
    }

    #[test]
    fn vertical_frame_with_text_and_image() {
        let mut col = frame("col", 0.0, 0.0, 200.0, 300.0).with_children(vec![
            FigmaNode::text("t", "title", "Hello").with_box(0.0, 0.0, 200.0, 40.0),
            FigmaNode::new("img", "hero", NodeType::Rectangle).with_box(0.0, 40.0, 200.0, 260.0).with_fill(Paint::image("assets/hero.png")),
        ]);
        col.layout_mode = LayoutMode::Vertical;
        let doc = FigmaDocument::new(frame("root", 0.0, 0.0, 200.0, 300.0).with_children(vec![col]));
        let ir = to_ir(&doc).unwrap();
        let c = &ir.root.children[0];
        assert_eq!((c.role, c.layout), (Role::Container, Layout::Column));
        assert_eq!(c.children[0].role, Role::Text);
        assert_eq!(c.children[0].text.as_ref().unwrap().content, "Hello");
        assert_eq!(c.children[1].role, Role::Image);
        assert_eq!(c.children[1].image_path.as_deref(), Some("assets/hero.png"));
        assert_eq!(ir.asset_manifest, ["assets/hero.png"]);
    }

    #[test]
    fn empty_frame() {
        let doc = FigmaDocument::new(frame("root", 0.0, 0.0, 10.0, 10.0).with_children(vec![frame("e", 1.0, 1.0, 2.0, 2.0)]));
        let ir = to_ir(&doc).unwrap();
        assert_eq!(ir.root.children[0].role, Role::Container);
        assert!(ir.root.children[0].children.is_empty());
    }

    #[test]
    fn boxes_become_parent_relative() {
        let inner = frame("b", 30.0, 40.0, 5.0, 5.0);
        let doc = FigmaDocument::new(frame("root", 0.0, 0.0, 100.0, 100.0).with_children(vec![frame("a", 10.0, 20.0, 50.0, 50.0).with_children(vec![inner])]));
        let ir = to_ir(&doc).unwrap();
        assert_eq!(ir.root.children[0].children[0].bbox, Rect::new(20.0, 20.0, 5.0, 5.0));
    }

    #[test]
    fn instance_inlines_component_with_overrides() {
        let mut label = FigmaNode::text("c:t", "label", "Default").with_box(5.0, 5.0, 40.0, 10.0);
        label.extra.insert("componentPropertyReferences".into(), serde_json::json!({"characters": "Label#1"}));
        let mut badge = FigmaNode::new("c:b", "badge", NodeType::Rectangle)
            .with_box(50.0, 5.0, 5.0, 5.0)
            .with_fill(Paint::solid(Rgba::BLACK));
        badge.extra.insert("componentPropertyReferences".into(), serde_json::json!({"visible": "Badge#2"}));
        let comp = FigmaNode::new("c", "Button", NodeType::Component).with_box(0.0, 0.0, 60.0, 20.0).with_children(vec![label, badge]);

        let mut inst = FigmaNode::new("i", "Button", NodeType::Instance).with_box(100.0, 200.0, 60.0, 20.0);
        inst.extra.insert("componentId".into(), "c".into());
        inst.extra.insert(
            "componentProperties".into(),
            serde_json::json!({"Label#1": {"type": "TEXT", "value": "Buy"}, "Badge#2": {"type": "BOOLEAN", "value": false}}),
        );
        let mut doc = FigmaDocument::new(frame("root", 0.0, 0.0, 400.0, 400.0).with_children(vec![inst]));
        doc.components.insert("c".into(), ComponentDef { name: Some("Button".into()), node: Some(comp), extra: Default::default() });

        let ir = to_ir(&doc).unwrap();
        let i = &ir.root.children[0];
        assert_eq!(i.children.len(), 1, "hidden badge is dropped");
        assert_eq!(i.children[0].text.as_ref().unwrap().content, "Buy");
        assert_eq!(i.children[0].bbox, Rect::new(5.0, 5.0, 40.0, 10.0));
    }

    #[test]
    fn missing_component_or_style_is_unresolved() {
        let mut inst = FigmaNode::new("i", "x", NodeType::Instance).with_box(0.0, 0.0, 1.0, 1.0);
        inst.extra.insert("componentId".into(), "nope".into());
        let doc = FigmaDocument::new(frame("root", 0.0, 0.0, 4.0, 4.0).with_children(vec![inst]));
        assert_eq!(to_ir(&doc).unwrap_err(), IrError::UnresolvedReference("nope".into()));

        let mut r = frame("r", 0.0, 0.0, 1.0, 1.0);
        r.extra.insert("styles".into(), serde_json::json!({"fill": "S:1"}));
        let mut doc = FigmaDocument::new(frame("root", 0.0, 0.0, 4.0, 4.0).with_children(vec![r]));
        assert_eq!(to_ir(&doc).unwrap_err(), IrError::UnresolvedReference("S:1".into()));
        doc.styles.insert("S:1".into(), StyleDef::default());
        assert!(to_ir(&doc).is_ok());
    }

    #[test]
    fn none_layout_gets_flow_hint_and_sorted_children() {
        let doc = FigmaDocument::new(frame("root", 0.0, 0.0, 300.0, 100.0).with_children(vec![
            frame("b", 110.0, 10.0, 90.0, 80.0),
            frame("a", 10.0, 10.0, 90.0, 80.0),
        ]));
        let ir = to_ir(&doc).unwrap();
        assert_eq!(ir.root.layout, Layout::Absolute);
        assert_eq!(ir.root.flow_hint, Some(Layout::Row));
        assert_eq!(ir.root.children[0].id, "a");
    }

    #[test]
    fn unknown_type_noted() {
        let odd = FigmaNode::new("s", "s", NodeType::Other("SECTION".into())).with_box(0.0, 0.0, 1.0, 1.0);
        let doc = FigmaDocument::new(frame("root", 0.0, 0.0, 4.0, 4.0).with_children(vec![odd]));
        let ir = to_ir(&doc).unwrap();
        assert_eq!(ir.root.children[0].role, Role::Container);
        assert_eq!(ir.notes.len(), 1);
    }
}
