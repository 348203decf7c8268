//! Figma design-document model.
//!
//! The tree mirrors the REST-API node shape. Properties the model does not
//! type explicitly are kept verbatim in each node's `extra` bag so that
//! parsing stays lossless and later stages decide what to drop.

mod assets;
mod json;
mod walk;

pub use assets::{sniff_kind, AssetError, AssetKind, AssetStore, Definitions};
pub use json::{parse_document, parse_value, serialize_document, serialize_document_pretty, to_value, ParseError};
pub use walk::{walk, TraversalOrder, Visit};
pub(crate) use json::{num as json_num, parse_component_map, parse_style_map};

use serde_json::{Map, Value};
use std::collections::BTreeMap;

/// Axis-aligned box in page pixels.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl Rect {
    pub const fn new(x: f64, y: f64, width: f64, height: f64) -> Self {
        Self { x, y, width, height }
    }

    pub fn right(&self) -> f64 {
        self.x + self.width
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.height
    }

    pub fn area(&self) -> f64 {
        self.width.max(0.0) * self.height.max(0.0)
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x + self.width / 2.0, self.y + self.height / 2.0)
    }

    /// True when `other` lies entirely inside `self` (edges may touch).
    pub fn contains(&self, other: &Rect) -> bool {
        other.x >= self.x && other.y >= self.y && other.right() <= self.right() && other.bottom() <= self.bottom()
    }

    pub fn intersect(&self, other: &Rect) -> Rect {
        let x = self.x.max(other.x);
        let y = self.y.max(other.y);
        let r = self.right().min(other.right());
        let b = self.bottom().min(other.bottom());
        Rect::new(x, y, (r - x).max(0.0), (b - y).max(0.0))
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Rect {
        Rect::new(self.x + dx, self.y + dy, self.width, self.height)
    }
}

/// Straight-alpha color with channels in `[0, 1]`, as Figma exports them.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Rgba {
    pub r: f64,
    pub g: f64,
    pub b: f64,
    pub a: f64,
}

impl Rgba {
    pub const BLACK: Rgba = Rgba { r: 0.0, g: 0.0, b: 0.0, a: 1.0 };
    pub const WHITE: Rgba = Rgba { r: 1.0, g: 1.0, b: 1.0, a: 1.0 };

    pub const fn new(r: f64, g: f64, b: f64, a: f64) -> Self {
        Self { r, g, b, a }
    }

    pub fn from_rgb8(r: u8, g: u8, b: u8) -> Self {
        Self::new(r as f64 / 255.0, g as f64 / 255.0, b as f64 / 255.0, 1.0)
    }

    pub fn to_rgb8(&self) -> [u8; 3] {
        let q = |c: f64| (c.clamp(0.0, 1.0) * 255.0).round() as u8;
        [q(self.r), q(self.g), q(self.b)]
    }

    /// Uppercase `#RRGGBB`, ignoring alpha.
    pub fn hex(&self) -> String {
        let [r, g, b] = self.to_rgb8();
        format!("#{r:02X}{g:02X}{b:02X}")
    }

    pub fn with_alpha(&self, a: f64) -> Rgba {
        Rgba { a, ..*self }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeType {
    Frame,
    Group,
    Text,
    Rectangle,
    Vector,
    Star,
    Line,
    Ellipse,
    RegularPolygon,
    BooleanOperation,
    Instance,
    Component,
    SvgAsset,
    Other(String),
}

impl NodeType {
    pub fn as_str(&self) -> &str {
        match self {
            NodeType::Frame => "FRAME",
            NodeType::Group => "GROUP",
            NodeType::Text => "TEXT",
            NodeType::Rectangle => "RECTANGLE",
            NodeType::Vector => "VECTOR",
            NodeType::Star => "STAR",
            NodeType::Line => "LINE",
            NodeType::Ellipse => "ELLIPSE",
            NodeType::RegularPolygon => "REGULAR_POLYGON",
            NodeType::BooleanOperation => "BOOLEAN_OPERATION",
            NodeType::Instance => "INSTANCE",
            NodeType::Component => "COMPONENT",
            NodeType::SvgAsset => "SVG_ASSET",
            NodeType::Other(s) => s,
        }
    }

    pub fn parse(s: &str) -> NodeType {
        match s {
            "FRAME" => NodeType::Frame,
            "GROUP" => NodeType::Group,
            "TEXT" => NodeType::Text,
            "RECTANGLE" => NodeType::Rectangle,
            "VECTOR" => NodeType::Vector,
            "STAR" => NodeType::Star,
            "LINE" => NodeType::Line,
            "ELLIPSE" => NodeType::Ellipse,
            "REGULAR_POLYGON" => NodeType::RegularPolygon,
            "BOOLEAN_OPERATION" => NodeType::BooleanOperation,
            "INSTANCE" => NodeType::Instance,
            "COMPONENT" => NodeType::Component,
            "SVG_ASSET" => NodeType::SvgAsset,
            other => NodeType::Other(other.to_string()),
        }
    }

    /// FRAME and GROUP, the two layer containers subject to flattening.
    pub fn is_layer_container(&self) -> bool {
        matches!(self, NodeType::Frame | NodeType::Group)
    }

    /// Node types that hold other nodes as layout children.
    pub fn is_container(&self) -> bool {
        matches!(
            self,
            NodeType::Frame | NodeType::Group | NodeType::Instance | NodeType::Component | NodeType::Other(_)
        )
    }

    /// Primitive vector shapes that make up icons.
    pub fn is_icon_shape(&self) -> bool {
        matches!(
            self,
            NodeType::Vector
                | NodeType::Star
                | NodeType::Line
                | NodeType::Ellipse
                | NodeType::RegularPolygon
                | NodeType::BooleanOperation
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LayoutMode {
    #[default]
    None,
    Horizontal,
    Vertical,
}

impl LayoutMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            LayoutMode::None => "NONE",
            LayoutMode::Horizontal => "HORIZONTAL",
            LayoutMode::Vertical => "VERTICAL",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PaintType {
    Solid,
    /// Any of the GRADIENT_* paints; the original type string is kept.
    Gradient(String),
    Image,
    Other(String),
}

impl PaintType {
    pub fn as_str(&self) -> &str {
        match self {
            PaintType::Solid => "SOLID",
            PaintType::Gradient(s) | PaintType::Other(s) => s,
            PaintType::Image => "IMAGE",
        }
    }

    pub fn parse(s: &str) -> PaintType {
        match s {
            "SOLID" => PaintType::Solid,
            "IMAGE" => PaintType::Image,
            g if g.starts_with("GRADIENT") => PaintType::Gradient(g.to_string()),
            other => PaintType::Other(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Paint {
    pub paint_type: PaintType,
    pub color: Option<Rgba>,
    pub image_ref: Option<String>,
    pub gradient_stops: Option<Vec<Value>>,
    pub extra: Map<String, Value>,
}

impl Paint {
    pub fn solid(color: Rgba) -> Self {
        Paint { paint_type: PaintType::Solid, color: Some(color), image_ref: None, gradient_stops: None, extra: Map::new() }
    }

    pub fn image(image_ref: impl Into<String>) -> Self {
        let mut extra = Map::new();
        extra.insert("scaleMode".into(), Value::String("FILL".into()));
        Paint { paint_type: PaintType::Image, color: None, image_ref: Some(image_ref.into()), gradient_stops: None, extra }
    }

    pub fn visible(&self) -> bool {
        self.extra.get("visible").and_then(Value::as_bool).unwrap_or(true)
    }

    pub fn opacity(&self) -> f64 {
        self.extra.get("opacity").and_then(Value::as_f64).unwrap_or(1.0)
    }

    pub fn is_image(&self) -> bool {
        self.paint_type == PaintType::Image
    }

    /// First gradient stop color, if any.
    pub fn first_stop_color(&self) -> Option<Rgba> {
        let stop = self.gradient_stops.as_ref()?.first()?;
        json::color_from_value(stop.get("color")?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Effect {
    pub effect_type: String,
    pub visible: bool,
    pub color: Option<Rgba>,
    pub offset: Option<(f64, f64)>,
    pub radius: Option<f64>,
    pub spread: Option<f64>,
    pub extra: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TextStyle {
    pub font_family: Option<String>,
    pub font_weight: Option<f64>,
    pub font_size: Option<f64>,
    pub text_align_horizontal: Option<String>,
    pub line_height_px: Option<f64>,
    pub letter_spacing: Option<f64>,
    pub extra: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigmaNode {
    pub id: String,
    pub name: String,
    pub node_type: NodeType,
    pub visible: bool,
    pub opacity: f64,
    pub bounding_box: Option<Rect>,
    pub fills: Vec<Paint>,
    pub strokes: Vec<Paint>,
    pub effects: Vec<Effect>,
    pub corner_radius: Option<f64>,
    pub characters: Option<String>,
    pub text_style: Option<TextStyle>,
    pub layout_mode: LayoutMode,
    pub children: Vec<FigmaNode>,
    pub extra: Map<String, Value>,
}

impl FigmaNode {
    pub fn new(id: impl Into<String>, name: impl Into<String>, node_type: NodeType) -> Self {
        FigmaNode {
            id: id.into(),
            name: name.into(),
            node_type,
            visible: true,
            opacity: 1.0,
            bounding_box: None,
            fills: Vec::new(),
            strokes: Vec::new(),
            effects: Vec::new(),
            corner_radius: None,
            characters: None,
            text_style: None,
            layout_mode: LayoutMode::None,
            children: Vec::new(),
            extra: Map::new(),
        }
    }

    pub fn with_box(mut self, x: f64, y: f64, w: f64, h: f64) -> Self {
        self.bounding_box = Some(Rect::new(x, y, w, h));
        self
    }

    pub fn with_fill(mut self, paint: Paint) -> Self {
        self.fills.push(paint);
        self
    }

    pub fn with_children(mut self, children: Vec<FigmaNode>) -> Self {
        self.children = children;
        self
    }

    pub fn text(id: impl Into<String>, name: impl Into<String>, characters: impl Into<String>) -> Self {
        let mut n = FigmaNode::new(id, name, NodeType::Text);
        n.characters = Some(characters.into());
        n
    }

    /// Number of nodes in this subtree, self included.
    pub fn subtree_len(&self) -> usize {
        1 + self.children.iter().map(FigmaNode::subtree_len).sum::<usize>()
    }

    /// Fills, strokes, effects or a corner radius on the node itself.
    pub fn has_own_style(&self) -> bool {
        !self.fills.is_empty()
            || !self.strokes.is_empty()
            || !self.effects.is_empty()
            || self.corner_radius.is_some_and(|r| r != 0.0)
    }

    pub fn find(&self, id: &str) -> Option<&FigmaNode> {
        if self.id == id {
            return Some(self);
        }
        self.children.iter().find_map(|c| c.find(id))
    }

    /// Image references of IMAGE paints in fills and strokes.
    pub fn image_refs(&self) -> impl Iterator<Item = &str> {
        self.fills
            .iter()
            .chain(self.strokes.iter())
            .filter(|p| p.is_image())
            .filter_map(|p| p.image_ref.as_deref())
    }
}

/// Component or component-set definition, optionally with its node tree
/// embedded so instances can be inlined.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComponentDef {
    pub name: Option<String>,
    pub node: Option<FigmaNode>,
    pub extra: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StyleDef {
    pub name: Option<String>,
    pub style_type: Option<String>,
    pub extra: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SourceMeta {
    pub file_key: String,
    pub page_id: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigmaDocument {
    pub root: FigmaNode,
    pub components: BTreeMap<String, ComponentDef>,
    pub component_sets: BTreeMap<String, ComponentDef>,
    pub styles: BTreeMap<String, StyleDef>,
    pub source_meta: SourceMeta,
    /// Top-level keys other than the typed ones.
    pub extra: Map<String, Value>,
}

impl FigmaDocument {
    pub fn new(root: FigmaNode) -> Self {
        FigmaDocument {
            root,
            components: BTreeMap::new(),
            component_sets: BTreeMap::new(),
            styles: BTreeMap::new(),
            source_meta: SourceMeta::default(),
            extra: Map::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.root.subtree_len()
    }

    pub fn find(&self, id: &str) -> Option<&FigmaNode> {
        self.root.find(id)
    }

    /// Page size taken from the root frame's box.
    pub fn page_box(&self) -> Option<Rect> {
        self.root.bounding_box
    }
}
