//! Layout intermediate representation between refined design documents and
//! code generation.

mod build;
mod stack;

pub use build::{to_ir, to_ir_with, IrConfig, IrError};
pub use stack::{infer_stacking, Stacking};

use crate::figma::{Rect, Rgba};
use serde::{Deserialize, Serialize};

pub const IR_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Role {
    Container,
    Text,
    Image,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Layout {
    Absolute,
    Row,
    Column,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AxisAlign {
    Start,
    Center,
    End,
    SpaceBetween,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TextAlign {
    Left,
    Center,
    Right,
    Justified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Background {
    Color(Rgba),
    Image(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Border {
    pub width: f64,
    pub color: Rgba,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shadow {
    pub x: f64,
    pub y: f64,
    pub blur: f64,
    pub color: Rgba,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedStyle {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub background: Option<Background>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub border: Option<Border>,
    #[serde(default)]
    pub radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shadow: Option<Shadow>,
    #[serde(default = "one")]
    pub opacity: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for ResolvedStyle {
    fn default() -> Self {
        ResolvedStyle { background: None, border: None, radius: 0.0, shadow: None, opacity: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextSpec {
    pub content: String,
    pub font_size: f64,
    pub weight: u32,
    pub color: Rgba,
    pub align: TextAlign,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub font_family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line_height: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrNode {
    pub id: String,
    pub name: String,
    pub role: Role,
    /// Relative to the parent's box.
    #[serde(rename = "box")]
    pub bbox: Rect,
    pub layout: Layout,
    #[serde(default)]
    pub gap: f64,
    /// top, right, bottom, left.
    #[serde(default)]
    pub padding: [f64; 4],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub justify: Option<AxisAlign>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub align: Option<AxisAlign>,
    /// Stacking recovered from child geometry for ABSOLUTE containers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow_hint: Option<Layout>,
    #[serde(default)]
    pub style: ResolvedStyle,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<TextSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_path: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<IrNode>,
}

impl IrNode {
    pub fn container(id: impl Into<String>, bbox: Rect) -> Self {
        IrNode {
            id: id.into(),
            name: String::new(),
            role: Role::Container,
            bbox,
            layout: Layout::Absolute,
            gap: 0.0,
            padding: [0.0; 4],
            justify: None,
            align: None,
            flow_hint: None,
            style: ResolvedStyle::default(),
            text: None,
            image_path: None,
            children: Vec::new(),
        }
    }

    pub fn text(id: impl Into<String>, bbox: Rect, content: impl Into<String>, font_size: f64, weight: u32) -> Self {
        IrNode {
            role: Role::Text,
            text: Some(TextSpec {
                content: content.into(),
                font_size,
                weight,
                color: Rgba::BLACK,
                align: TextAlign::Left,
                font_family: None,
                line_height: None,
            }),
            ..IrNode::container(id, bbox)
        }
    }

    pub fn image(id: impl Into<String>, bbox: Rect, path: impl Into<String>) -> Self {
        IrNode { role: Role::Image, image_path: Some(path.into()), ..IrNode::container(id, bbox) }
    }

    pub fn with_children(mut self, children: Vec<IrNode>) -> Self {
        self.children = children;
        self
    }

    pub fn with_layout(mut self, layout: Layout) -> Self {
        self.layout = layout;
        self
    }

    pub fn subtree_len(&self) -> usize {
        1 + self.children.iter().map(IrNode::subtree_len).sum::<usize>()
    }

    /// Layout used for flow rendering: the declared one, else the inferred
    /// hint.
    pub fn effective_layout(&self) -> Layout {
        match (self.layout, self.flow_hint) {
            (Layout::Absolute, Some(h)) => h,
            (l, _) => l,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageSize {
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UiIr {
    pub ir_version: u32,
    pub page_size: PageSize,
    pub asset_manifest: Vec<String>,
    /// Lossy conversions and fallbacks taken while building.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub root: IrNode,
}

#[derive(Debug, thiserror::Error)]
pub enum IrJsonError {
    #[error("IR JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported ir_version {0} (expected {IR_VERSION})")]
    Version(u32),
}

impl UiIr {
    pub fn new(width: f64, height: f64, root: IrNode) -> Self {
        let mut ir = UiIr { ir_version: IR_VERSION, page_size: PageSize { width, height }, asset_manifest: Vec::new(), notes: Vec::new(), root };
        ir.asset_manifest = ir.collect_asset_paths();
        ir
    }

    /// Every image path referenced by the tree, sorted and unique.
    pub fn collect_asset_paths(&self) -> Vec<String> {
        fn rec(n: &IrNode, out: &mut std::collections::BTreeSet<String>) {
            if let Some(p) = &n.image_path {
                out.insert(p.clone());
            }
            if let Some(Background::Image(p)) = &n.style.background {
                out.insert(p.clone());
            }
            n.children.iter().for_each(|c| rec(c, out));
        }
        let mut set = std::collections::BTreeSet::new();
        rec(&self.root, &mut set);
        set.into_iter().collect()
    }

    pub fn node_count(&self) -> usize {
        self.root.subtree_len()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("IR serializes")
    }

    pub fn from_json(s: &str) -> Result<UiIr, IrJsonError> {
        let ir: UiIr = serde_json::from_str(s)?;
        if ir.ir_version != IR_VERSION {
            return Err(IrJsonError::Version(ir.ir_version));
        }
        Ok(ir)
    }
}
