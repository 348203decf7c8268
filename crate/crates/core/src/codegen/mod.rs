//! Rule-based templating from the layout IR to one HTML document styled
//! with Tailwind utility classes.
//!
//! Rules, in the order classes are emitted on an element:
//! - layout: ROW → `flex`, COLUMN → `flex flex-col`. ABSOLUTE children are
//!   absolutely positioned inside a `relative` parent in faithful mode. In
//!   responsive mode an ABSOLUTE container uses its stacking hint as a flex
//!   direction; without one its children are overlaid in a one-cell `grid`.
//! - responsive rows wider than the `md` breakpoint stack vertically below it.
//! - placement: `absolute left top w h` (faithful), or flow sizing relative to
//!   the parent's content box (`w-full`, fractions, `flex-1`, else lengths).
//! - lengths snap to the spacing scale within tolerance, else `[Npx]`. Faithful
//!   mode keeps exact pixel values.
//! - colours snap to the palette within the configured RGB distance, else
//!   `[#rrggbb]`.
//! - text: size, weight, colour, alignment, line height. Faithful mode also
//!   pins the font family.

mod html;
mod semantic;

pub use html::{escape_attr, escape_path, escape_text};
pub use semantic::{choose_semantic_tag, is_repeated_list, TagContext, TextBands, H1_MIN_PX};

use crate::figma::{Rect, Rgba};
use crate::ir::{AxisAlign, Background, IrNode, Layout, Role, UiIr};
use crate::tailwind::{self, fmt_px};
use html::El;
use serde::{Deserialize, Serialize};
use std::cell::RefCell;
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CodegenMode {
    FaithfulAbsolute,
    ResponsiveFlow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CodegenConfig {
    pub mode: CodegenMode,
    pub spacing_snap_tolerance: f64,
    /// Max Euclidean RGB distance (0-255 space) for palette snapping.
    pub palette_snap_distance: f64,
    pub semantic_tagging: bool,
    /// Snap lengths and type sizes to theme scales. Off keeps exact pixels.
    pub snap_scales: bool,
}

impl Default for CodegenConfig {
    fn default() -> Self {
        CodegenConfig::responsive()
    }
}

impl CodegenConfig {
    /// Pixel-exact absolute layout without semantic tags: the template
    /// conversion baseline.
    pub fn faithful() -> Self {
        CodegenConfig {
            mode: CodegenMode::FaithfulAbsolute,
            spacing_snap_tolerance: 1.0,
            palette_snap_distance: 8.0,
            semantic_tagging: false,
            snap_scales: false,
        }
    }

    pub fn responsive() -> Self {
        CodegenConfig {
            mode: CodegenMode::ResponsiveFlow,
            spacing_snap_tolerance: 1.0,
            palette_snap_distance: 8.0,
            semantic_tagging: true,
            snap_scales: true,
        }
    }

    pub fn for_mode(mode: CodegenMode) -> Self {
        match mode {
            CodegenMode::FaithfulAbsolute => Self::faithful(),
            CodegenMode::ResponsiveFlow => Self::responsive(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedPage {
    pub html: String,
    pub asset_refs_used: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CodegenError {
    #[error("image asset {path:?} on node {node_id} is not in the asset manifest")]
    MissingAsset { path: String, node_id: String },
    #[error("IR page has no drawable area")]
    EmptyIr,
    #[error("invalid codegen config: {0}")]
    InvalidConfig(String),
}

/// Scale token for `px`, or the arbitrary value `[<px>px]` when no step of
/// the spacing scale lies within `tolerance`.
pub fn snap_to_spacing_scale(px: f64, tolerance: f64) -> String {
    match tailwind::snap_scale(tailwind::SPACING, px, tolerance) {
        Some(t) => t.to_string(),
        None => format!("[{}px]", fmt_px(px)),
    }
}

const MD_BREAKPOINT: f64 = 768.0;

/// How a node is placed by its parent.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Placement {
    Root,
    Absolute,
    /// Flex item; `row` is the parent's main axis, `inner` its content box
    /// size, `fill` is set when siblings share the main axis evenly.
    Flow { row: bool, inner: (f64, f64), fill: bool },
    Overlay,
}

/// Spacing recovered for a flow container.
#[derive(Debug, Clone, PartialEq)]
struct FlowSpec {
    row: bool,
    gap: f64,
    /// Leading margin per child along the main axis, used when gaps differ.
    margins: Vec<f64>,
    padding: [f64; 4],
    justify: Option<AxisAlign>,
    align: Option<AxisAlign>,
}

struct Gen<'a> {
    cfg: &'a CodegenConfig,
    ir: &'a UiIr,
    bands: TextBands,
    landmark_parent: &'a str,
    used: RefCell<BTreeSet<String>>,
}

pub fn generate(ir: &UiIr, config: &CodegenConfig) -> Result<GeneratedPage, CodegenError> {
    for (name, v) in [("spacing_snap_tolerance", config.spacing_snap_tolerance), ("palette_snap_distance", config.palette_snap_distance)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(CodegenError::InvalidConfig(format!("{name} must be a finite value >= 0")));
        }
    }
    let p = &ir.page_size;
    if !(p.width > 0.0 && p.height > 0.0 && p.width.is_finite() && p.height.is_finite()) {
        return Err(CodegenError::EmptyIr);
    }
    check_assets(&ir.root, &ir.asset_manifest)?;

    let mut landmark = &ir.root;
    while landmark.children.len() == 1 && !landmark.children[0].children.is_empty() {
        landmark = &landmark.children[0];
    }
    let g = Gen { cfg: config, ir, bands: TextBands::from_root(&ir.root), landmark_parent: &landmark.id, used: RefCell::new(BTreeSet::new()) };
    let body = g.element(&ir.root, Placement::Root, None, (0.0, 0.0));
    let title = if ir.root.name.trim().is_empty() { "Page" } else { ir.root.name.trim() };
    let html = html::document(title, &body);
    let used = g.used.into_inner();
    let unused: Vec<_> = ir.asset_manifest.iter().filter(|a| !used.contains(*a)).collect();
    if !unused.is_empty() {
        log::warn!("manifest assets not referenced by any node: {unused:?}");
    }
    Ok(GeneratedPage { html, asset_refs_used: used })
}

fn check_assets(n: &IrNode, manifest: &[String]) -> Result<(), CodegenError> {
    let missing = |path: &str| CodegenError::MissingAsset { path: path.to_string(), node_id: n.id.clone() };
    if n.role == Role::Image {
        match n.image_path.as_deref() {
            Some(p) if !p.is_empty() && manifest.iter().any(|m| m == p) => {}
            p => return Err(missing(p.unwrap_or(""))),
        }
    }
    if let Some(Background::Image(p)) = &n.style.background {
        if !manifest.iter().any(|m| m == p) {
            return Err(missing(p));
        }
    }
    n.children.iter().try_for_each(|c| check_assets(c, manifest))
}

fn all_within(vals: impl Iterator<Item = f64> + Clone, tol: f64) -> bool {
    let lo = vals.clone().fold(f64::INFINITY, f64::min);
    let hi = vals.fold(f64::NEG_INFINITY, f64::max);
    hi - lo <= tol + 1e-9
}

/// Gaps, padding and cross-axis alignment implied by child positions of a
/// container laid out along one axis.
fn infer_flow(n: &IrNode, row: bool) -> FlowSpec {
    let k = &n.children;
    // (main start, main end, cross start, cross end)
    let span = |r: &Rect| if row { (r.x, r.right(), r.y, r.bottom()) } else { (r.y, r.bottom(), r.x, r.right()) };
    let cross_size = if row { n.bbox.height } else { n.bbox.width };
    let spans: Vec<_> = k.iter().map(|c| span(&c.bbox)).collect();
    let spacing: Vec<f64> = spans.windows(2).map(|w| (w[1].0 - w[0].1).max(0.0)).collect();
    let lead = spans.first().map(|s| s.0.max(0.0)).unwrap_or(0.0);
    let (gap, margins) = if spacing.is_empty() {
        (0.0, vec![0.0; k.len()])
    } else if all_within(spacing.iter().copied(), 1.0) {
        (spacing.iter().copied().fold(f64::INFINITY, f64::min), vec![0.0; k.len()])
    } else {
        (0.0, std::iter::once(0.0).chain(spacing.iter().copied()).collect())
    };
    let cross_lo = spans.iter().map(|s| s.2).fold(f64::INFINITY, f64::min).max(0.0);
    let cross_hi = spans.iter().map(|s| s.3).fold(f64::NEG_INFINITY, f64::max);
    let cross_tail = (cross_size - cross_hi).max(0.0);
    let align = if all_within(spans.iter().map(|s| s.2), 2.0) {
        AxisAlign::Start
    } else if all_within(spans.iter().map(|s| (s.2 + s.3) / 2.0), 2.0) {
        AxisAlign::Center
    } else if all_within(spans.iter().map(|s| s.3), 2.0) {
        AxisAlign::End
    } else {
        AxisAlign::Start
    };
    let padding = if row { [cross_lo, 0.0, cross_tail, lead] } else { [lead, cross_tail, 0.0, cross_lo] };
    FlowSpec { row, gap, margins, padding, justify: None, align: Some(align) }
}

fn declared_flow(n: &IrNode) -> FlowSpec {
    FlowSpec {
        row: n.layout == Layout::Row,
        gap: n.gap,
        margins: vec![0.0; n.children.len()],
        padding: n.padding,
        justify: n.justify,
        // Auto layout's default counter-axis alignment is MIN.
        align: Some(n.align.unwrap_or(AxisAlign::Start)),
    }
}

impl Gen<'_> {
    fn responsive(&self) -> bool {
        self.cfg.mode == CodegenMode::ResponsiveFlow
    }

    /// Length suffix: scale step or `[Npx]`.
    fn len(&self, px: f64) -> String {
        if self.cfg.snap_scales {
            snap_to_spacing_scale(px, self.cfg.spacing_snap_tolerance)
        } else {
            format!("[{}px]", fmt_px(px))
        }
    }

    /// `prefix-len`, with the sign moved in front for negative scale steps.
    fn signed(&self, prefix: &str, px: f64) -> String {
        let t = self.len(px.abs());
        if px < 0.0 && !t.starts_with('[') {
            format!("-{prefix}-{t}")
        } else if px < 0.0 {
            format!("{prefix}-[-{}px]", fmt_px(-px))
        } else {
            format!("{prefix}-{t}")
        }
    }

    fn color(&self, prefix: &str, c: Rgba) -> Option<String> {
        if c.a <= 0.0 {
            return None;
        }
        let (name, d) = tailwind::nearest_palette(c);
        let pct = (c.a * 100.0).round();
        if d <= self.cfg.palette_snap_distance {
            let alpha = if c.a >= 1.0 {
                String::new()
            } else if pct as i64 % 5 == 0 {
                format!("/{pct}")
            } else {
                format!("/[{}]", fmt_px(c.a))
            };
            return Some(format!("{prefix}-{name}{alpha}"));
        }
        let [r, g, b] = c.to_rgb8();
        if c.a >= 1.0 {
            Some(format!("{prefix}-[#{r:02x}{g:02x}{b:02x}]"))
        } else {
            let a = (c.a.clamp(0.0, 1.0) * 255.0).round() as u8;
            Some(format!("{prefix}-[#{r:02x}{g:02x}{b:02x}{a:02x}]"))
        }
    }

    fn scale_or_arbitrary(&self, prefix: &str, scale: &[(&str, f64)], px: f64) -> String {
        let snapped = if self.cfg.snap_scales { tailwind::snap_scale(scale, px, self.cfg.spacing_snap_tolerance) } else { None };
        match snapped {
            Some("") => prefix.to_string(),
            Some(s) => format!("{prefix}-{s}"),
            None => format!("{prefix}-[{}px]", fmt_px(px)),
        }
    }

    fn style_classes(&self, el: &mut El, n: &IrNode) {
        let s = &n.style;
        match &s.background {
            Some(Background::Color(c)) => {
                if let Some(t) = self.color("bg", *c) {
                    el.class(t);
                }
            }
            Some(Background::Image(p)) => {
                self.used.borrow_mut().insert(p.clone());
                el.class(format!("bg-[url('{}')]", escape_path(p)));
                el.class("bg-cover");
                el.class("bg-center");
            }
            None => {}
        }
        if let Some(b) = s.border {
            if b.width > 0.0 {
                el.class(self.scale_or_arbitrary("border", tailwind::BORDER_WIDTHS, b.width));
                if let Some(t) = self.color("border", b.color) {
                    el.class(t);
                }
            }
        }
        let min_side = n.bbox.width.min(n.bbox.height);
        if s.radius > 0.0 {
            if min_side > 0.0 && s.radius >= min_side / 2.0 - 0.5 {
                el.class("rounded-full");
            } else {
                el.class(self.scale_or_arbitrary("rounded", tailwind::RADII, s.radius));
            }
        }
        if let Some(sh) = s.shadow {
            let [r, g, b] = sh.color.to_rgb8();
            let a = (sh.color.a.clamp(0.0, 1.0) * 255.0).round() as u8;
            el.class(format!("shadow-[{}px_{}px_{}px_#{r:02x}{g:02x}{b:02x}{a:02x}]", fmt_px(sh.x), fmt_px(sh.y), fmt_px(sh.blur)));
        }
        if s.opacity < 1.0 {
            let pct = (s.opacity * 100.0).round();
            if pct as i64 % 5 == 0 && (s.opacity * 100.0 - pct).abs() < 1e-6 {
                el.class(format!("opacity-{pct}"));
            } else {
                el.class(format!("opacity-[{}]", fmt_px(s.opacity)));
            }
        }
    }

    fn text_classes(&self, el: &mut El, n: &IrNode) {
        let Some(t) = &n.text else { return };
        el.class(self.scale_or_arbitrary("text", tailwind::FONT_SIZES, t.font_size));
        let w = ((t.weight as f64 / 100.0).round() * 100.0).clamp(100.0, 900.0) as u32;
        if w != 400 {
            if let Some((name, _)) = tailwind::FONT_WEIGHTS.iter().find(|(_, v)| *v == w) {
                el.class(format!("font-{name}"));
            }
        }
        if let Some(c) = self.color("text", t.color) {
            el.class(c);
        }
        match t.align {
            crate::ir::TextAlign::Left => {}
            crate::ir::TextAlign::Center => el.class("text-center"),
            crate::ir::TextAlign::Right => el.class("text-right"),
            crate::ir::TextAlign::Justified => el.class("text-justify"),
        }
        if let Some(lh) = t.line_height {
            el.class(self.scale_or_arbitrary("leading", tailwind::LEADING, lh));
        }
        if !self.responsive() {
            if let Some(f) = &t.font_family {
                let f: String = f.chars().filter(|c| c.is_ascii_alphanumeric() || *c == ' ' || *c == '-').collect();
                if !f.trim().is_empty() {
                    el.class(format!("font-['{}']", f.trim().replace(' ', "_")));
                }
            }
        }
        if t.content.contains('\n') {
            el.class("whitespace-pre-line");
        }
    }

    /// Sizing and offset classes from the parent's placement rule.
    fn placement_classes(&self, el: &mut El, n: &IrNode, placement: Placement, margin: f64) {
        let b = n.bbox;
        let leaf = n.children.is_empty();
        match placement {
            Placement::Root => {
                if self.responsive() {
                    el.class("mx-auto");
                    el.class("w-full");
                    match tailwind::snap_scale(tailwind::MAX_WIDTHS, b.width, self.cfg.spacing_snap_tolerance) {
                        Some(s) => el.class(format!("max-w-{s}")),
                        None => el.class(format!("max-w-[{}px]", fmt_px(b.width))),
                    }
                    el.class("min-h-screen");
                } else {
                    el.class("relative");
                    el.class(format!("w-{}", self.len(b.width)));
                    el.class(format!("h-{}", self.len(b.height)));
                }
            }
            Placement::Absolute => {
                el.class("absolute");
                el.class(self.signed("left", b.x));
                el.class(self.signed("top", b.y));
                el.class(format!("w-{}", self.len(b.width)));
                el.class(format!("h-{}", self.len(b.height)));
            }
            Placement::Overlay => {
                el.class("col-start-1");
                el.class("row-start-1");
                if b.x != 0.0 {
                    el.class(self.signed("ml", b.x));
                }
                if b.y != 0.0 {
                    el.class(self.signed("mt", b.y));
                }
                if n.role != Role::Text {
                    el.class(format!("w-{}", self.len(b.width)));
                    el.class(format!("h-{}", self.len(b.height)));
                }
            }
            Placement::Flow { row, inner, fill } => {
                if margin > 0.0 {
                    el.class(self.signed(if row { "ml" } else { "mt" }, margin));
                }
                if !self.responsive() {
                    el.class(format!("w-{}", self.len(b.width)));
                    el.class(format!("h-{}", self.len(b.height)));
                    el.class("shrink-0");
                    return;
                }
                if n.role != Role::Text {
                    if row && fill {
                        el.class("flex-1");
                        el.class("min-w-0");
                    } else {
                        el.class(self.flow_width(b.width, inner.0));
                        if row {
                            el.class("shrink-0");
                        }
                    }
                    if leaf || self.overlay(n) {
                        el.class(format!("h-{}", self.len(b.height)));
                    }
                }
            }
        }
    }

    /// Width relative to the parent's content box where a fraction fits.
    fn flow_width(&self, w: f64, inner: f64) -> String {
        if inner > 0.0 && (w - inner).abs() <= 1.0 {
            return "w-full".into();
        }
        if inner > 0.0 {
            for &(num, den) in tailwind::FRACTIONS {
                if (w - inner * num as f64 / den as f64).abs() <= 1.0 {
                    return format!("w-{num}/{den}");
                }
            }
        }
        format!("w-{}", self.len(w))
    }

    fn overlay(&self, n: &IrNode) -> bool {
        self.responsive() && n.effective_layout() == Layout::Absolute && !n.children.is_empty()
    }

    /// Flow spec for a container whose children are laid out by flex.
    fn flow_spec(&self, n: &IrNode) -> Option<FlowSpec> {
        match (n.layout, self.responsive()) {
            (Layout::Row | Layout::Column, _) => Some(declared_flow(n)),
            (Layout::Absolute, true) => match n.flow_hint {
                Some(Layout::Row) => Some(infer_flow(n, true)),
                Some(Layout::Column) => Some(infer_flow(n, false)),
                _ => None,
            },
            (Layout::Absolute, false) => None,
        }
    }

    fn layout_classes(&self, el: &mut El, n: &IrNode, f: &FlowSpec) {
        el.class("flex");
        if !f.row {
            el.class("flex-col");
        } else if self.responsive() && n.bbox.width > MD_BREAKPOINT {
            el.class("flex-col");
            el.class("md:flex-row");
        }
        if f.gap > 0.0 {
            el.class(format!("gap-{}", self.len(f.gap)));
        }
        let [t, r, b, l] = f.padding;
        if t > 0.0 && t == r && r == b && b == l {
            el.class(format!("p-{}", self.len(t)));
        } else {
            if t == b && t > 0.0 {
                el.class(format!("py-{}", self.len(t)));
            } else {
                for (side, v) in [("pt", t), ("pb", b)] {
                    if v > 0.0 {
                        el.class(format!("{side}-{}", self.len(v)));
                    }
                }
            }
            if l == r && l > 0.0 {
                el.class(format!("px-{}", self.len(l)));
            } else {
                for (side, v) in [("pr", r), ("pl", l)] {
                    if v > 0.0 {
                        el.class(format!("{side}-{}", self.len(v)));
                    }
                }
            }
        }
        match f.justify {
            Some(AxisAlign::Center) => el.class("justify-center"),
            Some(AxisAlign::End) => el.class("justify-end"),
            Some(AxisAlign::SpaceBetween) => el.class("justify-between"),
            _ => {}
        }
        match f.align {
            Some(AxisAlign::Start) => el.class("items-start"),
            Some(AxisAlign::Center) => el.class("items-center"),
            Some(AxisAlign::End) => el.class("items-end"),
            _ => {}
        }
    }

    fn tag(&self, n: &IrNode, ctx: Option<&TagContext>, is_root: bool) -> &'static str {
        if is_root {
            return "body";
        }
        match (self.cfg.semantic_tagging, ctx) {
            (true, Some(ctx)) => choose_semantic_tag(n, ctx),
            _ => match n.role {
                Role::Image => "img",
                Role::Text => "span",
                Role::Container => "div",
            },
        }
    }

    fn element(&self, n: &IrNode, placement: Placement, ctx: Option<&TagContext>, origin: (f64, f64)) -> El {
        self.element_with_margin(n, placement, ctx, origin, 0.0)
    }

    fn element_with_margin(&self, n: &IrNode, placement: Placement, ctx: Option<&TagContext>, origin: (f64, f64), margin: f64) -> El {
        let is_root = placement == Placement::Root;
        let tag = self.tag(n, ctx, is_root);
        let mut el = El::new(tag);
        let abs = if is_root { (0.0, 0.0) } else { (origin.0 + n.bbox.x, origin.1 + n.bbox.y) };

        let flow = self.flow_spec(n);
        if let Some(f) = &flow {
            self.layout_classes(&mut el, n, f);
        } else if self.overlay(n) {
            el.class("grid");
        } else if !n.children.is_empty() && !matches!(placement, Placement::Root | Placement::Absolute) {
            el.class("relative");
        }
        self.placement_classes(&mut el, n, placement, margin);
        self.style_classes(&mut el, n);

        match n.role {
            Role::Image => {
                let p = n.image_path.clone().unwrap_or_default();
                self.used.borrow_mut().insert(p.clone());
                el.attrs.push(("src", escape_path(&p)));
                el.attrs.push(("alt", n.name.clone()));
                el.class("object-cover");
                return el;
            }
            Role::Text => {
                self.text_classes(&mut el, n);
                el.text = n.text.as_ref().map(|t| t.content.clone());
                return el;
            }
            Role::Container => {}
        }

        let child_placement = match &flow {
            Some(f) => {
                let inner = (n.bbox.width - f.padding[1] - f.padding[3], n.bbox.height - f.padding[0] - f.padding[2]);
                let fill = f.row && n.children.len() >= 2 && self.even_fill(n, f, inner.0);
                Placement::Flow { row: f.row, inner, fill }
            }
            None if self.overlay(n) => Placement::Overlay,
            None => Placement::Absolute,
        };
        let margins = flow.as_ref().map(|f| f.margins.clone()).unwrap_or_default();
        let is_list = tag == "ul";
        let landmark_level = n.id == self.landmark_parent;
        for (i, c) in n.children.iter().enumerate() {
            let cctx = TagContext {
                page: &self.ir.page_size,
                parent_origin: abs,
                siblings: &n.children,
                index: i,
                landmark_level,
                parent_is_list: is_list,
                bands: &self.bands,
            };
            let child = self.element_with_margin(c, child_placement, Some(&cctx), abs, margins.get(i).copied().unwrap_or(0.0));
            el.children.push(child);
        }
        el
    }

    /// Children of a row share the content width evenly (within 1px).
    fn even_fill(&self, n: &IrNode, f: &FlowSpec, inner: f64) -> bool {
        let k = &n.children;
        if k.iter().any(|c| c.role == Role::Text) || f.margins.iter().any(|m| *m > 0.0) {
            return false;
        }
        let w0 = k[0].bbox.width;
        let total = k.iter().map(|c| c.bbox.width).sum::<f64>() + f.gap * (k.len() - 1) as f64;
        k.iter().all(|c| (c.bbox.width - w0).abs() <= 1.0) && (total - inner).abs() <= 1.0
    }
}
