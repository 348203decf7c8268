//! Metadata refinement: pruning, flattening and icon abstraction over the
//! node tree, then coordinate normalisation and asset integration.

mod assets;
mod coords;
mod flatten;
mod icons;
mod prune;

pub use assets::{integrate_assets, slugify};
pub use coords::{relativize_and_round, round_half_away};
pub use flatten::flatten_layers;
pub use icons::{abstract_icons, export_icon_svg, ExportedIcon};
pub use prune::{prune_empty_shapes, prune_invisible, prune_occluded};
pub(crate) use icons::{asset_id_for, fmt_num};

use crate::figma::{AssetKind, AssetStore, FigmaDocument, FigmaNode};
use serde::{Deserialize, Serialize};

pub const DEFAULT_STRIP_LIST: &[&str] = &[
    "locked",
    "exportSettings",
    "pluginData",
    "sharedPluginData",
    "prototypeStartNodeID",
    "transitionNodeID",
    "interactions",
    "reactions",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RefineConfig {
    pub decimal_places: u32,
    pub editor_property_strip_list: Vec<String>,
    pub icon_name_marker: String,
    /// When false, occlusion pruning is skipped: partial covers never make
    /// a node removable, so there is no weaker mode to fall back to.
    pub occlusion_requires_full_cover: bool,
}

impl Default for RefineConfig {
    fn default() -> Self {
        RefineConfig {
            decimal_places: 3,
            editor_property_strip_list: DEFAULT_STRIP_LIST.iter().map(|s| s.to_string()).collect(),
            icon_name_marker: "merge".into(),
            occlusion_requires_full_cover: true,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefineReport {
    pub removed_invisible: usize,
    pub removed_empty_shapes: usize,
    pub removed_occluded: usize,
    pub flattened_containers: usize,
    pub stripped_properties: usize,
    pub merged_icons: usize,
    pub dedup_collapsed: usize,
    pub before_nodes: usize,
    pub after_nodes: usize,
    /// Multi-child groups whose children share one style; logged only.
    pub style_merge_candidates: usize,
}

impl RefineReport {
    /// Adds the step counters of `other`; node totals are left alone.
    pub fn absorb(&mut self, other: &RefineReport) {
        self.removed_invisible += other.removed_invisible;
        self.removed_empty_shapes += other.removed_empty_shapes;
        self.removed_occluded += other.removed_occluded;
        self.flattened_containers += other.flattened_containers;
        self.stripped_properties += other.stripped_properties;
        self.merged_icons += other.merged_icons;
        self.dedup_collapsed += other.dedup_collapsed;
        self.style_merge_candidates += other.style_merge_candidates;
    }

    /// True when no step changed anything.
    pub fn is_noop(&self) -> bool {
        let mut z = *self;
        z.before_nodes = 0;
        z.after_nodes = 0;
        z.style_merge_candidates = 0;
        z == RefineReport::default()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RefineError {
    #[error("node {node_id} is visible but has no bounding box")]
    GeometryMissing { node_id: String },
    #[error("no asset bytes for reference {image_ref:?}")]
    MissingAsset { image_ref: String },
    #[error("embedded definition {key:?} is invalid: {message}")]
    InvalidDefinition { key: String, message: String },
}

pub fn strip_editor_properties(mut doc: FigmaDocument, config: &RefineConfig) -> (FigmaDocument, RefineReport) {
    fn strip(n: &mut FigmaNode, keys: &[String], count: &mut usize) {
        for k in keys {
            if n.extra.remove(k).is_some() {
                *count += 1;
            }
        }
        for c in &mut n.children {
            strip(c, keys, count);
        }
    }
    let mut count = 0;
    let keys = &config.editor_property_strip_list;
    strip(&mut doc.root, keys, &mut count);
    for def in doc.components.values_mut().chain(doc.component_sets.values_mut()) {
        if let Some(n) = def.node.as_mut() {
            strip(n, keys, &mut count);
        }
    }
    (doc, RefineReport { stripped_properties: count, ..Default::default() })
}

/// Runs every refinement step in order. Exported icon SVGs are added to
/// the store before asset integration rewrites references to local paths.
pub fn refine(
    doc: FigmaDocument,
    mut store: AssetStore,
    config: &RefineConfig,
) -> Result<(FigmaDocument, AssetStore, RefineReport), RefineError> {
    let before = doc.node_count();
    let mut report = RefineReport { before_nodes: before, ..Default::default() };

    // Normalising first means every threshold below sees the values that
    // end up in the output, which keeps a second pass a no-op.
    let doc = relativize_and_round(doc, config);
    let (doc, d) = prune_invisible(doc);
    report.absorb(&d);
    let (doc, d) = prune_empty_shapes(doc);
    report.absorb(&d);
    let (doc, d) = prune_occluded(doc, config)?;
    report.absorb(&d);
    let (doc, d) = flatten_layers(doc, config);
    report.absorb(&d);
    let (doc, d) = strip_editor_properties(doc, config);
    report.absorb(&d);
    let (doc, d, icons) = abstract_icons(doc, config);
    report.absorb(&d);
    for icon in icons {
        store.insert(icon.asset_id, icon.svg, AssetKind::Svg);
    }
    let doc = relativize_and_round(doc, config);
    let (doc, store, d) = integrate_assets(doc, store)?;
    report.absorb(&d);

    report.after_nodes = doc.node_count();
    log::debug!("refined {} -> {} nodes", report.before_nodes, report.after_nodes);
    Ok((doc, store, report))
}

/// Removes children (recursively) for which `drop` holds, counting every
/// removed node including descendants.
pub(crate) fn prune_where(n: &mut FigmaNode, drop: &dyn Fn(&FigmaNode) -> bool) -> usize {
    let mut removed = 0;
    n.children.retain(|c| {
        if drop(c) {
            removed += c.subtree_len();
            false
        } else {
            true
        }
    });
    for c in &mut n.children {
        removed += prune_where(c, drop);
    }
    removed
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::figma::{NodeType, Paint, Rgba};

    fn page(children: Vec<FigmaNode>) -> FigmaDocument {
        FigmaDocument::new(
            FigmaNode::new("0:1", "Page", NodeType::Frame)
                .with_box(0.0, 0.0, 400.0, 300.0)
                .with_fill(Paint::solid(Rgba::WHITE))
                .with_children(children),
        )
    }

    #[test]
    fn strip_removes_listed_keys_everywhere() {
        let mut a = FigmaNode::new("1", "a", NodeType::Rectangle).with_box(0.0, 0.0, 1.0, 1.0);
        a.extra.insert("locked".into(), true.into());
        a.extra.insert("custom".into(), 1.into());
        let doc = page(vec![a]);
        let (out, d) = strip_editor_properties(doc.clone(), &RefineConfig::default());
        assert_eq!(d.stripped_properties, 1);
        assert!(out.find("1").unwrap().extra.get("locked").is_none());

        let mut cfg = RefineConfig::default();
        cfg.editor_property_strip_list.push("custom".into());
        let (out, d) = strip_editor_properties(doc, &cfg);
        assert_eq!(d.stripped_properties, 2);
        assert!(out.find("1").unwrap().extra.is_empty());
    }

    #[test]
    fn nothing_to_refine_is_a_noop() {
        let mut r = FigmaNode::new("1", "r", NodeType::Rectangle)
            .with_box(10.0, 10.0, 50.0, 20.0)
            .with_fill(Paint::solid(Rgba::new(0.8, 0.0, 0.0, 1.0)));
        r.corner_radius = Some(4.0);
        let t = FigmaNode::text("2", "label", "Hi").with_box(10.0, 40.0, 30.0, 12.0);
        let doc = page(vec![r, t]);
        let (out, store, report) = refine(doc.clone(), AssetStore::new(), &RefineConfig::default()).unwrap();
        assert_eq!(out, doc);
        assert!(store.is_empty());
        assert!(report.is_noop());
        assert_eq!(report.before_nodes, report.after_nodes);
    }

    #[test]
    fn config_parses_from_toml_with_defaults() {
        let c: RefineConfig = toml::from_str("decimal_places = 2").unwrap();
        assert_eq!(c.decimal_places, 2);
        assert_eq!(c.icon_name_marker, "merge");
        assert!(toml::from_str::<RefineConfig>("bogus = 1").is_err());
    }
}
