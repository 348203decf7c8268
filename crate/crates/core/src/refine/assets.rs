use super::icons::asset_id_for;
use super::{RefineError, RefineReport};
use crate::figma::{parse_component_map, parse_style_map, AssetStore, FigmaDocument, FigmaNode, NodeType, Paint};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, BTreeSet, HashMap};

pub const LOCAL_PREFIX: &str = "assets/";

/// File-name slug: lowercase ASCII alphanumerics separated by single
/// dashes, at most 48 characters, "asset" when nothing survives.
pub fn slugify(name: &str) -> String {
    let mut out = String::new();
    for c in name.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('-') && !out.is_empty() {
            out.push('-');
        }
    }
    let mut s = out.trim_end_matches('-').to_string();
    if s.len() > 48 {
        s.truncate(48);
        s = s.trim_end_matches('-').to_string();
    }
    if s.is_empty() {
        "asset".into()
    } else {
        s
    }
}

fn svg_ref(n: &FigmaNode) -> String {
    n.extra.get("assetId").and_then(Value::as_str).map(str::to_string).unwrap_or_else(|| asset_id_for(&n.id))
}

fn collect_refs(n: &FigmaNode, seen: &mut BTreeSet<String>, out: &mut Vec<(String, String)>) {
    let mut refs: Vec<String> = n.image_refs().map(str::to_string).collect();
    if n.node_type == NodeType::SvgAsset {
        refs.push(svg_ref(n));
    }
    for r in refs {
        if seen.insert(r.clone()) {
            out.push((r, n.name.clone()));
        }
    }
    for c in &n.children {
        collect_refs(c, seen, out);
    }
}

/// Moves every referenced asset to a local `assets/<slug>.<ext>` path,
/// collapsing byte-identical files that share a node name, converts
/// SVG_ASSET nodes to image-filled rectangles and embeds pending
/// definitions. The returned store holds only referenced files.
pub fn integrate_assets(
    mut doc: FigmaDocument,
    store: AssetStore,
) -> Result<(FigmaDocument, AssetStore, RefineReport), RefineError> {
    let mut refs = Vec::new();
    collect_refs(&doc.root, &mut BTreeSet::new(), &mut refs);

    let mut out = AssetStore { dedup_map: store.dedup_map.clone(), ..Default::default() };
    let mut used: BTreeSet<String> = refs
        .iter()
        .filter(|(r, _)| r.starts_with(LOCAL_PREFIX) && store.assets.contains_key(r))
        .map(|(r, _)| r.clone())
        .collect();
    let mut mapping: HashMap<String, String> = HashMap::new();
    // (slug, content hash) -> (primary raw ref, local path)
    let mut groups: BTreeMap<(String, [u8; 32]), (String, String)> = BTreeMap::new();
    let mut collapsed = 0;

    for (r, name) in &refs {
        if used.contains(r) {
            let bytes = store.assets[r].clone();
            let kind = store.kinds[r];
            out.insert(r.clone(), bytes, kind);
            mapping.insert(r.clone(), r.clone());
            continue;
        }
        let (key, bytes) = store.resolve(r).ok_or_else(|| RefineError::MissingAsset { image_ref: r.clone() })?;
        let kind = store.kinds[key];
        let hash: [u8; 32] = Sha256::digest(bytes).into();
        let slug = slugify(name);
        if let Some((primary, path)) = groups.get(&(slug.clone(), hash)) {
            if r != primary {
                out.dedup_map.insert(r.clone(), primary.clone());
                collapsed += 1;
            }
            mapping.insert(r.clone(), path.clone());
            continue;
        }
        let ext = kind.extension();
        let mut path = format!("{LOCAL_PREFIX}{slug}.{ext}");
        let mut k = 2;
        while used.contains(&path) {
            path = format!("{LOCAL_PREFIX}{slug}-{k}.{ext}");
            k += 1;
        }
        used.insert(path.clone());
        out.insert(path.clone(), bytes.to_vec(), kind);
        groups.insert((slug, hash), (r.clone(), path.clone()));
        mapping.insert(r.clone(), path);
    }
    // Keep dedup_map one level deep: a primary never appears as a key.
    let primaries: BTreeSet<String> = out.dedup_map.values().cloned().collect();
    out.dedup_map.retain(|k, _| !primaries.contains(k));

    rewrite(&mut doc.root, &mapping);
    embed_definitions(&mut doc, &store)?;
    Ok((doc, out, RefineReport { dedup_collapsed: collapsed, ..Default::default() }))
}

fn rewrite(n: &mut FigmaNode, mapping: &HashMap<String, String>) {
    for p in n.fills.iter_mut().chain(n.strokes.iter_mut()) {
        if p.is_image() {
            if let Some(path) = p.image_ref.as_ref().and_then(|r| mapping.get(r)) {
                p.image_ref = Some(path.clone());
            }
        }
    }
    if n.node_type == NodeType::SvgAsset {
        let path = mapping[&svg_ref(n)].clone();
        n.node_type = NodeType::Rectangle;
        n.extra.remove("assetId");
        n.fills = vec![Paint::image(path)];
    }
    for c in &mut n.children {
        rewrite(c, mapping);
    }
}

fn embed_definitions(doc: &mut FigmaDocument, store: &AssetStore) -> Result<(), RefineError> {
    let defs = &store.definitions;
    let as_obj = |m: &BTreeMap<String, Value>| Value::Object(m.iter().map(|(k, v)| (k.clone(), v.clone())).collect::<Map<_, _>>());
    let bad = |e: crate::figma::ParseError| RefineError::InvalidDefinition { key: e.path(), message: e.to_string() };
    for (k, v) in parse_component_map(Some(&as_obj(&defs.components)), "$.components").map_err(bad)? {
        doc.components.entry(k).or_insert(v);
    }
    for (k, v) in parse_component_map(Some(&as_obj(&defs.component_sets)), "$.componentSets").map_err(bad)? {
        doc.component_sets.entry(k).or_insert(v);
    }
    for (k, v) in parse_style_map(Some(&as_obj(&defs.styles)), "$.styles").map_err(bad)? {
        doc.styles.entry(k).or_insert(v);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::figma::{AssetKind, PaintType, Rgba};

    fn icon(id: &str, name: &str) -> FigmaNode {
        let mut n = FigmaNode::new(id, name, NodeType::SvgAsset).with_box(0.0, 0.0, 8.0, 8.0);
        n.extra.insert("assetId".into(), Value::String(asset_id_for(id)));
        n
    }

    fn page(children: Vec<FigmaNode>) -> FigmaDocument {
        FigmaDocument::new(FigmaNode::new("root", "Page", NodeType::Frame).with_box(0.0, 0.0, 100.0, 100.0).with_children(children))
    }

    #[test]
    fn identical_icons_with_same_name_share_a_file() {
        let mut store = AssetStore::new();
        store.insert("svg-1", b"<svg>a</svg>".to_vec(), AssetKind::Svg);
        store.insert("svg-2", b"<svg>a</svg>".to_vec(), AssetKind::Svg);
        let (doc, store, d) = integrate_assets(page(vec![icon("1", "arrow"), icon("2", "arrow")]), store).unwrap();
        assert_eq!(d.dedup_collapsed, 1);
        assert_eq!(store.assets.keys().collect::<Vec<_>>(), ["assets/arrow.svg"]);
        assert_eq!(store.dedup_map.get("svg-2").map(String::as_str), Some("svg-1"));
        for c in &doc.root.children {
            assert_eq!(c.node_type, NodeType::Rectangle);
            assert_eq!(c.fills[0].paint_type, PaintType::Image);
            assert_eq!(c.fills[0].image_ref.as_deref(), Some("assets/arrow.svg"));
            assert!(c.extra.get("assetId").is_none());
        }
    }

    #[test]
    fn same_name_different_content_kept_apart() {
        let mut store = AssetStore::new();
        store.insert("svg-1", b"<svg>a</svg>".to_vec(), AssetKind::Svg);
        store.insert("svg-2", b"<svg>b</svg>".to_vec(), AssetKind::Svg);
        let (doc, store, d) = integrate_assets(page(vec![icon("1", "arrow"), icon("2", "arrow")]), store).unwrap();
        assert_eq!(d.dedup_collapsed, 0);
        assert_eq!(store.len(), 2);
        assert_eq!(doc.root.children[1].fills[0].image_ref.as_deref(), Some("assets/arrow-2.svg"));
    }

    #[test]
    fn image_fills_become_local_paths() {
        let png = {
            let mut b = Vec::new();
            image::RgbImage::from_pixel(1, 1, image::Rgb([1, 2, 3]))
                .write_to(&mut std::io::Cursor::new(&mut b), image::ImageFormat::Png)
                .unwrap();
            b
        };
        let mut store = AssetStore::new();
        store.insert("abc123", png.clone(), AssetKind::Png);
        let photo = FigmaNode::new("p", "Hero Photo!", NodeType::Rectangle).with_box(0.0, 0.0, 5.0, 5.0).with_fill(Paint::image("abc123"));
        let (doc, store, _) = integrate_assets(page(vec![photo]), store).unwrap();
        assert_eq!(doc.root.children[0].fills[0].image_ref.as_deref(), Some("assets/hero-photo.png"));
        assert_eq!(store.get("assets/hero-photo.png"), Some(png.as_slice()));
        // Already-local input is left as is.
        let (doc2, store2, _) = integrate_assets(doc.clone(), store.clone()).unwrap();
        assert_eq!(doc2, doc);
        assert_eq!(store2.assets, store.assets);
    }

    #[test]
    fn missing_bytes_is_an_error() {
        let photo = FigmaNode::new("p", "p", NodeType::Rectangle).with_box(0.0, 0.0, 5.0, 5.0).with_fill(Paint::image("nope"));
        let err = integrate_assets(page(vec![photo]), AssetStore::new()).unwrap_err();
        assert_eq!(err, RefineError::MissingAsset { image_ref: "nope".into() });
    }

    #[test]
    fn definitions_are_embedded() {
        let mut store = AssetStore::new();
        store.definitions.components.insert("c1".into(), serde_json::json!({"name": "Button"}));
        store.definitions.styles.insert("s1".into(), serde_json::json!({"name": "Primary", "styleType": "FILL"}));
        let doc = page(vec![FigmaNode::new("r", "r", NodeType::Rectangle).with_fill(Paint::solid(Rgba::BLACK))]);
        let (doc, store, _) = integrate_assets(doc, store).unwrap();
        assert_eq!(doc.components["c1"].name.as_deref(), Some("Button"));
        assert_eq!(doc.styles["s1"].style_type.as_deref(), Some("FILL"));
        assert!(store.definitions.is_empty());
    }

    #[test]
    fn slugs() {
        assert_eq!(slugify("Arrow / Left"), "arrow-left");
        assert_eq!(slugify("  ✓ "), "asset");
        assert_eq!(slugify("__x__"), "x");
    }
}
