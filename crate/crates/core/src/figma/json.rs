use super::*;
use std::collections::HashSet;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    MalformedJson { line: usize, column: usize, message: String },
    #[error("schema violation at {path}: {message}")]
    SchemaViolation { path: String, message: String },
}

impl ParseError {
    /// Location of the failure: a `$.`-rooted JSON path, or `line:column`
    /// for syntax errors.
    pub fn path(&self) -> String {
        match self {
            ParseError::MalformedJson { line, column, .. } => format!("{line}:{column}"),
            ParseError::SchemaViolation { path, .. } => path.clone(),
        }
    }
}

fn violation(path: &str, message: impl Into<String>) -> ParseError {
    ParseError::SchemaViolation { path: path.to_string(), message: message.into() }
}

const NODE_KEYS: &[&str] = &[
    "id",
    "name",
    "type",
    "visible",
    "opacity",
    "absoluteBoundingBox",
    "fills",
    "strokes",
    "effects",
    "cornerRadius",
    "characters",
    "style",
    "layoutMode",
    "children",
];

const TOP_KEYS: &[&str] = &["document", "components", "componentSets", "styles", "fileKey", "pageId"];

/// Parses a Figma REST-API style JSON byte stream.
///
/// Accepts a sample document (`{"document": <FRAME>, ...}`), a full file
/// response whose `document` is a DOCUMENT or CANVAS (the first FRAME under
/// the first CANVAS becomes the root), a `nodes` endpoint response, or a
/// bare FRAME node.
pub fn parse_document(raw: &[u8]) -> Result<FigmaDocument, ParseError> {
    let value: Value = serde_json::from_slice(raw).map_err(|e| ParseError::MalformedJson {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    parse_value(&value)
}

pub fn parse_value(value: &Value) -> Result<FigmaDocument, ParseError> {
    let obj = value.as_object().ok_or_else(|| violation("$", "top level must be an object"))?;

    if let Some(nodes) = obj.get("nodes").and_then(Value::as_object) {
        if !obj.contains_key("document") {
            let (key, inner) = nodes.iter().next().ok_or_else(|| violation("$.nodes", "empty nodes map"))?;
            let path = format!("$.nodes[{key:?}]");
            return parse_top(inner, &path, &Map::new());
        }
    }
    if obj.contains_key("document") {
        return parse_top(value, "$", obj);
    }
    if obj.contains_key("type") {
        let mut ids = HashSet::new();
        let root = parse_node(value, "$", &mut ids)?;
        check_root(&root, "$")?;
        return Ok(FigmaDocument::new(root));
    }
    Err(violation("$", "expected a `document` key or a node object"))
}

fn parse_top(value: &Value, path: &str, outer: &Map<String, Value>) -> Result<FigmaDocument, ParseError> {
    let obj = value.as_object().ok_or_else(|| violation(path, "expected object"))?;
    let doc_path = format!("{path}.document");
    let doc_val = obj.get("document").ok_or_else(|| violation(path, "missing `document`"))?;

    let mut page_id = obj.get("pageId").and_then(Value::as_str).unwrap_or_default().to_string();
    let (root_val, root_path) = locate_root(doc_val, &doc_path, &mut page_id)?;

    let mut ids = HashSet::new();
    let root = parse_node(root_val, &root_path, &mut ids)?;
    check_root(&root, &root_path)?;

    let mut doc = FigmaDocument::new(root);
    doc.components = parse_component_map(obj.get("components"), &format!("{path}.components"))?;
    doc.component_sets = parse_component_map(obj.get("componentSets"), &format!("{path}.componentSets"))?;
    doc.styles = parse_style_map(obj.get("styles"), &format!("{path}.styles"))?;
    doc.source_meta = SourceMeta {
        file_key: obj
            .get("fileKey")
            .or_else(|| outer.get("fileKey"))
            .and_then(Value::as_str)
            .unwrap_or_default()
            .to_string(),
        page_id,
    };
    for (k, v) in obj {
        if !TOP_KEYS.contains(&k.as_str()) {
            doc.extra.insert(k.clone(), v.clone());
        }
    }
    Ok(doc)
}

fn locate_root<'a>(v: &'a Value, path: &str, page_id: &mut String) -> Result<(&'a Value, String), ParseError> {
    let ty = v.get("type").and_then(Value::as_str).unwrap_or_default();
    match ty {
        "DOCUMENT" => {
            let canvases = v.get("children").and_then(Value::as_array).map(Vec::as_slice).unwrap_or_default();
            let (i, canvas) = canvases
                .iter()
                .enumerate()
                .find(|(_, c)| c.get("type").and_then(Value::as_str) == Some("CANVAS"))
                .ok_or_else(|| violation(path, "DOCUMENT has no CANVAS child"))?;
            locate_root(canvas, &format!("{path}.children[{i}]"), page_id)
        }
        "CANVAS" => {
            if let Some(id) = v.get("id").and_then(Value::as_str) {
                *page_id = id.to_string();
            }
            let kids = v.get("children").and_then(Value::as_array).map(Vec::as_slice).unwrap_or_default();
            let (i, frame) = kids
                .iter()
                .enumerate()
                .find(|(_, c)| c.get("type").and_then(Value::as_str) == Some("FRAME"))
                .ok_or_else(|| violation(path, "CANVAS has no FRAME child"))?;
            Ok((frame, format!("{path}.children[{i}]")))
        }
        _ => Ok((v, path.to_string())),
    }
}

fn check_root(root: &FigmaNode, path: &str) -> Result<(), ParseError> {
    if root.node_type != NodeType::Frame {
        return Err(violation(path, format!("root must be a FRAME, found {}", root.node_type.as_str())));
    }
    Ok(())
}

pub(crate) fn parse_component_map(v: Option<&Value>, path: &str) -> Result<BTreeMap<String, ComponentDef>, ParseError> {
    let mut out = BTreeMap::new();
    let Some(v) = v else { return Ok(out) };
    let obj = v.as_object().ok_or_else(|| violation(path, "expected object"))?;
    for (key, def) in obj {
        let p = format!("{path}[{key:?}]");
        let def_obj = def.as_object().ok_or_else(|| violation(&p, "expected object"))?;
        let mut cd = ComponentDef::default();
        for (k, v) in def_obj {
            match k.as_str() {
                "name" => cd.name = Some(expect_str(v, &format!("{p}.name"))?.to_string()),
                "node" => {
                    // Embedded definition trees carry their own id space.
                    let mut ids = HashSet::new();
                    cd.node = Some(parse_node(v, &format!("{p}.node"), &mut ids)?);
                }
                _ => {
                    cd.extra.insert(k.clone(), v.clone());
                }
            }
        }
        out.insert(key.clone(), cd);
    }
    Ok(out)
}

pub(crate) fn parse_style_map(v: Option<&Value>, path: &str) -> Result<BTreeMap<String, StyleDef>, ParseError> {
    let mut out = BTreeMap::new();
    let Some(v) = v else { return Ok(out) };
    let obj = v.as_object().ok_or_else(|| violation(path, "expected object"))?;
    for (key, def) in obj {
        let p = format!("{path}[{key:?}]");
        let def_obj = def.as_object().ok_or_else(|| violation(&p, "expected object"))?;
        let mut sd = StyleDef::default();
        for (k, v) in def_obj {
            match k.as_str() {
                "name" => sd.name = Some(expect_str(v, &format!("{p}.name"))?.to_string()),
                "styleType" => sd.style_type = Some(expect_str(v, &format!("{p}.styleType"))?.to_string()),
                _ => {
                    sd.extra.insert(k.clone(), v.clone());
                }
            }
        }
        out.insert(key.clone(), sd);
    }
    Ok(out)
}

fn expect_str<'a>(v: &'a Value, path: &str) -> Result<&'a str, ParseError> {
    v.as_str().ok_or_else(|| violation(path, "expected string"))
}

fn expect_f64(v: &Value, path: &str) -> Result<f64, ParseError> {
    let f = v.as_f64().ok_or_else(|| violation(path, "expected number"))?;
    if !f.is_finite() {
        return Err(violation(path, "number is not finite"));
    }
    Ok(f)
}

fn expect_bool(v: &Value, path: &str) -> Result<bool, ParseError> {
    v.as_bool().ok_or_else(|| violation(path, "expected boolean"))
}

fn parse_node(v: &Value, path: &str, ids: &mut HashSet<String>) -> Result<FigmaNode, ParseError> {
    let obj = v.as_object().ok_or_else(|| violation(path, "node must be an object"))?;
    let id = obj
        .get("id")
        .ok_or_else(|| violation(path, "missing `id`"))
        .and_then(|v| expect_str(v, &format!("{path}.id")))?
        .to_string();
    if !ids.insert(id.clone()) {
        return Err(violation(path, format!("duplicate node id {id:?}")));
    }
    let ty = obj
        .get("type")
        .ok_or_else(|| violation(path, "missing `type`"))
        .and_then(|v| expect_str(v, &format!("{path}.type")))?;
    let mut node = FigmaNode::new(id, "", NodeType::parse(ty));

    for (k, val) in obj {
        let p = format!("{path}.{k}");
        match k.as_str() {
            "id" | "type" => {}
            "name" => node.name = expect_str(val, &p)?.to_string(),
            "visible" => node.visible = expect_bool(val, &p)?,
            "opacity" => {
                let o = expect_f64(val, &p)?;
                if !(0.0..=1.0).contains(&o) {
                    return Err(violation(&p, format!("opacity {o} outside [0, 1]")));
                }
                node.opacity = o;
            }
            "absoluteBoundingBox" => {
                if !val.is_null() {
                    node.bounding_box = Some(parse_rect(val, &p)?);
                }
            }
            "fills" => node.fills = parse_paints(val, &p)?,
            "strokes" => node.strokes = parse_paints(val, &p)?,
            "effects" => node.effects = parse_effects(val, &p)?,
            "cornerRadius" => node.corner_radius = Some(expect_f64(val, &p)?),
            "characters" => node.characters = Some(expect_str(val, &p)?.to_string()),
            "style" => node.text_style = Some(parse_text_style(val, &p)?),
            "layoutMode" => {
                node.layout_mode = match expect_str(val, &p)? {
                    "NONE" => LayoutMode::None,
                    "HORIZONTAL" => LayoutMode::Horizontal,
                    "VERTICAL" => LayoutMode::Vertical,
                    // GRID and future modes fall back to free positioning.
                    other => {
                        node.extra.insert("layoutModeOriginal".into(), Value::String(other.into()));
                        LayoutMode::None
                    }
                }
            }
            "children" => {
                let arr = val.as_array().ok_or_else(|| violation(&p, "expected array"))?;
                node.children = arr
                    .iter()
                    .enumerate()
                    .map(|(i, c)| parse_node(c, &format!("{p}[{i}]"), ids))
                    .collect::<Result<_, _>>()?;
            }
            _ => {
                node.extra.insert(k.clone(), val.clone());
            }
        }
    }
    if node.characters.is_some() && node.node_type != NodeType::Text {
        return Err(violation(path, "`characters` on a non-TEXT node"));
    }
    Ok(node)
}

fn parse_rect(v: &Value, path: &str) -> Result<Rect, ParseError> {
    let obj = v.as_object().ok_or_else(|| violation(path, "expected object"))?;
    let field = |k: &str| -> Result<f64, ParseError> {
        let p = format!("{path}.{k}");
        obj.get(k).ok_or_else(|| violation(&p, "missing")).and_then(|v| expect_f64(v, &p))
    };
    Ok(Rect::new(field("x")?, field("y")?, field("width")?, field("height")?))
}

pub(crate) fn color_from_value(v: &Value) -> Option<Rgba> {
    let obj = v.as_object()?;
    Some(Rgba::new(
        obj.get("r")?.as_f64()?,
        obj.get("g")?.as_f64()?,
        obj.get("b")?.as_f64()?,
        obj.get("a").and_then(Value::as_f64).unwrap_or(1.0),
    ))
}

fn parse_color(v: &Value, path: &str) -> Result<Rgba, ParseError> {
    let c = color_from_value(v).ok_or_else(|| violation(path, "expected {r, g, b, a} color"))?;
    if ![c.r, c.g, c.b, c.a].iter().all(|x| x.is_finite()) {
        return Err(violation(path, "color channel not finite"));
    }
    Ok(c)
}

fn parse_paints(v: &Value, path: &str) -> Result<Vec<Paint>, ParseError> {
    let arr = v.as_array().ok_or_else(|| violation(path, "expected array"))?;
    arr.iter().enumerate().map(|(i, p)| parse_paint(p, &format!("{path}[{i}]"))).collect()
}

fn parse_paint(v: &Value, path: &str) -> Result<Paint, ParseError> {
    let obj = v.as_object().ok_or_else(|| violation(path, "paint must be an object"))?;
    let ty = obj
        .get("type")
        .ok_or_else(|| violation(path, "missing paint `type`"))
        .and_then(|t| expect_str(t, &format!("{path}.type")))?;
    let mut paint = Paint {
        paint_type: PaintType::parse(ty),
        color: None,
        image_ref: None,
        gradient_stops: None,
        extra: Map::new(),
    };
    for (k, val) in obj {
        let p = format!("{path}.{k}");
        match k.as_str() {
            "type" => {}
            "color" => paint.color = Some(parse_color(val, &p)?),
            "imageRef" => paint.image_ref = Some(expect_str(val, &p)?.to_string()),
            "gradientStops" => {
                paint.gradient_stops = Some(val.as_array().ok_or_else(|| violation(&p, "expected array"))?.clone())
            }
            _ => {
                paint.extra.insert(k.clone(), val.clone());
            }
        }
    }
    match paint.paint_type {
        PaintType::Image if paint.image_ref.as_deref().is_none_or(str::is_empty) => {
            Err(violation(path, "IMAGE paint without imageRef"))
        }
        PaintType::Solid if paint.color.is_none() => Err(violation(path, "SOLID paint without color")),
        _ => Ok(paint),
    }
}

fn parse_effects(v: &Value, path: &str) -> Result<Vec<Effect>, ParseError> {
    let arr = v.as_array().ok_or_else(|| violation(path, "expected array"))?;
    let mut out = Vec::with_capacity(arr.len());
    for (i, e) in arr.iter().enumerate() {
        let p = format!("{path}[{i}]");
        let obj = e.as_object().ok_or_else(|| violation(&p, "effect must be an object"))?;
        let ty = obj
            .get("type")
            .ok_or_else(|| violation(&p, "missing effect `type`"))
            .and_then(|t| expect_str(t, &format!("{p}.type")))?;
        let mut effect = Effect {
            effect_type: ty.to_string(),
            visible: true,
            color: None,
            offset: None,
            radius: None,
            spread: None,
            extra: Map::new(),
        };
        for (k, val) in obj {
            let kp = format!("{p}.{k}");
            match k.as_str() {
                "type" => {}
                "visible" => effect.visible = expect_bool(val, &kp)?,
                "color" => effect.color = Some(parse_color(val, &kp)?),
                "radius" => effect.radius = Some(expect_f64(val, &kp)?),
                "spread" => effect.spread = Some(expect_f64(val, &kp)?),
                "offset" => {
                    let o = val.as_object().ok_or_else(|| violation(&kp, "expected {x, y}"))?;
                    let x = o.get("x").map(|v| expect_f64(v, &kp)).transpose()?.unwrap_or(0.0);
                    let y = o.get("y").map(|v| expect_f64(v, &kp)).transpose()?.unwrap_or(0.0);
                    effect.offset = Some((x, y));
                }
                _ => {
                    effect.extra.insert(k.clone(), val.clone());
                }
            }
        }
        out.push(effect);
    }
    Ok(out)
}

fn parse_text_style(v: &Value, path: &str) -> Result<TextStyle, ParseError> {
    let obj = v.as_object().ok_or_else(|| violation(path, "expected object"))?;
    let mut ts = TextStyle::default();
    for (k, val) in obj {
        let p = format!("{path}.{k}");
        match k.as_str() {
            "fontFamily" => ts.font_family = Some(expect_str(val, &p)?.to_string()),
            "fontWeight" => ts.font_weight = Some(expect_f64(val, &p)?),
            "fontSize" => ts.font_size = Some(expect_f64(val, &p)?),
            "textAlignHorizontal" => ts.text_align_horizontal = Some(expect_str(val, &p)?.to_string()),
            "lineHeightPx" => ts.line_height_px = Some(expect_f64(val, &p)?),
            "letterSpacing" => ts.letter_spacing = Some(expect_f64(val, &p)?),
            _ => {
                ts.extra.insert(k.clone(), val.clone());
            }
        }
    }
    Ok(ts)
}

// ---------------------------------------------------------------------------
// serialization

/// Integral values are written without a fractional part.
pub(crate) fn num(f: f64) -> Value {
    if f.fract() == 0.0 && f.abs() < 9.0e15 {
        Value::from(f as i64)
    } else {
        serde_json::Number::from_f64(f).map(Value::Number).unwrap_or(Value::Null)
    }
}

fn rect_value(r: &Rect) -> Value {
    let mut m = Map::new();
    m.insert("x".into(), num(r.x));
    m.insert("y".into(), num(r.y));
    m.insert("width".into(), num(r.width));
    m.insert("height".into(), num(r.height));
    Value::Object(m)
}

pub(crate) fn color_value(c: &Rgba) -> Value {
    let mut m = Map::new();
    m.insert("r".into(), num(c.r));
    m.insert("g".into(), num(c.g));
    m.insert("b".into(), num(c.b));
    m.insert("a".into(), num(c.a));
    Value::Object(m)
}

pub(crate) fn paint_value(p: &Paint) -> Value {
    let mut m = Map::new();
    m.insert("type".into(), Value::String(p.paint_type.as_str().to_string()));
    if let Some(c) = &p.color {
        m.insert("color".into(), color_value(c));
    }
    if let Some(r) = &p.image_ref {
        m.insert("imageRef".into(), Value::String(r.clone()));
    }
    if let Some(s) = &p.gradient_stops {
        m.insert("gradientStops".into(), Value::Array(s.clone()));
    }
    for (k, v) in &p.extra {
        m.insert(k.clone(), v.clone());
    }
    Value::Object(m)
}

fn effect_value(e: &Effect) -> Value {
    let mut m = Map::new();
    m.insert("type".into(), Value::String(e.effect_type.clone()));
    if !e.visible {
        m.insert("visible".into(), Value::Bool(false));
    }
    if let Some(c) = &e.color {
        m.insert("color".into(), color_value(c));
    }
    if let Some((x, y)) = e.offset {
        let mut o = Map::new();
        o.insert("x".into(), num(x));
        o.insert("y".into(), num(y));
        m.insert("offset".into(), Value::Object(o));
    }
    if let Some(r) = e.radius {
        m.insert("radius".into(), num(r));
    }
    if let Some(s) = e.spread {
        m.insert("spread".into(), num(s));
    }
    for (k, v) in &e.extra {
        m.insert(k.clone(), v.clone());
    }
    Value::Object(m)
}

fn text_style_value(t: &TextStyle) -> Value {
    let mut m = Map::new();
    if let Some(f) = &t.font_family {
        m.insert("fontFamily".into(), Value::String(f.clone()));
    }
    if let Some(w) = t.font_weight {
        m.insert("fontWeight".into(), num(w));
    }
    if let Some(s) = t.font_size {
        m.insert("fontSize".into(), num(s));
    }
    if let Some(a) = &t.text_align_horizontal {
        m.insert("textAlignHorizontal".into(), Value::String(a.clone()));
    }
    if let Some(l) = t.line_height_px {
        m.insert("lineHeightPx".into(), num(l));
    }
    if let Some(l) = t.letter_spacing {
        m.insert("letterSpacing".into(), num(l));
    }
    for (k, v) in &t.extra {
        m.insert(k.clone(), v.clone());
    }
    Value::Object(m)
}

pub(crate) fn node_value(n: &FigmaNode) -> Value {
    let mut m = Map::new();
    m.insert("id".into(), Value::String(n.id.clone()));
    m.insert("name".into(), Value::String(n.name.clone()));
    m.insert("type".into(), Value::String(n.node_type.as_str().to_string()));
    if !n.visible {
        m.insert("visible".into(), Value::Bool(false));
    }
    if n.opacity != 1.0 {
        m.insert("opacity".into(), num(n.opacity));
    }
    if let Some(r) = &n.bounding_box {
        m.insert("absoluteBoundingBox".into(), rect_value(r));
    }
    if !n.fills.is_empty() {
        m.insert("fills".into(), Value::Array(n.fills.iter().map(paint_value).collect()));
    }
    if !n.strokes.is_empty() {
        m.insert("strokes".into(), Value::Array(n.strokes.iter().map(paint_value).collect()));
    }
    if !n.effects.is_empty() {
        m.insert("effects".into(), Value::Array(n.effects.iter().map(effect_value).collect()));
    }
    if let Some(r) = n.corner_radius {
        m.insert("cornerRadius".into(), num(r));
    }
    if let Some(c) = &n.characters {
        m.insert("characters".into(), Value::String(c.clone()));
    }
    if let Some(t) = &n.text_style {
        m.insert("style".into(), text_style_value(t));
    }
    if n.layout_mode != LayoutMode::None {
        m.insert("layoutMode".into(), Value::String(n.layout_mode.as_str().into()));
    }
    for (k, v) in &n.extra {
        if !NODE_KEYS.contains(&k.as_str()) {
            m.insert(k.clone(), v.clone());
        }
    }
    if !n.children.is_empty() {
        m.insert("children".into(), Value::Array(n.children.iter().map(node_value).collect()));
    }
    Value::Object(m)
}

fn component_map_value(map: &BTreeMap<String, ComponentDef>) -> Value {
    let mut out = Map::new();
    for (k, def) in map {
        let mut m = Map::new();
        if let Some(n) = &def.name {
            m.insert("name".into(), Value::String(n.clone()));
        }
        for (ek, ev) in &def.extra {
            m.insert(ek.clone(), ev.clone());
        }
        if let Some(node) = &def.node {
            m.insert("node".into(), node_value(node));
        }
        out.insert(k.clone(), Value::Object(m));
    }
    Value::Object(out)
}

fn style_map_value(map: &BTreeMap<String, StyleDef>) -> Value {
    let mut out = Map::new();
    for (k, def) in map {
        let mut m = Map::new();
        if let Some(n) = &def.name {
            m.insert("name".into(), Value::String(n.clone()));
        }
        if let Some(t) = &def.style_type {
            m.insert("styleType".into(), Value::String(t.clone()));
        }
        for (ek, ev) in &def.extra {
            m.insert(ek.clone(), ev.clone());
        }
        out.insert(k.clone(), Value::Object(m));
    }
    Value::Object(out)
}

/// Canonical JSON value of a document.
pub fn to_value(doc: &FigmaDocument) -> Value {
    let mut m = Map::new();
    if !doc.source_meta.file_key.is_empty() {
        m.insert("fileKey".into(), Value::String(doc.source_meta.file_key.clone()));
    }
    if !doc.source_meta.page_id.is_empty() {
        m.insert("pageId".into(), Value::String(doc.source_meta.page_id.clone()));
    }
    for (k, v) in &doc.extra {
        if !TOP_KEYS.contains(&k.as_str()) {
            m.insert(k.clone(), v.clone());
        }
    }
    m.insert("document".into(), node_value(&doc.root));
    if !doc.components.is_empty() {
        m.insert("components".into(), component_map_value(&doc.components));
    }
    if !doc.component_sets.is_empty() {
        m.insert("componentSets".into(), component_map_value(&doc.component_sets));
    }
    if !doc.styles.is_empty() {
        m.insert("styles".into(), style_map_value(&doc.styles));
    }
    Value::Object(m)
}

/// Compact canonical serialization.
pub fn serialize_document(doc: &FigmaDocument) -> Vec<u8> {
    serde_json::to_vec(&to_value(doc)).expect("JSON values always serialize")
}

pub fn serialize_document_pretty(doc: &FigmaDocument) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(&to_value(doc)).expect("JSON values always serialize");
    out.push(b'\n');
    out
}
