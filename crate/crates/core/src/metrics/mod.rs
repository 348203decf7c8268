//! Responsiveness (RUR, APR, FU, BC) and maintainability (STR, AVU, ISR,
//! CCR) metrics over generated HTML/Tailwind.
//!
//! Counting domains:
//! - RUR, AVU, CCR and BC read every element of the document.
//! - APR and FU read `<body>` and its descendants.
//! - STR and ISR read the descendants of `<body>` only.
//!
//! An empty denominator yields 0 and a flag naming the metric.

mod html;
mod report;
mod tokens;

pub use html::{parse_declarations, parse_html, Declaration, Element, HtmlDocumentModel, HtmlError};
pub use report::{write_csv, write_csv_header, CsvRow, CSV_HEADER};
pub use tokens::{classify_token, css_property_group, unit_of_value, ClassToken, Grammar, PropertyGroup, TokenKind, UnitClass};

use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

pub const SEMANTIC_TAGS_VERSION: &str = "semantic-tags/1";

/// Tags counted as semantic by STR.
pub const SEMANTIC_TAGS: &[&str] = &[
    "header", "nav", "main", "section", "article", "aside", "footer", "h1", "h2", "h3", "h4", "h5", "h6", "p", "ul", "ol", "li", "table", "thead",
    "tbody", "tr", "th", "td", "form", "label", "button", "input", "select", "textarea", "figure", "figcaption", "img", "a",
];

/// Inline properties counted as layout declarations by RUR.
fn is_layout_property(p: &str) -> bool {
    matches!(p, "width" | "height" | "min-width" | "min-height" | "max-width" | "max-height" | "gap" | "row-gap" | "column-gap")
        || p.starts_with("margin")
        || p.starts_with("padding")
        || p.starts_with("inset")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fraction {
    pub numerator: u64,
    pub denominator: u64,
    pub value: f64,
}

impl Fraction {
    pub fn new(numerator: u64, denominator: u64) -> Self {
        let value = if denominator == 0 { 0.0 } else { numerator as f64 / denominator as f64 };
        Fraction { numerator, denominator, value }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub rur: Fraction,
    pub apr: Fraction,
    pub fu: Fraction,
    pub bc: Fraction,
    pub str: Fraction,
    pub avu: Fraction,
    pub isr: Fraction,
    pub ccr: Fraction,
    /// `<METRIC>:empty-denominator` for each degenerate metric.
    pub flags: Vec<String>,
}

impl MetricsReport {
    pub fn metrics(&self) -> [(&'static str, Fraction); 8] {
        [
            ("RUR", self.rur),
            ("APR", self.apr),
            ("FU", self.fu),
            ("BC", self.bc),
            ("STR", self.str),
            ("AVU", self.avu),
            ("ISR", self.isr),
            ("CCR", self.ccr),
        ]
    }
}

fn all_elements(doc: &HtmlDocumentModel) -> impl Iterator<Item = &Element> {
    doc.elements.iter()
}

fn style_value<'a>(e: &'a Element, prop: &str) -> Option<&'a str> {
    e.inline_style.as_ref()?.iter().rev().find(|d| d.property == prop).map(|d| d.value.as_str())
}

pub fn rur(doc: &HtmlDocumentModel) -> Fraction {
    let (mut rel, mut total) = (0, 0);
    for e in all_elements(doc) {
        for t in &e.classes {
            if matches!(t.property_group, PropertyGroup::LayoutSize | PropertyGroup::Spacing) && t.kind != TokenKind::Custom {
                total += 1;
                rel += (t.unit == UnitClass::Relative) as u64;
            }
        }
        for d in e.inline_style.iter().flatten().filter(|d| is_layout_property(&d.property)) {
            total += 1;
            rel += (unit_of_value(&d.value) == UnitClass::Relative) as u64;
        }
    }
    Fraction::new(rel, total)
}

pub fn apr(doc: &HtmlDocumentModel) -> Fraction {
    let (mut abs, mut positioned) = (0, 0);
    for i in doc.body_and_descendants() {
        let e = &doc.elements[i];
        let mut kinds: BTreeSet<&str> = e.classes.iter().filter(|t| t.kind == TokenKind::ScaleUtility).map(|t| t.utility.as_str()).filter(|u| matches!(*u, "absolute" | "fixed" | "relative" | "sticky")).collect();
        if let Some(v) = style_value(e, "position") {
            let v = v.trim_end_matches("!important").trim();
            if matches!(v, "absolute" | "fixed" | "relative" | "sticky") {
                kinds.insert(v);
            }
        }
        if !kinds.is_empty() {
            positioned += 1;
            abs += (kinds.contains("absolute") || kinds.contains("fixed")) as u64;
        }
    }
    Fraction::new(abs, positioned)
}

fn is_flex_or_grid(e: &Element) -> bool {
    e.classes.iter().any(|t| t.kind == TokenKind::ScaleUtility && matches!(t.utility.as_str(), "flex" | "inline-flex" | "grid" | "inline-grid"))
        || style_value(e, "display").is_some_and(|v| matches!(v.trim_end_matches("!important").trim(), "flex" | "inline-flex" | "grid" | "inline-grid"))
}

pub fn fu(doc: &HtmlDocumentModel) -> Fraction {
    let (mut flex, mut containers) = (0, 0);
    for i in doc.body_and_descendants() {
        let e = &doc.elements[i];
        if !e.children.is_empty() {
            containers += 1;
            flex += is_flex_or_grid(e) as u64;
        }
    }
    Fraction::new(flex, containers)
}

/// Viewport range (0 = S .. 3 = XL) targeted by a breakpoint name.
fn range_of_breakpoint(name: &str) -> Option<usize> {
    match name {
        "sm" => Some(0),
        "md" => Some(1),
        "lg" => Some(2),
        "xl" | "2xl" => Some(3),
        _ => None,
    }
}

fn range_of_width(px: f64) -> usize {
    match px {
        w if w >= 1280.0 => 3,
        w if w >= 1024.0 => 2,
        w if w >= 768.0 => 1,
        _ => 0,
    }
}

/// Ranges targeted by a responsive variant: `md`, `max-md`, `min-[900px]`.
fn variant_range(v: &str) -> Option<usize> {
    let v = v.strip_prefix("max-").or_else(|| v.strip_prefix("min-")).unwrap_or(v);
    if let Some(px) = v.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
        let n: f64 = px.trim_end_matches(|c: char| c.is_ascii_alphabetic()).parse().ok()?;
        let scale = if px.ends_with("rem") || px.ends_with("em") { 16.0 } else { 1.0 };
        return Some(range_of_width(n * scale));
    }
    range_of_breakpoint(v)
}

fn media_query_ranges(css: &str, out: &mut [bool; 4]) {
    let lower = css.to_ascii_lowercase();
    for (i, _) in lower.match_indices("@media") {
        let q = &lower[i..lower[i..].find('{').map(|j| i + j).unwrap_or(lower.len())];
        for key in ["min-width", "max-width", "width"] {
            let mut rest = q;
            while let Some(k) = rest.find(key) {
                rest = &rest[k + key.len()..];
                let v = rest.trim_start_matches([':', ' ', '>', '<', '=']);
                let num: String = v.chars().take_while(|c| c.is_ascii_digit() || *c == '.').collect();
                if let Ok(n) = num.parse::<f64>() {
                    let unit = &v[num.len()..];
                    let px = if unit.starts_with("em") || unit.starts_with("rem") { n * 16.0 } else { n };
                    out[range_of_width(px)] = true;
                }
            }
        }
    }
}

pub fn bc(doc: &HtmlDocumentModel) -> Fraction {
    let mut covered = [false; 4];
    for e in all_elements(doc) {
        for t in &e.classes {
            for v in &t.variant_prefixes {
                if let Some(r) = variant_range(v) {
                    covered[r] = true;
                }
            }
        }
        if e.tag == "style" {
            if let Some(css) = &e.raw_text {
                media_query_ranges(css, &mut covered);
            }
        }
        if e.tag == "link" {
            if let Some(m) = e.attributes.get("media") {
                media_query_ranges(&format!("@media {m}{{"), &mut covered);
            }
        }
    }
    Fraction::new(covered.iter().filter(|c| **c).count() as u64, 4)
}

pub fn str_ratio(doc: &HtmlDocumentModel) -> Fraction {
    let body = doc.body_descendants();
    let sem = body.iter().filter(|&&i| SEMANTIC_TAGS.contains(&doc.elements[i].tag.as_str())).count();
    Fraction::new(sem as u64, body.len() as u64)
}

pub fn avu(doc: &HtmlDocumentModel) -> Fraction {
    let toks = all_elements(doc).flat_map(|e| e.classes.iter());
    let (n, arb) = toks.fold((0, 0), |(n, a), t| (n + 1, a + (t.kind == TokenKind::ArbitraryValue) as u64));
    Fraction::new(arb, n)
}

pub fn isr(doc: &HtmlDocumentModel) -> Fraction {
    let body = doc.body_descendants();
    let styled = body.iter().filter(|&&i| doc.elements[i].inline_style.as_ref().is_some_and(|d| !d.is_empty())).count();
    Fraction::new(styled as u64, body.len() as u64)
}

pub fn ccr(doc: &HtmlDocumentModel) -> Fraction {
    let mut uses: BTreeMap<&str, u64> = BTreeMap::new();
    for e in all_elements(doc) {
        let distinct: BTreeSet<&str> = e.classes.iter().filter(|t| t.kind == TokenKind::Custom).map(|t| t.raw.as_str()).collect();
        for c in distinct {
            *uses.entry(c).or_default() += 1;
        }
    }
    Fraction::new(uses.values().filter(|n| **n >= 2).count() as u64, uses.len() as u64)
}

pub fn evaluate_doc(doc: &HtmlDocumentModel) -> MetricsReport {
    let mut r = MetricsReport {
        rur: rur(doc),
        apr: apr(doc),
        fu: fu(doc),
        bc: bc(doc),
        str: str_ratio(doc),
        avu: avu(doc),
        isr: isr(doc),
        ccr: ccr(doc),
        flags: Vec::new(),
    };
    r.flags = r.metrics().iter().filter(|(_, f)| f.denominator == 0).map(|(n, _)| format!("{n}:empty-denominator")).collect();
    r
}

pub fn evaluate(html: &str) -> Result<MetricsReport, HtmlError> {
    Ok(evaluate_doc(&parse_html(html)?))
}
