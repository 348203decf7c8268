//! Tailwind class token lexer backed by the shipped utility grammar.

use crate::tailwind;
use serde::Serialize;
use std::collections::HashMap;
use std::sync::OnceLock;

const GRAMMAR_SRC: &str = include_str!("../../resources/tailwind-3.4-subset.grammar");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TokenKind {
    ScaleUtility,
    ArbitraryValue,
    /// A variant chain on a utility the grammar does not know.
    VariantPrefixed,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PropertyGroup {
    LayoutSize,
    Position,
    Display,
    Spacing,
    Color,
    Typography,
    Other,
}

impl PropertyGroup {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "LAYOUT_SIZE" => Self::LayoutSize,
            "POSITION" => Self::Position,
            "DISPLAY" => Self::Display,
            "SPACING" => Self::Spacing,
            "COLOR" => Self::Color,
            "TYPOGRAPHY" => Self::Typography,
            "OTHER" => Self::Other,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum UnitClass {
    Relative,
    Absolute,
    Unitless,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassToken {
    pub raw: String,
    pub kind: TokenKind,
    pub variant_prefixes: Vec<String>,
    pub property_group: PropertyGroup,
    pub unit: UnitClass,
    /// Utility part with variants, `!` and leading `-` removed.
    pub utility: String,
}

#[derive(Debug, Clone, PartialEq)]
enum ValueSet {
    Bare,
    Spacing,
    Fraction,
    SizeRel,
    SizeKw,
    MaxW,
    Screens,
    Color,
    FontSize,
    Int,
    Arb,
    Kw(Vec<String>),
}

#[derive(Debug, Clone)]
struct Family {
    group: PropertyGroup,
    sets: Vec<ValueSet>,
}

#[derive(Debug)]
pub struct Grammar {
    pub version: String,
    exact: HashMap<String, PropertyGroup>,
    families: HashMap<String, Vec<Family>>,
}

impl ValueSet {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "bare" => Self::Bare,
            "spacing" => Self::Spacing,
            "fraction" => Self::Fraction,
            "size-rel" => Self::SizeRel,
            "size-kw" => Self::SizeKw,
            "maxw" => Self::MaxW,
            "screens" => Self::Screens,
            "color" => Self::Color,
            "fontsize" => Self::FontSize,
            "int" => Self::Int,
            "arb" => Self::Arb,
            _ => Self::Kw(s.strip_prefix("kw:")?.split('|').map(str::to_string).collect()),
        })
    }

    /// Unit class of `value` when this set accepts it.
    fn accepts(&self, value: &str) -> Option<UnitClass> {
        let in_scale = |scale: &[(&str, f64)]| scale.iter().any(|(n, _)| *n == value);
        match self {
            Self::Bare => value.is_empty().then_some(UnitClass::Unitless),
            Self::Spacing => in_scale(tailwind::SPACING).then_some(match value {
                "0" => UnitClass::Unitless,
                "px" => UnitClass::Absolute,
                _ => UnitClass::Relative,
            }),
            Self::Fraction => {
                let (n, d) = value.split_once('/')?;
                let (n, d) = (n.parse::<u32>().ok()?, d.parse::<u32>().ok()?);
                tailwind::FRACTIONS.contains(&(n, d)).then_some(UnitClass::Relative)
            }
            Self::SizeRel => matches!(value, "full" | "screen" | "svw" | "lvw" | "dvw" | "svh" | "lvh" | "dvh").then_some(UnitClass::Relative),
            Self::SizeKw => matches!(value, "auto" | "min" | "max" | "fit" | "none").then_some(UnitClass::Unitless),
            Self::MaxW => (in_scale(tailwind::MAX_WIDTHS) || value == "prose").then_some(UnitClass::Relative),
            Self::Screens => value
                .strip_prefix("screen-")
                .is_some_and(|b| tailwind::BREAKPOINTS.iter().any(|(n, _)| *n == b))
                .then_some(UnitClass::Absolute),
            Self::Color => {
                let (name, modifier) = value.split_once('/').unwrap_or((value, ""));
                let mod_ok = modifier.is_empty() || modifier.bytes().all(|b| b.is_ascii_digit());
                (tailwind::is_palette_color(name) && mod_ok).then_some(UnitClass::Unitless)
            }
            Self::FontSize => in_scale(tailwind::FONT_SIZES).then_some(UnitClass::Unitless),
            Self::Int => (!value.is_empty() && value.bytes().all(|b| b.is_ascii_digit())).then_some(UnitClass::Unitless),
            Self::Arb => None,
            Self::Kw(list) => list.iter().any(|k| k == value).then_some(UnitClass::Unitless),
        }
    }
}

impl Grammar {
    pub fn parse(src: &str) -> Result<Grammar, String> {
        let mut g = Grammar { version: String::new(), exact: HashMap::new(), families: HashMap::new() };
        for (no, line) in src.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let bad = || format!("grammar line {}: {line}", no + 1);
            match parts.as_slice() {
                ["version", v] => g.version = v.to_string(),
                ["exact", group, toks @ ..] => {
                    let group = PropertyGroup::parse(group).ok_or_else(bad)?;
                    for t in toks {
                        g.exact.insert(t.to_string(), group);
                    }
                }
                ["family", prefix, group, sets @ ..] if !sets.is_empty() => {
                    let group = PropertyGroup::parse(group).ok_or_else(bad)?;
                    let sets = sets.iter().map(|s| ValueSet::parse(s)).collect::<Option<Vec<_>>>().ok_or_else(bad)?;
                    g.families.entry(prefix.to_string()).or_default().push(Family { group, sets });
                }
                _ => return Err(bad()),
            }
        }
        if g.version.is_empty() {
            return Err("grammar has no version line".into());
        }
        Ok(g)
    }

    /// The grammar shipped with the crate.
    pub fn builtin() -> &'static Grammar {
        static G: OnceLock<Grammar> = OnceLock::new();
        G.get_or_init(|| Grammar::parse(GRAMMAR_SRC).expect("builtin grammar parses"))
    }

    fn match_value(&self, prefix: &str, value: &str) -> Option<(PropertyGroup, UnitClass)> {
        self.families.get(prefix)?.iter().find_map(|f| f.sets.iter().find_map(|s| s.accepts(value)).map(|u| (f.group, u)))
    }

    /// Group and unit of a known utility without brackets.
    fn match_utility(&self, u: &str) -> Option<(PropertyGroup, UnitClass)> {
        if let Some(g) = self.exact.get(u) {
            return Some((*g, UnitClass::Unitless));
        }
        if let Some(m) = self.match_value(u, "") {
            return Some(m);
        }
        // Longest family prefix first.
        u.match_indices('-').rev().find_map(|(i, _)| self.match_value(&u[..i], &u[i + 1..]))
    }

    fn arbitrary_group(&self, prefix: &str, payload: &str) -> PropertyGroup {
        let Some(fams) = self.families.get(prefix) else { return PropertyGroup::Other };
        let colorish = looks_like_color(payload);
        let color_fam = fams.iter().find(|f| f.sets.contains(&ValueSet::Color));
        let arb_fam = fams.iter().find(|f| f.sets.contains(&ValueSet::Arb));
        match (colorish, color_fam, arb_fam) {
            (true, Some(f), _) => f.group,
            (_, _, Some(f)) => f.group,
            (_, Some(f), None) => f.group,
            _ => PropertyGroup::Other,
        }
    }

    pub fn classify(&self, raw: &str) -> ClassToken {
        let segments = split_variants(raw);
        let (base, variants) = segments.split_last().map(|(b, v)| (*b, v.to_vec())).unwrap_or((raw, Vec::new()));
        let variant_prefixes: Vec<String> = variants.iter().map(|s| s.to_string()).collect();
        let mut u = base.strip_prefix('!').unwrap_or(base);
        u = u.strip_suffix('!').unwrap_or(u);
        u = u.strip_prefix('-').unwrap_or(u);
        let utility = u.to_string();
        let token = |kind, group, unit| ClassToken { raw: raw.to_string(), kind, variant_prefixes: variant_prefixes.clone(), property_group: group, unit, utility: utility.clone() };

        if u.contains('[') {
            // Arbitrary property: [prop:value]
            if let Some(inner) = u.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
                let (prop, value) = inner.split_once(':').unwrap_or((inner, ""));
                let group = css_property_group(prop);
                return token(TokenKind::ArbitraryValue, group, unit_of_value(&value.replace('_', " ")));
            }
            // Opacity modifier with an arbitrary payload: bg-blue-500/[0.5]
            if let Some((head, _)) = u.split_once("/[") {
                if !head.contains('[') {
                    let (group, _) = self.match_utility(head).unwrap_or((PropertyGroup::Other, UnitClass::Unitless));
                    return token(TokenKind::ArbitraryValue, group, UnitClass::Unitless);
                }
            }
            if let Some((prefix, rest)) = u.split_once("-[") {
                let payload = rest.rsplit_once(']').map(|(p, _)| p).unwrap_or(rest);
                let group = self.arbitrary_group(prefix, payload);
                let unit = if group == PropertyGroup::Color { UnitClass::Unitless } else { unit_of_value(&payload.replace('_', " ")) };
                return token(TokenKind::ArbitraryValue, group, unit);
            }
            return token(TokenKind::ArbitraryValue, PropertyGroup::Other, UnitClass::Unitless);
        }
        if let Some((group, unit)) = self.match_utility(u) {
            return token(TokenKind::ScaleUtility, group, unit);
        }
        let kind = if variant_prefixes.is_empty() { TokenKind::Custom } else { TokenKind::VariantPrefixed };
        token(kind, PropertyGroup::Other, UnitClass::Unitless)
    }
}

/// Splits `md:hover:w-[calc(100%-1rem)]` on colons outside brackets and
/// parentheses.
fn split_variants(raw: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0usize);
    for (i, c) in raw.char_indices() {
        match c {
            '[' | '(' => depth += 1,
            ']' | ')' => depth -= 1,
            ':' if depth == 0 => {
                out.push(&raw[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&raw[start..]);
    out
}

fn looks_like_color(payload: &str) -> bool {
    let p = payload.trim().to_ascii_lowercase();
    if p.starts_with("color:") {
        return true;
    }
    if let Some(hex) = p.strip_prefix('#') {
        return matches!(hex.len(), 3 | 4 | 6 | 8) && hex.bytes().all(|b| b.is_ascii_hexdigit());
    }
    ["rgb(", "rgba(", "hsl(", "hsla(", "hwb(", "lab(", "lch(", "oklab(", "oklch(", "color("].iter().any(|f| p.starts_with(f))
        || matches!(p.as_str(), "transparent" | "currentcolor")
}

/// Property group of a CSS property name (used for arbitrary properties).
pub fn css_property_group(prop: &str) -> PropertyGroup {
    let p = prop.trim().to_ascii_lowercase();
    match p.as_str() {
        "width" | "height" | "min-width" | "min-height" | "max-width" | "max-height" | "flex-basis" | "inline-size" | "block-size" => {
            PropertyGroup::LayoutSize
        }
        "position" | "top" | "right" | "bottom" | "left" | "z-index" => PropertyGroup::Position,
        _ if p.starts_with("inset") => PropertyGroup::Position,
        _ if p.starts_with("margin") || p.starts_with("padding") || p.ends_with("gap") => PropertyGroup::Spacing,
        "display" | "flex-direction" | "flex-wrap" | "justify-content" | "align-items" | "align-self" | "order" | "flex" => {
            PropertyGroup::Display
        }
        _ if p.starts_with("grid") => PropertyGroup::Display,
        "color" | "background-color" | "border-color" | "fill" | "stroke" | "outline-color" => PropertyGroup::Color,
        _ if p.starts_with("font") || p.starts_with("text-") || p == "line-height" || p == "letter-spacing" => PropertyGroup::Typography,
        _ => PropertyGroup::Other,
    }
}

const RELATIVE_UNITS: &[&str] = &[
    "%", "em", "rem", "vw", "vh", "vmin", "vmax", "svw", "svh", "lvw", "lvh", "dvw", "dvh", "ch", "ex", "lh", "rlh", "fr", "cqw", "cqh",
];
const ABSOLUTE_UNITS: &[&str] = &["px", "pt", "pc", "cm", "mm", "in", "q"];

/// Unit class of a CSS value: relative when any number carries a relative
/// unit, else absolute when any carries an absolute unit, else unitless.
pub fn unit_of_value(value: &str) -> UnitClass {
    let v = value.to_ascii_lowercase();
    let b = v.as_bytes();
    let (mut rel, mut abs) = (false, false);
    let mut i = 0;
    while i < b.len() {
        let starts_number = b[i].is_ascii_digit() || (b[i] == b'.' && b.get(i + 1).is_some_and(u8::is_ascii_digit));
        let in_word = i > 0 && (b[i - 1].is_ascii_alphabetic() || b[i - 1] == b'#' || b[i - 1] == b'-' && i > 1 && b[i - 2].is_ascii_alphabetic());
        if starts_number && !in_word {
            while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
                i += 1;
            }
            let s = i;
            while i < b.len() && (b[i].is_ascii_alphabetic() || b[i] == b'%') {
                i += 1;
            }
            let unit = &v[s..i];
            if RELATIVE_UNITS.contains(&unit) {
                rel = true;
            } else if ABSOLUTE_UNITS.contains(&unit) {
                abs = true;
            }
        } else if b[i] == b'#' || b[i].is_ascii_alphabetic() {
            // Skip identifiers and hex colours whole.
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'-' || b[i] == b'#' || b[i] == b'_') {
                i += 1;
            }
        } else {
            i += 1;
        }
    }
    if rel {
        UnitClass::Relative
    } else if abs {
        UnitClass::Absolute
    } else {
        UnitClass::Unitless
    }
}

pub fn classify_token(raw: &str) -> ClassToken {
    Grammar::builtin().classify(raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use PropertyGroup::*;
    use TokenKind::*;

    fn k(raw: &str) -> (TokenKind, PropertyGroup, UnitClass) {
        let t = classify_token(raw);
        (t.kind, t.property_group, t.unit)
    }

    #[test]
    fn oracle_table() {
        let table: &[(&str, TokenKind, PropertyGroup, UnitClass)] = &[
            ("flex", ScaleUtility, Display, UnitClass::Unitless),
            ("w-1/2", ScaleUtility, LayoutSize, UnitClass::Relative),
            ("md:w-1/2", ScaleUtility, LayoutSize, UnitClass::Relative),
            ("w-[123px]", ArbitraryValue, LayoutSize, UnitClass::Absolute),
            ("w-[50%]", ArbitraryValue, LayoutSize, UnitClass::Relative),
            ("bg-[#ff0]", ArbitraryValue, Color, UnitClass::Unitless),
            ("bg-[url('assets/a.png')]", ArbitraryValue, Other, UnitClass::Unitless),
            ("text-[14px]", ArbitraryValue, Typography, UnitClass::Absolute),
            ("text-[#123456]", ArbitraryValue, Color, UnitClass::Unitless),
            ("text-sm", ScaleUtility, Typography, UnitClass::Unitless),
            ("text-blue-500", ScaleUtility, Color, UnitClass::Unitless),
            ("bg-black/50", ScaleUtility, Color, UnitClass::Unitless),
            ("bg-blue-500/[0.5]", ArbitraryValue, Color, UnitClass::Unitless),
            ("p-4", ScaleUtility, Spacing, UnitClass::Relative),
            ("-mt-2", ScaleUtility, Spacing, UnitClass::Relative),
            ("m-0", ScaleUtility, Spacing, UnitClass::Unitless),
            ("w-px", ScaleUtility, LayoutSize, UnitClass::Absolute),
            ("w-auto", ScaleUtility, LayoutSize, UnitClass::Unitless),
            ("max-w-screen-md", ScaleUtility, LayoutSize, UnitClass::Absolute),
            ("max-w-prose", ScaleUtility, LayoutSize, UnitClass::Relative),
            ("min-h-screen", ScaleUtility, LayoutSize, UnitClass::Relative),
            ("absolute", ScaleUtility, Position, UnitClass::Unitless),
            ("left-[12px]", ArbitraryValue, Position, UnitClass::Absolute),
            ("rounded", ScaleUtility, Other, UnitClass::Unitless),
            ("border-2", ScaleUtility, Other, UnitClass::Unitless),
            ("border-gray-200", ScaleUtility, Color, UnitClass::Unitless),
            ("gap-x-4", ScaleUtility, Spacing, UnitClass::Relative),
            ("hover:bg-purple-600", ScaleUtility, Color, UnitClass::Unitless),
            ("[mask-type:luminance]", ArbitraryValue, Other, UnitClass::Unitless),
            ("[width:30vw]", ArbitraryValue, LayoutSize, UnitClass::Relative),
            ("card-header", Custom, Other, UnitClass::Unitless),
            ("md:card", VariantPrefixed, Other, UnitClass::Unitless),
            ("!p-2", ScaleUtility, Spacing, UnitClass::Relative),
            ("w-[calc(100%-16px)]", ArbitraryValue, LayoutSize, UnitClass::Relative),
            ("shadow-[0px_4px_12px_#00000040]", ArbitraryValue, Other, UnitClass::Absolute),
            ("col-start-1", ScaleUtility, Display, UnitClass::Unitless),
            ("md:flex-row", ScaleUtility, Display, UnitClass::Unitless),
        ];
        for (raw, kind, group, unit) in table {
            assert_eq!(k(raw), (*kind, *group, *unit), "{raw}");
        }
    }

    #[test]
    fn variants() {
        let t = classify_token("md:hover:w-[calc(100%-1rem)]");
        assert_eq!(t.variant_prefixes, ["md", "hover"]);
        assert_eq!(t.utility, "w-[calc(100%-1rem)]");
        assert_eq!(classify_token("[&>*]:flex").variant_prefixes, ["[&>*]"]);
        assert_eq!(classify_token("[&>*]:flex").kind, ScaleUtility);
    }

    #[test]
    fn units() {
        assert_eq!(unit_of_value("500px"), UnitClass::Absolute);
        assert_eq!(unit_of_value("50%"), UnitClass::Relative);
        assert_eq!(unit_of_value("auto"), UnitClass::Unitless);
        assert_eq!(unit_of_value("0"), UnitClass::Unitless);
        assert_eq!(unit_of_value("1.5rem 2px"), UnitClass::Relative);
        assert_eq!(unit_of_value("#ff0000"), UnitClass::Unitless);
        assert_eq!(unit_of_value("h1px"), UnitClass::Unitless);
    }

    #[test]
    fn builtin_grammar_version() {
        assert_eq!(Grammar::builtin().version, "tailwind-3.4-subset/1");
        assert!(Grammar::parse("exact NOPE a").is_err());
    }
}
