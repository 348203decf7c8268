//! Strict HTML reader. Every non-void element must be closed explicitly
//! (or self-closed with `/>`), so truncated or mangled model output is
//! rejected instead of silently repaired.

use super::tokens::{classify_token, ClassToken};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unparsable document at byte {offset}: {message}")]
pub struct HtmlError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Declaration {
    pub property: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub tag: String,
    /// Lowercased names; the first occurrence of a duplicate wins.
    pub attributes: BTreeMap<String, String>,
    pub classes: Vec<ClassToken>,
    pub inline_style: Option<Vec<Declaration>>,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Byte range of the start tag through the end tag.
    pub span: (usize, usize),
    /// Raw content of script/style/textarea/title elements.
    pub raw_text: Option<String>,
}

/// Elements in document (pre)order; `roots` are the top-level ones.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HtmlDocumentModel {
    pub elements: Vec<Element>,
    pub roots: Vec<usize>,
    pub has_doctype: bool,
}

const VOID: &[&str] = &["area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "param", "source", "track", "wbr"];
const RAW: &[&str] = &["script", "style", "textarea", "title"];

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    doc: HtmlDocumentModel,
    stack: Vec<usize>,
}

fn err<T>(offset: usize, message: impl Into<String>) -> Result<T, HtmlError> {
    Err(HtmlError { offset, message: message.into() })
}

fn is_name_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'-' || c == b':' || c == b'_' || c == b'.'
}

impl<'a> Parser<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn bytes(&self) -> &'a [u8] {
        self.src.as_bytes()
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.bytes()[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn find_ci(&self, needle: &str) -> Option<usize> {
        let hay = self.rest().to_ascii_lowercase();
        hay.find(needle).map(|i| self.pos + i)
    }

    fn run(mut self) -> Result<HtmlDocumentModel, HtmlError> {
        while self.pos < self.src.len() {
            let Some(lt) = self.rest().find('<') else { break };
            self.pos += lt;
            let r = self.rest();
            if let Some(body) = r.strip_prefix("<!--") {
                match body.find("-->") {
                    Some(end) => self.pos += 4 + end + 3,
                    None => return err(self.pos, "unterminated comment"),
                }
            } else if r.starts_with("<!") || r.starts_with("<?") {
                if r.len() >= 9 && r[..9].eq_ignore_ascii_case("<!doctype") {
                    if !self.doc.elements.is_empty() || self.doc.has_doctype {
                        return err(self.pos, "doctype after content");
                    }
                    self.doc.has_doctype = true;
                }
                match r.find('>') {
                    Some(end) => self.pos += end + 1,
                    None => return err(self.pos, "unterminated declaration"),
                }
            } else if r.starts_with("</") {
                self.close_tag()?;
            } else if r.as_bytes().get(1).is_some_and(u8::is_ascii_alphabetic) {
                self.open_tag()?;
            } else {
                self.pos += 1;
            }
        }
        if let Some(&open) = self.stack.last() {
            let e = &self.doc.elements[open];
            return err(e.span.0, format!("unclosed <{}>", e.tag));
        }
        Ok(self.doc)
    }

    fn read_name(&mut self) -> &'a str {
        let s = self.pos;
        while self.pos < self.src.len() && is_name_char(self.bytes()[self.pos]) {
            self.pos += 1;
        }
        &self.src[s..self.pos]
    }

    fn close_tag(&mut self) -> Result<(), HtmlError> {
        let start = self.pos;
        self.pos += 2;
        let name = self.read_name().to_ascii_lowercase();
        self.skip_ws();
        if self.bytes().get(self.pos) != Some(&b'>') || name.is_empty() {
            return err(start, "malformed end tag");
        }
        self.pos += 1;
        match self.stack.pop() {
            Some(top) if self.doc.elements[top].tag == name => {
                self.doc.elements[top].span.1 = self.pos;
                Ok(())
            }
            Some(top) => err(start, format!("</{name}> closes <{}>", self.doc.elements[top].tag)),
            None => err(start, format!("stray </{name}>")),
        }
    }

    fn open_tag(&mut self) -> Result<(), HtmlError> {
        let start = self.pos;
        self.pos += 1;
        let tag = self.read_name().to_ascii_lowercase();
        let mut attributes = BTreeMap::new();
        let self_closing;
        loop {
            self.skip_ws();
            match self.bytes().get(self.pos) {
                None => return err(start, format!("unterminated <{tag}> tag")),
                Some(b'>') => {
                    self.pos += 1;
                    self_closing = false;
                    break;
                }
                Some(b'/') if self.bytes().get(self.pos + 1) == Some(&b'>') => {
                    self.pos += 2;
                    self_closing = true;
                    break;
                }
                Some(b'"' | b'\'' | b'<' | b'=') => return err(self.pos, format!("unexpected character in <{tag}>")),
                _ => {}
            }
            let s = self.pos;
            while self.pos < self.src.len() && !matches!(self.bytes()[self.pos], b' ' | b'\t' | b'\n' | b'\r' | b'\x0c' | b'=' | b'>' | b'/' | b'"' | b'\'' | b'<') {
                self.pos += 1;
            }
            if self.pos == s {
                // A lone '/' inside the tag.
                self.pos += 1;
                continue;
            }
            let name = self.src[s..self.pos].to_ascii_lowercase();
            self.skip_ws();
            let mut value = String::new();
            if self.bytes().get(self.pos) == Some(&b'=') {
                self.pos += 1;
                self.skip_ws();
                match self.bytes().get(self.pos) {
                    Some(&q @ (b'"' | b'\'')) => {
                        let Some(end) = self.src[self.pos + 1..].find(q as char) else {
                            return err(self.pos, format!("unterminated {name} attribute value"));
                        };
                        value = decode_entities(&self.src[self.pos + 1..self.pos + 1 + end]);
                        self.pos += end + 2;
                    }
                    Some(_) => {
                        let vs = self.pos;
                        while self.pos < self.src.len() && !self.bytes()[self.pos].is_ascii_whitespace() && self.bytes()[self.pos] != b'>' {
                            self.pos += 1;
                        }
                        value = decode_entities(&self.src[vs..self.pos]);
                    }
                    None => return err(start, format!("unterminated <{tag}> tag")),
                }
            }
            attributes.entry(name).or_insert(value);
        }

        let classes = attributes.get("class").map(|c| c.split_ascii_whitespace().map(classify_token).collect()).unwrap_or_default();
        let inline_style = attributes.get("style").map(|s| parse_declarations(s));
        let idx = self.doc.elements.len();
        let parent = self.stack.last().copied();
        self.doc.elements.push(Element { tag: tag.clone(), attributes, classes, inline_style, parent, children: Vec::new(), span: (start, self.pos), raw_text: None });
        match parent {
            Some(p) => self.doc.elements[p].children.push(idx),
            None => self.doc.roots.push(idx),
        }
        if self_closing || VOID.contains(&tag.as_str()) {
            return Ok(());
        }
        if RAW.contains(&tag.as_str()) {
            let Some(end) = self.find_ci(&format!("</{tag}")) else {
                return err(start, format!("unclosed <{tag}>"));
            };
            self.doc.elements[idx].raw_text = Some(self.src[self.pos..end].to_string());
            self.pos = end;
            self.stack.push(idx);
            return self.close_tag();
        }
        self.stack.push(idx);
        Ok(())
    }
}

fn decode_entities(s: &str) -> String {
    if !s.contains('&') {
        return s.to_string();
    }
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(i) = rest.find('&') {
        out.push_str(&rest[..i]);
        rest = &rest[i..];
        let Some(semi) = rest.find(';').filter(|&j| j <= 10) else {
            out.push('&');
            rest = &rest[1..];
            continue;
        };
        let ent = &rest[1..semi];
        let decoded = match ent {
            "amp" => Some('&'),
            "lt" => Some('<'),
            "gt" => Some('>'),
            "quot" => Some('"'),
            "apos" => Some('\''),
            "nbsp" => Some('\u{a0}'),
            _ if ent.starts_with("#x") || ent.starts_with("#X") => u32::from_str_radix(&ent[2..], 16).ok().and_then(char::from_u32),
            _ if ent.starts_with('#') => ent[1..].parse().ok().and_then(char::from_u32),
            _ => None,
        };
        match decoded {
            Some(c) => {
                out.push(c);
                rest = &rest[semi + 1..];
            }
            None => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

/// Splits a style attribute on `;` outside quotes and parentheses.
/// Entries without a colon or with an empty value are dropped.
pub fn parse_declarations(style: &str) -> Vec<Declaration> {
    let mut parts = Vec::new();
    let (mut depth, mut quote, mut start) = (0i32, None::<char>, 0usize);
    for (i, c) in style.char_indices() {
        match (quote, c) {
            (Some(q), c) if c == q => quote = None,
            (Some(_), _) => {}
            (None, '"' | '\'') => quote = Some(c),
            (None, '(') => depth += 1,
            (None, ')') => depth -= 1,
            (None, ';') if depth <= 0 => {
                parts.push(&style[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&style[start..]);
    parts
        .into_iter()
        .filter_map(|p| {
            let (k, v) = p.split_once(':')?;
            let (k, v) = (k.trim().to_ascii_lowercase(), v.trim());
            (!k.is_empty() && !v.is_empty()).then(|| Declaration { property: k, value: v.to_string() })
        })
        .collect()
}

pub fn parse_html(html: &str) -> Result<HtmlDocumentModel, HtmlError> {
    Parser { src: html, pos: 0, doc: HtmlDocumentModel::default(), stack: Vec::new() }.run()
}

impl HtmlDocumentModel {
    pub fn find_first(&self, tag: &str) -> Option<usize> {
        self.elements.iter().position(|e| e.tag == tag)
    }

    /// Preorder descendants of `i`, excluding `i`.
    pub fn descendants(&self, i: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack: Vec<usize> = self.elements[i].children.iter().rev().copied().collect();
        while let Some(j) = stack.pop() {
            out.push(j);
            stack.extend(self.elements[j].children.iter().rev());
        }
        out
    }

    /// Elements inside `<body>`. Without a body: every element that is not
    /// `html`, `head` or inside `head`.
    pub fn body_descendants(&self) -> Vec<usize> {
        match self.find_first("body") {
            Some(b) => self.descendants(b),
            None => {
                let head = self.find_first("head");
                let in_head = |mut i: usize| loop {
                    if Some(i) == head {
                        return true;
                    }
                    match self.elements[i].parent {
                        Some(p) => i = p,
                        None => return false,
                    }
                };
                (0..self.elements.len()).filter(|&i| self.elements[i].tag != "html" && !in_head(i)).collect()
            }
        }
    }

    /// The body element with its descendants.
    pub fn body_and_descendants(&self) -> Vec<usize> {
        match self.find_first("body") {
            Some(b) => std::iter::once(b).chain(self.descendants(b)).collect(),
            None => self.body_descendants(),
        }
    }

    /// A complete page: one top-level `html` element holding exactly one
    /// `head` and one `body`.
    pub fn check_complete(&self) -> Result<(), String> {
        let roots: Vec<&str> = self.roots.iter().map(|&r| self.elements[r].tag.as_str()).collect();
        if roots != ["html"] {
            return Err(format!("expected a single <html> root, found {roots:?}"));
        }
        let html = &self.elements[self.roots[0]];
        let count = |t: &str| html.children.iter().filter(|&&c| self.elements[c].tag == t).count();
        let all = |t: &str| self.elements.iter().filter(|e| e.tag == t).count();
        if count("head") != 1 || count("body") != 1 || all("head") != 1 || all("body") != 1 {
            return Err("expected exactly one <head> and one <body> inside <html>".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_tree() {
        let d = parse_html("<!DOCTYPE html><html><head><title>a<b</title></head><body><div class=\"flex w-1/2\"><img src=x><br/></div></body></html>").unwrap();
        assert!(d.has_doctype);
        let tags: Vec<_> = d.elements.iter().map(|e| e.tag.as_str()).collect();
        assert_eq!(tags, ["html", "head", "title", "body", "div", "img", "br"]);
        assert_eq!(d.elements[2].raw_text.as_deref(), Some("a<b"));
        assert_eq!(d.elements[4].classes.len(), 2);
        assert_eq!(d.body_descendants(), [4, 5, 6]);
        assert!(d.check_complete().is_ok());
    }

    #[test]
    fn empty_body() {
        let d = parse_html("<html><head></head><body></body></html>").unwrap();
        assert_eq!(d.elements.len(), 3);
        assert!(d.body_descendants().is_empty());
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["<div><span></div>", "<div>", "</p>", "<div class=\"x>", "<!-- x", "<div <p>"] {
            assert!(parse_html(bad).is_err(), "{bad}");
        }
        assert!(parse_html("<p>a < b</p>").is_ok());
    }

    #[test]
    fn attributes_and_styles() {
        let d = parse_html("<DIV Class='a  b' style=\"color:red; background:url('x;y.png');;bad\" data-x=1 hidden id=a id=b></DIV>").unwrap();
        let e = &d.elements[0];
        assert_eq!(e.tag, "div");
        assert_eq!(e.attributes["id"], "a");
        assert_eq!(e.attributes["hidden"], "");
        let st = e.inline_style.as_ref().unwrap();
        assert_eq!(st.len(), 2);
        assert_eq!(st[1].value, "url('x;y.png')");
        assert_eq!(decode_entities("a&amp;b&#39;&#x41;&zz;"), "a&b'A&zz;");
    }

    #[test]
    fn completeness() {
        assert!(parse_html("<div></div>").unwrap().check_complete().is_err());
        assert!(parse_html("<html><body></body></html>").unwrap().check_complete().is_err());
    }

    #[test]
    fn script_raw_text() {
        let d = parse_html("<html><head><script>if (a < b && c > d) {}</script></head><body></body></html>").unwrap();
        assert_eq!(d.elements[2].raw_text.as_deref(), Some("if (a < b && c > d) {}"));
    }
}
