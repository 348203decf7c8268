use std::fmt::Write;

pub(crate) const TAILWIND_CDN: &str = "https://cdn.tailwindcss.com";

/// Output element. `text` is emitted before the children.
#[derive(Debug, Clone, Default)]
pub(crate) struct El {
    pub tag: &'static str,
    pub classes: Vec<String>,
    pub attrs: Vec<(&'static str, String)>,
    pub text: Option<String>,
    pub children: Vec<El>,
}

const VOID: &[&str] = &["img", "br", "meta", "input", "hr", "link"];

impl El {
    pub fn new(tag: &'static str) -> Self {
        El { tag, ..Default::default() }
    }

    pub fn class(&mut self, c: impl Into<String>) {
        let c = c.into();
        if !c.is_empty() && !self.classes.contains(&c) {
            self.classes.push(c);
        }
    }

    fn open_tag(&self, out: &mut String) {
        out.push('<');
        out.push_str(self.tag);
        for (k, v) in &self.attrs {
            let _ = write!(out, " {k}=\"{}\"", escape_attr(v));
        }
        if !self.classes.is_empty() {
            let _ = write!(out, " class=\"{}\"", escape_attr(&self.classes.join(" ")));
        }
        out.push('>');
    }

    pub fn write(&self, out: &mut String, depth: usize) {
        let pad = "    ".repeat(depth);
        out.push_str(&pad);
        self.open_tag(out);
        if VOID.contains(&self.tag) {
            out.push('\n');
            return;
        }
        if self.children.is_empty() {
            if let Some(t) = &self.text {
                out.push_str(&escape_text(t));
            }
            let _ = writeln!(out, "</{}>", self.tag);
            return;
        }
        out.push('\n');
        if let Some(t) = &self.text {
            let _ = writeln!(out, "{pad}    {}", escape_text(t));
        }
        for c in &self.children {
            c.write(out, depth + 1);
        }
        let _ = writeln!(out, "{pad}</{}>", self.tag);
    }
}

/// Full document around a body element.
pub(crate) fn document(title: &str, body: &El) -> String {
    let mut out = String::from("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n");
    out.push_str("    <meta charset=\"UTF-8\">\n");
    out.push_str("    <meta name=\"viewport\" content=\"width=device-width, initial-scale=1.0\">\n");
    let _ = writeln!(out, "    <script src=\"{TAILWIND_CDN}\"></script>");
    let _ = writeln!(out, "    <title>{}</title>", escape_text(title));
    out.push_str("</head>\n");
    body.write(&mut out, 0);
    out.push_str("</html>\n");
    out
}

pub fn escape_text(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            _ => out.push(c),
        }
    }
    out
}

pub fn escape_attr(s: &str) -> String {
    escape_text(s).replace('"', "&quot;").replace('\'', "&#39;")
}

/// Percent-escapes everything outside the URL-safe path alphabet. Slugged
/// asset paths pass through unchanged.
pub fn escape_path(p: &str) -> String {
    let mut out = String::with_capacity(p.len());
    for b in p.bytes() {
        if b.is_ascii_alphanumeric() || b"-._~/".contains(&b) {
            out.push(b as char);
        } else {
            let _ = write!(out, "%{b:02X}");
        }
    }
    out
}
