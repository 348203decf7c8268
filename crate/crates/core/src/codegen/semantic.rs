use crate::figma::Rect;
use crate::ir::{IrNode, PageSize, Role};

/// Page-level text size bands used for heading selection.
#[derive(Debug, Clone, PartialEq)]
pub struct TextBands {
    pub max: f64,
    /// Most frequent size (ties to the smaller): the body copy.
    pub body: f64,
    /// Distinct sizes strictly between `body` and `max`, descending.
    pub between: Vec<f64>,
}

/// Smallest size that may become an `h1`.
pub const H1_MIN_PX: f64 = 20.0;

impl TextBands {
    pub fn from_root(root: &IrNode) -> Self {
        fn rec(n: &IrNode, out: &mut Vec<f64>) {
            if let Some(t) = &n.text {
                out.push(t.font_size);
            }
            n.children.iter().for_each(|c| rec(c, out));
        }
        let mut sizes = Vec::new();
        rec(root, &mut sizes);
        sizes.sort_by(f64::total_cmp);
        let max = sizes.last().copied().unwrap_or(0.0);
        let mut body = 0.0;
        let mut best = 0usize;
        let mut i = 0;
        while i < sizes.len() {
            let j = sizes[i..].iter().take_while(|s| **s == sizes[i]).count();
            if j > best {
                best = j;
                body = sizes[i];
            }
            i += j;
        }
        sizes.dedup();
        let between = sizes.iter().rev().copied().filter(|s| *s > body && *s < max).collect();
        TextBands { max, body, between }
    }
}

/// What the tagger may see around a node.
#[derive(Debug, Clone)]
pub struct TagContext<'a> {
    pub page: &'a PageSize,
    /// Absolute origin of the parent; IR boxes are parent-relative.
    pub parent_origin: (f64, f64),
    /// The node's siblings including itself, in output order.
    pub siblings: &'a [IrNode],
    pub index: usize,
    /// Siblings sit at the first level with more than one child, where
    /// page landmarks are looked for.
    pub landmark_level: bool,
    pub parent_is_list: bool,
    pub bands: &'a TextBands,
}

const EDGE_PX: f64 = 1.0;

impl TagContext<'_> {
    fn abs(&self, n: &IrNode) -> Rect {
        n.bbox.translated(self.parent_origin.0, self.parent_origin.1)
    }

    fn is_header(&self, n: &IrNode) -> bool {
        let b = self.abs(n);
        n.role == Role::Container
            && b.y <= EDGE_PX
            && b.width >= 0.9 * self.page.width
            && b.height <= 0.25 * self.page.height
    }

    fn is_footer(&self, n: &IrNode) -> bool {
        let b = self.abs(n);
        n.role == Role::Container
            && b.bottom() >= self.page.height - EDGE_PX
            && b.width >= 0.9 * self.page.width
            && b.height <= 0.25 * self.page.height
    }

    fn header_index(&self) -> Option<usize> {
        self.siblings.iter().position(|s| self.is_header(s))
    }

    fn footer_index(&self) -> Option<usize> {
        let h = self.header_index();
        self.siblings.iter().enumerate().rev().find(|(i, s)| Some(*i) != h && self.is_footer(s)).map(|(i, _)| i)
    }

    fn main_index(&self) -> Option<usize> {
        let (h, f) = (self.header_index(), self.footer_index());
        let mut best: Option<(usize, f64)> = None;
        for (i, s) in self.siblings.iter().enumerate() {
            if Some(i) == h || Some(i) == f || s.role != Role::Container {
                continue;
            }
            let b = self.abs(s);
            let central = (b.center().0 - self.page.width / 2.0).abs() <= 0.25 * self.page.width;
            if b.width >= 0.5 * self.page.width && central && best.is_none_or(|(_, a)| b.area() > a) {
                best = Some((i, b.area()));
            }
        }
        best.map(|(i, _)| i)
    }
}

/// At least three children, all containers of the same size (±1px).
pub fn is_repeated_list(n: &IrNode) -> bool {
    n.children.len() >= 3
        && n.children.iter().all(|c| {
            let f = &n.children[0].bbox;
            c.role == Role::Container && (c.bbox.width - f.width).abs() <= 1.0 && (c.bbox.height - f.height).abs() <= 1.0
        })
}

/// Deterministic tag heuristic. Landmarks win over lists; text picks a
/// heading level by size band.
pub fn choose_semantic_tag(node: &IrNode, ctx: &TagContext) -> &'static str {
    match node.role {
        Role::Image => "img",
        Role::Text => {
            let size = node.text.as_ref().map(|t| t.font_size).unwrap_or(0.0);
            let b = ctx.bands;
            if size >= b.max && b.max >= H1_MIN_PX {
                "h1"
            } else if b.between.first() == Some(&size) {
                "h2"
            } else if b.between.contains(&size) {
                "h3"
            } else {
                "p"
            }
        }
        Role::Container => {
            if ctx.parent_is_list {
                return "li";
            }
            if ctx.landmark_level {
                let i = Some(ctx.index);
                if ctx.header_index() == i {
                    return "header";
                }
                if ctx.footer_index() == i {
                    return "footer";
                }
                if ctx.main_index() == i {
                    return "main";
                }
            }
            if is_repeated_list(node) {
                "ul"
            } else {
                "div"
            }
        }
    }
}
