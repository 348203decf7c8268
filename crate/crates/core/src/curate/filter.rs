use crate::figma::{FigmaDocument, FigmaNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FilterReason {
    SizeInvalid,
    ExtremeAspect,
    SparseContent,
    DominantImage,
}

impl FilterReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            FilterReason::SizeInvalid => "SIZE_INVALID",
            FilterReason::ExtremeAspect => "EXTREME_ASPECT",
            FilterReason::SparseContent => "SPARSE_CONTENT",
            FilterReason::DominantImage => "DOMINANT_IMAGE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterVerdict {
    pub accepted: bool,
    pub reasons: Vec<FilterReason>,
}

pub const MAX_ASPECT: f64 = 5.0;
pub const MIN_CHILDREN: usize = 3;
pub const DOMINANT_IMAGE_SHARE: f64 = 0.8;

fn largest_image_area(n: &FigmaNode) -> f64 {
    let own = if n.visible && n.fills.iter().any(|p| p.is_image() && p.visible()) {
        n.bounding_box.map_or(0.0, |b| b.area())
    } else {
        0.0
    };
    n.children.iter().map(largest_image_area).fold(own, f64::max)
}

/// Pre-filter for raw pages. A page without a root box counts as
/// SIZE_INVALID.
pub fn heuristic_filter(doc: &FigmaDocument) -> FilterVerdict {
    let mut reasons = Vec::new();
    let (w, h) = doc.root.bounding_box.map_or((0.0, 0.0), |b| (b.width, b.height));
    let size_ok = w > 0.0 && h > 0.0;
    if !size_ok {
        reasons.push(FilterReason::SizeInvalid);
    } else if w.max(h) / w.min(h) > MAX_ASPECT {
        reasons.push(FilterReason::ExtremeAspect);
    }
    if doc.root.children.len() < MIN_CHILDREN {
        reasons.push(FilterReason::SparseContent);
    }
    if size_ok {
        let page = w * h;
        if doc.root.children.iter().map(largest_image_area).fold(0.0, f64::max) >= DOMINANT_IMAGE_SHARE * page {
            reasons.push(FilterReason::DominantImage);
        }
    }
    FilterVerdict { accepted: reasons.is_empty(), reasons }
}
