use crate::figma::Rect;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stacking {
    Row,
    Column,
    None,
}

const EPS: f64 = 1e-9;

/// Cross-axis alignment holds when the centres, the leading edges or the
/// trailing edges all lie within `tolerance` of each other.
fn aligned(spans: &[(f64, f64)], tolerance: f64) -> bool {
    let within = |f: &dyn Fn(&(f64, f64)) -> f64| {
        let (lo, hi) = spans.iter().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        hi - lo <= tolerance + EPS
    };
    within(&|s| (s.0 + s.1) / 2.0) || within(&|s| s.0) || within(&|s| s.1)
}

/// Sorted along the main axis, consecutive spans must not overlap.
fn disjoint(spans: &mut [(f64, f64)]) -> bool {
    spans.sort_by(|a, b| a.0.total_cmp(&b.0));
    spans.windows(2).all(|w| w[1].0 >= w[0].1 - EPS)
}

/// Recovers single-axis stacking from sibling boxes of a frame without
/// auto layout.
pub fn infer_stacking(children: &[Rect], tolerance: f64) -> Stacking {
    if children.len() < 2 {
        return Stacking::None;
    }
    let mut xs: Vec<(f64, f64)> = children.iter().map(|r| (r.x, r.right())).collect();
    let ys: Vec<(f64, f64)> = children.iter().map(|r| (r.y, r.bottom())).collect();
    if disjoint(&mut xs) && aligned(&ys, tolerance) {
        return Stacking::Row;
    }
    let xs: Vec<(f64, f64)> = children.iter().map(|r| (r.x, r.right())).collect();
    let mut ys = ys;
    if disjoint(&mut ys) && aligned(&xs, tolerance) {
        return Stacking::Column;
    }
    Stacking::None
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn row_of_centred_boxes() {
        let r = [Rect::new(0.0, 10.0, 20.0, 20.0), Rect::new(30.0, 11.0, 20.0, 20.0), Rect::new(60.0, 8.5, 10.0, 24.0)];
        assert_eq!(infer_stacking(&r, 2.0), Stacking::Row);
    }

    #[test]
    fn overlap_is_none() {
        let r = [Rect::new(0.0, 0.0, 20.0, 20.0), Rect::new(10.0, 5.0, 20.0, 20.0)];
        assert_eq!(infer_stacking(&r, 2.0), Stacking::None);
    }

    #[test]
    fn column_with_equal_x() {
        let r = [Rect::new(16.0, 0.0, 100.0, 20.0), Rect::new(16.0, 24.0, 60.0, 10.0), Rect::new(16.0, 40.0, 80.0, 30.0)];
        assert_eq!(infer_stacking(&r, 2.0), Stacking::Column);
    }

    #[test]
    fn single_child_is_none() {
        assert_eq!(infer_stacking(&[Rect::new(0.0, 0.0, 1.0, 1.0)], 2.0), Stacking::None);
    }

    #[test]
    fn misaligned_row_is_none() {
        let r = [Rect::new(0.0, 0.0, 20.0, 20.0), Rect::new(30.0, 7.0, 20.0, 30.0)];
        assert_eq!(infer_stacking(&r, 2.0), Stacking::None);
    }

    proptest! {
        /// Boxes laid out left to right with jittered but centred y are a row,
        /// in any input order.
        #[test]
        fn constructed_rows(
            widths in prop::collection::vec(1.0f64..50.0, 2..8),
            gaps in prop::collection::vec(0.0f64..20.0, 8),
            heights in prop::collection::vec(1.0f64..50.0, 8),
            jitter in prop::collection::vec(-1.0f64..1.0, 8),
            rot in 0usize..8,
        ) {
            let mut x = 0.0;
            let mut boxes = Vec::new();
            for (i, w) in widths.iter().enumerate() {
                let h = heights[i];
                boxes.push(Rect::new(x, 100.0 - h / 2.0 + jitter[i], *w, h));
                x += w + gaps[i];
            }
            let k = rot % boxes.len();
            boxes.rotate_left(k);
            prop_assert_eq!(infer_stacking(&boxes, 2.0), Stacking::Row);
            let transposed: Vec<Rect> = boxes.iter().map(|r| Rect::new(r.y, r.x, r.height, r.width)).collect();
            prop_assert_eq!(infer_stacking(&transposed, 2.0), Stacking::Column);
        }
    }
}
