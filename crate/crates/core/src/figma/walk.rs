use super::{FigmaDocument, FigmaNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraversalOrder {
    /// Parents before children, earlier siblings first (paint order).
    Pre,
    /// Topmost first: later siblings before earlier ones, children before
    /// their parent.
    ReverseZ,
}

#[derive(Debug, Clone)]
pub struct Visit<'a> {
    pub node: &'a FigmaNode,
    pub depth: usize,
    /// Ids from the root down to (excluding) this node.
    pub ancestors: Vec<&'a str>,
}

pub fn walk(doc: &FigmaDocument, order: TraversalOrder) -> Vec<Visit<'_>> {
    let mut out = Vec::with_capacity(doc.node_count());
    let mut path = Vec::new();
    match order {
        TraversalOrder::Pre => pre(&doc.root, 0, &mut path, &mut out),
        TraversalOrder::ReverseZ => reverse_z(&doc.root, 0, &mut path, &mut out),
    }
    out
}

fn pre<'a>(n: &'a FigmaNode, depth: usize, path: &mut Vec<&'a str>, out: &mut Vec<Visit<'a>>) {
    out.push(Visit { node: n, depth, ancestors: path.clone() });
    path.push(&n.id);
    for c in &n.children {
        pre(c, depth + 1, path, out);
    }
    path.pop();
}

fn reverse_z<'a>(n: &'a FigmaNode, depth: usize, path: &mut Vec<&'a str>, out: &mut Vec<Visit<'a>>) {
    path.push(&n.id);
    for c in n.children.iter().rev() {
        reverse_z(c, depth + 1, path, out);
    }
    path.pop();
    out.push(Visit { node: n, depth, ancestors: path.clone() });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::figma::{FigmaNode, NodeType};
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn n(id: &str, kids: Vec<FigmaNode>) -> FigmaNode {
        FigmaNode::new(id, id, NodeType::Frame).with_children(kids)
    }

    fn ids(v: &[Visit<'_>]) -> Vec<String> {
        v.iter().map(|x| x.node.id.clone()).collect()
    }

    #[test]
    fn reverse_z_visits_topmost_first() {
        let doc = FigmaDocument::new(n("root", vec![n("a", vec![]), n("b", vec![])]));
        assert_eq!(ids(&walk(&doc, TraversalOrder::ReverseZ)), ["b", "a", "root"]);
    }

    #[test]
    fn single_node() {
        let doc = FigmaDocument::new(n("root", vec![]));
        assert_eq!(ids(&walk(&doc, TraversalOrder::ReverseZ)), ["root"]);
        assert_eq!(ids(&walk(&doc, TraversalOrder::Pre)), ["root"]);
    }

    #[test]
    fn preorder() {
        let doc = FigmaDocument::new(n("root", vec![n("a", vec![n("b", vec![])]), n("c", vec![])]));
        let v = walk(&doc, TraversalOrder::Pre);
        assert_eq!(ids(&v), ["root", "a", "b", "c"]);
        assert_eq!(v[2].depth, 2);
        assert_eq!(v[2].ancestors, ["root", "a"]);
    }

    fn arb_tree() -> impl Strategy<Value = FigmaNode> {
        // Shape only; ids are assigned afterwards.
        let leaf = Just(FigmaNode::new("", "", NodeType::Rectangle));
        leaf.prop_recursive(4, 20, 4, |inner| {
            prop::collection::vec(inner, 0..4).prop_map(|kids| FigmaNode::new("", "", NodeType::Group).with_children(kids))
        })
    }

    fn assign_ids(n: &mut FigmaNode, next: &mut usize) {
        n.id = format!("n{next}");
        *next += 1;
        for c in &mut n.children {
            assign_ids(c, next);
        }
    }

    /// Paint order: parents before children, earlier siblings first.
    fn paint_order(n: &FigmaNode, out: &mut Vec<String>) {
        out.push(n.id.clone());
        for c in &n.children {
            paint_order(c, out);
        }
    }

    fn is_descendant(tree: &FigmaNode, anc: &str, desc: &str) -> bool {
        tree.find(anc).is_some_and(|a| a.id != desc && a.find(desc).is_some())
    }

    proptest! {
        #[test]
        fn traversals_are_complete(mut root in arb_tree()) {
            let mut k = 0;
            assign_ids(&mut root, &mut k);
            root.node_type = NodeType::Frame;
            let doc = FigmaDocument::new(root);
            for order in [TraversalOrder::Pre, TraversalOrder::ReverseZ] {
                let v = ids(&walk(&doc, order));
                let set: HashSet<_> = v.iter().cloned().collect();
                prop_assert_eq!(v.len(), doc.node_count());
                prop_assert_eq!(set.len(), doc.node_count());
            }
        }

        /// Brute force: for every pair, reverse-Z puts u before v exactly
        /// when u is a descendant of v, or neither contains the other and u
        /// paints after v.
        #[test]
        fn reverse_z_matches_paint_order_oracle(mut root in arb_tree()) {
            let mut k = 0;
            assign_ids(&mut root, &mut k);
            root.node_type = NodeType::Frame;
            let mut paint = Vec::new();
            paint_order(&root, &mut paint);
            let doc = FigmaDocument::new(root);
            let rz = ids(&walk(&doc, TraversalOrder::ReverseZ));
            let pos = |id: &str| rz.iter().position(|x| x == id).unwrap();
            let ppos = |id: &str| paint.iter().position(|x| x == id).unwrap();
            for u in &paint {
                for v in &paint {
                    if u == v { continue; }
                    let expected_first = if is_descendant(&doc.root, v, u) {
                        true
                    } else if is_descendant(&doc.root, u, v) {
                        false
                    } else {
                        ppos(u) > ppos(v)
                    };
                    prop_assert_eq!(pos(u) < pos(v), expected_first, "u={} v={}", u, v);
                }
            }
        }
    }
}
