mod common;

use figui::curate::dedup_clusters;
use figui::figma::serialize_document;
use figui::metrics::evaluate;
use figui::refine::{refine, RefineConfig};
use figui::visual::{mae, ImageBuffer};
use proptest::prelude::*;
use std::collections::{BTreeMap, BTreeSet};

/// Class vocabulary with hand-assigned roles.
struct Class {
    raw: &'static str,
    /// Counted by RUR, and whether relative.
    layout: Option<bool>,
    arbitrary: bool,
    /// Positioned, and whether absolute.
    position: Option<bool>,
    flex: bool,
    range: Option<usize>,
}

const fn c(raw: &'static str, layout: Option<bool>, arbitrary: bool, position: Option<bool>, flex: bool, range: Option<usize>) -> Class {
    Class { raw, layout, arbitrary, position, flex, range }
}

const VOCAB: &[Class] = &[
    c("w-4", Some(true), false, None, false, None),
    c("w-[10px]", Some(false), true, None, false, None),
    c("p-0", Some(false), false, None, false, None),
    c("absolute", None, false, Some(true), false, None),
    c("relative", None, false, Some(false), false, None),
    c("flex", None, false, None, true, None),
    c("card", None, false, None, false, None),
    c("md:p-2", Some(true), false, None, false, Some(1)),
    c("xl:w-4", Some(true), false, None, false, Some(3)),
    c("text-[12px]", None, true, None, false, None),
    c("bg-red-500", None, false, None, false, None),
];

const TAGS: &[(&str, bool)] = &[("div", false), ("p", true), ("section", true), ("span", false), ("a", true)];
const STYLES: &[(&str, Option<bool>)] = &[("", None), ("width: 10px", Some(false)), ("height: 50%", Some(true)), ("color: red", None)];

#[derive(Debug, Clone)]
struct El {
    tag: usize,
    classes: BTreeSet<usize>,
    style: usize,
    child: bool,
}

fn element() -> impl Strategy<Value = El> {
    (0..TAGS.len(), prop::collection::btree_set(0..VOCAB.len(), 0..5), 0..STYLES.len(), any::<bool>()).prop_map(|(tag, classes, style, child)| El { tag, classes, style, child })
}

fn render(els: &[El]) -> String {
    let mut body = String::new();
    for e in els {
        let tag = TAGS[e.tag].0;
        body += &format!("<{tag}");
        if !e.classes.is_empty() {
            let cls: Vec<&str> = e.classes.iter().map(|&i| VOCAB[i].raw).collect();
            body += &format!(" class=\"{}\"", cls.join(" "));
        }
        if !STYLES[e.style].0.is_empty() {
            body += &format!(" style=\"{}\"", STYLES[e.style].0);
        }
        body += ">";
        if e.child {
            body += "<span></span>";
        }
        body += &format!("</{tag}>");
    }
    format!("<!DOCTYPE html><html><head></head><body>{body}</body></html>")
}

/// Independent recount of all eight metrics as (numerator, denominator).
fn oracle(els: &[El]) -> [(u64, u64); 8] {
    let all = || els.iter().flat_map(|e| e.classes.iter().map(|&i| &VOCAB[i]));
    let n = |b: bool| b as u64;
    let (mut rur, mut rur_d) = (0, 0);
    for cl in all() {
        if let Some(rel) = cl.layout {
            rur_d += 1;
            rur += n(rel);
        }
    }
    for e in els {
        if let Some(rel) = STYLES[e.style].1 {
            rur_d += 1;
            rur += n(rel);
        }
    }
    let (mut apr, mut apr_d) = (0, 0);
    for e in els {
        let pos: Vec<bool> = e.classes.iter().filter_map(|&i| VOCAB[i].position).collect();
        if !pos.is_empty() {
            apr_d += 1;
            apr += n(pos.contains(&true));
        }
    }
    let containers = els.iter().filter(|e| e.child).count() as u64 + n(!els.is_empty());
    let flex = els.iter().filter(|e| e.child && e.classes.iter().any(|&i| VOCAB[i].flex)).count() as u64;
    let ranges: BTreeSet<usize> = all().filter_map(|cl| cl.range).collect();
    let desc = els.len() as u64 + els.iter().filter(|e| e.child).count() as u64;
    let semantic = els.iter().filter(|e| TAGS[e.tag].1).count() as u64;
    let tokens = all().count() as u64;
    let arb = all().filter(|cl| cl.arbitrary).count() as u64;
    let styled = els.iter().filter(|e| !STYLES[e.style].0.is_empty()).count() as u64;
    let card = all().filter(|cl| cl.raw == "card").count() as u64;
    let ccr = if card == 0 { (0, 0) } else { (n(card >= 2), 1) };
    [(rur, rur_d), (apr, apr_d), (flex, containers), (ranges.len() as u64, 4), (semantic, desc), (arb, tokens), (styled, desc), ccr]
}

fn unit_vectors(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, dim).prop_filter_map("zero vector", |v| {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        (n > 1e-6).then(|| v.iter().map(|x| x / n).collect())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metrics_match_recount(els in prop::collection::vec(element(), 0..12)) {
        let report = evaluate(&render(&els)).unwrap();
        let got: Vec<(u64, u64)> = report.metrics().iter().map(|(_, f)| (f.numerator, f.denominator)).collect();
        prop_assert_eq!(got, oracle(&els).to_vec());
        for (_, f) in report.metrics() {
            prop_assert!(f.numerator <= f.denominator && (0.0..=1.0).contains(&f.value));
        }
    }

    #[test]
    fn refine_is_idempotent(seed in 1000u64..1_000_000) {
        let (doc, store) = common::random_doc(seed);
        let cfg = RefineConfig::default();
        let (d1, s1, _) = refine(doc, store, &cfg).unwrap();
        let (d2, s2, _) = refine(d1.clone(), s1.clone(), &cfg).unwrap();
        prop_assert_eq!(serialize_document(&d1), serialize_document(&d2));
        prop_assert_eq!(s1, s2);
    }

    #[test]
    fn dedup_survivors_are_pairwise_distinct(vs in prop::collection::vec(unit_vectors(3), 1..30), t in 0.5f64..0.99) {
        let emb: BTreeMap<String, Vec<f64>> = vs.into_iter().enumerate().map(|(i, v)| (format!("{i:02}"), v)).collect();
        let kept = dedup_clusters(&emb, t, &BTreeMap::new()).unwrap();
        prop_assert!(!kept.is_empty());
        let kept: Vec<&String> = kept.iter().collect();
        for (i, a) in kept.iter().enumerate() {
            for b in &kept[i + 1..] {
                let cos: f64 = emb[*a].iter().zip(&emb[*b]).map(|(x, y)| x * y).sum();
                prop_assert!(cos <= t);
            }
        }
    }

    #[test]
    fn mae_is_a_symmetric_unit_distance(a in prop::collection::vec(any::<u8>(), 48), b in prop::collection::vec(any::<u8>(), 48)) {
        let ia = ImageBuffer::from_raw(4, 4, a).unwrap();
        let ib = ImageBuffer::from_raw(4, 4, b).unwrap();
        let d = mae(&ia, &ib).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert_eq!(d, mae(&ib, &ia).unwrap());
    }
}
