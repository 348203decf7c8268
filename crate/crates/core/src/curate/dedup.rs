use super::CurateError;
use rayon::prelude::*;
use std::collections::{BTreeMap, BTreeSet};

pub const DEFAULT_DEDUP_THRESHOLD: f64 = 0.95;

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Single-linkage clustering under `cos > threshold` (strict). Each
/// cluster keeps its member with the largest byte size, ties going to the
/// lexicographically smallest id. Missing sizes count as 0.
pub fn dedup_clusters(
    embeddings: &BTreeMap<String, Vec<f64>>,
    threshold: f64,
    sizes: &BTreeMap<String, u64>,
) -> Result<BTreeSet<String>, CurateError> {
    let ids: Vec<&String> = embeddings.keys().collect();
    let vecs: Vec<&Vec<f64>> = embeddings.values().collect();
    if let Some(first) = vecs.first() {
        let dim = first.len();
        for (id, v) in ids.iter().zip(&vecs) {
            if v.len() != dim {
                return Err(CurateError::DimensionMismatch { id: (*id).clone(), expected: dim, found: v.len() });
            }
        }
    }
    let edges: Vec<(usize, usize)> = (0..vecs.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let vecs = &vecs;
            (i + 1..vecs.len()).filter_map(move |j| {
                let dot: f64 = vecs[i].iter().zip(vecs[j].iter()).map(|(a, b)| a * b).sum();
                (dot > threshold).then_some((i, j))
            })
        })
        .collect();
    let mut uf = UnionFind::new(ids.len());
    for (i, j) in edges {
        uf.union(i, j);
    }
    let mut best: BTreeMap<usize, usize> = BTreeMap::new();
    for i in 0..ids.len() {
        let root = uf.find(i);
        let size = |k: usize| sizes.get(ids[k]).copied().unwrap_or(0);
        best.entry(root)
            .and_modify(|cur| {
                // ids are visited in ascending order, so only a strictly larger size wins.
                if size(i) > size(*cur) {
                    *cur = i;
                }
            })
            .or_insert(i);
    }
    Ok(best.values().map(|&i| ids[i].clone()).collect())
}

/// Deduplicates within each file key first, then across the pooled
/// survivors. Pages without a file key form their own group.
pub fn dedup_two_stage(
    embeddings: &BTreeMap<String, Vec<f64>>,
    file_keys: &BTreeMap<String, String>,
    threshold: f64,
    sizes: &BTreeMap<String, u64>,
) -> Result<BTreeSet<String>, CurateError> {
    let mut groups: BTreeMap<&str, BTreeMap<String, Vec<f64>>> = BTreeMap::new();
    for (id, v) in embeddings {
        let key = file_keys.get(id).map(String::as_str).unwrap_or("");
        groups.entry(key).or_default().insert(id.clone(), v.clone());
    }
    let mut pooled = BTreeMap::new();
    for group in groups.values() {
        for id in dedup_clusters(group, threshold, sizes)? {
            pooled.insert(id.clone(), embeddings[&id].clone());
        }
    }
    dedup_clusters(&pooled, threshold, sizes)
}
