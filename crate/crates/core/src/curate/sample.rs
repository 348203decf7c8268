use super::labels::{Complexity, ContentCategory, PageLabel, Platform};
use super::CurateError;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::io::Write;

/// Candidate-set size for a stratum that must contribute `n_target`
/// samples out of `n_remain` available pages.
pub fn redundant_quota(n_target: usize, n_remain: usize) -> usize {
    let want = match n_target {
        0..=2 => 6,
        3..=5 => 3 * n_target,
        _ => 2 * n_target,
    };
    n_remain.min(want)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StratumKey {
    pub platform: Platform,
    pub complexity: Complexity,
    pub quality: u8,
    pub category: ContentCategory,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StratumAllocation {
    pub key: StratumKey,
    /// Eligible pages in the stratum, sorted by id.
    pub members: Vec<String>,
    /// `total · |stratum| / |eligible|`.
    pub share: f64,
    pub target: usize,
    /// Oversampled review list, in draw order.
    pub candidates: Vec<String>,
}

/// Proportional allocation of `total` test samples over the strata of
/// quality-2/3 pages, rounded by largest remainder (ties to the smaller
/// stratum key), followed by a seeded uniform draw of each stratum's
/// candidate list. Strata whose target is 0 get no candidates.
pub fn stratified_sample(
    labels: &BTreeMap<String, PageLabel>,
    total: usize,
    seed: u64,
) -> Result<Vec<StratumAllocation>, CurateError> {
    let mut strata: BTreeMap<StratumKey, Vec<String>> = BTreeMap::new();
    for (id, l) in labels.iter().filter(|(_, l)| l.quality >= 2) {
        let key = StratumKey { platform: l.platform, complexity: l.complexity, quality: l.quality, category: l.content_category };
        strata.entry(key).or_default().push(id.clone());
    }
    let population: usize = strata.values().map(Vec::len).sum();
    if population == 0 {
        return Err(CurateError::EmptyPopulation);
    }
    if total > population {
        return Err(CurateError::TotalExceedsPopulation { requested: total, available: population });
    }

    // Exact integer arithmetic: share_i = total·n_i / N = floor_i + rem_i / N.
    let mut allocs: Vec<(StratumAllocation, usize)> = strata
        .into_iter()
        .map(|(key, members)| {
            let num = total * members.len();
            let alloc = StratumAllocation {
                key,
                share: num as f64 / population as f64,
                target: num / population,
                candidates: Vec::new(),
                members,
            };
            (alloc, num % population)
        })
        .collect();
    let assigned: usize = allocs.iter().map(|(a, _)| a.target).sum();
    let mut order: Vec<usize> = (0..allocs.len()).collect();
    order.sort_by(|&a, &b| allocs[b].1.cmp(&allocs[a].1).then(allocs[a].0.key.cmp(&allocs[b].0.key)));
    for &i in order.iter().take(total - assigned) {
        allocs[i].0.target += 1;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(allocs.len());
    for (mut a, _) in allocs {
        if a.target > 0 {
            let quota = redundant_quota(a.target, a.members.len());
            let mut pool = a.members.clone();
            let (picked, _) = pool.partial_shuffle(&mut rng, quota);
            a.candidates = picked.to_vec();
        }
        out.push(a);
    }
    Ok(out)
}

/// Review worklist: one row per candidate with its stratum and rank.
pub fn write_worklist<W: Write>(w: W, allocs: &[StratumAllocation]) -> Result<(), csv::Error> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["platform", "complexity", "quality", "category", "target", "rank", "sample_id"])?;
    for a in allocs {
        for (rank, id) in a.candidates.iter().enumerate() {
            wtr.write_record([
                a.key.platform.to_string(),
                a.key.complexity.to_string(),
                a.key.quality.to_string(),
                a.key.category.to_string(),
                a.target.to_string(),
                (rank + 1).to_string(),
                id.clone(),
            ])?;
        }
    }
    wtr.flush()?;
    Ok(())
}
