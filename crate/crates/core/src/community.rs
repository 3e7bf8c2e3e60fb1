//! Community extraction from fitted affiliation models, deduplication, and
//! membership counting.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::cesna::AffiliationModel;
use crate::mathx;
use crate::{CoreError, Result};

/// One detected community with its source ego.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Community {
    pub ego: String,
    pub members: BTreeSet<String>,
}

/// Deduplicated, nested-free, adopter-filtered community collection in
/// deterministic order (size descending, then lexicographic members).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CommunitySet {
    pub communities: Vec<Community>,
}

/// Affiliation threshold δ = sqrt(−ln(1−ε)) where ε is the background edge
/// density 2|E| / (N(N−1)): two nodes sitting exactly at δ in one shared
/// community connect with the background probability.
pub fn affiliation_threshold(n_members: usize, n_edges: usize) -> Result<f64> {
    if n_edges == 0 {
        return Err(CoreError::NoBackgroundDensity);
    }
    let pairs = n_members as f64 * (n_members as f64 - 1.0) / 2.0;
    // A complete ego-network has density 1; cap just below so δ stays finite.
    let eps = (n_edges as f64 / pairs).min(1.0 - 1e-12);
    Ok(mathx::sqrt(-mathx::ln_1p(-eps)))
}

/// Threshold the fitted affiliation matrix into raw (pre-dedup) communities.
/// `member_ids[u]` is the external id of local node u.
pub fn extract(
    model: &AffiliationModel,
    member_ids: &[String],
    n_edges: usize,
    ego_id: &str,
) -> Result<Vec<Community>> {
    let delta = affiliation_threshold(model.n, n_edges)?;
    let mut out = Vec::new();
    for c in 0..model.k {
        let members: BTreeSet<String> = (0..model.n)
            .filter(|&u| model.f[u * model.k + c] >= delta)
            .map(|u| member_ids[u].clone())
            .collect();
        if !members.is_empty() {
            out.push(Community { ego: ego_id.into(), members });
        }
    }
    Ok(out)
}

/// Collapse exact duplicates, drop strict subsets of another community, and
/// drop communities containing no adopter. Idempotent.
pub fn dedup_filter(candidates: Vec<Community>, adopters: &BTreeSet<String>) -> CommunitySet {
    let mut sorted = candidates;
    // Deterministic order: size descending, members lexicographic, ego.
    sorted.sort_by(|a, b| {
        b.members
            .len()
            .cmp(&a.members.len())
            .then_with(|| a.members.cmp(&b.members))
            .then_with(|| a.ego.cmp(&b.ego))
    });
    sorted.dedup_by(|a, b| a.members == b.members);

    let mut keep: Vec<Community> = Vec::with_capacity(sorted.len());
    'outer: for cand in sorted {
        // Earlier entries are at least as large; subset-of-equal-size would be
        // an exact duplicate, already collapsed.
        for kept in &keep {
            if kept.members.len() > cand.members.len() && cand.members.is_subset(&kept.members) {
                continue 'outer;
            }
        }
        keep.push(cand);
    }

    keep.retain(|c| c.members.iter().any(|m| adopters.contains(m)));
    CommunitySet { communities: keep }
}

/// Histogram rows: membership count → (all nodes, adopters).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MembershipHistogram {
    pub rows: BTreeMap<u32, (u32, u32)>,
}

/// Number of retained communities containing each node of `universe`, plus
/// histograms for all nodes and for adopters.
pub fn membership_counts(
    set: &CommunitySet,
    universe: &[String],
    adopters: &BTreeSet<String>,
) -> (BTreeMap<String, u32>, MembershipHistogram) {
    let mut counts: BTreeMap<String, u32> = universe.iter().map(|id| (id.clone(), 0)).collect();
    for community in &set.communities {
        for member in &community.members {
            if let Some(c) = counts.get_mut(member) {
                *c += 1;
            }
        }
    }
    let mut hist = MembershipHistogram::default();
    for (id, &count) in &counts {
        let row = hist.rows.entry(count).or_insert((0, 0));
        row.0 += 1;
        if adopters.contains(id) {
            row.1 += 1;
        }
    }
    (counts, hist)
}
