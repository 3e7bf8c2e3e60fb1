//! Core/periphery classification from community membership counts, and the
//! C(α) connectivity profile: the fraction of nodes with at least α
//! memberships that sit in the largest connected component of their induced
//! subgraph. C(α) near 1 signals a single dominant core.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::graph::SocialGraph;

pub const DEFAULT_CORE_THRESHOLD: u32 = 5;

/// A node's membership count and core flag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreLabel {
    pub id: String,
    pub count: u32,
    pub is_core: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClassifySummary {
    pub n_core: u32,
    pub n_peri: u32,
    pub adopter_share_core: f64,
    pub adopter_share_peri: f64,
}

/// Label every counted node: core iff count ≥ threshold.
pub fn classify(
    counts: &BTreeMap<String, u32>,
    adopters: &alloc::collections::BTreeSet<String>,
    core_threshold: u32,
) -> (Vec<CoreLabel>, ClassifySummary) {
    let mut labels = Vec::with_capacity(counts.len());
    let mut summary = ClassifySummary::default();
    let (mut core_adopters, mut peri_adopters) = (0u32, 0u32);
    for (id, &count) in counts {
        let is_core = count >= core_threshold;
        if is_core {
            summary.n_core += 1;
            core_adopters += adopters.contains(id) as u32;
        } else {
            summary.n_peri += 1;
            peri_adopters += adopters.contains(id) as u32;
        }
        labels.push(CoreLabel { id: id.clone(), count, is_core });
    }
    if summary.n_core > 0 {
        summary.adopter_share_core = core_adopters as f64 / summary.n_core as f64;
    }
    if summary.n_peri > 0 {
        summary.adopter_share_peri = peri_adopters as f64 / summary.n_peri as f64;
    }
    (labels, summary)
}

/// One defined point of the profile.
#[derive(Debug, Clone, PartialEq)]
pub struct CAlphaPoint {
    pub alpha: u32,
    pub n_nodes: usize,
    pub c_alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConnectivityProfile {
    pub points: Vec<CAlphaPoint>,
    /// α values whose induced node set was empty (C undefined, row omitted).
    pub omitted: Vec<u32>,
}

/// C(α) over the α grid: induce the union graph on nodes with count ≥ α and
/// take |largest component| / |induced set|.
pub fn connectivity_profile(
    graph: &SocialGraph,
    counts: &BTreeMap<String, u32>,
    alpha_grid: &[u32],
) -> ConnectivityProfile {
    let n = graph.node_count();
    let count_of: Vec<u32> = (0..n as u32)
        .map(|u| counts.get(graph.node_id(u)).copied().unwrap_or(0))
        .collect();

    let mut profile = ConnectivityProfile::default();
    for &alpha in alpha_grid {
        let included: Vec<bool> = count_of.iter().map(|&c| c >= alpha).collect();
        let n_nodes = included.iter().filter(|&&b| b).count();
        if n_nodes == 0 {
            profile.omitted.push(alpha);
            continue;
        }
        let largest = largest_component(graph, &included);
        profile.points.push(CAlphaPoint {
            alpha,
            n_nodes,
            c_alpha: largest as f64 / n_nodes as f64,
        });
    }
    profile
}

/// Size of the largest connected component of the induced subgraph. Scanning
/// node ids in ascending order with a strict size comparison makes ties go to
/// the component containing the smallest node id.
fn largest_component(graph: &SocialGraph, included: &[bool]) -> usize {
    let n = included.len();
    let mut visited = vec![false; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut best = 0usize;
    for start in 0..n {
        if !included[start] || visited[start] {
            continue;
        }
        let mut size = 0usize;
        visited[start] = true;
        stack.push(start as u32);
        while let Some(u) = stack.pop() {
            size += 1;
            for &v in graph.neighbors(u) {
                if included[v as usize] && !visited[v as usize] {
                    visited[v as usize] = true;
                    stack.push(v);
                }
            }
        }
        if size > best {
            best = size;
        }
    }
    best
}
