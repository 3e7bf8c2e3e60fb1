//! Mutual-call social graph construction and ego-network extraction.
//!
//! Subscribers befriend each other in a calendar month when the reciprocity
//! rule holds for their calls in that month; the union over monthly layers is
//! the graph used by all downstream analysis. Months are the atomic time unit
//! throughout, finer timestamps only order events.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::{CoreError, Result};

/// Calendar month, stored as `year * 12 + (month - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Month(pub u32);

impl Month {
    pub fn from_ym(year: u32, month: u32) -> Self {
        debug_assert!((1..=12).contains(&month));
        Month(year * 12 + (month - 1))
    }

    pub fn year(self) -> u32 {
        self.0 / 12
    }

    pub fn month(self) -> u32 {
        self.0 % 12 + 1
    }

    /// Parse `"YYYY-MM"`.
    pub fn parse(s: &str) -> Option<Self> {
        let (y, m) = s.split_once('-')?;
        if y.len() != 4 || m.len() != 2 {
            return None;
        }
        let year: u32 = y.parse().ok()?;
        let month: u32 = m.parse().ok()?;
        if !(1..=12).contains(&month) {
            return None;
        }
        Some(Month::from_ym(year, month))
    }

    pub fn next(self) -> Self {
        Month(self.0 + 1)
    }
}

impl core::fmt::Display for Month {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{:04}-{:02}", self.year(), self.month())
    }
}

/// Inclusive study window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub start: Month,
    pub end: Month,
}

impl Window {
    pub fn new(start: Month, end: Month) -> Result<Self> {
        if end < start {
            return Err(CoreError::InvalidConfig("window end before start".into()));
        }
        Ok(Window { start, end })
    }

    pub fn contains(&self, m: Month) -> bool {
        self.start <= m && m <= self.end
    }

    pub fn n_months(&self) -> u32 {
        self.end.0 - self.start.0 + 1
    }

    /// 0-based offset of a month within the window.
    pub fn offset(&self, m: Month) -> u32 {
        m.0 - self.start.0
    }

    pub fn months(&self) -> impl Iterator<Item = Month> + '_ {
        (self.start.0..=self.end.0).map(Month)
    }
}

/// One cleaned call record. `ts` is seconds since the Unix epoch and only
/// orders events; all analysis runs at month resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct CallEvent {
    pub caller: String,
    pub callee: String,
    pub month: Month,
    pub ts: i64,
    pub cell_region: Option<String>,
}

/// Edge rule applied within each calendar month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReciprocityRule {
    /// At least one call in each direction in the same month (strict mutual
    /// reading; screens out PBX / customer-service style one-way traffic).
    #[default]
    BothDirectionsSameMonth,
    /// At least one call in either direction in the same month.
    AnyDirectionSameMonth,
}

impl ReciprocityRule {
    pub fn as_str(self) -> &'static str {
        match self {
            ReciprocityRule::BothDirectionsSameMonth => "both_directions_same_month",
            ReciprocityRule::AnyDirectionSameMonth => "any_direction_same_month",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "both_directions_same_month" => Some(ReciprocityRule::BothDirectionsSameMonth),
            "any_direction_same_month" => Some(ReciprocityRule::AnyDirectionSameMonth),
            _ => None,
        }
    }
}

/// Undirected simple graph with per-month edge layers and a union view.
///
/// Node indices are assigned in sorted order of the external ids, so the graph
/// is a pure function of its edge/node content regardless of input order.
#[derive(Debug, Clone, PartialEq)]
pub struct SocialGraph {
    ids: Vec<String>,
    index: BTreeMap<String, u32>,
    monthly: BTreeMap<Month, Vec<(u32, u32)>>,
    union_edges: Vec<(u32, u32)>,
    adj: Vec<Vec<u32>>,
}

impl SocialGraph {
    /// Assemble a graph from external ids and canonical monthly edge lists on
    /// those ids. Used by the CDR builder, the synthetic generator, and the
    /// edge-dump loader.
    pub fn from_parts(
        mut node_ids: Vec<String>,
        monthly_by_id: BTreeMap<Month, Vec<(String, String)>>,
    ) -> Self {
        node_ids.sort_unstable();
        node_ids.dedup();
        let index: BTreeMap<String, u32> =
            node_ids.iter().enumerate().map(|(i, id)| (id.clone(), i as u32)).collect();

        let mut monthly: BTreeMap<Month, Vec<(u32, u32)>> = BTreeMap::new();
        let mut union_set: BTreeSet<(u32, u32)> = BTreeSet::new();
        for (month, edges) in monthly_by_id {
            let mut layer: BTreeSet<(u32, u32)> = BTreeSet::new();
            for (a, b) in edges {
                let (ia, ib) = (index[&a], index[&b]);
                if ia == ib {
                    continue;
                }
                let e = if ia < ib { (ia, ib) } else { (ib, ia) };
                layer.insert(e);
                union_set.insert(e);
            }
            monthly.insert(month, layer.into_iter().collect());
        }

        let union_edges: Vec<(u32, u32)> = union_set.into_iter().collect();
        let mut adj = vec![Vec::new(); node_ids.len()];
        for &(u, v) in &union_edges {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }

        SocialGraph { ids: node_ids, index, monthly, union_edges, adj }
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.union_edges.len()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn node_id(&self, u: u32) -> &str {
        &self.ids[u as usize]
    }

    pub fn node_index(&self, id: &str) -> Option<u32> {
        self.index.get(id).copied()
    }

    pub fn neighbors(&self, u: u32) -> &[u32] {
        &self.adj[u as usize]
    }

    pub fn degree(&self, u: u32) -> usize {
        self.adj[u as usize].len()
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.adj[u as usize].binary_search(&v).is_ok()
    }

    pub fn union_edges(&self) -> &[(u32, u32)] {
        &self.union_edges
    }

    pub fn monthly_layers(&self) -> &BTreeMap<Month, Vec<(u32, u32)>> {
        &self.monthly
    }

    /// Months-present bitmask for an edge, bit i = `window.start + i`.
    pub fn month_bitmask(&self, edge: (u32, u32), window: &Window) -> u64 {
        debug_assert!(window.n_months() <= 64);
        let mut mask = 0u64;
        for (month, layer) in &self.monthly {
            if window.contains(*month) && layer.binary_search(&edge).is_ok() {
                mask |= 1 << window.offset(*month);
            }
        }
        mask
    }
}

/// Build the monthly mutual-call graph from cleaned events.
///
/// An empty event stream yields an empty graph. Nodes are every id appearing
/// as caller or callee, whether or not any edge survives the rule.
pub fn build_graph(events: &[CallEvent], rule: ReciprocityRule) -> SocialGraph {
    let mut node_ids: Vec<String> = Vec::with_capacity(events.len() / 4);
    let mut directed: BTreeMap<Month, BTreeSet<(String, String)>> = BTreeMap::new();
    for ev in events {
        if ev.caller == ev.callee {
            continue;
        }
        node_ids.push(ev.caller.clone());
        node_ids.push(ev.callee.clone());
        directed
            .entry(ev.month)
            .or_default()
            .insert((ev.caller.clone(), ev.callee.clone()));
    }

    let mut monthly: BTreeMap<Month, Vec<(String, String)>> = BTreeMap::new();
    for (month, pairs) in &directed {
        let mut edges = Vec::new();
        for (a, b) in pairs.iter() {
            match rule {
                ReciprocityRule::BothDirectionsSameMonth => {
                    // Emit when scanning the canonical direction, require the reverse.
                    if a < b && pairs.contains(&(b.clone(), a.clone())) {
                        edges.push((a.clone(), b.clone()));
                    }
                }
                ReciprocityRule::AnyDirectionSameMonth => {
                    // from_parts canonicalizes and dedups.
                    edges.push((a.clone(), b.clone()));
                }
            }
        }
        monthly.insert(*month, edges);
    }

    SocialGraph::from_parts(node_ids, monthly)
}

/// Degree statistics over the union graph; `histogram` is exact.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeStats {
    pub mean: f64,
    pub std: f64,
    pub median: f64,
    pub histogram: BTreeMap<u32, u32>,
}

/// Mean / population std / median of union-graph degree, over all nodes.
pub fn degree_stats(graph: &SocialGraph) -> Result<DegreeStats> {
    let n = graph.node_count();
    if n == 0 {
        return Err(CoreError::EmptyGraph);
    }
    let mut degrees: Vec<u32> = (0..n as u32).map(|u| graph.degree(u) as u32).collect();
    degrees.sort_unstable();
    let sum: u64 = degrees.iter().map(|&d| d as u64).sum();
    let mean = sum as f64 / n as f64;
    let ss: f64 = degrees.iter().map(|&d| (d as f64 - mean) * (d as f64 - mean)).sum();
    let std = crate::mathx::sqrt(ss / n as f64);
    let median = if n % 2 == 1 {
        degrees[n / 2] as f64
    } else {
        (degrees[n / 2 - 1] as f64 + degrees[n / 2] as f64) / 2.0
    };
    let mut histogram = BTreeMap::new();
    for d in degrees {
        *histogram.entry(d).or_insert(0u32) += 1;
    }
    Ok(DegreeStats { mean, std, median, histogram })
}

/// A focal node, its direct neighbors, and the union-graph edges among them.
#[derive(Debug, Clone, PartialEq)]
pub struct EgoNetwork {
    pub ego: u32,
    /// Sorted graph indices; always contains `ego`.
    pub members: Vec<u32>,
    /// Canonical (u < v) edges in graph indices.
    pub edges: Vec<(u32, u32)>,
}

impl EgoNetwork {
    pub fn member_count(&self) -> usize {
        self.members.len()
    }

    /// Reindex to a compact local graph (members sorted, local id = rank).
    pub fn to_local(&self) -> LocalGraph {
        let pos = |u: u32| self.members.binary_search(&u).unwrap() as u32;
        let n = self.members.len();
        let mut adj = vec![Vec::new(); n];
        let mut edges = Vec::with_capacity(self.edges.len());
        for &(u, v) in &self.edges {
            let (lu, lv) = (pos(u), pos(v));
            adj[lu as usize].push(lv);
            adj[lv as usize].push(lu);
            edges.push((lu, lv));
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        LocalGraph { n, adj, edges }
    }
}

/// Compact reindexed undirected graph used by per-ego model fitting.
#[derive(Debug, Clone)]
pub struct LocalGraph {
    pub n: usize,
    pub adj: Vec<Vec<u32>>,
    pub edges: Vec<(u32, u32)>,
}

/// Extract the ego-network of `node` on the union graph.
pub fn ego_network(graph: &SocialGraph, node: &str) -> Result<EgoNetwork> {
    let ego = graph
        .node_index(node)
        .ok_or_else(|| CoreError::UnknownNode(node.to_string()))?;
    let mut members: Vec<u32> = graph.neighbors(ego).to_vec();
    members.push(ego);
    members.sort_unstable();
    let mut edges = Vec::new();
    for &u in &members {
        for &v in graph.neighbors(u) {
            if u < v && members.binary_search(&v).is_ok() {
                edges.push((u, v));
            }
        }
    }
    edges.sort_unstable();
    Ok(EgoNetwork { ego, members, edges })
}

fn modal_region(counts: &BTreeMap<&str, u32>) -> Option<String> {
    // BTreeMap iterates regions in lexicographic order, so strictly-greater
    // keeps the smallest code on ties.
    let mut best: Option<(&str, u32)> = None;
    for (&region, &count) in counts {
        match best {
            Some((_, c)) if count <= c => {}
            _ => best = Some((region, count)),
        }
    }
    best.map(|(r, _)| r.to_string())
}

/// Modal cell region over the subscriber's outgoing located events; ties break
/// to the lexicographically smallest region code. `None` marks a subscriber
/// with no located events.
pub fn infer_home_region(events: &[CallEvent], subscriber: &str) -> Option<String> {
    let mut counts: BTreeMap<&str, u32> = BTreeMap::new();
    for ev in events {
        if ev.caller == subscriber {
            if let Some(region) = &ev.cell_region {
                *counts.entry(region.as_str()).or_insert(0) += 1;
            }
        }
    }
    modal_region(&counts)
}

/// Home regions for every subscriber with located events, in one pass over
/// the event stream; same mode and tie rules as [`infer_home_region`].
pub fn infer_home_regions(events: &[CallEvent]) -> BTreeMap<String, String> {
    let mut per_caller: BTreeMap<&str, BTreeMap<&str, u32>> = BTreeMap::new();
    for ev in events {
        if let Some(region) = &ev.cell_region {
            *per_caller
                .entry(ev.caller.as_str())
                .or_default()
                .entry(region.as_str())
                .or_insert(0) += 1;
        }
    }
    per_caller
        .into_iter()
        .filter_map(|(caller, counts)| {
            modal_region(&counts).map(|region| (caller.to_string(), region))
        })
        .collect()
}
