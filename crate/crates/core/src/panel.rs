//! Subscriber-month discrete-time hazard panel.
//!
//! One row per subpopulation subscriber per month from the window start until
//! (and including) the adoption month or the window end; observations after
//! the first adoption are censored away. Lagged peer regressors count
//! cumulative adoptions by core and peripheral friends strictly before the
//! row's month. Friend sets come from the union graph restricted to the
//! subpopulation (nodes retained in at least one community), with static
//! covariates frozen at their snapshot values.
//!
//! Instruments follow the intransitive-triad idea: adoptions by friends of
//! friends that are not friends of the focal subscriber, split by the
//! mediating friend's core status.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::community::CommunitySet;
use crate::coreperi::CoreLabel;
use crate::design::{DesignBuilder, DesignMatrix};
use crate::graph::{Month, SocialGraph, Window};
use crate::profile::{Gender, PhoneTech, SubscriberProfile};
use crate::{CoreError, Result};

/// Static per-subscriber panel state.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelSubscriber {
    pub id: String,
    pub node: u32,
    pub is_core: bool,
    pub adoption_month: Option<Month>,
    pub core_frd: u32,
    pub peri_frd: u32,
    /// Indices into the retained community list.
    pub communities: Vec<u32>,
    pub profile: SubscriberProfile,
}

/// One subscriber-month observation.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelRow {
    /// Index into `Panel::subscribers`.
    pub subscriber: u32,
    pub month: Month,
    /// 1-based month index within the window.
    pub t: u32,
    pub adopted: bool,
    pub core_frd_adopt_lag: u32,
    pub peri_frd_adopt_lag: u32,
    pub z_core: u32,
    pub z_peri: u32,
    pub tenure_months: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub window: Window,
    pub subscribers: Vec<PanelSubscriber>,
    pub rows: Vec<PanelRow>,
    pub n_communities: usize,
}

/// Convert classification output into the label map the panel wants.
pub fn labels_map(labels: &[CoreLabel]) -> BTreeMap<String, bool> {
    labels.iter().map(|l| (l.id.clone(), l.is_core)).collect()
}

/// Assemble the panel over the subpopulation defined by the retained
/// communities.
pub fn build(
    graph: &SocialGraph,
    communities: &CommunitySet,
    labels: &BTreeMap<String, bool>,
    adoptions: &BTreeMap<String, Month>,
    profiles: &BTreeMap<String, SubscriberProfile>,
    window: Window,
) -> Result<Panel> {
    // Subpopulation nodes and their community memberships.
    let mut member_of: BTreeMap<String, Vec<u32>> = BTreeMap::new();
    for (c, community) in communities.communities.iter().enumerate() {
        for id in &community.members {
            member_of.entry(id.clone()).or_default().push(c as u32);
        }
    }

    let mut subpop: BTreeSet<u32> = BTreeSet::new();
    for id in member_of.keys() {
        if let Some(node) = graph.node_index(id) {
            subpop.insert(node);
        }
    }

    let total_months = window.n_months();
    let mut subscribers = Vec::with_capacity(member_of.len());
    let mut rows = Vec::new();
    for (id, comm_ids) in &member_of {
        let node = match graph.node_index(id) {
            Some(n) => n,
            None => continue,
        };
        let profile = profiles
            .get(id)
            .ok_or_else(|| CoreError::MissingProfile(id.clone()))?
            .clone();
        let is_core = *labels.get(id).ok_or_else(|| CoreError::MissingLabel(id.clone()))?;
        let adoption_month = adoptions.get(id).copied();
        if let Some(m) = adoption_month {
            if !window.contains(m) {
                return Err(CoreError::AdoptionOutsideWindow(id.clone()));
            }
        }

        // Subpopulation-restricted friends, by the friend's own label, and
        // their adoption offsets bucketed for O(T) cumulative counting.
        let mut core_frd = 0u32;
        let mut peri_frd = 0u32;
        let mut core_adopt_at = vec![0u32; total_months as usize];
        let mut peri_adopt_at = vec![0u32; total_months as usize];
        for &friend in graph.neighbors(node) {
            if !subpop.contains(&friend) {
                continue;
            }
            let friend_id = graph.node_id(friend);
            let friend_core = *labels
                .get(friend_id)
                .ok_or_else(|| CoreError::MissingLabel(String::from(friend_id)))?;
            if friend_core {
                core_frd += 1;
            } else {
                peri_frd += 1;
            }
            if let Some(&m) = adoptions.get(friend_id) {
                if window.contains(m) {
                    let off = window.offset(m) as usize;
                    if friend_core {
                        core_adopt_at[off] += 1;
                    } else {
                        peri_adopt_at[off] += 1;
                    }
                }
            }
        }

        let sub_index = subscribers.len() as u32;
        let last_offset = adoption_month.map_or(total_months - 1, |m| window.offset(m));
        let (mut core_cum, mut peri_cum) = (0u32, 0u32);
        for off in 0..=last_offset {
            let month = Month(window.start.0 + off);
            rows.push(PanelRow {
                subscriber: sub_index,
                month,
                t: off + 1,
                adopted: adoption_month == Some(month),
                core_frd_adopt_lag: core_cum,
                peri_frd_adopt_lag: peri_cum,
                z_core: 0,
                z_peri: 0,
                tenure_months: profile.tenure * 12.0 + off as f64,
            });
            core_cum += core_adopt_at[off as usize];
            peri_cum += peri_adopt_at[off as usize];
        }

        subscribers.push(PanelSubscriber {
            id: id.clone(),
            node,
            is_core,
            adoption_month,
            core_frd,
            peri_frd,
            communities: comm_ids.clone(),
            profile,
        });
    }

    Ok(Panel {
        window,
        subscribers,
        rows,
        n_communities: communities.communities.len(),
    })
}

/// Per-subscriber instrument node sets: friends-of-friends through core and
/// through peripheral friends, excluding the focal subscriber's own friends
/// and the focal subscriber itself. A node reachable both ways appears in
/// both sets.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InstrumentSets {
    /// Keyed by subscriber id; values are sorted graph node indices.
    pub core_reach: BTreeMap<String, Vec<u32>>,
    pub peri_reach: BTreeMap<String, Vec<u32>>,
}

/// Fill the z columns of a built panel; returns the sets for inspection.
pub fn build_instruments(
    panel: &mut Panel,
    graph: &SocialGraph,
    labels: &BTreeMap<String, bool>,
    adoptions: &BTreeMap<String, Month>,
) -> Result<InstrumentSets> {
    let subpop: BTreeSet<u32> = panel.subscribers.iter().map(|s| s.node).collect();
    let window = panel.window;
    let total_months = window.n_months();

    let mut sets = InstrumentSets::default();
    let mut z_core_cum: Vec<Vec<u32>> = Vec::with_capacity(panel.subscribers.len());
    let mut z_peri_cum: Vec<Vec<u32>> = Vec::with_capacity(panel.subscribers.len());

    for sub in &panel.subscribers {
        let i = sub.node;
        let mut core_reach: BTreeSet<u32> = BTreeSet::new();
        let mut peri_reach: BTreeSet<u32> = BTreeSet::new();
        for &j in graph.neighbors(i) {
            if !subpop.contains(&j) {
                continue;
            }
            let j_core = *labels
                .get(graph.node_id(j))
                .ok_or_else(|| CoreError::MissingLabel(String::from(graph.node_id(j))))?;
            for &k in graph.neighbors(j) {
                if k == i || !subpop.contains(&k) || graph.has_edge(i, k) {
                    continue;
                }
                if j_core {
                    core_reach.insert(k);
                } else {
                    peri_reach.insert(k);
                }
            }
        }

        // Cumulative adoption counts over the reach sets: entry t holds the
        // number of reached nodes adopting strictly before window.start + t.
        let cumulative = |reach: &BTreeSet<u32>| -> Vec<u32> {
            let mut at = vec![0u32; total_months as usize];
            for &k in reach {
                if let Some(&m) = adoptions.get(graph.node_id(k)) {
                    if window.contains(m) {
                        at[window.offset(m) as usize] += 1;
                    }
                }
            }
            let mut cum = vec![0u32; total_months as usize];
            let mut running = 0;
            for t in 0..total_months as usize {
                cum[t] = running;
                running += at[t];
            }
            cum
        };
        z_core_cum.push(cumulative(&core_reach));
        z_peri_cum.push(cumulative(&peri_reach));
        sets.core_reach.insert(sub.id.clone(), core_reach.into_iter().collect());
        sets.peri_reach.insert(sub.id.clone(), peri_reach.into_iter().collect());
    }

    for row in &mut panel.rows {
        let off = (row.t - 1) as usize;
        row.z_core = z_core_cum[row.subscriber as usize][off];
        row.z_peri = z_peri_cum[row.subscriber as usize][off];
    }
    Ok(sets)
}

/// Split by the focal subscriber's own label into (core, periphery) panels.
pub fn stratify(panel: &Panel) -> (Panel, Panel) {
    let split = |want_core: bool| -> Panel {
        let mut index_map: BTreeMap<u32, u32> = BTreeMap::new();
        let mut subscribers = Vec::new();
        for (old, sub) in panel.subscribers.iter().enumerate() {
            if sub.is_core == want_core {
                index_map.insert(old as u32, subscribers.len() as u32);
                subscribers.push(sub.clone());
            }
        }
        let rows = panel
            .rows
            .iter()
            .filter(|r| index_map.contains_key(&r.subscriber))
            .map(|r| {
                let mut row = r.clone();
                row.subscriber = index_map[&r.subscriber];
                row
            })
            .collect();
        Panel { window: panel.window, subscribers, rows, n_communities: panel.n_communities }
    };
    (split(true), split(false))
}

/// Which column families enter the design matrix.
#[derive(Debug, Clone)]
pub struct FormulaSpec {
    pub peer_adoption: bool,
    pub friend_counts: bool,
    pub demographics: bool,
    pub region_fe: bool,
    pub month_fe: bool,
    pub community_fe: bool,
}

impl Default for FormulaSpec {
    fn default() -> Self {
        FormulaSpec {
            peer_adoption: true,
            friend_counts: true,
            demographics: true,
            region_fe: true,
            month_fe: true,
            community_fe: true,
        }
    }
}

/// Dummy expansion with documented reference categories: gender=unknown,
/// phone=2G, the lexicographically smallest region, the first window month,
/// and the lowest-indexed community present in the stratum. A row activates
/// the dummy of every community containing its subscriber.
pub fn to_design_matrix(panel: &Panel, formula: &FormulaSpec) -> Result<DesignMatrix> {
    if panel.rows.is_empty() {
        return Err(CoreError::InvalidConfig("empty panel stratum".into()));
    }
    let n = panel.rows.len();
    let mut b = DesignBuilder::new(n);
    let sub = |r: &PanelRow| &panel.subscribers[r.subscriber as usize];

    b.dense_col("intercept", vec![1.0; n]);
    if formula.peer_adoption {
        b.dense_col(
            "core_frd_adopt_lag",
            panel.rows.iter().map(|r| r.core_frd_adopt_lag as f64).collect(),
        );
        b.dense_col(
            "peri_frd_adopt_lag",
            panel.rows.iter().map(|r| r.peri_frd_adopt_lag as f64).collect(),
        );
    }
    if formula.friend_counts {
        b.dense_col("core_frd", panel.rows.iter().map(|r| sub(r).core_frd as f64).collect());
        b.dense_col("peri_frd", panel.rows.iter().map(|r| sub(r).peri_frd as f64).collect());
    }
    if formula.demographics {
        b.dense_col(
            "gender_male",
            panel.rows.iter().map(|r| (sub(r).profile.gender == Gender::Male) as u8 as f64).collect(),
        );
        b.dense_col(
            "gender_female",
            panel
                .rows
                .iter()
                .map(|r| (sub(r).profile.gender == Gender::Female) as u8 as f64)
                .collect(),
        );
        b.dense_col(
            "prepaid",
            panel.rows.iter().map(|r| sub(r).profile.prepaid as u8 as f64).collect(),
        );
        for (name, tech) in [
            ("phone_2_5g", PhoneTech::G25),
            ("phone_3g", PhoneTech::G3),
            ("phone_3_5g", PhoneTech::G35),
            ("phone_other", PhoneTech::Other),
        ] {
            b.dense_col(
                name,
                panel
                    .rows
                    .iter()
                    .map(|r| (sub(r).profile.phone_tech == tech) as u8 as f64)
                    .collect(),
            );
        }
        b.dense_col(
            "mobile_internet",
            panel.rows.iter().map(|r| sub(r).profile.mobile_internet as u8 as f64).collect(),
        );
        b.dense_col("phone_age", panel.rows.iter().map(|r| sub(r).profile.phone_age).collect());
        b.dense_col("tenure_t", panel.rows.iter().map(|r| r.tenure_months).collect());
    }

    if formula.region_fe {
        let regions: BTreeSet<&str> =
            panel.subscribers.iter().map(|s| s.profile.region.as_str()).collect();
        // First (smallest) region is the reference.
        for region in regions.iter().skip(1) {
            let rows: Vec<u32> = panel
                .rows
                .iter()
                .enumerate()
                .filter(|(_, r)| sub(r).profile.region == *region)
                .map(|(i, _)| i as u32)
                .collect();
            b.sparse_col(&alloc::format!("region={region}"), rows);
        }
    }
    if formula.month_fe {
        // Window start is the reference month.
        for month in panel.window.months().skip(1) {
            let rows: Vec<u32> = panel
                .rows
                .iter()
                .enumerate()
                .filter(|(_, r)| r.month == month)
                .map(|(i, _)| i as u32)
                .collect();
            b.sparse_col(&alloc::format!("month={month}"), rows);
        }
    }
    if formula.community_fe {
        let present: BTreeSet<u32> =
            panel.subscribers.iter().flat_map(|s| s.communities.iter().copied()).collect();
        // Lowest-indexed community present is the reference.
        for &c in present.iter().skip(1) {
            let rows: Vec<u32> = panel
                .rows
                .iter()
                .enumerate()
                .filter(|(_, r)| sub(r).communities.contains(&c))
                .map(|(i, _)| i as u32)
                .collect();
            b.sparse_col(&alloc::format!("community=c{c}"), rows);
        }
    }

    let y: Vec<f64> = panel.rows.iter().map(|r| r.adopted as u8 as f64).collect();
    let groups: Vec<u32> = panel.rows.iter().map(|r| r.subscriber).collect();
    let design = b.finalize(y, groups, true)?;
    design.check_response_varies()?;
    Ok(design)
}

/// Instrument vectors aligned with the panel rows.
pub fn instrument_columns(panel: &Panel) -> (Vec<f64>, Vec<f64>) {
    let z_core = panel.rows.iter().map(|r| r.z_core as f64).collect();
    let z_peri = panel.rows.iter().map(|r| r.z_peri as f64).collect();
    (z_core, z_peri)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::community::Community;
    use crate::graph::{build_graph, CallEvent, ReciprocityRule};
    use crate::profile::Wage;
    use crate::rng::Rng;
    use alloc::string::ToString;

    const START: Month = Month(2008 * 12 + 7); // 2008-08

    fn window() -> Window {
        Window::new(START, Month(START.0 + 10)).unwrap()
    }

    fn mutual(a: &str, b: &str, events: &mut Vec<CallEvent>) {
        for (x, y) in [(a, b), (b, a)] {
            events.push(CallEvent {
                caller: x.into(),
                callee: y.into(),
                month: START,
                ts: 0,
                cell_region: None,
            });
        }
    }

    fn profile(id: &str) -> SubscriberProfile {
        SubscriberProfile {
            id: id.into(),
            gender: Gender::Male,
            wage: Wage::Average,
            prepaid: false,
            phone_tech: PhoneTech::G3,
            mobile_internet: false,
            phone_age: 1.0,
            tenure: 2.0,
            region: "R1".into(),
        }
    }

    struct Fixture {
        graph: SocialGraph,
        communities: CommunitySet,
        labels: BTreeMap<String, bool>,
        profiles: BTreeMap<String, SubscriberProfile>,
    }

    /// Line graph a-b-c-d with everyone in one community; b is core.
    fn fixture() -> Fixture {
        let mut events = Vec::new();
        mutual("a", "b", &mut events);
        mutual("b", "c", &mut events);
        mutual("c", "d", &mut events);
        let graph = build_graph(&events, ReciprocityRule::default());
        let members: BTreeSet<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        let communities =
            CommunitySet { communities: vec![Community { ego: "a".into(), members }] };
        let labels: BTreeMap<String, bool> =
            [("a", false), ("b", true), ("c", false), ("d", false)]
                .iter()
                .map(|(id, core)| (id.to_string(), *core))
                .collect();
        let profiles: BTreeMap<String, SubscriberProfile> =
            ["a", "b", "c", "d"].iter().map(|id| (id.to_string(), profile(id))).collect();
        Fixture { graph, communities, labels, profiles }
    }

    fn adoptions_of(pairs: &[(&str, u32)]) -> BTreeMap<String, Month> {
        pairs.iter().map(|(id, off)| (id.to_string(), Month(START.0 + off))).collect()
    }

    #[test]
    fn censoring_after_adoption() {
        let f = fixture();
        let adoptions = adoptions_of(&[("a", 2)]); // adopts in month 3 of 11
        let panel =
            build(&f.graph, &f.communities, &f.labels, &adoptions, &f.profiles, window()).unwrap();
        let a_rows: Vec<&PanelRow> = panel
            .rows
            .iter()
            .filter(|r| panel.subscribers[r.subscriber as usize].id == "a")
            .collect();
        assert_eq!(a_rows.len(), 3);
        let flags: Vec<bool> = a_rows.iter().map(|r| r.adopted).collect();
        assert_eq!(flags, vec![false, false, true]);
        // Never-adopters get the full 11 rows.
        let b_rows = panel
            .rows
            .iter()
            .filter(|r| panel.subscribers[r.subscriber as usize].id == "b")
            .count();
        assert_eq!(b_rows, 11);
    }

    #[test]
    fn lagged_peer_counts_follow_the_lag_rule() {
        let f = fixture();
        // b (core, friend of a) adopts in month 2 → a's core lag is 0 for
        // t ≤ 2 and 1 from t = 3 on.
        let adoptions = adoptions_of(&[("b", 1)]);
        let panel =
            build(&f.graph, &f.communities, &f.labels, &adoptions, &f.profiles, window()).unwrap();
        for r in panel.rows.iter().filter(|r| panel.subscribers[r.subscriber as usize].id == "a") {
            let expect = if r.t >= 3 { 1 } else { 0 };
            assert_eq!(r.core_frd_adopt_lag, expect, "t = {}", r.t);
            assert_eq!(r.peri_frd_adopt_lag, 0);
        }
    }

    #[test]
    fn adoption_outside_window_is_an_error() {
        let f = fixture();
        let adoptions = adoptions_of(&[("a", 40)]);
        match build(&f.graph, &f.communities, &f.labels, &adoptions, &f.profiles, window()) {
            Err(CoreError::AdoptionOutsideWindow(id)) => assert_eq!(id, "a"),
            other => panic!("expected window error, got {other:?}"),
        }
    }

    #[test]
    fn friend_counts_split_by_label_and_sum_to_degree() {
        let f = fixture();
        let panel = build(
            &f.graph,
            &f.communities,
            &f.labels,
            &BTreeMap::new(),
            &f.profiles,
            window(),
        )
        .unwrap();
        for sub in &panel.subscribers {
            assert_eq!(
                (sub.core_frd + sub.peri_frd) as usize,
                f.graph.degree(sub.node),
                "{}",
                sub.id
            );
        }
        let b = panel.subscribers.iter().find(|s| s.id == "c").unwrap();
        assert_eq!(b.core_frd, 1); // b is core
        assert_eq!(b.peri_frd, 1); // d is periphery
    }

    #[test]
    fn instruments_on_a_path_and_a_triangle() {
        let f = fixture();
        // Path a-b-c-d: for a, the core friend is b, and c is a friend of b
        // that is not a friend of a → z_core counts c's adoption with a lag.
        let adoptions = adoptions_of(&[("c", 1)]); // c adopts month 2
        let mut panel =
            build(&f.graph, &f.communities, &f.labels, &adoptions, &f.profiles, window()).unwrap();
        let sets = build_instruments(&mut panel, &f.graph, &f.labels, &adoptions).unwrap();
        let c_node = f.graph.node_index("c").unwrap();
        assert_eq!(sets.core_reach["a"], vec![c_node]);
        assert!(sets.peri_reach["a"].is_empty());
        for r in panel.rows.iter().filter(|r| panel.subscribers[r.subscriber as usize].id == "a") {
            let expect = if r.t >= 3 { 1 } else { 0 };
            assert_eq!(r.z_core, expect, "t = {}", r.t);
        }

        // Triangle: make a-c an edge too; now c is a's friend → excluded.
        let mut events = Vec::new();
        mutual("a", "b", &mut events);
        mutual("b", "c", &mut events);
        mutual("a", "c", &mut events);
        let graph = build_graph(&events, ReciprocityRule::default());
        let members: BTreeSet<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let communities =
            CommunitySet { communities: vec![Community { ego: "a".into(), members }] };
        let labels: BTreeMap<String, bool> = [("a", false), ("b", true), ("c", false)]
            .iter()
            .map(|(id, core)| (id.to_string(), *core))
            .collect();
        let profiles: BTreeMap<String, SubscriberProfile> =
            ["a", "b", "c"].iter().map(|id| (id.to_string(), profile(id))).collect();
        let mut panel =
            build(&graph, &communities, &labels, &adoptions, &profiles, window()).unwrap();
        let sets = build_instruments(&mut panel, &graph, &labels, &adoptions).unwrap();
        assert!(sets.core_reach["a"].is_empty());
        assert!(panel.rows.iter().all(|r| r.z_core == 0 && r.z_peri == 0));
    }

    #[test]
    fn instruments_match_triple_loop_oracle_on_random_graphs() {
        for seed in 0..6u64 {
            let mut rng = Rng::seed_from(900 + seed);
            let n = 50u32;
            let mut events = Vec::new();
            for _ in 0..140 {
                let a = rng.below(n);
                let b = rng.below(n);
                if a != b {
                    mutual(&alloc::format!("s{a:02}"), &alloc::format!("s{b:02}"), &mut events);
                }
            }
            let graph = build_graph(&events, ReciprocityRule::default());
            let members: BTreeSet<String> = graph.ids().iter().cloned().collect();
            let communities = CommunitySet {
                communities: vec![Community { ego: "s00".into(), members }],
            };
            let labels: BTreeMap<String, bool> =
                graph.ids().iter().map(|id| (id.clone(), rng.chance(0.3))).collect();
            let profiles: BTreeMap<String, SubscriberProfile> =
                graph.ids().iter().map(|id| (id.clone(), profile(id))).collect();
            let mut adoptions: BTreeMap<String, Month> = BTreeMap::new();
            for id in graph.ids() {
                if rng.chance(0.4) {
                    adoptions.insert(id.clone(), Month(START.0 + rng.below(11)));
                }
            }
            let mut panel =
                build(&graph, &communities, &labels, &adoptions, &profiles, window()).unwrap();
            let sets = build_instruments(&mut panel, &graph, &labels, &adoptions).unwrap();

            // Brute-force oracle: enumerate ordered triples (i, j, k).
            for sub in &panel.subscribers {
                let i = sub.node;
                let mut core_reach: BTreeSet<u32> = BTreeSet::new();
                let mut peri_reach: BTreeSet<u32> = BTreeSet::new();
                for j in 0..graph.node_count() as u32 {
                    if !graph.has_edge(i, j) {
                        continue;
                    }
                    for k in 0..graph.node_count() as u32 {
                        if k == i || !graph.has_edge(j, k) || graph.has_edge(i, k) {
                            continue;
                        }
                        if labels[graph.node_id(j)] {
                            core_reach.insert(k);
                        } else {
                            peri_reach.insert(k);
                        }
                    }
                }
                let expect_core: Vec<u32> = core_reach.iter().copied().collect();
                let expect_peri: Vec<u32> = peri_reach.iter().copied().collect();
                assert_eq!(sets.core_reach[&sub.id], expect_core);
                assert_eq!(sets.peri_reach[&sub.id], expect_peri);
            }
            // And z equals the brute-force count per row.
            for row in &panel.rows {
                let sub = &panel.subscribers[row.subscriber as usize];
                let count = |reach: &Vec<u32>| {
                    reach
                        .iter()
                        .filter(|&&k| {
                            adoptions
                                .get(graph.node_id(k))
                                .is_some_and(|m| window().offset(*m) + 1 < row.t)
                        })
                        .count() as u32
                };
                assert_eq!(row.z_core, count(&sets.core_reach[&sub.id]));
                assert_eq!(row.z_peri, count(&sets.peri_reach[&sub.id]));
            }
        }
    }

    #[test]
    fn stratify_splits_exhaustively() {
        let f = fixture();
        let adoptions = adoptions_of(&[("a", 3), ("b", 5)]);
        let panel =
            build(&f.graph, &f.communities, &f.labels, &adoptions, &f.profiles, window()).unwrap();
        let (core, peri) = stratify(&panel);
        assert_eq!(core.subscribers.len(), 1);
        assert_eq!(peri.subscribers.len(), 3);
        assert_eq!(core.rows.len() + peri.rows.len(), panel.rows.len());
        assert!(core.rows.iter().all(|r| core.subscribers[r.subscriber as usize].is_core));
        // All-core input → empty periphery stratum.
        let all_core: BTreeMap<String, bool> =
            f.labels.keys().map(|k| (k.clone(), true)).collect();
        let panel2 =
            build(&f.graph, &f.communities, &all_core, &adoptions, &f.profiles, window()).unwrap();
        let (_, peri2) = stratify(&panel2);
        assert!(peri2.rows.is_empty());
    }

    #[test]
    fn row_count_identity_on_random_panels() {
        let mut rng = Rng::seed_from(1234);
        for _ in 0..20 {
            let f = fixture();
            let mut adoptions: BTreeMap<String, Month> = BTreeMap::new();
            for id in ["a", "b", "c", "d"] {
                if rng.chance(0.5) {
                    adoptions.insert(id.to_string(), Month(START.0 + rng.below(11)));
                }
            }
            let panel =
                build(&f.graph, &f.communities, &f.labels, &adoptions, &f.profiles, window())
                    .unwrap();
            let expect: u32 = panel
                .subscribers
                .iter()
                .map(|s| s.adoption_month.map_or(11, |m| window().offset(m) + 1))
                .sum();
            assert_eq!(panel.rows.len() as u32, expect);
        }
    }

    #[test]
    fn no_look_ahead_reconstruction() {
        // Recompute each lag from raw adoptions using only months < t.
        let mut rng = Rng::seed_from(777);
        let f = fixture();
        for trial in 0..20 {
            let mut adoptions: BTreeMap<String, Month> = BTreeMap::new();
            for id in ["a", "b", "c", "d"] {
                if rng.chance(0.6) {
                    adoptions.insert(id.to_string(), Month(START.0 + rng.below(11)));
                }
            }
            let panel =
                build(&f.graph, &f.communities, &f.labels, &adoptions, &f.profiles, window())
                    .unwrap();
            for row in &panel.rows {
                let sub = &panel.subscribers[row.subscriber as usize];
                let mut core = 0u32;
                let mut peri = 0u32;
                for &friend in f.graph.neighbors(sub.node) {
                    let fid = f.graph.node_id(friend);
                    if let Some(&m) = adoptions.get(fid) {
                        if m < row.month {
                            if f.labels[fid] {
                                core += 1;
                            } else {
                                peri += 1;
                            }
                        }
                    }
                }
                assert_eq!(row.core_frd_adopt_lag, core, "trial {trial}");
                assert_eq!(row.peri_frd_adopt_lag, peri, "trial {trial}");
            }
        }
    }

    #[test]
    fn design_matrix_reference_categories_and_multihot() {
        let f = fixture();
        let mut profiles = f.profiles.clone();
        profiles.get_mut("a").unwrap().region = "R2".into();
        profiles.get_mut("a").unwrap().gender = Gender::Unknown;
        // c shares region R2 so the region dummy is not a linear function of
        // the gender dummies.
        profiles.get_mut("c").unwrap().region = "R2".into();
        // Put subscriber a in two communities.
        let mut communities = f.communities.clone();
        let second: BTreeSet<String> = ["a", "b"].iter().map(|s| s.to_string()).collect();
        communities.communities.push(Community { ego: "b".into(), members: second });
        let adoptions = adoptions_of(&[("a", 5), ("c", 2), ("b", 9), ("d", 10)]);
        let panel =
            build(&f.graph, &communities, &f.labels, &adoptions, &profiles, window()).unwrap();
        // With only four subscribers, any subscriber-level covariate block
        // saturates the rank and the pruner would (correctly) start dropping
        // dummies; test the dummy machinery in isolation.
        let formula = FormulaSpec {
            peer_adoption: false,
            friend_counts: false,
            demographics: false,
            ..FormulaSpec::default()
        };
        let design = to_design_matrix(&panel, &formula).unwrap();

        // Two regions → one dummy (R1 is the reference).
        let names = design.col_names();
        assert!(names.iter().any(|n| n == "region=R2"));
        assert!(!names.iter().any(|n| n == "region=R1"));
        // Community 0 is the reference; community 1 has a dummy, and rows of
        // subscriber a (member of both) activate it.
        assert!(names.iter().any(|n| n == "community=c1"));
        assert!(!names.iter().any(|n| n == "community=c0"));
        let c1 = design.column(design.col_index("community=c1").unwrap());
        for (r, row) in panel.rows.iter().enumerate() {
            let id = &panel.subscribers[row.subscriber as usize].id;
            let expect = if id == "a" || id == "b" { 1.0 } else { 0.0 };
            assert_eq!(c1[r], expect, "{id}");
        }
        // Month reference is the window start; 2008-10 contains c's adoption
        // so its dummy survives the no-variation filter, while 2008-09 (no
        // adoptions) is dropped and logged.
        assert!(!names.iter().any(|n| n == "month=2008-08"));
        assert!(names.iter().any(|n| n == "month=2008-10"));
        assert!(design
            .pruned_log
            .iter()
            .any(|l| l.contains("month=2008-09") && l.contains("no response variation")));
    }

    #[test]
    fn degenerate_response_refused() {
        let f = fixture();
        let panel = build(
            &f.graph,
            &f.communities,
            &f.labels,
            &BTreeMap::new(),
            &f.profiles,
            window(),
        )
        .unwrap();
        assert!(matches!(
            to_design_matrix(&panel, &FormulaSpec::default()),
            Err(CoreError::DegenerateResponse)
        ));
    }

    #[test]
    fn missing_label_is_an_error() {
        let f = fixture();
        let mut labels = f.labels.clone();
        labels.remove("c");
        match build(&f.graph, &f.communities, &labels, &BTreeMap::new(), &f.profiles, window()) {
            Err(CoreError::MissingLabel(id)) => assert_eq!(id, "c"),
            other => panic!("expected MissingLabel, got {other:?}"),
        }
    }
}
