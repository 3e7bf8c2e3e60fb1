//! Synthetic population generator with planted ground truth.
//!
//! Edges are sampled from the same affiliation family the detector fits:
//! planted nonnegative strengths F give p(u,v) = 1 − exp(−F_u·F_v), so nodes
//! connect only through shared communities and multi-membership core nodes
//! stitch the communities into one dominant component. Attributes come from a
//! logistic channel on F (softmax across one-hot blocks, sigmoid for binary
//! fields). Adoption follows the discrete-time Probit hazard
//!
//!   adopt at t  ⇔  β₀ + β_core·CoreLag + β_peri·PeriLag + γ·x + u_c + ε > 0
//!
//! with u a community-level taste shock (the planted confounder) summed over
//! the node's memberships, and adoption absorbing.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::community::{Community, CommunitySet};
use crate::graph::{LocalGraph, Month, SocialGraph, Window};
use crate::mathx;
use crate::profile::{Gender, PhoneTech, SubscriberProfile, Wage};
use crate::rng::{derive_seed, Rng};
use crate::{CoreError, Result};

/// Static covariate effects γ in the adoption index (Probit scale).
#[derive(Debug, Clone, PartialEq)]
pub struct CovariateEffects {
    pub gender_male: f64,
    pub gender_female: f64,
    pub prepaid: f64,
    pub phone_25g: f64,
    pub phone_3g: f64,
    pub phone_35g: f64,
    pub phone_other: f64,
    pub mobile_internet: f64,
    pub phone_age: f64,
    pub tenure_month: f64,
}

impl Default for CovariateEffects {
    fn default() -> Self {
        CovariateEffects {
            gender_male: 0.25,
            gender_female: -0.10,
            prepaid: -0.20,
            phone_25g: 0.30,
            phone_3g: 0.40,
            phone_35g: 0.60,
            phone_other: 0.45,
            mobile_internet: 2.40,
            phone_age: -0.15,
            tenure_month: 0.006,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub n_nodes: u32,
    pub k_communities: u32,
    /// Fraction of nodes planted as core.
    pub core_fraction: f64,
    /// Core memberships: 5 + Poisson(this mean), capped at K.
    pub core_extra_mean: f64,
    /// Periphery second membership probability: 1 + Bernoulli(this).
    pub peri_second_prob: f64,
    /// Planted affiliation strength range for peripheral nodes (uniform).
    /// Tight peripheral circles keep co-members mostly adjacent.
    pub strength: (f64, f64),
    /// Strength range for core nodes, typically weaker: cores spread many
    /// shallow ties instead of a few tight ones.
    pub core_strength: (f64, f64),
    /// Community popularity follows (rank+1)^(-skew): positive values give
    /// the heavy-tailed size mix behind the skewed degree distribution.
    pub size_skew: f64,
    pub months: u32,
    pub window_start: Month,
    pub beta0: f64,
    pub beta_core: f64,
    pub beta_peri: f64,
    pub effects: CovariateEffects,
    /// Community taste-shock scale (the homophily confounder knob).
    pub sigma_u: f64,
    pub n_regions: u32,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            n_nodes: 2000,
            k_communities: 155,
            core_fraction: 0.02,
            core_extra_mean: 2.0,
            peri_second_prob: 0.3,
            strength: (1.1, 1.3),
            core_strength: (0.40, 0.50),
            size_skew: 0.4,
            months: 11,
            window_start: Month::from_ym(2008, 8),
            beta0: -4.4,
            beta_core: 0.70,
            beta_peri: 0.14,
            effects: CovariateEffects::default(),
            sigma_u: 0.3,
            n_regions: 8,
            seed: 42,
        }
    }
}

impl GenConfig {
    pub fn window(&self) -> Window {
        Window { start: self.window_start, end: Month(self.window_start.0 + self.months - 1) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_nodes < 10 {
            return Err(CoreError::InvalidConfig("need at least 10 nodes".into()));
        }
        if self.k_communities < 5 && self.core_fraction > 0.0 {
            return Err(CoreError::InvalidConfig(
                "core nodes need at least 5 communities to join".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.core_fraction)
            || !(0.0..=1.0).contains(&self.peri_second_prob)
        {
            return Err(CoreError::InvalidConfig("fractions must lie in [0,1]".into()));
        }
        if self.months < 2 {
            return Err(CoreError::InvalidConfig("need at least 2 months".into()));
        }
        if self.sigma_u < 0.0 {
            return Err(CoreError::InvalidConfig("sigma_u must be nonnegative".into()));
        }
        if self.strength.0 <= 0.0 || self.strength.1 < self.strength.0 {
            return Err(CoreError::InvalidConfig("bad strength range".into()));
        }
        if self.core_strength.0 <= 0.0 || self.core_strength.1 < self.core_strength.0 {
            return Err(CoreError::InvalidConfig("bad core strength range".into()));
        }
        if self.n_regions == 0 {
            return Err(CoreError::InvalidConfig("need at least one region".into()));
        }
        if self.size_skew < 0.0 {
            return Err(CoreError::InvalidConfig("size_skew must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Everything the generator knows that an analyst would not.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    /// Planted membership lists (community index → member ids).
    pub communities: Vec<Vec<String>>,
    /// Per node: planted (community, strength) pairs, primary first.
    pub memberships: BTreeMap<String, Vec<(u32, f64)>>,
    pub counts: BTreeMap<String, u32>,
    pub core_ids: BTreeSet<String>,
    /// Community taste shocks u_c actually drawn.
    pub community_shocks: Vec<f64>,
    pub beta0: f64,
    pub beta_core: f64,
    pub beta_peri: f64,
    pub sigma_u: f64,
    pub adoption_months: BTreeMap<String, Month>,
}

impl GroundTruth {
    /// Planted communities in the shape the panel builder consumes.
    pub fn community_set(&self) -> CommunitySet {
        let communities = self
            .communities
            .iter()
            .enumerate()
            .map(|(c, members)| Community {
                ego: alloc::format!("planted:c{c}"),
                members: members.iter().cloned().collect(),
            })
            .collect();
        CommunitySet { communities }
    }

    /// True core labels keyed by id.
    pub fn labels(&self) -> BTreeMap<String, bool> {
        self.counts.keys().map(|id| (id.clone(), self.core_ids.contains(id))).collect()
    }
}

#[derive(Debug, Clone)]
pub struct SynthPopulation {
    pub graph: SocialGraph,
    pub profiles: BTreeMap<String, SubscriberProfile>,
    pub truth: GroundTruth,
}

fn node_id(i: u32) -> String {
    alloc::format!("S{i:05}")
}

/// Logistic attribute channel: block weights are deterministic functions of
/// the community index so tests can recompute every probability.
pub struct AttributeChannel {
    pub n_regions: u32,
}

impl AttributeChannel {
    /// Community c's home region.
    pub fn region_of(&self, c: u32) -> u32 {
        c % self.n_regions
    }

    /// Softmax region probabilities for a node with the given memberships.
    pub fn region_probs(&self, memberships: &[(u32, f64)]) -> Vec<f64> {
        let mut logits = vec![0.0f64; self.n_regions as usize];
        for &(c, strength) in memberships {
            logits[self.region_of(c) as usize] += 4.0 * strength;
        }
        softmax(&logits)
    }

    pub fn gender_probs(&self, memberships: &[(u32, f64)]) -> Vec<f64> {
        // Baselines close to the population rates; communities tilt toward
        // one gender.
        let mut logits = vec![mathx::ln(0.23), mathx::ln(0.16), mathx::ln(0.61)];
        for &(c, strength) in memberships {
            logits[(c % 3) as usize] += 0.5 * strength;
        }
        softmax(&logits)
    }

    pub fn wage_probs(&self, memberships: &[(u32, f64)]) -> Vec<f64> {
        let mut logits = vec![mathx::ln(0.15), mathx::ln(0.25), mathx::ln(0.33), mathx::ln(0.19), mathx::ln(0.08)];
        for &(c, strength) in memberships {
            logits[(c % 5) as usize] += 0.6 * strength;
        }
        softmax(&logits)
    }

    pub fn phone_tech_probs(&self, memberships: &[(u32, f64)]) -> Vec<f64> {
        let mut logits = vec![
            mathx::ln(0.122),
            mathx::ln(0.479),
            mathx::ln(0.355),
            mathx::ln(0.039),
            mathx::ln(0.005),
        ];
        for &(c, strength) in memberships {
            logits[((c / 3) % 5) as usize] += 0.4 * strength;
        }
        softmax(&logits)
    }

    pub fn prepaid_prob(&self, memberships: &[(u32, f64)]) -> f64 {
        let mut z = logit(0.47);
        for &(c, strength) in memberships {
            z += if c % 2 == 0 { 0.5 } else { -0.5 } * strength;
        }
        mathx::sigmoid(z)
    }

    /// Memberships beyond the second raise the odds, so deeply embedded
    /// (core) nodes are markedly more likely to carry mobile broadband while
    /// ordinary subscribers sit at the base rate.
    pub fn mobile_internet_prob(&self, memberships: &[(u32, f64)]) -> f64 {
        let mut z = logit(0.05);
        for &(_, strength) in memberships.iter().skip(2) {
            z += 1.6 * strength;
        }
        mathx::sigmoid(z)
    }
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| mathx::exp(z - max)).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn logit(p: f64) -> f64 {
    mathx::ln(p / (1.0 - p))
}

fn sample_categorical(rng: &mut Rng, probs: &[f64]) -> usize {
    let u = rng.f64();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Plant the population: memberships, graph, profiles. Adoption is simulated
/// separately so experiments can re-run the hazard with different β.
pub fn generate_network(cfg: &GenConfig) -> Result<SynthPopulation> {
    cfg.validate()?;
    let n = cfg.n_nodes;
    let k = cfg.k_communities;
    let mut rng = Rng::seed_from(derive_seed(cfg.seed, 0x9e7));

    // Core set: first positions of a seeded permutation.
    let n_core = (n as f64 * cfg.core_fraction) as u32;
    let core_nodes: BTreeSet<u32> = rng.sample_indices(n, n_core).into_iter().collect();

    // Community popularity weights (heavy-tailed sizes when size_skew > 0).
    let cum_weights: Vec<f64> = {
        let mut acc = 0.0;
        (0..k)
            .map(|c| {
                acc += libm_pow_neg(c, cfg.size_skew);
                acc
            })
            .collect()
    };
    let pick_communities = |rng: &mut Rng, m: u32| -> Vec<u32> {
        let total = *cum_weights.last().unwrap();
        let mut chosen: Vec<u32> = Vec::with_capacity(m as usize);
        while chosen.len() < m as usize {
            let u = rng.f64() * total;
            let c = cum_weights.partition_point(|&w| w <= u).min(k as usize - 1) as u32;
            if !chosen.contains(&c) {
                chosen.push(c);
            }
        }
        chosen
    };

    // Planted memberships with strengths; primary community first.
    let mut memberships: Vec<Vec<(u32, f64)>> = Vec::with_capacity(n as usize);
    let mut community_members: Vec<Vec<u32>> = vec![Vec::new(); k as usize];
    for u in 0..n {
        let m = if core_nodes.contains(&u) {
            (5 + rng.poisson(cfg.core_extra_mean)).min(k)
        } else {
            1 + rng.chance(cfg.peri_second_prob) as u32
        };
        let range = if core_nodes.contains(&u) { cfg.core_strength } else { cfg.strength };
        let mut mine = Vec::with_capacity(m as usize);
        for c in pick_communities(&mut rng, m) {
            let strength = rng.range(range.0, range.1);
            mine.push((c, strength));
            community_members[c as usize].push(u);
        }
        memberships.push(mine);
    }

    // Edges: only pairs sharing a community can connect; accumulate the full
    // dot product across shared communities before one Bernoulli draw.
    let mut pair_dot: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    for (c, members) in community_members.iter().enumerate() {
        for (ai, &a) in members.iter().enumerate() {
            let fa = strength_of(&memberships[a as usize], c as u32);
            for &b in &members[ai + 1..] {
                let fb = strength_of(&memberships[b as usize], c as u32);
                let key = if a < b { (a, b) } else { (b, a) };
                *pair_dot.entry(key).or_insert(0.0) += fa * fb;
            }
        }
    }
    let window = cfg.window();
    let mut edges: Vec<(String, String)> = Vec::new();
    for (&(a, b), &s) in &pair_dot {
        let p = -mathx::expm1(-s);
        if rng.chance(p) {
            edges.push((node_id(a), node_id(b)));
        }
    }
    if edges.is_empty() {
        return Err(CoreError::InvalidConfig(
            "planted configuration produced an empty graph".into(),
        ));
    }

    // Every edge is present in every window month, so reconstruction from the
    // emitted call records is exact.
    let monthly: BTreeMap<Month, Vec<(String, String)>> =
        window.months().map(|m| (m, edges.clone())).collect();
    let node_ids: Vec<String> = (0..n).map(node_id).collect();
    let graph = SocialGraph::from_parts(node_ids.clone(), monthly);

    // Profiles from the logistic attribute channel.
    let channel = AttributeChannel { n_regions: cfg.n_regions };
    let mut profiles = BTreeMap::new();
    for u in 0..n {
        let id = node_id(u);
        let mine = &memberships[u as usize];
        let gender = Gender::ALL[sample_categorical(&mut rng, &channel.gender_probs(mine))];
        let wage = Wage::ALL[sample_categorical(&mut rng, &channel.wage_probs(mine))];
        let phone_tech =
            PhoneTech::ALL[sample_categorical(&mut rng, &channel.phone_tech_probs(mine))];
        let region = alloc::format!(
            "R{:02}",
            sample_categorical(&mut rng, &channel.region_probs(mine))
        );
        let prepaid = rng.chance(channel.prepaid_prob(mine));
        let mobile_internet = rng.chance(channel.mobile_internet_prob(mine));
        let phone_age = rng.range(0.1, 3.0);
        let tenure = rng.range(0.25, 10.0);
        profiles.insert(
            id.clone(),
            SubscriberProfile {
                id,
                gender,
                wage,
                prepaid,
                phone_tech,
                mobile_internet,
                phone_age,
                tenure,
                region,
            },
        );
    }

    let counts: BTreeMap<String, u32> = (0..n)
        .map(|u| (node_id(u), memberships[u as usize].len() as u32))
        .collect();
    let truth = GroundTruth {
        communities: community_members
            .iter()
            .map(|members| members.iter().map(|&u| node_id(u)).collect())
            .collect(),
        memberships: (0..n).map(|u| (node_id(u), memberships[u as usize].clone())).collect(),
        counts,
        core_ids: core_nodes.iter().map(|&u| node_id(u)).collect(),
        community_shocks: Vec::new(),
        beta0: cfg.beta0,
        beta_core: cfg.beta_core,
        beta_peri: cfg.beta_peri,
        sigma_u: cfg.sigma_u,
        adoption_months: BTreeMap::new(),
    };

    Ok(SynthPopulation { graph, profiles, truth })
}

fn strength_of(memberships: &[(u32, f64)], c: u32) -> f64 {
    memberships.iter().find(|&&(cc, _)| cc == c).map_or(0.0, |&(_, s)| s)
}

#[inline]
fn libm_pow_neg(rank: u32, skew: f64) -> f64 {
    if skew == 0.0 {
        1.0
    } else {
        libm::pow((rank + 1) as f64, -skew)
    }
}

/// Static part of a node's adoption index: γ·x + u_{c(i)}.
fn static_index(cfg: &GenConfig, profile: &SubscriberProfile, shock: f64) -> f64 {
    let e = &cfg.effects;
    let mut z = shock;
    z += match profile.gender {
        Gender::Male => e.gender_male,
        Gender::Female => e.gender_female,
        Gender::Unknown => 0.0,
    };
    if profile.prepaid {
        z += e.prepaid;
    }
    z += match profile.phone_tech {
        PhoneTech::G2 => 0.0,
        PhoneTech::G25 => e.phone_25g,
        PhoneTech::G3 => e.phone_3g,
        PhoneTech::G35 => e.phone_35g,
        PhoneTech::Other => e.phone_other,
    };
    if profile.mobile_internet {
        z += e.mobile_internet;
    }
    z += e.phone_age * profile.phone_age;
    z
}

/// Run the absorbing monthly hazard; fills and returns the adoption months.
pub fn simulate_adoption(pop: &mut SynthPopulation, cfg: &GenConfig) -> BTreeMap<String, Month> {
    let n = pop.graph.node_count() as u32;
    let window = cfg.window();
    let mut rng = Rng::seed_from(derive_seed(cfg.seed, 0xada));

    // Community taste shocks.
    let shocks: Vec<f64> =
        (0..cfg.k_communities).map(|_| rng.normal() * cfg.sigma_u).collect();

    // Per-node static pieces. A node's taste shock is the sum of its
    // communities' shocks, so multi-hot community dummies absorb it exactly.
    let ids: Vec<String> = (0..n).map(node_id).collect();
    let mut statics = vec![0.0f64; n as usize];
    let mut is_core = vec![false; n as usize];
    let mut tenure_months0 = vec![0.0f64; n as usize];
    for u in 0..n as usize {
        let id = &ids[u];
        let shock: f64 =
            pop.truth.memberships[id].iter().map(|&(c, _)| shocks[c as usize]).sum();
        statics[u] = static_index(cfg, &pop.profiles[id], shock);
        is_core[u] = pop.truth.core_ids.contains(id);
        tenure_months0[u] = pop.profiles[id].tenure * 12.0;
    }

    let mut adopted_at: Vec<Option<Month>> = vec![None; n as usize];
    let mut core_lag = vec![0u32; n as usize];
    let mut peri_lag = vec![0u32; n as usize];
    for (t_off, month) in window.months().enumerate() {
        let mut new_adopters: Vec<u32> = Vec::new();
        for u in 0..n {
            if adopted_at[u as usize].is_some() {
                continue;
            }
            let idx = u as usize;
            let index = cfg.beta0
                + cfg.beta_core * core_lag[idx] as f64
                + cfg.beta_peri * peri_lag[idx] as f64
                + cfg.effects.tenure_month * (tenure_months0[idx] + t_off as f64)
                + statics[idx]
                + rng.normal();
            if index > 0.0 {
                adopted_at[idx] = Some(month);
                new_adopters.push(u);
            }
        }
        // Adoptions become visible to friends from the next month on.
        for &u in &new_adopters {
            for &v in pop.graph.neighbors(u) {
                if is_core[u as usize] {
                    core_lag[v as usize] += 1;
                } else {
                    peri_lag[v as usize] += 1;
                }
            }
        }
    }

    let months: BTreeMap<String, Month> = adopted_at
        .iter()
        .enumerate()
        .filter_map(|(u, m)| m.map(|month| (node_id(u as u32), month)))
        .collect();
    pop.truth.community_shocks = shocks;
    pop.truth.adoption_months = months.clone();
    months
}

/// Network plus adoption in one call.
pub fn generate(cfg: &GenConfig) -> Result<SynthPopulation> {
    let mut pop = generate_network(cfg)?;
    simulate_adoption(&mut pop, cfg);
    Ok(pop)
}

/// Small planted affiliation graph sampled from the detector's own model
/// family, for recovery experiments: `k` equal communities, optional second
/// memberships, two informative attributes per community.
pub struct PlantedAffiliation {
    pub graph: LocalGraph,
    pub attrs: Vec<Vec<u8>>,
    pub communities: Vec<BTreeSet<usize>>,
}

pub fn sample_affiliation_graph(
    n: usize,
    k: usize,
    overlap_prob: f64,
    strength: (f64, f64),
    seed: u64,
) -> PlantedAffiliation {
    let mut rng = Rng::seed_from(seed);
    let mut f = vec![0.0; n * k];
    let mut communities = vec![BTreeSet::new(); k];
    for u in 0..n {
        let primary = u % k;
        f[u * k + primary] = rng.range(strength.0, strength.1);
        communities[primary].insert(u);
        if rng.chance(overlap_prob) {
            let other = (primary + 1 + rng.below((k - 1) as u32) as usize) % k;
            f[u * k + other] = rng.range(strength.0, strength.1);
            communities[other].insert(u);
        }
    }
    let mut adj = vec![Vec::new(); n];
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let mut s = 0.0;
            for c in 0..k {
                s += f[u * k + c] * f[v * k + c];
            }
            if s > 0.0 && rng.chance(-mathx::expm1(-s)) {
                adj[u].push(v as u32);
                adj[v].push(u as u32);
                edges.push((u as u32, v as u32));
            }
        }
    }
    // Two informative binary attributes per community.
    let mut attrs = vec![vec![0u8; 2 * k]; n];
    for (u, row) in attrs.iter_mut().enumerate() {
        for c in 0..k {
            let member = communities[c].contains(&u);
            for a in 0..2 {
                let p = if member { 0.85 } else { 0.15 };
                row[c * 2 + a] = rng.chance(p) as u8;
            }
        }
    }
    PlantedAffiliation { graph: LocalGraph { n, adj, edges }, attrs, communities }
}
