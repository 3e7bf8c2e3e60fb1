//! Wire formats.
//!
//! CSV formats (header, one record per line, no quoting — ids and region
//! codes are plain tokens):
//!   cdr.csv          caller_id,callee_id,timestamp,cell_region
//!   subscribers.csv  id,gender,wage,prepaid,phone_technology,mobile_internet,phone_age,tenure,region
//!   adoptions.csv    id,adoption_month            (YYYY-MM)
//!   graph.csv        u,v,month_bitmask            (bit i = window start + i)
//!   corelabels.csv   id,count,is_core
//!   calpha.csv       alpha,n_nodes,c_alpha
//!   membership_hist.csv  count,n_all,n_adopters
//!   panel.csv        see PANEL_HEADER
//!
//! JSON artifacts (communities.json, truth.json, estimates.json) serialize
//! through ordered maps so reruns are byte-identical.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use corepulse_core::community::{Community, CommunitySet, MembershipHistogram};
use corepulse_core::coreperi::{CAlphaPoint, ConnectivityProfile, CoreLabel};
use corepulse_core::graph::{CallEvent, Month, SocialGraph, Window};
use corepulse_core::panel::Panel;
use corepulse_core::probit::FitResult;
use corepulse_core::profile::{Gender, PhoneTech, SubscriberProfile, Wage};
use corepulse_core::synth::{GenConfig, SynthPopulation};

use crate::{CliError, Result};

// ---------------------------------------------------------------------------
// Timestamps

const DAYS_TO_MONTH: [u32; 12] = [0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334];

fn is_leap(year: i64) -> bool {
    (year % 4 == 0 && year % 100 != 0) || year % 400 == 0
}

/// Days since 1970-01-01 for a civil date (valid for years ≥ 1970 here).
fn days_from_civil(year: i64, month: u32, day: u32) -> i64 {
    let mut days: i64 = 0;
    for y in 1970..year {
        days += if is_leap(y) { 366 } else { 365 };
    }
    days += DAYS_TO_MONTH[(month - 1) as usize] as i64;
    if month > 2 && is_leap(year) {
        days += 1;
    }
    days + (day as i64 - 1)
}

/// Parse `YYYY-MM-DD[THH:MM[:SS][Z]]` into (month, epoch seconds).
pub fn parse_timestamp(s: &str) -> Option<(Month, i64)> {
    let bytes = s.as_bytes();
    if bytes.len() < 10 || bytes[4] != b'-' || bytes[7] != b'-' {
        return None;
    }
    let year: i64 = s.get(0..4)?.parse().ok()?;
    let month: u32 = s.get(5..7)?.parse().ok()?;
    let day: u32 = s.get(8..10)?.parse().ok()?;
    if !(1..=12).contains(&month) || !(1..=31).contains(&day) || year < 1970 {
        return None;
    }
    let mut secs = days_from_civil(year, month, day) * 86_400;
    if bytes.len() > 10 {
        if bytes[10] != b'T' && bytes[10] != b' ' {
            return None;
        }
        let time = s.get(11..)?.trim_end_matches('Z');
        let mut parts = time.split(':');
        let h: i64 = parts.next()?.parse().ok()?;
        let m: i64 = parts.next()?.parse().ok()?;
        let sec: i64 = match parts.next() {
            Some(x) => x.parse().ok()?,
            None => 0,
        };
        if !(0..24).contains(&h) || !(0..60).contains(&m) || !(0..60).contains(&sec) {
            return None;
        }
        secs += h * 3600 + m * 60 + sec;
    }
    Some((Month::from_ym(year as u32, month), secs))
}

// ---------------------------------------------------------------------------
// Small file helpers

pub fn read_to_string(path: &Path) -> Result<String> {
    if !path.exists() {
        return Err(CliError::missing_input(path));
    }
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(path, e))?;
    }
    let mut f = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(contents.as_bytes()).map_err(|e| CliError::io(path, e))
}

fn fields(line: &str) -> Vec<&str> {
    line.trim_end_matches(['\r', '\n']).split(',').collect()
}

// ---------------------------------------------------------------------------
// CDR

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct SkipCounts {
    pub malformed: u64,
    pub self_call: u64,
    pub window: u64,
}

#[derive(Debug)]
pub struct CdrParse {
    pub events: Vec<CallEvent>,
    pub skipped: SkipCounts,
    pub total_rows: u64,
}

pub const CDR_HEADER: &str = "caller_id,callee_id,timestamp,cell_region";

/// Parse a CDR stream: malformed rows are counted and skipped, self-calls
/// dropped, events outside the window dropped with reason "window", output
/// sorted by timestamp. An unreadable header or zero valid rows is an error.
pub fn parse_cdr(reader: impl BufRead, window: &Window, path: &Path) -> Result<CdrParse> {
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(Ok(h)) => h,
        _ => return Err(CliError::format(path, "missing header")),
    };
    if header.trim_end_matches(['\r', '\n']) != CDR_HEADER {
        return Err(CliError::format(path, format!("bad header, expected `{CDR_HEADER}`")));
    }

    let mut out = CdrParse { events: Vec::new(), skipped: SkipCounts::default(), total_rows: 0 };
    for line in lines {
        let line = line.map_err(|e| CliError::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        out.total_rows += 1;
        let f = fields(&line);
        if f.len() != 4 || f[0].is_empty() || f[1].is_empty() {
            out.skipped.malformed += 1;
            continue;
        }
        let Some((month, ts)) = parse_timestamp(f[2]) else {
            out.skipped.malformed += 1;
            continue;
        };
        if f[0] == f[1] {
            out.skipped.self_call += 1;
            continue;
        }
        if !window.contains(month) {
            out.skipped.window += 1;
            continue;
        }
        out.events.push(CallEvent {
            caller: f[0].to_string(),
            callee: f[1].to_string(),
            month,
            ts,
            cell_region: if f[3].is_empty() { None } else { Some(f[3].to_string()) },
        });
    }
    if out.events.is_empty() {
        return Err(CliError::format(path, "no valid call records"));
    }
    out.events.sort_by(|a, b| a.ts.cmp(&b.ts).then_with(|| a.caller.cmp(&b.caller)).then_with(|| a.callee.cmp(&b.callee)));
    Ok(out)
}

// ---------------------------------------------------------------------------
// Subscribers

pub const SUBSCRIBERS_HEADER: &str =
    "id,gender,wage,prepaid,phone_technology,mobile_internet,phone_age,tenure,region";

pub fn parse_subscribers(content: &str, path: &Path) -> Result<BTreeMap<String, SubscriberProfile>> {
    let mut lines = content.lines();
    match lines.next() {
        Some(h) if h == SUBSCRIBERS_HEADER => {}
        _ => return Err(CliError::format(path, format!("bad header, expected `{SUBSCRIBERS_HEADER}`"))),
    }
    let mut out = BTreeMap::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let f = fields(line);
        let bad = |what: &str| CliError::format(path, format!("row {}: bad {what}", i + 2));
        if f.len() != 9 {
            return Err(bad("field count"));
        }
        let profile = SubscriberProfile {
            id: f[0].to_string(),
            gender: Gender::parse(f[1]).ok_or_else(|| bad("gender"))?,
            wage: Wage::parse(f[2]).ok_or_else(|| bad("wage"))?,
            prepaid: parse_bool(f[3]).ok_or_else(|| bad("prepaid"))?,
            phone_tech: PhoneTech::parse(f[4]).ok_or_else(|| bad("phone_technology"))?,
            mobile_internet: parse_bool(f[5]).ok_or_else(|| bad("mobile_internet"))?,
            phone_age: f[6].parse().map_err(|_| bad("phone_age"))?,
            tenure: f[7].parse().map_err(|_| bad("tenure"))?,
            region: f[8].to_string(),
        };
        profile.validate().map_err(|m| CliError::format(path, format!("row {}: {m}", i + 2)))?;
        out.insert(profile.id.clone(), profile);
    }
    Ok(out)
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "1" | "true" => Some(true),
        "0" | "false" => Some(false),
        _ => None,
    }
}

pub fn emit_subscribers(profiles: &BTreeMap<String, SubscriberProfile>) -> String {
    let mut s = String::from(SUBSCRIBERS_HEADER);
    s.push('\n');
    for p in profiles.values() {
        s.push_str(&format!(
            "{},{},{},{},{},{},{:.4},{:.4},{}\n",
            p.id,
            p.gender.as_str(),
            p.wage.as_str(),
            p.prepaid as u8,
            p.phone_tech.as_str(),
            p.mobile_internet as u8,
            p.phone_age,
            p.tenure,
            p.region
        ));
    }
    s
}

// ---------------------------------------------------------------------------
// Adoptions

pub const ADOPTIONS_HEADER: &str = "id,adoption_month";

pub fn parse_adoptions(content: &str, path: &Path) -> Result<BTreeMap<String, Month>> {
    let mut lines = content.lines();
    match lines.next() {
        Some(h) if h == ADOPTIONS_HEADER => {}
        _ => return Err(CliError::format(path, format!("bad header, expected `{ADOPTIONS_HEADER}`"))),
    }
    let mut out = BTreeMap::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let f = fields(line);
        if f.len() != 2 {
            return Err(CliError::format(path, format!("row {}: bad field count", i + 2)));
        }
        let month = Month::parse(f[1])
            .ok_or_else(|| CliError::format(path, format!("row {}: bad month", i + 2)))?;
        out.insert(f[0].to_string(), month);
    }
    Ok(out)
}

pub fn emit_adoptions(adoptions: &BTreeMap<String, Month>) -> String {
    let mut s = String::from(ADOPTIONS_HEADER);
    s.push('\n');
    for (id, month) in adoptions {
        s.push_str(&format!("{id},{month}\n"));
    }
    s
}

// ---------------------------------------------------------------------------
// Synthetic population emission

/// One call in each direction for every edge and window month, timestamped
/// mid-month; the caller's cell region is their home region 70% of the time.
pub fn emit_cdr(pop: &SynthPopulation, cfg: &GenConfig) -> String {
    let mut rng = corepulse_core::rng::Rng::seed_from(corepulse_core::rng::derive_seed(cfg.seed, 0xcd7));
    let regions: Vec<String> = (0..cfg.n_regions).map(|r| format!("R{r:02}")).collect();
    let g = &pop.graph;
    let mut s = String::from(CDR_HEADER);
    s.push('\n');
    for month in cfg.window().months() {
        for &(u, v) in g.union_edges() {
            for (a, b) in [(u, v), (v, u)] {
                let caller = g.node_id(a);
                let home = &pop.profiles[caller].region;
                let cell = if rng.chance(0.7) {
                    home.clone()
                } else {
                    regions[rng.below(cfg.n_regions) as usize].clone()
                };
                s.push_str(&format!(
                    "{caller},{},{:04}-{:02}-15T12:00:00,{cell}\n",
                    g.node_id(b),
                    month.year(),
                    month.month()
                ));
            }
        }
    }
    s
}

pub fn emit_truth(pop: &SynthPopulation, cfg: &GenConfig) -> String {
    let t = &pop.truth;
    let mut root = serde_json::Map::new();
    root.insert("seed".into(), cfg.seed.into());
    root.insert("n_nodes".into(), cfg.n_nodes.into());
    root.insert("k_communities".into(), cfg.k_communities.into());
    root.insert("beta0".into(), t.beta0.into());
    root.insert("beta_core".into(), t.beta_core.into());
    root.insert("beta_peri".into(), t.beta_peri.into());
    root.insert("sigma_u".into(), t.sigma_u.into());
    root.insert(
        "core_ids".into(),
        t.core_ids.iter().cloned().collect::<Vec<String>>().into(),
    );
    root.insert(
        "communities".into(),
        serde_json::Value::Array(
            t.communities
                .iter()
                .map(|members| {
                    serde_json::Value::Array(members.iter().map(|m| m.clone().into()).collect())
                })
                .collect(),
        ),
    );
    root.insert(
        "membership_counts".into(),
        serde_json::Value::Object(
            t.counts.iter().map(|(id, &c)| (id.clone(), c.into())).collect(),
        ),
    );
    root.insert(
        "community_shocks".into(),
        serde_json::Value::Array(t.community_shocks.iter().map(|&x| x.into()).collect()),
    );
    root.insert(
        "adoption_months".into(),
        serde_json::Value::Object(
            t.adoption_months.iter().map(|(id, m)| (id.clone(), m.to_string().into())).collect(),
        ),
    );
    serde_json::to_string_pretty(&serde_json::Value::Object(root)).unwrap()
}

// ---------------------------------------------------------------------------
// Graph dump

pub const GRAPH_HEADER: &str = "u,v,month_bitmask";

pub fn emit_graph(graph: &SocialGraph, window: &Window) -> String {
    let mut s = String::from(GRAPH_HEADER);
    s.push('\n');
    for &(u, v) in graph.union_edges() {
        let mask = graph.month_bitmask((u, v), window);
        s.push_str(&format!("{},{},{mask}\n", graph.node_id(u), graph.node_id(v)));
    }
    s
}

pub fn parse_graph(content: &str, window: &Window, path: &Path) -> Result<SocialGraph> {
    let mut lines = content.lines();
    match lines.next() {
        Some(h) if h == GRAPH_HEADER => {}
        _ => return Err(CliError::format(path, format!("bad header, expected `{GRAPH_HEADER}`"))),
    }
    let mut node_ids = Vec::new();
    let mut monthly: BTreeMap<Month, Vec<(String, String)>> = BTreeMap::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let f = fields(line);
        if f.len() != 3 {
            return Err(CliError::format(path, format!("row {}: bad field count", i + 2)));
        }
        let mask: u64 = f[2]
            .parse()
            .map_err(|_| CliError::format(path, format!("row {}: bad bitmask", i + 2)))?;
        node_ids.push(f[0].to_string());
        node_ids.push(f[1].to_string());
        for off in 0..window.n_months() {
            if mask & (1 << off) != 0 {
                monthly
                    .entry(Month(window.start.0 + off))
                    .or_default()
                    .push((f[0].to_string(), f[1].to_string()));
            }
        }
    }
    Ok(SocialGraph::from_parts(node_ids, monthly))
}

// ---------------------------------------------------------------------------
// Degree statistics

pub fn emit_degree_hist(hist: &BTreeMap<u32, u32>) -> String {
    let mut s = String::from("degree,count\n");
    for (d, c) in hist {
        s.push_str(&format!("{d},{c}\n"));
    }
    s
}

// ---------------------------------------------------------------------------
// Communities

pub fn emit_communities(set: &CommunitySet, adopters: &std::collections::BTreeSet<String>) -> String {
    let array: Vec<serde_json::Value> = set
        .communities
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut obj = serde_json::Map::new();
            obj.insert("community_id".into(), format!("c{i}").into());
            obj.insert("ego_id".into(), c.ego.clone().into());
            obj.insert(
                "member_ids".into(),
                serde_json::Value::Array(c.members.iter().map(|m| m.clone().into()).collect()),
            );
            obj.insert("size".into(), c.members.len().into());
            obj.insert(
                "adopter_count".into(),
                c.members.iter().filter(|m| adopters.contains(*m)).count().into(),
            );
            serde_json::Value::Object(obj)
        })
        .collect();
    serde_json::to_string_pretty(&serde_json::Value::Array(array)).unwrap()
}

pub fn parse_communities(content: &str, path: &Path) -> Result<CommunitySet> {
    let value: serde_json::Value =
        serde_json::from_str(content).map_err(|e| CliError::format(path, e.to_string()))?;
    let array = value
        .as_array()
        .ok_or_else(|| CliError::format(path, "expected a JSON array"))?;
    let mut communities = Vec::with_capacity(array.len());
    for item in array {
        let ego = item["ego_id"]
            .as_str()
            .ok_or_else(|| CliError::format(path, "missing ego_id"))?;
        let members = item["member_ids"]
            .as_array()
            .ok_or_else(|| CliError::format(path, "missing member_ids"))?
            .iter()
            .map(|m| m.as_str().map(String::from))
            .collect::<Option<std::collections::BTreeSet<String>>>()
            .ok_or_else(|| CliError::format(path, "bad member id"))?;
        communities.push(Community { ego: ego.to_string(), members });
    }
    Ok(CommunitySet { communities })
}

pub fn emit_membership_hist(hist: &MembershipHistogram) -> String {
    let mut s = String::from("count,n_all,n_adopters\n");
    for (count, (all, adopters)) in &hist.rows {
        s.push_str(&format!("{count},{all},{adopters}\n"));
    }
    s
}

// ---------------------------------------------------------------------------
// Core/periphery

pub fn emit_corelabels(labels: &[CoreLabel]) -> String {
    let mut s = String::from("id,count,is_core\n");
    for l in labels {
        s.push_str(&format!("{},{},{}\n", l.id, l.count, l.is_core as u8));
    }
    s
}

pub fn parse_corelabels(content: &str, path: &Path) -> Result<Vec<CoreLabel>> {
    let mut lines = content.lines();
    match lines.next() {
        Some("id,count,is_core") => {}
        _ => return Err(CliError::format(path, "bad header, expected `id,count,is_core`")),
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let f = fields(line);
        if f.len() != 3 {
            return Err(CliError::format(path, format!("row {}: bad field count", i + 2)));
        }
        let count: u32 = f[1]
            .parse()
            .map_err(|_| CliError::format(path, format!("row {}: bad count", i + 2)))?;
        let is_core = f[2] == "1";
        out.push(CoreLabel { id: f[0].to_string(), count, is_core });
    }
    Ok(out)
}

pub fn emit_calpha(profile: &ConnectivityProfile) -> String {
    let mut s = String::from("alpha,n_nodes,c_alpha\n");
    for CAlphaPoint { alpha, n_nodes, c_alpha } in &profile.points {
        s.push_str(&format!("{alpha},{n_nodes},{c_alpha:.6}\n"));
    }
    s
}

// ---------------------------------------------------------------------------
// Panel

pub const PANEL_HEADER: &str = "subscriber_id,month,t,adopted,is_core,core_frd_adopt_lag,peri_frd_adopt_lag,core_frd,peri_frd,gender,prepaid,phone_technology,mobile_internet,phone_age,tenure_t,region,communities,z_core,z_peri";

pub fn emit_panel(panel: &Panel) -> String {
    let mut s = String::from(PANEL_HEADER);
    s.push('\n');
    for row in &panel.rows {
        let sub = &panel.subscribers[row.subscriber as usize];
        let communities: Vec<String> =
            sub.communities.iter().map(|c| format!("c{c}")).collect();
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{:.4},{:.4},{},{},{},{}\n",
            sub.id,
            row.month,
            row.t,
            row.adopted as u8,
            sub.is_core as u8,
            row.core_frd_adopt_lag,
            row.peri_frd_adopt_lag,
            sub.core_frd,
            sub.peri_frd,
            sub.profile.gender.as_str(),
            sub.profile.prepaid as u8,
            sub.profile.phone_tech.as_str(),
            sub.profile.mobile_internet as u8,
            sub.profile.phone_age,
            row.tenure_months,
            sub.profile.region,
            communities.join(";"),
            row.z_core,
            row.z_peri
        ));
    }
    s
}

// ---------------------------------------------------------------------------
// Estimates

pub fn fit_to_json(fit: &FitResult) -> serde_json::Value {
    let mut coef = serde_json::Map::new();
    for (i, name) in fit.names.iter().enumerate() {
        let mut entry = serde_json::Map::new();
        entry.insert("est".into(), fit.beta[i].into());
        entry.insert("se".into(), fit.se[i].into());
        entry.insert("p".into(), fit.p_value[i].into());
        coef.insert(name.clone(), serde_json::Value::Object(entry));
    }
    let mut obj = serde_json::Map::new();
    obj.insert("coef".into(), serde_json::Value::Object(coef));
    obj.insert("loglik".into(), fit.loglik.into());
    obj.insert("loglik_null".into(), fit.loglik_null.into());
    obj.insert("pseudo_r2".into(), fit.pseudo_r2.into());
    obj.insert("n".into(), fit.n_obs.into());
    obj.insert("converged".into(), fit.converged.into());
    obj.insert("iterations".into(), fit.iterations.into());
    obj.insert("se_method".into(), fit.se_method.clone().into());
    serde_json::Value::Object(obj)
}
