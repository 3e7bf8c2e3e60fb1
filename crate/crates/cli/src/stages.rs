//! Pipeline stages. Each stage reads its upstream artifacts from the output
//! directory, computes, writes its own artifacts plus a manifest, and is a
//! pure function of (inputs, config, seed); `pipeline` is literally the
//! sequential composition of the individual stages.

use std::collections::BTreeSet;
use std::io::BufReader;

use corepulse_core::cesna;
use corepulse_core::community::{self, Community, CommunitySet};
use corepulse_core::coreperi;
use corepulse_core::graph::{build_graph, degree_stats, ego_network, infer_home_regions, SocialGraph};
use corepulse_core::panel::{self, FormulaSpec, Panel};
use corepulse_core::probit::{probit_fit, FitResult};
use corepulse_core::report::{report_table, ReportCell};
use corepulse_core::rng::derive_seed;
use corepulse_core::synth;
use corepulse_core::twosri::{two_sri_fit, BootstrapOptions};
use corepulse_core::CoreError;

use crate::config::PipelineConfig;
use crate::figures;
use crate::formats::{self, write_file};
use crate::manifest::ManifestBuilder;
use crate::{CliError, Result};

fn out(cfg: &PipelineConfig, name: &str) -> std::path::PathBuf {
    cfg.out_dir.join(name)
}

// ---------------------------------------------------------------------------
// simulate

pub fn run_simulate(cfg: &PipelineConfig) -> Result<()> {
    let mut manifest = ManifestBuilder::new("simulate", cfg.seed, &cfg.config_hash, &cfg.out_dir);
    let pop = synth::generate(&cfg.gen)?;

    let cdr = formats::emit_cdr(&pop, &cfg.gen);
    let subscribers = formats::emit_subscribers(&pop.profiles);
    let adoptions = formats::emit_adoptions(&pop.truth.adoption_months);
    let truth = formats::emit_truth(&pop, &cfg.gen);

    write_file(&cfg.cdr_path, &cdr)?;
    write_file(&cfg.subscribers_path, &subscribers)?;
    write_file(&cfg.adoptions_path, &adoptions)?;
    let truth_path = out(cfg, "truth.json");
    write_file(&truth_path, &truth)?;

    manifest.output(&cfg.cdr_path);
    manifest.output(&cfg.subscribers_path);
    manifest.output(&cfg.adoptions_path);
    manifest.output(&truth_path);
    manifest.count("nodes", pop.graph.node_count());
    manifest.count("edges", pop.graph.edge_count());
    manifest.count("adopters", pop.truth.adoption_months.len());
    manifest.count("core_nodes", pop.truth.core_ids.len());
    manifest.write()
}

// ---------------------------------------------------------------------------
// graph

fn load_events(cfg: &PipelineConfig, manifest: &mut ManifestBuilder) -> Result<formats::CdrParse> {
    if !cfg.cdr_path.exists() {
        return Err(CliError::missing_input(&cfg.cdr_path));
    }
    let file = std::fs::File::open(&cfg.cdr_path).map_err(|e| CliError::io(&cfg.cdr_path, e))?;
    let parse = formats::parse_cdr(BufReader::new(file), &cfg.window, &cfg.cdr_path)?;
    // Hash the raw file for the manifest without holding two copies.
    let raw = std::fs::read(&cfg.cdr_path).map_err(|e| CliError::io(&cfg.cdr_path, e))?;
    manifest.input(&cfg.cdr_path, &raw);
    Ok(parse)
}

pub fn run_graph(cfg: &PipelineConfig) -> Result<()> {
    let mut manifest = ManifestBuilder::new("graph", cfg.seed, &cfg.config_hash, &cfg.out_dir);
    let parse = load_events(cfg, &mut manifest)?;
    let graph = build_graph(&parse.events, cfg.reciprocity);
    let stats = degree_stats(&graph)?;

    let dump_path = out(cfg, "graph.csv");
    write_file(&dump_path, &formats::emit_graph(&graph, &cfg.window))?;
    let hist_path = out(cfg, "degree_hist.csv");
    write_file(&hist_path, &formats::emit_degree_hist(&stats.histogram))?;

    let mut stats_obj = serde_json::Map::new();
    stats_obj.insert("mean".into(), stats.mean.into());
    stats_obj.insert("std".into(), stats.std.into());
    stats_obj.insert("median".into(), stats.median.into());
    stats_obj.insert("nodes".into(), graph.node_count().into());
    stats_obj.insert("edges".into(), graph.edge_count().into());
    let stats_path = out(cfg, "degree_stats.json");
    write_file(
        &stats_path,
        &serde_json::to_string_pretty(&serde_json::Value::Object(stats_obj)).unwrap(),
    )?;

    // Modal cell region per subscriber, where located events exist.
    let mut home = String::from("id,region\n");
    for (id, region) in infer_home_regions(&parse.events) {
        home.push_str(&format!("{id},{region}\n"));
    }
    let home_path = out(cfg, "home_regions.csv");
    write_file(&home_path, &home)?;

    manifest.output(&dump_path);
    manifest.output(&hist_path);
    manifest.output(&stats_path);
    manifest.output(&home_path);
    manifest.count("rows_total", parse.total_rows);
    manifest.count("rows_malformed", parse.skipped.malformed);
    manifest.count("rows_self_call", parse.skipped.self_call);
    manifest.count("rows_outside_window", parse.skipped.window);
    manifest.count("nodes", graph.node_count());
    manifest.count("edges", graph.edge_count());
    manifest.count("degree_mean", stats.mean);
    manifest.count("degree_median", stats.median);
    manifest.write()
}

// ---------------------------------------------------------------------------
// communities

struct LoadedGraph {
    graph: SocialGraph,
}

fn load_graph(cfg: &PipelineConfig, manifest: &mut ManifestBuilder) -> Result<LoadedGraph> {
    let path = out(cfg, "graph.csv");
    let content = formats::read_to_string(&path)?;
    manifest.input(&path, content.as_bytes());
    Ok(LoadedGraph { graph: formats::parse_graph(&content, &cfg.window, &path)? })
}

fn load_subscribers(
    cfg: &PipelineConfig,
    manifest: &mut ManifestBuilder,
) -> Result<std::collections::BTreeMap<String, corepulse_core::profile::SubscriberProfile>> {
    let content = formats::read_to_string(&cfg.subscribers_path)?;
    manifest.input(&cfg.subscribers_path, content.as_bytes());
    formats::parse_subscribers(&content, &cfg.subscribers_path)
}

fn load_adoptions(
    cfg: &PipelineConfig,
    manifest: &mut ManifestBuilder,
) -> Result<std::collections::BTreeMap<String, corepulse_core::graph::Month>> {
    let content = formats::read_to_string(&cfg.adoptions_path)?;
    manifest.input(&cfg.adoptions_path, content.as_bytes());
    formats::parse_adoptions(&content, &cfg.adoptions_path)
}

pub fn run_communities(cfg: &PipelineConfig) -> Result<()> {
    let mut manifest = ManifestBuilder::new("communities", cfg.seed, &cfg.config_hash, &cfg.out_dir);
    let loaded = load_graph(cfg, &mut manifest)?;
    let graph = &loaded.graph;
    let profiles = load_subscribers(cfg, &mut manifest)?;
    let adoptions = load_adoptions(cfg, &mut manifest)?;

    let adopters: BTreeSet<String> =
        adoptions.keys().filter(|id| graph.node_index(id).is_some()).cloned().collect();
    let egos: Vec<String> = adopters.iter().cloned().collect();

    enum EgoOutcome {
        Communities(Vec<Community>, usize),
        Skipped(String),
        Failed(String),
    }

    let results = crate::parallel::parallel_map(&egos, |ego_id| {
        let ego = match ego_network(graph, ego_id) {
            Ok(e) => e,
            Err(e) => return EgoOutcome::Failed(format!("{ego_id}: {e}")),
        };
        if ego.member_count() < 2 {
            return EgoOutcome::Skipped(format!("{ego_id}: isolated adopter"));
        }
        let member_ids: Vec<String> =
            ego.members.iter().map(|&u| graph.node_id(u).to_string()).collect();
        let (_, attrs) = match corepulse_core::attrs::binarize(&profiles, &member_ids) {
            Ok(x) => x,
            Err(e) => return EgoOutcome::Failed(format!("{ego_id}: {e}")),
        };
        let local = ego.to_local();
        let seed = derive_seed(cfg.seed, fnv_str(ego_id));
        let k = if local.n > cfg.max_cv_members || cfg.k_grid.len() == 1 {
            *cfg.k_grid.iter().max().unwrap()
        } else {
            match cesna::select_k(&local, &attrs, &cfg.k_grid, cfg.folds, seed, &cfg.cesna) {
                Ok((k, _)) => k,
                Err(CoreError::EgoTooSmall { .. }) => *cfg.k_grid.iter().min().unwrap(),
                Err(e) => return EgoOutcome::Failed(format!("{ego_id}: {e}")),
            }
        };
        let (model, _info) = match cesna::fit(&local, &attrs, k, derive_seed(seed, 1), &cfg.cesna) {
            Ok(x) => x,
            Err(e) => return EgoOutcome::Failed(format!("{ego_id}: {e}")),
        };
        match community::extract(&model, &member_ids, local.edges.len(), ego_id) {
            Ok(c) => EgoOutcome::Communities(c, k),
            Err(CoreError::NoBackgroundDensity) => {
                EgoOutcome::Skipped(format!("{ego_id}: ego-network has no edges"))
            }
            Err(e) => EgoOutcome::Failed(format!("{ego_id}: {e}")),
        }
    });

    let mut candidates = Vec::new();
    let mut skipped = 0u32;
    let mut k_sum = 0usize;
    let mut fitted = 0usize;
    for outcome in results {
        match outcome {
            EgoOutcome::Communities(mut c, k) => {
                candidates.append(&mut c);
                k_sum += k;
                fitted += 1;
            }
            EgoOutcome::Skipped(note) => {
                skipped += 1;
                manifest.note(note);
            }
            EgoOutcome::Failed(msg) => return Err(CliError::stage(msg)),
        }
    }

    let set = community::dedup_filter(candidates, &adopters);
    let universe: Vec<String> = graph.ids().to_vec();
    let (_counts, hist) = community::membership_counts(&set, &universe, &adopters);

    let communities_path = out(cfg, "communities.json");
    write_file(&communities_path, &formats::emit_communities(&set, &adopters))?;
    let hist_path = out(cfg, "membership_hist.csv");
    write_file(&hist_path, &formats::emit_membership_hist(&hist))?;

    manifest.output(&communities_path);
    manifest.output(&hist_path);
    manifest.count("egos_fitted", fitted);
    manifest.count("egos_skipped", skipped);
    manifest.count("communities_retained", set.communities.len());
    if fitted > 0 {
        manifest.count("mean_selected_k", k_sum as f64 / fitted as f64);
    }
    manifest.write()
}

fn fnv_str(s: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in s.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

// ---------------------------------------------------------------------------
// coreperi

fn load_communities(cfg: &PipelineConfig, manifest: &mut ManifestBuilder) -> Result<CommunitySet> {
    let path = out(cfg, "communities.json");
    let content = formats::read_to_string(&path)?;
    manifest.input(&path, content.as_bytes());
    formats::parse_communities(&content, &path)
}

pub fn run_coreperi(cfg: &PipelineConfig) -> Result<()> {
    let mut manifest = ManifestBuilder::new("coreperi", cfg.seed, &cfg.config_hash, &cfg.out_dir);
    let loaded = load_graph(cfg, &mut manifest)?;
    let graph = &loaded.graph;
    let set = load_communities(cfg, &mut manifest)?;
    let adoptions = load_adoptions(cfg, &mut manifest)?;
    let adopters: BTreeSet<String> = adoptions.keys().cloned().collect();

    let universe: Vec<String> = graph.ids().to_vec();
    let (counts, _) = community::membership_counts(&set, &universe, &adopters);
    let (labels, summary) = coreperi::classify(&counts, &adopters, cfg.core_threshold);
    let profile = coreperi::connectivity_profile(graph, &counts, &cfg.alpha_grid);

    let labels_path = out(cfg, "corelabels.csv");
    write_file(&labels_path, &formats::emit_corelabels(&labels))?;
    let calpha_path = out(cfg, "calpha.csv");
    write_file(&calpha_path, &formats::emit_calpha(&profile))?;

    for alpha in &profile.omitted {
        manifest.note(format!("alpha={alpha}: induced node set empty, row omitted"));
    }
    manifest.output(&labels_path);
    manifest.output(&calpha_path);
    manifest.count("n_core", summary.n_core);
    manifest.count("n_periphery", summary.n_peri);
    manifest.count("adopter_share_core", summary.adopter_share_core);
    manifest.count("adopter_share_periphery", summary.adopter_share_peri);
    manifest.write()
}

// ---------------------------------------------------------------------------
// panel

fn load_labels(
    cfg: &PipelineConfig,
    manifest: &mut ManifestBuilder,
) -> Result<Vec<corepulse_core::coreperi::CoreLabel>> {
    let path = out(cfg, "corelabels.csv");
    let content = formats::read_to_string(&path)?;
    manifest.input(&path, content.as_bytes());
    formats::parse_corelabels(&content, &path)
}

fn assemble_panel(cfg: &PipelineConfig, manifest: &mut ManifestBuilder) -> Result<(Panel, SocialGraph)> {
    let loaded = load_graph(cfg, manifest)?;
    let set = load_communities(cfg, manifest)?;
    let labels = load_labels(cfg, manifest)?;
    let adoptions = load_adoptions(cfg, manifest)?;
    let profiles = load_subscribers(cfg, manifest)?;

    let labels_map = panel::labels_map(&labels);
    let mut built =
        panel::build(&loaded.graph, &set, &labels_map, &adoptions, &profiles, cfg.window)?;
    panel::build_instruments(&mut built, &loaded.graph, &labels_map, &adoptions)?;
    Ok((built, loaded.graph))
}

pub fn run_panel(cfg: &PipelineConfig) -> Result<()> {
    let mut manifest = ManifestBuilder::new("panel", cfg.seed, &cfg.config_hash, &cfg.out_dir);
    let (built, _) = assemble_panel(cfg, &mut manifest)?;

    let panel_path = out(cfg, "panel.csv");
    write_file(&panel_path, &formats::emit_panel(&built))?;

    let (core, peri) = panel::stratify(&built);
    manifest.output(&panel_path);
    manifest.count("subscribers", built.subscribers.len());
    manifest.count("rows", built.rows.len());
    manifest.count("rows_core_stratum", core.rows.len());
    manifest.count("rows_periphery_stratum", peri.rows.len());
    manifest.write()
}

// ---------------------------------------------------------------------------
// estimate

fn fit_cell(
    cfg: &PipelineConfig,
    stratum: &Panel,
    stratum_name: &str,
    model: &str,
) -> std::result::Result<FitResult, String> {
    let formula = FormulaSpec { community_fe: cfg.community_fe, ..FormulaSpec::default() };
    let design = panel::to_design_matrix(stratum, &formula).map_err(|e| e.to_string())?;
    match model {
        "Probit" => probit_fit(&design, &cfg.probit).map_err(|e| e.to_string()),
        "2SRI" => {
            let (z_core, z_peri) = panel::instrument_columns(stratum);
            let instruments =
                vec![("z_core".to_string(), z_core), ("z_peri".to_string(), z_peri)];
            let endog: Vec<&str> = ["core_frd_adopt_lag", "peri_frd_adopt_lag"]
                .into_iter()
                .filter(|name| design.col_index(name).is_some())
                .collect();
            if endog.is_empty() {
                return Err(format!("{stratum_name}: no endogenous peer columns survived"));
            }
            let bootstrap = cfg.bootstrap.then(|| BootstrapOptions {
                replicates: cfg.bootstrap_reps,
                seed: derive_seed(cfg.seed, 0xb5),
            });
            two_sri_fit(&design, &endog, &instruments, &cfg.probit, bootstrap.as_ref())
                .map(|out| out.fit)
                .map_err(|e| e.to_string())
        }
        _ => unreachable!(),
    }
}

pub fn run_estimate(cfg: &PipelineConfig) -> Result<()> {
    let mut manifest = ManifestBuilder::new("estimate", cfg.seed, &cfg.config_hash, &cfg.out_dir);
    let (built, _) = assemble_panel(cfg, &mut manifest)?;
    let (core, peri) = panel::stratify(&built);

    let mut cells = Vec::new();
    let mut estimates = serde_json::Map::new();
    for (stratum, stratum_name) in [(&core, "Core"), (&peri, "Periphery")] {
        for model in ["Probit", "2SRI"] {
            let key = format!("{}_{}", stratum_name.to_lowercase(), model.to_lowercase());
            if stratum.rows.is_empty() {
                manifest.note(format!("{key}: empty stratum, cell skipped"));
                continue;
            }
            match fit_cell(cfg, stratum, stratum_name, model) {
                Ok(fit) => {
                    estimates.insert(key, formats::fit_to_json(&fit));
                    cells.push(ReportCell {
                        stratum: stratum_name.to_string(),
                        model: model.to_string(),
                        fit,
                    });
                }
                Err(msg) => manifest.note(format!("{key}: {msg}, cell skipped")),
            }
        }
    }
    if cells.is_empty() {
        return Err(CliError::stage("no estimable cells"));
    }

    let estimates_path = out(cfg, "estimates.json");
    write_file(
        &estimates_path,
        &serde_json::to_string_pretty(&serde_json::Value::Object(estimates)).unwrap(),
    )?;
    let table = report_table(&cells)?;
    let csv_path = out(cfg, "table3.csv");
    let txt_path = out(cfg, "table3.txt");
    write_file(&csv_path, &table.csv)?;
    write_file(&txt_path, &table.text)?;

    manifest.output(&estimates_path);
    manifest.output(&csv_path);
    manifest.output(&txt_path);
    manifest.count("cells", cells.len());
    manifest.write()
}

// ---------------------------------------------------------------------------
// report

pub fn run_report(cfg: &PipelineConfig) -> Result<()> {
    let mut manifest = ManifestBuilder::new("report", cfg.seed, &cfg.config_hash, &cfg.out_dir);

    // Figure 1 analogue: degree distribution.
    let hist_path = out(cfg, "degree_hist.csv");
    let content = formats::read_to_string(&hist_path)?;
    manifest.input(&hist_path, content.as_bytes());
    let mut hist = std::collections::BTreeMap::new();
    for line in content.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() == 2 {
            let d: u32 = f[0].parse().map_err(|_| CliError::format(&hist_path, "bad degree"))?;
            let c: u32 = f[1].parse().map_err(|_| CliError::format(&hist_path, "bad count"))?;
            hist.insert(d, c);
        }
    }
    let fig1_csv = out(cfg, "fig1_degree_hist.csv");
    write_file(&fig1_csv, &content)?;
    let fig1_svg = out(cfg, "fig1_degree_hist.svg");
    write_file(&fig1_svg, &figures::degree_distribution_svg(&hist))?;

    // Figure 2 analogue: membership histograms.
    let mh_path = out(cfg, "membership_hist.csv");
    let content = formats::read_to_string(&mh_path)?;
    manifest.input(&mh_path, content.as_bytes());
    let mut rows = std::collections::BTreeMap::new();
    for line in content.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() == 3 {
            let count: u32 = f[0].parse().map_err(|_| CliError::format(&mh_path, "bad count"))?;
            let all: u32 = f[1].parse().map_err(|_| CliError::format(&mh_path, "bad n_all"))?;
            let adopt: u32 = f[2].parse().map_err(|_| CliError::format(&mh_path, "bad n_adopters"))?;
            rows.insert(count, (all, adopt));
        }
    }
    let fig2_csv = out(cfg, "fig2_membership_hist.csv");
    write_file(&fig2_csv, &content)?;
    let fig2_svg = out(cfg, "fig2_membership_hist.svg");
    write_file(&fig2_svg, &figures::membership_histogram_svg(&rows))?;

    // Figure 3 analogue: C(alpha).
    let ca_path = out(cfg, "calpha.csv");
    let content = formats::read_to_string(&ca_path)?;
    manifest.input(&ca_path, content.as_bytes());
    let mut points = Vec::new();
    for line in content.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() == 3 {
            let alpha: u32 = f[0].parse().map_err(|_| CliError::format(&ca_path, "bad alpha"))?;
            let c: f64 = f[2].parse().map_err(|_| CliError::format(&ca_path, "bad c_alpha"))?;
            points.push((alpha, c));
        }
    }
    let fig3_csv = out(cfg, "fig3_calpha.csv");
    write_file(&fig3_csv, &content)?;
    let fig3_svg = out(cfg, "fig3_calpha.svg");
    write_file(&fig3_svg, &figures::calpha_svg(&points))?;

    // Regression table must exist (estimate stage artifact).
    let table_path = out(cfg, "table3.txt");
    let table = formats::read_to_string(&table_path)?;
    manifest.input(&table_path, table.as_bytes());

    for p in [&fig1_csv, &fig1_svg, &fig2_csv, &fig2_svg, &fig3_csv, &fig3_svg] {
        manifest.output(p);
    }
    manifest.write()
}

// ---------------------------------------------------------------------------
// pipeline

pub fn run_pipeline(cfg: &PipelineConfig) -> Result<()> {
    run_simulate(cfg)?;
    run_graph(cfg)?;
    run_communities(cfg)?;
    run_coreperi(cfg)?;
    run_panel(cfg)?;
    run_estimate(cfg)?;
    run_report(cfg)
}

/// Dispatch by subcommand name.
pub fn run_stage(name: &str, cfg: &PipelineConfig) -> Result<()> {
    match name {
        "simulate" => run_simulate(cfg),
        "graph" => run_graph(cfg),
        "communities" => run_communities(cfg),
        "coreperi" => run_coreperi(cfg),
        "panel" => run_panel(cfg),
        "estimate" => run_estimate(cfg),
        "report" => run_report(cfg),
        "pipeline" => run_pipeline(cfg),
        other => Err(CliError::config(format!("unknown stage `{other}`"))),
    }
}
