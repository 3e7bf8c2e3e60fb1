//! Pipeline configuration: one TOML file with a full default set; any CLI
//! flag overrides its config key.

use std::path::{Path, PathBuf};

use corepulse_core::cesna::CesnaHyper;
use corepulse_core::graph::{Month, ReciprocityRule, Window};
use corepulse_core::probit::ProbitOptions;
use corepulse_core::synth::{CovariateEffects, GenConfig};
use serde::Deserialize;

use crate::{CliError, Result};

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub seed: Option<u64>,
    pub out_dir: Option<String>,
    #[serde(default)]
    pub paths: RawPaths,
    #[serde(default)]
    pub window: RawWindow,
    #[serde(default)]
    pub graph: RawGraph,
    #[serde(default)]
    pub community: RawCommunity,
    #[serde(default)]
    pub coreperi: RawCorePeri,
    #[serde(default)]
    pub estimate: RawEstimate,
    #[serde(default)]
    pub synth: RawSynth,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RawPaths {
    pub cdr: Option<String>,
    pub subscribers: Option<String>,
    pub adoptions: Option<String>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RawWindow {
    pub start: Option<String>,
    pub end: Option<String>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RawGraph {
    pub reciprocity: Option<String>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RawCommunity {
    pub lambda: Option<f64>,
    pub rho: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<u32>,
    pub conductance_init: Option<bool>,
    pub k_grid: Option<Vec<usize>>,
    pub folds: Option<u32>,
    /// Egos larger than this are fitted with the largest grid K only
    /// (cross-validation on very large egos dominates runtime).
    pub max_cv_members: Option<usize>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RawCorePeri {
    pub core_threshold: Option<u32>,
    pub alpha_grid: Option<Vec<u32>>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RawEstimate {
    pub tol: Option<f64>,
    pub max_iter: Option<u32>,
    pub bootstrap: Option<bool>,
    pub bootstrap_reps: Option<u32>,
    pub community_fe: Option<bool>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RawSynth {
    pub n_nodes: Option<u32>,
    pub k_communities: Option<u32>,
    pub core_fraction: Option<f64>,
    pub core_extra_mean: Option<f64>,
    pub peri_second_prob: Option<f64>,
    pub strength: Option<[f64; 2]>,
    pub core_strength: Option<[f64; 2]>,
    pub size_skew: Option<f64>,
    pub beta0: Option<f64>,
    pub beta_core: Option<f64>,
    pub beta_peri: Option<f64>,
    pub sigma_u: Option<f64>,
    pub n_regions: Option<u32>,
    #[serde(default)]
    pub effects: RawEffects,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RawEffects {
    pub gender_male: Option<f64>,
    pub gender_female: Option<f64>,
    pub prepaid: Option<f64>,
    pub phone_25g: Option<f64>,
    pub phone_3g: Option<f64>,
    pub phone_35g: Option<f64>,
    pub phone_other: Option<f64>,
    pub mobile_internet: Option<f64>,
    pub phone_age: Option<f64>,
    pub tenure_month: Option<f64>,
}

/// Fully-resolved configuration used by the stages.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub cdr_path: PathBuf,
    pub subscribers_path: PathBuf,
    pub adoptions_path: PathBuf,
    pub window: Window,
    pub reciprocity: ReciprocityRule,
    pub cesna: CesnaHyper,
    pub k_grid: Vec<usize>,
    pub folds: u32,
    pub max_cv_members: usize,
    pub core_threshold: u32,
    pub alpha_grid: Vec<u32>,
    pub probit: ProbitOptions,
    pub bootstrap: bool,
    pub bootstrap_reps: u32,
    pub community_fe: bool,
    pub gen: GenConfig,
    /// FNV-1a hash of the raw config text and the effective seed.
    pub config_hash: String,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

pub fn hash_bytes(bytes: &[u8]) -> String {
    format!("{:016x}", fnv1a(bytes))
}

impl PipelineConfig {
    /// Load a TOML config file, then apply CLI overrides.
    pub fn load(path: &Path, seed_override: Option<u64>, out_override: Option<&Path>) -> Result<Self> {
        let text = crate::formats::read_to_string(path)?;
        let raw: RawConfig =
            toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        Self::resolve(&raw, &text, seed_override, out_override)
    }

    /// Built-in defaults (no config file).
    pub fn default_with(seed_override: Option<u64>, out_override: Option<&Path>) -> Result<Self> {
        Self::resolve(&RawConfig::default(), "", seed_override, out_override)
    }

    fn resolve(
        raw: &RawConfig,
        raw_text: &str,
        seed_override: Option<u64>,
        out_override: Option<&Path>,
    ) -> Result<Self> {
        let seed = seed_override.or(raw.seed).unwrap_or(42);
        let out_dir = out_override
            .map(Path::to_path_buf)
            .or_else(|| raw.out_dir.as_ref().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"));

        let parse_month = |s: &Option<String>, default: Month, what: &str| -> Result<Month> {
            match s {
                None => Ok(default),
                Some(text) => Month::parse(text)
                    .ok_or_else(|| CliError::config(format!("bad {what} month `{text}`"))),
            }
        };
        let start = parse_month(&raw.window.start, Month::from_ym(2008, 8), "window.start")?;
        let end = parse_month(&raw.window.end, Month::from_ym(2009, 6), "window.end")?;
        let window = Window::new(start, end).map_err(|e| CliError::config(e.to_string()))?;
        if window.n_months() > 64 {
            return Err(CliError::config("study window longer than 64 months"));
        }

        let reciprocity = match &raw.graph.reciprocity {
            None => ReciprocityRule::default(),
            Some(s) => ReciprocityRule::parse(s)
                .ok_or_else(|| CliError::config(format!("bad reciprocity rule `{s}`")))?,
        };

        let cesna = CesnaHyper {
            lambda: raw.community.lambda.unwrap_or(1.0),
            rho: raw.community.rho.unwrap_or(0.1),
            tol: raw.community.tol.unwrap_or(1e-4),
            max_iter: raw.community.max_iter.unwrap_or(500),
            conductance_init: raw.community.conductance_init.unwrap_or(false),
        };
        let k_grid = raw.community.k_grid.clone().unwrap_or_else(|| vec![1, 2, 3, 4]);
        if k_grid.is_empty() || k_grid.contains(&0) {
            return Err(CliError::config("community.k_grid must be non-empty positive integers"));
        }
        let folds = raw.community.folds.unwrap_or(3);

        let core_threshold = raw.coreperi.core_threshold.unwrap_or(5);
        if core_threshold < 1 {
            return Err(CliError::config("coreperi.core_threshold must be at least 1"));
        }
        let alpha_grid =
            raw.coreperi.alpha_grid.clone().unwrap_or_else(|| (1..=8).collect());

        let probit = ProbitOptions {
            tol: raw.estimate.tol.unwrap_or(1e-6),
            max_iter: raw.estimate.max_iter.unwrap_or(100),
        };

        let eff_default = CovariateEffects::default();
        let e = &raw.synth.effects;
        let effects = CovariateEffects {
            gender_male: e.gender_male.unwrap_or(eff_default.gender_male),
            gender_female: e.gender_female.unwrap_or(eff_default.gender_female),
            prepaid: e.prepaid.unwrap_or(eff_default.prepaid),
            phone_25g: e.phone_25g.unwrap_or(eff_default.phone_25g),
            phone_3g: e.phone_3g.unwrap_or(eff_default.phone_3g),
            phone_35g: e.phone_35g.unwrap_or(eff_default.phone_35g),
            phone_other: e.phone_other.unwrap_or(eff_default.phone_other),
            mobile_internet: e.mobile_internet.unwrap_or(eff_default.mobile_internet),
            phone_age: e.phone_age.unwrap_or(eff_default.phone_age),
            tenure_month: e.tenure_month.unwrap_or(eff_default.tenure_month),
        };
        let gen_default = GenConfig::default();
        let s = &raw.synth;
        let gen = GenConfig {
            n_nodes: s.n_nodes.unwrap_or(gen_default.n_nodes),
            k_communities: s.k_communities.unwrap_or(gen_default.k_communities),
            core_fraction: s.core_fraction.unwrap_or(gen_default.core_fraction),
            core_extra_mean: s.core_extra_mean.unwrap_or(gen_default.core_extra_mean),
            peri_second_prob: s.peri_second_prob.unwrap_or(gen_default.peri_second_prob),
            strength: s.strength.map(|[a, b]| (a, b)).unwrap_or(gen_default.strength),
            core_strength: s
                .core_strength
                .map(|[a, b]| (a, b))
                .unwrap_or(gen_default.core_strength),
            size_skew: s.size_skew.unwrap_or(gen_default.size_skew),
            months: window.n_months(),
            window_start: window.start,
            beta0: s.beta0.unwrap_or(gen_default.beta0),
            beta_core: s.beta_core.unwrap_or(gen_default.beta_core),
            beta_peri: s.beta_peri.unwrap_or(gen_default.beta_peri),
            effects,
            sigma_u: s.sigma_u.unwrap_or(gen_default.sigma_u),
            n_regions: s.n_regions.unwrap_or(gen_default.n_regions),
            seed,
        };
        gen.validate().map_err(|e| CliError::config(e.to_string()))?;

        let resolve_path = |p: &Option<String>, default: &str| -> PathBuf {
            p.as_ref().map(PathBuf::from).unwrap_or_else(|| out_dir.join(default))
        };
        let cdr_path = resolve_path(&raw.paths.cdr, "cdr.csv");
        let subscribers_path = resolve_path(&raw.paths.subscribers, "subscribers.csv");
        let adoptions_path = resolve_path(&raw.paths.adoptions, "adoptions.csv");

        // The output location is not semantic configuration; hashing only the
        // config text and seed keeps manifests identical across out dirs.
        let mut hash_input = raw_text.as_bytes().to_vec();
        hash_input.extend_from_slice(&seed.to_le_bytes());
        let config_hash = hash_bytes(&hash_input);

        Ok(PipelineConfig {
            seed,
            out_dir,
            cdr_path,
            subscribers_path,
            adoptions_path,
            window,
            reciprocity,
            cesna,
            k_grid,
            folds,
            max_cv_members: raw.community.max_cv_members.unwrap_or(120),
            core_threshold,
            alpha_grid,
            probit,
            bootstrap: raw.estimate.bootstrap.unwrap_or(false),
            bootstrap_reps: raw.estimate.bootstrap_reps.unwrap_or(200),
            community_fe: raw.estimate.community_fe.unwrap_or(false),
            gen,
            config_hash,
        })
    }
}
