//! Per-stage run manifests: inputs with content hashes, outputs, counts, the
//! config hash and seed, plus wall-clock timings. Everything except the
//! `timings_ms` block is a pure function of (inputs, config, seed).

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use crate::config::hash_bytes;
use crate::formats::write_file;
use crate::Result;

pub struct ManifestBuilder {
    stage: &'static str,
    seed: u64,
    config_hash: String,
    out_dir: std::path::PathBuf,
    started: Instant,
    inputs: BTreeMap<String, String>,
    outputs: Vec<String>,
    counts: BTreeMap<String, serde_json::Value>,
    notes: Vec<String>,
}

impl ManifestBuilder {
    pub fn new(stage: &'static str, seed: u64, config_hash: &str, out_dir: &Path) -> Self {
        ManifestBuilder {
            stage,
            seed,
            config_hash: config_hash.to_string(),
            out_dir: out_dir.to_path_buf(),
            started: Instant::now(),
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
            counts: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    // Paths inside the output directory are recorded relative to it, so
    // manifests are byte-stable across output locations.
    fn portable(&self, path: &Path) -> String {
        path.strip_prefix(&self.out_dir).unwrap_or(path).display().to_string()
    }

    pub fn input(&mut self, path: &Path, contents: &[u8]) {
        self.inputs.insert(self.portable(path), hash_bytes(contents));
    }

    pub fn output(&mut self, path: &Path) {
        let p = self.portable(path);
        self.outputs.push(p);
    }

    pub fn count(&mut self, key: &str, value: impl Into<serde_json::Value>) {
        self.counts.insert(key.to_string(), value.into());
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    /// Write `<stage>_manifest.json` into the output directory.
    pub fn write(self) -> Result<()> {
        let out_dir = self.out_dir.clone();
        let mut obj = serde_json::Map::new();
        obj.insert("stage".into(), self.stage.into());
        obj.insert("seed".into(), self.seed.into());
        obj.insert("config_hash".into(), self.config_hash.clone().into());
        obj.insert(
            "inputs".into(),
            serde_json::Value::Object(
                self.inputs.into_iter().map(|(k, v)| (k, v.into())).collect(),
            ),
        );
        obj.insert(
            "outputs".into(),
            serde_json::Value::Array(self.outputs.into_iter().map(Into::into).collect()),
        );
        obj.insert("counts".into(), serde_json::Value::Object(
            self.counts.into_iter().collect(),
        ));
        obj.insert(
            "notes".into(),
            serde_json::Value::Array(self.notes.into_iter().map(Into::into).collect()),
        );
        let mut timings = serde_json::Map::new();
        timings.insert("total_ms".into(), (self.started.elapsed().as_millis() as u64).into());
        obj.insert("timings_ms".into(), serde_json::Value::Object(timings));

        let path = out_dir.join(format!("{}_manifest.json", self.stage));
        write_file(&path, &serde_json::to_string_pretty(&serde_json::Value::Object(obj)).unwrap())
    }
}
