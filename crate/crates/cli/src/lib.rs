//! IO, file formats, configuration, and stage orchestration around
//! `corepulse-core`. Everything bit-producing is deterministic for a fixed
//! config and seed: ordered collections throughout, seeded parallelism with
//! results merged in task order, and manifests that only vary in timings.

pub mod config;
pub mod figures;
pub mod formats;
pub mod manifest;
pub mod parallel;
pub mod stages;

use std::fmt;

/// Stage-level error with a machine-readable code.
#[derive(Debug)]
pub struct CliError {
    pub code: &'static str,
    pub message: String,
    pub path: Option<String>,
}

impl CliError {
    pub fn missing_input(path: &std::path::Path) -> Self {
        CliError {
            code: "missing_input",
            message: format!("input file not found: {}", path.display()),
            path: Some(path.display().to_string()),
        }
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        CliError {
            code: "io",
            message: format!("{}: {err}", path.display()),
            path: Some(path.display().to_string()),
        }
    }

    pub fn format(path: &std::path::Path, message: impl Into<String>) -> Self {
        CliError {
            code: "bad_format",
            message: format!("{}: {}", path.display(), message.into()),
            path: Some(path.display().to_string()),
        }
    }

    pub fn stage(message: impl Into<String>) -> Self {
        CliError { code: "stage_failed", message: message.into(), path: None }
    }

    pub fn config(message: impl Into<String>) -> Self {
        CliError { code: "bad_config", message: message.into(), path: None }
    }

    /// Exit status for this error: 2 for missing inputs, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        if self.code == "missing_input" {
            2
        } else {
            1
        }
    }

    /// Machine-readable form emitted on standard error.
    pub fn to_json(&self) -> String {
        let mut obj = serde_json::Map::new();
        let mut inner = serde_json::Map::new();
        inner.insert("code".into(), self.code.into());
        inner.insert("message".into(), self.message.clone().into());
        if let Some(p) = &self.path {
            inner.insert("path".into(), p.clone().into());
        }
        obj.insert("error".into(), serde_json::Value::Object(inner));
        serde_json::Value::Object(obj).to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl From<corepulse_core::CoreError> for CliError {
    fn from(e: corepulse_core::CoreError) -> Self {
        CliError::stage(e.to_string())
    }
}

impl std::error::Error for CliError {}

pub type Result<T> = std::result::Result<T, CliError>;
