//! Run configuration, read from TOML.
//!
//! ```toml
//! suite = "suite.json"
//! output_dir = "out"            # falls back to $VBENCH2_OUTPUT_DIR
//! parallelism = 4
//! seed = 0
//! samples_per_prompt = 1
//!
//! [[models]]
//! id = "alpha"
//! video_root = "videos/alpha"
//!
//! [backend]
//! adapter = "mock"
//! mock_script = "mock.json"
//!
//! [constants.geometry]
//! tau_move = 0.02
//! ```
//!
//! Relative paths resolve against the directory holding the config file.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use vbench2_core::Constants;

use crate::error::{invalid, CliError};

pub const OUTPUT_DIR_ENV: &str = "VBENCH2_OUTPUT_DIR";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    suite: PathBuf,
    #[serde(default)]
    models: Vec<RawModel>,
    #[serde(default)]
    backend: Option<RawBackend>,
    #[serde(default)]
    constants: Option<toml::Value>,
    #[serde(default)]
    output_dir: Option<PathBuf>,
    #[serde(default = "one")]
    parallelism: usize,
    #[serde(default)]
    seed: u64,
    #[serde(default = "one")]
    samples_per_prompt: usize,
    #[serde(default)]
    annotations: Option<PathBuf>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    id: String,
    video_root: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBackend {
    adapter: String,
    #[serde(default)]
    mock_script: Option<PathBuf>,
    #[serde(default)]
    strict: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub id: String,
    pub video_root: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackendConfig {
    pub adapter: String,
    pub mock_script: Option<PathBuf>,
    /// Overrides the script's own `strict` flag.
    pub strict: Option<bool>,
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self {
            adapter: "mock".into(),
            mock_script: None,
            strict: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub suite: PathBuf,
    pub models: Vec<ModelSpec>,
    pub backend: BackendConfig,
    pub constants: Constants,
    pub output_dir: PathBuf,
    pub parallelism: usize,
    pub seed: u64,
    pub samples_per_prompt: usize,
    pub annotations: Option<PathBuf>,
}

impl RunConfig {
    /// Reads `path`, taking the output directory from `env_output` when the file has none.
    pub fn load(path: &Path, env_output: Option<&str>) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base, env_output).map_err(|e| match e {
            CliError::Validation(m) => invalid(format!("config {}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str, base: &Path, env_output: Option<&str>) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        let at = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
        if raw.parallelism < 1 {
            return Err(invalid("parallelism must be at least 1"));
        }
        if raw.samples_per_prompt < 1 {
            return Err(invalid("samples_per_prompt must be at least 1"));
        }
        let mut seen = HashSet::new();
        for m in &raw.models {
            if m.id.trim().is_empty() || m.id.contains('/') {
                return Err(invalid(format!("model id `{}` must be nonempty and free of `/`", m.id)));
            }
            if !seen.insert(m.id.as_str()) {
                return Err(invalid(format!("model `{}` listed twice", m.id)));
            }
        }
        let overrides = match &raw.constants {
            Some(v) => serde_json::to_value(v).map_err(|e| invalid(e.to_string()))?,
            None => serde_json::Value::Null,
        };
        let constants = Constants::default()
            .with_overrides(&overrides)
            .map_err(|e| invalid(format!("constants: {e}")))?;
        let output_dir = match (&raw.output_dir, env_output.filter(|s| !s.is_empty())) {
            (Some(p), _) => at(p),
            (None, Some(env)) => PathBuf::from(env),
            (None, None) => {
                return Err(invalid(format!("no output_dir in config and {OUTPUT_DIR_ENV} is unset")))
            }
        };
        let backend = match raw.backend {
            Some(b) => BackendConfig {
                adapter: b.adapter,
                mock_script: b.mock_script.as_deref().map(at),
                strict: b.strict,
            },
            None => BackendConfig::default(),
        };
        Ok(Self {
            suite: at(&raw.suite),
            models: raw
                .models
                .into_iter()
                .map(|m| ModelSpec {
                    video_root: at(&m.video_root),
                    id: m.id,
                })
                .collect(),
            backend,
            constants,
            output_dir,
            parallelism: raw.parallelism,
            seed: raw.seed,
            samples_per_prompt: raw.samples_per_prompt,
            annotations: raw.annotations.as_deref().map(at),
        })
    }

    /// Models passing the `--model` filter, in config order.
    pub fn selected_models(&self, filter: &[String]) -> Result<Vec<&ModelSpec>, CliError> {
        for f in filter {
            if !self.models.iter().any(|m| &m.id == f) {
                return Err(invalid(format!("model `{f}` is not in the config")));
            }
        }
        Ok(self
            .models
            .iter()
            .filter(|m| filter.is_empty() || filter.contains(&m.id))
            .collect())
    }

    /// Checks that the suite and every selected video root exist.
    pub fn require_inputs(&self, models: &[&ModelSpec]) -> Result<(), CliError> {
        if !self.suite.is_file() {
            return Err(invalid(format!("suite {} does not exist", self.suite.display())));
        }
        if models.is_empty() {
            return Err(invalid("no models selected"));
        }
        for m in models {
            if !m.video_root.is_dir() {
                return Err(invalid(format!(
                    "video root {} of model {} does not exist",
                    m.video_root.display(),
                    m.id
                )));
            }
        }
        Ok(())
    }

    pub fn results_path(&self) -> PathBuf {
        self.output_dir.join("results.jsonl")
    }

    /// Position of `model` in the config, or past the end for unknown models.
    pub fn model_rank(&self, model: &str) -> usize {
        self.models.iter().position(|m| m.id == model).unwrap_or(self.models.len())
    }
}
