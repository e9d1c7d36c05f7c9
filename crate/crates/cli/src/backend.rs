//! Backend construction from the run config.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use vbench2_core::backends::{BackendSuite, Capability, MockBackend};
use vbench2_core::MockScript;

use crate::config::BackendConfig;
use crate::error::{invalid, CliError};

/// What served the run, recorded in report metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendDescriptor {
    pub adapter: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub script_sha256: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strict: Option<bool>,
    /// Capability → serving adapter and scripted entry count.
    pub capabilities: BTreeMap<String, String>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn load_script(path: &Path, strict: Option<bool>) -> Result<(MockScript, String), CliError> {
    let bytes = std::fs::read(path).map_err(|e| invalid(format!("mock script {}: {e}", path.display())))?;
    let mut script: MockScript =
        serde_json::from_slice(&bytes).map_err(|e| invalid(format!("mock script {}: {e}", path.display())))?;
    if let Some(s) = strict {
        script.strict = s;
    }
    Ok((script, sha256_hex(&bytes)))
}

fn mock_descriptor(script: &MockScript, sha: String) -> BackendDescriptor {
    let capabilities = Capability::ALL
        .iter()
        .map(|c| {
            let n = script.entries.iter().filter(|e| e.capability == *c).count();
            (c.as_str().to_owned(), format!("mock ({n} entries)"))
        })
        .collect();
    BackendDescriptor {
        adapter: "mock".into(),
        script_sha256: Some(sha),
        strict: Some(script.strict),
        capabilities,
    }
}

fn script_path<'a>(config: &'a BackendConfig, mock_override: Option<&'a Path>) -> Option<&'a Path> {
    mock_override.or(config.mock_script.as_deref())
}

/// Builds the backend suite; only the scripted mock adapter ships with the harness.
pub fn build_backend(
    config: &BackendConfig,
    mock_override: Option<&Path>,
) -> Result<(BackendSuite, BackendDescriptor), CliError> {
    if mock_override.is_none() && config.adapter != "mock" {
        return Err(CliError::Backend(format!(
            "backend unavailable: adapter `{}` is not built into this harness; use adapter = \"mock\"",
            config.adapter
        )));
    }
    let path = script_path(config, mock_override)
        .ok_or_else(|| invalid("mock adapter needs `mock_script` in [backend] or --mock-script"))?;
    let (script, sha) = load_script(path, config.strict)?;
    let descriptor = mock_descriptor(&script, sha);
    let suite = BackendSuite::new(Arc::new(MockBackend::new(script)));
    Ok((suite, descriptor))
}

/// Describes the configured backend without constructing it.
pub fn describe_backend(config: &BackendConfig, mock_override: Option<&Path>) -> Result<BackendDescriptor, CliError> {
    let adapter = if mock_override.is_some() { "mock" } else { config.adapter.as_str() };
    match script_path(config, mock_override).filter(|p| p.is_file()) {
        Some(path) if adapter == "mock" => {
            let (script, sha) = load_script(path, config.strict)?;
            Ok(mock_descriptor(&script, sha))
        }
        _ => Ok(BackendDescriptor {
            adapter: adapter.to_owned(),
            script_sha256: None,
            strict: config.strict,
            capabilities: Capability::ALL
                .iter()
                .map(|c| (c.as_str().to_owned(), adapter.to_owned()))
                .collect(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_mock_adapter_is_unavailable() {
        let cfg = BackendConfig {
            adapter: "remote".into(),
            ..BackendConfig::default()
        };
        assert!(matches!(build_backend(&cfg, None), Err(CliError::Backend(_))));
    }

    #[test]
    fn mock_needs_a_script() {
        assert!(matches!(build_backend(&BackendConfig::default(), None), Err(CliError::Validation(_))));
    }

    #[test]
    fn strict_override_and_hash() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        std::fs::write(&path, MockScript::lenient().to_json_pretty()).unwrap();
        let cfg = BackendConfig {
            mock_script: Some(path.clone()),
            strict: Some(true),
            ..BackendConfig::default()
        };
        let (_, d) = build_backend(&cfg, None).unwrap();
        assert_eq!(d.strict, Some(true));
        assert_eq!(d.script_sha256.as_ref().map(String::len), Some(64));
        assert_eq!(d.capabilities.len(), Capability::ALL.len());
        assert_eq!(describe_backend(&cfg, None).unwrap(), d);
    }
}
