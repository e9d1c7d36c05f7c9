//! `export-prompts` and `dump-registry`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vbench2_core::registry::{default_registry, DimensionBinding};
use vbench2_core::suite::{load_suite, prompts_for_dimension};
use vbench2_core::{Constants, DimensionId};

use crate::config::RunConfig;
use crate::error::{invalid, CliError};
use crate::Selection;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportedPrompt {
    pub id: String,
    /// Videos to generate for the prompt.
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportedDimension {
    pub file: String,
    pub prompts: Vec<ExportedPrompt>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportIndex {
    pub suite_version: String,
    pub dimensions: BTreeMap<DimensionId, ExportedDimension>,
}

/// Writes `prompts/<dimension>.txt` (one prompt per line, manifest order) and `prompts/index.json`.
///
/// Dimensions without prompts still get an empty file.
pub fn cmd_export_prompts(config: &RunConfig, selection: &Selection) -> Result<(PathBuf, ExportIndex), CliError> {
    let suite = load_suite(&config.suite).map_err(|e| invalid(e.to_string()))?;
    let dir = config.output_dir.join("prompts");
    std::fs::create_dir_all(&dir).map_err(CliError::io(format!("creating {}", dir.display())))?;
    let mut dimensions = BTreeMap::new();
    for dim in DimensionId::ALL.into_iter().filter(|d| selection.includes_dimension(*d)) {
        let prompts = prompts_for_dimension(&suite, dim);
        let file = format!("{}.txt", dim.as_str());
        let body: String = prompts
            .iter()
            .map(|p| p.text.split_whitespace().collect::<Vec<_>>().join(" ") + "\n")
            .collect();
        write(&dir.join(&file), &body)?;
        let samples = |p: &vbench2_core::PromptSpec| {
            if p.videos_per_unit() > 1 {
                p.videos_per_unit()
            } else {
                config.samples_per_prompt
            }
        };
        dimensions.insert(
            dim,
            ExportedDimension {
                file,
                prompts: prompts
                    .iter()
                    .map(|p| ExportedPrompt {
                        id: p.id.clone(),
                        samples: samples(p),
                    })
                    .collect(),
            },
        );
    }
    let index = ExportIndex {
        suite_version: suite.version,
        dimensions,
    };
    write(
        &dir.join("index.json"),
        &(serde_json::to_string_pretty(&index).expect("index serializes") + "\n"),
    )?;
    Ok((dir, index))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(CliError::io(format!("writing {}", path.display())))
}

#[derive(Debug, Clone, Serialize)]
pub struct RegistryDump {
    pub bindings: Vec<DimensionBinding>,
    pub constants: Constants,
    pub constants_sha256: String,
}

/// Bindings plus the effective constants, for audit.
pub fn registry_dump(constants: &Constants) -> RegistryDump {
    RegistryDump {
        bindings: default_registry(),
        constants: *constants,
        constants_sha256: constants.sha256(),
    }
}
