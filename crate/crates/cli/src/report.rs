//! Per-model reports, the percentage table and radar series.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use vbench2_core::aggregation::{normalize_for_radar, round_percent, format_percent, summarize, ScoreTable};
use vbench2_core::suite::load_suite;
use vbench2_core::{Constants, DimensionId, ScoreRecord};

use crate::backend::{describe_backend, BackendDescriptor};
use crate::config::RunConfig;
use crate::error::{invalid, CliError};
use crate::results::load_results;
use crate::Selection;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub suite_version: String,
    pub constants_sha256: String,
    pub constants: Constants,
    pub backend: BackendDescriptor,
    pub seed: u64,
    pub samples_per_prompt: usize,
    pub records: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionCell {
    /// Mean score in `[0, 1]`; absent when nothing was scorable.
    pub score: Option<f64>,
    /// Score as a percentage rounded half-up to two decimals.
    pub percent: Option<f64>,
    pub scored: usize,
    pub discarded: usize,
    pub unscorable: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub model: String,
    pub dimensions: BTreeMap<DimensionId, DimensionCell>,
    /// Min-max normalized across the reported models.
    pub radar: BTreeMap<DimensionId, f64>,
    /// Dimensions with records but no scorable unit.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub undefined: Vec<DimensionId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub metadata: RunMetadata,
    pub models: Vec<ModelReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub radar_notes: Vec<String>,
}

impl RunReport {
    pub fn model(&self, id: &str) -> Option<&ModelReport> {
        self.models.iter().find(|m| m.model == id)
    }

    /// Dimensions present for any model, in taxonomy order.
    pub fn dimensions(&self) -> Vec<DimensionId> {
        DimensionId::ALL
            .into_iter()
            .filter(|d| self.models.iter().any(|m| m.dimensions.contains_key(d)))
            .collect()
    }
}

/// Canonical record order: model, dimension, prompt, sample.
pub fn sort_records(records: &mut [ScoreRecord]) {
    records.sort_by(|a, b| {
        (&a.model, a.dimension, &a.prompt_id, a.sample).cmp(&(&b.model, b.dimension, &b.prompt_id, b.sample))
    });
}

/// Aggregates records; `rank` orders models (ties by name).
pub fn build_report(
    mut records: Vec<ScoreRecord>,
    rank: impl Fn(&str) -> usize,
    mut metadata: RunMetadata,
) -> Result<RunReport, CliError> {
    if records.is_empty() {
        return Err(invalid("empty report: no results to aggregate"));
    }
    sort_records(&mut records);
    metadata.records = records.len();
    let summaries = summarize(&records);
    let mut table = ScoreTable::new();
    for (model, dims) in &summaries {
        for (dim, s) in dims {
            if let Some(score) = s.score {
                table.entry(*dim).or_default().insert(model.clone(), score);
            }
        }
    }
    let radar = normalize_for_radar(&table);
    let mut models: Vec<ModelReport> = summaries
        .into_iter()
        .map(|(model, dims)| {
            let undefined = dims.values().filter(|s| s.score.is_none()).map(|s| s.dimension).collect();
            let radar_values = radar
                .values
                .iter()
                .filter_map(|(d, col)| col.get(&model).map(|v| (*d, *v)))
                .collect();
            let dimensions = dims
                .into_iter()
                .map(|(d, s)| {
                    (
                        d,
                        DimensionCell {
                            score: s.score,
                            percent: s.score.map(round_percent),
                            scored: s.scored,
                            discarded: s.discarded,
                            unscorable: s.unscorable,
                        },
                    )
                })
                .collect();
            ModelReport {
                model,
                dimensions,
                radar: radar_values,
                undefined,
            }
        })
        .collect();
    models.sort_by(|a, b| (rank(&a.model), &a.model).cmp(&(rank(&b.model), &b.model)));
    Ok(RunReport {
        metadata,
        models,
        radar_notes: radar.notes,
    })
}

/// Markdown table, one row per model, one column per dimension.
pub fn render_table(report: &RunReport) -> String {
    let dims = report.dimensions();
    let mut out = String::from("| Model |");
    for d in &dims {
        let _ = write!(out, " {} |", d.title());
    }
    out.push_str("\n|---|");
    out.push_str(&"---:|".repeat(dims.len()));
    out.push('\n');
    for m in &report.models {
        let _ = write!(out, "| {} |", m.model);
        for d in &dims {
            let cell = match m.dimensions.get(d) {
                Some(DimensionCell { score: Some(s), .. }) => format_percent(*s),
                Some(_) => "undefined".to_owned(),
                None => "-".to_owned(),
            };
            let _ = write!(out, " {cell} |");
        }
        out.push('\n');
    }
    let mut footnotes = Vec::new();
    for m in &report.models {
        for (d, c) in &m.dimensions {
            if c.discarded + c.unscorable > 0 {
                footnotes.push(format!(
                    "{} / {}: {} discarded, {} unscorable",
                    m.model, d, c.discarded, c.unscorable
                ));
            }
        }
    }
    footnotes.extend(report.radar_notes.iter().cloned());
    if !footnotes.is_empty() {
        out.push('\n');
        for f in footnotes {
            let _ = writeln!(out, "- {f}");
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarSeries {
    pub model: String,
    /// One value per entry of `dimensions`; `None` where the model has no score.
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarExport {
    pub dimensions: Vec<DimensionId>,
    pub series: Vec<RadarSeries>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

pub fn radar_export(report: &RunReport) -> RadarExport {
    let dimensions = report.dimensions();
    RadarExport {
        series: report
            .models
            .iter()
            .map(|m| RadarSeries {
                model: m.model.clone(),
                values: dimensions.iter().map(|d| m.radar.get(d).copied()).collect(),
            })
            .collect(),
        dimensions,
        notes: report.radar_notes.clone(),
    }
}

pub fn metadata_for(config: &RunConfig, mock_override: Option<&Path>) -> Result<RunMetadata, CliError> {
    let suite = load_suite(&config.suite).map_err(|e| invalid(e.to_string()))?;
    Ok(RunMetadata {
        suite_version: suite.version,
        constants_sha256: config.constants.sha256(),
        constants: config.constants,
        backend: describe_backend(&config.backend, mock_override)?,
        seed: config.seed,
        samples_per_prompt: config.samples_per_prompt,
        records: 0,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(CliError::io(format!("writing {}", path.display())))
}

/// Writes `report.json`, `table.md` and `radar.json` into the output directory.
pub fn write_reports(config: &RunConfig, report: &RunReport) -> Result<(), CliError> {
    let dir = &config.output_dir;
    std::fs::create_dir_all(dir).map_err(CliError::io(format!("creating {}", dir.display())))?;
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    write_file(&dir.join("report.json"), &(json + "\n"))?;
    write_file(&dir.join("table.md"), &render_table(report))?;
    let radar = serde_json::to_string_pretty(&radar_export(report)).expect("radar serializes");
    write_file(&dir.join("radar.json"), &(radar + "\n"))
}

/// Records of the results file that pass the selection.
pub fn selected_records(config: &RunConfig, selection: &Selection) -> Result<Vec<ScoreRecord>, CliError> {
    let records = load_results(&config.results_path())?;
    Ok(records.into_iter().filter(|r| selection.includes(r)).collect())
}

/// `report` command: aggregates the results file into tables and radar data.
pub fn cmd_report(config: &RunConfig, selection: &Selection, mock_override: Option<&Path>) -> Result<RunReport, CliError> {
    let records = selected_records(config, selection)?;
    let report = build_report(records, |m| config.model_rank(m), metadata_for(config, mock_override)?)?;
    write_reports(config, &report)?;
    Ok(report)
}
