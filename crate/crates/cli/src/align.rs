//! The `align` command: machine vs human win ratios and their rank correlation.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use vbench2_core::aggregation::{
    human_judgments, machine_judgments, pearson, spearman, win_ratio, AnnotationRecord, WinRatioTable,
};
use vbench2_core::{DimensionId, ScoreRecord};

use crate::config::RunConfig;
use crate::error::{invalid, CliError};
use crate::report::selected_records;
use crate::Selection;

pub const ANNOTATION_HEADER: [&str; 6] = ["dimension", "prompt_id", "group", "model_a", "model_b", "choice"];

/// Reads the annotations CSV; the header must be exactly [`ANNOTATION_HEADER`].
pub fn read_annotations(path: &Path) -> Result<Vec<AnnotationRecord>, CliError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    let header = reader
        .headers()
        .map_err(|e| invalid(format!("{}: {e}", path.display())))?
        .clone();
    if header.iter().collect::<Vec<_>>() != ANNOTATION_HEADER {
        return Err(invalid(format!(
            "{}: header must be `{}`",
            path.display(),
            ANNOTATION_HEADER.join(",")
        )));
    }
    reader
        .deserialize()
        .enumerate()
        .map(|(i, row)| row.map_err(|e| invalid(format!("{}: row {}: {e}", path.display(), i + 2))))
        .collect()
}

/// A correlation, or the reason it is undefined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Correlation {
    Value(f64),
    Undefined(String),
}

impl Correlation {
    pub fn value(&self) -> Option<f64> {
        match self {
            Correlation::Value(v) => Some(*v),
            Correlation::Undefined(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionAlignment {
    /// Model order of the vectors below.
    pub models: Vec<String>,
    /// Win ratios derived from per-video scores.
    pub vbench: Vec<f64>,
    pub human: Vec<f64>,
    pub vbench_points: Vec<f64>,
    pub human_points: Vec<f64>,
    pub vbench_comparisons: usize,
    pub human_comparisons: usize,
    pub spearman: Correlation,
    /// Reported alongside the rank correlation.
    pub pearson: Correlation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentReport {
    pub dimensions: BTreeMap<DimensionId, DimensionAlignment>,
}

fn correlate(
    f: fn(&[f64], &[f64]) -> Result<f64, vbench2_core::aggregation::AggregationError>,
    x: &[f64],
    y: &[f64],
) -> Correlation {
    match f(x, y) {
        Ok(v) => Correlation::Value(v),
        Err(e) => Correlation::Undefined(e.to_string()),
    }
}

fn vectors(t: &WinRatioTable, models: &[String]) -> (Vec<f64>, Vec<f64>) {
    models.iter().map(|m| (t.ratios[m], t.points[m])).unzip()
}

/// Aligns one dimension; the model sets of both sides must agree.
pub fn align_dimension(
    records: &[ScoreRecord],
    annotations: &[AnnotationRecord],
    dim: DimensionId,
) -> Result<DimensionAlignment, CliError> {
    let err = |e: vbench2_core::aggregation::AggregationError| invalid(format!("{dim}: {e}"));
    let machine = machine_judgments(records, dim);
    if machine.is_empty() {
        return Err(invalid(format!("{dim}: no pairwise-comparable results")));
    }
    let human = human_judgments(annotations, dim).map_err(err)?;
    let machine_table = win_ratio(&machine).map_err(err)?;
    let human_table = win_ratio(&human).map_err(err)?;
    let machine_models: BTreeSet<&String> = machine_table.ratios.keys().collect();
    let human_models: BTreeSet<&String> = human_table.ratios.keys().collect();
    if machine_models != human_models {
        return Err(invalid(format!(
            "{dim}: model mismatch between results {machine_models:?} and annotations {human_models:?}"
        )));
    }
    let models: Vec<String> = machine_models.into_iter().cloned().collect();
    let (vbench, vbench_points) = vectors(&machine_table, &models);
    let (human_r, human_points) = vectors(&human_table, &models);
    Ok(DimensionAlignment {
        spearman: correlate(spearman, &vbench, &human_r),
        pearson: correlate(pearson, &vbench, &human_r),
        vbench_comparisons: machine_table.total_comparisons(),
        human_comparisons: human_table.total_comparisons(),
        models,
        vbench,
        human: human_r,
        vbench_points,
        human_points,
    })
}

pub fn align(
    records: &[ScoreRecord],
    annotations: &[AnnotationRecord],
    selection: &Selection,
) -> Result<AlignmentReport, CliError> {
    let dims: BTreeSet<DimensionId> = annotations
        .iter()
        .map(|a| a.dimension)
        .filter(|d| selection.includes_dimension(*d))
        .collect();
    if dims.is_empty() {
        return Err(invalid("annotations cover none of the selected dimensions"));
    }
    let annotations: Vec<AnnotationRecord> = annotations
        .iter()
        .filter(|a| selection.models.is_empty() || (selection.models.contains(&a.model_a) && selection.models.contains(&a.model_b)))
        .cloned()
        .collect();
    let dimensions = dims
        .into_iter()
        .map(|d| align_dimension(records, &annotations, d).map(|a| (d, a)))
        .collect::<Result<_, _>>()?;
    Ok(AlignmentReport { dimensions })
}

/// `align` command: writes `alignment.json` next to the results.
pub fn cmd_align(
    config: &RunConfig,
    selection: &Selection,
    annotations: Option<&Path>,
) -> Result<AlignmentReport, CliError> {
    let path = annotations
        .or(config.annotations.as_deref())
        .ok_or_else(|| invalid("align needs --annotations or `annotations` in the config"))?;
    let annotations = read_annotations(path)?;
    let records = selected_records(config, selection)?;
    let report = align(&records, &annotations, selection)?;
    let out = config.output_dir.join("alignment.json");
    std::fs::create_dir_all(&config.output_dir)
        .map_err(CliError::io(format!("creating {}", config.output_dir.display())))?;
    let json = serde_json::to_string_pretty(&report).expect("alignment serializes");
    std::fs::write(&out, json + "\n").map_err(CliError::io(format!("writing {}", out.display())))?;
    Ok(report)
}
