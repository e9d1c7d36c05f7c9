//! Per-dimension model scores, pairwise win ratios, rank correlation and radar normalization.

mod pairwise;
mod radar;
mod stats;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::suite::DimensionId;

pub use pairwise::{
    human_judgments, machine_judgments, win_ratio, AnnotationRecord, Choice, Judgment, PairOutcome, PairTally,
    WinRatioTable,
};
pub use radar::{normalize_for_radar, RadarTable, ScoreTable};
pub use stats::{average_ranks, pearson, spearman};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AggregationError {
    #[error("records mix {0}")]
    Mixed(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("undefined: {0}")]
    Undefined(String),
}

/// Result of scoring one unit: a number, or a typed non-score.
#[derive(Debug, Clone, PartialEq)]
pub enum ScoreValue {
    Score(f64),
    Discarded,
    Unscorable(String),
}

impl ScoreValue {
    pub fn score(&self) -> Option<f64> {
        match self {
            ScoreValue::Score(s) => Some(*s),
            _ => None,
        }
    }
}

/// One scored (prompt, sample) unit of one model.
///
/// Serialized with exactly one of `score` or `outcome`
/// (`"discarded"` / `"unscorable"`, the latter with a `reason`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRecord", into = "RawRecord")]
pub struct ScoreRecord {
    pub prompt_id: String,
    pub dimension: DimensionId,
    pub model: String,
    pub sample: usize,
    pub value: ScoreValue,
    pub evidence: serde_json::Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum OutcomeTag {
    Discarded,
    Unscorable,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    prompt_id: String,
    dimension: DimensionId,
    model: String,
    sample: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    outcome: Option<OutcomeTag>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    evidence: serde_json::Value,
}

impl TryFrom<RawRecord> for ScoreRecord {
    type Error = String;

    fn try_from(r: RawRecord) -> Result<Self, Self::Error> {
        let value = match (r.score, r.outcome) {
            (Some(s), None) if (0.0..=1.0).contains(&s) => ScoreValue::Score(s),
            (Some(s), None) => return Err(format!("score {s} outside [0,1]")),
            (None, Some(OutcomeTag::Discarded)) => ScoreValue::Discarded,
            (None, Some(OutcomeTag::Unscorable)) => ScoreValue::Unscorable(r.reason.unwrap_or_default()),
            _ => return Err("exactly one of `score` or `outcome` must be present".into()),
        };
        Ok(Self {
            prompt_id: r.prompt_id,
            dimension: r.dimension,
            model: r.model,
            sample: r.sample,
            value,
            evidence: r.evidence,
        })
    }
}

impl From<ScoreRecord> for RawRecord {
    fn from(r: ScoreRecord) -> Self {
        let (score, outcome, reason) = match r.value {
            ScoreValue::Score(s) => (Some(s), None, None),
            ScoreValue::Discarded => (None, Some(OutcomeTag::Discarded), None),
            ScoreValue::Unscorable(reason) => (None, Some(OutcomeTag::Unscorable), Some(reason)),
        };
        Self {
            prompt_id: r.prompt_id,
            dimension: r.dimension,
            model: r.model,
            sample: r.sample,
            score,
            outcome,
            reason,
            evidence: r.evidence,
        }
    }
}

/// A model's score on one dimension with the excluded units counted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionSummary {
    pub dimension: DimensionId,
    /// `None` when no unit was scorable.
    pub score: Option<f64>,
    pub scored: usize,
    pub discarded: usize,
    pub unscorable: usize,
}

/// Mean of the numeric scores; discarded and unscorable units leave the denominator.
pub fn dimension_score(records: &[ScoreRecord], dim: DimensionId) -> Result<DimensionSummary, AggregationError> {
    if let Some(r) = records.iter().find(|r| r.dimension != dim) {
        return Err(AggregationError::Mixed(format!("dimension {} with {dim}", r.dimension)));
    }
    if let Some(first) = records.first() {
        if let Some(r) = records.iter().find(|r| r.model != first.model) {
            return Err(AggregationError::Mixed(format!("models {} and {}", first.model, r.model)));
        }
    }
    let scores: Vec<f64> = records.iter().filter_map(|r| r.value.score()).collect();
    let discarded = records.iter().filter(|r| r.value == ScoreValue::Discarded).count();
    Ok(DimensionSummary {
        dimension: dim,
        score: (!scores.is_empty()).then(|| scores.iter().sum::<f64>() / scores.len() as f64),
        scored: scores.len(),
        discarded,
        unscorable: records.len() - scores.len() - discarded,
    })
}

/// Per-model, per-dimension summaries of a record stream.
pub fn summarize(records: &[ScoreRecord]) -> BTreeMap<String, BTreeMap<DimensionId, DimensionSummary>> {
    let mut groups: BTreeMap<(String, DimensionId), Vec<ScoreRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.model.clone(), r.dimension)).or_default().push(r.clone());
    }
    let mut out: BTreeMap<String, BTreeMap<DimensionId, DimensionSummary>> = BTreeMap::new();
    for ((model, dim), rs) in groups {
        let s = dimension_score(&rs, dim).expect("grouped records share model and dimension");
        out.entry(model).or_default().insert(dim, s);
    }
    out
}

/// Fraction as a percentage rounded half-up to two decimals.
pub fn round_percent(x: f64) -> f64 {
    (x * 10000.0 + 0.5 + 1e-9).floor() / 100.0
}

/// `0.88584` → `"88.58%"`.
pub fn format_percent(x: f64) -> String {
    format!("{:.2}%", round_percent(x))
}
