//! Dimension taxonomy and the prompt-suite data model.
//!
//! A suite manifest is a versioned JSON document:
//!
//! ```json
//! { "version": "1.0",
//!   "prompts": [ { "id": "...", "dimension": "mechanics", "text": "...",
//!                  "payload": { "scheme": "multi_qa", ... } } ] }
//! ```
//!
//! The payload is tagged by `scheme` and must match the scheme bound to the
//! prompt's dimension.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assets;
use crate::geometry::MotionLabel;

/// The five top-level capability categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    HumanFidelity,
    Creativity,
    Controllability,
    Physics,
    Commonsense,
}

/// One of the 18 evaluated dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DimensionId {
    Anatomy,
    Clothes,
    Identity,
    Diversity,
    Composition,
    DynamicSpatial,
    DynamicAttribute,
    MotionOrder,
    HumanInteraction,
    ComplexLandscape,
    ComplexPlot,
    CameraMotion,
    Mechanics,
    Material,
    Thermotics,
    MultiviewConsistency,
    MotionRationality,
    InstancePreservation,
}

impl DimensionId {
    pub const ALL: [DimensionId; 18] = [
        DimensionId::Anatomy,
        DimensionId::Clothes,
        DimensionId::Identity,
        DimensionId::Diversity,
        DimensionId::Composition,
        DimensionId::DynamicSpatial,
        DimensionId::DynamicAttribute,
        DimensionId::MotionOrder,
        DimensionId::HumanInteraction,
        DimensionId::ComplexLandscape,
        DimensionId::ComplexPlot,
        DimensionId::CameraMotion,
        DimensionId::Mechanics,
        DimensionId::Material,
        DimensionId::Thermotics,
        DimensionId::MultiviewConsistency,
        DimensionId::MotionRationality,
        DimensionId::InstancePreservation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DimensionId::Anatomy => "anatomy",
            DimensionId::Clothes => "clothes",
            DimensionId::Identity => "identity",
            DimensionId::Diversity => "diversity",
            DimensionId::Composition => "composition",
            DimensionId::DynamicSpatial => "dynamic_spatial",
            DimensionId::DynamicAttribute => "dynamic_attribute",
            DimensionId::MotionOrder => "motion_order",
            DimensionId::HumanInteraction => "human_interaction",
            DimensionId::ComplexLandscape => "complex_landscape",
            DimensionId::ComplexPlot => "complex_plot",
            DimensionId::CameraMotion => "camera_motion",
            DimensionId::Mechanics => "mechanics",
            DimensionId::Material => "material",
            DimensionId::Thermotics => "thermotics",
            DimensionId::MultiviewConsistency => "multiview_consistency",
            DimensionId::MotionRationality => "motion_rationality",
            DimensionId::InstancePreservation => "instance_preservation",
        }
    }

    /// Column header used in report tables.
    pub fn title(self) -> &'static str {
        match self {
            DimensionId::Anatomy => "Human Anatomy",
            DimensionId::Clothes => "Human Clothes",
            DimensionId::Identity => "Human Identity",
            DimensionId::Diversity => "Diversity",
            DimensionId::Composition => "Composition",
            DimensionId::DynamicSpatial => "Dynamic Spatial Relationship",
            DimensionId::DynamicAttribute => "Dynamic Attribute",
            DimensionId::MotionOrder => "Motion Order Understanding",
            DimensionId::HumanInteraction => "Human Interaction",
            DimensionId::ComplexLandscape => "Complex Landscape",
            DimensionId::ComplexPlot => "Complex Plot",
            DimensionId::CameraMotion => "Camera Motion",
            DimensionId::Mechanics => "Mechanics",
            DimensionId::Material => "Material",
            DimensionId::Thermotics => "Thermotics",
            DimensionId::MultiviewConsistency => "Multi-view Consistency",
            DimensionId::MotionRationality => "Motion Rationality",
            DimensionId::InstancePreservation => "Instance Preservation",
        }
    }

    pub fn category(self) -> Category {
        use DimensionId::*;
        match self {
            Anatomy | Clothes | Identity => Category::HumanFidelity,
            Diversity | Composition => Category::Creativity,
            DynamicSpatial | DynamicAttribute | MotionOrder | HumanInteraction
            | ComplexLandscape | ComplexPlot | CameraMotion => Category::Controllability,
            Mechanics | Material | Thermotics | MultiviewConsistency => Category::Physics,
            MotionRationality | InstancePreservation => Category::Commonsense,
        }
    }

    pub fn scheme(self) -> EvalScheme {
        use DimensionId::*;
        match self {
            Anatomy => EvalScheme::AnatomyDetect,
            Identity => EvalScheme::IdentityTrack,
            Diversity => EvalScheme::DiversitySet,
            Clothes | Composition | DynamicSpatial | DynamicAttribute | Mechanics | Material
            | Thermotics | MotionRationality => EvalScheme::MultiQa,
            MotionOrder => EvalScheme::OrderedAction,
            HumanInteraction => EvalScheme::InteractionCheck,
            ComplexLandscape | ComplexPlot => EvalScheme::SequentialAlignment,
            CameraMotion => EvalScheme::CameraTrack,
            MultiviewConsistency => EvalScheme::MultiviewGeometry,
            InstancePreservation => EvalScheme::InstanceCount,
        }
    }
}

impl fmt::Display for DimensionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DimensionId {
    type Err = SuiteError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DimensionId::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| SuiteError::Schema {
                prompt_id: None,
                message: format!("unknown dimension `{s}`"),
            })
    }
}

/// Evaluation scheme a dimension is scored with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalScheme {
    TextAlignment,
    MultiQa,
    SequentialAlignment,
    OrderedAction,
    InteractionCheck,
    CameraTrack,
    MultiviewGeometry,
    IdentityTrack,
    AnatomyDetect,
    DiversitySet,
    InstanceCount,
}

impl EvalScheme {
    pub const ALL: [EvalScheme; 11] = [
        EvalScheme::TextAlignment,
        EvalScheme::MultiQa,
        EvalScheme::SequentialAlignment,
        EvalScheme::OrderedAction,
        EvalScheme::InteractionCheck,
        EvalScheme::CameraTrack,
        EvalScheme::MultiviewGeometry,
        EvalScheme::IdentityTrack,
        EvalScheme::AnatomyDetect,
        EvalScheme::DiversitySet,
        EvalScheme::InstanceCount,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EvalScheme::TextAlignment => "text_alignment",
            EvalScheme::MultiQa => "multi_qa",
            EvalScheme::SequentialAlignment => "sequential_alignment",
            EvalScheme::OrderedAction => "ordered_action",
            EvalScheme::InteractionCheck => "interaction_check",
            EvalScheme::CameraTrack => "camera_track",
            EvalScheme::MultiviewGeometry => "multiview_geometry",
            EvalScheme::IdentityTrack => "identity_track",
            EvalScheme::AnatomyDetect => "anatomy_detect",
            EvalScheme::DiversitySet => "diversity_set",
            EvalScheme::InstanceCount => "instance_count",
        }
    }

    /// Schemes invoked when this scheme runs, itself included.
    ///
    /// The interaction check runs a caption/alignment pass as its second stage.
    pub fn components(self) -> &'static [EvalScheme] {
        match self {
            EvalScheme::InteractionCheck => {
                &[EvalScheme::InteractionCheck, EvalScheme::TextAlignment]
            }
            EvalScheme::TextAlignment => &[EvalScheme::TextAlignment],
            EvalScheme::MultiQa => &[EvalScheme::MultiQa],
            EvalScheme::SequentialAlignment => &[EvalScheme::SequentialAlignment],
            EvalScheme::OrderedAction => &[EvalScheme::OrderedAction],
            EvalScheme::CameraTrack => &[EvalScheme::CameraTrack],
            EvalScheme::MultiviewGeometry => &[EvalScheme::MultiviewGeometry],
            EvalScheme::IdentityTrack => &[EvalScheme::IdentityTrack],
            EvalScheme::AnatomyDetect => &[EvalScheme::AnatomyDetect],
            EvalScheme::DiversitySet => &[EvalScheme::DiversitySet],
            EvalScheme::InstanceCount => &[EvalScheme::InstanceCount],
        }
    }
}

impl fmt::Display for EvalScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How per-question verdicts combine into a score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QaMode {
    /// 1 only when every answer is yes.
    All,
    /// Fraction of yes answers.
    Mean,
}

fn default_diversity_samples() -> usize {
    20
}

/// Scheme-specific prompt payload, tagged by `scheme`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case", deny_unknown_fields)]
pub enum Payload {
    TextAlignment {
        reference: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        vlm_prompt: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        llm_prompt: Option<String>,
    },
    MultiQa {
        #[serde(default)]
        questions: Vec<String>,
        mode: QaMode,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        prefilter: Option<String>,
    },
    SequentialAlignment {
        segments: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        vlm_prompt: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        llm_prompt: Option<String>,
    },
    OrderedAction {
        action_a: String,
        action_b: String,
    },
    InteractionCheck {},
    CameraTrack {
        target: MotionLabel,
    },
    MultiviewGeometry {},
    IdentityTrack {},
    AnatomyDetect {},
    DiversitySet {
        #[serde(default = "default_diversity_samples")]
        samples: usize,
    },
    InstanceCount {
        expected_count: usize,
        vocabulary: Vec<String>,
    },
}

impl Payload {
    pub fn scheme(&self) -> EvalScheme {
        match self {
            Payload::TextAlignment { .. } => EvalScheme::TextAlignment,
            Payload::MultiQa { .. } => EvalScheme::MultiQa,
            Payload::SequentialAlignment { .. } => EvalScheme::SequentialAlignment,
            Payload::OrderedAction { .. } => EvalScheme::OrderedAction,
            Payload::InteractionCheck {} => EvalScheme::InteractionCheck,
            Payload::CameraTrack { .. } => EvalScheme::CameraTrack,
            Payload::MultiviewGeometry {} => EvalScheme::MultiviewGeometry,
            Payload::IdentityTrack {} => EvalScheme::IdentityTrack,
            Payload::AnatomyDetect {} => EvalScheme::AnatomyDetect,
            Payload::DiversitySet { .. } => EvalScheme::DiversitySet,
            Payload::InstanceCount { .. } => EvalScheme::InstanceCount,
        }
    }
}

/// One test case of the suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PromptSpec {
    pub id: String,
    pub dimension: DimensionId,
    pub text: String,
    pub payload: Payload,
}

impl PromptSpec {
    pub fn word_count(&self) -> usize {
        self.text.split_whitespace().count()
    }

    /// Number of videos the prompt consumes per scoring unit.
    pub fn videos_per_unit(&self) -> usize {
        match &self.payload {
            Payload::DiversitySet { samples } => *samples,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteManifest {
    pub version: String,
    pub prompts: Vec<PromptSpec>,
}

impl SuiteManifest {
    pub fn counts(&self) -> BTreeMap<DimensionId, usize> {
        let mut out: BTreeMap<DimensionId, usize> =
            DimensionId::ALL.iter().map(|d| (*d, 0)).collect();
        for p in &self.prompts {
            *out.entry(p.dimension).or_default() += 1;
        }
        out
    }

    pub fn get(&self, id: &str) -> Option<&PromptSpec> {
        self.prompts.iter().find(|p| p.id == id)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("cannot read suite {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed suite manifest: {0}")]
    Parse(String),
    #[error("schema error{}: {message}", prompt_id.as_ref().map(|p| format!(" in prompt `{p}`")).unwrap_or_default())]
    Schema {
        prompt_id: Option<String>,
        message: String,
    },
    #[error("duplicate prompt id `{0}`")]
    DuplicateId(String),
}

/// A broken prompt invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub prompt_id: String,
    pub rule: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.prompt_id, self.rule)
    }
}

pub const MIN_LONG_PROMPT_WORDS: usize = 150;

#[derive(Deserialize)]
struct RawManifest {
    version: String,
    prompts: Vec<serde_json::Value>,
}

/// Parses and validates a manifest from JSON text.
pub fn parse_suite(text: &str) -> Result<SuiteManifest, SuiteError> {
    let raw: RawManifest =
        serde_json::from_str(text).map_err(|e| SuiteError::Parse(e.to_string()))?;
    let mut prompts = Vec::with_capacity(raw.prompts.len());
    let mut seen = HashSet::new();
    for (i, value) in raw.prompts.into_iter().enumerate() {
        let id = value
            .get("id")
            .and_then(|v| v.as_str())
            .map(str::to_owned);
        if let Some(dim) = value.get("dimension").and_then(|v| v.as_str()) {
            dim.parse::<DimensionId>().map_err(|e| match e {
                SuiteError::Schema { message, .. } => SuiteError::Schema {
                    prompt_id: id.clone(),
                    message,
                },
                other => other,
            })?;
        }
        let spec: PromptSpec = serde_json::from_value(value).map_err(|e| SuiteError::Schema {
            prompt_id: id.clone().or_else(|| Some(format!("#{i}"))),
            message: e.to_string(),
        })?;
        if !seen.insert(spec.id.clone()) {
            return Err(SuiteError::DuplicateId(spec.id));
        }
        prompts.push(spec);
    }
    let manifest = SuiteManifest {
        version: raw.version,
        prompts,
    };
    if let Some(v) = validate_suite(&manifest).into_iter().next() {
        return Err(SuiteError::Schema {
            prompt_id: Some(v.prompt_id),
            message: v.rule,
        });
    }
    Ok(manifest)
}

/// Loads a suite manifest from disk, rejecting on the first structural error.
pub fn load_suite(path: impl AsRef<Path>) -> Result<SuiteManifest, SuiteError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| SuiteError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_suite(&text)
}

/// Checks every prompt invariant; returns an empty list iff the manifest is valid.
pub fn validate_suite(manifest: &SuiteManifest) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for p in &manifest.prompts {
        if !seen.insert(p.id.as_str()) {
            out.push(violation(p, "prompt id must be unique within the manifest"));
        }
        validate_prompt(p, &mut out);
    }
    out
}

fn violation(p: &PromptSpec, rule: impl Into<String>) -> Violation {
    Violation {
        prompt_id: p.id.clone(),
        rule: rule.into(),
    }
}

fn check_asset(p: &PromptSpec, field: &str, id: &Option<String>, out: &mut Vec<Violation>) {
    if let Some(id) = id {
        if assets::resolve(id).is_none() {
            out.push(violation(p, format!("{field} references unknown system prompt `{id}`")));
        }
    }
}

/// Violations of a single prompt.
pub fn prompt_violations(p: &PromptSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    validate_prompt(p, &mut out);
    out
}

fn validate_prompt(p: &PromptSpec, out: &mut Vec<Violation>) {
    use DimensionId as D;

    if p.id.trim().is_empty() {
        out.push(violation(p, "id must be nonempty"));
    }
    if p.text.trim().is_empty() {
        out.push(violation(p, "text must be nonempty"));
    }
    let expected = p.dimension.scheme();
    if p.payload.scheme() != expected {
        out.push(violation(
            p,
            format!(
                "payload scheme `{}` does not match dimension `{}` (expects `{}`)",
                p.payload.scheme(),
                p.dimension,
                expected
            ),
        ));
        return;
    }

    match &p.payload {
        Payload::TextAlignment {
            reference,
            vlm_prompt,
            llm_prompt,
        } => {
            if reference.trim().is_empty() {
                out.push(violation(p, "reference must be nonempty"));
            }
            check_asset(p, "vlm_prompt", vlm_prompt, out);
            check_asset(p, "llm_prompt", llm_prompt, out);
        }
        Payload::MultiQa {
            questions,
            mode,
            prefilter,
        } => {
            if questions.iter().any(|q| q.trim().is_empty()) {
                out.push(violation(p, "questions must be nonempty strings"));
            }
            match p.dimension {
                D::Clothes => {
                    let fixed = questions.is_empty()
                        || questions.iter().map(String::as_str).eq(assets::CLOTHES_QUESTIONS);
                    if !fixed {
                        out.push(violation(p, "clothes questions are fixed; leave empty or use the three fixed questions"));
                    }
                    if *mode != QaMode::All {
                        out.push(violation(p, "clothes requires mode=all"));
                    }
                }
                D::DynamicAttribute => {
                    if questions.len() != 3 {
                        out.push(violation(p, "dynamic_attribute requires exactly 3 questions"));
                    }
                    if *mode != QaMode::All {
                        out.push(violation(p, "dynamic_attribute requires mode=all"));
                    }
                }
                D::DynamicSpatial => {
                    if questions.len() != 2 {
                        out.push(violation(p, "dynamic_spatial requires exactly 2 questions"));
                    }
                    if *mode != QaMode::All {
                        out.push(violation(p, "dynamic_spatial requires mode=all"));
                    }
                }
                D::MotionRationality => {
                    if *mode != QaMode::All {
                        out.push(violation(p, "motion_rationality requires mode=all"));
                    }
                }
                D::Composition => {
                    if *mode != QaMode::Mean {
                        out.push(violation(p, "composition requires mode=mean"));
                    }
                    if prefilter.is_none() {
                        out.push(violation(p, "composition requires a prefilter question"));
                    }
                }
                D::Mechanics | D::Material | D::Thermotics
                    if prefilter.as_deref().is_none_or(|q| q.trim().is_empty()) => {
                        out.push(violation(p, "state-change prompts require a prefilter question"));
                    }
                _ => {}
            }
            if p.dimension != D::Clothes && questions.is_empty() {
                out.push(violation(p, "multi_qa requires at least one question"));
            }
        }
        Payload::SequentialAlignment {
            segments,
            vlm_prompt,
            llm_prompt,
        } => {
            let n = segments.len();
            match p.dimension {
                D::ComplexPlot if !(4..=5).contains(&n) => {
                    out.push(violation(p, format!("complex_plot requires 4 or 5 reference segments, found {n}")));
                }
                D::ComplexLandscape if n != 5 => {
                    out.push(violation(p, format!("complex_landscape requires exactly 5 reference segments, found {n}")));
                }
                _ => {}
            }
            if segments.iter().any(|s| s.trim().is_empty()) {
                out.push(violation(p, "reference segments must be nonempty"));
            }
            let words = p.word_count();
            if words < MIN_LONG_PROMPT_WORDS {
                out.push(violation(
                    p,
                    format!("prompt text must have at least {MIN_LONG_PROMPT_WORDS} words, found {words}"),
                ));
            }
            check_asset(p, "vlm_prompt", vlm_prompt, out);
            check_asset(p, "llm_prompt", llm_prompt, out);
        }
        Payload::OrderedAction { action_a, action_b } => {
            if action_a.trim().is_empty() || action_b.trim().is_empty() {
                out.push(violation(p, "both actions must be nonempty"));
            }
        }
        Payload::DiversitySet { samples } => {
            if *samples < 2 {
                out.push(violation(p, "diversity requires at least 2 samples"));
            }
        }
        Payload::InstanceCount {
            expected_count,
            vocabulary,
        } => {
            if *expected_count < 1 {
                out.push(violation(p, "expected_count must be at least 1"));
            }
            if vocabulary.is_empty() || vocabulary.iter().any(|v| v.trim().is_empty()) {
                out.push(violation(p, "vocabulary must be a nonempty list of labels"));
            }
        }
        Payload::InteractionCheck {}
        | Payload::CameraTrack { .. }
        | Payload::MultiviewGeometry {}
        | Payload::IdentityTrack {}
        | Payload::AnatomyDetect {} => {}
    }
}

/// All prompts of one dimension, in manifest order.
pub fn prompts_for_dimension(manifest: &SuiteManifest, dim: DimensionId) -> Vec<&PromptSpec> {
    manifest
        .prompts
        .iter()
        .filter(|p| p.dimension == dim)
        .collect()
}

/// The mini-suite shipped with the crate.
pub const MINI_SUITE_JSON: &str = include_str!("../fixtures/mini_suite.json");

pub fn mini_suite() -> SuiteManifest {
    parse_suite(MINI_SUITE_JSON).expect("bundled mini-suite is valid")
}
