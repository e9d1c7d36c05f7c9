//! Routing table from dimensions to scorers.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::aggregation::{ScoreRecord, ScoreValue};
use crate::appearance::{
    anatomy_score, clothes_score, diversity_score, identity_score, instance_preservation_score,
};
use crate::assets;
use crate::backends::BackendSuite;
use crate::constants::Constants;
use crate::error::ScoreError;
use crate::geometry::{classify_camera_motion, multiview_consistency, GeometryError, MultiviewOutcome};
use crate::schemes::{run_interaction_check, run_multi_qa, run_ordered_action_match, run_sequential_alignment};
use crate::suite::{prompt_violations, DimensionId, EvalScheme, Payload, PromptSpec, QaMode, Violation};
use crate::video::VideoHandle;

/// Shape of a per-unit score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreType {
    /// 0 or 1 per video.
    Binary,
    /// A fraction in `[0, 1]` per video.
    Fraction,
    /// One score per sample set.
    SetLevel,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionBinding {
    pub dimension: DimensionId,
    pub scheme: EvalScheme,
    /// Scorer entry point, for audit.
    pub scorer: &'static str,
    /// Payload variant tag the prompts must carry.
    pub payload_schema: &'static str,
    pub score_type: ScoreType,
    /// Videos consumed per unit; the set-level binding reads the count from the payload.
    pub videos_per_unit: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qa_mode: Option<QaMode>,
    /// Whether prompts must carry a prefilter question.
    pub prefilter: bool,
    /// Questions fixed by the binding rather than the prompt.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub fixed_questions: Vec<&'static str>,
    /// Constant keys the scorer reads.
    pub constants: Vec<&'static str>,
}

impl DimensionBinding {
    /// Violations of `prompt` against this binding's payload schema.
    pub fn check_prompt(&self, prompt: &PromptSpec) -> Vec<Violation> {
        let mut out = Vec::new();
        if prompt.dimension != self.dimension {
            out.push(Violation {
                prompt_id: prompt.id.clone(),
                rule: format!("prompt dimension {} routed to {} binding", prompt.dimension, self.dimension),
            });
        }
        out.extend(prompt_violations(prompt));
        out
    }

    pub fn expected_videos(&self, prompt: &PromptSpec) -> usize {
        match self.score_type {
            ScoreType::SetLevel => prompt.videos_per_unit(),
            _ => self.videos_per_unit,
        }
    }
}

fn binding(dimension: DimensionId) -> DimensionBinding {
    use DimensionId as D;
    let scheme = dimension.scheme();
    let (scorer, score_type, constants): (&str, ScoreType, &[&str]) = match dimension {
        D::Anatomy => (
            "appearance::anatomy_score",
            ScoreType::Fraction,
            &["appearance.detect_human", "appearance.body", "appearance.face", "appearance.hand"],
        ),
        D::Identity => ("appearance::identity_score", ScoreType::Fraction, &[]),
        D::Clothes => ("appearance::clothes_score", ScoreType::Binary, &[]),
        D::Diversity => (
            "appearance::diversity_score",
            ScoreType::SetLevel,
            &["appearance.lambda", "appearance.diversity_cap", "appearance.diversity_frames"],
        ),
        D::InstancePreservation => (
            "appearance::instance_preservation_score",
            ScoreType::Fraction,
            &["appearance.detect_instance"],
        ),
        D::Composition => ("schemes::run_multi_qa", ScoreType::Fraction, &[]),
        D::DynamicSpatial
        | D::DynamicAttribute
        | D::Mechanics
        | D::Material
        | D::Thermotics
        | D::MotionRationality => ("schemes::run_multi_qa", ScoreType::Binary, &[]),
        D::MotionOrder => ("schemes::run_ordered_action_match", ScoreType::Binary, &[]),
        D::HumanInteraction => ("schemes::run_interaction_check", ScoreType::Binary, &[]),
        D::ComplexLandscape | D::ComplexPlot => ("schemes::run_sequential_alignment", ScoreType::Fraction, &[]),
        D::CameraMotion => (
            "geometry::classify_camera_motion",
            ScoreType::Binary,
            &["geometry.grid_size", "geometry.orbit_window", "geometry.tau_move", "geometry.tau_still"],
        ),
        D::MultiviewConsistency => (
            "geometry::multiview_consistency",
            ScoreType::Fraction,
            &[
                "geometry.s_fix",
                "geometry.flow_discard",
                "geometry.flow_interval_cap",
                "geometry.flow_score_cap",
                "geometry.match_cap",
                "geometry.target_short_side",
            ],
        ),
    };
    let qa_mode = match dimension {
        D::Composition => Some(QaMode::Mean),
        D::Clothes | D::DynamicSpatial | D::DynamicAttribute | D::MotionRationality => Some(QaMode::All),
        // State-change prompts carry their mode in the payload.
        _ => None,
    };
    DimensionBinding {
        dimension,
        scheme,
        scorer,
        payload_schema: scheme.as_str(),
        score_type,
        videos_per_unit: if dimension == D::Diversity { 20 } else { 1 },
        qa_mode,
        prefilter: matches!(dimension, D::Composition | D::Mechanics | D::Material | D::Thermotics),
        fixed_questions: if dimension == D::Clothes {
            assets::CLOTHES_QUESTIONS.to_vec()
        } else {
            Vec::new()
        },
        constants: constants.to_vec(),
    }
}

/// The 18 canonical bindings, in taxonomy order.
pub fn default_registry() -> Vec<DimensionBinding> {
    DimensionId::ALL.iter().map(|d| binding(*d)).collect()
}

pub fn binding_for(dim: DimensionId) -> DimensionBinding {
    binding(dim)
}

/// Model and sample slot a record belongs to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordKey {
    pub model: String,
    pub sample: usize,
}

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("prompt {prompt_id} is {found}, binding is {expected}")]
    DimensionMismatch {
        prompt_id: String,
        expected: DimensionId,
        found: DimensionId,
    },
    #[error("prompt {prompt_id} needs {expected} video(s), got {found}")]
    Cardinality {
        prompt_id: String,
        expected: usize,
        found: usize,
    },
    #[error("{dimension} / {prompt_id}: {source}")]
    Scorer {
        dimension: DimensionId,
        prompt_id: String,
        #[source]
        source: ScoreError,
    },
}

impl RegistryError {
    pub fn is_backend(&self) -> bool {
        matches!(self, RegistryError::Scorer { source, .. } if source.is_backend())
    }
}

fn system_prompt(id: &Option<String>, default: &'static str) -> String {
    let id = id.as_deref().unwrap_or(default);
    assets::resolve(id).unwrap_or(id).to_owned()
}

fn evidence<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("evidence serializes")
}

/// Scores one unit and wraps the result in a record.
///
/// Content-level failures (no humans, no anchor face) become unscorable
/// records; backend and precondition failures are errors.
pub fn score_video(
    binding: &DimensionBinding,
    prompt: &PromptSpec,
    videos: &[VideoHandle],
    backend: &BackendSuite,
    constants: &Constants,
    key: &RecordKey,
) -> Result<ScoreRecord, RegistryError> {
    if prompt.dimension != binding.dimension {
        return Err(RegistryError::DimensionMismatch {
            prompt_id: prompt.id.clone(),
            expected: binding.dimension,
            found: prompt.dimension,
        });
    }
    let expected = binding.expected_videos(prompt);
    if videos.len() != expected {
        return Err(RegistryError::Cardinality {
            prompt_id: prompt.id.clone(),
            expected,
            found: videos.len(),
        });
    }
    let record = |value: ScoreValue, evidence: Value| ScoreRecord {
        prompt_id: prompt.id.clone(),
        dimension: prompt.dimension,
        model: key.model.clone(),
        sample: key.sample,
        value,
        evidence,
    };
    match dispatch(binding, prompt, videos, backend, constants) {
        Ok((value, ev)) => Ok(record(value, ev)),
        Err(ScoreError::Unscorable(reason)) => Ok(record(ScoreValue::Unscorable(reason), Value::Null)),
        Err(source) => Err(RegistryError::Scorer {
            dimension: prompt.dimension,
            prompt_id: prompt.id.clone(),
            source,
        }),
    }
}

fn mismatch(prompt: &PromptSpec) -> ScoreError {
    ScoreError::Precondition(format!(
        "payload scheme {} does not match dimension {}",
        prompt.payload.scheme(),
        prompt.dimension
    ))
}

fn dispatch(
    binding: &DimensionBinding,
    prompt: &PromptSpec,
    videos: &[VideoHandle],
    backend: &BackendSuite,
    constants: &Constants,
) -> Result<(ScoreValue, Value), ScoreError> {
    use DimensionId as D;
    let video = &videos[0];
    let app = &constants.appearance;
    let geo = &constants.geometry;
    match (binding.dimension, &prompt.payload) {
        (D::Anatomy, Payload::AnatomyDetect {}) => {
            let c = anatomy_score(video, backend, app)?;
            Ok((ScoreValue::Score(c.score), evidence(&c)))
        }
        (D::Identity, Payload::IdentityTrack {}) => {
            let t = identity_score(video, backend)?;
            Ok((ScoreValue::Score(t.score), evidence(&t)))
        }
        (D::Clothes, Payload::MultiQa { .. }) => {
            let q = clothes_score(video, backend)?;
            Ok((ScoreValue::Score(q.score), evidence(&q)))
        }
        (D::Diversity, Payload::DiversitySet { .. }) => {
            let r = diversity_score(videos, backend, app)?;
            Ok((ScoreValue::Score(r.normalized), evidence(&r)))
        }
        (D::InstancePreservation, Payload::InstanceCount { expected_count, vocabulary }) => {
            let r = instance_preservation_score(video, *expected_count, vocabulary, backend, app.detect_instance)?;
            Ok((ScoreValue::Score(r.score), evidence(&r)))
        }
        (_, Payload::MultiQa { questions, mode, prefilter }) => {
            let q = run_multi_qa(video, questions, *mode, prefilter.as_deref(), backend)?;
            let mut ev = evidence(&q);
            ev["prefilter_failed"] = json!(q.prefilter_failed());
            Ok((ScoreValue::Score(q.score), ev))
        }
        (D::MotionOrder, Payload::OrderedAction { action_a, action_b }) => {
            let o = run_ordered_action_match(video, action_a, action_b, backend)?;
            Ok((ScoreValue::Score(o.score), evidence(&o)))
        }
        (D::HumanInteraction, Payload::InteractionCheck {}) => {
            let o = run_interaction_check(video, &prompt.text, backend)?;
            Ok((ScoreValue::Score(o.score), evidence(&o)))
        }
        (D::ComplexPlot | D::ComplexLandscape, Payload::SequentialAlignment { segments, vlm_prompt, llm_prompt }) => {
            let default_vlm = if binding.dimension == D::ComplexLandscape {
                assets::LANDSCAPE_TEMPLATE_5
            } else {
                assets::plot_template_for(segments.len())
            };
            let o = run_sequential_alignment(
                video,
                segments,
                &system_prompt(vlm_prompt, default_vlm),
                &system_prompt(llm_prompt, assets::ALIGNMENT_JUDGE),
                backend,
            )?;
            Ok((ScoreValue::Score(o.score), evidence(&o)))
        }
        (D::CameraMotion, Payload::CameraTrack { target }) => {
            let tracks = backend
                .track_points(video, geo.grid_size)
                .map_err(ScoreError::backend(format!("tracks on {}", video.id)))?;
            match classify_camera_motion(&tracks, *target, geo) {
                Ok(o) => Ok((ScoreValue::Score(o.score), evidence(&o))),
                Err(GeometryError::Degenerate(reason)) => Ok((
                    ScoreValue::Score(0.0),
                    json!({"target": target, "degenerate": reason}),
                )),
                Err(e) => Err(e.into()),
            }
        }
        (D::MultiviewConsistency, Payload::MultiviewGeometry {}) => {
            let o = multiview_consistency(video, backend, geo)?;
            let value = match &o {
                MultiviewOutcome::Scored { score, .. } => ScoreValue::Score(*score),
                MultiviewOutcome::Discarded { .. } => ScoreValue::Discarded,
            };
            Ok((value, evidence(&o)))
        }
        _ => Err(mismatch(prompt)),
    }
}
