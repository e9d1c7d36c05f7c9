//! Scripted replay backend.
//!
//! A script maps `(capability, semantic inputs)` to canned outputs:
//!
//! ```json
//! { "strict": true,
//!   "entries": [
//!     { "capability": "answer_binary",
//!       "inputs": { "video": "m/mechanics/mech_01/0", "question": "Is the environment in space?" },
//!       "output": "yes" } ] }
//! ```
//!
//! Frame-indexed inputs (`frame`, `frame_a`, `frame_b`, `instance`, `part`)
//! may be `"*"`; a `system_prompt` may name a prompt asset instead of its
//! text, or be `"*"`. Lookups try the exact key, then the key with frame
//! fields wildcarded, then additionally with the system prompt wildcarded.
//! Entries sharing a key replay in order; the last one repeats.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::{Arc, Mutex};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{
    AnomalyKind, Backend, BackendError, BackendSuite, Capability, Detection, FaceObservation, KeypointSet, Patch,
};
use crate::appearance::FeatureFrame;
use crate::assets;
use crate::geometry::{MatchStats, TrackGrid};
use crate::video::VideoHandle;

const FRAME_KEYS: &[&str] = &["frame", "frame_a", "frame_b", "instance", "part"];
const WILDCARD: &str = "*";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockEntry {
    pub capability: Capability,
    pub inputs: BTreeMap<String, String>,
    pub output: serde_json::Value,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MockScript {
    #[serde(default)]
    pub strict: bool,
    #[serde(default)]
    pub entries: Vec<MockEntry>,
}

impl MockScript {
    pub fn strict() -> Self {
        Self {
            strict: true,
            entries: Vec::new(),
        }
    }

    pub fn lenient() -> Self {
        Self::default()
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn push<I, K, V>(&mut self, capability: Capability, inputs: I, output: impl Serialize) -> &mut Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        self.entries.push(MockEntry {
            capability,
            inputs: inputs.into_iter().map(|(k, v)| (k.into(), v.into())).collect(),
            output: serde_json::to_value(output).expect("mock output serializes"),
        });
        self
    }

    /// Scripts `answer_binary(video, question)`.
    pub fn answer(&mut self, video: &str, question: &str, raw: &str) -> &mut Self {
        self.push(Capability::AnswerBinary, [("video", video), ("question", question)], raw)
    }

    /// Scripts `caption_video(video, system_prompt)`; `system_prompt` may be an asset id.
    pub fn caption(&mut self, video: &str, system_prompt: &str, caption: &str) -> &mut Self {
        self.push(
            Capability::CaptionVideo,
            [("video", video), ("system_prompt", system_prompt)],
            caption,
        )
    }

    /// Scripts `judge_alignment(caption, reference, system_prompt)`.
    pub fn judge(&mut self, caption: &str, reference: &str, system_prompt: &str, raw: &str) -> &mut Self {
        self.push(
            Capability::JudgeAlignment,
            [("caption", caption), ("reference", reference), ("system_prompt", system_prompt)],
            raw,
        )
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("script serializes")
    }
}

/// One observed backend call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CallRecord {
    pub capability: Capability,
    pub inputs: BTreeMap<String, String>,
}

/// Stable fingerprint: capability name plus a SHA-256 prefix of the canonical inputs.
pub fn fingerprint(capability: Capability, inputs: &BTreeMap<String, String>) -> String {
    let mut hasher = Sha256::new();
    for (k, v) in inputs {
        hasher.update(k.as_bytes());
        hasher.update([0x1f]);
        hasher.update(v.as_bytes());
        hasher.update([0x1e]);
    }
    let digest = hasher.finalize();
    let hex: String = digest.iter().take(12).map(|b| format!("{b:02x}")).collect();
    format!("{capability}:{hex}")
}

fn canonical(mut inputs: BTreeMap<String, String>) -> BTreeMap<String, String> {
    if let Some(sp) = inputs.get_mut("system_prompt") {
        if let Some(text) = assets::resolve(sp) {
            *sp = text.to_owned();
        }
    }
    inputs
}

fn wildcard_levels(inputs: &BTreeMap<String, String>) -> Vec<BTreeMap<String, String>> {
    let mut levels = vec![inputs.clone()];
    let mut frames = inputs.clone();
    for k in FRAME_KEYS {
        if let Some(v) = frames.get_mut(*k) {
            *v = WILDCARD.into();
        }
    }
    if frames != *inputs {
        levels.push(frames.clone());
    }
    if let Some(sp) = frames.get_mut("system_prompt") {
        *sp = WILDCARD.into();
        levels.push(frames);
    }
    levels
}

/// Deterministic replay of a [`MockScript`]; records every call.
pub struct MockBackend {
    strict: bool,
    table: HashMap<String, Vec<serde_json::Value>>,
    cursors: Mutex<HashMap<String, usize>>,
    calls: Mutex<Vec<CallRecord>>,
}

impl MockBackend {
    pub fn new(script: MockScript) -> Self {
        let mut table: HashMap<String, Vec<serde_json::Value>> = HashMap::new();
        for e in script.entries {
            let key = fingerprint(e.capability, &canonical(e.inputs));
            table.entry(key).or_default().push(e.output);
        }
        Self {
            strict: script.strict,
            table,
            cursors: Mutex::new(HashMap::new()),
            calls: Mutex::new(Vec::new()),
        }
    }

    pub fn calls(&self) -> Vec<CallRecord> {
        self.calls.lock().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn call_count(&self, capability: Capability) -> usize {
        self.calls
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .iter()
            .filter(|c| c.capability == capability)
            .count()
    }

    fn replay(&self, capability: Capability, inputs: BTreeMap<String, String>) -> Option<serde_json::Value> {
        let inputs = canonical(inputs);
        self.calls
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .push(CallRecord {
                capability,
                inputs: inputs.clone(),
            });
        for level in wildcard_levels(&inputs) {
            let key = fingerprint(capability, &level);
            if let Some(outputs) = self.table.get(&key) {
                let mut cursors = self.cursors.lock().unwrap_or_else(|e| e.into_inner());
                let i = cursors.entry(key).or_insert(0);
                let out = outputs[(*i).min(outputs.len() - 1)].clone();
                *i += 1;
                return Some(out);
            }
        }
        None
    }

    fn lookup<T: DeserializeOwned>(
        &self,
        capability: Capability,
        inputs: &[(&str, String)],
        default: impl FnOnce() -> Option<T>,
    ) -> Result<T, BackendError> {
        let map: BTreeMap<String, String> = inputs.iter().map(|(k, v)| ((*k).to_owned(), v.clone())).collect();
        match self.replay(capability, map.clone()) {
            Some(value) => serde_json::from_value(value).map_err(|e| BackendError::Invariant {
                capability,
                message: format!("scripted output does not decode: {e}"),
            }),
            None => {
                let unscripted = || BackendError::Unscripted {
                    capability,
                    key: map
                        .iter()
                        .map(|(k, v)| format!("{k}={}", truncate(v)))
                        .collect::<Vec<_>>()
                        .join(", "),
                };
                if self.strict {
                    Err(unscripted())
                } else {
                    default().ok_or_else(unscripted)
                }
            }
        }
    }
}

fn truncate(s: &str) -> String {
    if s.chars().count() > 48 {
        format!("{}...", s.chars().take(48).collect::<String>())
    } else {
        s.to_owned()
    }
}

impl Backend for MockBackend {
    fn name(&self) -> &str {
        "mock"
    }

    fn caption_video(&self, video: &VideoHandle, system_prompt: &str) -> Result<String, BackendError> {
        self.lookup(
            Capability::CaptionVideo,
            &[("video", video.id.clone()), ("system_prompt", system_prompt.to_owned())],
            || Some(String::new()),
        )
    }

    fn answer_binary(&self, video: &VideoHandle, question: &str) -> Result<String, BackendError> {
        self.lookup(
            Capability::AnswerBinary,
            &[("video", video.id.clone()), ("question", question.to_owned())],
            || Some("no".into()),
        )
    }

    fn judge_alignment(&self, caption: &str, reference: &str, system_prompt: &str) -> Result<String, BackendError> {
        self.lookup(
            Capability::JudgeAlignment,
            &[
                ("caption", caption.to_owned()),
                ("reference", reference.to_owned()),
                ("system_prompt", system_prompt.to_owned()),
            ],
            || Some("no".into()),
        )
    }

    fn detect_objects(
        &self,
        video: &VideoHandle,
        frame: usize,
        vocabulary: &[String],
        _threshold: f64,
    ) -> Result<Vec<Detection>, BackendError> {
        self.lookup(
            Capability::DetectObjects,
            &[
                ("video", video.id.clone()),
                ("frame", frame.to_string()),
                ("vocabulary", vocabulary.join("|")),
            ],
            || Some(Vec::new()),
        )
    }

    fn embed_faces(&self, video: &VideoHandle, frame: usize) -> Result<Vec<FaceObservation>, BackendError> {
        self.lookup(
            Capability::EmbedFaces,
            &[("video", video.id.clone()), ("frame", frame.to_string())],
            || Some(Vec::new()),
        )
    }

    fn track_points(&self, video: &VideoHandle, grid_size: usize) -> Result<TrackGrid<f64>, BackendError> {
        self.lookup(
            Capability::TrackPoints,
            &[("video", video.id.clone()), ("grid_size", grid_size.to_string())],
            || {
                Some(TrackGrid::stationary(
                    grid_size,
                    f64::from(video.width),
                    f64::from(video.height),
                    video.frame_count,
                ))
            },
        )
    }

    fn flow_magnitude(&self, video: &VideoHandle, frame_a: usize, frame_b: usize, _scale: f64) -> Result<f64, BackendError> {
        self.lookup(
            Capability::FlowMagnitude,
            &[
                ("video", video.id.clone()),
                ("frame_a", frame_a.to_string()),
                ("frame_b", frame_b.to_string()),
            ],
            || Some(0.0),
        )
    }

    fn extract_keypoints(&self, video: &VideoHandle, frame: usize, _scale: f64) -> Result<KeypointSet, BackendError> {
        let mut set: KeypointSet = self.lookup(
            Capability::ExtractKeypoints,
            &[("video", video.id.clone()), ("frame", frame.to_string())],
            || {
                Some(KeypointSet {
                    frame,
                    keypoints: Vec::new(),
                })
            },
        )?;
        set.frame = frame;
        Ok(set)
    }

    fn match_keypoints(&self, video: &VideoHandle, a: &KeypointSet, b: &KeypointSet) -> Result<MatchStats, BackendError> {
        self.lookup(
            Capability::MatchKeypoints,
            &[
                ("video", video.id.clone()),
                ("frame_a", a.frame.to_string()),
                ("frame_b", b.frame.to_string()),
            ],
            || {
                Some(MatchStats {
                    frame_a: a.frame,
                    frame_b: b.frame,
                    valid_matches: 0,
                })
            },
        )
    }

    fn extract_features(&self, video: &VideoHandle, frame: usize) -> Result<FeatureFrame<f64>, BackendError> {
        self.lookup(
            Capability::ExtractFeatures,
            &[("video", video.id.clone()), ("frame", frame.to_string())],
            || None,
        )
    }

    fn anomaly_score(&self, video: &VideoHandle, patch: &Patch, kind: AnomalyKind) -> Result<f64, BackendError> {
        self.lookup(
            Capability::AnomalyScore,
            &[
                ("video", video.id.clone()),
                ("frame", patch.frame.to_string()),
                ("instance", patch.instance.to_string()),
                ("part", patch.part.to_string()),
                ("kind", kind.as_str().to_owned()),
            ],
            || Some(0.0),
        )
    }
}

/// Wraps a script as a validated suite; also returns the mock for call inspection.
pub fn mock_backend(script: MockScript) -> (BackendSuite, Arc<MockBackend>) {
    let mock = Arc::new(MockBackend::new(script));
    (BackendSuite::new(mock.clone()), mock)
}
