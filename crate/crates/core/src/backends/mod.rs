//! Capability interfaces for the perception and judgment models the scorers consume.
//!
//! [`Backend`] is the adapter trait. Scorers never call it directly; they go
//! through [`BackendSuite`], which parses judge answers, retries unparseable
//! ones once, enforces output invariants and honours the adapter's in-flight
//! limit.

mod mock;

use std::fmt;
use std::sync::{Arc, Condvar, Mutex};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::appearance::FeatureFrame;
use crate::geometry::{MatchStats, TrackGrid};
use crate::video::VideoHandle;

pub use mock::{fingerprint, mock_backend, CallRecord, MockBackend, MockEntry, MockScript};

/// Capability names, used in fingerprints, scripts and error context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Capability {
    CaptionVideo,
    AnswerBinary,
    JudgeAlignment,
    DetectObjects,
    EmbedFaces,
    TrackPoints,
    FlowMagnitude,
    ExtractKeypoints,
    MatchKeypoints,
    ExtractFeatures,
    AnomalyScore,
}

impl Capability {
    pub const ALL: [Capability; 11] = [
        Capability::CaptionVideo,
        Capability::AnswerBinary,
        Capability::JudgeAlignment,
        Capability::DetectObjects,
        Capability::EmbedFaces,
        Capability::TrackPoints,
        Capability::FlowMagnitude,
        Capability::ExtractKeypoints,
        Capability::MatchKeypoints,
        Capability::ExtractFeatures,
        Capability::AnomalyScore,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Capability::CaptionVideo => "caption_video",
            Capability::AnswerBinary => "answer_binary",
            Capability::JudgeAlignment => "judge_alignment",
            Capability::DetectObjects => "detect_objects",
            Capability::EmbedFaces => "embed_faces",
            Capability::TrackPoints => "track_points",
            Capability::FlowMagnitude => "flow_magnitude",
            Capability::ExtractKeypoints => "extract_keypoints",
            Capability::MatchKeypoints => "match_keypoints",
            Capability::ExtractFeatures => "extract_features",
            Capability::AnomalyScore => "anomaly_score",
        }
    }
}

impl fmt::Display for Capability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Answer {
    Yes,
    No,
}

/// A parsed binary judgment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub value: Answer,
    pub raw_text: String,
    /// Set when both attempts were unparseable and the verdict defaulted to no.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub protocol_failure: bool,
}

impl Verdict {
    pub fn is_yes(&self) -> bool {
        self.value == Answer::Yes
    }

    pub fn score(&self) -> f64 {
        if self.is_yes() {
            1.0
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unparseable judge output: {0:?}")]
pub struct UnparseableVerdict(pub String);

fn word_answer(word: &str) -> Option<Answer> {
    match word.to_ascii_lowercase().as_str() {
        "yes" => Some(Answer::Yes),
        "no" => Some(Answer::No),
        _ => None,
    }
}

/// Parses a judge answer.
///
/// The leading word (after punctuation and whitespace) decides; failing
/// that, the first standalone `yes`/`no` word in the text.
pub fn parse_verdict(raw: &str) -> Result<Verdict, UnparseableVerdict> {
    let mut words = raw
        .split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|w| !w.is_empty());
    let value = match words.next() {
        None => None,
        Some(first) => word_answer(first).or_else(|| words.find_map(word_answer)),
    };
    value
        .map(|value| Verdict {
            value,
            raw_text: raw.to_owned(),
            protocol_failure: false,
        })
        .ok_or_else(|| UnparseableVerdict(raw.to_owned()))
}

/// Axis-aligned pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    pub fn center(&self) -> (f64, f64) {
        (self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    pub fn contains_point(&self, (px, py): (f64, f64)) -> bool {
        px >= self.x && px <= self.x + self.w && py >= self.y && py <= self.y + self.h
    }

    /// Clips to `[0,width]x[0,height]`; `None` when nothing is left.
    pub fn clip(&self, width: f64, height: f64) -> Option<BBox> {
        let x0 = self.x.max(0.0);
        let y0 = self.y.max(0.0);
        let x1 = (self.x + self.w).min(width);
        let y1 = (self.y + self.h).min(height);
        (x1 > x0 && y1 > y0).then_some(BBox {
            x: x0,
            y: y0,
            w: x1 - x0,
            h: y1 - y0,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub label: String,
    pub confidence: f64,
    #[serde(rename = "box")]
    pub bbox: BBox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceObservation {
    #[serde(rename = "box")]
    pub bbox: BBox,
    pub embedding: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub descriptor: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeypointSet {
    pub frame: usize,
    pub keypoints: Vec<Keypoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnomalyKind {
    Body,
    Face,
    Hand,
}

impl AnomalyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AnomalyKind::Body => "body",
            AnomalyKind::Face => "face",
            AnomalyKind::Hand => "hand",
        }
    }
}

/// An image region handed to an anomaly classifier.
///
/// `instance` is the human's index among the frame's kept detections; `part`
/// indexes the face or hand within that human (0 for the body patch).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Patch {
    pub frame: usize,
    #[serde(rename = "box")]
    pub bbox: BBox,
    pub instance: usize,
    pub part: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BackendError {
    #[error("unscripted {capability} call ({key})")]
    Unscripted { capability: Capability, key: String },
    #[error("{capability} returned invalid output: {message}")]
    Invariant { capability: Capability, message: String },
    #[error("{capability} failed: {message}")]
    Transport { capability: Capability, message: String },
    #[error("backend unavailable: {0}")]
    Unavailable(String),
}

/// Adapter for one perception/judgment stack.
///
/// Implementations must be callable from several scorer threads at once.
/// `answer_binary` and `judge_alignment` return the judge's literal text.
pub trait Backend: Send + Sync {
    fn name(&self) -> &str;

    /// Maximum concurrent calls the adapter accepts; `None` for unlimited.
    fn max_in_flight(&self) -> Option<usize> {
        None
    }

    fn caption_video(&self, video: &VideoHandle, system_prompt: &str) -> Result<String, BackendError>;

    fn answer_binary(&self, video: &VideoHandle, question: &str) -> Result<String, BackendError>;

    fn judge_alignment(&self, caption: &str, reference: &str, system_prompt: &str) -> Result<String, BackendError>;

    fn detect_objects(
        &self,
        video: &VideoHandle,
        frame: usize,
        vocabulary: &[String],
        threshold: f64,
    ) -> Result<Vec<Detection>, BackendError>;

    fn embed_faces(&self, video: &VideoHandle, frame: usize) -> Result<Vec<FaceObservation>, BackendError>;

    fn track_points(&self, video: &VideoHandle, grid_size: usize) -> Result<TrackGrid<f64>, BackendError>;

    /// Mean flow magnitude between two frames after resizing by `scale`.
    fn flow_magnitude(
        &self,
        video: &VideoHandle,
        frame_a: usize,
        frame_b: usize,
        scale: f64,
    ) -> Result<f64, BackendError>;

    fn extract_keypoints(&self, video: &VideoHandle, frame: usize, scale: f64) -> Result<KeypointSet, BackendError>;

    /// Matches with outlier rejection applied.
    fn match_keypoints(
        &self,
        video: &VideoHandle,
        a: &KeypointSet,
        b: &KeypointSet,
    ) -> Result<MatchStats, BackendError>;

    fn extract_features(&self, video: &VideoHandle, frame: usize) -> Result<FeatureFrame<f64>, BackendError>;

    /// Probability that the patch shows an anomaly of `kind`.
    fn anomaly_score(&self, video: &VideoHandle, patch: &Patch, kind: AnomalyKind) -> Result<f64, BackendError>;
}

/// Counting semaphore for the adapter's in-flight limit.
struct Limiter {
    max: usize,
    active: Mutex<usize>,
    freed: Condvar,
}

struct Permit<'a>(Option<&'a Limiter>);

impl Limiter {
    fn acquire(&self) -> Permit<'_> {
        let mut n = self.active.lock().unwrap_or_else(|e| e.into_inner());
        while *n >= self.max {
            n = self.freed.wait(n).unwrap_or_else(|e| e.into_inner());
        }
        *n += 1;
        Permit(Some(self))
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        if let Some(l) = self.0 {
            let mut n = l.active.lock().unwrap_or_else(|e| e.into_inner());
            *n -= 1;
            l.freed.notify_one();
        }
    }
}

const EMBEDDING_NORM_TOL: f64 = 1e-6;

/// Validated view of a [`Backend`].
#[derive(Clone)]
pub struct BackendSuite {
    inner: Arc<dyn Backend>,
    limiter: Option<Arc<Limiter>>,
}

impl fmt::Debug for BackendSuite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BackendSuite").field("backend", &self.inner.name()).finish()
    }
}

impl BackendSuite {
    pub fn new(backend: Arc<dyn Backend>) -> Self {
        let limiter = backend.max_in_flight().map(|max| {
            Arc::new(Limiter {
                max: max.max(1),
                active: Mutex::new(0),
                freed: Condvar::new(),
            })
        });
        Self { inner: backend, limiter }
    }

    pub fn name(&self) -> &str {
        self.inner.name()
    }

    fn permit(&self) -> Permit<'_> {
        match &self.limiter {
            Some(l) => l.acquire(),
            None => Permit(None),
        }
    }

    fn judged(&self, mut call: impl FnMut() -> Result<String, BackendError>) -> Result<Verdict, BackendError> {
        let first = call()?;
        if let Ok(v) = parse_verdict(&first) {
            return Ok(v);
        }
        let second = call()?;
        Ok(parse_verdict(&second).unwrap_or(Verdict {
            value: Answer::No,
            raw_text: second,
            protocol_failure: true,
        }))
    }

    pub fn caption_video(&self, video: &VideoHandle, system_prompt: &str) -> Result<String, BackendError> {
        let _p = self.permit();
        self.inner.caption_video(video, system_prompt)
    }

    /// Asks a yes/no question about the video; unparseable answers are retried once, then count as no.
    pub fn answer_binary(&self, video: &VideoHandle, question: &str) -> Result<Verdict, BackendError> {
        self.judged(|| {
            let _p = self.permit();
            self.inner.answer_binary(video, question)
        })
    }

    pub fn judge_alignment(&self, caption: &str, reference: &str, system_prompt: &str) -> Result<Verdict, BackendError> {
        self.judged(|| {
            let _p = self.permit();
            self.inner.judge_alignment(caption, reference, system_prompt)
        })
    }

    /// Detections at or above `threshold`, boxes clipped to the frame.
    pub fn detect_objects(
        &self,
        video: &VideoHandle,
        frame: usize,
        vocabulary: &[String],
        threshold: f64,
    ) -> Result<Vec<Detection>, BackendError> {
        let raw = {
            let _p = self.permit();
            self.inner.detect_objects(video, frame, vocabulary, threshold)?
        };
        let (w, h) = (f64::from(video.width), f64::from(video.height));
        let mut out = Vec::with_capacity(raw.len());
        for d in raw {
            if !(0.0..=1.0).contains(&d.confidence) {
                return Err(BackendError::Invariant {
                    capability: Capability::DetectObjects,
                    message: format!("confidence {} outside [0,1]", d.confidence),
                });
            }
            if d.confidence < threshold {
                continue;
            }
            let bbox = d.bbox.clip(w, h).ok_or_else(|| BackendError::Invariant {
                capability: Capability::DetectObjects,
                message: format!("box {:?} lies outside the {w}x{h} frame", d.bbox),
            })?;
            out.push(Detection { bbox, ..d });
        }
        Ok(out)
    }

    pub fn embed_faces(&self, video: &VideoHandle, frame: usize) -> Result<Vec<FaceObservation>, BackendError> {
        let faces = {
            let _p = self.permit();
            self.inner.embed_faces(video, frame)?
        };
        let dim = faces.first().map(|f| f.embedding.len());
        for f in &faces {
            let norm = f.embedding.iter().map(|v| v * v).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > EMBEDDING_NORM_TOL || Some(f.embedding.len()) != dim {
                return Err(BackendError::Invariant {
                    capability: Capability::EmbedFaces,
                    message: format!("embedding must be a unit vector of fixed length (norm {norm})"),
                });
            }
        }
        Ok(faces)
    }

    pub fn track_points(&self, video: &VideoHandle, grid_size: usize) -> Result<TrackGrid<f64>, BackendError> {
        let grid = {
            let _p = self.permit();
            self.inner.track_points(video, grid_size)?
        };
        if grid.grid_size != grid_size {
            return Err(BackendError::Invariant {
                capability: Capability::TrackPoints,
                message: format!("asked for grid {grid_size}, got {}", grid.grid_size),
            });
        }
        grid.validate(Some(video.frame_count))
            .map_err(|e| BackendError::Invariant {
                capability: Capability::TrackPoints,
                message: e.to_string(),
            })?;
        Ok(grid)
    }

    pub fn flow_magnitude(&self, video: &VideoHandle, a: usize, b: usize, scale: f64) -> Result<f64, BackendError> {
        let v = {
            let _p = self.permit();
            self.inner.flow_magnitude(video, a, b, scale)?
        };
        if !(v.is_finite() && v >= 0.0) {
            return Err(BackendError::Invariant {
                capability: Capability::FlowMagnitude,
                message: format!("flow magnitude {v} must be finite and nonnegative"),
            });
        }
        Ok(v)
    }

    pub fn extract_keypoints(&self, video: &VideoHandle, frame: usize, scale: f64) -> Result<KeypointSet, BackendError> {
        let _p = self.permit();
        self.inner.extract_keypoints(video, frame, scale)
    }

    pub fn match_keypoints(&self, video: &VideoHandle, a: &KeypointSet, b: &KeypointSet) -> Result<MatchStats, BackendError> {
        let m = {
            let _p = self.permit();
            self.inner.match_keypoints(video, a, b)?
        };
        let bound = a.keypoints.len().min(b.keypoints.len());
        if m.valid_matches > bound {
            return Err(BackendError::Invariant {
                capability: Capability::MatchKeypoints,
                message: format!("{} valid matches exceed the {bound} keypoints available", m.valid_matches),
            });
        }
        Ok(MatchStats {
            frame_a: a.frame,
            frame_b: b.frame,
            ..m
        })
    }

    pub fn extract_features(&self, video: &VideoHandle, frame: usize) -> Result<FeatureFrame<f64>, BackendError> {
        let f = {
            let _p = self.permit();
            self.inner.extract_features(video, frame)?
        };
        f.validate().map_err(|message| BackendError::Invariant {
            capability: Capability::ExtractFeatures,
            message,
        })?;
        Ok(f)
    }

    pub fn anomaly_score(&self, video: &VideoHandle, patch: &Patch, kind: AnomalyKind) -> Result<f64, BackendError> {
        let p = {
            let _g = self.permit();
            self.inner.anomaly_score(video, patch, kind)?
        };
        if !(0.0..=1.0).contains(&p) {
            return Err(BackendError::Invariant {
                capability: Capability::AnomalyScore,
                message: format!("probability {p} outside [0,1]"),
            });
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_parsing() {
        assert_eq!(parse_verdict("Yes.").unwrap().value, Answer::Yes);
        assert_eq!(parse_verdict("no, the river stays blue").unwrap().value, Answer::No);
        assert_eq!(parse_verdict("  **NO**").unwrap().value, Answer::No);
        assert_eq!(parse_verdict("Answer: yes").unwrap().value, Answer::Yes);
        assert!(parse_verdict("maybe").is_err());
        assert!(parse_verdict("nothing to see").is_err());
        assert!(parse_verdict("").is_err());
    }

    #[test]
    fn bbox_clip() {
        let b = BBox { x: -5.0, y: 10.0, w: 20.0, h: 100.0 };
        assert_eq!(b.clip(100.0, 50.0), Some(BBox { x: 0.0, y: 10.0, w: 15.0, h: 40.0 }));
        assert_eq!(BBox { x: 200.0, y: 0.0, w: 5.0, h: 5.0 }.clip(100.0, 50.0), None);
    }

    proptest::proptest! {
        #[test]
        fn parse_round_trip(raw in "\\PC{0,40}") {
            if let Ok(v) = parse_verdict(&raw) {
                let again = parse_verdict(&v.raw_text).unwrap();
                proptest::prop_assert_eq!(again.value, v.value);
            }
        }
    }
}
