//! Scorers over detections, face embeddings, anomaly probabilities and deep features.

mod anatomy;
mod diversity;
mod identity;
mod instance;

use serde::{Deserialize, Serialize};

use crate::assets::CLOTHES_QUESTIONS;
use crate::backends::BackendSuite;
use crate::error::ScoreError;
use crate::num::Scalar;
use crate::schemes::{run_multi_qa, QaOutcome};
use crate::suite::QaMode;
use crate::video::VideoHandle;

pub use anatomy::{anatomy_from_instances, anatomy_score, instance_abnormal, AnatomyCounts, InstanceReport};
pub use diversity::{
    diversity_from_frames, diversity_from_samples, diversity_score, gram, normalize_diversity, DiversityResult, SampleFeatures,
};
pub use identity::{cosine, identity_from_faces, identity_score, FrameStatus, IdentityTrace};
pub use instance::{count_confident, instance_from_counts, instance_preservation_score, InstanceOutcome};

/// Number of style layers in a [`FeatureFrame`].
pub const STYLE_LAYERS: usize = 5;

/// One feature map, stored channel-major: `data[c * height * width + i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTensor<T> {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> FeatureTensor<T> {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<T>) -> Self {
        Self {
            channels,
            height,
            width,
            data,
        }
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }

    pub fn len(&self) -> usize {
        self.channels * self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.is_empty() {
            return Err(format!("feature shape {:?} has a zero dimension", self.shape()));
        }
        if self.data.len() != self.len() {
            return Err(format!(
                "feature shape {:?} needs {} values, got {}",
                self.shape(),
                self.len(),
                self.data.len()
            ));
        }
        if self.data.iter().any(|v| !v.is_finite()) {
            return Err("feature values must be finite".into());
        }
        Ok(())
    }
}

/// Style and content features of one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureFrame<T> {
    pub style_features: Vec<FeatureTensor<T>>,
    pub content_feature: FeatureTensor<T>,
}

impl<T: Scalar> FeatureFrame<T> {
    pub fn validate(&self) -> Result<(), String> {
        if self.style_features.len() != STYLE_LAYERS {
            return Err(format!(
                "expected {STYLE_LAYERS} style layers, got {}",
                self.style_features.len()
            ));
        }
        for (l, t) in self.style_features.iter().enumerate() {
            t.validate().map_err(|e| format!("style layer {l}: {e}"))?;
        }
        self.content_feature.validate().map_err(|e| format!("content: {e}"))
    }

    /// Per-layer style shapes followed by the content shape.
    pub fn shapes(&self) -> Vec<(usize, usize, usize)> {
        self.style_features
            .iter()
            .chain(std::iter::once(&self.content_feature))
            .map(FeatureTensor::shape)
            .collect()
    }
}

/// Thresholds and constants of the appearance scorers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AppearanceConfig {
    /// Minimum confidence for human, face and hand detections (inclusive).
    pub detect_human: f64,
    /// Anomaly probability above which a body patch is abnormal.
    pub body: f64,
    pub face: f64,
    pub hand: f64,
    /// Minimum confidence for instance-count detections (inclusive).
    pub detect_instance: f64,
    /// Weight of the style term in the raw diversity score.
    pub lambda: f64,
    /// Raw diversity mapped to 1.0.
    pub diversity_cap: f64,
    /// Frames sampled per video for diversity features.
    pub diversity_frames: usize,
}

impl Default for AppearanceConfig {
    fn default() -> Self {
        Self {
            detect_human: 0.1,
            body: 0.45,
            face: 0.30,
            hand: 0.32,
            detect_instance: 0.28,
            lambda: 1000.0,
            diversity_cap: 17.712,
            diversity_frames: 8,
        }
    }
}

/// Clothes consistency: the three fixed questions, all must pass.
pub fn clothes_score(video: &VideoHandle, backend: &BackendSuite) -> Result<QaOutcome, ScoreError> {
    let questions: Vec<String> = CLOTHES_QUESTIONS.iter().map(|q| (*q).to_owned()).collect();
    run_multi_qa(video, &questions, QaMode::All, None, backend)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::{mock_backend, MockScript};

    fn tensor(c: usize, h: usize, w: usize) -> FeatureTensor<f64> {
        FeatureTensor::new(c, h, w, vec![0.5; c * h * w])
    }

    #[test]
    fn feature_frame_validation() {
        let good = FeatureFrame {
            style_features: (0..5).map(|_| tensor(2, 2, 2)).collect(),
            content_feature: tensor(3, 1, 1),
        };
        assert!(good.validate().is_ok());
        let mut short = good.clone();
        short.style_features.pop();
        assert!(short.validate().is_err());
        let mut nan = good.clone();
        nan.content_feature.data[0] = f64::NAN;
        assert!(nan.validate().is_err());
        let mut wrong = good;
        wrong.style_features[2].data.pop();
        assert!(wrong.validate().is_err());
    }

    fn clothes(answers: [&str; 3]) -> f64 {
        let id = "m/clothes/c/0";
        let mut s = MockScript::strict();
        for (q, a) in CLOTHES_QUESTIONS.iter().zip(answers) {
            s.answer(id, q, a);
        }
        let (b, _) = mock_backend(s);
        clothes_score(&VideoHandle::virtual_clip(id, 8.0, 64, 64, 8), &b).unwrap().score
    }

    #[test]
    fn clothes_cases() {
        assert_eq!(clothes(["yes", "yes", "yes"]), 1.0);
        assert_eq!(clothes(["yes", "yes", "no"]), 0.0);
        assert_eq!(clothes(["no", "yes", "yes"]), 0.0);
    }
}
