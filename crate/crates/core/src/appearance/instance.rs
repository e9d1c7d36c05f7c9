use serde::{Deserialize, Serialize};

use crate::backends::{BackendSuite, Detection};
use crate::error::ScoreError;
use crate::video::VideoHandle;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceOutcome {
    pub expected_count: usize,
    pub per_frame_counts: Vec<usize>,
    pub correct_frames: usize,
    pub score: f64,
}

/// Detections at or above `threshold`.
pub fn count_confident(detections: &[Detection], threshold: f64) -> usize {
    detections.iter().filter(|d| d.confidence >= threshold).count()
}

/// Fraction of frames whose count equals `expected`.
pub fn instance_from_counts(counts: &[usize], expected: usize) -> InstanceOutcome {
    let correct = counts.iter().filter(|&&c| c == expected).count();
    InstanceOutcome {
        expected_count: expected,
        per_frame_counts: counts.to_vec(),
        correct_frames: correct,
        score: if counts.is_empty() {
            0.0
        } else {
            correct as f64 / counts.len() as f64
        },
    }
}

/// Per-frame entity counting against the expected count.
pub fn instance_preservation_score(
    video: &VideoHandle,
    expected_count: usize,
    vocabulary: &[String],
    backend: &BackendSuite,
    threshold: f64,
) -> Result<InstanceOutcome, ScoreError> {
    if expected_count == 0 {
        return Err(ScoreError::Precondition("expected count must be at least 1".into()));
    }
    if vocabulary.is_empty() {
        return Err(ScoreError::Precondition("detection vocabulary is empty".into()));
    }
    if video.frame_count == 0 {
        return Err(ScoreError::Precondition(format!("{} has no frames", video.id)));
    }
    let mut counts = Vec::with_capacity(video.frame_count);
    for frame in 0..video.frame_count {
        let dets = backend
            .detect_objects(video, frame, vocabulary, threshold)
            .map_err(ScoreError::backend(format!("detection at frame {frame} on {}", video.id)))?;
        counts.push(count_confident(&dets, threshold));
    }
    Ok(instance_from_counts(&counts, expected_count))
}
