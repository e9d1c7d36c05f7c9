use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{GeometryConfig, GeometryError};
use crate::backends::{BackendSuite, KeypointSet};
use crate::error::ScoreError;
use crate::num::Scalar;
use crate::video::VideoHandle;

/// Keypoint matches between two frames that survive outlier rejection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchStats {
    #[serde(default)]
    pub frame_a: usize,
    #[serde(default)]
    pub frame_b: usize,
    pub valid_matches: usize,
}

/// Global optical-flow statistics of one video.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowStats {
    /// Mean magnitude over the sampled pairs, in pixels at the downsampled resolution.
    pub f_score: f64,
    pub per_pair: Vec<f64>,
    pub pair_step: usize,
    pub fps: f64,
    pub scale: f64,
    pub discarded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum MultiviewOutcome {
    Scored {
        score: f64,
        flow: FlowStats,
        interval: usize,
        mean_matches: f64,
        matches: Vec<MatchStats>,
    },
    Discarded {
        flow: FlowStats,
    },
}

impl MultiviewOutcome {
    pub fn score(&self) -> Option<f64> {
        match self {
            MultiviewOutcome::Scored { score, .. } => Some(*score),
            MultiviewOutcome::Discarded { .. } => None,
        }
    }
}

/// Keypoint-matching frame gap adapted to frame rate and motion.
///
/// Evaluates `floor(s_fix / ((fps/8) * (f_score/10)))`, at least 1. `f_score`
/// must already be capped and lie in `[flow_discard, flow_interval_cap]`.
pub fn matching_interval<T: Scalar>(fps: T, f_score: T, config: &GeometryConfig<T>) -> Result<usize, GeometryError> {
    if !(fps > T::zero() && fps.is_finite()) {
        return Err(GeometryError::Contract(format!("fps must be positive, got {fps}")));
    }
    if !(f_score >= config.flow_discard && f_score <= config.flow_interval_cap) {
        return Err(GeometryError::Contract(format!(
            "flow score {f_score} outside [{}, {}]",
            config.flow_discard, config.flow_interval_cap
        )));
    }
    // s_fix * 80 / (fps * f) keeps integer inputs exact.
    let raw = (config.s_fix * T::lit(80.0) / (fps * f_score)).floor();
    Ok(raw.to_usize().unwrap_or(1).max(1))
}

/// Frame step between flow samples: 1 up to 8 fps, `round(fps/8)` above.
pub fn flow_pair_step(fps: f64) -> usize {
    if fps <= 8.0 {
        1
    } else {
        ((fps / 8.0).round() as usize).max(1)
    }
}

/// Frame pairs `(k*i, (k+1)*i)` inside the clip; `(0, n-1)` when the interval exceeds it.
pub fn matching_pairs(frame_count: usize, interval: usize) -> Vec<(usize, usize)> {
    if frame_count < 2 {
        return Vec::new();
    }
    let i = interval.max(1);
    let pairs: Vec<_> = (0..)
        .map(|k| (k * i, (k + 1) * i))
        .take_while(|&(_, b)| b < frame_count)
        .collect();
    if pairs.is_empty() {
        vec![(0, frame_count - 1)]
    } else {
        pairs
    }
}

/// `min(M, match_cap)/match_cap * min(F, flow_score_cap)/flow_score_cap`.
pub fn multiview_score<T: Scalar>(mean_matches: T, f_score: T, config: &GeometryConfig<T>) -> T {
    let m = mean_matches.max(T::zero()).min(config.match_cap) / config.match_cap;
    let f = f_score.max(T::zero()).min(config.flow_score_cap) / config.flow_score_cap;
    m * f
}

fn flow_pairs(frame_count: usize, step: usize) -> Vec<(usize, usize)> {
    let pairs: Vec<_> = (0..)
        .map(|k| (k * step, (k + 1) * step))
        .take_while(|&(_, b)| b < frame_count)
        .collect();
    if pairs.is_empty() {
        vec![(0, frame_count - 1)]
    } else {
        pairs
    }
}

/// Flow-gated, flow-scaled keypoint-matching consistency of one video.
pub fn multiview_consistency(
    video: &VideoHandle,
    backend: &BackendSuite,
    config: &GeometryConfig<f64>,
) -> Result<MultiviewOutcome, ScoreError> {
    let n = video.frame_count;
    if n < 2 {
        return Err(ScoreError::Precondition(format!("{} has {n} frame(s); need 2", video.id)));
    }
    let scale = video.downsample_factor(config.target_short_side);
    let step = flow_pair_step(video.fps);
    let mut per_pair = Vec::new();
    for (a, b) in flow_pairs(n, step) {
        let m = backend
            .flow_magnitude(video, a, b, scale)
            .map_err(ScoreError::backend(format!("flow {a}->{b} on {}", video.id)))?;
        per_pair.push(m);
    }
    let f_score = per_pair.iter().sum::<f64>() / per_pair.len() as f64;
    let discarded = f_score < config.flow_discard;
    let flow = FlowStats {
        f_score,
        per_pair,
        pair_step: step,
        fps: video.fps,
        scale,
        discarded,
    };
    if discarded {
        return Ok(MultiviewOutcome::Discarded { flow });
    }
    let interval = matching_interval(video.fps, f_score.min(config.flow_interval_cap), config)?;
    let mut keypoints: BTreeMap<usize, KeypointSet> = BTreeMap::new();
    let mut matches = Vec::new();
    for (a, b) in matching_pairs(n, interval) {
        for f in [a, b] {
            if let std::collections::btree_map::Entry::Vacant(e) = keypoints.entry(f) {
                let set = backend
                    .extract_keypoints(video, f, scale)
                    .map_err(ScoreError::backend(format!("keypoints at frame {f} on {}", video.id)))?;
                e.insert(set);
            }
        }
        let m = backend
            .match_keypoints(video, &keypoints[&a], &keypoints[&b])
            .map_err(ScoreError::backend(format!("matching {a}<->{b} on {}", video.id)))?;
        matches.push(m);
    }
    let mean_matches = matches.iter().map(|m| m.valid_matches as f64).sum::<f64>() / matches.len() as f64;
    Ok(MultiviewOutcome::Scored {
        score: multiview_score(mean_matches, f_score, config),
        flow,
        interval,
        mean_matches,
        matches,
    })
}
