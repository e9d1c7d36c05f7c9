use serde::{Deserialize, Serialize};

use crate::backends::BackendSuite;
use crate::error::ScoreError;
use crate::num::Scalar;
use crate::video::VideoHandle;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FrameStatus<T> {
    Valid { similarity: T },
    SkippedMulti { faces: usize },
    SkippedNone,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityTrace<T> {
    pub anchor: Vec<T>,
    /// Status of frames 1.., in order.
    pub frames: Vec<FrameStatus<T>>,
    pub valid_frames: usize,
    pub score: T,
}

pub fn cosine<T: Scalar>(a: &[T], b: &[T]) -> T {
    let dot: T = a.iter().zip(b).map(|(x, y)| *x * *y).sum();
    let na: T = a.iter().map(|x| *x * *x).sum::<T>().sqrt();
    let nb: T = b.iter().map(|x| *x * *x).sum::<T>().sqrt();
    if na == T::zero() || nb == T::zero() {
        return T::zero();
    }
    (dot / (na * nb)).max(-T::one()).min(T::one())
}

/// Scores identity from the face embeddings found in each frame, frame 0 first.
///
/// Frame 0 must show exactly one face. Later frames with any other face
/// count are skipped. The mean similarity is clamped to `[0, 1]`.
pub fn identity_from_faces<T: Scalar>(per_frame: &[Vec<Vec<T>>]) -> Result<IdentityTrace<T>, ScoreError> {
    let Some(first) = per_frame.first() else {
        return Err(ScoreError::Unscorable("video has no frames".into()));
    };
    if first.len() != 1 {
        return Err(ScoreError::Unscorable(format!(
            "anchor frame shows {} faces; exactly one is required",
            first.len()
        )));
    }
    let anchor = first[0].clone();
    let frames: Vec<FrameStatus<T>> = per_frame[1..]
        .iter()
        .map(|faces| match faces.len() {
            0 => FrameStatus::SkippedNone,
            1 => FrameStatus::Valid {
                similarity: cosine(&anchor, &faces[0]),
            },
            n => FrameStatus::SkippedMulti { faces: n },
        })
        .collect();
    let sims: Vec<T> = frames
        .iter()
        .filter_map(|f| match f {
            FrameStatus::Valid { similarity } => Some(*similarity),
            _ => None,
        })
        .collect();
    if sims.is_empty() {
        return Err(ScoreError::Unscorable("no later frame shows exactly one face".into()));
    }
    let mean = sims.iter().copied().sum::<T>() / T::from_usize_lossy(sims.len());
    Ok(IdentityTrace {
        anchor,
        valid_frames: sims.len(),
        frames,
        score: mean.max(T::zero()).min(T::one()),
    })
}

/// Identity consistency against the frame-0 face.
pub fn identity_score(video: &VideoHandle, backend: &BackendSuite) -> Result<IdentityTrace<f64>, ScoreError> {
    let mut per_frame = Vec::with_capacity(video.frame_count);
    for frame in 0..video.frame_count {
        let faces = backend
            .embed_faces(video, frame)
            .map_err(ScoreError::backend(format!("faces at frame {frame} on {}", video.id)))?;
        if frame == 0 && faces.len() != 1 {
            return Err(ScoreError::Unscorable(format!(
                "anchor frame shows {} faces; exactly one is required",
                faces.len()
            )));
        }
        per_frame.push(faces.into_iter().map(|f| f.embedding).collect());
    }
    identity_from_faces(&per_frame)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit(theta: f64) -> Vec<f64> {
        vec![theta.cos(), theta.sin(), 0.0]
    }

    #[test]
    fn identical_embeddings_score_one() {
        let frames: Vec<Vec<Vec<f64>>> = (0..6).map(|_| vec![unit(0.3)]).collect();
        assert!((identity_from_faces(&frames).unwrap().score - 1.0).abs() < 1e-12);
    }

    #[test]
    fn half_and_half_mean() {
        let half = std::f64::consts::FRAC_PI_3; // cos = 0.5
        let mut frames = vec![vec![unit(0.0)]];
        frames.extend((0..4).map(|i| vec![if i % 2 == 0 { unit(0.0) } else { unit(half) }]));
        let t = identity_from_faces(&frames).unwrap();
        assert!((t.score - 0.75).abs() < 1e-12);
    }

    #[test]
    fn multi_and_none_skipped() {
        let frames = vec![
            vec![unit(0.0)],
            vec![unit(0.0), unit(1.0)],
            vec![],
            vec![unit(0.0)],
        ];
        let t = identity_from_faces(&frames).unwrap();
        assert_eq!(t.valid_frames, 1);
        assert_eq!(t.frames[0], FrameStatus::SkippedMulti { faces: 2 });
        assert_eq!(t.frames[1], FrameStatus::SkippedNone);
        assert_eq!(t.score, 1.0);
    }

    #[test]
    fn anchor_rules_and_clamp() {
        assert!(matches!(
            identity_from_faces(&[vec![unit(0.0), unit(1.0)], vec![unit(0.0)]]),
            Err(ScoreError::Unscorable(_))
        ));
        assert!(matches!(identity_from_faces::<f64>(&[vec![], vec![]]), Err(ScoreError::Unscorable(_))));
        let opposite = vec![vec![unit(0.0)], vec![unit(std::f64::consts::PI)]];
        assert_eq!(identity_from_faces(&opposite).unwrap().score, 0.0);
    }

    proptest! {
        #[test]
        fn rotation_invariant(angles in proptest::collection::vec(-3.0f64..3.0, 2..10), rot in -3.0f64..3.0) {
            let frames: Vec<Vec<Vec<f64>>> = angles.iter().map(|&a| vec![unit(a)]).collect();
            let rotated: Vec<Vec<Vec<f64>>> = angles.iter().map(|&a| vec![unit(a + rot)]).collect();
            let a = identity_from_faces(&frames).unwrap().score;
            let b = identity_from_faces(&rotated).unwrap().score;
            prop_assert!((a - b).abs() < 1e-9);
            prop_assert!((0.0..=1.0).contains(&a));
        }
    }
}
