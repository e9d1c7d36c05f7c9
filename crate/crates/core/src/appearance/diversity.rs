use serde::{Deserialize, Serialize};

use super::{AppearanceConfig, FeatureFrame, FeatureTensor};
use crate::backends::BackendSuite;
use crate::error::ScoreError;
use crate::num::Scalar;
use crate::video::VideoHandle;

/// Normalized Gram matrix `F Fᵀ / (C H W)` of a channel-major feature map, row-major `C x C`.
pub fn gram<T: Scalar>(t: &FeatureTensor<T>) -> Vec<T> {
    let c = t.channels;
    let hw = t.height * t.width;
    let norm = T::from_usize_lossy(t.len());
    let mut g = vec![T::zero(); c * c];
    for a in 0..c {
        let ra = &t.data[a * hw..(a + 1) * hw];
        for b in a..c {
            let rb = &t.data[b * hw..(b + 1) * hw];
            let v = ra.iter().zip(rb).map(|(x, y)| *x * *y).sum::<T>() / norm;
            g[a * c + b] = v;
            g[b * c + a] = v;
        }
    }
    g
}

/// Per-video features entering the pairwise distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleFeatures<T> {
    /// One Gram matrix per style layer.
    pub grams: Vec<Vec<T>>,
    pub content: FeatureTensor<T>,
}

impl<T: Scalar> SampleFeatures<T> {
    /// Averages per-frame Gram matrices and content maps.
    pub fn from_frames(frames: &[FeatureFrame<T>]) -> Result<Self, ScoreError> {
        let Some(first) = frames.first() else {
            return Err(ScoreError::Precondition("no feature frames".into()));
        };
        let shapes = first.shapes();
        if frames.iter().any(|f| f.shapes() != shapes) {
            return Err(ScoreError::Precondition(
                "contract violation: feature shapes differ between frames".into(),
            ));
        }
        let n = T::from_usize_lossy(frames.len());
        let mut grams: Vec<Vec<T>> = first.style_features.iter().map(|t| vec![T::zero(); t.channels * t.channels]).collect();
        let mut content = vec![T::zero(); first.content_feature.data.len()];
        for f in frames {
            for (acc, t) in grams.iter_mut().zip(&f.style_features) {
                for (a, v) in acc.iter_mut().zip(gram(t)) {
                    *a = *a + v / n;
                }
            }
            for (a, v) in content.iter_mut().zip(&f.content_feature.data) {
                *a = *a + *v / n;
            }
        }
        let (c, h, w) = first.content_feature.shape();
        Ok(Self {
            grams,
            content: FeatureTensor::new(c, h, w, content),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversityResult<T> {
    pub samples: usize,
    pub pairs: usize,
    pub style_diff: T,
    pub content_diff: T,
    pub raw: T,
    pub normalized: T,
}

/// Mean pairwise style and content distance over a sample set.
///
/// Style distance is the summed squared Frobenius distance of the layer
/// Grams; content distance is the mean absolute difference of the content maps.
pub fn diversity_from_samples<T: Scalar>(
    samples: &[SampleFeatures<T>],
    lambda: T,
    cap: T,
) -> Result<DiversityResult<T>, ScoreError> {
    if samples.len() < 2 {
        return Err(ScoreError::Precondition(format!(
            "diversity needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    let first = &samples[0];
    let layer_sizes: Vec<usize> = first.grams.iter().map(Vec::len).collect();
    for s in samples {
        if s.grams.iter().map(Vec::len).collect::<Vec<_>>() != layer_sizes || s.content.shape() != first.content.shape() {
            return Err(ScoreError::Precondition(
                "contract violation: feature shapes differ between samples".into(),
            ));
        }
    }
    let content_len = T::from_usize_lossy(first.content.data.len());
    let mut style = T::zero();
    let mut content = T::zero();
    let mut pairs = 0usize;
    for i in 0..samples.len() {
        for j in i + 1..samples.len() {
            let (a, b) = (&samples[i], &samples[j]);
            for (ga, gb) in a.grams.iter().zip(&b.grams) {
                style = style + ga.iter().zip(gb).map(|(x, y)| (*x - *y) * (*x - *y)).sum::<T>();
            }
            content = content
                + a.content.data.iter().zip(&b.content.data).map(|(x, y)| (*x - *y).abs()).sum::<T>() / content_len;
            pairs += 1;
        }
    }
    let np = T::from_usize_lossy(pairs);
    let style_diff = style / np;
    let content_diff = content / np;
    let raw = lambda * style_diff + content_diff;
    Ok(DiversityResult {
        samples: samples.len(),
        pairs,
        style_diff,
        content_diff,
        raw,
        normalized: normalize_diversity(raw, cap),
    })
}

/// `min(raw / cap, 1)`.
pub fn normalize_diversity<T: Scalar>(raw: T, cap: T) -> T {
    (raw / cap).min(T::one()).max(T::zero())
}

/// Treats each frame as one sample.
pub fn diversity_from_frames<T: Scalar>(
    frames: &[FeatureFrame<T>],
    lambda: T,
    cap: T,
) -> Result<DiversityResult<T>, ScoreError> {
    let samples = frames
        .iter()
        .map(|f| SampleFeatures::from_frames(std::slice::from_ref(f)))
        .collect::<Result<Vec<_>, _>>()?;
    diversity_from_samples(&samples, lambda, cap)
}

/// Diversity of a prompt's sample set; each video contributes uniformly spaced frames.
pub fn diversity_score(
    videos: &[VideoHandle],
    backend: &BackendSuite,
    config: &AppearanceConfig,
) -> Result<DiversityResult<f64>, ScoreError> {
    if videos.len() < 2 {
        return Err(ScoreError::Precondition(format!(
            "diversity needs at least 2 videos, got {}",
            videos.len()
        )));
    }
    let mut samples = Vec::with_capacity(videos.len());
    for v in videos {
        let mut frames = Vec::new();
        for f in v.uniform_frames(config.diversity_frames) {
            frames.push(
                backend
                    .extract_features(v, f)
                    .map_err(ScoreError::backend(format!("features at frame {f} on {}", v.id)))?,
            );
        }
        samples.push(SampleFeatures::from_frames(&frames)?);
    }
    diversity_from_samples(&samples, config.lambda, config.diversity_cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::{mock_backend, Capability, MockScript};
    use proptest::prelude::*;

    fn tensor(c: usize, h: usize, w: usize, seed: f64) -> FeatureTensor<f64> {
        FeatureTensor::new(c, h, w, (0..c * h * w).map(|i| ((i as f64 + 1.0) * seed).sin()).collect())
    }

    fn frame(seed: f64) -> FeatureFrame<f64> {
        FeatureFrame {
            style_features: (0..5).map(|l| tensor(2 + l % 2, 2, 3, seed + l as f64)).collect(),
            content_feature: tensor(3, 2, 2, seed * 0.7),
        }
    }

    fn brute_gram(t: &FeatureTensor<f64>) -> Vec<Vec<f64>> {
        let (c, h, w) = t.shape();
        let at = |ch: usize, y: usize, x: usize| t.data[ch * h * w + y * w + x];
        (0..c)
            .map(|a| {
                (0..c)
                    .map(|b| {
                        let mut s = 0.0;
                        for y in 0..h {
                            for x in 0..w {
                                s += at(a, y, x) * at(b, y, x);
                            }
                        }
                        s / (c * h * w) as f64
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn gram_matches_brute_force() {
        let t = tensor(3, 2, 4, 0.37);
        let g = gram(&t);
        let bg = brute_gram(&t);
        for a in 0..3 {
            for b in 0..3 {
                assert!((g[a * 3 + b] - bg[a][b]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn gram_orthonormal_scaling() {
        // Two orthonormal channel rows over 4 positions, scaled by s.
        let s = 3.0;
        let r = 0.5;
        let t = FeatureTensor::new(2, 2, 2, vec![s * r, s * r, s * r, s * r, s * r, -s * r, s * r, -s * r]);
        let g = gram(&t);
        let fro = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        let expected = s * s * (2.0f64).sqrt() / 8.0;
        assert!((fro - expected).abs() < 1e-12);
    }

    #[test]
    fn identical_samples_are_zero() {
        let frames = vec![frame(0.2); 4];
        let r = diversity_from_frames(&frames, 1000.0, 17.712).unwrap();
        assert_eq!(r.raw, 0.0);
        assert_eq!(r.normalized, 0.0);
        assert_eq!(r.pairs, 6);
    }

    #[test]
    fn mismatched_shapes_rejected() {
        let mut odd = frame(0.3);
        odd.content_feature = tensor(2, 2, 2, 0.1);
        assert!(matches!(
            diversity_from_frames(&[frame(0.2), odd], 1000.0, 17.712),
            Err(ScoreError::Precondition(_))
        ));
        assert!(diversity_from_frames(&[frame(0.2)], 1000.0, 17.712).is_err());
    }

    #[test]
    fn cap_normalizes_to_one() {
        // Content-only difference: every element differs by 17.712.
        let mut a = frame(0.5);
        let mut b = a.clone();
        for l in 0..5 {
            b.style_features[l] = a.style_features[l].clone();
        }
        a.content_feature.data.iter_mut().for_each(|v| *v = 0.0);
        b.content_feature.data.iter_mut().for_each(|v| *v = 17.712);
        let r = diversity_from_frames(&[a, b], 1000.0, 17.712).unwrap();
        assert!((r.raw - 17.712).abs() < 1e-12);
        assert!((r.normalized - 1.0).abs() < 1e-12);
        assert_eq!(normalize_diversity(17.712, 17.712), 1.0);
        assert_eq!(normalize_diversity(40.0, 17.712), 1.0);
        assert_eq!(normalize_diversity(8.856f32, 17.712), 0.5);
    }

    #[test]
    fn pipeline_averages_frames() {
        let mut s = MockScript::strict();
        let videos: Vec<_> = (0..3)
            .map(|i| VideoHandle::virtual_clip(format!("m/diversity/d/{i}"), 8.0, 64, 64, 16))
            .collect();
        for (i, v) in videos.iter().enumerate() {
            s.push(
                Capability::ExtractFeatures,
                [("video", v.id.as_str()), ("frame", "*")],
                frame(0.1 + i as f64),
            );
        }
        let (b, mock) = mock_backend(s);
        let r = diversity_score(&videos, &b, &AppearanceConfig::default()).unwrap();
        let direct = diversity_from_frames(&[frame(0.1), frame(1.1), frame(2.1)], 1000.0, 17.712).unwrap();
        assert!((r.raw - direct.raw).abs() < 1e-9);
        assert_eq!(mock.call_count(Capability::ExtractFeatures), 24);
    }

    proptest! {
        #[test]
        fn symmetric_under_permutation(seeds in proptest::collection::vec(0.01f64..5.0, 2..6), k in 0usize..6) {
            let frames: Vec<_> = seeds.iter().map(|&s| frame(s)).collect();
            let mut perm = frames.clone();
            perm.rotate_left(k % frames.len());
            perm.reverse();
            let a = diversity_from_frames(&frames, 1000.0, 17.712).unwrap();
            let b = diversity_from_frames(&perm, 1000.0, 17.712).unwrap();
            prop_assert!((a.raw - b.raw).abs() <= 1e-9 * a.raw.abs().max(1.0));
            prop_assert!(a.raw >= 0.0);
            prop_assert!((0.0..=1.0).contains(&a.normalized));
        }
    }
}
