use serde::{Deserialize, Serialize};

use super::AppearanceConfig;
use crate::backends::{AnomalyKind, BackendSuite, Detection, Patch};
use crate::error::ScoreError;
use crate::video::VideoHandle;

/// Anomaly probabilities of one detected human.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceReport {
    pub frame: usize,
    pub instance: usize,
    pub body: f64,
    pub faces: Vec<f64>,
    pub hands: Vec<f64>,
    pub body_abnormal: bool,
    pub face_abnormal: bool,
    pub hand_abnormal: bool,
}

impl InstanceReport {
    pub fn abnormal(&self) -> bool {
        self.body_abnormal || self.face_abnormal || self.hand_abnormal
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnatomyCounts {
    pub c_normal: usize,
    pub c_abnormal: usize,
    pub body_flags: usize,
    pub face_flags: usize,
    pub hand_flags: usize,
    pub score: f64,
    pub instances: Vec<InstanceReport>,
}

/// Whether a human is abnormal: any probability strictly above its threshold.
pub fn instance_abnormal(body: f64, faces: &[f64], hands: &[f64], config: &AppearanceConfig) -> bool {
    body > config.body || faces.iter().any(|&p| p > config.face) || hands.iter().any(|&p| p > config.hand)
}

fn report(frame: usize, instance: usize, body: f64, faces: Vec<f64>, hands: Vec<f64>, config: &AppearanceConfig) -> InstanceReport {
    InstanceReport {
        frame,
        instance,
        body_abnormal: body > config.body,
        face_abnormal: faces.iter().any(|&p| p > config.face),
        hand_abnormal: hands.iter().any(|&p| p > config.hand),
        body,
        faces,
        hands,
    }
}

/// Counts normal and abnormal instances; `None` when there are none.
pub fn anatomy_from_instances(instances: Vec<InstanceReport>) -> Option<AnatomyCounts> {
    if instances.is_empty() {
        return None;
    }
    let c_abnormal = instances.iter().filter(|i| i.abnormal()).count();
    let c_normal = instances.len() - c_abnormal;
    Some(AnatomyCounts {
        c_normal,
        c_abnormal,
        body_flags: instances.iter().filter(|i| i.body_abnormal).count(),
        face_flags: instances.iter().filter(|i| i.face_abnormal).count(),
        hand_flags: instances.iter().filter(|i| i.hand_abnormal).count(),
        score: c_normal as f64 / (c_normal + c_abnormal) as f64,
        instances,
    })
}

fn parts_inside(parts: &[Detection], human: &Detection) -> Vec<Detection> {
    parts
        .iter()
        .filter(|p| human.bbox.contains_point(p.bbox.center()))
        .cloned()
        .collect()
}

/// Fraction of detected humans, over all frames, whose body, face and hand patches look normal.
pub fn anatomy_score(
    video: &VideoHandle,
    backend: &BackendSuite,
    config: &AppearanceConfig,
) -> Result<AnatomyCounts, ScoreError> {
    let vocab = |label: &str| vec![label.to_owned()];
    let mut instances = Vec::new();
    for frame in 0..video.frame_count {
        let ctx = |what: &str| format!("{what} at frame {frame} on {}", video.id);
        let humans = backend
            .detect_objects(video, frame, &vocab("person"), config.detect_human)
            .map_err(ScoreError::backend(ctx("human detection")))?;
        if humans.is_empty() {
            continue;
        }
        let faces = backend
            .detect_objects(video, frame, &vocab("face"), config.detect_human)
            .map_err(ScoreError::backend(ctx("face detection")))?;
        let hands = backend
            .detect_objects(video, frame, &vocab("hand"), config.detect_human)
            .map_err(ScoreError::backend(ctx("hand detection")))?;
        for (instance, human) in humans.iter().enumerate() {
            let body_patch = Patch {
                frame,
                bbox: human.bbox,
                instance,
                part: 0,
            };
            let body = backend
                .anomaly_score(video, &body_patch, AnomalyKind::Body)
                .map_err(ScoreError::backend(ctx("body anomaly")))?;
            let probs = |parts: &[Detection], kind: AnomalyKind| -> Result<Vec<f64>, ScoreError> {
                parts_inside(parts, human)
                    .iter()
                    .enumerate()
                    .map(|(part, d)| {
                        let patch = Patch {
                            frame,
                            bbox: d.bbox,
                            instance,
                            part,
                        };
                        backend
                            .anomaly_score(video, &patch, kind)
                            .map_err(ScoreError::backend(ctx(&format!("{} anomaly", kind.as_str()))))
                    })
                    .collect()
            };
            let face_p = probs(&faces, AnomalyKind::Face)?;
            let hand_p = probs(&hands, AnomalyKind::Hand)?;
            instances.push(report(frame, instance, body, face_p, hand_p, config));
        }
    }
    anatomy_from_instances(instances).ok_or_else(|| ScoreError::Unscorable("no humans detected".into()))
}
