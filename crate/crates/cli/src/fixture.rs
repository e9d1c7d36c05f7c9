//! Self-contained fixtures: a suite, descriptor-only sample directories, a
//! strict mock script and a config, all under one directory.
//!
//! Every unit is scripted to an [`Outcome`]; `Pass` scores 1 and `Fail`
//! scores 0 on every dimension, which lets replay fixtures hit any
//! fraction `k / n` exactly.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use vbench2_core::aggregation::{round_percent, AnnotationRecord, Choice};
use vbench2_core::appearance::{FeatureFrame, FeatureTensor, STYLE_LAYERS};
use vbench2_core::assets;
use vbench2_core::backends::{BBox, Capability, Detection, FaceObservation, Keypoint, KeypointSet};
use vbench2_core::geometry::synthetic::canonical_field;
use vbench2_core::geometry::{GeometryConfig, MatchStats, MotionLabel};
use vbench2_core::schemes::parse_numbered_items;
use vbench2_core::suite::{mini_suite, prompts_for_dimension, Payload};
use vbench2_core::video::{VideoDescriptor, DESCRIPTOR_FILE};
use vbench2_core::{DimensionId, MockScript, PromptSpec, ScoreRecord, ScoreValue, SuiteManifest};

use crate::align::ANNOTATION_HEADER;
use crate::error::{invalid, CliError};
use crate::ingest::{sample_dir, video_id};

pub const MINI_MODELS: [&str; 2] = ["alpha", "beta"];

pub const PUBLISHED_MODELS: [&str; 4] = ["HunyuanVideo", "CogVideoX-1.5", "Sora", "Kling 1.6"];

/// Published per-dimension percentages, columns in [`PUBLISHED_MODELS`] order.
pub const PUBLISHED: [(DimensionId, [f64; 4]); 18] = [
    (DimensionId::Anatomy, [88.58, 59.72, 86.45, 86.99]),
    (DimensionId::Clothes, [82.97, 87.18, 98.15, 91.75]),
    (DimensionId::Identity, [75.67, 69.51, 78.57, 71.95]),
    (DimensionId::Composition, [43.96, 44.70, 53.65, 43.89]),
    (DimensionId::Diversity, [39.73, 42.61, 67.48, 53.26]),
    (DimensionId::Mechanics, [76.09, 80.80, 62.22, 65.55]),
    (DimensionId::Material, [64.37, 83.19, 64.94, 68.00]),
    (DimensionId::Thermotics, [56.52, 67.13, 43.36, 59.46]),
    (DimensionId::MultiviewConsistency, [43.80, 21.79, 58.22, 64.38]),
    (DimensionId::DynamicSpatial, [21.26, 19.32, 19.81, 20.77]),
    (DimensionId::DynamicAttribute, [22.71, 24.18, 8.06, 19.41]),
    (DimensionId::MotionOrder, [26.60, 26.94, 14.81, 29.29]),
    (DimensionId::HumanInteraction, [67.67, 73.00, 59.00, 72.67]),
    (DimensionId::ComplexLandscape, [19.56, 23.11, 14.67, 18.44]),
    (DimensionId::ComplexPlot, [10.11, 12.42, 11.67, 11.83]),
    (DimensionId::CameraMotion, [33.95, 33.33, 27.16, 61.73]),
    (DimensionId::MotionRationality, [34.48, 33.91, 34.48, 38.51]),
    (DimensionId::InstancePreservation, [73.79, 71.03, 74.60, 76.10]),
];

/// One column of [`PUBLISHED`].
pub fn published_row(model: &str) -> Option<Vec<(DimensionId, f64)>> {
    let col = PUBLISHED_MODELS.iter().position(|m| *m == model)?;
    Some(PUBLISHED.iter().map(|(d, row)| (*d, row[col])).collect())
}

/// Smallest `(k, n)` whose fraction prints as `percent` after rounding.
pub fn replay_fraction(percent: f64) -> (usize, usize) {
    for n in 1usize.. {
        let guess = (percent / 100.0 * n as f64).round() as usize;
        for k in guess.saturating_sub(1)..=(guess + 1).min(n) {
            if (round_percent(k as f64 / n as f64) - percent).abs() < 1e-6 {
                return (k, n);
            }
        }
    }
    unreachable!()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    /// Unscorable or discarded where the dimension has such an outcome, a prefilter miss otherwise.
    Abstain,
}

const WIDTH: u32 = 640;
const HEIGHT: u32 = 480;
const MATCHES_PASS: usize = 750;

fn clip(dim: DimensionId) -> VideoDescriptor {
    let frames = match dim {
        DimensionId::CameraMotion => 21,
        DimensionId::MultiviewConsistency => 33,
        DimensionId::Anatomy | DimensionId::Identity | DimensionId::InstancePreservation => 6,
        _ => 16,
    };
    VideoDescriptor {
        fps: 8.0,
        width: WIDTH,
        height: HEIGHT,
        frame_count: Some(frames),
    }
}

fn token(id: &str) -> String {
    Sha256::digest(id.as_bytes()).iter().take(5).map(|b| format!("{b:02x}")).collect()
}

fn det(label: &str, confidence: f64, x: f64, y: f64, w: f64, h: f64) -> Detection {
    Detection {
        label: label.into(),
        confidence,
        bbox: BBox { x, y, w, h },
    }
}

fn face(embedding: Vec<f64>) -> FaceObservation {
    FaceObservation {
        bbox: BBox {
            x: 280.0,
            y: 100.0,
            w: 80.0,
            h: 80.0,
        },
        embedding,
    }
}

fn feature_frame(level: f64) -> FeatureFrame<f64> {
    let t = |v: f64| FeatureTensor::new(2, 2, 2, (0..8).map(|i| v + 0.01 * i as f64).collect());
    FeatureFrame {
        style_features: (0..STYLE_LAYERS).map(|l| t(level * 0.001 + l as f64 * 0.1)).collect(),
        content_feature: t(level),
    }
}

fn yes_no(pass: bool) -> &'static str {
    if pass {
        "Yes."
    } else {
        "No."
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(CliError::io(format!("creating {}", parent.display())))?;
    }
    std::fs::write(path, text).map_err(CliError::io(format!("writing {}", path.display())))
}

/// Accumulates sample directories and mock entries under a fixture root.
pub struct FixtureWriter {
    root: PathBuf,
    script: MockScript,
    geometry: GeometryConfig<f64>,
}

impl FixtureWriter {
    pub fn new(root: &Path) -> Self {
        Self {
            root: root.to_path_buf(),
            script: MockScript::strict(),
            geometry: GeometryConfig::default(),
        }
    }

    pub fn video_root(&self, model: &str) -> PathBuf {
        self.root.join("videos").join(model)
    }

    fn write_video(&self, model: &str, prompt: &PromptSpec, sample: usize) -> Result<String, CliError> {
        let dir = sample_dir(&self.video_root(model), prompt.dimension, &prompt.id, sample);
        let desc = serde_json::to_string(&clip(prompt.dimension)).expect("descriptor serializes");
        write_text(&dir.join(DESCRIPTOR_FILE), &desc)?;
        Ok(video_id(model, prompt.dimension, &prompt.id, sample))
    }

    /// Writes the videos of one scoring unit and scripts the calls its scorer makes.
    pub fn add_unit(&mut self, model: &str, prompt: &PromptSpec, slot: usize, outcome: Outcome) -> Result<(), CliError> {
        use Outcome::*;
        let pass = outcome == Pass;
        if let Payload::DiversitySet { samples } = &prompt.payload {
            for k in 0..*samples {
                let vid = self.write_video(model, prompt, k)?;
                let level = if pass { 40.0 * k as f64 } else { 0.0 };
                self.script
                    .push(Capability::ExtractFeatures, [("video", vid.as_str()), ("frame", "*")], feature_frame(level));
            }
            return Ok(());
        }
        let vid = self.write_video(model, prompt, slot)?;
        let s = &mut self.script;
        let v = vid.as_str();
        let tok = token(v);
        match (&prompt.payload, prompt.dimension) {
            (Payload::AnatomyDetect {}, _) => {
                let detect = |s: &mut MockScript, label: &str, out: Vec<Detection>| {
                    s.push(Capability::DetectObjects, [("video", v), ("frame", "*"), ("vocabulary", label)], out);
                };
                let people = if outcome == Abstain {
                    Vec::new()
                } else {
                    vec![det("person", 0.9, 200.0, 100.0, 240.0, 360.0)]
                };
                detect(s, "person", people);
                detect(s, "face", vec![det("face", 0.8, 290.0, 120.0, 60.0, 60.0)]);
                detect(s, "hand", vec![det("hand", 0.7, 220.0, 300.0, 40.0, 40.0)]);
                for (kind, p) in [("body", if pass { 0.1 } else { 0.9 }), ("face", 0.1), ("hand", 0.1)] {
                    s.push(
                        Capability::AnomalyScore,
                        [("video", v), ("frame", "*"), ("instance", "*"), ("part", "*"), ("kind", kind)],
                        p,
                    );
                }
            }
            (Payload::IdentityTrack {}, _) => {
                let anchor = if outcome == Abstain { Vec::new() } else { vec![face(vec![1.0, 0.0])] };
                s.push(Capability::EmbedFaces, [("video", v), ("frame", "0")], anchor);
                let later = if pass { vec![1.0, 0.0] } else { vec![0.0, 1.0] };
                s.push(Capability::EmbedFaces, [("video", v), ("frame", "*")], vec![face(later)]);
            }
            (Payload::MultiQa { questions, prefilter, .. }, dim) => {
                let questions: Vec<String> = if dim == DimensionId::Clothes {
                    assets::CLOTHES_QUESTIONS.iter().map(|q| (*q).to_owned()).collect()
                } else {
                    questions.clone()
                };
                if let Some(f) = prefilter {
                    s.answer(v, f, yes_no(outcome != Abstain));
                }
                let all_yes = pass || (outcome == Abstain && prefilter.is_none());
                for q in &questions {
                    s.answer(v, q, yes_no(all_yes));
                }
            }
            (Payload::InstanceCount { expected_count, vocabulary }, _) => {
                let n = if pass { *expected_count } else { expected_count + 1 };
                let label = vocabulary.first().map(String::as_str).unwrap_or("object");
                let mut dets: Vec<Detection> = (0..n)
                    .map(|i| det(label, 0.9, 10.0 + 60.0 * i as f64, 200.0, 50.0, 50.0))
                    .collect();
                dets.push(det(label, 0.27, 500.0, 20.0, 40.0, 40.0));
                s.push(
                    Capability::DetectObjects,
                    [("video", v), ("frame", "*"), ("vocabulary", vocabulary.join("|").as_str())],
                    dets,
                );
            }
            (Payload::OrderedAction { action_a, action_b }, _) => {
                let caption = format!("1. In clip {tok} the person {action_a}. 2. Then the person {action_b}.");
                s.caption(v, assets::MOTION_ORDER_TEMPLATE, &caption);
                let items = parse_numbered_items(&caption);
                s.judge(&items[0], action_a, assets::ALIGNMENT_JUDGE, yes_no(pass));
                s.judge(&items[1], action_b, assets::ALIGNMENT_JUDGE, "Yes.");
            }
            (Payload::InteractionCheck {}, _) => {
                let dense = format!("In clip {tok} two people stand facing each other in a room.");
                s.caption(v, assets::DENSE_CAPTION, &dense);
                s.judge(&dense, "", assets::PERSON_COUNT_JUDGE, yes_no(outcome != Abstain));
                let described = format!("In clip {tok}: {}", prompt.text);
                s.caption(v, assets::INTERACTION_CAPTION, &described);
                s.judge(&described, &prompt.text, assets::ALIGNMENT_JUDGE, yes_no(pass));
            }
            (Payload::SequentialAlignment { segments, .. }, _) => {
                let caption: String = (1..=segments.len())
                    .map(|k| format!("{k}. scene {k} of clip {tok}\n"))
                    .collect();
                s.caption(v, "*", &caption);
                let items = parse_numbered_items(&caption);
                for (k, (item, seg)) in items.iter().zip(segments).enumerate() {
                    s.judge(item, seg, "*", yes_no(pass || k > 0));
                }
            }
            (Payload::CameraTrack { target }, _) => {
                let label = match (pass, *target) {
                    (true, t) => t,
                    (false, MotionLabel::Static) => MotionLabel::PanLeft,
                    (false, _) => MotionLabel::Static,
                };
                let frames = clip(prompt.dimension).frame_count.unwrap_or(1);
                let grid_size = self.geometry.grid_size;
                let field = canonical_field(label, grid_size, f64::from(WIDTH), f64::from(HEIGHT), frames, 1.0);
                s.push(
                    Capability::TrackPoints,
                    [("video", v), ("grid_size", grid_size.to_string().as_str())],
                    field,
                );
            }
            (Payload::MultiviewGeometry {}, _) => {
                let flow = match outcome {
                    Pass => 12.0,
                    Fail => 8.0,
                    Abstain => 2.0,
                };
                s.push(Capability::FlowMagnitude, [("video", v), ("frame_a", "*"), ("frame_b", "*")], flow);
                let n = if pass { MATCHES_PASS } else { 16 };
                let keypoints = KeypointSet {
                    frame: 0,
                    keypoints: (0..n)
                        .map(|i| Keypoint {
                            x: (i % 40) as f64 * 16.0,
                            y: (i / 40) as f64 * 16.0,
                            descriptor: Vec::new(),
                        })
                        .collect(),
                };
                s.push(Capability::ExtractKeypoints, [("video", v), ("frame", "*")], keypoints);
                let matches = MatchStats {
                    frame_a: 0,
                    frame_b: 0,
                    valid_matches: if pass { MATCHES_PASS } else { 0 },
                };
                s.push(Capability::MatchKeypoints, [("video", v), ("frame_a", "*"), ("frame_b", "*")], matches);
            }
            (payload, dim) => {
                return Err(invalid(format!(
                    "fixture cannot script {} payload for {dim}",
                    payload.scheme()
                )))
            }
        }
        Ok(())
    }

    /// Writes the suite, mock script and `config.toml`; returns the config path.
    pub fn finish(self, suite: &SuiteManifest, models: &[&str]) -> Result<PathBuf, CliError> {
        write_text(&self.root.join("suite.json"), &(suite.to_json_pretty() + "\n"))?;
        write_text(&self.root.join("mock.json"), &(self.script.to_json_pretty() + "\n"))?;
        for m in models {
            std::fs::create_dir_all(self.video_root(m))
                .map_err(CliError::io(format!("creating {}", self.video_root(m).display())))?;
        }
        write_config(&self.root, models)
    }
}

#[derive(Serialize)]
struct ConfigModel<'a> {
    id: &'a str,
    video_root: String,
}

#[derive(Serialize)]
struct ConfigBackend {
    adapter: &'static str,
    mock_script: &'static str,
}

#[derive(Serialize)]
struct ConfigFile<'a> {
    suite: &'static str,
    output_dir: &'static str,
    parallelism: usize,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    annotations: Option<&'static str>,
    models: Vec<ConfigModel<'a>>,
    backend: ConfigBackend,
}

fn write_config_with(root: &Path, models: &[&str], annotations: Option<&'static str>) -> Result<PathBuf, CliError> {
    let cfg = ConfigFile {
        suite: "suite.json",
        output_dir: "out",
        parallelism: 4,
        seed: 0,
        annotations,
        models: models
            .iter()
            .map(|id| ConfigModel {
                id,
                video_root: format!("videos/{id}"),
            })
            .collect(),
        backend: ConfigBackend {
            adapter: "mock",
            mock_script: "mock.json",
        },
    };
    let path = root.join("config.toml");
    write_text(&path, &toml::to_string(&cfg).map_err(|e| invalid(e.to_string()))?)?;
    Ok(path)
}

fn write_config(root: &Path, models: &[&str]) -> Result<PathBuf, CliError> {
    write_config_with(root, models, None)
}

fn coin(parts: &[&str]) -> u8 {
    Sha256::digest(parts.join("\u{1f}").as_bytes())[0]
}

/// Outcome of a mini-fixture unit: a hashed coin per (model, prompt, slot),
/// plus one unscorable and one discarded unit for the second model.
pub fn mini_outcome(model_index: usize, model: &str, prompt: &PromptSpec, slot: usize) -> Outcome {
    if model_index == 1 && matches!(prompt.id.as_str(), "anatomy_02" | "multiview_02") {
        return Outcome::Abstain;
    }
    if coin(&[model, &prompt.id, &slot.to_string()]).is_multiple_of(3) {
        Outcome::Fail
    } else {
        Outcome::Pass
    }
}

/// The built-in mini suite for `models`, every unit scripted; returns the config path.
pub fn write_mini_fixture(root: &Path, models: &[&str]) -> Result<PathBuf, CliError> {
    let suite = mini_suite();
    let mut w = FixtureWriter::new(root);
    for (mi, m) in models.iter().enumerate() {
        for p in &suite.prompts {
            w.add_unit(m, p, 0, mini_outcome(mi, m, p, 0))?;
        }
    }
    w.finish(&suite, models)
}

/// A suite whose units reproduce `row` (dimension, percent) through `evaluate`.
///
/// Each dimension gets `n` copies of its mini-suite prompts, `k` of them passing,
/// with `k / n` the smallest fraction that prints as the target percentage.
pub fn write_replay_fixture(root: &Path, model: &str, row: &[(DimensionId, f64)]) -> Result<PathBuf, CliError> {
    let templates = mini_suite();
    let mut prompts = Vec::new();
    let mut w = FixtureWriter::new(root);
    for (dim, percent) in row {
        let (k, n) = replay_fraction(*percent);
        let pool = prompts_for_dimension(&templates, *dim);
        for i in 0..n {
            let mut p = pool[i % pool.len()].clone();
            p.id = format!("{}_r{i:03}", p.id);
            w.add_unit(model, &p, 0, if i < k { Outcome::Pass } else { Outcome::Fail })?;
            prompts.push(p);
        }
    }
    let suite = SuiteManifest {
        version: format!("replay-{}", model.to_lowercase().replace(' ', "-")),
        prompts,
    };
    w.finish(&suite, &[model])
}

fn record(model: &str, dim: DimensionId, prompt_id: String, score: f64) -> ScoreRecord {
    ScoreRecord {
        prompt_id,
        dimension: dim,
        model: model.to_owned(),
        sample: 0,
        value: ScoreValue::Score(score),
        evidence: serde_json::Value::Null,
    }
}

/// Binary per-video records reproducing every [`PUBLISHED`] cell.
pub fn published_records() -> Vec<ScoreRecord> {
    let mut out = Vec::new();
    for (col, model) in PUBLISHED_MODELS.iter().enumerate() {
        for (dim, row) in &PUBLISHED {
            let (k, n) = replay_fraction(row[col]);
            for i in 0..n {
                let score = if i < k { 1.0 } else { 0.0 };
                out.push(record(model, *dim, format!("{}_{i:03}", dim.as_str()), score));
            }
        }
    }
    out
}

fn write_records(path: &Path, records: &[ScoreRecord]) -> Result<(), CliError> {
    let body: String = records
        .iter()
        .map(|r| serde_json::to_string(r).expect("records serialize") + "\n")
        .collect();
    write_text(path, &body)
}

/// Replay records for all four published models plus a config pointing at them.
pub fn write_published_fixture(root: &Path) -> Result<PathBuf, CliError> {
    write_text(&root.join("suite.json"), &(mini_suite().to_json_pretty() + "\n"))?;
    write_records(&root.join("out").join("results.jsonl"), &published_records())?;
    write_config(root, &PUBLISHED_MODELS)
}

/// Per-slot diversity scores whose pairwise comparisons give 5, 8, 28 and 19
/// points out of 30 to the four models.
pub fn alignment_records() -> Vec<ScoreRecord> {
    let slots: [[f64; 4]; 10] = {
        let mut s = [[0.3, 0.5, 0.9, 0.7]; 10];
        s[8] = [0.9, 0.3, 0.7, 0.5];
        s[9] = [0.6, 0.2, 0.6, 0.6];
        s
    };
    let mut out = Vec::new();
    for (i, slot) in slots.iter().enumerate() {
        for (model, score) in PUBLISHED_MODELS.iter().zip(slot) {
            out.push(record(model, DimensionId::Diversity, format!("diversity_pair_{:02}", i + 1), *score));
        }
    }
    out
}

/// Human pairwise choices giving 11, 8.5, 25 and 15.5 points out of 30.
pub fn alignment_annotations() -> Vec<AnnotationRecord> {
    // (model_a, model_b, a wins, ties) over 10 comparisons per pair.
    let pairs: [(usize, usize, usize, usize); 6] =
        [(0, 1, 5, 0), (0, 2, 2, 0), (0, 3, 4, 0), (1, 2, 1, 0), (1, 3, 2, 1), (2, 3, 8, 0)];
    let mut out = Vec::new();
    for (a, b, wins, ties) in pairs {
        for g in 0..10 {
            let choice = if g < wins {
                Choice::A
            } else if g < wins + ties {
                Choice::Tie
            } else {
                Choice::B
            };
            out.push(AnnotationRecord {
                dimension: DimensionId::Diversity,
                prompt_id: format!("diversity_pair_{:02}", g + 1),
                group: g,
                model_a: PUBLISHED_MODELS[a].to_owned(),
                model_b: PUBLISHED_MODELS[b].to_owned(),
                choice,
            });
        }
    }
    out
}

/// Diversity results, annotations CSV and config for the alignment replay.
pub fn write_alignment_fixture(root: &Path) -> Result<PathBuf, CliError> {
    write_text(&root.join("suite.json"), &(mini_suite().to_json_pretty() + "\n"))?;
    write_records(&root.join("out").join("results.jsonl"), &alignment_records())?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(ANNOTATION_HEADER).map_err(|e| invalid(e.to_string()))?;
    for a in alignment_annotations() {
        w.serialize(&a).map_err(|e| invalid(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| invalid(e.to_string()))?;
    write_text(&root.join("annotations.csv"), &String::from_utf8(bytes).expect("csv is utf-8"))?;
    write_config_with(root, &PUBLISHED_MODELS, Some("annotations.csv"))
}

/// Points per model implied by a set of annotations, for summaries.
pub fn annotation_points(annotations: &[AnnotationRecord]) -> BTreeMap<String, f64> {
    let mut pts: BTreeMap<String, f64> = BTreeMap::new();
    for a in annotations {
        let (pa, pb) = match a.choice {
            Choice::A => (1.0, 0.0),
            Choice::B => (0.0, 1.0),
            Choice::Tie => (0.5, 0.5),
        };
        *pts.entry(a.model_a.clone()).or_default() += pa;
        *pts.entry(a.model_b.clone()).or_default() += pb;
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replay_fractions_print_back() {
        for (_, row) in &PUBLISHED {
            for p in row {
                let (k, n) = replay_fraction(*p);
                assert!(k <= n);
                assert!((round_percent(k as f64 / n as f64) - p).abs() < 1e-6, "{p}: {k}/{n}");
            }
        }
        assert_eq!(replay_fraction(50.0), (1, 2));
        assert_eq!(replay_fraction(0.0), (0, 1));
    }

    #[test]
    fn alignment_annotation_points() {
        let pts = annotation_points(&alignment_annotations());
        assert_eq!(pts["HunyuanVideo"], 11.0);
        assert_eq!(pts["CogVideoX-1.5"], 8.5);
        assert_eq!(pts["Sora"], 25.0);
        assert_eq!(pts["Kling 1.6"], 15.5);
    }

    #[test]
    fn published_rows_by_name() {
        let row = published_row("Kling 1.6").unwrap();
        assert_eq!(row.len(), 18);
        assert!(row.contains(&(DimensionId::CameraMotion, 61.73)));
        assert!(published_row("unknown").is_none());
    }
}
