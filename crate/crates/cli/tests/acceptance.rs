//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so every criterion reports even when an
//! earlier one fails; the process exits non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use vbench2_cli::align::align_dimension;
use vbench2_cli::config::RunConfig;
use vbench2_cli::evaluate::cmd_evaluate;
use vbench2_cli::fixture::{
    published_row, alignment_annotations, alignment_records, write_mini_fixture, write_replay_fixture, write_published_fixture,
    MINI_MODELS,
};
use vbench2_cli::report::cmd_report;
use vbench2_cli::results::load_results;
use vbench2_cli::Selection;
use vbench2_core::aggregation::{format_percent, spearman, win_ratio, Judgment, PairOutcome};
use vbench2_core::appearance::{
    anatomy_score, diversity_score, identity_score, instance_abnormal, instance_preservation_score, normalize_diversity,
    AppearanceConfig, FeatureFrame, FeatureTensor, STYLE_LAYERS,
};
use vbench2_core::assets;
use vbench2_core::backends::{mock_backend, BBox, Capability, Detection, FaceObservation};
use vbench2_core::geometry::synthetic::canonical_field;
use vbench2_core::geometry::{
    classify_camera_motion, detect_orbit, matching_interval, multiview_consistency, multiview_score, GeometryConfig,
    MatchStats, MotionLabel, MultiviewOutcome, TrackGrid,
};
use vbench2_core::schemes::{run_interaction_check, run_multi_qa, run_ordered_action_match, run_sequential_alignment};
use vbench2_core::suite::{mini_suite, QaMode};
use vbench2_core::{BackendSuite, DimensionId, MockScript, ScoreValue, VideoHandle};

const EXACT: f64 = 1e-9;
const SCHEME_CASES_MIN: usize = 30;
const SCHEME_BUDGET: Duration = Duration::from_secs(10);
const END_TO_END_BUDGET: Duration = Duration::from_secs(60);
const DIVERSITY_RHO: f64 = 0.9453;
const DIVERSITY_RHO_TOL: f64 = 0.02;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn clip(id: &str, frames: usize) -> VideoHandle {
    VideoHandle::virtual_clip(id, 8.0, 640, 480, frames)
}

fn suite(script: MockScript) -> BackendSuite {
    mock_backend(script).0
}

// ---------------------------------------------------------------- criterion 1

struct SchemeCase {
    name: String,
    expected: f64,
    run: Box<dyn Fn() -> f64>,
}

fn case(name: impl Into<String>, expected: f64, run: impl Fn() -> f64 + 'static) -> SchemeCase {
    SchemeCase {
        name: name.into(),
        expected,
        run: Box::new(run),
    }
}

fn qa_case(name: String, expected: f64, mode: QaMode, prefilter: Option<&'static str>, answers: Vec<Vec<&'static str>>) -> SchemeCase {
    case(name, expected, move || {
        let v = clip("c1/qa", 16);
        let mut s = MockScript::strict();
        let mut answers = answers.clone();
        let questions: Vec<String> = (0..answers.len() - usize::from(prefilter.is_some()))
            .map(|i| format!("Question number {i} about the clip?"))
            .collect();
        if let Some(f) = prefilter {
            for raw in answers.remove(0) {
                s.answer(&v.id, f, raw);
            }
        }
        for (q, raws) in questions.iter().zip(&answers) {
            for raw in raws {
                s.answer(&v.id, q, raw);
            }
        }
        run_multi_qa(&v, &questions, mode, prefilter, &suite(s)).unwrap().score
    })
}

fn sequential_case(segments: usize, first_no: Option<usize>, expected: f64) -> SchemeCase {
    case(format!("sequential {segments} segments, first no at {first_no:?}"), expected, move || {
        let v = clip("c1/seq", 16);
        let template = if segments == 5 { assets::PLOT_TEMPLATE_5 } else { assets::PLOT_TEMPLATE_4 };
        let refs: Vec<String> = (1..=segments).map(|k| format!("reference event {k}")).collect();
        let caption: String = (1..=segments).map(|k| format!("{k}. caption event {k} ")).collect();
        let mut s = MockScript::strict();
        s.caption(&v.id, template, &caption);
        for (k, reference) in refs.iter().enumerate() {
            let raw = if Some(k) == first_no { "No, it differs." } else { "Yes." };
            s.judge(&format!("caption event {}", k + 1), reference, assets::ALIGNMENT_JUDGE, raw);
        }
        let prompt = assets::resolve(template).unwrap();
        let judge = assets::resolve(assets::ALIGNMENT_JUDGE).unwrap();
        run_sequential_alignment(&v, &refs, prompt, judge, &suite(s)).unwrap().score
    })
}

fn ordered_case(name: &str, caption: &'static str, verdicts: [&'static str; 2], expected: f64) -> SchemeCase {
    case(format!("ordered action: {name}"), expected, move || {
        let v = clip("c1/order", 16);
        let mut s = MockScript::strict();
        s.caption(&v.id, assets::MOTION_ORDER_TEMPLATE, caption);
        s.judge("the person sits down", "sits down", assets::ALIGNMENT_JUDGE, verdicts[0]);
        s.judge("the person stands up", "stands up", assets::ALIGNMENT_JUDGE, verdicts[1]);
        run_ordered_action_match(&v, "sits down", "stands up", &suite(s)).unwrap().score
    })
}

fn interaction_case(count: &'static str, align: &'static str, expected: f64) -> SchemeCase {
    case(format!("interaction: count {count:?}, alignment {align:?}"), expected, move || {
        let v = clip("c1/interaction", 16);
        let text = "Two people shake hands in a hallway.";
        let dense = "Two adults meet in a hallway.";
        let described = "One adult reaches out and shakes the other's hand.";
        let mut s = MockScript::strict();
        s.caption(&v.id, assets::DENSE_CAPTION, dense);
        s.judge(dense, "", assets::PERSON_COUNT_JUDGE, count);
        s.caption(&v.id, assets::INTERACTION_CAPTION, described);
        s.judge(described, text, assets::ALIGNMENT_JUDGE, align);
        run_interaction_check(&v, text, &suite(s)).unwrap().score
    })
}

fn scheme_cases() -> Vec<SchemeCase> {
    let mut cases = Vec::new();
    // All-mode over three questions: every yes/no pattern.
    for bits in 0..8u8 {
        let answers: Vec<Vec<&str>> = (0..3)
            .map(|q| vec![if bits & (1 << q) != 0 { "Yes." } else { "No." }])
            .collect();
        let expected = if bits == 0b111 { 1.0 } else { 0.0 };
        cases.push(qa_case(format!("multi-qa all, pattern {bits:03b}"), expected, QaMode::All, None, answers));
    }
    // Mean mode over four questions: k leading yes answers.
    for (k, expected) in [(0, 0.0), (1, 0.25), (2, 0.5), (3, 0.75), (4, 1.0)] {
        let answers: Vec<Vec<&str>> = (0..4).map(|q| vec![if q < k { "yes" } else { "no" }]).collect();
        cases.push(qa_case(format!("multi-qa mean, {k}/4 yes"), expected, QaMode::Mean, None, answers));
    }
    // Prefilter: a no leaves every main question unasked (the strict mock would fail otherwise).
    cases.push(case("prefilter no short-circuits", 0.0, || {
        let v = clip("c1/prefilter", 16);
        let mut s = MockScript::strict();
        s.answer(&v.id, assets::COMPOSITION_PREFILTER, "No, there are two.");
        let qs = vec!["Is the creature's head a lion's?".to_owned(), "Does it have wings?".to_owned()];
        let out = run_multi_qa(&v, &qs, QaMode::Mean, Some(assets::COMPOSITION_PREFILTER), &suite(s)).unwrap();
        if out.verdicts.is_empty() && out.prefilter_failed() {
            out.score
        } else {
            f64::NAN
        }
    }));
    cases.push(qa_case(
        "prefilter yes, all yes".into(),
        1.0,
        QaMode::All,
        Some(assets::COMPOSITION_PREFILTER),
        vec![vec!["Yes."], vec!["Yes."], vec!["Yes."]],
    ));
    cases.push(qa_case(
        "prefilter yes, mean 2/3".into(),
        2.0 / 3.0,
        QaMode::Mean,
        Some(assets::COMPOSITION_PREFILTER),
        vec![vec!["Yes."], vec!["yes"], vec!["no"], vec!["Yes, it does."]],
    ));
    // Unparseable answers: one retry, then a protocol-failure no.
    cases.push(qa_case("retry recovers a yes".into(), 1.0, QaMode::All, None, vec![vec!["perhaps", "Yes."]]));
    cases.push(qa_case("two unparseable answers count as no".into(), 0.0, QaMode::All, None, vec![vec!["perhaps", "unclear"]]));
    // Sequential prefix scoring.
    for (first_no, expected) in [(Some(0), 0.0), (Some(1), 0.2), (Some(2), 0.4), (Some(3), 0.6), (Some(4), 0.8), (None, 1.0)] {
        cases.push(sequential_case(5, first_no, expected));
    }
    cases.push(sequential_case(4, Some(2), 0.5));
    // Ordered action.
    let two = "1. the person sits down. 2. the person stands up.";
    cases.push(ordered_case("both match", two, ["Yes.", "Yes."], 1.0));
    cases.push(ordered_case("second mismatch", two, ["Yes.", "No."], 0.0));
    cases.push(ordered_case("first mismatch", two, ["No.", "Yes."], 0.0));
    cases.push(ordered_case("single item", "1. the person sits down.", ["Yes.", "Yes."], 0.0));
    // Interaction.
    cases.push(interaction_case("No, only one person.", "Yes.", 0.0));
    cases.push(interaction_case("Yes, two people.", "Yes.", 1.0));
    cases.push(interaction_case("Yes, two people.", "No.", 0.0));
    cases
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let cases = scheme_cases();
    let mut failures = Vec::new();
    for c in &cases {
        let got = (c.run)();
        if got != c.expected {
            failures.push(format!("{}: got {got}, expected {}", c.name, c.expected));
        }
    }
    let elapsed = start.elapsed();
    ensure(failures.is_empty(), || failures.join("; "))?;
    ensure(cases.len() >= SCHEME_CASES_MIN, || format!("only {} cases", cases.len()))?;
    ensure(elapsed < SCHEME_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("{} scripted cases exact in {elapsed:.2?}", cases.len()))
}

// ---------------------------------------------------------------- criterion 2

const LABELS: [MotionLabel; 9] = [
    MotionLabel::PanLeft,
    MotionLabel::PanRight,
    MotionLabel::TiltUp,
    MotionLabel::TiltDown,
    MotionLabel::ZoomIn,
    MotionLabel::ZoomOut,
    MotionLabel::Static,
    MotionLabel::Orbit,
    MotionLabel::ObliqueAirborneDolly,
];

fn confusion(field: impl Fn(MotionLabel) -> TrackGrid<f64>, cfg: &GeometryConfig<f64>) -> Vec<Vec<f64>> {
    LABELS
        .iter()
        .map(|&truth| {
            let tracks = field(truth);
            LABELS
                .iter()
                .map(|&target| classify_camera_motion(&tracks, target, cfg).unwrap().score)
                .collect()
        })
        .collect()
}

fn criterion_2() -> Outcome {
    let cfg = GeometryConfig::default();
    let base = |l| canonical_field(l, cfg.grid_size, 640.0, 480.0, 21, 1.0);
    let m = confusion(base, &cfg);
    for (i, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            ensure(*v == want, || format!("truth {:?} vs target {:?}: {v}", LABELS[i], LABELS[j]))?;
        }
    }
    // Orbit that only starts at frame 40 of 61: caught by the third window.
    let orbit = canonical_field(MotionLabel::Orbit, cfg.grid_size, 640.0, 480.0, 21, 1.0);
    let mut late = TrackGrid::stationary(cfg.grid_size, 640.0, 480.0, 61);
    for (p, series) in late.positions.iter_mut().enumerate() {
        series[40..].copy_from_slice(&orbit.positions[p]);
    }
    let d = detect_orbit(&late, &cfg);
    ensure(d.detected && d.window_start == Some(40), || format!("late orbit: {d:?}"))?;
    let short = detect_orbit(&canonical_field(MotionLabel::Orbit, cfg.grid_size, 640.0, 480.0, 20, 1.0), &cfg);
    ensure(!short.detected, || "20-frame clip has no full window".into())?;
    for k in [2.0, 10.0] {
        let scaled = confusion(|l| base(l).scale_displacements(k), &cfg);
        ensure(scaled == m, || format!("labels change under scale {k}"))?;
    }
    Ok("9x9 confusion is identity; late orbit found at window 40; labels stable for k in {2, 10}".into())
}

// ---------------------------------------------------------------- criterion 3

fn criterion_3() -> Outcome {
    let cfg = GeometryConfig::default();
    let mut cells = 0;
    for fps in [8u32, 16, 24, 30] {
        for f in [5u32, 10, 15, 30] {
            // floor(40 / ((fps/8) * (f/10))) = floor(3200 / (fps * f)), at least 1.
            let oracle = ((3200 / (fps * f)) as usize).max(1);
            let got = matching_interval(f64::from(fps), f64::from(f), &cfg).map_err(|e| e.to_string())?;
            ensure(got == oracle, || format!("fps {fps}, F {f}: {got} vs {oracle}"))?;
            cells += 1;
        }
    }
    let mut formula = 0;
    for m in [0.0, 1.0, 375.0, 749.0, 750.0, 751.0, 2000.0] {
        for f in [5.0, 7.5, 9.99, 10.0, 12.0, 30.0] {
            let oracle = (f64::min(m, 750.0) / 750.0) * (f64::min(f, 10.0) / 10.0);
            let got = multiview_score(m, f, &cfg);
            ensure((got - oracle).abs() <= EXACT, || format!("M {m}, F {f}: {got} vs {oracle}"))?;
            formula += 1;
        }
    }
    let run = |flow: f64| {
        let v = clip("c3/multiview", 33);
        let mut s = MockScript::strict();
        s.push(Capability::FlowMagnitude, [("video", v.id.as_str()), ("frame_a", "*"), ("frame_b", "*")], flow);
        s.push(Capability::MatchKeypoints, [("video", v.id.as_str()), ("frame_a", "*"), ("frame_b", "*")], MatchStats {
            frame_a: 0,
            frame_b: 0,
            valid_matches: 0,
        });
        s.push(Capability::ExtractKeypoints, [("video", v.id.as_str()), ("frame", "*")], serde_json::json!({"frame": 0, "keypoints": []}));
        multiview_consistency(&v, &suite(s), &cfg).map_err(|e| e.to_string())
    };
    ensure(matches!(run(4.99)?, MultiviewOutcome::Discarded { .. }), || "F = 4.99 not discarded".into())?;
    ensure(matches!(run(0.0)?, MultiviewOutcome::Discarded { .. }), || "F = 0 not discarded".into())?;
    ensure(matches!(run(5.0)?, MultiviewOutcome::Scored { .. }), || "F = 5 discarded".into())?;
    Ok(format!("{cells} interval cells exact; {formula} score cases within {EXACT:e}; F < 5 discarded"))
}

// ---------------------------------------------------------------- criterion 4

fn tensor(c: usize, h: usize, w: usize, seed: f64) -> FeatureTensor<f64> {
    FeatureTensor::new(c, h, w, (0..c * h * w).map(|i| ((i as f64 + 1.3) * seed).cos() * 2.0).collect())
}

fn features(seed: f64) -> FeatureFrame<f64> {
    FeatureFrame {
        style_features: (0..STYLE_LAYERS).map(|l| tensor(2 + l % 3, 3, 2, seed + 0.37 * l as f64)).collect(),
        content_feature: tensor(4, 2, 2, seed * 1.9),
    }
}

/// `Σ_layers ||G_a - G_b||_F²` with `G[i][j] = Σ_{y,x} F[i,y,x] F[j,y,x] / (C H W)`.
fn oracle_style(a: &FeatureFrame<f64>, b: &FeatureFrame<f64>) -> f64 {
    let mut total = 0.0;
    for (ta, tb) in a.style_features.iter().zip(&b.style_features) {
        let (c, h, w) = ta.shape();
        let at = |t: &FeatureTensor<f64>, ch: usize, y: usize, x: usize| t.data[(ch * h + y) * w + x];
        for i in 0..c {
            for j in 0..c {
                let (mut ga, mut gb) = (0.0, 0.0);
                for y in 0..h {
                    for x in 0..w {
                        ga += at(ta, i, y, x) * at(ta, j, y, x);
                        gb += at(tb, i, y, x) * at(tb, j, y, x);
                    }
                }
                let n = (c * h * w) as f64;
                total += (ga / n - gb / n).powi(2);
            }
        }
    }
    total
}

fn oracle_content(a: &FeatureFrame<f64>, b: &FeatureFrame<f64>) -> f64 {
    let (x, y) = (&a.content_feature.data, &b.content_feature.data);
    x.iter().zip(y).map(|(p, q)| (p - q).abs()).sum::<f64>() / x.len() as f64
}

fn scripted_diversity(frames: &[FeatureFrame<f64>], cfg: &AppearanceConfig) -> Result<(f64, f64), String> {
    let videos: Vec<VideoHandle> = (0..frames.len()).map(|i| clip(&format!("c4/sample_{i}"), 16)).collect();
    let mut s = MockScript::strict();
    for (v, f) in videos.iter().zip(frames) {
        s.push(Capability::ExtractFeatures, [("video", v.id.as_str()), ("frame", "*")], f);
    }
    let r = diversity_score(&videos, &suite(s), cfg).map_err(|e| e.to_string())?;
    Ok((r.raw, r.normalized))
}

fn criterion_4() -> Outcome {
    let cfg = AppearanceConfig::default();
    let same = features(0.8);
    let (raw, _) = scripted_diversity(&[same.clone(), same.clone(), same], &cfg)?;
    ensure(raw == 0.0, || format!("identical set raw {raw}"))?;
    let set = [features(0.3), features(1.1), features(2.7)];
    let (raw, norm) = scripted_diversity(&set, &cfg)?;
    let pairs = [(0, 1), (0, 2), (1, 2)];
    let style: f64 = pairs.iter().map(|&(i, j)| oracle_style(&set[i], &set[j])).sum::<f64>() / 3.0;
    let content: f64 = pairs.iter().map(|&(i, j)| oracle_content(&set[i], &set[j])).sum::<f64>() / 3.0;
    let oracle = 1000.0 * style + content;
    ensure((raw - oracle).abs() <= EXACT, || format!("raw {raw} vs oracle {oracle}"))?;
    ensure((norm - (oracle / 17.712).min(1.0)).abs() <= EXACT, || format!("normalized {norm}"))?;
    let capped = normalize_diversity(17.712, cfg.diversity_cap);
    ensure(capped == 1.0, || format!("17.712 normalizes to {capped}"))?;
    Ok(format!("identical set 0; 3-sample raw {raw:.6} matches oracle; 17.712 -> 1.0"))
}

// ---------------------------------------------------------------- criterion 5

fn det(label: &str, confidence: f64, x: f64) -> Detection {
    Detection {
        label: label.into(),
        confidence,
        bbox: BBox { x, y: 100.0, w: 120.0, h: 300.0 },
    }
}

fn criterion_5() -> Outcome {
    let cfg = AppearanceConfig::default();
    // Anatomy: 10 single-person frames, the last two with an abnormal body.
    let v = clip("c5/anatomy", 10);
    let mut s = MockScript::strict();
    let id = v.id.as_str();
    s.push(Capability::DetectObjects, [("video", id), ("frame", "*"), ("vocabulary", "person")], vec![det("person", 0.9, 200.0)]);
    s.push(Capability::DetectObjects, [("video", id), ("frame", "*"), ("vocabulary", "face")], Vec::<Detection>::new());
    s.push(Capability::DetectObjects, [("video", id), ("frame", "*"), ("vocabulary", "hand")], Vec::<Detection>::new());
    for f in 0..10 {
        let p = if f >= 8 { 0.9 } else { 0.1 };
        let frame = f.to_string();
        s.push(
            Capability::AnomalyScore,
            [("video", id), ("frame", frame.as_str()), ("instance", "0"), ("part", "0"), ("kind", "body")],
            p,
        );
    }
    let a = anatomy_score(&v, &suite(s), &cfg).map_err(|e| e.to_string())?;
    ensure(a.score == 0.8 && a.c_normal == 8 && a.c_abnormal == 2, || format!("anatomy {a:?}"))?;

    // Thresholds are strict: at or under the limit is normal.
    ensure(!instance_abnormal(0.44, &[0.29], &[0.31], &cfg), || "0.44/0.29/0.31 flagged".into())?;
    ensure(!instance_abnormal(0.45, &[0.30], &[0.32], &cfg), || "limits themselves flagged".into())?;
    for (b, f, h) in [(0.46, 0.0, 0.0), (0.0, 0.31, 0.0), (0.0, 0.0, 0.33)] {
        ensure(instance_abnormal(b, &[f], &[h], &cfg), || format!("{b}/{f}/{h} not flagged"))?;
    }

    // Identity: similarities 0.6, 1, 0.6, 0.8 on valid frames; multi-face and empty frames skipped.
    let v = clip("c5/identity", 7);
    let face = |e: [f64; 2]| FaceObservation {
        bbox: BBox { x: 280.0, y: 100.0, w: 80.0, h: 80.0 },
        embedding: e.to_vec(),
    };
    let frames: [Vec<FaceObservation>; 7] = [
        vec![face([1.0, 0.0])],
        vec![face([0.6, 0.8])],
        vec![face([1.0, 0.0]), face([0.0, 1.0])],
        vec![face([1.0, 0.0])],
        vec![face([0.6, 0.8])],
        vec![],
        vec![face([0.8, 0.6])],
    ];
    let mut s = MockScript::strict();
    for (f, faces) in frames.iter().enumerate() {
        s.push(Capability::EmbedFaces, [("video", v.id.as_str()), ("frame", f.to_string().as_str())], faces);
    }
    let t = identity_score(&v, &suite(s)).map_err(|e| e.to_string())?;
    ensure(t.score == 0.75 && t.valid_frames == 4, || format!("identity {} over {}", t.score, t.valid_frames))?;

    // Instance: counts 2, 2, 3, 1 against 2; the 0.27 box never counts, 0.28 does.
    let v = clip("c5/instance", 4);
    let per_frame = [
        vec![det("cat", 0.9, 10.0), det("cat", 0.9, 200.0), det("cat", 0.27, 400.0)],
        vec![det("cat", 0.9, 10.0), det("cat", 0.28, 200.0)],
        vec![det("cat", 0.9, 10.0), det("cat", 0.9, 200.0), det("cat", 0.5, 400.0)],
        vec![det("cat", 0.9, 10.0), det("cat", 0.27, 200.0)],
    ];
    let mut s = MockScript::strict();
    for (f, d) in per_frame.iter().enumerate() {
        s.push(
            Capability::DetectObjects,
            [("video", v.id.as_str()), ("frame", f.to_string().as_str()), ("vocabulary", "cat")],
            d,
        );
    }
    let vocab = vec!["cat".to_owned()];
    let i = instance_preservation_score(&v, 2, &vocab, &suite(s), cfg.detect_instance).map_err(|e| e.to_string())?;
    ensure(i.score == 0.5 && i.per_frame_counts == vec![2, 2, 3, 1], || format!("instance {i:?}"))?;
    Ok("anatomy 8/2 -> 0.8; identity mean 0.75; instance 0.5; threshold boundaries exact".into())
}

// ---------------------------------------------------------------- criterion 6

/// Average 1-based ranks by counting smaller and equal values.
fn oracle_ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|v| {
            let less = x.iter().filter(|u| *u < v).count() as f64;
            let equal = x.iter().filter(|u| *u == v).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

fn oracle_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

fn oracle_spearman(x: &[f64], y: &[f64]) -> f64 {
    oracle_pearson(&oracle_ranks(x), &oracle_ranks(y))
}

fn criterion_6() -> Outcome {
    let mut notes = Vec::new();
    let base: Vec<f64> = (0..10).map(f64::from).collect();
    let reversed: Vec<f64> = base.iter().rev().copied().collect();
    let mut pairs: Vec<(Vec<f64>, Vec<f64>)> = vec![(base.clone(), base.clone()), (base.clone(), reversed)];
    let mut rng = StdRng::seed_from_u64(20_250_301);
    for _ in 0..5 {
        // Small integer range so ties occur.
        let draw = |rng: &mut StdRng| (0..10).map(|_| f64::from(rng.random_range(0..6u8))).collect::<Vec<_>>();
        let x = draw(&mut rng);
        let y = draw(&mut rng);
        pairs.push((x, y));
    }
    for (i, (x, y)) in pairs.iter().enumerate() {
        let got = spearman(x, y).map_err(|e| e.to_string())?;
        let oracle = oracle_spearman(x, y);
        ensure((got - oracle).abs() <= EXACT, || format!("vector pair {i}: {got} vs {oracle}"))?;
    }
    ensure(spearman(&base, &base).unwrap() == 1.0, || "identity rho != 1".into())?;

    let models = ["m0", "m1", "m2", "m3"];
    let mut judgments = Vec::new();
    for _ in 0..200 {
        let a = rng.random_range(0..4);
        let b = (a + rng.random_range(1..4)) % 4;
        let outcome = match rng.random_range(0..3) {
            0 => PairOutcome::AWins,
            1 => PairOutcome::BWins,
            _ => PairOutcome::Tie,
        };
        judgments.push(Judgment::new(models[a], models[b], outcome));
    }
    let table = win_ratio(&judgments).map_err(|e| e.to_string())?;
    ensure(table.total_points() == judgments.len() as f64, || format!("{} points for {} pairs", table.total_points(), judgments.len()))?;
    ensure(table.total_comparisons() == judgments.len(), || "comparison count".into())?;
    ensure(table.comparisons.values().sum::<usize>() == 2 * judgments.len(), || "per-model comparisons".into())?;
    for m in models {
        let oracle: f64 = judgments
            .iter()
            .map(|j| match (&j.outcome, j.model_a == m, j.model_b == m) {
                (PairOutcome::AWins, true, _) | (PairOutcome::BWins, _, true) => 1.0,
                (PairOutcome::Tie, true, _) | (PairOutcome::Tie, _, true) => 0.5,
                _ => 0.0,
            })
            .sum();
        ensure(table.points[m] == oracle, || format!("{m}: {} points vs {oracle}", table.points[m]))?;
    }
    notes.push(format!("7 rank-oracle pairs within {EXACT:e}; 1 point per pair over {} judgments", judgments.len()));

    let a = align_dimension(&alignment_records(), &alignment_annotations(), DimensionId::Diversity).map_err(|e| e.to_string())?;
    let rho = a.spearman.value().ok_or("diversity spearman undefined")?;
    let r = a.pearson.value().ok_or("diversity pearson undefined")?;
    notes.push(format!("diversity alignment spearman {rho:.4} (target {DIVERSITY_RHO} +/- {DIVERSITY_RHO_TOL}), pearson {r:.4}"));
    ensure((rho - DIVERSITY_RHO).abs() <= DIVERSITY_RHO_TOL, || notes.join("; "))?;
    Ok(notes.join("; "))
}

// ---------------------------------------------------------------- criterion 7

const OUTPUTS: [&str; 4] = ["results.jsonl", "report.json", "table.md", "radar.json"];

/// Published cells, frozen independently of the replay fixtures.
const PUBLISHED_CELLS: [(&str, [&str; 18]); 4] = [
    ("HunyuanVideo", [
        "88.58%", "82.97%", "75.67%", "39.73%", "43.96%", "21.26%", "22.71%", "26.60%", "67.67%",
        "19.56%", "10.11%", "33.95%", "76.09%", "64.37%", "56.52%", "43.80%", "34.48%", "73.79%",
    ]),
    ("CogVideoX-1.5", [
        "59.72%", "87.18%", "69.51%", "42.61%", "44.70%", "19.32%", "24.18%", "26.94%", "73.00%",
        "23.11%", "12.42%", "33.33%", "80.80%", "83.19%", "67.13%", "21.79%", "33.91%", "71.03%",
    ]),
    ("Sora", [
        "86.45%", "98.15%", "78.57%", "67.48%", "53.65%", "19.81%", "8.06%", "14.81%", "59.00%",
        "14.67%", "11.67%", "27.16%", "62.22%", "64.94%", "43.36%", "58.22%", "34.48%", "74.60%",
    ]),
    ("Kling 1.6", [
        "86.99%", "91.75%", "71.95%", "53.26%", "43.89%", "20.77%", "19.41%", "29.29%", "72.67%",
        "18.44%", "11.83%", "61.73%", "65.55%", "68.00%", "59.46%", "64.38%", "38.51%", "76.10%",
    ]),
];

fn load(path: &Path) -> Result<RunConfig, String> {
    RunConfig::load(path, None).map_err(|e| e.to_string())
}

fn evaluate_mini(dir: &Path) -> Result<RunConfig, String> {
    let config = load(&write_mini_fixture(dir, &MINI_MODELS).map_err(|e| e.to_string())?)?;
    cmd_evaluate(&config, &Selection::default(), None).map_err(|e| e.to_string())?;
    Ok(config)
}

fn check_row(report: &vbench2_cli::report::RunReport, model: &str, cells: &[&str; 18]) -> Result<usize, String> {
    let m = report.model(model).ok_or_else(|| format!("{model} missing from report"))?;
    for (dim, want) in DimensionId::ALL.iter().zip(cells) {
        let score = m.dimensions.get(dim).and_then(|c| c.score).ok_or_else(|| format!("{model}/{dim} empty"))?;
        let got = format_percent(score);
        ensure(got == *want, || format!("{model}/{dim}: {got} vs {want}"))?;
    }
    Ok(cells.len())
}

fn criterion_7() -> Outcome {
    let (a, b) = (tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?);
    let start = Instant::now();
    let ca = evaluate_mini(a.path())?;
    let elapsed = start.elapsed();
    let cb = evaluate_mini(b.path())?;
    for f in OUTPUTS {
        let (x, y) = (std::fs::read(ca.output_dir.join(f)), std::fs::read(cb.output_dir.join(f)));
        ensure(matches!((&x, &y), (Ok(x), Ok(y)) if x == y), || format!("{f} differs between runs"))?;
    }
    ensure(elapsed < END_TO_END_BUDGET, || format!("mini run took {elapsed:?}"))?;

    let pub_dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = load(&write_published_fixture(pub_dir.path()).map_err(|e| e.to_string())?)?;
    let report = cmd_report(&config, &Selection::default(), None).map_err(|e| e.to_string())?;
    let table = std::fs::read_to_string(config.output_dir.join("table.md")).map_err(|e| e.to_string())?;
    let mut cells = 0;
    for (model, row) in &PUBLISHED_CELLS {
        cells += check_row(&report, model, row)?;
        let line = format!("| {model} | {} |", row.join(" | "));
        ensure(table.contains(&line), || format!("table.md lacks row `{line}`"))?;
    }

    let rp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (model, row) = &PUBLISHED_CELLS[0];
    let published = published_row(model).ok_or("no replay row")?;
    let config = load(&write_replay_fixture(rp.path(), model, &published).map_err(|e| e.to_string())?)?;
    let summary = cmd_evaluate(&config, &Selection::default(), None).map_err(|e| e.to_string())?;
    check_row(&summary.report, model, row)?;
    Ok(format!(
        "mini suite byte-identical in {elapsed:.2?}; {cells} printed cells replay; {model} row reproduced through evaluate ({} records)",
        summary.scored
    ))
}

// ---------------------------------------------------------------- criterion 8

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = evaluate_mini(dir.path())?;
    let suite = mini_suite();
    let records = load_results(&config.results_path()).map_err(|e| e.to_string())?;
    ensure(records.len() == suite.prompts.len() * MINI_MODELS.len(), || format!("{} records", records.len()))?;
    let (mut scored, mut discarded, mut unscorable) = (0, 0, 0);
    for dim in DimensionId::ALL {
        let prompts = suite.prompts.iter().filter(|p| p.dimension == dim).count();
        ensure(prompts >= 2, || format!("{dim}: {prompts} prompt(s)"))?;
        for m in MINI_MODELS {
            let n = records.iter().filter(|r| r.dimension == dim && r.model == m).count();
            ensure(n == prompts, || format!("{m}/{dim}: {n} of {prompts} records"))?;
        }
    }
    for r in &records {
        match &r.value {
            ScoreValue::Score(_) => scored += 1,
            ScoreValue::Discarded => discarded += 1,
            ScoreValue::Unscorable(why) => {
                ensure(!why.is_empty(), || format!("{}: unscorable without reason", r.prompt_id))?;
                unscorable += 1
            }
        }
    }
    Ok(format!(
        "18/18 dimensions covered: {scored} scored, {discarded} discarded, {unscorable} unscorable"
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 scheme engines", criterion_1),
        ("2 camera motion", criterion_2),
        ("3 multi-view math", criterion_3),
        ("4 diversity", criterion_4),
        ("5 anatomy/identity/instance", criterion_5),
        ("6 statistics", criterion_6),
        ("7 end-to-end", criterion_7),
        ("8 coverage gate", criterion_8),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| (*s).to_owned()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
