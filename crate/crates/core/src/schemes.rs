//! The generalist evaluation schemes: multi-question VQA and caption/judge alignment.
//!
//! All judge calls for one video are issued sequentially, so scripted mocks
//! see a deterministic call order.

use serde::{Deserialize, Serialize};

use crate::assets;
use crate::backends::{BackendSuite, Verdict};
use crate::error::ScoreError;
use crate::suite::QaMode;
use crate::video::VideoHandle;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionVerdict {
    pub question: String,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaOutcome {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefilter: Option<QuestionVerdict>,
    pub verdicts: Vec<QuestionVerdict>,
    pub mode: QaMode,
    pub score: f64,
}

impl QaOutcome {
    pub fn prefilter_failed(&self) -> bool {
        self.prefilter.as_ref().is_some_and(|p| !p.verdict.is_yes())
    }

    pub fn yes_count(&self) -> usize {
        self.verdicts.iter().filter(|v| v.verdict.is_yes()).count()
    }
}

/// Combines binary verdicts under `mode`.
pub fn combine(mode: QaMode, verdicts: &[bool]) -> f64 {
    if verdicts.is_empty() {
        return 0.0;
    }
    let yes = verdicts.iter().filter(|v| **v).count();
    match mode {
        QaMode::All => {
            if yes == verdicts.len() {
                1.0
            } else {
                0.0
            }
        }
        QaMode::Mean => yes as f64 / verdicts.len() as f64,
    }
}

/// Asks each question about the video, gated by an optional prefilter.
///
/// A failed prefilter scores 0 and no main question is asked.
pub fn run_multi_qa(
    video: &VideoHandle,
    questions: &[String],
    mode: QaMode,
    prefilter: Option<&str>,
    backend: &BackendSuite,
) -> Result<QaOutcome, ScoreError> {
    if questions.is_empty() {
        return Err(ScoreError::Precondition("multi-question scoring needs at least one question".into()));
    }
    let prefilter = match prefilter {
        Some(q) => {
            let verdict = backend
                .answer_binary(video, q)
                .map_err(ScoreError::backend(format!("prefilter question on {}", video.id)))?;
            Some(QuestionVerdict {
                question: q.to_owned(),
                verdict,
            })
        }
        None => None,
    };
    if prefilter.as_ref().is_some_and(|p| !p.verdict.is_yes()) {
        return Ok(QaOutcome {
            prefilter,
            verdicts: Vec::new(),
            mode,
            score: 0.0,
        });
    }
    let mut verdicts = Vec::with_capacity(questions.len());
    for (i, q) in questions.iter().enumerate() {
        let verdict = backend
            .answer_binary(video, q)
            .map_err(ScoreError::backend(format!("question {} on {}", i + 1, video.id)))?;
        verdicts.push(QuestionVerdict {
            question: q.clone(),
            verdict,
        });
    }
    let flags: Vec<bool> = verdicts.iter().map(|v| v.verdict.is_yes()).collect();
    Ok(QaOutcome {
        score: combine(mode, &flags),
        prefilter,
        verdicts,
        mode,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentOutcome {
    pub vlm_caption: String,
    pub llm_verdict: Verdict,
    pub score: f64,
}

/// Captions the video, then asks a language judge whether the caption matches the reference.
pub fn run_text_alignment(
    video: &VideoHandle,
    reference: &str,
    vlm_prompt: &str,
    llm_prompt: &str,
    backend: &BackendSuite,
) -> Result<AlignmentOutcome, ScoreError> {
    if reference.trim().is_empty() {
        return Err(ScoreError::Precondition("alignment reference is empty".into()));
    }
    let caption = backend
        .caption_video(video, vlm_prompt)
        .map_err(ScoreError::backend(format!("caption for {}", video.id)))?;
    let verdict = backend
        .judge_alignment(&caption, reference, llm_prompt)
        .map_err(ScoreError::backend(format!("alignment judge for {}", video.id)))?;
    Ok(AlignmentOutcome {
        vlm_caption: caption,
        score: verdict.score(),
        llm_verdict: verdict,
    })
}

fn is_marker_boundary_before(text: &str, at: usize) -> bool {
    text[..at]
        .chars()
        .next_back()
        .is_none_or(|c| !c.is_alphanumeric() && c != '.')
}

fn find_marker(text: &str, k: usize, from: usize) -> Option<(usize, usize)> {
    let marker = format!("{k}.");
    let mut search = from;
    while let Some(rel) = text[search..].find(&marker) {
        let start = search + rel;
        let end = start + marker.len();
        let after_ok = text[end..]
            .chars()
            .next()
            .is_none_or(|c| c.is_whitespace() || c == ';' || c == ']' || c == ',');
        if after_ok && is_marker_boundary_before(text, start) {
            return Some((start, end));
        }
        search = end;
    }
    None
}

/// Splits a caption on consecutive `1.`, `2.`, ... markers.
///
/// Items may be separated by `;` or newlines; surrounding brackets and
/// separators are trimmed. Returns an empty list when no `1.` marker exists.
pub fn parse_numbered_items(caption: &str) -> Vec<String> {
    let mut bounds = Vec::new();
    let mut from = 0;
    let mut k = 1;
    while let Some((start, end)) = find_marker(caption, k, from) {
        bounds.push((start, end));
        from = end;
        k += 1;
    }
    let trim = |s: &str| {
        s.trim_matches(|c: char| c.is_whitespace() || matches!(c, ';' | '.' | ',' | '[' | ']' | '\'' | '"'))
            .to_owned()
    };
    (0..bounds.len())
        .map(|i| {
            let body_end = bounds.get(i + 1).map_or(caption.len(), |b| b.0);
            trim(&caption[bounds[i].1..body_end])
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequentialOutcome {
    pub reference_segments: Vec<String>,
    pub caption: String,
    pub caption_segments: Vec<String>,
    /// Verdicts in segment order, up to and including the first failure.
    pub verdicts: Vec<Verdict>,
    pub matched_prefix_len: usize,
    pub score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol_failure: Option<String>,
}

/// Matches numbered caption items against ordered reference segments, stopping at the first miss.
pub fn run_sequential_alignment(
    video: &VideoHandle,
    segments: &[String],
    template_prompt: &str,
    llm_prompt: &str,
    backend: &BackendSuite,
) -> Result<SequentialOutcome, ScoreError> {
    if !(4..=5).contains(&segments.len()) {
        return Err(ScoreError::Precondition(format!(
            "sequential alignment needs 4 or 5 segments, got {}",
            segments.len()
        )));
    }
    let caption = backend
        .caption_video(video, template_prompt)
        .map_err(ScoreError::backend(format!("numbered caption for {}", video.id)))?;
    let items = parse_numbered_items(&caption);
    let protocol_failure = items
        .is_empty()
        .then(|| "caption has no numbered items".to_owned());
    let mut verdicts = Vec::new();
    let mut matched = 0;
    for (k, reference) in segments.iter().enumerate() {
        let Some(item) = items.get(k).filter(|s| !s.is_empty()) else {
            break;
        };
        let verdict = backend
            .judge_alignment(item, reference, llm_prompt)
            .map_err(ScoreError::backend(format!("segment {} judge for {}", k + 1, video.id)))?;
        let pass = verdict.is_yes();
        verdicts.push(verdict);
        if !pass {
            break;
        }
        matched += 1;
    }
    Ok(SequentialOutcome {
        reference_segments: segments.to_vec(),
        caption,
        caption_segments: items,
        verdicts,
        matched_prefix_len: matched,
        score: matched as f64 / segments.len() as f64,
        protocol_failure,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderedActionOutcome {
    pub caption: String,
    pub items: Vec<String>,
    pub verdicts: Vec<Verdict>,
    pub score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol_failure: Option<String>,
}

/// Scores 1 when the first two caption items match `action_a` then `action_b`.
pub fn run_ordered_action_match(
    video: &VideoHandle,
    action_a: &str,
    action_b: &str,
    backend: &BackendSuite,
) -> Result<OrderedActionOutcome, ScoreError> {
    if action_a.trim().is_empty() || action_b.trim().is_empty() {
        return Err(ScoreError::Precondition("both reference actions must be nonempty".into()));
    }
    let template = assets::resolve(assets::MOTION_ORDER_TEMPLATE).expect("asset");
    let judge_prompt = assets::resolve(assets::ALIGNMENT_JUDGE).expect("asset");
    let caption = backend
        .caption_video(video, template)
        .map_err(ScoreError::backend(format!("action-order caption for {}", video.id)))?;
    let items = parse_numbered_items(&caption);
    if items.len() < 2 || items[..2].iter().any(String::is_empty) {
        return Ok(OrderedActionOutcome {
            caption,
            protocol_failure: Some(format!("expected 2 numbered actions, found {}", items.len())),
            items,
            verdicts: Vec::new(),
            score: 0.0,
        });
    }
    let mut verdicts = Vec::with_capacity(2);
    for (item, reference) in items.iter().zip([action_a, action_b]) {
        let v = backend
            .judge_alignment(item, reference, judge_prompt)
            .map_err(ScoreError::backend(format!("action judge for {}", video.id)))?;
        let pass = v.is_yes();
        verdicts.push(v);
        if !pass {
            break;
        }
    }
    let score = if verdicts.len() == 2 && verdicts.iter().all(Verdict::is_yes) {
        1.0
    } else {
        0.0
    };
    Ok(OrderedActionOutcome {
        caption,
        items,
        verdicts,
        score,
        protocol_failure: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionOutcome {
    pub dense_caption: String,
    pub person_count_verdict: Verdict,
    /// Present only when the person-count stage passed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alignment: Option<AlignmentOutcome>,
    pub score: f64,
}

/// Two-stage human-interaction check: more than one person, then interaction alignment.
pub fn run_interaction_check(
    video: &VideoHandle,
    prompt_text: &str,
    backend: &BackendSuite,
) -> Result<InteractionOutcome, ScoreError> {
    let dense_prompt = assets::resolve(assets::DENSE_CAPTION).expect("asset");
    let count_prompt = assets::resolve(assets::PERSON_COUNT_JUDGE).expect("asset");
    let dense = backend
        .caption_video(video, dense_prompt)
        .map_err(ScoreError::backend(format!("dense caption for {}", video.id)))?;
    let count = backend
        .judge_alignment(&dense, "", count_prompt)
        .map_err(ScoreError::backend(format!("person-count judge for {}", video.id)))?;
    if !count.is_yes() {
        return Ok(InteractionOutcome {
            dense_caption: dense,
            person_count_verdict: count,
            alignment: None,
            score: 0.0,
        });
    }
    let alignment = run_text_alignment(
        video,
        prompt_text,
        assets::resolve(assets::INTERACTION_CAPTION).expect("asset"),
        assets::resolve(assets::ALIGNMENT_JUDGE).expect("asset"),
        backend,
    )?;
    Ok(InteractionOutcome {
        dense_caption: dense,
        person_count_verdict: count,
        score: alignment.score,
        alignment: Some(alignment),
    })
}
