//! Named system-prompt assets referenced from prompt payloads.
//!
//! Payloads refer to these by id (`vlm_prompt`, `llm_prompt`). Texts quoted
//! from the published pipeline are kept verbatim; the alignment and
//! landscape prompts are house texts.

pub const DENSE_CAPTION: &str = "dense_caption";
pub const INTERACTION_CAPTION: &str = "interaction_caption";
pub const PERSON_COUNT_JUDGE: &str = "person_count_judge";
pub const ALIGNMENT_JUDGE: &str = "alignment_judge";
pub const MOTION_ORDER_TEMPLATE: &str = "motion_order_template";
pub const PLOT_TEMPLATE_4: &str = "plot_template_4";
pub const PLOT_TEMPLATE_5: &str = "plot_template_5";
pub const LANDSCAPE_TEMPLATE_5: &str = "landscape_template_5";

const ASSETS: &[(&str, &str)] = &[
    (DENSE_CAPTION, "Describe the video in detail."),
    (
        INTERACTION_CAPTION,
        "Describe the human interaction in the video, following the template as [a person xx to another person.]",
    ),
    (
        PERSON_COUNT_JUDGE,
        "You are Qwen, created by Alibaba Cloud. You are a helpful assistant and a brilliant person number judger.\n\
         You need to judge whether the description contains more than one person. Return yes or no only.",
    ),
    (
        ALIGNMENT_JUDGE,
        "You are a strict text alignment judger. You are given a description of a video and a reference text. \
         Judge whether the event in the reference text appears in the description. Return yes or no only.",
    ),
    (
        MOTION_ORDER_TEMPLATE,
        "Return the action order in video. Here is the template: '1. ; 2. .'",
    ),
    (
        PLOT_TEMPLATE_4,
        "Return the plot in video. Here is the template: [1. ; 2. ; 3. ; 4. .]",
    ),
    (
        PLOT_TEMPLATE_5,
        "Return the plot in video. Here is the template: [1. ; 2. ; 3. ; 4. ; 5. .]",
    ),
    (
        LANDSCAPE_TEMPLATE_5,
        "Return the landscape scenes in video in the order they appear. Here is the template: [1. ; 2. ; 3. ; 4. ; 5. .]",
    ),
];

/// Looks up a system prompt by id.
pub fn resolve(id: &str) -> Option<&'static str> {
    ASSETS.iter().find(|(k, _)| *k == id).map(|(_, v)| *v)
}

/// All asset ids in declaration order.
pub fn ids() -> impl Iterator<Item = &'static str> {
    ASSETS.iter().map(|(k, _)| *k)
}

/// Template prompt asking for `n` numbered plot items.
pub fn plot_template_for(n: usize) -> &'static str {
    if n >= 5 {
        PLOT_TEMPLATE_5
    } else {
        PLOT_TEMPLATE_4
    }
}

/// The three fixed clothes-consistency questions.
pub const CLOTHES_QUESTIONS: [&str; 3] = [
    "Is there only one person in the video throughout?",
    "Is the person in the video the same throughout?",
    "Does the clothes of the person in the video (color, texture) remain consistent throughout?",
];

/// Pre-filter question for creature composition prompts.
pub const COMPOSITION_PREFILTER: &str = "Is there only one creature in the video?";
