//! Locating sample videos under `<root>/<dimension>/<prompt_id>/<sample>`.

use std::path::{Path, PathBuf};

use vbench2_core::video::VideoError;
use vbench2_core::{DimensionId, PromptSpec, VideoHandle};

pub fn sample_dir(root: &Path, dimension: DimensionId, prompt_id: &str, sample: usize) -> PathBuf {
    root.join(dimension.as_str()).join(prompt_id).join(sample.to_string())
}

/// `<model>/<dimension>/<prompt_id>/<sample>`; mock scripts key on this.
pub fn video_id(model: &str, dimension: DimensionId, prompt_id: &str, sample: usize) -> String {
    format!("{model}/{}/{prompt_id}/{sample}", dimension.as_str())
}

/// Sample indices read for one scoring unit.
pub fn unit_samples(prompt: &PromptSpec, set_level: bool, slot: usize) -> Vec<usize> {
    if set_level {
        (0..prompt.videos_per_unit()).collect()
    } else {
        vec![slot]
    }
}

/// Opens every video of a unit; the error is the unscorable reason.
pub fn open_unit(model: &str, root: &Path, prompt: &PromptSpec, samples: &[usize]) -> Result<Vec<VideoHandle>, String> {
    let mut videos = Vec::with_capacity(samples.len());
    let mut missing = Vec::new();
    for &s in samples {
        let dir = sample_dir(root, prompt.dimension, &prompt.id, s);
        match VideoHandle::open(video_id(model, prompt.dimension, &prompt.id, s), &dir) {
            Ok(v) => videos.push(v),
            Err(VideoError::Missing(_)) => missing.push(s),
            Err(e) => return Err(format!("sample {s}: {e}")),
        }
    }
    if !missing.is_empty() {
        let list: Vec<String> = missing.iter().map(usize::to_string).collect();
        return Err(format!("missing video: sample {} of {}", list.join(", "), prompt.id));
    }
    Ok(videos)
}
