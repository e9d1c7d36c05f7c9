//! Video handles over the frame-directory layout.
//!
//! A sample directory holds a `video.json` descriptor and, optionally, the
//! decoded frames as image files. Frame files are ordered by file name.
//!
//! ```json
//! { "fps": 24, "width": 1280, "height": 720, "frame_count": 129 }
//! ```
//!
//! `frame_count` may be omitted when frame files are present.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DESCRIPTOR_FILE: &str = "video.json";

const FRAME_EXTENSIONS: &[&str] = &["png", "jpg", "jpeg", "bmp", "webp"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoDescriptor {
    pub fps: f64,
    pub width: u32,
    pub height: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_count: Option<usize>,
}

/// A decodable video the backends can address by id and frame index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoHandle {
    /// Stable identifier, `<model>/<dimension>/<prompt_id>/<sample>` under the harness.
    pub id: String,
    pub fps: f64,
    pub width: u32,
    pub height: u32,
    pub frame_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub frame_files: Vec<PathBuf>,
}

#[derive(Debug, Error)]
pub enum VideoError {
    #[error("video {0} not found")]
    Missing(String),
    #[error("container file {0} needs a decoding adapter; extract frames into a directory")]
    Container(String),
    #[error("invalid video {path}: {message}")]
    Invalid { path: String, message: String },
}

impl VideoHandle {
    /// An in-memory handle with no frames on disk.
    pub fn virtual_clip(id: impl Into<String>, fps: f64, width: u32, height: u32, frame_count: usize) -> Self {
        Self {
            id: id.into(),
            fps,
            width,
            height,
            frame_count,
            dir: None,
            frame_files: Vec::new(),
        }
    }

    /// Opens a sample directory.
    pub fn open(id: impl Into<String>, dir: &Path) -> Result<Self, VideoError> {
        let invalid = |message: String| VideoError::Invalid {
            path: dir.display().to_string(),
            message,
        };
        if !dir.is_dir() {
            let stem = dir.file_name().map(|s| s.to_string_lossy().to_string()).unwrap_or_default();
            if let Some(parent) = dir.parent() {
                if let Ok(entries) = std::fs::read_dir(parent) {
                    for e in entries.flatten() {
                        let p = e.path();
                        if p.is_file() && p.file_stem().is_some_and(|s| s.to_string_lossy() == stem) {
                            return Err(VideoError::Container(p.display().to_string()));
                        }
                    }
                }
            }
            return Err(VideoError::Missing(dir.display().to_string()));
        }
        let desc_path = dir.join(DESCRIPTOR_FILE);
        let text = std::fs::read_to_string(&desc_path)
            .map_err(|e| invalid(format!("cannot read {DESCRIPTOR_FILE}: {e}")))?;
        let desc: VideoDescriptor =
            serde_json::from_str(&text).map_err(|e| invalid(format!("bad {DESCRIPTOR_FILE}: {e}")))?;
        if !(desc.fps > 0.0 && desc.fps.is_finite()) || desc.width == 0 || desc.height == 0 {
            return Err(invalid("fps, width and height must be positive".into()));
        }
        let mut frame_files: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(|e| invalid(e.to_string()))?
            .flatten()
            .map(|e| e.path())
            .filter(|p| {
                p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| FRAME_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
            })
            .collect();
        frame_files.sort();
        let frame_count = match (desc.frame_count, frame_files.len()) {
            (Some(n), 0) => n,
            (Some(n), m) if n != m => {
                return Err(invalid(format!("descriptor says {n} frames, found {m} files")))
            }
            (_, m) => m,
        };
        if frame_count == 0 {
            return Err(invalid("video has no frames".into()));
        }
        Ok(Self {
            id: id.into(),
            fps: desc.fps,
            width: desc.width,
            height: desc.height,
            frame_count,
            dir: Some(dir.to_path_buf()),
            frame_files,
        })
    }

    pub fn short_side(&self) -> u32 {
        self.width.min(self.height)
    }

    /// Factor that brings the short side down to `target` (never upsamples).
    pub fn downsample_factor(&self, target: f64) -> f64 {
        let s = f64::from(self.short_side());
        if s > target {
            target / s
        } else {
            1.0
        }
    }

    /// `count` frame indices spread uniformly over the clip, first and last included.
    pub fn uniform_frames(&self, count: usize) -> Vec<usize> {
        let n = self.frame_count;
        if n == 0 || count == 0 {
            return Vec::new();
        }
        if count >= n {
            return (0..n).collect();
        }
        if count == 1 {
            return vec![0];
        }
        let mut out: Vec<usize> = (0..count)
            .map(|i| ((i * (n - 1)) as f64 / (count - 1) as f64).round() as usize)
            .collect();
        out.dedup();
        out
    }
}
