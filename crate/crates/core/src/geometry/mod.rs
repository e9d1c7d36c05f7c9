//! Deterministic scorers over point tracks, optical flow and keypoint matches.

mod camera;
mod multiview;
pub mod synthetic;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::num::Scalar;

pub use camera::{
    classify_camera_motion, detect_orbit, edge_displacements, matching_labels, CameraOutcome,
    EdgeDisplacements, OrbitDecision,
};
pub use multiview::{
    flow_pair_step, matching_interval, matching_pairs, multiview_consistency, multiview_score, FlowStats, MatchStats,
    MultiviewOutcome,
};

/// Camera motion classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotionLabel {
    PanLeft,
    PanRight,
    TiltUp,
    TiltDown,
    ZoomIn,
    ZoomOut,
    Static,
    Orbit,
    ObliqueAirborneDolly,
}

impl MotionLabel {
    pub const ALL: [MotionLabel; 9] = [
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

    pub fn as_str(self) -> &'static str {
        match self {
            MotionLabel::PanLeft => "pan_left",
            MotionLabel::PanRight => "pan_right",
            MotionLabel::TiltUp => "tilt_up",
            MotionLabel::TiltDown => "tilt_down",
            MotionLabel::ZoomIn => "zoom_in",
            MotionLabel::ZoomOut => "zoom_out",
            MotionLabel::Static => "static",
            MotionLabel::Orbit => "orbit",
            MotionLabel::ObliqueAirborneDolly => "oblique_airborne_dolly",
        }
    }
}

impl fmt::Display for MotionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MotionLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MotionLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| format!("unknown motion label `{s}`"))
    }
}

/// Constants for the geometric scorers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig<T> {
    /// Base keypoint-matching interval in frames.
    pub s_fix: T,
    /// Videos whose flow score falls below this are discarded.
    pub flow_discard: T,
    /// Cap on the flow score when computing the matching interval.
    pub flow_interval_cap: T,
    /// Cap on the flow score in the final product.
    pub flow_score_cap: T,
    /// Cap on mean valid matches in the final product.
    pub match_cap: T,
    /// Short side the frames are downsampled to before flow and matching.
    pub target_short_side: T,
    pub grid_size: usize,
    /// Orbit windows are evaluated every this many frames.
    pub orbit_window: usize,
    /// Minimum displacement counted as movement, as a fraction of the frame diagonal.
    pub tau_move: T,
    /// Maximum displacement counted as still, as a fraction of the frame diagonal.
    pub tau_still: T,
}

impl<T: Scalar> Default for GeometryConfig<T> {
    fn default() -> Self {
        Self {
            s_fix: T::lit(40.0),
            flow_discard: T::lit(5.0),
            flow_interval_cap: T::lit(30.0),
            flow_score_cap: T::lit(10.0),
            match_cap: T::lit(750.0),
            target_short_side: T::lit(480.0),
            grid_size: 10,
            orbit_window: 20,
            tau_move: T::lit(0.02),
            tau_still: T::lit(0.01),
        }
    }
}

/// Point tracks seeded on a uniform grid in frame 0.
///
/// Point `p` sits at row `p / grid_size`, column `p % grid_size`;
/// `positions[p][t]` is its `(x, y)` pixel position at frame `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackGrid<T> {
    pub grid_size: usize,
    pub width: T,
    pub height: T,
    pub positions: Vec<Vec<[T; 2]>>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("track grid: {0}")]
    InvalidTracks(String),
    #[error("degenerate tracks: {0}")]
    Degenerate(String),
    #[error("contract violation: {0}")]
    Contract(String),
}

impl<T: Scalar> TrackGrid<T> {
    /// Uniform grid position of cell `(row, col)`: cell centres.
    pub fn grid_position(grid_size: usize, width: T, height: T, row: usize, col: usize) -> [T; 2] {
        let n = T::from_usize_lossy(grid_size);
        let half = T::lit(0.5);
        [
            (T::from_usize_lossy(col) + half) * width / n,
            (T::from_usize_lossy(row) + half) * height / n,
        ]
    }

    /// A grid whose points never move.
    pub fn stationary(grid_size: usize, width: T, height: T, frames: usize) -> Self {
        let positions = (0..grid_size * grid_size)
            .map(|p| {
                let at = Self::grid_position(grid_size, width, height, p / grid_size, p % grid_size);
                vec![at; frames]
            })
            .collect();
        Self {
            grid_size,
            width,
            height,
            positions,
        }
    }

    pub fn frame_count(&self) -> usize {
        self.positions.first().map_or(0, Vec::len)
    }

    pub fn point(&self, row: usize, col: usize) -> &[[T; 2]] {
        &self.positions[row * self.grid_size + col]
    }

    pub fn diagonal(&self) -> T {
        (self.width * self.width + self.height * self.height).sqrt()
    }

    /// Checks cardinality, series lengths and the uniform initial lattice.
    pub fn validate(&self, expected_frames: Option<usize>) -> Result<(), GeometryError> {
        let n = self.grid_size;
        if n < 2 {
            return Err(GeometryError::InvalidTracks(format!("grid_size {n} < 2")));
        }
        if !(self.width > T::zero() && self.height > T::zero()) {
            return Err(GeometryError::InvalidTracks("frame dimensions must be positive".into()));
        }
        if self.positions.len() != n * n {
            return Err(GeometryError::InvalidTracks(format!(
                "expected {} points, found {}",
                n * n,
                self.positions.len()
            )));
        }
        let frames = self.frame_count();
        if self.positions.iter().any(|s| s.len() != frames) {
            return Err(GeometryError::InvalidTracks("track lengths differ".into()));
        }
        if let Some(expected) = expected_frames {
            if frames != expected {
                return Err(GeometryError::InvalidTracks(format!(
                    "tracks cover {frames} frames, video has {expected}"
                )));
            }
        }
        if frames == 0 {
            return Err(GeometryError::InvalidTracks("tracks are empty".into()));
        }
        // Frame 0 must be an axis-aligned lattice with uniform spacing.
        let tol_x = self.width / T::from_usize_lossy(n) * T::lit(0.01);
        let tol_y = self.height / T::from_usize_lossy(n) * T::lit(0.01);
        let first = |r: usize, c: usize| self.point(r, c)[0];
        let dx = first(0, 1)[0] - first(0, 0)[0];
        let dy = first(1, 0)[1] - first(0, 0)[1];
        if !(dx > T::zero() && dy > T::zero()) {
            return Err(GeometryError::InvalidTracks("initial grid is not increasing".into()));
        }
        for r in 0..n {
            for c in 0..n {
                let [x, y] = first(r, c);
                let ex = first(0, 0)[0] + dx * T::from_usize_lossy(c);
                let ey = first(0, 0)[1] + dy * T::from_usize_lossy(r);
                if !x.is_finite() || !y.is_finite() || (x - ex).abs() > tol_x || (y - ey).abs() > tol_y {
                    return Err(GeometryError::InvalidTracks(format!(
                        "initial point ({r},{c}) is off the uniform grid"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Multiplies every displacement from the initial position by `k`.
    pub fn scale_displacements(&self, k: T) -> Self {
        let positions = self
            .positions
            .iter()
            .map(|series| {
                let o = series[0];
                series
                    .iter()
                    .map(|p| [o[0] + (p[0] - o[0]) * k, o[1] + (p[1] - o[1]) * k])
                    .collect()
            })
            .collect();
        Self {
            positions,
            ..self.clone()
        }
    }
}
