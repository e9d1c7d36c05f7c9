//! Analytic track fields, one per camera-motion label.
//!
//! Used by tests and fixture generation. Every field moves points linearly in
//! time from their initial grid position.

use super::{MotionLabel, TrackGrid};
use crate::num::Scalar;

/// Builds the canonical track field for `label`.
///
/// `strength` scales every displacement; at 1.0 each field clears the default
/// movement thresholds by a comfortable margin on a 640x480 frame.
pub fn canonical_field<T: Scalar>(
    label: MotionLabel,
    grid_size: usize,
    width: T,
    height: T,
    frames: usize,
    strength: T,
) -> TrackGrid<T> {
    let mut grid = TrackGrid::stationary(grid_size, width, height, frames);
    let cx = width / T::lit(2.0);
    let cy = height / T::lit(2.0);
    let last = T::from_usize_lossy(frames.saturating_sub(1).max(1));
    let n = grid_size;
    for (p, series) in grid.positions.iter_mut().enumerate() {
        let row = p / n;
        let o = series[0];
        // Total displacement over the clip, or per-frame velocity for orbit.
        let total: [T; 2] = match label {
            MotionLabel::PanLeft => [width * T::lit(0.1), T::zero()],
            MotionLabel::PanRight => [-width * T::lit(0.1), T::zero()],
            MotionLabel::TiltUp => [T::zero(), height * T::lit(0.1)],
            MotionLabel::TiltDown => [T::zero(), -height * T::lit(0.1)],
            MotionLabel::ZoomIn => [(o[0] - cx) * T::lit(0.25), (o[1] - cy) * T::lit(0.25)],
            MotionLabel::ZoomOut => [(o[0] - cx) * T::lit(-0.2), (o[1] - cy) * T::lit(-0.2)],
            MotionLabel::Static => [T::zero(), T::zero()],
            MotionLabel::ObliqueAirborneDolly => [
                width * T::lit(0.06) - (o[0] - cx) * T::lit(0.15),
                -(o[1] - cy) * T::lit(0.15),
            ],
            MotionLabel::Orbit => {
                // Rotation about a vertical axis: top rows drift -x, bottom rows +x.
                let u = T::lit(2.0) * T::from_usize_lossy(row) / T::from_usize_lossy(n - 1) - T::one();
                let per_frame = width * T::lit(0.05) / T::lit(20.0);
                [u * per_frame * last, T::zero()]
            }
        };
        for (t, pos) in series.iter_mut().enumerate() {
            let f = T::from_usize_lossy(t) / last * strength;
            *pos = [o[0] + total[0] * f, o[1] + total[1] * f];
        }
    }
    grid
}
