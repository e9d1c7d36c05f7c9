//! Camera-motion classification from grid point tracks.
//!
//! Image coordinates: +x right, +y down. A camera panning left makes scene
//! content drift right; tilting up makes it drift down.

use serde::{Deserialize, Serialize};

use super::{GeometryConfig, GeometryError, MotionLabel, TrackGrid};
use crate::num::Scalar;

/// Start-to-end displacement of the centre point of each outer edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeDisplacements<T> {
    pub top: [T; 2],
    pub bottom: [T; 2],
    pub left: [T; 2],
    pub right: [T; 2],
}

impl<T: Scalar> EdgeDisplacements<T> {
    fn all(&self) -> [[T; 2]; 4] {
        [self.top, self.bottom, self.left, self.right]
    }

    fn mean(&self) -> [T; 2] {
        let four = T::lit(4.0);
        let a = self.all();
        [
            a.iter().map(|d| d[0]).sum::<T>() / four,
            a.iter().map(|d| d[1]).sum::<T>() / four,
        ]
    }
}

fn center_indices(n: usize) -> Vec<usize> {
    if n % 2 == 1 {
        vec![n / 2]
    } else {
        vec![n / 2 - 1, n / 2]
    }
}

fn mean_displacement<T: Scalar>(
    tracks: &TrackGrid<T>,
    cells: &[(usize, usize)],
    from: usize,
    to: usize,
) -> [T; 2] {
    let k = T::from_usize_lossy(cells.len());
    let mut acc = [T::zero(); 2];
    for &(r, c) in cells {
        let s = tracks.point(r, c);
        acc[0] = acc[0] + (s[to][0] - s[from][0]);
        acc[1] = acc[1] + (s[to][1] - s[from][1]);
    }
    [acc[0] / k, acc[1] / k]
}

fn ensure_finite<T: Scalar>(tracks: &TrackGrid<T>) -> Result<(), GeometryError> {
    for (p, series) in tracks.positions.iter().enumerate() {
        if series.iter().any(|q| !q[0].is_finite() || !q[1].is_finite()) {
            return Err(GeometryError::Degenerate(format!("point {p} has non-finite positions")));
        }
    }
    Ok(())
}

/// Displacements of the four edge centres between the first and last frame.
pub fn edge_displacements<T: Scalar>(tracks: &TrackGrid<T>) -> Result<EdgeDisplacements<T>, GeometryError> {
    tracks.validate(None)?;
    if tracks.frame_count() < 2 {
        return Err(GeometryError::Contract("camera motion needs at least 2 frames".into()));
    }
    ensure_finite(tracks)?;
    let n = tracks.grid_size;
    let mid = center_indices(n);
    let last = tracks.frame_count() - 1;
    let row = |r: usize| mid.iter().map(|&c| (r, c)).collect::<Vec<_>>();
    let col = |c: usize| mid.iter().map(|&r| (r, c)).collect::<Vec<_>>();
    Ok(EdgeDisplacements {
        top: mean_displacement(tracks, &row(0), 0, last),
        bottom: mean_displacement(tracks, &row(n - 1), 0, last),
        left: mean_displacement(tracks, &col(0), 0, last),
        right: mean_displacement(tracks, &col(n - 1), 0, last),
    })
}

/// Every non-orbit label whose displacement signature the edges satisfy.
pub fn matching_labels<T: Scalar>(
    d: &EdgeDisplacements<T>,
    diagonal: T,
    config: &GeometryConfig<T>,
) -> Vec<MotionLabel> {
    let mv = config.tau_move * diagonal;
    let still = config.tau_still * diagonal;
    let all = d.all();
    let mut out = Vec::new();

    let horizontal = |sign: T| all.iter().all(|v| v[0] * sign > mv && v[1].abs() < still);
    let vertical = |sign: T| all.iter().all(|v| v[1] * sign > mv && v[0].abs() < still);
    if horizontal(T::one()) {
        out.push(MotionLabel::PanLeft);
    }
    if horizontal(-T::one()) {
        out.push(MotionLabel::PanRight);
    }
    if vertical(T::one()) {
        out.push(MotionLabel::TiltUp);
    }
    if vertical(-T::one()) {
        out.push(MotionLabel::TiltDown);
    }

    // Outward radial component per edge; tangential component must stay small.
    let radial = |v: &EdgeDisplacements<T>| {
        [
            (-v.top[1], v.top[0]),
            (v.bottom[1], v.bottom[0]),
            (-v.left[0], v.left[1]),
            (v.right[0], v.right[1]),
        ]
    };
    let zoom = |sign: T| radial(d).iter().all(|(r, t)| *r * sign > mv && t.abs() < still);
    if zoom(T::one()) {
        out.push(MotionLabel::ZoomIn);
    }
    if zoom(-T::one()) {
        out.push(MotionLabel::ZoomOut);
    }

    if all.iter().all(|v| (v[0] * v[0] + v[1] * v[1]).sqrt() < mv) {
        out.push(MotionLabel::Static);
    }

    // Oblique dolly: a horizontal common translation plus an inward (zoom-out) residual.
    let t = d.mean();
    let residual = EdgeDisplacements {
        top: [d.top[0] - t[0], d.top[1] - t[1]],
        bottom: [d.bottom[0] - t[0], d.bottom[1] - t[1]],
        left: [d.left[0] - t[0], d.left[1] - t[1]],
        right: [d.right[0] - t[0], d.right[1] - t[1]],
    };
    if t[0].abs() > mv && radial(&residual).iter().all(|(r, _)| -*r > mv) {
        out.push(MotionLabel::ObliqueAirborneDolly);
    }
    out
}

/// Result of the orbit window scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitDecision {
    pub detected: bool,
    /// Start frame of the first positive window.
    pub window_start: Option<usize>,
    pub windows_checked: usize,
    pub note: Option<String>,
}

/// Scans windows of `orbit_window` frames for an orbit signature.
///
/// A window is positive when, in every grid column, the first and last point
/// move in opposite x directions, each by more than `tau_move` and with
/// vertical movement under `tau_still`.
pub fn detect_orbit<T: Scalar>(tracks: &TrackGrid<T>, config: &GeometryConfig<T>) -> OrbitDecision {
    let w = config.orbit_window.max(1);
    let frames = tracks.frame_count();
    if frames < w + 1 {
        return OrbitDecision {
            detected: false,
            window_start: None,
            windows_checked: 0,
            note: Some(format!("short video: {frames} frames, need at least {}", w + 1)),
        };
    }
    let diag = tracks.diagonal();
    let mv = config.tau_move * diag;
    let still = config.tau_still * diag;
    let n = tracks.grid_size;
    let mut checked = 0;
    let mut start = 0;
    while start + w < frames {
        checked += 1;
        let end = start + w;
        let positive = (0..n).all(|c| {
            let top = tracks.point(0, c);
            let bottom = tracks.point(n - 1, c);
            let dt = [top[end][0] - top[start][0], top[end][1] - top[start][1]];
            let db = [bottom[end][0] - bottom[start][0], bottom[end][1] - bottom[start][1]];
            dt[0] * db[0] < T::zero()
                && dt[0].abs() > mv
                && db[0].abs() > mv
                && dt[1].abs() < still
                && db[1].abs() < still
        });
        if positive {
            return OrbitDecision {
                detected: true,
                window_start: Some(start),
                windows_checked: checked,
                note: None,
            };
        }
        start += w;
    }
    OrbitDecision {
        detected: false,
        window_start: None,
        windows_checked: checked,
        note: None,
    }
}

/// Evidence of a camera-motion judgment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraOutcome<T> {
    pub target: MotionLabel,
    pub score: T,
    pub edges: EdgeDisplacements<T>,
    pub observed: Vec<MotionLabel>,
    pub orbit: Option<OrbitDecision>,
}

/// Scores 1 when the tracks show the target motion's signature.
pub fn classify_camera_motion<T: Scalar>(
    tracks: &TrackGrid<T>,
    target: MotionLabel,
    config: &GeometryConfig<T>,
) -> Result<CameraOutcome<T>, GeometryError> {
    let edges = edge_displacements(tracks)?;
    let observed = matching_labels(&edges, tracks.diagonal(), config);
    let (hit, orbit) = if target == MotionLabel::Orbit {
        let decision = detect_orbit(tracks, config);
        (decision.detected, Some(decision))
    } else {
        (observed.contains(&target), None)
    };
    Ok(CameraOutcome {
        target,
        score: if hit { T::one() } else { T::zero() },
        edges,
        observed,
        orbit,
    })
}
