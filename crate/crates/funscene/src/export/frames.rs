//! Per-frame annotation data and the frame filters.
//!
//! Real-style filtering mirrors preprocessing of captured videos: target
//! within two meters and the centroid at least 200 px from every image
//! border. Synthetic-style filtering works on occupancy: the target's
//! projection must cover between 0.01% and 25% of the image. Both modes
//! first require the part visible at all.

use serde::{Deserialize, Serialize};

use crate::geom::{convex_hull_area, Vec2, Vec3};

use super::camera::{project, Camera, Projection};

/// Real-style distance cutoff: keep strictly below this.
pub const REAL_MAX_DISTANCE_M: f64 = 2.0;
/// Real-style border margin: keep at or above this distance from every edge.
pub const REAL_BORDER_MARGIN_PX: f64 = 200.0;
/// Synthetic-style occupancy band, inclusive at both ends.
pub const OCCUPANCY_MIN: f64 = 0.0001;
pub const OCCUPANCY_MAX: f64 = 0.25;
/// Default frame sampling stride.
pub const DEFAULT_STRIDE: u32 = 3;
/// Default top-k frames retained per trajectory.
pub const DEFAULT_TOP_K: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterMode {
    RealStyle,
    SyntheticStyle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    BehindCamera,
    OutOfImage,
    Occluded,
    Distance,
    Boundary,
    OccupancyLow,
    OccupancyHigh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Kept,
    Rejected(RejectReason),
}

impl Verdict {
    pub fn is_kept(&self) -> bool {
        matches!(self, Verdict::Kept)
    }
}

/// One camera frame annotated with the target part's projection data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationFrame {
    pub frame_index: u32,
    pub camera: Camera,
    pub target_part_id: String,
    /// Projected centroid of the target part; absent when behind the camera.
    pub centroid_px: Option<Vec2>,
    /// One projected point per leaf sub-part (equals the centroid for leaf
    /// targets); only in-image points are retained.
    pub points_px: Vec<Vec2>,
    /// Fraction of the image covered by the part's projected box hull.
    pub occupancy: f64,
    pub distance_m: f64,
    pub occluded: bool,
    pub verdict: Verdict,
}

/// Builds the frame annotation for one camera: centroid projection, sub-part
/// points, analytic occupancy and distance. Occlusion is judged by the
/// caller (line of sight) and passed in.
pub fn build_frame(
    frame_index: u32,
    camera: Camera,
    target_part_id: &str,
    centroid_world: Vec3,
    sub_part_centroids: &[Vec3],
    aabb_corners_world: &[Vec3; 8],
    occluded: bool,
) -> AnnotationFrame {
    let centroid_px = project(centroid_world, &camera).pixel();
    let points_px: Vec<Vec2> = sub_part_centroids
        .iter()
        .filter_map(|&p| project(p, &camera).pixel())
        .filter(|p| camera.intrinsics.contains_pixel(*p))
        .collect();
    AnnotationFrame {
        frame_index,
        camera,
        target_part_id: target_part_id.to_string(),
        centroid_px,
        points_px,
        occupancy: occupancy_of(aabb_corners_world, &camera),
        distance_m: centroid_world.distance(camera.position),
        occluded,
        verdict: Verdict::Kept,
    }
}

/// Analytic occupancy: area of the convex hull of the part box's projected
/// corners over the image area. Zero when any corner is behind the camera.
pub fn occupancy_of(aabb_corners_world: &[Vec3; 8], camera: &Camera) -> f64 {
    let mut projected = Vec::with_capacity(8);
    for &corner in aabb_corners_world {
        match project(corner, camera) {
            Projection::Pixel(p) => projected.push(p),
            Projection::BehindCamera => return 0.0,
        }
    }
    (convex_hull_area(&projected) / camera.intrinsics.image_area()).max(0.0)
}

/// Applies the mode's filter predicates to one frame.
pub fn filter_frame(frame: &AnnotationFrame, mode: FilterMode) -> Verdict {
    let Some(centroid) = frame.centroid_px else {
        return Verdict::Rejected(RejectReason::BehindCamera);
    };
    let k = &frame.camera.intrinsics;
    if !k.contains_pixel(centroid) {
        return Verdict::Rejected(RejectReason::OutOfImage);
    }
    if frame.occluded {
        return Verdict::Rejected(RejectReason::Occluded);
    }
    match mode {
        FilterMode::RealStyle => {
            if frame.distance_m >= REAL_MAX_DISTANCE_M {
                return Verdict::Rejected(RejectReason::Distance);
            }
            let border = centroid
                .x
                .min(k.width as f64 - centroid.x)
                .min(centroid.y)
                .min(k.height as f64 - centroid.y);
            if border < REAL_BORDER_MARGIN_PX {
                return Verdict::Rejected(RejectReason::Boundary);
            }
        }
        FilterMode::SyntheticStyle => {
            if frame.occupancy < OCCUPANCY_MIN {
                return Verdict::Rejected(RejectReason::OccupancyLow);
            }
            if frame.occupancy > OCCUPANCY_MAX {
                return Verdict::Rejected(RejectReason::OccupancyHigh);
            }
        }
    }
    Verdict::Kept
}

/// Keeps frame indices divisible by `stride`, applies the filter, then the
/// top `k` by occupancy (ties toward earlier frames). Verdicts are recorded
/// on every strided frame.
pub fn select_frames(
    frames: &[AnnotationFrame],
    stride: u32,
    k: usize,
    mode: FilterMode,
) -> Vec<AnnotationFrame> {
    assert!(stride >= 1, "stride must be at least 1");
    assert!(k >= 1, "top-k must be at least 1");
    let mut kept: Vec<AnnotationFrame> = frames
        .iter()
        .filter(|f| f.frame_index % stride == 0)
        .map(|f| {
            let mut f = f.clone();
            f.verdict = filter_frame(&f, mode);
            f
        })
        .filter(|f| f.verdict.is_kept())
        .collect();
    kept.sort_by(|a, b| {
        b.occupancy
            .total_cmp(&a.occupancy)
            .then(a.frame_index.cmp(&b.frame_index))
    });
    kept.truncate(k);
    kept
}
