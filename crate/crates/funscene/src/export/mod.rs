//! Scene export: orbit camera trajectories, pinhole projection of the
//! functional element, frame filtering, pointing samples, and the scene
//! manifest.

mod camera;
mod frames;
mod manifest;
mod orbit;
mod pointing;

pub use camera::{project, Camera, Intrinsics, Projection};
pub use frames::{
    build_frame, filter_frame, occupancy_of, select_frames, AnnotationFrame, FilterMode,
    RejectReason, Verdict, DEFAULT_STRIDE, DEFAULT_TOP_K, OCCUPANCY_MAX, OCCUPANCY_MIN,
    REAL_BORDER_MARGIN_PX, REAL_MAX_DISTANCE_M,
};
pub use manifest::{
    assign_instance_ids, read_manifest, write_manifest, Manifest, ManifestPlacement,
    ManifestTarget, MANIFEST_VERSION, VISIBILITY_APPROXIMATION,
};
pub use orbit::{orbit_trajectory, Obstacle, OrbitParams};
pub use pointing::{
    emit_pointing_samples, read_pointing_samples, write_pointing_samples, Dialogue, PointingSample,
    POINTING_INSTRUCTION,
};

use thiserror::Error;

use crate::geom::{segment_rect_interval, Aabb3, Vec3};
use crate::layout::Placement;

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("io failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization failure: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad intrinsics: {0}")]
    BadIntrinsics(String),
    #[error("camera position coincides with the look-at target")]
    DegenerateLookAt,
    #[error("bad orbit parameters: {0}")]
    BadOrbit(String),
    #[error("no collision-free orbit pose for frame {frame} after {attempts} attempts")]
    NoCollisionFreeOrbit { frame: u32, attempts: u32 },
}

/// Maps a point from an asset's canonical frame into the world through its
/// placement: quarter-turn yaw about the plan center, then translation, with
/// the mount height added on Z.
pub fn part_world_point(placement: &Placement, canonical: Vec3) -> Vec3 {
    let plan = placement.yaw.rotate(canonical.xy()) + placement.center;
    Vec3::new(plan.x, plan.y, canonical.z + placement.mount_height)
}

/// World-frame corners of a canonical-frame box under a placement.
pub fn part_world_corners(placement: &Placement, aabb: &Aabb3) -> [Vec3; 8] {
    aabb.corners().map(|c| part_world_point(placement, c))
}

/// Line-of-sight visibility approximation: the plan segment from the camera
/// to the target must not cross any obstacle footprint that is tall enough
/// to block it at the crossing. Obstacles are (placement, height) pairs; the
/// target's own object must not be among them.
pub fn line_of_sight_clear(
    camera_pos: Vec3,
    target: Vec3,
    obstacles: &[(&Placement, f64)],
) -> bool {
    let a = camera_pos.xy();
    let b = target.xy();
    for (placement, height) in obstacles {
        let Some((t0, t1)) = segment_rect_interval(a, b, &placement.footprint) else {
            continue;
        };
        // Sight-line height over the crossing; blocked when the obstacle
        // tops it anywhere there (heights interpolate linearly).
        let z0 = camera_pos.z + (target.z - camera_pos.z) * t0;
        let z1 = camera_pos.z + (target.z - camera_pos.z) * t1;
        let base = placement.mount_height;
        let top = base + height;
        if z0.min(z1) <= top && z0.max(z1) >= base {
            return false;
        }
    }
    true
}
