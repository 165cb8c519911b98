//! Randomized orbit trajectories around the target functional element.
//!
//! Cameras sweep a full circle around the target's plan position with
//! seeded jitter on angle, radius and height. Every camera looks straight at
//! the target point, stays inside the room, and never stands inside an
//! obstacle that reaches its height; targets near a wall get their frames
//! redistributed over the reachable arc.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geom::{Rect, Vec3};
use crate::layout::Room;

use super::camera::{Camera, Intrinsics};
use super::ExportError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitParams {
    pub n_frames: u32,
    /// Plan-view distance range from the target, meters.
    pub radius_range: (f64, f64),
    /// Camera height range above the floor, meters.
    pub height_range: (f64, f64),
    pub seed: u64,
}

impl Default for OrbitParams {
    fn default() -> Self {
        OrbitParams {
            n_frames: 60,
            radius_range: (1.0, 2.5),
            height_range: (1.0, 1.8),
            seed: 0,
        }
    }
}

/// Margin kept from walls, meters.
const CLEARANCE: f64 = 0.05;
/// Pose attempts per frame before giving up.
const ATTEMPTS: u32 = 64;

/// A footprint with the height it reaches; cameras may pass above short
/// obstacles.
pub type Obstacle = (Rect, f64);

fn position_valid(room: &Room, obstacles: &[Obstacle], p: Vec3) -> bool {
    if p.x < CLEARANCE
        || p.x > room.width - CLEARANCE
        || p.y < CLEARANCE
        || p.y > room.depth - CLEARANCE
    {
        return false;
    }
    !obstacles
        .iter()
        .any(|(rect, height)| *height >= p.z && rect.contains_point(p.xy()))
}

/// Generates `n_frames` cameras orbiting `target`, all aimed exactly at it.
/// Deterministic for a fixed seed. Errors when some frame admits no valid
/// pose, e.g. when the radius range forces positions outside the room.
pub fn orbit_trajectory(
    room: &Room,
    obstacles: &[Obstacle],
    target: Vec3,
    intrinsics: Intrinsics,
    params: &OrbitParams,
) -> Result<Vec<Camera>, ExportError> {
    if params.n_frames == 0 {
        return Err(ExportError::BadOrbit("n_frames must be at least 1".into()));
    }
    let (r_lo, r_hi) = params.radius_range;
    if !(r_lo > 0.0 && r_hi >= r_lo) {
        return Err(ExportError::BadOrbit(
            "radius range must be positive".into(),
        ));
    }
    let (h_lo, h_hi) = params.height_range;
    if h_hi < h_lo {
        return Err(ExportError::BadOrbit("height range is inverted".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let step = std::f64::consts::TAU / params.n_frames as f64;
    let mut cameras = Vec::with_capacity(params.n_frames as usize);
    for k in 0..params.n_frames {
        let base_angle = k as f64 * step;
        let mut found = None;
        // Prefer the sweep angle of this frame; for targets near a wall the
        // spoke may be unreachable, so fall back to free angles anywhere on
        // the orbit.
        for attempt in 0..ATTEMPTS {
            let angle = if attempt < ATTEMPTS / 4 {
                base_angle + rng.random_range(-0.3..0.3) * step
            } else {
                rng.random_range(0.0..std::f64::consts::TAU)
            };
            let radius = rng.random_range(r_lo..=r_hi);
            let height = rng.random_range(h_lo..=h_hi);
            let position = Vec3::new(
                target.x + radius * angle.cos(),
                target.y + radius * angle.sin(),
                height,
            );
            if position_valid(room, obstacles, position) {
                found = Some(Camera::look_at(position, target, intrinsics)?);
                break;
            }
        }
        match found {
            Some(camera) => cameras.push(camera),
            None => {
                return Err(ExportError::NoCollisionFreeOrbit {
                    frame: k,
                    attempts: ATTEMPTS,
                })
            }
        }
    }
    Ok(cameras)
}
