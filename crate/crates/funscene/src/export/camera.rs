//! Pinhole camera model and projection.
//!
//! Camera frame: +Z is the viewing direction, +X the image right, +Y the
//! image down, so pixel coordinates grow rightward and downward from the
//! top-left corner.

use serde::{Deserialize, Serialize};

use crate::geom::{Vec2, Vec3, EPS};

use super::ExportError;

/// Pinhole intrinsics. Defaults model a ~67 degree horizontal field of view
/// at 1920x1440.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl Default for Intrinsics {
    fn default() -> Self {
        Intrinsics {
            fx: 1432.0,
            fy: 1432.0,
            cx: 960.0,
            cy: 720.0,
            width: 1920,
            height: 1440,
        }
    }
}

impl Intrinsics {
    pub fn validate(&self) -> Result<(), ExportError> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(ExportError::BadIntrinsics(
                "focal lengths must be positive".into(),
            ));
        }
        if !(self.cx > 0.0
            && self.cx < self.width as f64
            && self.cy > 0.0
            && self.cy < self.height as f64)
        {
            return Err(ExportError::BadIntrinsics(
                "principal point must lie inside the image".into(),
            ));
        }
        Ok(())
    }

    pub fn contains_pixel(&self, p: Vec2) -> bool {
        p.x >= 0.0 && p.x <= self.width as f64 && p.y >= 0.0 && p.y <= self.height as f64
    }

    pub fn image_area(&self) -> f64 {
        self.width as f64 * self.height as f64
    }
}

/// A posed pinhole camera: position plus orthonormal axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    pub position: Vec3,
    pub right: Vec3,
    pub down: Vec3,
    pub forward: Vec3,
    pub intrinsics: Intrinsics,
}

impl Camera {
    /// Camera at `position` looking straight at `target`, world +Z up.
    pub fn look_at(
        position: Vec3,
        target: Vec3,
        intrinsics: Intrinsics,
    ) -> Result<Camera, ExportError> {
        intrinsics.validate()?;
        let forward = (target - position)
            .normalized()
            .ok_or(ExportError::DegenerateLookAt)?;
        let up = Vec3::new(0.0, 0.0, 1.0);
        let right = match forward.cross(up).normalized() {
            Some(r) => r,
            // Looking straight up or down: any horizontal right works.
            None => Vec3::new(1.0, 0.0, 0.0),
        };
        let down = forward.cross(right);
        Ok(Camera {
            position,
            right,
            down,
            forward,
            intrinsics,
        })
    }

    /// Angle in radians between the optical axis and the direction to `p`.
    pub fn aim_error(&self, p: Vec3) -> f64 {
        match (p - self.position).normalized() {
            Some(dir) => self.forward.dot(dir).clamp(-1.0, 1.0).acos(),
            None => 0.0,
        }
    }
}

/// Result of projecting a world point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projection {
    Pixel(Vec2),
    BehindCamera,
}

impl Projection {
    pub fn pixel(self) -> Option<Vec2> {
        match self {
            Projection::Pixel(p) => Some(p),
            Projection::BehindCamera => None,
        }
    }
}

/// Standard pinhole projection; non-positive depth is signaled, not an
/// error.
pub fn project(point: Vec3, camera: &Camera) -> Projection {
    let rel = point - camera.position;
    let z = camera.forward.dot(rel);
    if z <= EPS {
        return Projection::BehindCamera;
    }
    let x = camera.right.dot(rel);
    let y = camera.down.dot(rel);
    let k = &camera.intrinsics;
    Projection::Pixel(Vec2::new(k.fx * x / z + k.cx, k.fy * y / z + k.cy))
}
