//! Plan-view and 3D geometry primitives shared across the engine.
//!
//! Conventions: world Z is up, the floor is the XY plane, and object
//! footprints are axis-aligned rectangles because yaw is restricted to
//! 90-degree multiples.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Tolerance for geometric equality checks.
pub const EPS: f64 = 1e-9;

/// 2D vector in the floor plane, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// Z component of the 3D cross product of two in-plane vectors.
    pub fn cross_z(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn length(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).length()
    }

    pub fn normalized(self) -> Option<Vec2> {
        let len = self.length();
        if len < EPS {
            None
        } else {
            Some(Vec2::new(self.x / len, self.y / len))
        }
    }

    /// The direction an observer facing against this vector calls "left".
    ///
    /// For a reference object with front `f`, an observer stands in front of
    /// it and looks back at it; their left hand points along `(f.y, -f.x)`.
    pub fn observer_left(self) -> Vec2 {
        Vec2::new(self.y, -self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// 3D vector, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn xy(self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn length(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, other: Vec3) -> f64 {
        (self - other).length()
    }

    pub fn normalized(self) -> Option<Vec3> {
        let len = self.length();
        if len < EPS {
            None
        } else {
            Some(self * (1.0 / len))
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, k: f64) -> Vec3 {
        Vec3::new(self.x * k, self.y * k, self.z * k)
    }
}

/// Axis-aligned 3D box, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb3 {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb3 {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        Aabb3 { min, max }
    }

    pub fn is_valid(&self) -> bool {
        self.min.x <= self.max.x && self.min.y <= self.max.y && self.min.z <= self.max.z
    }

    pub fn contains(&self, p: Vec3, tol: f64) -> bool {
        p.x >= self.min.x - tol
            && p.x <= self.max.x + tol
            && p.y >= self.min.y - tol
            && p.y <= self.max.y + tol
            && p.z >= self.min.z - tol
            && p.z <= self.max.z + tol
    }

    pub fn center(&self) -> Vec3 {
        Vec3::new(
            0.5 * (self.min.x + self.max.x),
            0.5 * (self.min.y + self.max.y),
            0.5 * (self.min.z + self.max.z),
        )
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    /// The eight corner points.
    pub fn corners(&self) -> [Vec3; 8] {
        let (lo, hi) = (self.min, self.max);
        [
            Vec3::new(lo.x, lo.y, lo.z),
            Vec3::new(hi.x, lo.y, lo.z),
            Vec3::new(lo.x, hi.y, lo.z),
            Vec3::new(hi.x, hi.y, lo.z),
            Vec3::new(lo.x, lo.y, hi.z),
            Vec3::new(hi.x, lo.y, hi.z),
            Vec3::new(lo.x, hi.y, hi.z),
            Vec3::new(hi.x, hi.y, hi.z),
        ]
    }

    /// The four floor-plan corners (XY only).
    pub fn plan_corners(&self) -> [Vec2; 4] {
        [
            Vec2::new(self.min.x, self.min.y),
            Vec2::new(self.max.x, self.min.y),
            Vec2::new(self.min.x, self.max.y),
            Vec2::new(self.max.x, self.max.y),
        ]
    }
}

/// Yaw rotation restricted to quarter turns, counter-clockwise in plan view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Yaw {
    D0,
    D90,
    D180,
    D270,
}

impl Yaw {
    pub const ALL: [Yaw; 4] = [Yaw::D0, Yaw::D90, Yaw::D180, Yaw::D270];

    pub fn degrees(self) -> u32 {
        match self {
            Yaw::D0 => 0,
            Yaw::D90 => 90,
            Yaw::D180 => 180,
            Yaw::D270 => 270,
        }
    }

    pub fn from_degrees(deg: u32) -> Option<Yaw> {
        match deg % 360 {
            0 => Some(Yaw::D0),
            90 => Some(Yaw::D90),
            180 => Some(Yaw::D180),
            270 => Some(Yaw::D270),
            _ => None,
        }
    }

    /// Exact quarter-turn rotation, no trigonometry.
    pub fn rotate(self, v: Vec2) -> Vec2 {
        match self {
            Yaw::D0 => v,
            Yaw::D90 => Vec2::new(-v.y, v.x),
            Yaw::D180 => Vec2::new(-v.x, -v.y),
            Yaw::D270 => Vec2::new(v.y, -v.x),
        }
    }

    pub fn radians(self) -> f64 {
        (self.degrees() as f64).to_radians()
    }
}

/// Axis-aligned footprint rectangle in the floor plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub center: Vec2,
    /// Half extents along X and Y.
    pub half: Vec2,
}

impl Rect {
    pub fn new(center: Vec2, half: Vec2) -> Self {
        Rect { center, half }
    }

    /// Footprint of an object with plan dims (width, depth) at the given yaw.
    /// Quarter turns swap the footprint's extents.
    pub fn from_dims_yaw(center: Vec2, width: f64, depth: f64, yaw: Yaw) -> Self {
        let half = match yaw {
            Yaw::D0 | Yaw::D180 => Vec2::new(width * 0.5, depth * 0.5),
            Yaw::D90 | Yaw::D270 => Vec2::new(depth * 0.5, width * 0.5),
        };
        Rect { center, half }
    }

    pub fn min_x(&self) -> f64 {
        self.center.x - self.half.x
    }
    pub fn max_x(&self) -> f64 {
        self.center.x + self.half.x
    }
    pub fn min_y(&self) -> f64 {
        self.center.y - self.half.y
    }
    pub fn max_y(&self) -> f64 {
        self.center.y + self.half.y
    }

    /// True when the interiors overlap; shared edges do not count.
    pub fn overlaps(&self, other: &Rect) -> bool {
        self.min_x() < other.max_x() - EPS
            && other.min_x() < self.max_x() - EPS
            && self.min_y() < other.max_y() - EPS
            && other.min_y() < self.max_y() - EPS
    }

    pub fn contains_point(&self, p: Vec2) -> bool {
        p.x >= self.min_x() && p.x <= self.max_x() && p.y >= self.min_y() && p.y <= self.max_y()
    }

    /// True when `inner` lies entirely inside `self`, up to `tol`.
    pub fn contains_rect(&self, inner: &Rect, tol: f64) -> bool {
        inner.min_x() >= self.min_x() - tol
            && inner.max_x() <= self.max_x() + tol
            && inner.min_y() >= self.min_y() - tol
            && inner.max_y() <= self.max_y() + tol
    }

    pub fn corners(&self) -> [Vec2; 4] {
        [
            Vec2::new(self.min_x(), self.min_y()),
            Vec2::new(self.max_x(), self.min_y()),
            Vec2::new(self.max_x(), self.max_y()),
            Vec2::new(self.min_x(), self.max_y()),
        ]
    }
}

/// Area of the convex hull of a point set (monotone chain).
pub fn convex_hull_area(points: &[Vec2]) -> f64 {
    if points.len() < 3 {
        return 0.0;
    }
    let mut pts: Vec<Vec2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| (a.x - b.x).abs() < EPS && (a.y - b.y).abs() < EPS);
    if pts.len() < 3 {
        return 0.0;
    }
    let cross = |o: Vec2, a: Vec2, b: Vec2| (a - o).cross_z(b - o);
    let mut lower: Vec<Vec2> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Vec2> = Vec::with_capacity(pts.len());
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    let hull: Vec<Vec2> = lower.into_iter().chain(upper).collect();
    if hull.len() < 3 {
        return 0.0;
    }
    // Shoelace over the closed hull.
    let n = hull.len();
    let mut area2 = 0.0;
    for i in 0..n {
        let a = hull[i];
        let b = hull[(i + 1) % n];
        area2 += a.cross_z(b);
    }
    area2.abs() * 0.5
}

/// Parameter interval of the segment `a + t (b - a)`, `t` in [0,1], lying
/// inside the rectangle (Liang-Barsky clip); `None` when they do not meet.
pub fn segment_rect_interval(a: Vec2, b: Vec2, rect: &Rect) -> Option<(f64, f64)> {
    let d = b - a;
    let (mut t0, mut t1) = (0.0_f64, 1.0_f64);
    let checks = [
        (-d.x, a.x - rect.min_x()),
        (d.x, rect.max_x() - a.x),
        (-d.y, a.y - rect.min_y()),
        (d.y, rect.max_y() - a.y),
    ];
    for (p, q) in checks {
        if p.abs() < EPS {
            if q < 0.0 {
                return None;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                if r > t1 {
                    return None;
                }
                t0 = t0.max(r);
            } else {
                if r < t0 {
                    return None;
                }
                t1 = t1.min(r);
            }
        }
    }
    (t0 <= t1).then_some((t0, t1))
}

/// 2D segment/rectangle intersection test, used for line-of-sight checks.
pub fn segment_intersects_rect(a: Vec2, b: Vec2, rect: &Rect) -> bool {
    segment_rect_interval(a, b, rect).is_some()
}
