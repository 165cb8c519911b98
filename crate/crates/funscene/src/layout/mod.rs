//! Constraint-based placement: rooms, clauses, the two-pass depth-first
//! solver, and an independent solution checker.
//!
//! Room frame: the floor is `[0, width] x [0, depth]`, the south wall is
//! y = 0, north y = depth, west x = 0, east x = width. Directional
//! predicates follow the observer rule: to judge "A left of B", stand facing
//! B's front; A must be on your left-hand side.

mod check;
pub mod clause;
mod solve;

pub use check::{check_solution, Violation};
pub use clause::{
    clauses_from_lines, is_wall_mounted_name, parse_clause_line, plan_fallback, plan_from_layout,
    render_clause, render_plan, ClauseError, ClauseSet, LayoutPlan, PlannedObject,
};
pub use solve::{solve, Infeasible, SolveError, SolveObject, SolveParams};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{Rect, Vec2, Vec3, Yaw, EPS};

#[derive(Debug, Error)]
pub enum RoomError {
    #[error("room dimensions must be positive")]
    BadDims,
    #[error("opening [{0}, {1}] outside its wall")]
    OpeningOutsideWall(f64, f64),
    #[error("openings overlap on wall {0:?}")]
    OverlappingOpenings(WallSide),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WallSide {
    North,
    East,
    South,
    West,
}

impl WallSide {
    pub const ALL: [WallSide; 4] = [
        WallSide::North,
        WallSide::East,
        WallSide::South,
        WallSide::West,
    ];

    /// Unit normal pointing into the room.
    pub fn inward(self) -> Vec2 {
        match self {
            WallSide::North => Vec2::new(0.0, -1.0),
            WallSide::East => Vec2::new(-1.0, 0.0),
            WallSide::South => Vec2::new(0.0, 1.0),
            WallSide::West => Vec2::new(1.0, 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpeningKind {
    Door,
    Window,
}

/// A span along one wall already cut out for a door or window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Opening {
    pub wall: WallSide,
    /// Interval along the wall (x for north/south walls, y for east/west).
    pub span: (f64, f64),
    pub kind: OpeningKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Room {
    pub width: f64,
    pub depth: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub openings: Vec<Opening>,
}

impl Room {
    pub fn new(width: f64, depth: f64, openings: Vec<Opening>) -> Result<Self, RoomError> {
        if !(width > 0.0 && depth > 0.0) {
            return Err(RoomError::BadDims);
        }
        let room = Room {
            width,
            depth,
            openings,
        };
        for opening in &room.openings {
            let len = room.wall_length(opening.wall);
            let (a, b) = opening.span;
            if !(a >= 0.0 && b <= len && a < b) {
                return Err(RoomError::OpeningOutsideWall(a, b));
            }
        }
        for wall in WallSide::ALL {
            let mut spans: Vec<(f64, f64)> = room
                .openings
                .iter()
                .filter(|o| o.wall == wall)
                .map(|o| o.span)
                .collect();
            spans.sort_by(|a, b| a.0.total_cmp(&b.0));
            if spans.windows(2).any(|w| w[0].1 > w[1].0 + EPS) {
                return Err(RoomError::OverlappingOpenings(wall));
            }
        }
        Ok(room)
    }

    pub fn wall_length(&self, wall: WallSide) -> f64 {
        match wall {
            WallSide::North | WallSide::South => self.width,
            WallSide::East | WallSide::West => self.depth,
        }
    }

    pub fn center(&self) -> Vec2 {
        Vec2::new(self.width * 0.5, self.depth * 0.5)
    }

    pub fn contains_rect(&self, rect: &Rect, tol: f64) -> bool {
        rect.min_x() >= -tol
            && rect.max_x() <= self.width + tol
            && rect.min_y() >= -tol
            && rect.max_y() <= self.depth + tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hardness {
    Hard,
    Soft,
}

/// One layout constraint in the clause DSL: absolute (with respect to the
/// room) or relative (with respect to another object), hard or soft.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ClauseKind {
    Central,
    Corner,
    AgainstWall {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        wall: Option<WallSide>,
    },
    LeftOf {
        reference: String,
    },
    RightOf {
        reference: String,
    },
    InFrontOf {
        reference: String,
    },
    Behind {
        reference: String,
    },
    Near {
        reference: String,
    },
    OnTopOf {
        reference: String,
    },
}

impl ClauseKind {
    pub fn reference(&self) -> Option<&str> {
        match self {
            ClauseKind::LeftOf { reference }
            | ClauseKind::RightOf { reference }
            | ClauseKind::InFrontOf { reference }
            | ClauseKind::Behind { reference }
            | ClauseKind::Near { reference }
            | ClauseKind::OnTopOf { reference } => Some(reference),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ClauseKind::Central => "central",
            ClauseKind::Corner => "corner",
            ClauseKind::AgainstWall { .. } => "against-wall",
            ClauseKind::LeftOf { .. } => "left-of",
            ClauseKind::RightOf { .. } => "right-of",
            ClauseKind::InFrontOf { .. } => "in-front-of",
            ClauseKind::Behind { .. } => "behind",
            ClauseKind::Near { .. } => "near",
            ClauseKind::OnTopOf { .. } => "on-top-of",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    pub subject: String,
    #[serde(flatten)]
    pub kind: ClauseKind,
    pub hardness: Hardness,
    /// Contribution to the placement score; meaningful for soft clauses.
    pub weight: f64,
}

impl Clause {
    pub fn hard(subject: &str, kind: ClauseKind) -> Clause {
        Clause {
            subject: subject.to_string(),
            kind,
            hardness: Hardness::Hard,
            weight: 1.0,
        }
    }

    pub fn soft(subject: &str, kind: ClauseKind, weight: f64) -> Clause {
        Clause {
            subject: subject.to_string(),
            kind,
            hardness: Hardness::Soft,
            weight: weight.max(f64::MIN_POSITIVE),
        }
    }
}

/// How an object sits in the room.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mount", rename_all = "snake_case")]
pub enum MountKind {
    Floor,
    /// Mounted on a wall at the given base height (0 for doors).
    Wall {
        height: f64,
    },
}

/// Everything the solver needs to know about one object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub handle: String,
    /// (width, depth, height) meters in the object's canonical frame.
    pub dims: Vec3,
    /// Canonical front direction, default +Y.
    pub front_axis: Vec2,
    pub mount: MountKind,
}

impl ObjectSpec {
    pub fn floor(handle: &str, dims: Vec3) -> ObjectSpec {
        ObjectSpec {
            handle: handle.to_string(),
            dims,
            front_axis: Vec2::new(0.0, 1.0),
            mount: MountKind::Floor,
        }
    }

    pub fn wall(handle: &str, dims: Vec3, height: f64) -> ObjectSpec {
        ObjectSpec {
            handle: handle.to_string(),
            dims,
            front_axis: Vec2::new(0.0, 1.0),
            mount: MountKind::Wall { height },
        }
    }
}

/// A solved pose: grid position, quarter-turn yaw, derived footprint, and
/// the wall reference for mounted objects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub handle: String,
    pub center: Vec2,
    pub yaw: Yaw,
    pub footprint: Rect,
    /// World-frame front direction.
    pub front: Vec2,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mounted: Option<WallSide>,
    /// Base height above the floor; 0 for floor objects.
    #[serde(default)]
    pub mount_height: f64,
}

impl Placement {
    pub fn from_spec(
        spec: &ObjectSpec,
        center: Vec2,
        yaw: Yaw,
        mounted: Option<WallSide>,
    ) -> Placement {
        let mount_height = match spec.mount {
            MountKind::Floor => 0.0,
            MountKind::Wall { height } => height,
        };
        Placement {
            handle: spec.handle.clone(),
            center,
            yaw,
            footprint: Rect::from_dims_yaw(center, spec.dims.x, spec.dims.y, yaw),
            front: yaw.rotate(spec.front_axis),
            mounted,
            mount_height,
        }
    }
}

/// A solved room layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneLayout {
    pub room: Room,
    pub placements: Vec<Placement>,
    pub required: std::collections::BTreeSet<String>,
    /// Sum of satisfied soft-clause weights.
    pub score: f64,
}

impl SceneLayout {
    pub fn placement(&self, handle: &str) -> Option<&Placement> {
        self.placements.iter().find(|p| p.handle == handle)
    }
}

/// Numeric knobs of the geometric predicates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeomParams {
    /// Wall/corner contact tolerance, meters.
    pub snap: f64,
    /// Center-to-center radius for the near predicate, meters.
    pub near_radius: f64,
}

impl Default for GeomParams {
    fn default() -> Self {
        GeomParams {
            snap: 0.05,
            near_radius: 1.5,
        }
    }
}

/// Evaluates one clause against the current placements. A clause whose
/// subject or reference is not placed yet is unsatisfied.
pub fn satisfies(
    clause: &Clause,
    placements: &BTreeMap<String, Placement>,
    room: &Room,
    geom: &GeomParams,
) -> bool {
    let Some(subject) = placements.get(&clause.subject) else {
        return false;
    };
    match &clause.kind {
        ClauseKind::Central => {
            let band_x = (room.width / 3.0, room.width * 2.0 / 3.0);
            let band_y = (room.depth / 3.0, room.depth * 2.0 / 3.0);
            subject.center.x >= band_x.0
                && subject.center.x <= band_x.1
                && subject.center.y >= band_y.0
                && subject.center.y <= band_y.1
        }
        ClauseKind::Corner => {
            let fp = &subject.footprint;
            let west = fp.min_x() <= geom.snap;
            let east = fp.max_x() >= room.width - geom.snap;
            let south = fp.min_y() <= geom.snap;
            let north = fp.max_y() >= room.depth - geom.snap;
            (west || east) && (south || north)
        }
        ClauseKind::AgainstWall { wall } => {
            let fp = &subject.footprint;
            let touches = |w: WallSide| match w {
                WallSide::West => fp.min_x() <= geom.snap,
                WallSide::East => fp.max_x() >= room.width - geom.snap,
                WallSide::South => fp.min_y() <= geom.snap,
                WallSide::North => fp.max_y() >= room.depth - geom.snap,
            };
            match wall {
                Some(w) => touches(*w),
                None => WallSide::ALL.into_iter().any(touches),
            }
        }
        ClauseKind::LeftOf { reference } => {
            directional(subject, placements.get(reference), |f| f.observer_left())
        }
        ClauseKind::RightOf { reference } => {
            directional(subject, placements.get(reference), |f| -f.observer_left())
        }
        ClauseKind::InFrontOf { reference } => {
            directional(subject, placements.get(reference), |f| f)
        }
        ClauseKind::Behind { reference } => directional(subject, placements.get(reference), |f| -f),
        ClauseKind::Near { reference } => {
            let Some(reference) = placements.get(reference) else {
                return false;
            };
            subject.center.distance(reference.center) <= geom.near_radius
        }
        ClauseKind::OnTopOf { reference } => {
            let Some(reference) = placements.get(reference) else {
                return false;
            };
            reference.footprint.contains_rect(&subject.footprint, EPS)
        }
    }
}

fn directional(
    subject: &Placement,
    reference: Option<&Placement>,
    direction_of: impl Fn(Vec2) -> Vec2,
) -> bool {
    let Some(reference) = reference else {
        return false;
    };
    let delta = subject.center - reference.center;
    delta.dot(direction_of(reference.front)) > 0.0
}
