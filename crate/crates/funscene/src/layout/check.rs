//! Independent solution checker.
//!
//! Re-evaluates every hard clause, pairwise collision, and containment from
//! scratch, deliberately through different code than the solver: footprints
//! are re-derived by rotating corners with trigonometry, collisions use a
//! separating-axis test over corner polygons, and directional predicates go
//! through cross products and angles instead of the solver's half-plane dot
//! products. An empty report means the layout is valid.

use std::collections::BTreeMap;
use std::fmt;

use super::{
    Clause, ClauseKind, GeomParams, Hardness, ObjectSpec, Placement, SceneLayout, WallSide,
};
use crate::geom::Vec2;

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    MissingRequired { handle: String },
    OutsideRoom { handle: String },
    Collision { a: String, b: String },
    HardClauseViolated { clause: String },
    FootprintMismatch { handle: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingRequired { handle } => {
                write!(f, "missing required object '{handle}'")
            }
            Violation::OutsideRoom { handle } => write!(f, "'{handle}' is outside the room"),
            Violation::Collision { a, b } => write!(f, "collision between '{a}' and '{b}'"),
            Violation::HardClauseViolated { clause } => {
                write!(f, "hard clause violated: {clause}")
            }
            Violation::FootprintMismatch { handle } => {
                write!(f, "footprint of '{handle}' does not match its dims and yaw")
            }
        }
    }
}

/// Corner polygon of a placement, re-derived from the object's dims and yaw
/// with an explicit rotation matrix.
fn derived_corners(placement: &Placement, spec: &ObjectSpec) -> [Vec2; 4] {
    let theta = placement.yaw.radians();
    let (sin, cos) = theta.sin_cos();
    let (hw, hd) = (spec.dims.x * 0.5, spec.dims.y * 0.5);
    let local = [
        Vec2::new(-hw, -hd),
        Vec2::new(hw, -hd),
        Vec2::new(hw, hd),
        Vec2::new(-hw, hd),
    ];
    local.map(|p| {
        Vec2::new(
            placement.center.x + p.x * cos - p.y * sin,
            placement.center.y + p.x * sin + p.y * cos,
        )
    })
}

/// Separating-axis overlap test between two convex quads; shared edges do
/// not count as overlap.
fn quads_overlap(a: &[Vec2; 4], b: &[Vec2; 4]) -> bool {
    const GAP: f64 = 1e-9;
    for (quad, other) in [(a, b), (b, a)] {
        for i in 0..4 {
            let edge = quad[(i + 1) % 4] - quad[i];
            let axis = Vec2::new(-edge.y, edge.x);
            let project = |q: &[Vec2; 4]| {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for p in q {
                    let t = p.dot(axis);
                    lo = lo.min(t);
                    hi = hi.max(t);
                }
                (lo, hi)
            };
            let (alo, ahi) = project(quad);
            let (blo, bhi) = project(other);
            let scale = axis.length().max(1e-12);
            if ahi <= blo + GAP * scale || bhi <= alo + GAP * scale {
                return false;
            }
        }
    }
    true
}

fn angle_between(a: Vec2, b: Vec2) -> f64 {
    let dot = a.dot(b);
    let cross = a.cross_z(b);
    cross.atan2(dot).abs()
}

/// Re-evaluates one hard clause independently of `satisfies`.
fn clause_holds(
    clause: &Clause,
    placements: &BTreeMap<&str, &Placement>,
    corners: &BTreeMap<&str, [Vec2; 4]>,
    room_w: f64,
    room_d: f64,
    geom: &GeomParams,
) -> bool {
    let Some(subject) = placements.get(clause.subject.as_str()) else {
        return false;
    };
    let subject_corners = &corners[clause.subject.as_str()];
    let (min_x, max_x, min_y, max_y) = bounds(subject_corners);
    match &clause.kind {
        ClauseKind::Central => {
            // Middle third per axis, written multiplicatively.
            let c = subject.center;
            3.0 * c.x >= room_w
                && 3.0 * c.x <= 2.0 * room_w
                && 3.0 * c.y >= room_d
                && 3.0 * c.y <= 2.0 * room_d
        }
        ClauseKind::Corner => {
            let near_w = min_x <= geom.snap;
            let near_e = room_w - max_x <= geom.snap;
            let near_s = min_y <= geom.snap;
            let near_n = room_d - max_y <= geom.snap;
            (near_w || near_e) && (near_s || near_n)
        }
        ClauseKind::AgainstWall { wall } => {
            let touch = |w: &WallSide| match w {
                WallSide::West => min_x <= geom.snap,
                WallSide::East => room_w - max_x <= geom.snap,
                WallSide::South => min_y <= geom.snap,
                WallSide::North => room_d - max_y <= geom.snap,
            };
            match wall {
                Some(w) => touch(w),
                None => WallSide::ALL.iter().any(touch),
            }
        }
        ClauseKind::LeftOf { reference } => {
            // Left of the observer facing the reference's front: the
            // subject sits clockwise from the front direction.
            with_reference(placements, reference, |r| {
                let delta = subject.center - r.center;
                r.front.cross_z(delta) < 0.0
            })
        }
        ClauseKind::RightOf { reference } => with_reference(placements, reference, |r| {
            let delta = subject.center - r.center;
            r.front.cross_z(delta) > 0.0
        }),
        ClauseKind::InFrontOf { reference } => with_reference(placements, reference, |r| {
            let delta = subject.center - r.center;
            angle_between(r.front, delta) < std::f64::consts::FRAC_PI_2
        }),
        ClauseKind::Behind { reference } => with_reference(placements, reference, |r| {
            let delta = subject.center - r.center;
            angle_between(r.front, delta) > std::f64::consts::FRAC_PI_2
        }),
        ClauseKind::Near { reference } => with_reference(placements, reference, |r| {
            let dx = subject.center.x - r.center.x;
            let dy = subject.center.y - r.center.y;
            dx * dx + dy * dy <= geom.near_radius * geom.near_radius
        }),
        ClauseKind::OnTopOf { reference } => {
            let Some(reference_corners) = corners.get(reference.as_str()) else {
                return false;
            };
            let (rlo_x, rhi_x, rlo_y, rhi_y) = bounds(reference_corners);
            subject_corners.iter().all(|p| {
                p.x >= rlo_x - 1e-9
                    && p.x <= rhi_x + 1e-9
                    && p.y >= rlo_y - 1e-9
                    && p.y <= rhi_y + 1e-9
            })
        }
    }
}

fn with_reference(
    placements: &BTreeMap<&str, &Placement>,
    reference: &str,
    predicate: impl Fn(&Placement) -> bool,
) -> bool {
    placements.get(reference).is_some_and(|r| predicate(r))
}

fn bounds(corners: &[Vec2; 4]) -> (f64, f64, f64, f64) {
    let mut min_x = f64::INFINITY;
    let mut max_x = f64::NEG_INFINITY;
    let mut min_y = f64::INFINITY;
    let mut max_y = f64::NEG_INFINITY;
    for p in corners {
        min_x = min_x.min(p.x);
        max_x = max_x.max(p.x);
        min_y = min_y.min(p.y);
        max_y = max_y.max(p.y);
    }
    (min_x, max_x, min_y, max_y)
}

/// Full re-validation of a layout. `clauses` carries the whole clause set:
/// hard clauses are re-checked, and on-top-of pairs of any hardness mark
/// their footprint overlap as intended.
pub fn check_solution(
    layout: &SceneLayout,
    clauses: &[Clause],
    specs: &BTreeMap<String, ObjectSpec>,
    geom: &GeomParams,
) -> Vec<Violation> {
    let mut violations = Vec::new();

    for handle in &layout.required {
        if layout.placement(handle).is_none() {
            violations.push(Violation::MissingRequired {
                handle: handle.clone(),
            });
        }
    }

    let placements: BTreeMap<&str, &Placement> = layout
        .placements
        .iter()
        .map(|p| (p.handle.as_str(), p))
        .collect();
    let mut corners: BTreeMap<&str, [Vec2; 4]> = BTreeMap::new();
    for placement in &layout.placements {
        let Some(spec) = specs.get(&placement.handle) else {
            continue;
        };
        let quad = derived_corners(placement, spec);
        // The stored footprint must agree with dims + yaw.
        let (min_x, max_x, min_y, max_y) = bounds(&quad);
        let fp = &placement.footprint;
        if (fp.min_x() - min_x).abs() > 1e-9
            || (fp.max_x() - max_x).abs() > 1e-9
            || (fp.min_y() - min_y).abs() > 1e-9
            || (fp.max_y() - max_y).abs() > 1e-9
        {
            violations.push(Violation::FootprintMismatch {
                handle: placement.handle.clone(),
            });
        }
        if min_x < -1e-9
            || max_x > layout.room.width + 1e-9
            || min_y < -1e-9
            || max_y > layout.room.depth + 1e-9
        {
            violations.push(Violation::OutsideRoom {
                handle: placement.handle.clone(),
            });
        }
        corners.insert(placement.handle.as_str(), quad);
    }

    let mut exempt: Vec<(String, String)> = Vec::new();
    for clause in clauses {
        if let ClauseKind::OnTopOf { reference } = &clause.kind {
            exempt.push((clause.subject.clone(), reference.clone()));
        }
    }
    let exempt_pair = |a: &str, b: &str| {
        exempt
            .iter()
            .any(|(s, r)| (s == a && r == b) || (s == b && r == a))
    };
    // Mounted objects with raised bases pass over floor footprints; the
    // solver's rule, mirrored here.
    let plan_level = |p: &Placement| p.mounted.is_none() || p.mount_height <= 1e-9;
    for i in 0..layout.placements.len() {
        for j in (i + 1)..layout.placements.len() {
            let (a, b) = (&layout.placements[i], &layout.placements[j]);
            if exempt_pair(&a.handle, &b.handle) {
                continue;
            }
            match (a.mounted, b.mounted) {
                (Some(wa), Some(wb)) if wa != wb => continue,
                (Some(_), None) | (None, Some(_)) if !(plan_level(a) && plan_level(b)) => continue,
                _ => {}
            }
            let (Some(qa), Some(qb)) = (
                corners.get(a.handle.as_str()),
                corners.get(b.handle.as_str()),
            ) else {
                continue;
            };
            if quads_overlap(qa, qb) {
                violations.push(Violation::Collision {
                    a: a.handle.clone(),
                    b: b.handle.clone(),
                });
            }
        }
    }

    for clause in clauses.iter().filter(|c| c.hardness == Hardness::Hard) {
        if !clause_holds(
            clause,
            &placements,
            &corners,
            layout.room.width,
            layout.room.depth,
            geom,
        ) {
            violations.push(Violation::HardClauseViolated {
                clause: super::render_clause(clause),
            });
        }
    }

    violations
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Vec3, Yaw};
    use crate::layout::Room;

    fn setup(
        placements: Vec<(&str, f64, f64, f64, f64, Yaw)>,
    ) -> (SceneLayout, BTreeMap<String, ObjectSpec>) {
        let mut specs = BTreeMap::new();
        let mut placed = Vec::new();
        for (handle, x, y, w, d, yaw) in placements {
            let spec = ObjectSpec::floor(handle, Vec3::new(w, d, 1.0));
            placed.push(Placement::from_spec(&spec, Vec2::new(x, y), yaw, None));
            specs.insert(handle.to_string(), spec);
        }
        let layout = SceneLayout {
            room: Room::new(6.0, 6.0, Vec::new()).unwrap(),
            required: placed.iter().map(|p| p.handle.clone()).collect(),
            placements: placed,
            score: 0.0,
        };
        (layout, specs)
    }

    #[test]
    fn overlapping_footprints_report_collision() {
        let (layout, specs) = setup(vec![
            ("a", 2.0, 2.0, 1.0, 1.0, Yaw::D0),
            ("b", 2.4, 2.0, 1.0, 1.0, Yaw::D0),
        ]);
        let violations = check_solution(&layout, &[], &specs, &GeomParams::default());
        assert!(violations
            .iter()
            .any(|v| v.to_string().contains("collision")));
    }

    #[test]
    fn missing_required_object_is_reported() {
        let (mut layout, specs) = setup(vec![("a", 2.0, 2.0, 1.0, 1.0, Yaw::D0)]);
        layout.required.insert("ghost".to_string());
        let violations = check_solution(&layout, &[], &specs, &GeomParams::default());
        assert!(violations
            .iter()
            .any(|v| v.to_string().contains("missing required")));
    }

    #[test]
    fn touching_footprints_are_not_collisions() {
        let (layout, specs) = setup(vec![
            ("a", 2.0, 2.0, 1.0, 1.0, Yaw::D0),
            ("b", 3.0, 2.0, 1.0, 1.0, Yaw::D0),
        ]);
        let violations = check_solution(&layout, &[], &specs, &GeomParams::default());
        assert!(violations.is_empty(), "{violations:?}");
    }

    #[test]
    fn violated_hard_clause_is_reported() {
        let (layout, specs) = setup(vec![
            ("b", 3.0, 3.0, 1.0, 1.0, Yaw::D0),
            ("a", 1.0, 3.0, 0.5, 0.5, Yaw::D0),
        ]);
        // a is at B's observer-right, so left-of must fail.
        let clause = Clause::hard(
            "a",
            ClauseKind::LeftOf {
                reference: "b".into(),
            },
        );
        let violations = check_solution(&layout, &[clause], &specs, &GeomParams::default());
        assert_eq!(violations.len(), 1);
        assert!(violations[0].to_string().contains("hard clause violated"));
    }

    #[test]
    fn on_top_pairs_are_exempt_from_collision() {
        let (layout, specs) = setup(vec![
            ("table", 3.0, 3.0, 2.0, 1.0, Yaw::D0),
            ("lamp", 3.2, 3.0, 0.3, 0.3, Yaw::D0),
        ]);
        let clause = Clause::soft(
            "lamp",
            ClauseKind::OnTopOf {
                reference: "table".into(),
            },
            1.0,
        );
        let violations = check_solution(&layout, &[clause], &specs, &GeomParams::default());
        assert!(violations.is_empty(), "{violations:?}");
    }

    #[test]
    fn out_of_room_footprint_is_reported() {
        let (layout, specs) = setup(vec![("a", 0.2, 2.0, 1.0, 1.0, Yaw::D0)]);
        let violations = check_solution(&layout, &[], &specs, &GeomParams::default());
        assert!(violations.iter().any(|v| v.to_string().contains("outside")));
    }
}
