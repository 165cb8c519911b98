//! Two-pass depth-first placement search.
//!
//! Pass 1 places the required objects under hard constraints with full
//! backtracking: objects go in clause-dependency order, candidate poses are
//! grid positions times four yaws (wall offsets for mounted objects), and a
//! pose is accepted only when every applicable hard clause holds and nothing
//! collides. Pass 2 greedily adds the extras: each takes the collision-free
//! pose maximizing its satisfied soft-clause weight and is skipped when no
//! pose fits; extras never move pass-1 objects and never fail the solve.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{
    satisfies, Clause, ClauseKind, GeomParams, Hardness, MountKind, ObjectSpec, Placement, Room,
    SceneLayout, WallSide,
};
use crate::geom::{Rect, Vec2, Yaw, EPS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Infeasible {
    #[error("no placement satisfies all hard constraints (search exhausted at '{exhausted}')")]
    Unsat {
        /// The object whose candidates ran out at the search frontier.
        exhausted: String,
    },
    #[error("time limit elapsed before a solution was found")]
    Timeout,
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Infeasible(#[from] Infeasible),
    #[error("bad solver parameter: {0}")]
    BadParams(String),
    #[error("duplicate object handle '{0}'")]
    DuplicateHandle(String),
    #[error("clause on '{subject}' references unplaceable object '{reference}'")]
    UnknownReference { subject: String, reference: String },
    #[error("hard clause on extra object '{0}'; extras take soft clauses only")]
    HardClauseOnExtra(String),
    #[error("hard clause on '{subject}' references extra object '{reference}'")]
    HardReferenceOnExtra { subject: String, reference: String },
    #[error("clause subject '{clause_subject}' does not match object '{object}'")]
    SubjectMismatch {
        clause_subject: String,
        object: String,
    },
}

/// One object plus the clauses attached to it.
#[derive(Debug, Clone)]
pub struct SolveObject {
    pub spec: ObjectSpec,
    pub clauses: Vec<Clause>,
}

impl SolveObject {
    pub fn new(spec: ObjectSpec, clauses: Vec<Clause>) -> Self {
        SolveObject { spec, clauses }
    }
}

#[derive(Debug, Clone)]
pub struct SolveParams {
    /// Candidate grid spacing, meters.
    pub grid_step: f64,
    pub time_limit: Duration,
    pub seed: u64,
    pub geom: GeomParams,
    /// Shuffle candidate order (default); disabled, candidates run
    /// center-outward for reproducible textbook layouts.
    pub shuffle: bool,
}

impl Default for SolveParams {
    fn default() -> Self {
        SolveParams {
            grid_step: 0.1,
            time_limit: Duration::from_secs(10),
            seed: 0,
            geom: GeomParams::default(),
            shuffle: true,
        }
    }
}

/// Solves the room. Pass 1 must place every required object; extras are
/// best-effort. See the module docs for the search contract.
pub fn solve(
    room: &Room,
    required: &[SolveObject],
    extras: &[SolveObject],
    params: &SolveParams,
) -> Result<SceneLayout, SolveError> {
    validate_inputs(required, extras, params)?;
    let deadline = Instant::now() + params.time_limit;

    // Effective hard clauses: dependency cycles are broken by demoting one
    // clause per cycle to soft.
    let (order, hard_by_object, demoted) = dependency_order(required)?;

    let mut exempt_pairs: BTreeSet<(String, String)> = BTreeSet::new();
    for object in required.iter().chain(extras) {
        for clause in &object.clauses {
            if let ClauseKind::OnTopOf { reference } = &clause.kind {
                exempt_pairs.insert(pair_key(&clause.subject, reference));
            }
        }
    }

    let mut ctx = Ctx {
        room,
        params,
        exempt_pairs,
        deadline,
        tick: 0,
        max_depth: 0,
    };

    let mut placed: BTreeMap<String, Placement> = BTreeMap::new();
    if !order.is_empty() {
        let specs: Vec<&SolveObject> = order.iter().map(|&i| &required[i]).collect();
        let candidate_sets: Vec<Vec<(Vec2, Yaw, Option<WallSide>)>> = specs
            .iter()
            .enumerate()
            .map(|(depth, object)| {
                let mut candidates = enumerate_candidates(&object.spec, room, params);
                prefilter_absolute(
                    &mut candidates,
                    &object.spec,
                    hard_by_object
                        .get(&object.spec.handle)
                        .map_or(&[][..], |v| v),
                    room,
                    &params.geom,
                );
                order_candidates(&mut candidates, room, params, depth);
                candidates
            })
            .collect();
        let found = dfs(
            &mut ctx,
            &specs,
            &candidate_sets,
            &hard_by_object,
            0,
            &mut placed,
        )?;
        if !found {
            // The deepest object reached is the search bottleneck.
            let exhausted = specs[ctx.max_depth.min(specs.len() - 1)]
                .spec
                .handle
                .clone();
            return Err(SolveError::Infeasible(Infeasible::Unsat { exhausted }));
        }
    }

    // Pass 2: greedy extras, independent random stream so pass-1 results do
    // not depend on the extras list.
    for (idx, extra) in extras.iter().enumerate() {
        let mut candidates = enumerate_candidates(&extra.spec, room, params);
        order_candidates(&mut candidates, room, params, 0x5EED + idx);
        let soft: Vec<&Clause> = extra
            .clauses
            .iter()
            .filter(|c| c.hardness == Hardness::Soft)
            .collect();
        let mut best: Option<(f64, Placement)> = None;
        for &(center, yaw, mounted) in &candidates {
            ctx.check_deadline()?;
            let placement = Placement::from_spec(&extra.spec, center, yaw, mounted);
            if ctx.collides(&placement, &placed) {
                continue;
            }
            let mut trial = placed.clone();
            trial.insert(placement.handle.clone(), placement.clone());
            let score: f64 = soft
                .iter()
                .filter(|c| satisfies(c, &trial, room, &params.geom))
                .map(|c| c.weight)
                .sum();
            if best.as_ref().is_none_or(|(s, _)| score > *s) {
                best = Some((score, placement));
            }
            // A pose satisfying every soft clause cannot be beaten.
            if let Some((s, _)) = &best {
                if (*s - soft.iter().map(|c| c.weight).sum::<f64>()).abs() < EPS {
                    break;
                }
            }
        }
        match best {
            Some((_, placement)) => {
                placed.insert(placement.handle.clone(), placement);
            }
            None => log::info!(
                "pass 2: no collision-free pose for extra '{}', skipped",
                extra.spec.handle
            ),
        }
    }

    // Score: satisfied soft weights over the final layout, demoted clauses
    // included.
    let all_soft: Vec<&Clause> = required
        .iter()
        .chain(extras)
        .flat_map(|o| o.clauses.iter())
        .filter(|c| c.hardness == Hardness::Soft)
        .chain(demoted.iter())
        .collect();
    let score = all_soft
        .iter()
        .filter(|c| satisfies(c, &placed, room, &params.geom))
        .map(|c| c.weight)
        .sum();

    let mut placements: Vec<Placement> = Vec::new();
    for object in required.iter().chain(extras.iter()) {
        if let Some(p) = placed.get(&object.spec.handle) {
            placements.push(p.clone());
        }
    }
    Ok(SceneLayout {
        room: room.clone(),
        placements,
        required: required.iter().map(|o| o.spec.handle.clone()).collect(),
        score,
    })
}

fn validate_inputs(
    required: &[SolveObject],
    extras: &[SolveObject],
    params: &SolveParams,
) -> Result<(), SolveError> {
    if !params.grid_step.is_finite() || params.grid_step <= 0.0 {
        return Err(SolveError::BadParams("grid_step must be positive".into()));
    }
    if params.time_limit.is_zero() {
        return Err(SolveError::BadParams("time_limit must be positive".into()));
    }
    let mut handles = BTreeSet::new();
    for object in required.iter().chain(extras) {
        if !handles.insert(object.spec.handle.clone()) {
            return Err(SolveError::DuplicateHandle(object.spec.handle.clone()));
        }
    }
    let required_set: BTreeSet<&str> = required.iter().map(|o| o.spec.handle.as_str()).collect();
    for object in required.iter().chain(extras) {
        for clause in &object.clauses {
            if clause.subject != object.spec.handle {
                return Err(SolveError::SubjectMismatch {
                    clause_subject: clause.subject.clone(),
                    object: object.spec.handle.clone(),
                });
            }
            if let Some(reference) = clause.kind.reference() {
                if !handles.contains(reference) {
                    return Err(SolveError::UnknownReference {
                        subject: clause.subject.clone(),
                        reference: reference.to_string(),
                    });
                }
                if clause.hardness == Hardness::Hard && !required_set.contains(reference) {
                    return Err(SolveError::HardReferenceOnExtra {
                        subject: clause.subject.clone(),
                        reference: reference.to_string(),
                    });
                }
            }
        }
    }
    for extra in extras {
        if extra.clauses.iter().any(|c| c.hardness == Hardness::Hard) {
            return Err(SolveError::HardClauseOnExtra(extra.spec.handle.clone()));
        }
    }
    Ok(())
}

fn pair_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

/// Sorts required objects so every hard relative clause's reference comes
/// before its subject. Cycles are broken by demoting the lexicographically
/// smallest participating clause to soft, with a warning. Returns the order,
/// per-object hard clauses, and the demoted clauses.
#[allow(clippy::type_complexity)]
fn dependency_order(
    required: &[SolveObject],
) -> Result<(Vec<usize>, BTreeMap<String, Vec<Clause>>, Vec<Clause>), SolveError> {
    let index_of: BTreeMap<&str, usize> = required
        .iter()
        .enumerate()
        .map(|(i, o)| (o.spec.handle.as_str(), i))
        .collect();
    let mut hard: Vec<Clause> = required
        .iter()
        .flat_map(|o| o.clauses.iter())
        .filter(|c| c.hardness == Hardness::Hard)
        .cloned()
        .collect();
    let mut demoted: Vec<Clause> = Vec::new();

    loop {
        // Kahn's algorithm, stable in input order.
        let n = required.len();
        let mut deps: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for clause in &hard {
            if let Some(reference) = clause.kind.reference() {
                let subject = index_of[clause.subject.as_str()];
                let reference = index_of[reference];
                if subject != reference {
                    deps[subject].insert(reference);
                }
            }
        }
        let mut order = Vec::with_capacity(n);
        let mut placed = vec![false; n];
        loop {
            let next = (0..n).find(|&i| !placed[i] && deps[i].iter().all(|&d| placed[d]));
            match next {
                Some(i) => {
                    placed[i] = true;
                    order.push(i);
                }
                None => break,
            }
            if order.len() == n {
                break;
            }
        }
        if order.len() == n {
            let mut by_object: BTreeMap<String, Vec<Clause>> = BTreeMap::new();
            for clause in hard {
                by_object
                    .entry(clause.subject.clone())
                    .or_default()
                    .push(clause);
            }
            return Ok((order, by_object, demoted));
        }
        // Some objects remain: pick the smallest clause among those on
        // unplaced objects and demote it.
        let stuck: BTreeSet<&str> = (0..n)
            .filter(|&i| !placed[i])
            .map(|i| required[i].spec.handle.as_str())
            .collect();
        let victim = hard
            .iter()
            .enumerate()
            .filter(|(_, c)| {
                stuck.contains(c.subject.as_str())
                    && c.kind.reference().is_some_and(|r| stuck.contains(r))
            })
            .min_by_key(|(_, c)| {
                (
                    c.weight.to_bits(),
                    c.subject.clone(),
                    c.kind.name(),
                    c.kind.reference().unwrap_or("").to_string(),
                )
            })
            .map(|(i, _)| i);
        match victim {
            Some(i) => {
                let mut clause = hard.remove(i);
                log::warn!(
                    "clause dependency cycle: demoting '{} {}' to soft",
                    clause.subject,
                    clause.kind.name()
                );
                clause.hardness = Hardness::Soft;
                demoted.push(clause);
            }
            None => {
                // No demotable clause found; should not happen.
                return Err(SolveError::BadParams(
                    "unresolvable clause dependency cycle".into(),
                ));
            }
        }
    }
}

struct Ctx<'a> {
    room: &'a Room,
    params: &'a SolveParams,
    exempt_pairs: BTreeSet<(String, String)>,
    deadline: Instant,
    tick: u32,
    max_depth: usize,
}

impl Ctx<'_> {
    fn check_deadline(&mut self) -> Result<(), Infeasible> {
        self.tick = self.tick.wrapping_add(1);
        if self.tick.is_multiple_of(512) && Instant::now() >= self.deadline {
            return Err(Infeasible::Timeout);
        }
        Ok(())
    }

    /// Collision rules: floor objects collide with floor objects and with
    /// floor-level mounted objects (doors); mounted objects collide with
    /// mounted objects on the same wall. Raised mounted objects (switches,
    /// windows) pass over floor footprints. On-top-of pairs are exempt.
    fn collides(&self, candidate: &Placement, placed: &BTreeMap<String, Placement>) -> bool {
        // Mounted objects must also avoid the room's own openings.
        if let Some(wall) = candidate.mounted {
            for opening in &self.room.openings {
                if opening.wall != wall {
                    continue;
                }
                let span = wall_span(&candidate.footprint, wall);
                if span.0 < opening.span.1 - EPS && opening.span.0 < span.1 - EPS {
                    return true;
                }
            }
        }
        for other in placed.values() {
            if self
                .exempt_pairs
                .contains(&pair_key(&candidate.handle, &other.handle))
            {
                continue;
            }
            let hit = match (candidate.mounted, other.mounted) {
                (None, None) => candidate.footprint.overlaps(&other.footprint),
                (Some(a), Some(b)) => a == b && candidate.footprint.overlaps(&other.footprint),
                (Some(_), None) => {
                    candidate.mount_height <= EPS && candidate.footprint.overlaps(&other.footprint)
                }
                (None, Some(_)) => {
                    other.mount_height <= EPS && candidate.footprint.overlaps(&other.footprint)
                }
            };
            if hit {
                return true;
            }
        }
        false
    }
}

fn wall_span(footprint: &Rect, wall: WallSide) -> (f64, f64) {
    match wall {
        WallSide::North | WallSide::South => (footprint.min_x(), footprint.max_x()),
        WallSide::East | WallSide::West => (footprint.min_y(), footprint.max_y()),
    }
}

/// Grid poses for a floor object, wall offsets for a mounted one. Poses are
/// containment-valid by construction.
fn enumerate_candidates(
    spec: &ObjectSpec,
    room: &Room,
    params: &SolveParams,
) -> Vec<(Vec2, Yaw, Option<WallSide>)> {
    let step = params.grid_step;
    let mut out = Vec::new();
    match spec.mount {
        MountKind::Floor => {
            for yaw in Yaw::ALL {
                let fp = Rect::from_dims_yaw(Vec2::default(), spec.dims.x, spec.dims.y, yaw);
                let (hx, hy) = (fp.half.x, fp.half.y);
                if 2.0 * hx > room.width + EPS || 2.0 * hy > room.depth + EPS {
                    continue;
                }
                // Grid coordinates plus the wall-flush lines, so coarse
                // grids can still satisfy against-wall and corner clauses.
                let xs = axis_coordinates(room.width, step, hx);
                let ys = axis_coordinates(room.depth, step, hy);
                for &x in &xs {
                    for &y in &ys {
                        out.push((Vec2::new(x, y), yaw, None));
                    }
                }
            }
        }
        MountKind::Wall { .. } => {
            for wall in WallSide::ALL {
                let length = room.wall_length(wall);
                let yaw = facing_yaw(spec.front_axis, wall.inward());
                // Flush against the wall: the center sits half the footprint
                // depth into the room.
                let fp = Rect::from_dims_yaw(Vec2::default(), spec.dims.x, spec.dims.y, yaw);
                let (along_half, inset) = match wall {
                    WallSide::North | WallSide::South => (fp.half.x, fp.half.y),
                    WallSide::East | WallSide::West => (fp.half.y, fp.half.x),
                };
                if 2.0 * along_half > length + EPS {
                    continue;
                }
                for t in axis_coordinates(length, step, along_half) {
                    let center = match wall {
                        WallSide::South => Vec2::new(t, inset),
                        WallSide::North => Vec2::new(t, room.depth - inset),
                        WallSide::West => Vec2::new(inset, t),
                        WallSide::East => Vec2::new(room.width - inset, t),
                    };
                    out.push((center, yaw, Some(wall)));
                }
            }
        }
    }
    out
}

/// Center coordinates along one axis: grid multiples that keep the object
/// inside, plus the two wall-flush positions.
fn axis_coordinates(extent: f64, step: f64, half: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let n = (extent / step).floor() as i64;
    for i in 0..=n {
        let t = i as f64 * step;
        if t - half >= -EPS && t + half <= extent + EPS {
            out.push(t);
        }
    }
    for t in [half, extent - half] {
        if t - half >= -EPS && t + half <= extent + EPS {
            out.push(t);
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() < EPS);
    out
}

/// The yaw that turns the canonical front closest to `target`.
fn facing_yaw(front_axis: Vec2, target: Vec2) -> Yaw {
    Yaw::ALL
        .into_iter()
        .max_by(|a, b| {
            a.rotate(front_axis)
                .dot(target)
                .total_cmp(&b.rotate(front_axis).dot(target))
        })
        .unwrap_or(Yaw::D0)
}

/// Drops candidates that already violate the object's absolute hard clauses;
/// relative clauses wait for their references.
fn prefilter_absolute(
    candidates: &mut Vec<(Vec2, Yaw, Option<WallSide>)>,
    spec: &ObjectSpec,
    hard: &[Clause],
    room: &Room,
    geom: &GeomParams,
) {
    let absolute: Vec<&Clause> = hard
        .iter()
        .filter(|c| c.kind.reference().is_none())
        .collect();
    if absolute.is_empty() {
        return;
    }
    let empty = BTreeMap::new();
    candidates.retain(|&(center, yaw, mounted)| {
        let placement = Placement::from_spec(spec, center, yaw, mounted);
        let mut single = empty.clone();
        single.insert(placement.handle.clone(), placement);
        absolute.iter().all(|c| satisfies(c, &single, room, geom))
    });
}

/// Deterministic candidate order: seeded shuffle, or center-outward sweep
/// when shuffling is disabled.
fn order_candidates(
    candidates: &mut [(Vec2, Yaw, Option<WallSide>)],
    room: &Room,
    params: &SolveParams,
    salt: usize,
) {
    if params.shuffle {
        let seed = params
            .seed
            .wrapping_add((salt as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        candidates.shuffle(&mut rng);
    } else {
        let center = room.center();
        candidates.sort_by(|a, b| {
            let da = (a.0 - center).dot(a.0 - center);
            let db = (b.0 - center).dot(b.0 - center);
            da.total_cmp(&db)
                .then_with(|| a.0.x.total_cmp(&b.0.x))
                .then_with(|| a.0.y.total_cmp(&b.0.y))
                .then_with(|| a.1.degrees().cmp(&b.1.degrees()))
        });
    }
}

fn dfs(
    ctx: &mut Ctx<'_>,
    objects: &[&SolveObject],
    candidate_sets: &[Vec<(Vec2, Yaw, Option<WallSide>)>],
    hard_by_object: &BTreeMap<String, Vec<Clause>>,
    depth: usize,
    placed: &mut BTreeMap<String, Placement>,
) -> Result<bool, Infeasible> {
    if depth == objects.len() {
        return Ok(true);
    }
    ctx.max_depth = ctx.max_depth.max(depth);
    let object = objects[depth];
    let relative: Vec<&Clause> = hard_by_object
        .get(&object.spec.handle)
        .map_or(&[][..], |v| v)
        .iter()
        .filter(|c| c.kind.reference().is_some())
        .collect();
    for &(center, yaw, mounted) in &candidate_sets[depth] {
        ctx.check_deadline()?;
        let placement = Placement::from_spec(&object.spec, center, yaw, mounted);
        if ctx.collides(&placement, placed) {
            continue;
        }
        placed.insert(placement.handle.clone(), placement);
        // Hard clauses whose reference is already placed must hold now;
        // dependency order guarantees that covers all of them.
        let ok = relative.iter().all(|c| {
            let reference_placed = c
                .kind
                .reference()
                .map(|r| placed.contains_key(r))
                .unwrap_or(true);
            !reference_placed || satisfies(c, placed, ctx.room, &ctx.params.geom)
        });
        if ok
            && dfs(
                ctx,
                objects,
                candidate_sets,
                hard_by_object,
                depth + 1,
                placed,
            )?
        {
            return Ok(true);
        }
        placed.remove(&object.spec.handle);
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec3;
    use crate::layout::check_solution;

    fn room(w: f64, d: f64) -> Room {
        Room::new(w, d, Vec::new()).unwrap()
    }

    fn obj(handle: &str, w: f64, d: f64, clauses: Vec<Clause>) -> SolveObject {
        SolveObject::new(ObjectSpec::floor(handle, Vec3::new(w, d, 1.0)), clauses)
    }

    #[test]
    fn central_clause_places_at_exact_center_without_shuffle() {
        let room = room(4.0, 4.0);
        let required = vec![obj(
            "table",
            1.0,
            1.0,
            vec![Clause::hard("table", ClauseKind::Central)],
        )];
        let params = SolveParams {
            shuffle: false,
            ..SolveParams::default()
        };
        let layout = solve(&room, &required, &[], &params).unwrap();
        let p = layout.placement("table").unwrap();
        assert_eq!(p.center, Vec2::new(2.0, 2.0));
    }

    #[test]
    fn central_clause_holds_under_shuffle() {
        let room = room(4.0, 4.0);
        let required = vec![obj(
            "table",
            1.0,
            1.0,
            vec![Clause::hard("table", ClauseKind::Central)],
        )];
        for seed in 0..5 {
            let params = SolveParams {
                seed,
                ..SolveParams::default()
            };
            let layout = solve(&room, &required, &[], &params).unwrap();
            let p = layout.placement("table").unwrap();
            assert!(p.center.x >= 4.0 / 3.0 && p.center.x <= 8.0 / 3.0);
            assert!(p.center.y >= 4.0 / 3.0 && p.center.y <= 8.0 / 3.0);
        }
    }

    #[test]
    fn oversized_objects_are_unsat() {
        let room = room(2.0, 2.0);
        let required = vec![obj("a", 3.0, 3.0, vec![]), obj("b", 3.0, 3.0, vec![])];
        let err = solve(&room, &required, &[], &SolveParams::default()).unwrap_err();
        assert!(matches!(
            err,
            SolveError::Infeasible(Infeasible::Unsat { .. })
        ));
    }

    #[test]
    fn left_of_layout_passes_the_checker_across_seeds() {
        let room = room(5.0, 5.0);
        for seed in 0..20 {
            let required = vec![
                obj("bed", 2.0, 1.6, vec![]),
                obj(
                    "nightstand",
                    0.5,
                    0.5,
                    vec![
                        Clause::hard(
                            "nightstand",
                            ClauseKind::LeftOf {
                                reference: "bed".into(),
                            },
                        ),
                        Clause::hard(
                            "nightstand",
                            ClauseKind::Near {
                                reference: "bed".into(),
                            },
                        ),
                    ],
                ),
            ];
            let params = SolveParams {
                seed,
                grid_step: 0.25,
                ..SolveParams::default()
            };
            let layout = solve(&room, &required, &[], &params).unwrap();
            let clauses: Vec<Clause> = required.iter().flat_map(|o| o.clauses.clone()).collect();
            let specs: BTreeMap<String, ObjectSpec> = required
                .iter()
                .map(|o| (o.spec.handle.clone(), o.spec.clone()))
                .collect();
            let violations = check_solution(&layout, &clauses, &specs, &params.geom);
            assert!(violations.is_empty(), "seed {seed}: {violations:?}");
        }
    }

    #[test]
    fn determinism_same_seed_same_layout() {
        let room = room(5.0, 4.0);
        let required = vec![
            obj(
                "bed",
                2.0,
                1.6,
                vec![Clause::hard("bed", ClauseKind::AgainstWall { wall: None })],
            ),
            obj("desk", 1.2, 0.6, vec![]),
        ];
        let extras = vec![obj(
            "plant",
            0.4,
            0.4,
            vec![Clause::soft("plant", ClauseKind::Corner, 1.0)],
        )];
        let params = SolveParams {
            seed: 11,
            grid_step: 0.25,
            ..SolveParams::default()
        };
        let a = solve(&room, &required, &extras, &params).unwrap();
        let b = solve(&room, &required, &extras, &params).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pass_two_never_moves_pass_one_objects() {
        let room = room(5.0, 4.0);
        let required = vec![
            obj(
                "bed",
                2.0,
                1.6,
                vec![Clause::hard("bed", ClauseKind::AgainstWall { wall: None })],
            ),
            obj("wardrobe", 1.2, 0.6, vec![]),
        ];
        let extras = vec![
            obj(
                "plant",
                0.4,
                0.4,
                vec![Clause::soft("plant", ClauseKind::Corner, 1.0)],
            ),
            obj(
                "chair",
                0.5,
                0.5,
                vec![Clause::soft(
                    "chair",
                    ClauseKind::Near {
                        reference: "bed".into(),
                    },
                    1.0,
                )],
            ),
        ];
        let params = SolveParams {
            seed: 3,
            grid_step: 0.25,
            ..SolveParams::default()
        };
        let with = solve(&room, &required, &extras, &params).unwrap();
        let without = solve(&room, &required, &[], &params).unwrap();
        for object in &required {
            assert_eq!(
                with.placement(&object.spec.handle),
                without.placement(&object.spec.handle)
            );
        }
        assert!(with.placements.len() >= without.placements.len());
    }

    #[test]
    fn extras_are_skipped_when_nothing_fits() {
        let room = room(2.0, 2.0);
        let required = vec![obj("bed", 1.9, 1.9, vec![])];
        let extras = vec![obj("wardrobe", 1.0, 1.0, vec![])];
        let layout = solve(&room, &required, &extras, &SolveParams::default()).unwrap();
        assert!(layout.placement("bed").is_some());
        assert!(layout.placement("wardrobe").is_none());
    }

    #[test]
    fn hard_clause_on_extra_is_rejected() {
        let room = room(4.0, 4.0);
        let extras = vec![obj(
            "plant",
            0.4,
            0.4,
            vec![Clause::hard("plant", ClauseKind::Central)],
        )];
        assert!(matches!(
            solve(&room, &[], &extras, &SolveParams::default()),
            Err(SolveError::HardClauseOnExtra(_))
        ));
    }

    #[test]
    fn contradictory_directionals_are_unsat() {
        let room = room(4.0, 4.0);
        let required = vec![
            obj("bed", 1.0, 1.0, vec![]),
            obj(
                "nightstand",
                0.5,
                0.5,
                vec![
                    Clause::hard(
                        "nightstand",
                        ClauseKind::LeftOf {
                            reference: "bed".into(),
                        },
                    ),
                    Clause::hard(
                        "nightstand",
                        ClauseKind::RightOf {
                            reference: "bed".into(),
                        },
                    ),
                ],
            ),
        ];
        let params = SolveParams {
            grid_step: 0.5,
            ..SolveParams::default()
        };
        let err = solve(&room, &required, &[], &params).unwrap_err();
        assert!(matches!(
            err,
            SolveError::Infeasible(Infeasible::Unsat { .. })
        ));
    }

    #[test]
    fn cyclic_hard_clauses_are_demoted_not_fatal() {
        let room = room(5.0, 5.0);
        let required = vec![
            obj(
                "a",
                0.5,
                0.5,
                vec![Clause::hard(
                    "a",
                    ClauseKind::Near {
                        reference: "b".into(),
                    },
                )],
            ),
            obj(
                "b",
                0.5,
                0.5,
                vec![Clause::hard(
                    "b",
                    ClauseKind::Near {
                        reference: "a".into(),
                    },
                )],
            ),
        ];
        let params = SolveParams {
            grid_step: 0.5,
            ..SolveParams::default()
        };
        let layout = solve(&room, &required, &[], &params).unwrap();
        assert_eq!(layout.placements.len(), 2);
    }

    #[test]
    fn wall_mounted_objects_sit_on_a_wall_facing_inward() {
        let room = room(4.0, 4.0);
        let switch = SolveObject::new(
            ObjectSpec::wall("switch", Vec3::new(0.1, 0.03, 0.1), 1.2),
            vec![],
        );
        let layout = solve(&room, &[switch], &[], &SolveParams::default()).unwrap();
        let p = layout.placement("switch").unwrap();
        let wall = p.mounted.expect("switch is mounted");
        assert!((p.front.dot(wall.inward()) - 1.0).abs() < 1e-9);
        assert_eq!(p.mount_height, 1.2);
        assert!(room.contains_rect(&p.footprint, 1e-9));
    }

    #[test]
    fn longer_time_limits_reproduce_the_same_layout() {
        let room = room(5.0, 5.0);
        let required = vec![
            obj(
                "bed",
                2.0,
                1.6,
                vec![Clause::hard("bed", ClauseKind::AgainstWall { wall: None })],
            ),
            obj(
                "desk",
                1.2,
                0.6,
                vec![Clause::hard(
                    "desk",
                    ClauseKind::Near {
                        reference: "bed".into(),
                    },
                )],
            ),
        ];
        let quick = SolveParams {
            seed: 5,
            grid_step: 0.25,
            time_limit: Duration::from_secs(10),
            ..SolveParams::default()
        };
        let generous = SolveParams {
            time_limit: Duration::from_secs(60),
            ..quick.clone()
        };
        let a = solve(&room, &required, &[], &quick).unwrap();
        let b = solve(&room, &required, &[], &generous).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn timeout_is_reported() {
        let room = room(8.0, 8.0);
        // Unsatisfiable relative pair over a dense grid: the search space is
        // large enough that a tiny budget trips first.
        let required = vec![
            obj("a", 0.5, 0.5, vec![]),
            obj(
                "b",
                0.5,
                0.5,
                vec![
                    Clause::hard(
                        "b",
                        ClauseKind::LeftOf {
                            reference: "a".into(),
                        },
                    ),
                    Clause::hard(
                        "b",
                        ClauseKind::RightOf {
                            reference: "a".into(),
                        },
                    ),
                ],
            ),
        ];
        let params = SolveParams {
            grid_step: 0.05,
            time_limit: Duration::from_millis(1),
            ..SolveParams::default()
        };
        let err = solve(&room, &required, &[], &params).unwrap_err();
        assert!(matches!(err, SolveError::Infeasible(Infeasible::Timeout)));
    }
}
