//! Two-pass constraint solving: hard clauses for the required objects, soft
//! scored placement for the extras, and the independent checker over the
//! result.
//!
//! Run with: `cargo run --example solve_layout`

use std::collections::BTreeMap;

use funscene::geom::Vec3;
use funscene::layout::{
    check_solution, parse_clause_line, solve, Clause, ObjectSpec, Room, SolveObject, SolveParams,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let room = Room::new(5.0, 4.0, Vec::new())?;

    // Clause DSL, exactly as a clause file would carry it.
    let hard_lines = [
        "bed | against-wall",
        "nightstand, bed | left-of",
        "nightstand, bed | near",
        "table | central",
    ];
    let soft_lines = ["plant | corner | soft 1", "chair, table | near | soft 2"];

    let mut clauses_by_subject: BTreeMap<String, Vec<Clause>> = BTreeMap::new();
    for line in hard_lines.iter().chain(soft_lines.iter()) {
        let clause = parse_clause_line(line)?;
        clauses_by_subject
            .entry(clause.subject.clone())
            .or_default()
            .push(clause);
    }

    let spec = |name: &str, w: f64, d: f64, h: f64| ObjectSpec::floor(name, Vec3::new(w, d, h));
    let required = vec![
        SolveObject::new(
            spec("bed", 2.0, 1.6, 0.5),
            clauses_by_subject.remove("bed").unwrap_or_default(),
        ),
        SolveObject::new(
            spec("nightstand", 0.5, 0.45, 0.6),
            clauses_by_subject.remove("nightstand").unwrap_or_default(),
        ),
        SolveObject::new(
            spec("table", 1.2, 0.8, 0.75),
            clauses_by_subject.remove("table").unwrap_or_default(),
        ),
    ];
    let extras = vec![
        SolveObject::new(
            spec("plant", 0.4, 0.4, 1.2),
            clauses_by_subject.remove("plant").unwrap_or_default(),
        ),
        SolveObject::new(
            spec("chair", 0.5, 0.5, 0.9),
            clauses_by_subject.remove("chair").unwrap_or_default(),
        ),
    ];

    let params = SolveParams {
        grid_step: 0.25,
        seed: 17,
        ..SolveParams::default()
    };
    let layout = solve(&room, &required, &extras, &params)?;
    println!(
        "solved {}x{} room, score {:.1}",
        room.width, room.depth, layout.score
    );
    for placement in &layout.placements {
        println!(
            "  {:<11} at ({:.2}, {:.2}) yaw {:>3} footprint [{:.2},{:.2}]x[{:.2},{:.2}]",
            placement.handle,
            placement.center.x,
            placement.center.y,
            placement.yaw.degrees(),
            placement.footprint.min_x(),
            placement.footprint.max_x(),
            placement.footprint.min_y(),
            placement.footprint.max_y(),
        );
    }

    // Independent re-validation: hard clauses, collisions, containment.
    let all_clauses: Vec<Clause> = required
        .iter()
        .chain(extras.iter())
        .flat_map(|o| o.clauses.clone())
        .collect();
    let specs: BTreeMap<String, ObjectSpec> = required
        .iter()
        .chain(extras.iter())
        .map(|o| (o.spec.handle.clone(), o.spec.clone()))
        .collect();
    let violations = check_solution(&layout, &all_clauses, &specs, &params.geom);
    println!("checker violations: {}", violations.len());
    Ok(())
}
