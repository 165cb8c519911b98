//! Annotation export: orbit cameras around a functional element, pinhole
//! projection, frame filtering, and pointing-sample emission.
//!
//! Run with: `cargo run --example export_annotations`

use funscene::export::{
    build_frame, emit_pointing_samples, orbit_trajectory, part_world_corners, part_world_point,
    select_frames, FilterMode, Intrinsics, OrbitParams,
};
use funscene::fixture::nightstand_with_vertical_handles;
use funscene::geom::{Vec2, Yaw};
use funscene::layout::{ObjectSpec, Placement, Room};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // A nightstand against the south wall of a small room.
    let room = Room::new(4.0, 4.0, Vec::new())?;
    let asset = nightstand_with_vertical_handles("nightstand", 2);
    let spec = ObjectSpec::floor("nightstand", asset.dims);
    let placement = Placement::from_spec(&spec, Vec2::new(2.0, 0.3), Yaw::D0, None);

    // Target: the top drawer handle.
    let part = asset.part("nightstand_h1").expect("fixture part exists");
    let target = part_world_point(&placement, part.centroid3);
    println!(
        "target part '{}' at world ({:.2}, {:.2}, {:.2})",
        part.part_id, target.x, target.y, target.z
    );

    let params = OrbitParams {
        n_frames: 30,
        radius_range: (0.8, 2.0),
        height_range: (1.0, 1.6),
        seed: 5,
    };
    let obstacles = vec![(placement.footprint, asset.dims.z)];
    let cameras = orbit_trajectory(&room, &obstacles, target, Intrinsics::default(), &params)?;
    println!("orbit: {} cameras, all aimed at the target", cameras.len());

    let corners = part_world_corners(&placement, &part.aabb);
    let frames: Vec<_> = cameras
        .iter()
        .enumerate()
        .map(|(k, camera)| {
            build_frame(
                k as u32,
                *camera,
                &part.part_id,
                target,
                &[target],
                &corners,
                false,
            )
        })
        .collect();
    for frame in frames.iter().take(4) {
        println!(
            "  frame {:>2}: centroid {:?} occupancy {:.5} distance {:.2} m",
            frame.frame_index,
            frame.centroid_px.map(|p| (p.x.round(), p.y.round())),
            frame.occupancy,
            frame.distance_m,
        );
    }

    // Stride 3, keep the top 5 by occupancy.
    let kept = select_frames(&frames, 3, 5, FilterMode::SyntheticStyle);
    println!(
        "kept {} of {} frames after stride + filters",
        kept.len(),
        frames.len()
    );

    let samples = emit_pointing_samples(&kept, "Open the top drawer of the nightstand");
    for sample in samples.iter().take(2) {
        println!("\nframe {}:", sample.frame_index);
        println!("  user:      {}", sample.dialogue.user);
        println!("  assistant: {}", sample.dialogue.assistant);
    }
    Ok(())
}
