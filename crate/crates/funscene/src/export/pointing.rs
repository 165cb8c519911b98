//! Pointing-style visual instruction samples.
//!
//! Each kept frame becomes one dialogue record: the user turn embeds the
//! task description in the pointing instruction, the assistant turn answers
//! with the target's pixel coordinates, one point per sub-part. Records are
//! written one JSON document per line.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::frames::AnnotationFrame;
use super::ExportError;

/// User-turn template; `{}` takes the task description.
pub const POINTING_INSTRUCTION: &str =
    "Point to the object part I need to interact with in order to \"{}\". Return the points using JSON.";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dialogue {
    pub user: String,
    pub assistant: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointingSample {
    pub frame_index: u32,
    /// Integer pixel coordinates, one per sub-part centroid.
    pub points: Vec<[i64; 2]>,
    pub dialogue: Dialogue,
}

fn render_assistant(points: &[[i64; 2]]) -> String {
    let body = points
        .iter()
        .map(|[x, y]| format!("{{\"point_2d\": [{x}, {y}]}}"))
        .collect::<Vec<_>>()
        .join(", ");
    format!("json [{body}]")
}

/// One sample per kept frame. Points round to whole pixels; frames whose
/// points all fell outside the image yield nothing.
pub fn emit_pointing_samples(kept_frames: &[AnnotationFrame], task: &str) -> Vec<PointingSample> {
    let user = POINTING_INSTRUCTION.replacen("{}", task, 1);
    let mut samples = Vec::new();
    for frame in kept_frames {
        let in_bounds = |p: &&crate::geom::Vec2| frame.camera.intrinsics.contains_pixel(**p);
        let points: Vec<[i64; 2]> = frame
            .points_px
            .iter()
            .filter(in_bounds)
            .map(|p| [p.x.round() as i64, p.y.round() as i64])
            .collect();
        if points.is_empty() {
            continue;
        }
        samples.push(PointingSample {
            frame_index: frame.frame_index,
            dialogue: Dialogue {
                user: user.clone(),
                assistant: render_assistant(&points),
            },
            points,
        });
    }
    samples
}

/// Writes one JSON record per line.
pub fn write_pointing_samples(path: &Path, samples: &[PointingSample]) -> Result<(), ExportError> {
    let mut out = fs::File::create(path)?;
    for sample in samples {
        let line = serde_json::to_string(sample)?;
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn read_pointing_samples(path: &Path) -> Result<Vec<PointingSample>, ExportError> {
    let raw = fs::read_to_string(path)?;
    raw.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(ExportError::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::export::camera::{Camera, Intrinsics};
    use crate::export::frames::Verdict;
    use crate::geom::{Vec2, Vec3};

    fn kept_frame(points: Vec<Vec2>, index: u32) -> AnnotationFrame {
        AnnotationFrame {
            frame_index: index,
            camera: Camera::look_at(
                Vec3::new(0.0, -1.0, 1.0),
                Vec3::new(0.0, 0.0, 1.0),
                Intrinsics::default(),
            )
            .unwrap(),
            target_part_id: "part".into(),
            centroid_px: points.first().copied(),
            points_px: points,
            occupancy: 0.01,
            distance_m: 1.0,
            occluded: false,
            verdict: Verdict::Kept,
        }
    }

    #[test]
    fn assistant_answer_uses_the_point_format() {
        let frames = vec![kept_frame(vec![Vec2::new(960.0, 720.0)], 0)];
        let samples = emit_pointing_samples(&frames, "Open the nightstand drawer");
        assert_eq!(samples.len(), 1);
        assert_eq!(
            samples[0].dialogue.assistant,
            "json [{\"point_2d\": [960, 720]}]"
        );
        assert_eq!(
            samples[0].dialogue.user,
            "Point to the object part I need to interact with in order to \"Open the nightstand drawer\". Return the points using JSON."
        );
    }

    #[test]
    fn multiple_sub_parts_yield_multiple_points() {
        let frames = vec![kept_frame(
            vec![Vec2::new(900.0, 700.0), Vec2::new(1000.0, 700.0)],
            3,
        )];
        let samples = emit_pointing_samples(&frames, "Open the drawer");
        assert_eq!(samples[0].points.len(), 2);
        assert_eq!(
            samples[0].dialogue.assistant,
            "json [{\"point_2d\": [900, 700]}, {\"point_2d\": [1000, 700]}]"
        );
    }

    #[test]
    fn zero_kept_frames_yield_empty_stream() {
        assert!(emit_pointing_samples(&[], "Open the drawer").is_empty());
    }

    #[test]
    fn samples_round_trip_through_jsonl() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("samples.jsonl");
        let frames = vec![
            kept_frame(vec![Vec2::new(900.0, 700.0)], 0),
            kept_frame(vec![Vec2::new(905.0, 702.0)], 3),
        ];
        let samples = emit_pointing_samples(&frames, "Press the button");
        write_pointing_samples(&path, &samples).unwrap();
        let back = read_pointing_samples(&path).unwrap();
        assert_eq!(samples, back);
    }
}
