//! Scene manifest: the versioned, renderer-facing description of one solved
//! scene. Schema documented in `docs/manifest-schema.md`.
//!
//! The manifest lists the room, every placement with its asset reference and
//! a dense stable instance id, the selected functional mask, and the camera
//! trajectory; enough for an external renderer to reproduce RGB frames and
//! multi-instance segmentation masks.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::geom::Vec3;
use crate::layout::{Placement, Room, SceneLayout};

use super::camera::Camera;
use super::ExportError;

pub const MANIFEST_VERSION: u32 = 1;

/// Visibility is approximated by line of sight from the camera to the part
/// centroid against placement footprints; renderers should re-derive exact
/// visibility from geometry.
pub const VISIBILITY_APPROXIMATION: &str =
    "visibility: line-of-sight against placement footprints, not rasterized";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestPlacement {
    /// Dense 1-based id, stable across runs for a fixed layout.
    pub instance_id: u32,
    pub asset_id: String,
    pub category: String,
    /// (width, depth, height) meters.
    pub dims: Vec3,
    #[serde(flatten)]
    pub placement: Placement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestTarget {
    pub asset_id: String,
    pub part_id: String,
    pub enriched_label: String,
    pub reasoning: String,
    /// Part centroid in world coordinates.
    pub world_centroid: Vec3,
    /// Leaf sub-parts under the selected part (the part itself when a leaf).
    pub sub_part_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub task: String,
    pub context_free_prompt: String,
    pub seed: u64,
    pub room: Room,
    pub placements: Vec<ManifestPlacement>,
    pub required: std::collections::BTreeSet<String>,
    /// Absent for layouts solved without a mask-retrieval stage.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<ManifestTarget>,
    pub trajectory: Vec<Camera>,
    pub approximations: Vec<String>,
}

/// Dense, stable instance ids: 1..N in placement order (0 is background).
pub fn assign_instance_ids(layout: &SceneLayout) -> BTreeMap<String, u32> {
    layout
        .placements
        .iter()
        .enumerate()
        .map(|(i, p)| (p.handle.clone(), i as u32 + 1))
        .collect()
}

pub fn write_manifest(path: &Path, manifest: &Manifest) -> Result<(), ExportError> {
    let body = serde_json::to_string_pretty(manifest)?;
    fs::write(path, body)?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<Manifest, ExportError> {
    let raw = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&raw)?)
}
