//! Asset database records, part hierarchies and mask selections.
//!
//! Canonical asset frame: the plan origin is the object's footprint center,
//! Z = 0 is the floor, and the object's front points along `front_axis`
//! (default +Y). Part masks are stored as opaque references, never as raw
//! geometry, so the engine stays independent of any mesh format. The on-disk
//! schema is documented in `docs/asset-schema.md`.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{Aabb3, Vec2, Vec3, EPS};

#[derive(Debug, Error)]
pub enum AssetError {
    #[error("failed to read asset file: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse asset file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid asset '{asset_id}': {problems:?}")]
    Invalid {
        asset_id: String,
        problems: Vec<String>,
    },
    #[error("invalid functional element: {0}")]
    InvalidElement(String),
    #[error("unknown part id '{part_id}' in asset '{asset_id}'")]
    UnknownPart { asset_id: String, part_id: String },
}

/// Which database an asset belongs to. Annotated assets carry a part tree
/// with masks and semantic labels; unannotated assets are plain meshes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Database {
    Annotated,
    Unannotated,
}

/// Opaque reference to a part's geometry mask: mask file plus index within
/// that file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskRef {
    pub path: String,
    pub index: u32,
}

/// One node of an asset's labeled part hierarchy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartNode {
    pub part_id: String,
    pub label: String,
    /// Part centroid in the asset canonical frame, meters.
    pub centroid3: Vec3,
    /// Tight box around the part, canonical frame.
    pub aabb: Aabb3,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask_ref: Option<MaskRef>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<PartNode>,
}

impl PartNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Depth-first traversal, parents before children.
    pub fn walk<'a>(&'a self, visit: &mut dyn FnMut(&'a PartNode, Option<&'a PartNode>)) {
        fn go<'a>(
            node: &'a PartNode,
            parent: Option<&'a PartNode>,
            visit: &mut dyn FnMut(&'a PartNode, Option<&'a PartNode>),
        ) {
            visit(node, parent);
            for child in &node.children {
                go(child, Some(node), visit);
            }
        }
        go(self, None, visit);
    }

    pub fn find(&self, part_id: &str) -> Option<&PartNode> {
        let mut found = None;
        self.walk(&mut |node, _| {
            if found.is_none() && node.part_id == part_id {
                found = Some(node);
            }
        });
        found
    }

    /// Leaf descendants in traversal order; the node itself when it is a leaf.
    pub fn leaves(&self) -> Vec<&PartNode> {
        let mut out = Vec::new();
        self.walk(&mut |node, _| {
            if node.is_leaf() {
                out.push(node);
            }
        });
        out
    }
}

/// One asset from either database. `root_part` is present exactly for
/// annotated assets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssetRecord {
    pub asset_id: String,
    pub database: Database,
    pub category: String,
    /// (width, depth, height) in meters.
    pub dims: Vec3,
    /// Plan-view unit vector pointing out of the asset's annotated front.
    pub front_axis: Vec2,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root_part: Option<PartNode>,
}

impl AssetRecord {
    /// Box spanned by `dims` in the canonical frame: plan-centered, floor at
    /// Z = 0.
    pub fn dims_aabb(&self) -> Aabb3 {
        Aabb3::new(
            Vec3::new(-self.dims.x * 0.5, -self.dims.y * 0.5, 0.0),
            Vec3::new(self.dims.x * 0.5, self.dims.y * 0.5, self.dims.z),
        )
    }

    /// Whole-object box used for centroid normalization: the part tree's
    /// root box when annotated, otherwise the dims box.
    pub fn object_aabb(&self) -> Aabb3 {
        match &self.root_part {
            Some(root) => root.aabb,
            None => self.dims_aabb(),
        }
    }

    pub fn part(&self, part_id: &str) -> Option<&PartNode> {
        self.root_part.as_ref().and_then(|r| r.find(part_id))
    }
}

/// Report-style validation: lists every violated invariant; an empty report
/// means the record is well-formed.
pub fn validate_asset(record: &AssetRecord) -> Vec<String> {
    let mut problems = Vec::new();
    if record.asset_id.trim().is_empty() {
        problems.push("empty asset id".to_string());
    }
    if !(record.dims.x > 0.0 && record.dims.y > 0.0 && record.dims.z > 0.0) {
        problems.push("non-positive dimension".to_string());
    }
    if !record.dims.is_finite() {
        problems.push("non-finite dimension".to_string());
    }
    if (record.front_axis.length() - 1.0).abs() > 1e-6 {
        problems.push("front axis is not unit length".to_string());
    }
    match (&record.database, &record.root_part) {
        (Database::Annotated, None) => problems.push("missing part tree".to_string()),
        (Database::Unannotated, Some(_)) => {
            problems.push("unexpected part tree on unannotated asset".to_string())
        }
        _ => {}
    }
    if let Some(root) = &record.root_part {
        let mut seen = BTreeSet::new();
        root.walk(&mut |node, _| {
            if !seen.insert(node.part_id.clone()) {
                problems.push(format!("duplicate part id '{}'", node.part_id));
            }
            if node.is_leaf() && node.mask_ref.is_none() {
                problems.push(format!("leaf '{}' without mask reference", node.part_id));
            }
            if !node.aabb.is_valid() {
                problems.push(format!("part '{}' has an inverted box", node.part_id));
            } else if !node.aabb.contains(node.centroid3, EPS) {
                problems.push(format!("part '{}' centroid outside its box", node.part_id));
            }
        });
    }
    problems
}

/// Loads one asset metadata document and rejects it unless well-formed.
pub fn load_asset(path: &Path) -> Result<AssetRecord, AssetError> {
    let raw = fs::read_to_string(path)?;
    let record: AssetRecord = serde_json::from_str(&raw)?;
    let problems = validate_asset(&record);
    if problems.is_empty() {
        Ok(record)
    } else {
        Err(AssetError::Invalid {
            asset_id: record.asset_id,
            problems,
        })
    }
}

/// Loads every `*.json` asset in a directory, keyed by asset id.
pub fn load_asset_dir(
    dir: &Path,
) -> Result<std::collections::BTreeMap<String, AssetRecord>, AssetError> {
    let mut out = std::collections::BTreeMap::new();
    let mut entries: Vec<_> = fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    entries.sort();
    for path in entries {
        let record = load_asset(&path)?;
        out.insert(record.asset_id.clone(), record);
    }
    Ok(out)
}

/// One functional element of an annotated asset, ready for arrangement
/// reasoning: enriched label plus normalized plan coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalElement {
    pub part_id: String,
    /// Child label prefixed by its parent label when that disambiguates,
    /// e.g. "door handle".
    pub enriched_label: String,
    /// Normalized coordinates in [0,1]^2. X: 0 = viewer's right, 1 = viewer's
    /// left. Y: 0 = bottom, 1 = top.
    pub centroid2: Vec2,
}

impl FunctionalElement {
    pub fn new(
        part_id: String,
        enriched_label: String,
        centroid2: Vec2,
    ) -> Result<Self, AssetError> {
        if enriched_label.trim().is_empty() {
            return Err(AssetError::InvalidElement("empty enriched label".into()));
        }
        let in_unit = |v: f64| (-EPS..=1.0 + EPS).contains(&v);
        if !(in_unit(centroid2.x) && in_unit(centroid2.y)) {
            return Err(AssetError::InvalidElement(format!(
                "centroid ({}, {}) outside [0,1]^2",
                centroid2.x, centroid2.y
            )));
        }
        Ok(FunctionalElement {
            part_id,
            enriched_label,
            centroid2,
        })
    }
}

/// The retrieved functional mask: an asset plus the part whose mask answers
/// the task, with the reasoning that selected it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskSelection {
    pub asset_id: String,
    pub part_id: String,
    pub reasoning: String,
}

impl MaskSelection {
    /// Checks the referential invariant: the part must exist in the asset.
    pub fn validate(&self, asset: &AssetRecord) -> Result<(), AssetError> {
        if asset.part(&self.part_id).is_some() {
            Ok(())
        } else {
            Err(AssetError::UnknownPart {
                asset_id: self.asset_id.clone(),
                part_id: self.part_id.clone(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf(id: &str, label: &str, c: Vec3) -> PartNode {
        PartNode {
            part_id: id.to_string(),
            label: label.to_string(),
            centroid3: c,
            aabb: Aabb3::new(
                c - Vec3::new(0.05, 0.05, 0.05),
                c + Vec3::new(0.05, 0.05, 0.05),
            ),
            mask_ref: Some(MaskRef {
                path: format!("{id}.mask"),
                index: 0,
            }),
            children: Vec::new(),
        }
    }

    fn well_formed_fixture() -> AssetRecord {
        let handle = leaf("h0", "handle", Vec3::new(0.0, 0.25, 0.5));
        let drawer = PartNode {
            part_id: "d0".to_string(),
            label: "drawer".to_string(),
            centroid3: Vec3::new(0.0, 0.0, 0.5),
            aabb: Aabb3::new(Vec3::new(-0.3, -0.25, 0.3), Vec3::new(0.3, 0.3, 0.7)),
            mask_ref: None,
            children: vec![handle],
        };
        let root = PartNode {
            part_id: "root".to_string(),
            label: "nightstand".to_string(),
            centroid3: Vec3::new(0.0, 0.0, 0.4),
            aabb: Aabb3::new(Vec3::new(-0.3, -0.25, 0.0), Vec3::new(0.3, 0.3, 0.8)),
            mask_ref: None,
            children: vec![drawer],
        };
        AssetRecord {
            asset_id: "nightstand_0".to_string(),
            database: Database::Annotated,
            category: "nightstand".to_string(),
            dims: Vec3::new(0.6, 0.5, 0.8),
            front_axis: Vec2::new(0.0, 1.0),
            root_part: Some(root),
        }
    }

    #[test]
    fn zero_dimension_is_reported() {
        let mut record = well_formed_fixture();
        record.dims = Vec3::new(0.0, 1.0, 1.0);
        let report = validate_asset(&record);
        assert!(report.iter().any(|p| p.contains("non-positive dimension")));
    }

    #[test]
    fn annotated_without_tree_is_reported() {
        let mut record = well_formed_fixture();
        record.root_part = None;
        let report = validate_asset(&record);
        assert!(report.iter().any(|p| p.contains("missing part tree")));
    }

    #[test]
    fn well_formed_fixture_has_empty_report() {
        assert!(validate_asset(&well_formed_fixture()).is_empty());
    }

    #[test]
    fn duplicate_part_ids_are_reported() {
        let mut record = well_formed_fixture();
        let dup = leaf("h0", "handle", Vec3::new(0.1, 0.25, 0.5));
        record.root_part.as_mut().unwrap().children.push(dup);
        let report = validate_asset(&record);
        assert!(report.iter().any(|p| p.contains("duplicate part id")));
    }

    #[test]
    fn record_round_trips_through_json() {
        let record = well_formed_fixture();
        let text = serde_json::to_string_pretty(&record).unwrap();
        let back: AssetRecord = serde_json::from_str(&text).unwrap();
        assert_eq!(record, back);
    }

    #[test]
    fn mask_selection_checks_part_exists() {
        let record = well_formed_fixture();
        let good = MaskSelection {
            asset_id: record.asset_id.clone(),
            part_id: "h0".to_string(),
            reasoning: "single handle".to_string(),
        };
        assert!(good.validate(&record).is_ok());
        let bad = MaskSelection {
            part_id: "missing".to_string(),
            ..good
        };
        assert!(bad.validate(&record).is_err());
    }
}
