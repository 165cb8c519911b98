//! Functional-element extraction, hierarchy label enrichment, and 2D
//! centroid normalization over annotated part trees.
//!
//! The depth axis is anchored to the asset's annotated front: an observer
//! stands facing the front, depth is discarded, and the remaining lateral
//! and vertical coordinates are normalized against the whole-object box.
//! X = 0 is the observer's right and X = 1 their left; Y = 0 is the bottom
//! and Y = 1 the top. This is the same convention the arrangement engine and
//! the arrangement prompt use.

use std::collections::BTreeSet;
use std::path::Path;

use thiserror::Error;

use crate::asset::{AssetRecord, Database, FunctionalElement, PartNode};
use crate::geom::{Aabb3, Vec2};

#[derive(Debug, Error)]
pub enum PartError {
    #[error("asset '{0}' has no part tree")]
    MissingPartTree(String),
    #[error("degenerate object box: zero extent on the {0} axis")]
    DegenerateAxis(&'static str),
    #[error("front axis is not a unit vector")]
    BadFrontAxis,
    #[error(transparent)]
    Asset(#[from] crate::asset::AssetError),
    #[error("io failure: {0}")]
    Io(#[from] std::io::Error),
}

/// Default functional-element label list shipped with the engine.
pub const DEFAULT_FUNCTIONAL_LABELS: [&str; 6] =
    ["handle", "knob", "button", "switch", "lever", "faucet"];

pub fn default_functional_labels() -> BTreeSet<String> {
    DEFAULT_FUNCTIONAL_LABELS
        .iter()
        .map(|s| s.to_string())
        .collect()
}

/// Loads a functional-label list file: one label per line, `#` comments.
pub fn load_functional_labels(path: &Path) -> Result<BTreeSet<String>, PartError> {
    let raw = std::fs::read_to_string(path)?;
    Ok(raw
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.to_string())
        .collect())
}

/// Controls parent-label enrichment. Generic parent labels (the asset
/// category itself, container words) are skipped so a cabinet's "handle"
/// does not become "cabinet handle handle"-style noise.
#[derive(Debug, Clone)]
pub struct EnrichmentConfig {
    pub generic_parent_labels: BTreeSet<String>,
}

impl Default for EnrichmentConfig {
    fn default() -> Self {
        let generic = ["object", "furniture", "root", "base", "other", "misc"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        EnrichmentConfig {
            generic_parent_labels: generic,
        }
    }
}

impl EnrichmentConfig {
    /// The asset's own category always counts as generic.
    pub fn is_generic(&self, label: &str, category: &str) -> bool {
        let label = label.trim().to_ascii_lowercase();
        label == category.trim().to_ascii_lowercase()
            || self.generic_parent_labels.contains(label.as_str())
    }
}

/// Concatenates the parent label onto the part label ("door" + "handle" ->
/// "door handle") unless the parent is generic or repeats the label.
pub fn enrich_label(
    parent: Option<&str>,
    label: &str,
    category: &str,
    cfg: &EnrichmentConfig,
) -> String {
    match parent {
        Some(p)
            if !cfg.is_generic(p, category)
                && !p.trim().is_empty()
                && !p.eq_ignore_ascii_case(label) =>
        {
            format!("{} {}", p.trim(), label.trim())
        }
        _ => label.trim().to_string(),
    }
}

/// Drops the depth coordinate (the front-axis direction) and maps the
/// lateral and vertical coordinates affinely from the object box to [0,1]^2.
pub fn normalize_centroids(
    parts: &[&PartNode],
    object_aabb: &Aabb3,
    front_axis: Vec2,
) -> Result<Vec<Vec2>, PartError> {
    let front = front_axis.normalized().ok_or(PartError::BadFrontAxis)?;
    // Lateral axis: the observer's left. Projection onto it grows toward
    // the viewer's left, which normalizes to X = 1.
    let lateral = front.observer_left();
    let (mut lat_min, mut lat_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for corner in object_aabb.plan_corners() {
        let t = corner.dot(lateral);
        lat_min = lat_min.min(t);
        lat_max = lat_max.max(t);
    }
    let lat_extent = lat_max - lat_min;
    let z_extent = object_aabb.max.z - object_aabb.min.z;
    if lat_extent <= f64::EPSILON {
        return Err(PartError::DegenerateAxis("lateral"));
    }
    if z_extent <= f64::EPSILON {
        return Err(PartError::DegenerateAxis("vertical"));
    }
    Ok(parts
        .iter()
        .map(|part| {
            let x = (part.centroid3.xy().dot(lateral) - lat_min) / lat_extent;
            let y = (part.centroid3.z - object_aabb.min.z) / z_extent;
            Vec2::new(x.clamp(0.0, 1.0), y.clamp(0.0, 1.0))
        })
        .collect())
}

/// One element per part whose label is in `functional_labels`, with the
/// enriched label and the normalized 2D centroid.
pub fn functional_elements(
    asset: &AssetRecord,
    functional_labels: &BTreeSet<String>,
    cfg: &EnrichmentConfig,
) -> Result<Vec<FunctionalElement>, PartError> {
    if asset.database != Database::Annotated || asset.root_part.is_none() {
        return Err(PartError::MissingPartTree(asset.asset_id.clone()));
    }
    let root = asset.root_part.as_ref().unwrap();
    let mut matched: Vec<(&PartNode, Option<&PartNode>)> = Vec::new();
    root.walk(&mut |node, parent| {
        if functional_labels.contains(&node.label) {
            matched.push((node, parent));
        }
    });
    let object_aabb = asset.object_aabb();
    let nodes: Vec<&PartNode> = matched.iter().map(|(n, _)| *n).collect();
    let centroids = normalize_centroids(&nodes, &object_aabb, asset.front_axis)?;
    matched
        .iter()
        .zip(centroids)
        .map(|((node, parent), centroid2)| {
            let label = enrich_label(
                parent.map(|p| p.label.as_str()),
                &node.label,
                &asset.category,
                cfg,
            );
            FunctionalElement::new(node.part_id.clone(), label, centroid2).map_err(PartError::from)
        })
        .collect()
}
