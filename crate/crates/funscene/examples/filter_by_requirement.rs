//! Requirement-based filtering: infer a count predicate like "handle >= 3"
//! from the prompt and keep only assets that satisfy it.
//!
//! Run with: `cargo run --example filter_by_requirement`

use std::collections::BTreeMap;

use funscene::fixture::{cabinet_with_grid_handles, nightstand_with_vertical_handles};
use funscene::index::Candidate;
use funscene::parts::{default_functional_labels, functional_elements, EnrichmentConfig};
use funscene::requirement::{filter_assets, infer_requirement_fallback};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let labels = default_functional_labels();
    let cfg = EnrichmentConfig::default();

    let mut assets = BTreeMap::new();
    for asset in [
        nightstand_with_vertical_handles("one_drawer", 1),
        nightstand_with_vertical_handles("two_drawers", 2),
        nightstand_with_vertical_handles("three_drawers", 3),
        cabinet_with_grid_handles("grid_cabinet", 2, 2),
    ] {
        let elements = functional_elements(&asset, &labels, &cfg)?;
        println!("{}: {} functional elements", asset.asset_id, elements.len());
        for element in &elements {
            println!(
                "  {} '{}' at ({:.2}, {:.2})",
                element.part_id, element.enriched_label, element.centroid2.x, element.centroid2.y
            );
        }
        assets.insert(asset.asset_id.clone(), asset);
    }

    let candidates: Vec<Candidate> = assets
        .keys()
        .enumerate()
        .map(|(i, id)| Candidate {
            asset_id: id.clone(),
            score: 0.9 - 0.1 * i as f64,
        })
        .collect();

    for prompt in [
        "open the third drawer of the cabinet from the bottom",
        "Regulate the temperature on the oven",
        "Open the top left drawer of the nightstand",
        "Open the nightstand drawer",
    ] {
        let requirement = infer_requirement_fallback(prompt, &labels)?;
        let kept = filter_assets(&candidates, &assets, &requirement, &labels, &cfg)?;
        let names: Vec<&str> = kept.iter().map(|c| c.asset_id.as_str()).collect();
        println!("\nprompt:      {prompt}");
        println!("requirement: {requirement}");
        println!("kept:        {names:?}");
    }
    Ok(())
}
