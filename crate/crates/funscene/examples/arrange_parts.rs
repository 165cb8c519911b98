//! Functional-element arrangement: map the prompt's spatial reference to a
//! query, pick the matching part with the deterministic engine, and draw
//! the final selection uniformly when several assets qualify.
//!
//! Run with: `cargo run --example arrange_parts`

use funscene::arrange::{
    choose_final, parse_spatial_query, select_part, Selection, DEFAULT_TIE_EPS,
};
use funscene::fixture::{cabinet_with_grid_handles, nightstand_with_vertical_handles};
use funscene::parts::{default_functional_labels, functional_elements, EnrichmentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let labels = default_functional_labels();
    let cfg = EnrichmentConfig::default();
    let assets = vec![
        nightstand_with_vertical_handles("stack_of_three", 3),
        cabinet_with_grid_handles("grid_two_by_two", 2, 2),
    ];

    for prompt in [
        "open the second drawer of the nightstand",
        "open the top left drawer of the cabinet",
        "open the leftmost drawer",
        "open the bottom drawer",
    ] {
        let query = parse_spatial_query(prompt)?;
        println!("prompt: {prompt}\nquery:  {query:?}");
        let mut selections = Vec::new();
        for asset in &assets {
            let elements = functional_elements(asset, &labels, &cfg)?;
            match select_part(&asset.asset_id, &elements, &query, DEFAULT_TIE_EPS)? {
                Selection::Chosen(selection) => {
                    println!(
                        "  {}: part {} ({})",
                        asset.asset_id, selection.part_id, selection.reasoning
                    );
                    selections.push(selection);
                }
                Selection::Unsuitable(reason) => {
                    println!("  {}: unsuitable ({reason})", asset.asset_id);
                }
            }
        }
        if !selections.is_empty() {
            // Equal-probability choice among the suitable assets, seeded.
            let chosen = choose_final(&selections, 42)?;
            println!("  final: {} / {}", chosen.asset_id, chosen.part_id);
        }
        println!();
    }
    Ok(())
}
