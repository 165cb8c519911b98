//! Ensemble vector retrieval: top-1 from the unannotated pool, thresholded
//! candidate sets from the annotated pool.
//!
//! Run with: `cargo run --example retrieve_assets`

use funscene::fixture::{hash_embedding, DemoDataset, DEMO_DIM};
use funscene::index::{load_index, retrieve_best, retrieve_candidates};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let dataset = DemoDataset::write(dir.path())?;
    let annotated = load_index(&dataset.annotated_index)?;
    let unannotated = load_index(&dataset.unannotated_index)?;
    println!(
        "annotated pool: {} assets, unannotated pool: {} assets, dim {}",
        annotated.len(),
        unannotated.len(),
        annotated.dim()
    );

    // Non-target objects take the single best match.
    for query in ["a double bed", "a flat screen tv", "a floor lamp"] {
        let v = hash_embedding(query, DEMO_DIM);
        let best = retrieve_best(&unannotated, &v, &v, 0.5)?;
        println!(
            "best for {query:<24} -> {} ({:+.3})",
            best.asset_id, best.score
        );
    }

    // The contextual object keeps every candidate above the threshold; the
    // requirement filter downstream does the real pruning.
    let query = "a cabinet with drawers";
    let v = hash_embedding(query, DEMO_DIM);
    let candidates = retrieve_candidates(&annotated, &v, &v, 0.25, 0.5)?;
    println!("\ncandidates for \"{query}\" over threshold 0.25:");
    for candidate in &candidates {
        println!("  {:<16} {:+.3}", candidate.asset_id, candidate.score);
    }
    Ok(())
}
