//! The whole pipeline end to end: parse, retrieve, filter, arrange, solve,
//! export, over the bundled demo dataset.
//!
//! Run with: `cargo run --example generate_scene`

use funscene::config::Config;
use funscene::export::read_manifest;
use funscene::fixture::{DemoDataset, DEMO_PROMPTS};
use funscene::pipeline::{run_batch, Engine, PromptOutcome};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let dataset = DemoDataset::write(dir.path())?;
    println!("demo dataset under {}", dataset.root.display());

    let config = Config::load(&dataset.config_path)?;
    let engine = Engine::from_config(config)?;
    let prompts: Vec<String> = DEMO_PROMPTS.iter().map(|p| p.to_string()).collect();
    let out_dir = dir.path().join("scenes");
    let outcomes = run_batch(&engine, &prompts, 2024, &out_dir, 1)?;

    for (index, outcome) in outcomes.iter().enumerate() {
        match outcome {
            PromptOutcome::Success(artifacts) => {
                let manifest = read_manifest(&artifacts.manifest_path)?;
                let target = manifest.target.expect("generated scenes carry a target");
                println!("\nprompt {index}: {}", prompts[index]);
                println!(
                    "  room {}x{} m, {} placements, {} cameras",
                    manifest.room.width,
                    manifest.room.depth,
                    manifest.placements.len(),
                    manifest.trajectory.len()
                );
                for placement in &manifest.placements {
                    println!(
                        "    #{} {:<12} ({}) at ({:.2}, {:.2})",
                        placement.instance_id,
                        placement.placement.handle,
                        placement.asset_id,
                        placement.placement.center.x,
                        placement.placement.center.y
                    );
                }
                println!(
                    "  mask: {} / {} ('{}')",
                    target.asset_id, target.part_id, target.enriched_label
                );
                println!(
                    "  {} pointing samples -> {}",
                    artifacts.n_samples,
                    artifacts.samples_path.display()
                );
            }
            PromptOutcome::Failure { prompt, error } => {
                println!("\nprompt {index} failed: {prompt}\n  {error}");
            }
        }
    }
    Ok(())
}
