//! Writes the bundled demo dataset (assets, indices, labels, prompts,
//! config) to a directory, ready for the `funscene` CLI.
//!
//! Run with: `cargo run --example write_demo_dataset -- <dir>`

use funscene::fixture::DemoDataset;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "funscene-demo".to_string());
    let dataset = DemoDataset::write(std::path::Path::new(&dir))?;
    println!("demo dataset written under {}", dataset.root.display());
    println!("  config:  {}", dataset.config_path.display());
    println!("  prompts: {}", dataset.prompts_path.display());
    println!();
    println!("try:");
    println!(
        "  funscene generate --prompt-file {} --config {} --seed 7 --out-dir scenes/",
        dataset.prompts_path.display(),
        dataset.config_path.display()
    );
    Ok(())
}
