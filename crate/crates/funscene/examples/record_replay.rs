//! Model-call record/replay: record a cassette against a backend once, then
//! replay it byte-for-byte with no backend at all.
//!
//! Run with: `cargo run --example record_replay`

use std::collections::BTreeMap;

use funscene::fixture::ScriptedBackend;
use funscene::llm::{task_parse_template, Cassette, LlmClient};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let cassette_path = dir.path().join("calls.json");

    let mut bindings = BTreeMap::new();
    bindings.insert(
        "prompt".to_string(),
        "Open the second drawer of the cabinet next to the bed".to_string(),
    );

    // Recording: the scripted backend stands in for a live endpoint.
    let recording = LlmClient::recording(Box::new(ScriptedBackend), cassette_path.clone(), 3, 4)?;
    let live = recording.complete(&task_parse_template(), &bindings)?;
    println!("recorded reply:\n{}\n", live.raw_text);

    // Replay: same key, same bytes, no backend.
    let cassette = Cassette::load(&cassette_path)?;
    println!("cassette holds {} record(s)", cassette.len());
    let replay = LlmClient::replay(cassette);
    let replayed = replay.complete(&task_parse_template(), &bindings)?;
    assert_eq!(live.raw_text, replayed.raw_text);
    println!("replayed reply matches byte-for-byte");
    println!(
        "parsed object_name: {:?}",
        replayed.parsed.str_field("object_name")
    );

    // A prompt that was never recorded is a cassette miss, not a live call.
    let mut other = BTreeMap::new();
    other.insert("prompt".to_string(), "Close the door".to_string());
    let miss = replay.complete(&task_parse_template(), &other);
    println!("unrecorded prompt -> {}", miss.unwrap_err());
    Ok(())
}
