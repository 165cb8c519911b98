//! Task parsing: split a task description into a layout prompt, the
//! contextual object, its type, and a context-free prompt.
//!
//! Run with: `cargo run --example parse_task`

use funscene::fixture::ScriptedBackend;
use funscene::llm::LlmClient;
use funscene::task::{parse_task, parse_task_fallback, strip_context_fallback, TaskDescription};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let prompts = [
        "Open the fourth drawer of the cabinet next to the TV",
        "Open the window next to the wardrobe",
        "Turn on the bedroom light",
        "Open the nightstand drawer next to the bed",
    ];

    println!("== deterministic fallback ==");
    for text in prompts {
        let d = TaskDescription::new(text)?;
        let parse = parse_task_fallback(&d);
        println!("task:         {text}");
        println!(
            "  object:     {} ({:?})",
            parse.object_name, parse.object_type
        );
        println!("  context-free: {}", strip_context_fallback(&d));
        println!("  layout:     {}", parse.layout_prompt);
    }

    // The same calls through the model client; the scripted backend stands
    // in for a live endpoint so this example runs offline.
    println!("\n== model route (scripted backend) ==");
    let client = LlmClient::live(Box::new(ScriptedBackend), 3, 4);
    let d = TaskDescription::new(prompts[0])?;
    let (parse, warnings) = parse_task(&client, &d)?;
    println!(
        "object: {}, type {:?}",
        parse.object_name, parse.object_type
    );
    println!("warnings: {warnings:?}");
    Ok(())
}
