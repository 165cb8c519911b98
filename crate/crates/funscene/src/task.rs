//! Task description preprocessing: turn the task sentence into a layout
//! prompt, the contextual object name, the object type, and a context-free
//! prompt.
//!
//! Downstream retrieval consumes the context-free prompt, not the raw task
//! description. The model route renders the task-parse template; a
//! deterministic fallback strips trailing locative phrases and guesses the
//! contextual object so the pipeline also runs without any model.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::llm::{task_parse_template, LlmClient, LlmError};

#[derive(Debug, Error)]
pub enum TaskError {
    #[error("task description must be a non-empty sentence")]
    EmptyDescription,
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error("model reply is missing mandatory key '{0}'")]
    MissingKey(&'static str),
    #[error("unknown object type '{0}'")]
    BadObjectType(String),
}

/// A natural-language task description, e.g. "Open the nightstand drawer
/// next to the bed".
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TaskDescription(String);

impl TaskDescription {
    pub fn new(text: &str) -> Result<Self, TaskError> {
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return Err(TaskError::EmptyDescription);
        }
        Ok(TaskDescription(trimmed.to_string()))
    }

    pub fn text(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TaskDescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Structural objects (doors, windows) retrieve from a different pool than
/// ordinary furniture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectType {
    Door,
    Window,
    Other,
}

impl FromStr for ObjectType {
    type Err = TaskError;

    fn from_str(raw: &str) -> Result<Self, TaskError> {
        match raw.trim().trim_matches('"').to_ascii_lowercase().as_str() {
            "door" => Ok(ObjectType::Door),
            "window" => Ok(ObjectType::Window),
            "other" => Ok(ObjectType::Other),
            other => Err(TaskError::BadObjectType(other.to_string())),
        }
    }
}

/// Structured parse of a task description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskParse {
    pub layout_prompt: String,
    pub context_free_prompt: String,
    pub object_name: String,
    /// Functional element name, filled later by requirement inference.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functional_label: Option<String>,
    pub object_type: ObjectType,
}

/// Model route. Returns the parse plus coherence warnings; a prompt-mentioned
/// object missing from the layout is a warning, never an error.
pub fn parse_task(
    client: &LlmClient,
    d: &TaskDescription,
) -> Result<(TaskParse, Vec<String>), TaskError> {
    let mut bindings = BTreeMap::new();
    bindings.insert("prompt".to_string(), d.text().to_string());
    let response = client.complete(&task_parse_template(), &bindings)?;
    let field = |key: &'static str| -> Result<String, TaskError> {
        response
            .parsed
            .str_field(key)
            .map(|s| s.to_string())
            .ok_or(TaskError::MissingKey(key))
    };
    let layout_prompt = field("layout_prompt")?;
    let context_free_prompt = field("context_free_prompt")?;
    let object_name = field("object_name")?;
    let object_type: ObjectType = field("object_type")?.parse()?;
    let parse = TaskParse {
        layout_prompt,
        context_free_prompt,
        object_name,
        functional_label: None,
        object_type,
    };
    let warnings = coherence_warnings(d, &parse);
    for warning in &warnings {
        log::warn!("{warning}");
    }
    Ok((parse, warnings))
}

/// Checks the parse against itself: the contextual object and any object
/// named in the description should appear in the layout prompt.
pub fn coherence_warnings(d: &TaskDescription, parse: &TaskParse) -> Vec<String> {
    let mut warnings = Vec::new();
    let layout = parse.layout_prompt.to_ascii_lowercase();
    let object = parse.object_name.to_ascii_lowercase();
    if !object.is_empty() && !layout.contains(&object) {
        warnings.push(format!(
            "layout prompt does not mention the contextual object '{}'",
            parse.object_name
        ));
    }
    if let Some(referenced) = locative_reference(d.text()) {
        if !layout.contains(&referenced.to_ascii_lowercase()) {
            warnings.push(format!(
                "layout prompt does not mention the referenced object '{referenced}'"
            ));
        }
    }
    warnings
}

/// Trailing locative phrase patterns the fallback strips. Kept as one list so
/// stripping and reference extraction stay aligned.
static LOCATIVE: LazyLock<Regex> = LazyLock::new(|| {
    // Bare "on"/"at" are excluded: they belong to verbs ("turn on the
    // light") far more often than to scene positions.
    Regex::new(
        r"(?i)\s+(next to|near|beside|behind|in front of|to the left of|to the right of|on the left of|on the right of|left of|right of|in|inside)\s+the\s+([a-z][a-z ]*?)\s*$",
    )
    .unwrap()
});

/// The spatial relation and referenced object of the trailing locative
/// phrase, when one exists: ("next to", "bed") for "... next to the bed".
pub fn locative_phrase(text: &str) -> Option<(String, String)> {
    LOCATIVE
        .captures(text)
        .map(|caps| (caps[1].to_ascii_lowercase(), caps[2].trim().to_string()))
}

fn locative_reference(text: &str) -> Option<String> {
    locative_phrase(text).map(|(_, obj)| obj)
}

/// Deterministic fallback: removes a trailing locative phrase matched by the
/// fixed pattern list; text without one passes through unchanged.
pub fn strip_context_fallback(d: &TaskDescription) -> String {
    LOCATIVE.replace(d.text(), "").trim().to_string()
}

static OF_THE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\bof the ([a-z][a-z ]*?)\s*$").unwrap());
static THE_NOUN: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\bthe ([a-z][a-z ]*?)\s*$").unwrap());

/// Deterministic fallback parse used when no model is configured. Heuristics
/// only; the model route is the fidelity path.
pub fn parse_task_fallback(d: &TaskDescription) -> TaskParse {
    let context_free = strip_context_fallback(d);
    let lower = context_free.to_ascii_lowercase();

    // Light-related prompts target the wall switch even when unnamed.
    let wants_switch = lower.contains("light switch")
        || ((lower.contains("light") || lower.contains("lamp")) && lower.contains("turn"));
    let object_name = if wants_switch {
        "light switch".to_string()
    } else if let Some(caps) = OF_THE.captures(&context_free) {
        caps[1].trim().to_string()
    } else if let Some(caps) = THE_NOUN.captures(&context_free) {
        // "Open the window" -> "window"; strip leading adjectives we know.
        let noun = caps[1].trim().to_string();
        noun.rsplit(' ').next().unwrap_or(&noun).to_string()
    } else {
        context_free.clone()
    };

    let object_type = if object_name.eq_ignore_ascii_case("door") {
        ObjectType::Door
    } else if object_name.eq_ignore_ascii_case("window") {
        ObjectType::Window
    } else {
        ObjectType::Other
    };

    let layout_prompt = match locative_phrase(d.text()) {
        Some((relation, reference)) if !reference.eq_ignore_ascii_case("room") => format!(
            "A room with a {object_name} and a {reference}. The {object_name} is {relation} the {reference}.",
        ),
        _ => format!("A room with a {object_name}."),
    };

    TaskParse {
        layout_prompt,
        context_free_prompt: context_free,
        object_name,
        functional_label: None,
        object_type,
    }
}
