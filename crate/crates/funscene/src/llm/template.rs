//! Prompt templates with named placeholders.
//!
//! The instruction bodies live under `templates/` and are compiled in. Only
//! declared placeholders are substituted at render time; any other
//! angle-bracket token in a body (for example the literal `<symbol>`
//! examples inside the requirement instructions) is instruction text and
//! stays untouched.

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TemplateError {
    #[error("template '{template_id}' does not contain placeholder <{name}>")]
    MissingPlaceholder { template_id: String, name: String },
    #[error("no binding provided for placeholder <{0}>")]
    UnboundPlaceholder(String),
    #[error("binding '{0}' does not match any declared placeholder")]
    UnknownBinding(String),
}

#[derive(Debug, Clone)]
pub struct PromptTemplate {
    pub template_id: String,
    pub body: String,
    placeholders: Vec<String>,
}

impl PromptTemplate {
    pub fn new(
        template_id: &str,
        body: &str,
        placeholders: &[&str],
    ) -> Result<Self, TemplateError> {
        for name in placeholders {
            if !body.contains(&format!("<{name}>")) {
                return Err(TemplateError::MissingPlaceholder {
                    template_id: template_id.to_string(),
                    name: name.to_string(),
                });
            }
        }
        Ok(PromptTemplate {
            template_id: template_id.to_string(),
            body: body.to_string(),
            placeholders: placeholders.iter().map(|s| s.to_string()).collect(),
        })
    }

    pub fn placeholders(&self) -> &[String] {
        &self.placeholders
    }

    /// Substitutes every declared placeholder. All placeholders must be
    /// bound and no extra bindings are accepted.
    pub fn render(&self, bindings: &BTreeMap<String, String>) -> Result<String, TemplateError> {
        for key in bindings.keys() {
            if !self.placeholders.iter().any(|p| p == key) {
                return Err(TemplateError::UnknownBinding(key.clone()));
            }
        }
        let mut out = self.body.clone();
        for name in &self.placeholders {
            let value = bindings
                .get(name)
                .ok_or_else(|| TemplateError::UnboundPlaceholder(name.clone()))?;
            out = out.replace(&format!("<{name}>"), value);
        }
        Ok(out)
    }
}

const TASK_PARSE_BODY: &str = include_str!("../../templates/task_parse.txt");
const REQUIREMENT_BODY: &str = include_str!("../../templates/requirement.txt");
const ARRANGEMENT_BODY: &str = include_str!("../../templates/arrangement.txt");
const LAYOUT_PLAN_BODY: &str = include_str!("../../templates/layout_plan.txt");

/// Suffix that carries the rendered candidate listing into the arrangement
/// call; the instruction body above it is append-only.
pub const ARRANGEMENT_OBJECTS_SUFFIX: &str =
    "\n\nThe candidate objects are the following:\n\n<objects>\n";

/// Parses a task description into layout prompt, context-free prompt,
/// object name and object type.
pub fn task_parse_template() -> PromptTemplate {
    PromptTemplate::new("task-parse", TASK_PARSE_BODY, &["prompt"])
        .expect("task-parse template is well-formed")
}

/// Infers the functional element name and the count requirement.
pub fn requirement_template() -> PromptTemplate {
    PromptTemplate::new("requirement", REQUIREMENT_BODY, &["funclist", "prompt"])
        .expect("requirement template is well-formed")
}

/// Judges per-candidate part arrangements; the candidate listing is appended
/// after the instruction body.
pub fn arrangement_template() -> PromptTemplate {
    let body = format!("{ARRANGEMENT_BODY}{ARRANGEMENT_OBJECTS_SUFFIX}");
    PromptTemplate::new(
        "arrangement",
        &body,
        &["object", "func", "prompt", "objects"],
    )
    .expect("arrangement template is well-formed")
}

/// Expands a layout description into a structured object/clause plan.
pub fn layout_plan_template() -> PromptTemplate {
    PromptTemplate::new("layout-plan", LAYOUT_PLAN_BODY, &["objects", "layout"])
        .expect("layout-plan template is well-formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use sha2::{Digest, Sha256};

    fn hash(body: &str) -> String {
        hex::encode(Sha256::digest(body.as_bytes()))
    }

    // Golden check: template bodies are frozen. If one of these fails, a
    // template file was edited; update the hash only on purpose.
    #[test]
    fn template_bodies_are_frozen() {
        assert_eq!(
            hash(TASK_PARSE_BODY),
            "e80844a613d34ba2e828dc7e5acde0e093bc907e2a0117cf8f1e95090ef967b5"
        );
        assert_eq!(
            hash(REQUIREMENT_BODY),
            "aaccb28d959a04c2e7c0912ae5c92b5ba04ff08e1747230b95065fad8950cb48"
        );
        assert_eq!(
            hash(ARRANGEMENT_BODY),
            "9e56f46879757d559a02b1d15b85e0c2a3e7e182722a560ced1784a692da7105"
        );
    }

    #[test]
    fn task_parse_body_carries_expected_anchors() {
        let t = task_parse_template();
        assert!(t.body.contains("Here is the functional prompt: <prompt>"));
        assert!(t
            .body
            .contains("Format the output in the following YAML format:"));
        assert!(t
            .body
            .contains("object_type: can be \"door\",\"window\" or \"other\""));
        assert!(t.body.contains("object_name: light switch"));
    }

    #[test]
    fn requirement_body_carries_expected_anchors() {
        let t = requirement_template();
        assert!(t.body.contains("object_requirement: handle >= 3"));
        assert!(t.body.contains("object_requirement: knob = 1"));
        assert!(t.body.contains("object_requirement: handle >= 4"));
        assert!(t
            .body
            .contains("the possible functional part names are only the following: <funclist>"));
        // Literal instruction text, not placeholders.
        assert!(t.body.contains("\"element <symbol> <N>\""));
    }

    #[test]
    fn arrangement_body_carries_expected_anchors() {
        let t = arrangement_template();
        assert!(t.body.contains("arranged in a 2x2 grid"));
        assert!(t
            .body
            .contains("A value close to 0 indicates a position on the right of the origin"));
        assert!(t
            .body
            .contains("A value close to 0 indicates a position at the bottom of the origin"));
        assert!(t.body.contains("The current prompt is: <prompt>"));
        assert!(t.body.ends_with(ARRANGEMENT_OBJECTS_SUFFIX));
    }

    #[test]
    fn render_substitutes_only_declared_placeholders() {
        let t = requirement_template();
        let mut bindings = BTreeMap::new();
        bindings.insert("funclist".to_string(), "handle, knob".to_string());
        bindings.insert("prompt".to_string(), "Open the fridge door".to_string());
        let rendered = t.render(&bindings).unwrap();
        assert!(rendered.contains("only the following: handle, knob."));
        assert!(rendered.contains("The current prompt is: Open the fridge door"));
        // The literal instruction examples survive rendering.
        assert!(rendered.contains("<symbol>"));
        assert!(rendered.contains("How many <object_part> should this <object> have"));
    }

    #[test]
    fn render_rejects_missing_and_unknown_bindings() {
        let t = task_parse_template();
        let err = t.render(&BTreeMap::new()).unwrap_err();
        assert_eq!(err, TemplateError::UnboundPlaceholder("prompt".to_string()));
        let mut bindings = BTreeMap::new();
        bindings.insert("prompt".to_string(), "x".to_string());
        bindings.insert("bogus".to_string(), "y".to_string());
        let err = t.render(&bindings).unwrap_err();
        assert_eq!(err, TemplateError::UnknownBinding("bogus".to_string()));
    }
}
