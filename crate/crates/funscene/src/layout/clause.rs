//! Clause DSL and layout planning.
//!
//! Clause text form, one per line:
//! `subject [, reference] | kind [| hard|soft [weight]]`, e.g.
//! `table | central` or `nightstand, bed | left-of | hard`. The model route
//! expands a layout description into a structured plan (objects plus clause
//! lines); the deterministic fallback parses the same DSL directly and
//! derives a minimal plan from pattern-matched relations.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Clause, ClauseKind, Hardness, WallSide};
use crate::llm::{layout_plan_template, LlmClient, LlmError};

#[derive(Debug, Error)]
pub enum ClauseError {
    #[error("malformed clause '{0}'")]
    Malformed(String),
    #[error("unknown clause kind '{0}'")]
    UnknownKind(String),
    #[error("clause '{clause}' references unknown object '{object}'")]
    UnknownObject { clause: String, object: String },
    #[error("kind '{0}' requires a reference object")]
    MissingReference(String),
    #[error("kind '{0}' takes no reference object")]
    UnexpectedReference(String),
    #[error("non-positive weight in clause '{0}'")]
    BadWeight(String),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error("model plan is missing '{0}'")]
    MissingPlanField(&'static str),
}

/// Hard and soft clause lists, as the solver consumes them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClauseSet {
    pub hard: Vec<Clause>,
    pub soft: Vec<Clause>,
}

impl ClauseSet {
    pub fn all(&self) -> impl Iterator<Item = &Clause> {
        self.hard.iter().chain(self.soft.iter())
    }
}

fn parse_wall(token: &str) -> Option<WallSide> {
    match token {
        "north" | "n" => Some(WallSide::North),
        "east" | "e" => Some(WallSide::East),
        "south" | "s" => Some(WallSide::South),
        "west" | "w" => Some(WallSide::West),
        _ => None,
    }
}

/// Parses one clause line of the DSL. Hardness defaults to hard.
pub fn parse_clause_line(line: &str) -> Result<Clause, ClauseError> {
    let fields: Vec<&str> = line.split('|').map(str::trim).collect();
    if fields.len() < 2 || fields.len() > 3 {
        return Err(ClauseError::Malformed(line.to_string()));
    }
    let mut subjects = fields[0].split(',').map(str::trim);
    let subject = subjects
        .next()
        .filter(|s| !s.is_empty())
        .ok_or_else(|| ClauseError::Malformed(line.to_string()))?;
    let reference = subjects.next().map(|s| s.to_string());
    if subjects.next().is_some() {
        return Err(ClauseError::Malformed(line.to_string()));
    }

    let mut kind_tokens = fields[1].split_whitespace();
    let kind_name = kind_tokens
        .next()
        .ok_or_else(|| ClauseError::Malformed(line.to_string()))?
        .to_ascii_lowercase()
        .replace('_', "-");
    let wall = kind_tokens.next().map(|t| t.to_ascii_lowercase());
    let with_ref = |reference: &Option<String>| -> Result<String, ClauseError> {
        reference
            .clone()
            .filter(|r| !r.is_empty())
            .ok_or_else(|| ClauseError::MissingReference(kind_name.clone()))
    };
    let kind = match kind_name.as_str() {
        "central" | "corner" | "against-wall" if reference.is_some() => {
            return Err(ClauseError::UnexpectedReference(kind_name));
        }
        "central" => ClauseKind::Central,
        "corner" => ClauseKind::Corner,
        "against-wall" => ClauseKind::AgainstWall {
            wall: match wall {
                Some(token) => Some(
                    parse_wall(&token).ok_or_else(|| ClauseError::UnknownKind(token.clone()))?,
                ),
                None => None,
            },
        },
        "left-of" => ClauseKind::LeftOf {
            reference: with_ref(&reference)?,
        },
        "right-of" => ClauseKind::RightOf {
            reference: with_ref(&reference)?,
        },
        "in-front-of" => ClauseKind::InFrontOf {
            reference: with_ref(&reference)?,
        },
        "behind" => ClauseKind::Behind {
            reference: with_ref(&reference)?,
        },
        "near" | "next-to" => ClauseKind::Near {
            reference: with_ref(&reference)?,
        },
        "on-top-of" => ClauseKind::OnTopOf {
            reference: with_ref(&reference)?,
        },
        other => return Err(ClauseError::UnknownKind(other.to_string())),
    };

    let (hardness, weight) = match fields.get(2) {
        None => (Hardness::Hard, 1.0),
        Some(raw) => {
            let mut tokens = raw.split_whitespace();
            match tokens.next().map(|t| t.to_ascii_lowercase()).as_deref() {
                Some("hard") | None => (Hardness::Hard, 1.0),
                Some("soft") => {
                    let weight = match tokens.next() {
                        Some(w) => w
                            .parse::<f64>()
                            .map_err(|_| ClauseError::Malformed(line.to_string()))?,
                        None => 1.0,
                    };
                    if weight <= 0.0 {
                        return Err(ClauseError::BadWeight(line.to_string()));
                    }
                    (Hardness::Soft, weight)
                }
                Some(other) => return Err(ClauseError::UnknownKind(other.to_string())),
            }
        }
    };

    Ok(Clause {
        subject: subject.to_string(),
        kind,
        hardness,
        weight,
    })
}

/// Renders a clause back into its line form; inverse of
/// [`parse_clause_line`].
pub fn render_clause(clause: &Clause) -> String {
    let mut head = clause.subject.clone();
    if let Some(reference) = clause.kind.reference() {
        head.push_str(", ");
        head.push_str(reference);
    }
    let mut kind = clause.kind.name().to_string();
    if let ClauseKind::AgainstWall { wall: Some(w) } = &clause.kind {
        kind.push(' ');
        kind.push_str(match w {
            WallSide::North => "north",
            WallSide::East => "east",
            WallSide::South => "south",
            WallSide::West => "west",
        });
    }
    let tail = match clause.hardness {
        Hardness::Hard => "hard".to_string(),
        Hardness::Soft => format!("soft {}", clause.weight),
    };
    format!("{head} | {kind} | {tail}")
}

/// Parses clause lines and validates every subject and reference against
/// the known object set, splitting hard from soft.
pub fn clauses_from_lines(
    lines: &[String],
    known_objects: &BTreeSet<String>,
) -> Result<ClauseSet, ClauseError> {
    let mut set = ClauseSet::default();
    for line in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let clause = parse_clause_line(line)?;
        for object in std::iter::once(clause.subject.as_str()).chain(clause.kind.reference()) {
            if !known_objects.contains(object) {
                return Err(ClauseError::UnknownObject {
                    clause: line.to_string(),
                    object: object.to_string(),
                });
            }
        }
        match clause.hardness {
            Hardness::Hard => set.hard.push(clause),
            Hardness::Soft => set.soft.push(clause),
        }
    }
    Ok(set)
}

/// One object of a layout plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedObject {
    pub name: String,
    pub description: String,
    pub required: bool,
    pub wall_mounted: bool,
}

/// Structured expansion of a layout description: the objects to place and
/// the clause set over them.
#[derive(Debug, Clone, PartialEq)]
pub struct LayoutPlan {
    pub objects: Vec<PlannedObject>,
    pub clauses: ClauseSet,
}

impl LayoutPlan {
    pub fn object_names(&self) -> BTreeSet<String> {
        self.objects.iter().map(|o| o.name.clone()).collect()
    }

    /// Promotes every object referenced by a hard clause to required; hard
    /// clauses are solved in the first pass, so their references must be
    /// placed there too.
    pub fn promote_hard_references(&mut self) {
        let referenced: BTreeSet<String> = self
            .clauses
            .hard
            .iter()
            .flat_map(|c| c.kind.reference().map(|r| r.to_string()))
            .collect();
        for object in &mut self.objects {
            if referenced.contains(&object.name) {
                object.required = true;
            }
        }
    }
}

/// Model route: expands the layout prompt into a plan and validates the
/// clause lines.
pub fn plan_from_layout(
    client: &LlmClient,
    layout_prompt: &str,
    required_names: &[String],
) -> Result<LayoutPlan, ClauseError> {
    let mut bindings = BTreeMap::new();
    bindings.insert("layout".to_string(), layout_prompt.to_string());
    bindings.insert("objects".to_string(), required_names.join(", "));
    let response = client.complete(&layout_plan_template(), &bindings)?;
    let objects_node = response
        .parsed
        .get("objects")
        .and_then(|n| n.as_list())
        .ok_or(ClauseError::MissingPlanField("objects"))?;
    let mut objects = Vec::new();
    for node in objects_node {
        let name = node
            .str_field("name")
            .ok_or(ClauseError::MissingPlanField("objects[].name"))?
            .to_string();
        objects.push(PlannedObject {
            description: node
                .str_field("description")
                .unwrap_or(&format!("a {name}"))
                .to_string(),
            required: node.bool_field("required").unwrap_or(false)
                || required_names.iter().any(|r| r == &name),
            wall_mounted: node.bool_field("wall_mounted").unwrap_or(false),
            name,
        });
    }
    let clause_lines: Vec<String> = response
        .parsed
        .get("clauses")
        .and_then(|n| n.as_list())
        .map(|items| {
            items
                .iter()
                .filter_map(|n| n.as_str().map(|s| s.to_string()))
                .collect()
        })
        .unwrap_or_default();
    let known = objects.iter().map(|o| o.name.clone()).collect();
    let clauses = clauses_from_lines(&clause_lines, &known)?;
    let mut plan = LayoutPlan { objects, clauses };
    plan.promote_hard_references();
    Ok(plan)
}

/// Furniture vocabulary the fallback planner recognizes, longest first so
/// "light switch" wins over "switch".
const KNOWN_OBJECTS: [&str; 30] = [
    "washing machine",
    "light switch",
    "refrigerator",
    "nightstand",
    "bookshelf",
    "wardrobe",
    "treadmill",
    "armchair",
    "cabinet",
    "dresser",
    "socket",
    "switch",
    "window",
    "fridge",
    "mirror",
    "toilet",
    "drawer",
    "couch",
    "table",
    "chair",
    "shelf",
    "plant",
    "desk",
    "sofa",
    "oven",
    "lamp",
    "door",
    "sink",
    "bed",
    "tv",
];

const WALL_MOUNTED: [&str; 6] = [
    "door",
    "window",
    "light switch",
    "switch",
    "socket",
    "outlet",
];

pub fn is_wall_mounted_name(name: &str) -> bool {
    let lower = name.to_ascii_lowercase();
    WALL_MOUNTED
        .iter()
        .any(|w| lower == *w || lower.ends_with(&format!(" {w}")))
}

static RELATION: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?i)\bthe ([a-z][a-z ]*?) is (next to|near|beside|to the left of|on the left of|left of|to the right of|on the right of|right of|behind|in front of) the ([a-z][a-z ]*?)(?:[\.,;]| and | which | that | with )",
    )
    .unwrap()
});

fn relation_kind(phrase: &str, reference: String) -> ClauseKind {
    match phrase.to_ascii_lowercase().as_str() {
        "next to" | "near" | "beside" => ClauseKind::Near { reference },
        "to the left of" | "on the left of" | "left of" => ClauseKind::LeftOf { reference },
        "to the right of" | "on the right of" | "right of" => ClauseKind::RightOf { reference },
        "behind" => ClauseKind::Behind { reference },
        _ => ClauseKind::InFrontOf { reference },
    }
}

/// Deterministic fallback planner: scans the layout description for known
/// furniture words and "The A is <relation> the B." sentences. Stated
/// relations become hard clauses; storage furniture gets a soft
/// against-wall preference.
pub fn plan_fallback(layout_prompt: &str, required_names: &[String]) -> LayoutPlan {
    let lower = layout_prompt.to_ascii_lowercase();
    let mut names: Vec<String> = Vec::new();
    let mut push_unique = |name: &str| {
        let name = name.trim().to_ascii_lowercase();
        if !name.is_empty() && !names.contains(&name) {
            names.push(name);
        }
    };
    for required in required_names {
        push_unique(required);
    }
    // Scan longest-first and blank out matches so "light switch" does not
    // also yield "switch".
    let mut scratch = lower.clone();
    for word in KNOWN_OBJECTS {
        while let Some(pos) = scratch.find(word) {
            let before_ok = pos == 0 || !scratch.as_bytes()[pos - 1].is_ascii_alphanumeric();
            let end = pos + word.len();
            let after_ok = end >= scratch.len() || !scratch.as_bytes()[end].is_ascii_alphanumeric();
            if before_ok && after_ok {
                push_unique(word);
            }
            scratch.replace_range(pos..end, &"#".repeat(word.len()));
        }
    }

    let mut clauses = ClauseSet::default();
    let with_period = format!("{layout_prompt}.");
    for caps in RELATION.captures_iter(&with_period) {
        let subject = caps[1].trim().to_ascii_lowercase();
        let reference = caps[3].trim().to_ascii_lowercase();
        // Relations only count between recognized objects.
        let subject = names.iter().find(|n| subject.ends_with(*n)).cloned();
        let reference = names.iter().find(|n| reference.ends_with(*n)).cloned();
        if let (Some(subject), Some(reference)) = (subject, reference) {
            if subject != reference {
                clauses
                    .hard
                    .push(Clause::hard(&subject, relation_kind(&caps[2], reference)));
            }
        }
    }

    let required_set: BTreeSet<String> = required_names
        .iter()
        .map(|n| n.to_ascii_lowercase())
        .collect();
    let hard_refs: BTreeSet<String> = clauses
        .hard
        .iter()
        .flat_map(|c| c.kind.reference().map(|r| r.to_string()))
        .collect();
    let hard_subjects: BTreeSet<String> = clauses.hard.iter().map(|c| c.subject.clone()).collect();

    let mut objects = Vec::new();
    for name in &names {
        let required = required_set.contains(name)
            || hard_refs.contains(name)
            || hard_subjects.contains(name) && required_set.contains(name);
        let wall_mounted = is_wall_mounted_name(name);
        if !required && !wall_mounted {
            // Common-sense preference for extras: storage hugs the walls.
            let storage = [
                "wardrobe",
                "bookshelf",
                "dresser",
                "bed",
                "sofa",
                "couch",
                "cabinet",
            ]
            .iter()
            .any(|s| name == s);
            if storage {
                clauses.soft.push(Clause::soft(
                    name,
                    ClauseKind::AgainstWall { wall: None },
                    1.0,
                ));
            }
        }
        objects.push(PlannedObject {
            name: name.clone(),
            description: format!("a {name}"),
            required,
            wall_mounted,
        });
    }
    let mut plan = LayoutPlan { objects, clauses };
    plan.promote_hard_references();
    plan
}

/// Renders a plan in the YAML shape the layout-plan template requests; used
/// by scripted backends and for logging.
pub fn render_plan(plan: &LayoutPlan) -> String {
    let mut out = String::from("```yaml\nobjects:\n");
    for object in &plan.objects {
        out.push_str(&format!(
            "  - name: {}\n    description: {}\n    required: {}\n    wall_mounted: {}\n",
            object.name, object.description, object.required, object.wall_mounted
        ));
    }
    out.push_str("clauses:\n");
    for clause in plan.clauses.all() {
        out.push_str(&format!("  - \"{}\"\n", render_clause(clause)));
    }
    out.push_str("```\n");
    out
}
