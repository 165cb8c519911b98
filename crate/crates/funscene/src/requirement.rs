//! Requirement-based filtering: infer a count predicate over functional
//! element labels from the prompt ("handle >= 3") and filter candidate
//! assets by it.
//!
//! Two routes produce the predicate: the model route renders the requirement
//! template, and a deterministic fallback grammar maps positional cues to
//! counts. Both emit the same textual form `label <symbol> N`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::asset::AssetRecord;
use crate::index::Candidate;
use crate::llm::{requirement_template, LlmClient, LlmError};
use crate::parts::{functional_elements, EnrichmentConfig, PartError};

#[derive(Debug, Error)]
pub enum RequirementError {
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error("model reply is missing field '{0}'")]
    MissingField(&'static str),
    #[error("functional label '{label}' is not in the candidate list")]
    LabelOutsideCandidates { label: String },
    #[error("unparseable requirement string '{0}'")]
    BadRequirementString(String),
    #[error("unknown ordinal '{0}'")]
    UnknownOrdinal(String),
    #[error("no functional label could be inferred from '{0}'")]
    UnresolvedLabel(String),
    #[error("candidate label list is empty")]
    NoCandidateLabels,
    #[error(transparent)]
    Part(#[from] PartError),
}

/// Comparison operator of a count predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cmp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Cmp {
    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Eq => "=",
            Cmp::Ge => ">=",
            Cmp::Gt => ">",
        }
    }

    pub fn parse(raw: &str) -> Option<Cmp> {
        match raw.trim() {
            "<" => Some(Cmp::Lt),
            "<=" => Some(Cmp::Le),
            "=" | "==" => Some(Cmp::Eq),
            ">=" => Some(Cmp::Ge),
            ">" => Some(Cmp::Gt),
            _ => None,
        }
    }

    pub fn eval(self, count: u32, n: u32) -> bool {
        match self {
            Cmp::Lt => count < n,
            Cmp::Le => count <= n,
            Cmp::Eq => count == n,
            Cmp::Ge => count >= n,
            Cmp::Gt => count > n,
        }
    }
}

/// A count predicate over functional-element labels, e.g. handle >= 3.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Requirement {
    pub object_name: String,
    pub functional_label: String,
    pub cmp: Cmp,
    pub n: u32,
}

impl fmt::Display for Requirement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {}",
            self.functional_label,
            self.cmp.symbol(),
            self.n
        )
    }
}

/// Parses the textual form "label <symbol> N" used by the template.
pub fn parse_requirement_str(raw: &str) -> Result<(String, Cmp, u32), RequirementError> {
    static FORM: LazyLock<Regex> =
        LazyLock::new(|| Regex::new(r"^\s*(.+?)\s*(>=|<=|==|=|>|<)\s*(\d+)\s*$").unwrap());
    let caps = FORM
        .captures(raw)
        .ok_or_else(|| RequirementError::BadRequirementString(raw.to_string()))?;
    let label = caps[1].trim().to_string();
    let cmp = Cmp::parse(&caps[2])
        .ok_or_else(|| RequirementError::BadRequirementString(raw.to_string()))?;
    let n: u32 = caps[3]
        .parse()
        .map_err(|_| RequirementError::BadRequirementString(raw.to_string()))?;
    Ok((label, cmp, n))
}

/// Infers the requirement through the model route. The candidate label list
/// fills `<funclist>`; a label outside it is rejected.
pub fn infer_requirement(
    client: &LlmClient,
    context_free_prompt: &str,
    candidate_labels: &BTreeSet<String>,
) -> Result<Requirement, RequirementError> {
    if candidate_labels.is_empty() {
        return Err(RequirementError::NoCandidateLabels);
    }
    let funclist = candidate_labels
        .iter()
        .cloned()
        .collect::<Vec<_>>()
        .join(", ");
    let mut bindings = BTreeMap::new();
    bindings.insert("funclist".to_string(), funclist);
    bindings.insert("prompt".to_string(), context_free_prompt.to_string());
    let response = client.complete(&requirement_template(), &bindings)?;
    let object_name = response
        .parsed
        .str_field("object")
        .ok_or(RequirementError::MissingField("object"))?
        .to_string();
    let part = response
        .parsed
        .str_field("object_part")
        .ok_or(RequirementError::MissingField("object_part"))?
        .to_string();
    let requirement_raw = response
        .parsed
        .str_field("object_requirement")
        .ok_or(RequirementError::MissingField("object_requirement"))?;
    let (label, cmp, n) = parse_requirement_str(requirement_raw)?;
    for candidate in [&part, &label] {
        if !candidate_labels.contains(candidate.as_str()) {
            return Err(RequirementError::LabelOutsideCandidates {
                label: candidate.clone(),
            });
        }
    }
    Ok(Requirement {
        object_name,
        functional_label: label,
        cmp,
        n,
    })
}

const ORDINAL_WORDS: [(&str, u32); 20] = [
    ("first", 1),
    ("second", 2),
    ("third", 3),
    ("fourth", 4),
    ("fifth", 5),
    ("sixth", 6),
    ("seventh", 7),
    ("eighth", 8),
    ("ninth", 9),
    ("tenth", 10),
    ("eleventh", 11),
    ("twelfth", 12),
    ("thirteenth", 13),
    ("fourteenth", 14),
    ("fifteenth", 15),
    ("sixteenth", 16),
    ("seventeenth", 17),
    ("eighteenth", 18),
    ("nineteenth", 19),
    ("twentieth", 20),
];

/// Finds an ordinal cue: words up to "twentieth" plus numeral forms like
/// "4th". Ordinal-looking words beyond the table are an error rather than a
/// guess.
pub fn find_ordinal(prompt: &str) -> Result<Option<u32>, RequirementError> {
    static NUMERAL: LazyLock<Regex> =
        LazyLock::new(|| Regex::new(r"\b(\d+)(st|nd|rd|th)\b").unwrap());
    static WORDISH: LazyLock<Regex> = LazyLock::new(|| {
        Regex::new(r"\b([a-z]+(?:teenth|tieth|first|second|third|fourth|fifth|sixth|seventh|eighth|ninth|tenth|eleventh|twelfth))\b").unwrap()
    });
    let lower = prompt.to_ascii_lowercase();
    if let Some(caps) = NUMERAL.captures(&lower) {
        let n: u32 = caps[1]
            .parse()
            .map_err(|_| RequirementError::UnknownOrdinal(caps[0].to_string()))?;
        return Ok(Some(n));
    }
    for word in lower.split(|c: char| !c.is_alphabetic()) {
        if let Some(&(_, n)) = ORDINAL_WORDS.iter().find(|(w, _)| *w == word) {
            return Ok(Some(n));
        }
        if !word.is_empty()
            && WORDISH.is_match(word)
            && !ORDINAL_WORDS.iter().any(|(w, _)| *w == word)
        {
            return Err(RequirementError::UnknownOrdinal(word.to_string()));
        }
    }
    Ok(None)
}

fn has_word(prompt: &str, word: &str) -> bool {
    prompt
        .split(|c: char| !c.is_alphabetic())
        .any(|w| w.eq_ignore_ascii_case(word))
}

fn has_compound_position(prompt: &str) -> bool {
    static COMPOUND: LazyLock<Regex> = LazyLock::new(|| {
        Regex::new(r"\b(top|bottom|upper|lower)[\s-](left|right)(most)?\b").unwrap()
    });
    COMPOUND.is_match(&prompt.to_ascii_lowercase())
}

fn has_positional_adjective(prompt: &str) -> bool {
    [
        "left",
        "right",
        "top",
        "bottom",
        "leftmost",
        "rightmost",
        "upper",
        "lower",
    ]
    .iter()
    .any(|w| has_word(prompt, w))
}

/// Deterministic fallback grammar: a compound position ("top left") implies
/// at least 4, an ordinal k implies at least k, a lone positional adjective
/// implies at least 2, no positional cue implies exactly 1. Cues combine by
/// taking the largest implied count.
pub fn infer_requirement_fallback(
    context_free_prompt: &str,
    candidate_labels: &BTreeSet<String>,
) -> Result<Requirement, RequirementError> {
    if candidate_labels.is_empty() {
        return Err(RequirementError::NoCandidateLabels);
    }
    let label = infer_functional_label(context_free_prompt, candidate_labels)?;
    let mut floor: Option<u32> = None;
    if has_compound_position(context_free_prompt) {
        floor = Some(floor.unwrap_or(0).max(4));
    }
    if let Some(k) = find_ordinal(context_free_prompt)? {
        floor = Some(floor.unwrap_or(0).max(k));
    }
    if has_positional_adjective(context_free_prompt) {
        floor = Some(floor.unwrap_or(0).max(2));
    }
    let (cmp, n) = match floor {
        Some(n) => (Cmp::Ge, n),
        None => (Cmp::Eq, 1),
    };
    Ok(Requirement {
        object_name: infer_object_name(context_free_prompt),
        functional_label: label,
        cmp,
        n,
    })
}

/// Rough head-noun extraction for the fallback route: prefers the phrase
/// after "of the", otherwise the first "the <noun>" group.
fn infer_object_name(prompt: &str) -> String {
    static OF_THE: LazyLock<Regex> = LazyLock::new(|| {
        Regex::new(r"(?i)\bof the ([a-z][a-z ]*?)(?:\.|,|$| from| next| near| in | on | to )")
            .unwrap()
    });
    static THE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\bthe ([a-z]+)").unwrap());
    if let Some(caps) = OF_THE.captures(prompt) {
        return caps[1].trim().to_string();
    }
    if let Some(caps) = THE.captures(prompt) {
        return caps[1].trim().to_string();
    }
    prompt.trim().to_string()
}

/// Keyword rules mapping the action/object vocabulary to a functional label.
const LABEL_HINTS: [(&str, &[&str]); 6] = [
    (
        "handle",
        &[
            "drawer",
            "door",
            "cabinet",
            "closet",
            "wardrobe",
            "fridge",
            "refrigerator",
            "window",
            "nightstand",
            "dresser",
            "pull",
            "chest",
            "bin",
        ],
    ),
    (
        "knob",
        &["oven", "stove", "temperature", "regulate", "burner", "dial"],
    ),
    ("switch", &["light", "lamp", "ceiling"]),
    (
        "button",
        &["press", "tv", "television", "flush", "elevator"],
    ),
    ("faucet", &["faucet", "tap", "water", "sink"]),
    ("lever", &["lever"]),
];

/// Picks the functional label deterministically: an explicit label word in
/// the prompt wins, then keyword rules, then a single remaining candidate.
pub fn infer_functional_label(
    prompt: &str,
    candidate_labels: &BTreeSet<String>,
) -> Result<String, RequirementError> {
    // Longest labels first so "door handle" beats "handle" when both appear.
    let mut by_len: Vec<&String> = candidate_labels.iter().collect();
    by_len.sort_by_key(|l| std::cmp::Reverse(l.len()));
    let lower = prompt.to_ascii_lowercase();
    for label in &by_len {
        if lower.contains(&label.to_ascii_lowercase()) {
            return Ok((*label).clone());
        }
    }
    for (label, hints) in LABEL_HINTS {
        if hints.iter().any(|h| has_word(&lower, h)) {
            // Prefer the exact label; otherwise any candidate that embeds it
            // (enriched forms like "door handle").
            if candidate_labels.contains(label) {
                return Ok(label.to_string());
            }
            if let Some(found) = by_len
                .iter()
                .find(|c| c.to_ascii_lowercase().contains(label))
            {
                return Ok((*found).clone());
            }
        }
    }
    if candidate_labels.len() == 1 {
        return Ok(candidate_labels.iter().next().unwrap().clone());
    }
    Err(RequirementError::UnresolvedLabel(prompt.to_string()))
}

/// True when the element label satisfies the requirement label: plain
/// equality first, then the enriched label as a substring match.
pub fn label_matches(plain: &str, enriched: &str, wanted: &str) -> bool {
    plain.eq_ignore_ascii_case(wanted)
        || enriched.eq_ignore_ascii_case(wanted)
        || enriched
            .to_ascii_lowercase()
            .contains(&wanted.to_ascii_lowercase())
}

/// Counts functional elements of `asset` matching the requirement label.
pub fn count_matching_elements(
    asset: &AssetRecord,
    wanted: &str,
    functional_labels: &BTreeSet<String>,
    cfg: &EnrichmentConfig,
) -> Result<u32, RequirementError> {
    let elements = functional_elements(asset, functional_labels, cfg)?;
    let mut count = 0;
    for element in &elements {
        let plain = asset
            .part(&element.part_id)
            .map(|p| p.label.as_str())
            .unwrap_or("");
        if label_matches(plain, &element.enriched_label, wanted) {
            count += 1;
        }
    }
    Ok(count)
}

/// Keeps a candidate iff its matching-element count satisfies the
/// predicate; relative order is preserved. Assets whose labels lack the
/// requirement label entirely count zero matches.
pub fn filter_assets(
    candidates: &[Candidate],
    assets: &BTreeMap<String, AssetRecord>,
    req: &Requirement,
    functional_labels: &BTreeSet<String>,
    cfg: &EnrichmentConfig,
) -> Result<Vec<Candidate>, RequirementError> {
    let mut kept = Vec::new();
    for candidate in candidates {
        let asset = assets
            .get(&candidate.asset_id)
            .unwrap_or_else(|| panic!("candidate id '{}' not resolvable", candidate.asset_id));
        let count = count_matching_elements(asset, &req.functional_label, functional_labels, cfg)?;
        if req.cmp.eval(count, req.n) {
            kept.push(candidate.clone());
        }
    }
    Ok(kept)
}
