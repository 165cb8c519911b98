//! Functional-element arrangement: choose the part mask whose 2D position
//! satisfies the prompt's spatial reference.
//!
//! Two paths exist. The deterministic predicate engine is the default
//! execution path and doubles as the test oracle; the model path renders the
//! arrangement template per candidate asset and parses the verdict list.
//! Both share one coordinate convention: X = 1 is the viewer's left, X = 0
//! their right, Y = 0 the bottom, Y = 1 the top.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::asset::{FunctionalElement, MaskSelection};
use crate::llm::{arrangement_template, LlmClient, LlmError};
use crate::requirement::{find_ordinal, RequirementError};

/// Default ambiguity tolerance in normalized units.
pub const DEFAULT_TIE_EPS: f64 = 0.05;

#[derive(Debug, Error)]
pub enum ArrangeError {
    #[error("conflicting spatial cues in prompt '{0}'")]
    ConflictingCues(String),
    #[error(transparent)]
    Ordinal(#[from] RequirementError),
    #[error("tie tolerance must be positive, got {0}")]
    BadTieEps(f64),
    #[error("cannot choose from an empty selection list")]
    EmptySelectionList,
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error("verdict references unknown part id '{part_id}' on asset '{asset_id}'")]
    UnknownVerdictPart { asset_id: String, part_id: String },
    #[error("verdict list is missing asset '{0}'")]
    MissingVerdict(String),
    #[error("malformed verdict list: {0}")]
    MalformedVerdict(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridRow {
    Top,
    Bottom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridCol {
    Left,
    Right,
}

/// Spatial reference extracted from the prompt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpatialQuery {
    Leftmost,
    Rightmost,
    NthFromLeft(u32),
    NthFromRight(u32),
    Top,
    Bottom,
    /// N-th counting down from the top; the convention for ordinals without
    /// a frame of reference.
    NthVertical(u32),
    GridCell {
        row: GridRow,
        col: GridCol,
    },
    /// No positional cue: the element must be unique.
    Unique,
}

/// Why the engine judged an asset unsuitable for a query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum UnsuitableReason {
    /// Fewer elements than the query requires.
    TooFew { required: usize, got: usize },
    /// The decisive coordinate gap is below the tie tolerance.
    Ambiguous { axis: char, gap: f64 },
    /// Elements do not separate into a 2x2 grid.
    NoGrid,
    /// The requested grid cell holds no element.
    EmptyCell,
    /// A unique element was required but several exist.
    NotUnique { got: usize },
}

impl fmt::Display for UnsuitableReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnsuitableReason::TooFew { required, got } => {
                write!(f, "needs at least {required} elements, found {got}")
            }
            UnsuitableReason::Ambiguous { axis, gap } => {
                write!(f, "ambiguous on the {axis} axis (gap {gap:.4})")
            }
            UnsuitableReason::NoGrid => write!(f, "elements are not arranged in a 2x2 grid"),
            UnsuitableReason::EmptyCell => write!(f, "requested grid cell is empty"),
            UnsuitableReason::NotUnique { got } => {
                write!(f, "expected a unique element, found {got}")
            }
        }
    }
}

/// Engine output: either the selected mask or a reasoned rejection.
#[derive(Debug, Clone, PartialEq)]
pub enum Selection {
    Chosen(MaskSelection),
    Unsuitable(UnsuitableReason),
}

impl Selection {
    pub fn chosen(&self) -> Option<&MaskSelection> {
        match self {
            Selection::Chosen(s) => Some(s),
            Selection::Unsuitable(_) => None,
        }
    }
}

/// Maps phrase patterns to query kinds. An absent cue means the element must
/// be unique; cue combinations outside the supported families are an error.
pub fn parse_spatial_query(context_free_prompt: &str) -> Result<SpatialQuery, ArrangeError> {
    let lower = context_free_prompt.to_ascii_lowercase();

    // Compound positions ("top left", "bottom-right") come first so their
    // words do not double as single cues.
    let compound = regex_static::compound().captures(&lower).map(|caps| {
        let row = match &caps[1] {
            "top" | "upper" => GridRow::Top,
            _ => GridRow::Bottom,
        };
        let col = match &caps[2] {
            "left" => GridCol::Left,
            _ => GridCol::Right,
        };
        (row, col)
    });
    let stripped = regex_static::compound().replace_all(&lower, " ");

    // "from the <side>" phrases anchor ordinals; strip them before counting
    // single-word cues.
    let mut from_left = false;
    let mut from_right = false;
    let mut from_top = false;
    let mut from_bottom = false;
    for caps in regex_static::from_side().captures_iter(&stripped) {
        match &caps[1] {
            "left" => from_left = true,
            "right" => from_right = true,
            "top" => from_top = true,
            _ => from_bottom = true,
        }
    }
    let stripped = regex_static::from_side().replace_all(&stripped, " ");

    let ordinal = find_ordinal(&stripped)?;
    let has = |w: &str| {
        stripped
            .split(|c: char| !c.is_alphanumeric())
            .any(|t| t == w)
    };
    let leftish = has("left") || has("leftmost");
    let rightish = has("right") || has("rightmost");
    let topish = has("top") || has("upper");
    let bottomish = has("bottom") || has("lower");
    let single_cues = [leftish, rightish, topish, bottomish]
        .iter()
        .filter(|b| **b)
        .count();

    if let Some((row, col)) = compound {
        if ordinal.is_some()
            || single_cues > 0
            || from_left
            || from_right
            || from_top
            || from_bottom
        {
            return Err(ArrangeError::ConflictingCues(
                context_free_prompt.to_string(),
            ));
        }
        return Ok(SpatialQuery::GridCell { row, col });
    }
    if let Some(n) = ordinal {
        if single_cues > 0 || (from_left && from_right) || from_bottom {
            // Ordinal indexing from the bottom is outside the supported
            // query vocabulary.
            return Err(ArrangeError::ConflictingCues(
                context_free_prompt.to_string(),
            ));
        }
        if from_left {
            return Ok(SpatialQuery::NthFromLeft(n));
        }
        if from_right {
            return Ok(SpatialQuery::NthFromRight(n));
        }
        // "from the top" matches the default top-down counting.
        let _ = from_top;
        return Ok(SpatialQuery::NthVertical(n));
    }
    if single_cues > 1 || from_left || from_right || from_top || from_bottom {
        return Err(ArrangeError::ConflictingCues(
            context_free_prompt.to_string(),
        ));
    }
    if leftish {
        return Ok(SpatialQuery::Leftmost);
    }
    if rightish {
        return Ok(SpatialQuery::Rightmost);
    }
    if topish {
        return Ok(SpatialQuery::Top);
    }
    if bottomish {
        return Ok(SpatialQuery::Bottom);
    }
    Ok(SpatialQuery::Unique)
}

mod regex_static {
    use regex::Regex;
    use std::sync::LazyLock;

    pub fn compound() -> &'static Regex {
        static RE: LazyLock<Regex> = LazyLock::new(|| {
            Regex::new(r"\b(top|upper|bottom|lower)[\s-](left|right)(?:most)?\b").unwrap()
        });
        &RE
    }

    pub fn from_side() -> &'static Regex {
        static RE: LazyLock<Regex> =
            LazyLock::new(|| Regex::new(r"\bfrom the (left|right|top|bottom)\b").unwrap());
        &RE
    }
}

/// Deterministic arrangement engine over one asset's elements.
///
/// Leftmost selects the maximum X (X = 1 is the viewer's left), rightmost
/// the minimum; n-th from the left walks descending X; top/bottom and
/// vertical ordinals do the same on Y. The result is unsuitable whenever the
/// cardinality or grid requirements fail, or the decisive coordinate gap to
/// the runner-up is below `tie_eps`.
pub fn select_part(
    asset_id: &str,
    elements: &[FunctionalElement],
    query: &SpatialQuery,
    tie_eps: f64,
) -> Result<Selection, ArrangeError> {
    if tie_eps <= 0.0 {
        return Err(ArrangeError::BadTieEps(tie_eps));
    }
    let selection = match query {
        SpatialQuery::Unique => {
            if elements.len() == 1 {
                chosen(asset_id, &elements[0], "the only candidate element")
            } else {
                Selection::Unsuitable(UnsuitableReason::NotUnique {
                    got: elements.len(),
                })
            }
        }
        SpatialQuery::Leftmost => rank(asset_id, elements, Axis::X, Order::Desc, 1, 2, tie_eps),
        SpatialQuery::Rightmost => rank(asset_id, elements, Axis::X, Order::Asc, 1, 2, tie_eps),
        SpatialQuery::Top => rank(asset_id, elements, Axis::Y, Order::Desc, 1, 2, tie_eps),
        SpatialQuery::Bottom => rank(asset_id, elements, Axis::Y, Order::Asc, 1, 2, tie_eps),
        SpatialQuery::NthFromLeft(n) => rank(
            asset_id,
            elements,
            Axis::X,
            Order::Desc,
            *n as usize,
            *n as usize,
            tie_eps,
        ),
        SpatialQuery::NthFromRight(n) => rank(
            asset_id,
            elements,
            Axis::X,
            Order::Asc,
            *n as usize,
            *n as usize,
            tie_eps,
        ),
        SpatialQuery::NthVertical(n) => rank(
            asset_id,
            elements,
            Axis::Y,
            Order::Desc,
            *n as usize,
            *n as usize,
            tie_eps,
        ),
        SpatialQuery::GridCell { row, col } => grid_cell(asset_id, elements, *row, *col, tie_eps),
    };
    Ok(selection)
}

#[derive(Clone, Copy)]
enum Axis {
    X,
    Y,
}

impl Axis {
    fn of(self, e: &FunctionalElement) -> f64 {
        match self {
            Axis::X => e.centroid2.x,
            Axis::Y => e.centroid2.y,
        }
    }

    fn letter(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
        }
    }
}

#[derive(Clone, Copy)]
enum Order {
    Asc,
    Desc,
}

fn chosen(asset_id: &str, element: &FunctionalElement, why: &str) -> Selection {
    Selection::Chosen(MaskSelection {
        asset_id: asset_id.to_string(),
        part_id: element.part_id.clone(),
        reasoning: format!(
            "'{}' at ({:.3}, {:.3}): {why}",
            element.enriched_label, element.centroid2.x, element.centroid2.y
        ),
    })
}

/// Picks the `nth` element (1-based) along `axis` in the given order,
/// rejecting cardinality shortfalls and tie-tolerance ambiguity against both
/// neighbors in the ranking.
fn rank(
    asset_id: &str,
    elements: &[FunctionalElement],
    axis: Axis,
    order: Order,
    nth: usize,
    min_count: usize,
    tie_eps: f64,
) -> Selection {
    if nth == 0 {
        return Selection::Unsuitable(UnsuitableReason::TooFew {
            required: 1,
            got: elements.len(),
        });
    }
    if elements.len() < min_count || elements.len() < nth {
        return Selection::Unsuitable(UnsuitableReason::TooFew {
            required: min_count.max(nth),
            got: elements.len(),
        });
    }
    let mut sorted: Vec<&FunctionalElement> = elements.iter().collect();
    sorted.sort_by(|a, b| {
        let cmp = axis.of(a).total_cmp(&axis.of(b));
        let cmp = match order {
            Order::Asc => cmp,
            Order::Desc => cmp.reverse(),
        };
        cmp.then_with(|| a.part_id.cmp(&b.part_id))
    });
    let pick = sorted[nth - 1];
    // Ambiguity: the chosen element must be separated from both ranking
    // neighbors on the decisive axis.
    for neighbor in [
        nth.checked_sub(2).map(|i| sorted[i]),
        sorted.get(nth).copied(),
    ]
    .into_iter()
    .flatten()
    {
        let gap = (axis.of(pick) - axis.of(neighbor)).abs();
        if gap < tie_eps {
            return Selection::Unsuitable(UnsuitableReason::Ambiguous {
                axis: axis.letter(),
                gap,
            });
        }
    }
    let position = match order {
        Order::Asc => "ascending",
        Order::Desc => "descending",
    };
    chosen(
        asset_id,
        pick,
        &format!("rank {nth} by {position} {}", axis.letter()),
    )
}

/// 1D 2-means on sorted values: the split minimizing within-cluster squared
/// error. Returns (boundary value of the lower cluster, gap between the
/// clusters).
fn two_means_split(values: &[f64]) -> Option<(f64, f64)> {
    if values.len() < 2 {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let sse = |xs: &[f64]| {
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>()
    };
    let mut best: Option<(usize, f64)> = None;
    for split in 1..sorted.len() {
        let cost = sse(&sorted[..split]) + sse(&sorted[split..]);
        if best.is_none_or(|(_, c)| cost < c) {
            best = Some((split, cost));
        }
    }
    let (split, _) = best?;
    let lower_max = sorted[split - 1];
    let upper_min = sorted[split];
    Some((lower_max, upper_min - lower_max))
}

/// Requires at least 4 elements separable into 2 X-clusters and 2 Y-clusters
/// with inter-cluster gaps above `tie_eps`, and exactly one element in the
/// requested cell.
fn grid_cell(
    asset_id: &str,
    elements: &[FunctionalElement],
    row: GridRow,
    col: GridCol,
    tie_eps: f64,
) -> Selection {
    if elements.len() < 4 {
        return Selection::Unsuitable(UnsuitableReason::TooFew {
            required: 4,
            got: elements.len(),
        });
    }
    let xs: Vec<f64> = elements.iter().map(|e| e.centroid2.x).collect();
    let ys: Vec<f64> = elements.iter().map(|e| e.centroid2.y).collect();
    let Some((x_boundary, x_gap)) = two_means_split(&xs) else {
        return Selection::Unsuitable(UnsuitableReason::NoGrid);
    };
    let Some((y_boundary, y_gap)) = two_means_split(&ys) else {
        return Selection::Unsuitable(UnsuitableReason::NoGrid);
    };
    if x_gap <= tie_eps || y_gap <= tie_eps {
        return Selection::Unsuitable(UnsuitableReason::NoGrid);
    }
    // X = 1 is the viewer's left, so the left column is the upper X cluster.
    let want_upper_x = matches!(col, GridCol::Left);
    let want_upper_y = matches!(row, GridRow::Top);
    let members: Vec<&FunctionalElement> = elements
        .iter()
        .filter(|e| {
            (e.centroid2.x > x_boundary) == want_upper_x
                && (e.centroid2.y > y_boundary) == want_upper_y
        })
        .collect();
    match members.as_slice() {
        [] => Selection::Unsuitable(UnsuitableReason::EmptyCell),
        [only] => chosen(
            asset_id,
            only,
            &format!(
                "grid cell ({}, {})",
                match row {
                    GridRow::Top => "top",
                    GridRow::Bottom => "bottom",
                },
                match col {
                    GridCol::Left => "left",
                    GridCol::Right => "right",
                }
            ),
        ),
        many => Selection::Unsuitable(UnsuitableReason::NotUnique { got: many.len() }),
    }
}

/// Uniform random pick among equally suitable selections, driven by the
/// seeded generator.
pub fn choose_final(
    selections: &[MaskSelection],
    seed: u64,
) -> Result<MaskSelection, ArrangeError> {
    if selections.is_empty() {
        return Err(ArrangeError::EmptySelectionList);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let idx = rng.random_range(0..selections.len());
    Ok(selections[idx].clone())
}

/// Per-asset verdict parsed from the model's arrangement reply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssetVerdict {
    pub asset_id: String,
    pub suitable: bool,
    pub part_id: Option<String>,
    pub reasoning: String,
}

/// Renders the candidate listing in the input format the arrangement
/// template describes: id, enriched name, normalized centroid per part.
pub fn render_candidate_listing(candidates: &[(String, Vec<FunctionalElement>)]) -> String {
    let mut out = String::new();
    for (asset_id, elements) in candidates {
        out.push_str(&format!("- id: {asset_id}\n  parts:\n"));
        for element in elements {
            out.push_str(&format!(
                "    - id: {}\n      name: {}\n      centroid: [{:.4}, {:.4}]\n",
                element.part_id, element.enriched_label, element.centroid2.x, element.centroid2.y
            ));
        }
    }
    out
}

/// Model route over a batch of candidate assets. Assets with no elements are
/// never sent to the model; they get an unsuitable verdict directly.
pub fn select_parts_llm(
    client: &LlmClient,
    object_name: &str,
    functional_name: &str,
    context_free_prompt: &str,
    candidates: &[(String, Vec<FunctionalElement>)],
) -> Result<Vec<AssetVerdict>, ArrangeError> {
    let mut verdicts: Vec<AssetVerdict> = Vec::new();
    let asked: Vec<&(String, Vec<FunctionalElement>)> = candidates
        .iter()
        .filter(|(_, els)| !els.is_empty())
        .collect();
    for (asset_id, _) in candidates.iter().filter(|(_, els)| els.is_empty()) {
        verdicts.push(AssetVerdict {
            asset_id: asset_id.clone(),
            suitable: false,
            part_id: None,
            reasoning: "no functional elements".to_string(),
        });
    }
    if asked.is_empty() {
        return Ok(verdicts);
    }
    let listing_owned: Vec<(String, Vec<FunctionalElement>)> = asked
        .iter()
        .map(|(id, els)| (id.clone(), els.clone()))
        .collect();
    let mut bindings = BTreeMap::new();
    bindings.insert("object".to_string(), object_name.to_string());
    bindings.insert("func".to_string(), functional_name.to_string());
    bindings.insert("prompt".to_string(), context_free_prompt.to_string());
    bindings.insert(
        "objects".to_string(),
        render_candidate_listing(&listing_owned),
    );
    let response = client.complete(&arrangement_template(), &bindings)?;
    let items = response
        .parsed
        .as_list()
        .ok_or_else(|| ArrangeError::MalformedVerdict("expected a verdict list".to_string()))?;
    let mut by_id: BTreeMap<String, AssetVerdict> = BTreeMap::new();
    for item in items {
        let asset_id = item
            .str_field("id")
            .ok_or_else(|| ArrangeError::MalformedVerdict("verdict without id".to_string()))?
            .to_string();
        let suitable = item.bool_field("suitable").ok_or_else(|| {
            ArrangeError::MalformedVerdict(format!("verdict '{asset_id}' without suitable flag"))
        })?;
        let part_id = item.opt_str_field("part_id").map(|s| s.to_string());
        let reasoning = item.str_field("reasoning").unwrap_or_default().to_string();
        if let Some(pid) = &part_id {
            let known = listing_owned
                .iter()
                .find(|(id, _)| *id == asset_id)
                .map(|(_, els)| els.iter().any(|e| &e.part_id == pid))
                .unwrap_or(false);
            if !known {
                return Err(ArrangeError::UnknownVerdictPart {
                    asset_id,
                    part_id: pid.clone(),
                });
            }
        }
        by_id.insert(
            asset_id.clone(),
            AssetVerdict {
                asset_id,
                suitable,
                part_id,
                reasoning,
            },
        );
    }
    for (asset_id, _) in &listing_owned {
        let verdict = by_id
            .remove(asset_id)
            .ok_or_else(|| ArrangeError::MissingVerdict(asset_id.clone()))?;
        verdicts.push(verdict);
    }
    Ok(verdicts)
}

/// Single-asset model verdict.
pub fn select_part_llm(
    client: &LlmClient,
    object_name: &str,
    functional_name: &str,
    context_free_prompt: &str,
    asset_id: &str,
    elements: &[FunctionalElement],
) -> Result<AssetVerdict, ArrangeError> {
    let batch = vec![(asset_id.to_string(), elements.to_vec())];
    let mut verdicts = select_parts_llm(
        client,
        object_name,
        functional_name,
        context_free_prompt,
        &batch,
    )?;
    Ok(verdicts.remove(0))
}
