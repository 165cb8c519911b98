//! Deterministic fixtures: a hash-based text featurizer, builders for
//! part-annotated demo assets, a small on-disk demo dataset, and a scripted
//! model backend.
//!
//! The featurizer is a stand-in for real embedding models so examples and
//! tests run fully offline; production datasets ingest precomputed vectors
//! instead. The scripted backend answers every template with the engine's
//! own deterministic fallbacks rendered in the model output formats, which
//! makes recorded cassettes agree with the engine by construction.

use std::path::{Path, PathBuf};

use crate::asset::{AssetRecord, Database, MaskRef, PartNode};
use crate::geom::{Aabb3, Vec2, Vec3};
use crate::index::EmbeddingIndex;
use crate::llm::{parse_structured_block, Backend, ChatRequest, LlmError};
use crate::task::TaskDescription;

/// Embedding dimension of the demo indices.
pub const DEMO_DIM: usize = 64;

/// Deterministic character-trigram feature hashing into `dim` signed
/// buckets, L2-normalized. Similar strings get similar vectors, which is all
/// retrieval needs from a stand-in featurizer.
pub fn hash_embedding(text: &str, dim: usize) -> Vec<f32> {
    let mut accum = vec![0f64; dim];
    let normalized: Vec<char> = format!("  {}  ", text.to_ascii_lowercase())
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect();
    for window in normalized.windows(3) {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for &c in window {
            h ^= c as u64;
            h = h.wrapping_mul(0x100_0000_01b3);
        }
        let bucket = (h % dim as u64) as usize;
        let sign = if (h >> 63) & 1 == 0 { 1.0 } else { -1.0 };
        accum[bucket] += sign;
    }
    let norm = accum.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm < 1e-12 {
        let mut v = vec![0f32; dim];
        v[0] = 1.0;
        return v;
    }
    accum.iter().map(|v| (v / norm) as f32).collect()
}

fn leaf(id: &str, label: &str, c: Vec3, half: f64) -> PartNode {
    PartNode {
        part_id: id.to_string(),
        label: label.to_string(),
        centroid3: c,
        aabb: Aabb3::new(
            c - Vec3::new(half, half, half),
            c + Vec3::new(half, half, half),
        ),
        mask_ref: Some(MaskRef {
            path: format!("{id}.mask"),
            index: 0,
        }),
        children: Vec::new(),
    }
}

fn group(id: &str, label: &str, aabb: Aabb3, children: Vec<PartNode>) -> PartNode {
    PartNode {
        part_id: id.to_string(),
        label: label.to_string(),
        centroid3: aabb.center(),
        aabb,
        mask_ref: None,
        children,
    }
}

fn annotated(id: &str, category: &str, dims: Vec3, children: Vec<PartNode>) -> AssetRecord {
    let aabb = Aabb3::new(
        Vec3::new(-dims.x * 0.5, -dims.y * 0.5, 0.0),
        Vec3::new(dims.x * 0.5, dims.y * 0.5, dims.z),
    );
    AssetRecord {
        asset_id: id.to_string(),
        database: Database::Annotated,
        category: category.to_string(),
        dims,
        front_axis: Vec2::new(0.0, 1.0),
        root_part: Some(group(&format!("{id}_root"), category, aabb, children)),
    }
}

/// A nightstand/cabinet with `n` drawers stacked vertically, one handle
/// each, handles centered laterally.
pub fn nightstand_with_vertical_handles(id: &str, n: usize) -> AssetRecord {
    let n = n.max(1);
    let drawer_h = 0.3;
    let dims = Vec3::new(0.5, 0.45, drawer_h * n as f64);
    let mut drawers = Vec::new();
    for k in 0..n {
        let z0 = k as f64 * drawer_h;
        let handle = leaf(
            &format!("{id}_h{k}"),
            "handle",
            Vec3::new(0.0, 0.2, z0 + 0.22),
            0.02,
        );
        drawers.push(group(
            &format!("{id}_d{k}"),
            "drawer",
            Aabb3::new(
                Vec3::new(-0.25, -0.225, z0),
                Vec3::new(0.25, 0.225, z0 + drawer_h),
            ),
            vec![handle],
        ));
    }
    annotated(id, "nightstand", dims, drawers)
}

/// A cabinet with handles in a `rows x cols` grid (rows stack vertically,
/// columns spread laterally), one handle per drawer.
pub fn cabinet_with_grid_handles(id: &str, rows: usize, cols: usize) -> AssetRecord {
    let (rows, cols) = (rows.max(1), cols.max(1));
    let dims = Vec3::new(0.5 * cols as f64, 0.5, 0.5 * rows as f64);
    let mut drawers = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let x = -dims.x * 0.5 + (c as f64 + 0.5) * 0.5;
            let z = (r as f64 + 0.5) * 0.5;
            let k = r * cols + c;
            let handle = leaf(&format!("{id}_h{k}"), "handle", Vec3::new(x, 0.22, z), 0.02);
            drawers.push(group(
                &format!("{id}_d{k}"),
                "drawer",
                Aabb3::new(
                    Vec3::new(x - 0.24, -0.25, z - 0.24),
                    Vec3::new(x + 0.24, 0.25, z + 0.24),
                ),
                vec![handle],
            ));
        }
    }
    annotated(id, "cabinet", dims, drawers)
}

/// A two-door unit with horizontally arranged door handles.
pub fn double_door_asset(id: &str, category: &str, dims: Vec3) -> AssetRecord {
    let mut doors = Vec::new();
    for (k, x) in [(0usize, -0.25 * dims.x), (1, 0.25 * dims.x)] {
        let handle = leaf(
            &format!("{id}_h{k}"),
            "handle",
            Vec3::new(x, dims.y * 0.4, dims.z * 0.55),
            0.02,
        );
        doors.push(group(
            &format!("{id}_door{k}"),
            "door",
            Aabb3::new(
                Vec3::new(x - dims.x * 0.24, -dims.y * 0.5, 0.0),
                Vec3::new(x + dims.x * 0.24, dims.y * 0.5, dims.z),
            ),
            vec![handle],
        ));
    }
    annotated(id, category, dims, doors)
}

/// An oven with `n` burner knobs in a row on the top panel.
pub fn oven_with_knobs(id: &str, n: usize) -> AssetRecord {
    let n = n.max(1);
    let dims = Vec3::new(0.6, 0.6, 0.9);
    let mut knobs = Vec::new();
    for k in 0..n {
        let x = if n == 1 {
            0.0
        } else {
            -0.2 + 0.4 * k as f64 / (n - 1) as f64
        };
        knobs.push(leaf(
            &format!("{id}_k{k}"),
            "knob",
            Vec3::new(x, 0.25, 0.82),
            0.015,
        ));
    }
    let panel = group(
        &format!("{id}_panel"),
        "panel",
        Aabb3::new(Vec3::new(-0.3, 0.2, 0.78), Vec3::new(0.3, 0.3, 0.88)),
        knobs,
    );
    annotated(id, "oven", dims, vec![panel])
}

/// A wall switch with a single functional toggle.
pub fn light_switch_asset(id: &str) -> AssetRecord {
    let dims = Vec3::new(0.1, 0.03, 0.1);
    let toggle = leaf(
        &format!("{id}_s0"),
        "switch",
        Vec3::new(0.0, 0.01, 0.05),
        0.012,
    );
    annotated(id, "light switch", dims, vec![toggle])
}

/// A window with one latch handle.
pub fn window_asset(id: &str) -> AssetRecord {
    let dims = Vec3::new(1.2, 0.1, 1.4);
    let latch = leaf(
        &format!("{id}_h0"),
        "handle",
        Vec3::new(0.0, 0.04, 0.7),
        0.02,
    );
    let frame = group(
        &format!("{id}_frame"),
        "window frame",
        Aabb3::new(Vec3::new(-0.6, -0.05, 0.0), Vec3::new(0.6, 0.05, 1.4)),
        vec![latch],
    );
    annotated(id, "window", dims, vec![frame])
}

/// A door with one handle.
pub fn door_asset(id: &str) -> AssetRecord {
    let dims = Vec3::new(0.9, 0.05, 2.0);
    let handle = leaf(
        &format!("{id}_h0"),
        "handle",
        Vec3::new(0.35, 0.03, 1.0),
        0.02,
    );
    annotated(id, "door", dims, vec![handle])
}

/// A plain unannotated mesh asset.
pub fn plain_asset(id: &str, category: &str, dims: Vec3) -> AssetRecord {
    AssetRecord {
        asset_id: id.to_string(),
        database: Database::Unannotated,
        category: category.to_string(),
        dims,
        front_axis: Vec2::new(0.0, 1.0),
        root_part: None,
    }
}

/// Description strings drive the demo embeddings for annotated assets.
fn annotated_demo_assets() -> Vec<(AssetRecord, &'static str)> {
    vec![
        (
            cabinet_with_grid_handles("cabinet_grid4", 2, 2),
            "a wooden cabinet with four drawers arranged in a two by two grid",
        ),
        (
            nightstand_with_vertical_handles("cabinet_tall3", 3),
            "a tall narrow cabinet with three stacked drawers",
        ),
        (
            double_door_asset("cabinet_wide2", "cabinet", Vec3::new(1.2, 0.5, 0.9)),
            "a wide cabinet with two doors side by side",
        ),
        (
            nightstand_with_vertical_handles("nightstand_2v", 2),
            "a bedside nightstand with two stacked drawers",
        ),
        (
            nightstand_with_vertical_handles("nightstand_1", 1),
            "a small nightstand with a single drawer",
        ),
        (
            oven_with_knobs("oven_1knob", 1),
            "a kitchen oven with one temperature knob",
        ),
        (
            double_door_asset("fridge_2door", "fridge", Vec3::new(0.9, 0.7, 1.8)),
            "a double door fridge refrigerator",
        ),
        (
            double_door_asset("wardrobe_2door", "wardrobe", Vec3::new(1.2, 0.6, 2.0)),
            "a bedroom wardrobe closet with two doors",
        ),
        (
            light_switch_asset("switch_1"),
            "a wall mounted light switch",
        ),
        (window_asset("window_1"), "a window with a latch handle"),
        (door_asset("door_1"), "a wooden room door with a handle"),
    ]
}

fn plain_demo_assets() -> Vec<(AssetRecord, &'static str)> {
    vec![
        (
            plain_asset("bed_1", "bed", Vec3::new(2.0, 1.6, 0.5)),
            "a double bed with pillows",
        ),
        (
            plain_asset("tv_1", "tv", Vec3::new(1.2, 0.1, 0.7)),
            "a flat screen tv television",
        ),
        (
            plain_asset("table_1", "table", Vec3::new(1.2, 0.8, 0.75)),
            "a dining table",
        ),
        (
            plain_asset("sofa_1", "sofa", Vec3::new(2.0, 0.9, 0.8)),
            "a living room sofa couch",
        ),
        (
            plain_asset("lamp_1", "lamp", Vec3::new(0.3, 0.3, 1.5)),
            "a floor lamp",
        ),
        (
            plain_asset("desk_1", "desk", Vec3::new(1.4, 0.7, 0.75)),
            "an office desk",
        ),
        (
            plain_asset("dresser_1", "dresser", Vec3::new(1.2, 0.5, 0.9)),
            "a bedroom dresser",
        ),
        (
            plain_asset("plant_1", "plant", Vec3::new(0.4, 0.4, 1.2)),
            "a potted plant",
        ),
        (
            plain_asset("chair_1", "chair", Vec3::new(0.5, 0.5, 0.9)),
            "a wooden chair",
        ),
        (
            plain_asset("wardrobe_plain", "wardrobe", Vec3::new(1.2, 0.6, 2.0)),
            "a plain wardrobe",
        ),
        (
            plain_asset("door_plain", "door", Vec3::new(0.9, 0.05, 2.0)),
            "a plain door",
        ),
        (
            plain_asset("window_plain", "window", Vec3::new(1.2, 0.1, 1.4)),
            "a plain window",
        ),
    ]
}

/// Paths of a demo dataset on disk.
#[derive(Debug, Clone)]
pub struct DemoDataset {
    pub root: PathBuf,
    pub assets_dir: PathBuf,
    pub annotated_index: PathBuf,
    pub unannotated_index: PathBuf,
    pub labels_path: PathBuf,
    pub cassette_path: PathBuf,
    pub config_path: PathBuf,
    pub prompts_path: PathBuf,
}

/// The three fixture prompts exercised by the examples and the end-to-end
/// tests.
pub const DEMO_PROMPTS: [&str; 3] = [
    "Open the second drawer of the cabinet next to the bed",
    "Open the top left drawer of the cabinet next to the tv",
    "Open the window next to the wardrobe",
];

impl DemoDataset {
    /// Writes assets, indices, label list, prompts and a ready-to-run config
    /// under `root`.
    pub fn write(root: &Path) -> Result<DemoDataset, Box<dyn std::error::Error>> {
        let assets_dir = root.join("assets");
        std::fs::create_dir_all(&assets_dir)?;
        let mut s_index = EmbeddingIndex::new(DEMO_DIM);
        let mut u_index = EmbeddingIndex::new(DEMO_DIM);
        for (record, description) in annotated_demo_assets() {
            let path = assets_dir.join(format!("{}.json", record.asset_id));
            std::fs::write(&path, serde_json::to_string_pretty(&record)?)?;
            let text = hash_embedding(description, DEMO_DIM);
            let image = hash_embedding(&format!("{} {}", record.category, description), DEMO_DIM);
            s_index.insert(&record.asset_id, &text, &image)?;
        }
        for (record, description) in plain_demo_assets() {
            let path = assets_dir.join(format!("{}.json", record.asset_id));
            std::fs::write(&path, serde_json::to_string_pretty(&record)?)?;
            let text = hash_embedding(description, DEMO_DIM);
            let image = hash_embedding(&format!("{} {}", record.category, description), DEMO_DIM);
            u_index.insert(&record.asset_id, &text, &image)?;
        }
        let annotated_index = root.join("s_index.sfei");
        let unannotated_index = root.join("u_index.sfei");
        s_index.write(&annotated_index)?;
        u_index.write(&unannotated_index)?;

        let labels_path = root.join("functional_labels.txt");
        std::fs::write(
            &labels_path,
            crate::parts::DEFAULT_FUNCTIONAL_LABELS.join("\n") + "\n",
        )?;

        let prompts_path = root.join("prompts.txt");
        std::fs::write(&prompts_path, DEMO_PROMPTS.join("\n") + "\n")?;

        let cassette_path = root.join("cassette.json");
        let config_path = root.join("config.toml");
        let config = format!(
            r#"[paths]
assets_dir = "{assets}"
annotated_index = "{s}"
unannotated_index = "{u}"
functional_labels = "{labels}"

# The deterministic fallbacks run with the model off; switch to
# mode = "replay" to exercise the recorded model route.
[llm]
mode = "off"
cassette = "{cassette}"

[room]
width = 5.0
depth = 5.0

[solver]
grid_step = 0.25
time_limit_secs = 10.0

[camera]
n_frames = 24

[annotate]
mode = "synthetic_style"
"#,
            assets = assets_dir.display(),
            s = annotated_index.display(),
            u = unannotated_index.display(),
            labels = labels_path.display(),
            cassette = cassette_path.display(),
        );
        std::fs::write(&config_path, config)?;

        Ok(DemoDataset {
            root: root.to_path_buf(),
            assets_dir,
            annotated_index,
            unannotated_index,
            labels_path,
            cassette_path,
            config_path,
            prompts_path,
        })
    }
}

/// Scripted model: answers every template deterministically by running the
/// engine's own fallback logic and rendering the result in the model output
/// formats (including the flush-left verdict list style). Recording a
/// cassette against it produces replies that agree with the engine by
/// construction.
#[derive(Debug, Default, Clone)]
pub struct ScriptedBackend;

impl ScriptedBackend {
    fn answer_task_parse(&self, prompt: &str) -> String {
        let d = TaskDescription::new(prompt)
            .unwrap_or_else(|_| TaskDescription::new("do nothing").unwrap());
        let parse = crate::task::parse_task_fallback(&d);
        let object_type = match parse.object_type {
            crate::task::ObjectType::Door => "door",
            crate::task::ObjectType::Window => "window",
            crate::task::ObjectType::Other => "other",
        };
        format!(
            "```yaml\nlayout_prompt: {}\ncontext_free_prompt: {}\nobject_name: {}\nobject_type: {}\n```",
            parse.layout_prompt, parse.context_free_prompt, parse.object_name, object_type
        )
    }

    fn answer_requirement(&self, funclist: &str, prompt: &str) -> String {
        let labels: std::collections::BTreeSet<String> = funclist
            .split(',')
            .map(|l| l.trim().to_string())
            .filter(|l| !l.is_empty())
            .collect();
        match crate::requirement::infer_requirement_fallback(prompt, &labels) {
            Ok(req) => format!(
                "object: {}\nobject_part: {}\nobject_requirement_description: The {} should have {} {}(s) to satisfy the prompt.\nobject_requirement: {}",
                req.object_name,
                req.functional_label,
                req.object_name,
                req.n,
                req.functional_label,
                req
            ),
            Err(err) => format!(
                "object: unknown\nobject_part: unknown\nobject_requirement_description: {err}\nobject_requirement: unknown = 0"
            ),
        }
    }

    fn answer_arrangement(&self, objects_yaml: &str, prompt: &str) -> String {
        use crate::arrange::{parse_spatial_query, select_part, Selection, DEFAULT_TIE_EPS};
        use crate::asset::FunctionalElement;

        let mut lines = vec!["```yaml".to_string()];
        let parsed = parse_structured_block(objects_yaml);
        let query = parse_spatial_query(prompt);
        if let (Ok(doc), Ok(query)) = (parsed, query) {
            for object in doc.as_list().unwrap_or(&[]) {
                let Some(asset_id) = object.str_field("id") else {
                    continue;
                };
                let mut elements = Vec::new();
                for part in object.get("parts").and_then(|p| p.as_list()).unwrap_or(&[]) {
                    let (Some(pid), Some(name), Some(centroid)) = (
                        part.str_field("id"),
                        part.str_field("name"),
                        part.str_field("centroid"),
                    ) else {
                        continue;
                    };
                    let coords: Vec<f64> = centroid
                        .trim_matches(|c| c == '[' || c == ']')
                        .split(',')
                        .filter_map(|t| t.trim().parse().ok())
                        .collect();
                    if coords.len() != 2 {
                        continue;
                    }
                    if let Ok(element) = FunctionalElement::new(
                        pid.to_string(),
                        name.to_string(),
                        Vec2::new(coords[0].clamp(0.0, 1.0), coords[1].clamp(0.0, 1.0)),
                    ) {
                        elements.push(element);
                    }
                }
                // The verdict list uses the flush-left field style the
                // template shows.
                match select_part(asset_id, &elements, &query, DEFAULT_TIE_EPS) {
                    Ok(Selection::Chosen(selection)) => {
                        lines.push(format!("- id: {asset_id}"));
                        lines.push(format!("reasoning: \"{}\"", selection.reasoning));
                        lines.push("suitable: true".to_string());
                        lines.push(format!("part_id: {}", selection.part_id));
                    }
                    Ok(Selection::Unsuitable(reason)) => {
                        lines.push(format!("- id: {asset_id}"));
                        lines.push(format!("reasoning: \"{reason}\""));
                        lines.push("suitable: false".to_string());
                        lines.push("part_id: None".to_string());
                    }
                    Err(_) => {
                        lines.push(format!("- id: {asset_id}"));
                        lines.push("reasoning: \"query not understood\"".to_string());
                        lines.push("suitable: false".to_string());
                        lines.push("part_id: None".to_string());
                    }
                }
            }
        }
        lines.push("```".to_string());
        lines.join("\n")
    }

    fn answer_layout_plan(&self, layout: &str, required: &str) -> String {
        let required: Vec<String> = required
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
        let plan = crate::layout::plan_fallback(layout, &required);
        crate::layout::clause::render_plan(&plan)
    }
}

impl Backend for ScriptedBackend {
    fn send(&self, request: &ChatRequest) -> Result<String, LlmError> {
        let get = |key: &str| request.bindings.get(key).cloned().unwrap_or_default();
        let answer = match request.template_id.as_str() {
            "task-parse" => self.answer_task_parse(&get("prompt")),
            "requirement" => self.answer_requirement(&get("funclist"), &get("prompt")),
            "arrangement" => self.answer_arrangement(&get("objects"), &get("prompt")),
            "layout-plan" => self.answer_layout_plan(&get("layout"), &get("objects")),
            other => {
                return Err(LlmError::Transport(format!(
                    "scripted backend has no script for template '{other}'"
                )))
            }
        };
        Ok(answer)
    }
}
