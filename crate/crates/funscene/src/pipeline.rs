//! End-to-end orchestration: parse, retrieve, filter, arrange, solve,
//! export, for one prompt or a batch.
//!
//! Every stage has a deterministic path, so a batch under a fixed master
//! seed and replay cassettes is bit-reproducible. Per-prompt failures are
//! logged and never abort the batch.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::arrange::{self, Selection};
use crate::asset::{AssetError, AssetRecord, MaskSelection};
use crate::config::{Config, ConfigError};
use crate::export::{
    self, assign_instance_ids, build_frame, emit_pointing_samples, line_of_sight_clear,
    orbit_trajectory, part_world_corners, part_world_point, select_frames, write_manifest,
    write_pointing_samples, ExportError, Manifest, ManifestPlacement, ManifestTarget,
    MANIFEST_VERSION, VISIBILITY_APPROXIMATION,
};
use crate::fixture::hash_embedding;
use crate::geom::Vec3;
use crate::index::{
    load_index, retrieve_best, retrieve_candidates, Candidate, EmbeddingIndex, IndexError,
};
use crate::layout::{
    self, plan_fallback, plan_from_layout, render_clause, Clause, ClauseError, LayoutPlan,
    MountKind, ObjectSpec, Room, RoomError, SceneLayout, SolveError, SolveObject,
};
use crate::llm::LlmClient;
use crate::parts::{
    default_functional_labels, functional_elements, load_functional_labels, EnrichmentConfig,
    PartError,
};
use crate::requirement::{
    filter_assets, infer_requirement, infer_requirement_fallback, label_matches, Requirement,
    RequirementError,
};
use crate::task::{
    coherence_warnings, parse_task, parse_task_fallback, ObjectType, TaskDescription, TaskError,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Asset(#[from] AssetError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Task(#[from] TaskError),
    #[error(transparent)]
    Clause(#[from] ClauseError),
    #[error(transparent)]
    Requirement(#[from] RequirementError),
    #[error(transparent)]
    Arrange(#[from] arrange::ArrangeError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Room(#[from] RoomError),
    #[error(transparent)]
    Export(#[from] ExportError),
    #[error(transparent)]
    Part(#[from] PartError),
    #[error("io failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization failure: {0}")]
    Json(#[from] serde_json::Error),
    #[error("no candidate asset above the threshold for '{object}'")]
    NoCandidates { object: String },
    #[error("requirement '{requirement}' filtered out every candidate")]
    RequirementFiltersAll { requirement: String },
    #[error("no candidate satisfies the spatial arrangement")]
    NoSuitableArrangement,
    #[error("no retrieval hit for planned object '{object}'")]
    MissingRetrieval { object: String },
    #[error("query vector file has no entry for '{query}'")]
    QueryVectorMiss { query: String },
    #[error("retrieved asset '{asset_id}' is missing from the metadata directory")]
    UnknownAsset { asset_id: String },
}

/// Loaded engine state shared across prompts.
pub struct Engine {
    pub config: Config,
    pub assets: BTreeMap<String, AssetRecord>,
    pub annotated_index: EmbeddingIndex,
    pub unannotated_index: EmbeddingIndex,
    pub labels: BTreeSet<String>,
    pub enrichment: EnrichmentConfig,
    pub client: Option<LlmClient>,
    query_vectors: Option<EmbeddingIndex>,
}

/// Per-stage wall-clock timings and counters for the run log.
#[derive(Debug, Default, Clone, Serialize, Deserialize)]
pub struct RunLog {
    pub prompt: String,
    pub seed: u64,
    pub stage_ms: Vec<(String, f64)>,
    pub candidate_count: usize,
    pub filtered_count: usize,
    pub suitable_count: usize,
    pub requirement: String,
    pub clause_lines: Vec<String>,
    pub kept_frames: usize,
    pub warnings: Vec<String>,
}

/// Files written for one generated scene.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneArtifacts {
    pub out_dir: PathBuf,
    pub manifest_path: PathBuf,
    pub samples_path: PathBuf,
    pub clause_log_path: PathBuf,
    pub selection_path: PathBuf,
    pub run_log_path: PathBuf,
    pub n_samples: usize,
    pub warnings: Vec<String>,
}

/// Deterministic per-prompt seed from the master seed and prompt index.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update(index.to_le_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is long enough"))
}

impl Engine {
    pub fn from_config(config: Config) -> Result<Engine, PipelineError> {
        let assets = crate::asset::load_asset_dir(&config.paths.assets_dir)?;
        let annotated_index = load_index(&config.paths.annotated_index)?;
        let unannotated_index = load_index(&config.paths.unannotated_index)?;
        let labels = match &config.paths.functional_labels {
            Some(path) => load_functional_labels(path)?,
            None => default_functional_labels(),
        };
        let client = config.build_client()?;
        let query_vectors = match &config.paths.query_vectors {
            Some(path) => Some(load_index(path)?),
            None => None,
        };
        Ok(Engine {
            config,
            assets,
            annotated_index,
            unannotated_index,
            labels,
            enrichment: EnrichmentConfig::default(),
            client,
            query_vectors,
        })
    }

    /// Query text to embedding vectors: precomputed vectors when a query
    /// index is configured, otherwise the deterministic hash featurizer at
    /// the target index's dimension.
    fn embed_query(&self, text: &str, dim: usize) -> Result<(Vec<f32>, Vec<f32>), PipelineError> {
        if let Some(qv) = &self.query_vectors {
            let entry = qv
                .entry_by_id(text)
                .ok_or_else(|| PipelineError::QueryVectorMiss {
                    query: text.to_string(),
                })?;
            return Ok((entry.text.to_vec(), entry.image.to_vec()));
        }
        let v = hash_embedding(text, dim);
        Ok((v.clone(), v))
    }

    fn asset(&self, asset_id: &str) -> Result<&AssetRecord, PipelineError> {
        self.assets
            .get(asset_id)
            .ok_or_else(|| PipelineError::UnknownAsset {
                asset_id: asset_id.to_string(),
            })
    }

    /// Generates one scene. Writes the manifest, clause log, mask selection,
    /// pointing samples and run log into `out_dir`.
    pub fn generate_scene(
        &self,
        d: &TaskDescription,
        seed: u64,
        out_dir: &Path,
    ) -> Result<SceneArtifacts, PipelineError> {
        std::fs::create_dir_all(out_dir)?;
        let mut log = RunLog {
            prompt: d.text().to_string(),
            seed,
            ..RunLog::default()
        };
        let mut stage = Stage::new();

        // Parse the task.
        let (mut parse, mut warnings) = match &self.client {
            Some(client) => parse_task(client, d)?,
            None => {
                let parse = parse_task_fallback(d);
                let warnings = coherence_warnings(d, &parse);
                (parse, warnings)
            }
        };
        stage.lap(&mut log, "parse");
        let contextual = parse.object_name.trim().to_ascii_lowercase();

        // Expand the layout into a plan.
        let required_names = vec![contextual.clone()];
        let mut plan = match &self.client {
            Some(client) => plan_from_layout(client, &parse.layout_prompt, &required_names)?,
            None => plan_fallback(&parse.layout_prompt, &required_names),
        };
        ensure_contextual_object(&mut plan, &contextual, parse.object_type);
        stage.lap(&mut log, "plan");

        // Retrieve the contextual object candidates from the annotated pool.
        let contextual_description = plan
            .objects
            .iter()
            .find(|o| o.name == contextual)
            .map(|o| o.description.clone())
            .unwrap_or_else(|| format!("a {contextual}"));
        let (qt, qi) = self.embed_query(&contextual_description, self.annotated_index.dim())?;
        let candidates = retrieve_candidates(
            &self.annotated_index,
            &qt,
            &qi,
            self.config.retrieval.threshold,
            self.config.retrieval.text_weight,
        )?;
        log.candidate_count = candidates.len();
        if candidates.is_empty() {
            return Err(PipelineError::NoCandidates { object: contextual });
        }
        stage.lap(&mut log, "retrieve");

        // Functional elements and the requirement filter.
        let mut elements_by_asset = BTreeMap::new();
        let mut funclist: BTreeSet<String> = BTreeSet::new();
        for candidate in &candidates {
            let record = self.asset(&candidate.asset_id)?;
            let elements = functional_elements(record, &self.labels, &self.enrichment)?;
            for element in &elements {
                if let Some(part) = record.part(&element.part_id) {
                    funclist.insert(part.label.clone());
                }
                funclist.insert(element.enriched_label.clone());
            }
            elements_by_asset.insert(candidate.asset_id.clone(), elements);
        }
        if funclist.is_empty() {
            return Err(PipelineError::RequirementFiltersAll {
                requirement: "no functional elements among candidates".to_string(),
            });
        }
        let requirement = match &self.client {
            Some(client) => infer_requirement(client, &parse.context_free_prompt, &funclist)?,
            None => infer_requirement_fallback(&parse.context_free_prompt, &funclist)?,
        };
        parse.functional_label = Some(requirement.functional_label.clone());
        log.requirement = requirement.to_string();
        let kept = filter_assets(
            &candidates,
            &self.assets,
            &requirement,
            &self.labels,
            &self.enrichment,
        )?;
        log.filtered_count = kept.len();
        if kept.is_empty() {
            return Err(PipelineError::RequirementFiltersAll {
                requirement: requirement.to_string(),
            });
        }
        stage.lap(&mut log, "filter");

        // Arrangement: pick the matching part per candidate, then one
        // candidate uniformly at random.
        let selections =
            self.arrange_candidates(&kept, &elements_by_asset, &requirement, &parse)?;
        log.suitable_count = selections.len();
        if selections.is_empty() {
            return Err(PipelineError::NoSuitableArrangement);
        }
        let chosen = arrange::choose_final(&selections, derive_seed(seed, 0x00C0_FFEE))?;
        stage.lap(&mut log, "arrange");

        // Solve the layout.
        let room = Room::new(self.config.room.width, self.config.room.depth, Vec::new())?;
        let (required, extras, dims_by_handle, clause_lines) =
            self.build_solve_objects(&plan, &contextual, &chosen, &mut warnings)?;
        log.clause_lines = clause_lines.clone();
        let layout = layout::solve(&room, &required, &extras, &self.config.solve_params(seed))?;
        stage.lap(&mut log, "solve");

        // Export annotations.
        let (manifest, kept_frames, samples) =
            self.export_scene(d, &parse, &chosen, &layout, &dims_by_handle, seed)?;
        log.kept_frames = kept_frames;
        stage.lap(&mut log, "export");

        let manifest_path = out_dir.join("manifest.json");
        write_manifest(&manifest_path, &manifest)?;
        let samples_path = out_dir.join("pointing_samples.jsonl");
        write_pointing_samples(&samples_path, &samples)?;
        let clause_log_path = out_dir.join("clauses.txt");
        std::fs::write(&clause_log_path, clause_lines.join("\n") + "\n")?;
        let selection_path = out_dir.join("mask_selection.json");
        let selection_doc = serde_json::json!({
            "requirement": {
                "object": requirement.object_name,
                "functional_label": requirement.functional_label,
                "rendered": requirement.to_string(),
            },
            "selection": chosen,
            "suitable_candidates": selections,
        });
        std::fs::write(
            &selection_path,
            serde_json::to_string_pretty(&selection_doc)?,
        )?;

        log.warnings = warnings.clone();
        let run_log_path = out_dir.join("run_log.json");
        std::fs::write(&run_log_path, serde_json::to_string_pretty(&log)?)?;

        Ok(SceneArtifacts {
            out_dir: out_dir.to_path_buf(),
            manifest_path,
            samples_path,
            clause_log_path,
            selection_path,
            run_log_path,
            n_samples: samples.len(),
            warnings,
        })
    }

    fn arrange_candidates(
        &self,
        kept: &[Candidate],
        elements_by_asset: &BTreeMap<String, Vec<crate::asset::FunctionalElement>>,
        requirement: &Requirement,
        parse: &crate::task::TaskParse,
    ) -> Result<Vec<MaskSelection>, PipelineError> {
        // Name filter first, position second.
        let listing: Vec<(String, Vec<crate::asset::FunctionalElement>)> = kept
            .iter()
            .map(|candidate| {
                let elements = elements_by_asset
                    .get(&candidate.asset_id)
                    .cloned()
                    .unwrap_or_default()
                    .into_iter()
                    .filter(|element| {
                        let plain = self
                            .assets
                            .get(&candidate.asset_id)
                            .and_then(|a| a.part(&element.part_id))
                            .map(|p| p.label.clone())
                            .unwrap_or_default();
                        label_matches(
                            &plain,
                            &element.enriched_label,
                            &requirement.functional_label,
                        )
                    })
                    .collect();
                (candidate.asset_id.clone(), elements)
            })
            .collect();

        let use_llm = self.config.arrangement.mode == "llm" && self.client.is_some();
        let mut selections = Vec::new();
        if use_llm {
            let verdicts = arrange::select_parts_llm(
                self.client.as_ref().expect("checked above"),
                &parse.object_name,
                &requirement.functional_label,
                &parse.context_free_prompt,
                &listing,
            )?;
            for verdict in verdicts {
                if let (true, Some(part_id)) = (verdict.suitable, verdict.part_id) {
                    selections.push(MaskSelection {
                        asset_id: verdict.asset_id,
                        part_id,
                        reasoning: verdict.reasoning,
                    });
                }
            }
        } else {
            let query = arrange::parse_spatial_query(&parse.context_free_prompt)?;
            for (asset_id, elements) in &listing {
                if let Selection::Chosen(selection) = arrange::select_part(
                    asset_id,
                    elements,
                    &query,
                    self.config.arrangement.tie_eps,
                )? {
                    selections.push(selection);
                }
            }
        }
        // Referential integrity of every selection.
        for selection in &selections {
            selection.validate(self.asset(&selection.asset_id)?)?;
        }
        Ok(selections)
    }

    /// Turns the plan into solver inputs. The contextual object gets the
    /// chosen asset's dims; other objects retrieve their best match from
    /// the unannotated pool. Extras that fail retrieval are dropped with a
    /// warning; required objects must resolve.
    #[allow(clippy::type_complexity)]
    fn build_solve_objects(
        &self,
        plan: &LayoutPlan,
        contextual: &str,
        chosen: &MaskSelection,
        warnings: &mut Vec<String>,
    ) -> Result<
        (
            Vec<SolveObject>,
            Vec<SolveObject>,
            BTreeMap<String, ObjectHandle>,
            Vec<String>,
        ),
        PipelineError,
    > {
        let mut required = Vec::new();
        let mut extras = Vec::new();
        let mut dims_by_handle = BTreeMap::new();
        let mut clause_lines = Vec::new();
        for clause in plan.clauses.all() {
            clause_lines.push(render_clause(clause));
        }
        for planned in &plan.objects {
            let asset_id = if planned.name == contextual {
                chosen.asset_id.clone()
            } else {
                let (qt, qi) =
                    self.embed_query(&planned.description, self.unannotated_index.dim())?;
                match retrieve_best(
                    &self.unannotated_index,
                    &qt,
                    &qi,
                    self.config.retrieval.text_weight,
                ) {
                    Ok(best) => best.asset_id,
                    Err(IndexError::EmptyIndex) if !planned.required => {
                        warnings.push(format!(
                            "no retrieval hit for extra '{}'; dropped",
                            planned.name
                        ));
                        continue;
                    }
                    Err(err) => {
                        if planned.required {
                            return Err(PipelineError::MissingRetrieval {
                                object: planned.name.clone(),
                            });
                        }
                        warnings.push(format!(
                            "retrieval failed for extra '{}' ({err}); dropped",
                            planned.name
                        ));
                        continue;
                    }
                }
            };
            let record = self.asset(&asset_id)?;
            let mount = if planned.wall_mounted {
                MountKind::Wall {
                    height: mount_height_for(&planned.name),
                }
            } else {
                MountKind::Floor
            };
            let spec = ObjectSpec {
                handle: planned.name.clone(),
                dims: record.dims,
                front_axis: record.front_axis,
                mount,
            };
            let clauses: Vec<Clause> = plan
                .clauses
                .all()
                .filter(|c| c.subject == planned.name)
                .cloned()
                .collect();
            dims_by_handle.insert(
                planned.name.clone(),
                ObjectHandle {
                    asset_id,
                    category: record.category.clone(),
                    dims: record.dims,
                },
            );
            if planned.required {
                // Hard clauses stay hard in pass 1; soft ones score only.
                required.push(SolveObject::new(spec, clauses));
            } else {
                let soft_only: Vec<Clause> = clauses
                    .into_iter()
                    .filter(|c| c.hardness == layout::Hardness::Soft)
                    .collect();
                extras.push(SolveObject::new(spec, soft_only));
            }
        }
        Ok((required, extras, dims_by_handle, clause_lines))
    }

    fn export_scene(
        &self,
        d: &TaskDescription,
        parse: &crate::task::TaskParse,
        chosen: &MaskSelection,
        layout: &SceneLayout,
        dims_by_handle: &BTreeMap<String, ObjectHandle>,
        seed: u64,
    ) -> Result<(Manifest, usize, Vec<export::PointingSample>), PipelineError> {
        let contextual = parse.object_name.trim().to_ascii_lowercase();
        let record = self.asset(&chosen.asset_id)?;
        let part = record
            .part(&chosen.part_id)
            .ok_or_else(|| PipelineError::UnknownAsset {
                asset_id: format!("{}#{}", chosen.asset_id, chosen.part_id),
            })?;
        let placement = layout
            .placement(&contextual)
            .expect("contextual object is required and placed")
            .clone();
        let centroid_world = part_world_point(&placement, part.centroid3);
        let sub_parts = part.leaves();
        let sub_centroids: Vec<Vec3> = sub_parts
            .iter()
            .map(|p| part_world_point(&placement, p.centroid3))
            .collect();
        let corners_world = part_world_corners(&placement, &part.aabb);

        let intrinsics = self.config.intrinsics();
        // Cameras may pass above short furniture but never stand inside
        // anything that reaches their height.
        let camera_obstacles: Vec<export::Obstacle> = layout
            .placements
            .iter()
            .map(|p| {
                let height = dims_by_handle
                    .get(&p.handle)
                    .map(|h| h.dims.z)
                    .unwrap_or(1.0);
                (p.footprint, p.mount_height + height)
            })
            .collect();
        let cameras = orbit_trajectory(
            &layout.room,
            &camera_obstacles,
            centroid_world,
            intrinsics,
            &self.config.orbit_params(derive_seed(seed, 0x0CA3)),
        )?;

        let obstacles: Vec<(&layout::Placement, f64)> = layout
            .placements
            .iter()
            .filter(|p| p.handle != contextual)
            .map(|p| {
                let height = dims_by_handle
                    .get(&p.handle)
                    .map(|h| h.dims.z)
                    .unwrap_or(1.0);
                (p, height)
            })
            .collect();

        let frames: Vec<export::AnnotationFrame> = cameras
            .iter()
            .enumerate()
            .map(|(k, camera)| {
                let occluded = !line_of_sight_clear(camera.position, centroid_world, &obstacles);
                build_frame(
                    k as u32,
                    *camera,
                    &chosen.part_id,
                    centroid_world,
                    &sub_centroids,
                    &corners_world,
                    occluded,
                )
            })
            .collect();
        let mode = self.config.filter_mode()?;
        let kept = select_frames(
            &frames,
            self.config.annotate.stride,
            self.config.annotate.top_k,
            mode,
        );
        let samples = emit_pointing_samples(&kept, d.text());

        let instance_ids = assign_instance_ids(layout);
        let placements: Vec<ManifestPlacement> = layout
            .placements
            .iter()
            .map(|p| {
                let handle = dims_by_handle.get(&p.handle);
                ManifestPlacement {
                    instance_id: instance_ids[&p.handle],
                    asset_id: handle.map(|h| h.asset_id.clone()).unwrap_or_default(),
                    category: handle.map(|h| h.category.clone()).unwrap_or_default(),
                    dims: handle.map(|h| h.dims).unwrap_or(Vec3::new(1.0, 1.0, 1.0)),
                    placement: p.clone(),
                }
            })
            .collect();
        let enriched_label = {
            let elements = functional_elements(record, &self.labels, &self.enrichment)?;
            elements
                .iter()
                .find(|e| e.part_id == chosen.part_id)
                .map(|e| e.enriched_label.clone())
                .unwrap_or_else(|| part.label.clone())
        };
        let manifest = Manifest {
            version: MANIFEST_VERSION,
            task: d.text().to_string(),
            context_free_prompt: parse.context_free_prompt.clone(),
            seed,
            room: layout.room.clone(),
            placements,
            required: layout.required.clone(),
            target: Some(ManifestTarget {
                asset_id: chosen.asset_id.clone(),
                part_id: chosen.part_id.clone(),
                enriched_label,
                reasoning: chosen.reasoning.clone(),
                world_centroid: centroid_world,
                sub_part_ids: sub_parts.iter().map(|p| p.part_id.clone()).collect(),
            }),
            trajectory: cameras,
            approximations: vec![VISIBILITY_APPROXIMATION.to_string()],
        };
        Ok((manifest, kept.len(), samples))
    }
}

/// Asset identity and dims attached to a placed handle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObjectHandle {
    pub asset_id: String,
    pub category: String,
    pub dims: Vec3,
}

/// Default mount heights by object kind, meters above the floor.
fn mount_height_for(name: &str) -> f64 {
    let lower = name.to_ascii_lowercase();
    if lower.contains("door") {
        0.0
    } else if lower.contains("window") {
        0.9
    } else {
        // Switches, sockets and other small wall fixtures.
        1.2
    }
}

/// Guarantees the contextual object exists in the plan as a required entry.
fn ensure_contextual_object(plan: &mut LayoutPlan, contextual: &str, object_type: ObjectType) {
    let wall_mounted = matches!(object_type, ObjectType::Door | ObjectType::Window)
        || layout::is_wall_mounted_name(contextual);
    match plan.objects.iter_mut().find(|o| o.name == contextual) {
        Some(object) => {
            object.required = true;
            object.wall_mounted = object.wall_mounted || wall_mounted;
        }
        None => plan.objects.insert(
            0,
            layout::PlannedObject {
                name: contextual.to_string(),
                description: format!("a {contextual}"),
                required: true,
                wall_mounted,
            },
        ),
    }
}

struct Stage {
    last: Instant,
}

impl Stage {
    fn new() -> Stage {
        Stage {
            last: Instant::now(),
        }
    }

    fn lap(&mut self, log: &mut RunLog, name: &str) {
        let now = Instant::now();
        log.stage_ms.push((
            name.to_string(),
            now.duration_since(self.last).as_secs_f64() * 1e3,
        ));
        self.last = now;
    }
}

/// Outcome of one prompt in a batch run.
#[derive(Debug)]
pub enum PromptOutcome {
    Success(SceneArtifacts),
    Failure {
        prompt: String,
        error: PipelineError,
    },
}

/// Runs a batch of prompts with per-prompt seeds derived from the master
/// seed. Failures are recorded, not fatal. `jobs` > 1 runs prompts in
/// parallel; artifacts remain deterministic because every prompt owns its
/// seed and output directory.
pub fn run_batch(
    engine: &Engine,
    prompts: &[String],
    master_seed: u64,
    out_dir: &Path,
    jobs: usize,
) -> Result<Vec<PromptOutcome>, PipelineError> {
    std::fs::create_dir_all(out_dir)?;
    let run_one = |(index, prompt): (usize, &String)| -> PromptOutcome {
        let prompt_dir = out_dir.join(format!("prompt_{index:03}"));
        let seed = derive_seed(master_seed, index as u64);
        let result = TaskDescription::new(prompt)
            .map_err(PipelineError::from)
            .and_then(|d| engine.generate_scene(&d, seed, &prompt_dir));
        match result {
            Ok(artifacts) => PromptOutcome::Success(artifacts),
            Err(error) => {
                log::warn!("prompt {index} failed: {error}");
                PromptOutcome::Failure {
                    prompt: prompt.clone(),
                    error,
                }
            }
        }
    };
    let outcomes: Vec<PromptOutcome> = if jobs > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| PipelineError::Io(std::io::Error::other(e)))?;
        pool.install(|| {
            prompts
                .par_iter()
                .enumerate()
                .map(|(i, p)| run_one((i, p)))
                .collect()
        })
    } else {
        prompts.iter().enumerate().map(run_one).collect()
    };
    Ok(outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture::{DemoDataset, ScriptedBackend, DEMO_PROMPTS};

    fn engine_with_scripted_llm(root: &Path) -> Engine {
        let dataset = DemoDataset::write(root).unwrap();
        let mut config = Config::load(&dataset.config_path).unwrap();
        config.llm.mode = "off".to_string();
        let mut engine = Engine::from_config(config).unwrap();
        engine.client = Some(LlmClient::live(Box::new(ScriptedBackend), 1, 2));
        engine
    }

    #[test]
    fn fallback_pipeline_generates_a_scene() {
        let dir = tempfile::tempdir().unwrap();
        let dataset = DemoDataset::write(dir.path()).unwrap();
        let mut config = Config::load(&dataset.config_path).unwrap();
        config.llm.mode = "off".to_string();
        let engine = Engine::from_config(config).unwrap();
        let d = TaskDescription::new(DEMO_PROMPTS[0]).unwrap();
        let out = dir.path().join("out");
        let artifacts = engine.generate_scene(&d, 7, &out).unwrap();
        assert!(artifacts.manifest_path.exists());
        assert!(artifacts.samples_path.exists());
        let manifest = crate::export::read_manifest(&artifacts.manifest_path).unwrap();
        let target = manifest.target.expect("generated scenes carry a target");
        assert!(!target.part_id.is_empty());
        assert!(manifest.placements.len() >= 2, "cabinet and bed at least");
    }

    #[test]
    fn scripted_llm_pipeline_matches_engine_expectations() {
        let dir = tempfile::tempdir().unwrap();
        let engine = engine_with_scripted_llm(dir.path());
        let d = TaskDescription::new(DEMO_PROMPTS[1]).unwrap();
        let out = dir.path().join("out");
        let artifacts = engine.generate_scene(&d, 3, &out).unwrap();
        let manifest = crate::export::read_manifest(&artifacts.manifest_path).unwrap();
        // "top left drawer" requires the 2x2 grid cabinet.
        assert_eq!(manifest.target.unwrap().asset_id, "cabinet_grid4");
    }

    #[test]
    fn different_seeds_vary_placements_but_not_the_required_set() {
        let dir = tempfile::tempdir().unwrap();
        let dataset = DemoDataset::write(dir.path()).unwrap();
        let mut config = Config::load(&dataset.config_path).unwrap();
        config.llm.mode = "off".to_string();
        let engine = Engine::from_config(config).unwrap();
        let d = TaskDescription::new(DEMO_PROMPTS[0]).unwrap();
        let a = engine.generate_scene(&d, 1, &dir.path().join("a")).unwrap();
        let b = engine.generate_scene(&d, 2, &dir.path().join("b")).unwrap();
        let ma = crate::export::read_manifest(&a.manifest_path).unwrap();
        let mb = crate::export::read_manifest(&b.manifest_path).unwrap();
        assert_eq!(ma.required, mb.required);
        let centers = |m: &crate::export::Manifest| -> Vec<(String, f64, f64)> {
            m.placements
                .iter()
                .map(|p| {
                    (
                        p.placement.handle.clone(),
                        p.placement.center.x,
                        p.placement.center.y,
                    )
                })
                .collect()
        };
        assert_ne!(
            centers(&ma),
            centers(&mb),
            "seeds 1 and 2 landed identically"
        );

        // Look-at consistency: the target centroid projects inside the
        // image for every orbit camera.
        let target = ma.target.unwrap();
        for camera in &ma.trajectory {
            let pixel = crate::export::project(target.world_centroid, camera)
                .pixel()
                .expect("target in front of every orbit camera");
            assert!(camera.intrinsics.contains_pixel(pixel));
        }
    }

    #[test]
    fn unsatisfiable_requirement_fails_cleanly() {
        let dir = tempfile::tempdir().unwrap();
        let dataset = DemoDataset::write(dir.path()).unwrap();
        let mut config = Config::load(&dataset.config_path).unwrap();
        config.llm.mode = "off".to_string();
        let engine = Engine::from_config(config).unwrap();
        // No demo asset has nine drawers.
        let d = TaskDescription::new("Open the ninth drawer of the cabinet").unwrap();
        let out = dir.path().join("out");
        let err = engine.generate_scene(&d, 1, &out).unwrap_err();
        assert!(matches!(err, PipelineError::RequirementFiltersAll { .. }));
    }

    #[test]
    fn derive_seed_is_stable_and_spread() {
        assert_eq!(derive_seed(42, 0), derive_seed(42, 0));
        assert_ne!(derive_seed(42, 0), derive_seed(42, 1));
        assert_ne!(derive_seed(42, 0), derive_seed(43, 0));
    }

    #[test]
    fn batch_continues_past_failures() {
        let dir = tempfile::tempdir().unwrap();
        let dataset = DemoDataset::write(dir.path()).unwrap();
        let mut config = Config::load(&dataset.config_path).unwrap();
        config.llm.mode = "off".to_string();
        let engine = Engine::from_config(config).unwrap();
        let prompts = vec![
            "Open the ninth drawer of the cabinet".to_string(),
            DEMO_PROMPTS[0].to_string(),
        ];
        let outcomes = run_batch(&engine, &prompts, 5, &dir.path().join("batch"), 1).unwrap();
        assert!(matches!(outcomes[0], PromptOutcome::Failure { .. }));
        assert!(matches!(outcomes[1], PromptOutcome::Success(_)));
    }
}
