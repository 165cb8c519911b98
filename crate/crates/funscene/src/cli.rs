//! Command implementations behind the `funscene` binary.
//!
//! Exit codes: 0 on success (for `generate`: at least one scene succeeded),
//! 1 on runtime failure (every prompt failed, infeasible solve, violations
//! found), 2 on configuration or usage errors.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use crate::asset::validate_asset;
use crate::config::{parse_filter_mode, Config};
use crate::export::{
    build_frame, emit_pointing_samples, line_of_sight_clear, part_world_corners, part_world_point,
    read_manifest, select_frames, write_manifest, write_pointing_samples, Manifest,
    ManifestPlacement, MANIFEST_VERSION,
};
use crate::fixture::hash_embedding;
use crate::geom::Vec3;
use crate::index::{import_tabular, load_index, retrieve_candidates};
use crate::layout::{
    check_solution, clauses_from_lines, parse_clause_line, solve, Clause, Hardness, MountKind,
    ObjectSpec, Room, SceneLayout, SolveObject, SolveParams,
};
use crate::pipeline::{run_batch, Engine, PromptOutcome};

pub const EXIT_SUCCESS: u8 = 0;
pub const EXIT_RUNTIME: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(
    name = "funscene",
    about = "Task-driven indoor scene synthesis with part-level functional annotations",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate scenes from task prompts: parse, retrieve, filter, arrange,
    /// solve, export.
    Generate(GenerateArgs),
    /// Solve a clause file into a scene layout, or check an existing
    /// manifest against it.
    Solve(SolveArgs),
    /// Query an embedding index.
    Retrieve(RetrieveArgs),
    /// Re-derive pointing samples from a scene manifest.
    Annotate(AnnotateArgs),
    /// Validate every asset metadata file in a directory.
    ValidateAssets(ValidateArgs),
    /// Convert a tabular embedding dump into an index file.
    ImportEmbeddings(ImportArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// A single task prompt; omit when using --prompt-file.
    prompt: Option<String>,
    /// File with one prompt per line.
    #[arg(long)]
    prompt_file: Option<PathBuf>,
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
    /// Prompt-level parallelism.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct SolveArgs {
    /// Clause file: `object <name> WxDxH [wall <height>] [extra]` headers
    /// followed by clause lines.
    clause_file: PathBuf,
    /// Room plan size as WIDTHxDEPTH, meters.
    #[arg(long, default_value = "5x5")]
    room: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.1)]
    grid_step: f64,
    #[arg(long, default_value_t = 10.0)]
    time_limit_secs: f64,
    /// Write the solved layout manifest here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Check an existing manifest against the clause file instead of
    /// solving.
    #[arg(long)]
    check: Option<PathBuf>,
}

#[derive(Args)]
struct RetrieveArgs {
    query: String,
    #[arg(long)]
    index: PathBuf,
    /// Print only the best k hits.
    #[arg(long)]
    top_k: Option<usize>,
    /// Keep hits scoring strictly above this.
    #[arg(long, default_value_t = -1.0)]
    threshold: f64,
    #[arg(long, default_value_t = 0.5)]
    text_weight: f64,
}

#[derive(Args)]
struct AnnotateArgs {
    manifest: PathBuf,
    #[arg(long)]
    config: PathBuf,
    /// real_style or synthetic_style; defaults to the config value.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    stride: Option<u32>,
    #[arg(long)]
    top_k: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    dir: PathBuf,
}

#[derive(Args)]
struct ImportArgs {
    input: PathBuf,
    output: PathBuf,
}

/// Entry point used by the binary.
pub fn run() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Retrieve(args) => cmd_retrieve(args),
        Command::Annotate(args) => cmd_annotate(args),
        Command::ValidateAssets(args) => cmd_validate_assets(args),
        Command::ImportEmbeddings(args) => cmd_import_embeddings(args),
    };
    ExitCode::from(code)
}

fn cmd_generate(args: GenerateArgs) -> u8 {
    let prompts: Vec<String> = match (&args.prompt, &args.prompt_file) {
        (Some(p), None) => vec![p.clone()],
        (None, Some(path)) => match std::fs::read_to_string(path) {
            Ok(raw) => raw
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(|l| l.to_string())
                .collect(),
            Err(err) => {
                eprintln!("error: cannot read prompt file: {err}");
                return EXIT_CONFIG;
            }
        },
        _ => {
            eprintln!("error: provide exactly one of PROMPT or --prompt-file");
            return EXIT_CONFIG;
        }
    };
    if prompts.is_empty() {
        eprintln!("error: no prompts to run");
        return EXIT_CONFIG;
    }
    let config = match Config::load(&args.config) {
        Ok(config) => config,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_CONFIG;
        }
    };
    let engine = match Engine::from_config(config) {
        Ok(engine) => engine,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_CONFIG;
        }
    };
    let outcomes = match run_batch(
        &engine,
        &prompts,
        args.seed,
        &args.out_dir,
        args.jobs.max(1),
    ) {
        Ok(outcomes) => outcomes,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_RUNTIME;
        }
    };
    let mut successes = 0usize;
    for (index, outcome) in outcomes.iter().enumerate() {
        match outcome {
            PromptOutcome::Success(artifacts) => {
                successes += 1;
                println!(
                    "prompt {index:03}: ok ({} pointing samples) -> {}",
                    artifacts.n_samples,
                    artifacts.out_dir.display()
                );
                for warning in &artifacts.warnings {
                    println!("prompt {index:03}: warning: {warning}");
                }
            }
            PromptOutcome::Failure { prompt, error } => {
                println!("prompt {index:03}: FAILED ({error}): {prompt}");
            }
        }
    }
    println!("{successes}/{} scenes generated", outcomes.len());
    if successes > 0 {
        EXIT_SUCCESS
    } else {
        EXIT_RUNTIME
    }
}

/// One `object` header line of a clause file.
struct DeclaredObject {
    spec: ObjectSpec,
    extra: bool,
}

fn parse_object_line(line: &str) -> Result<DeclaredObject, String> {
    // object <name> WxDxH [wall <height>] [extra]
    let mut tokens = line.split_whitespace();
    let _keyword = tokens.next();
    let name = tokens.next().ok_or("object line needs a name")?;
    let dims_raw = tokens.next().ok_or("object line needs WxDxH dims")?;
    let dims: Vec<f64> = dims_raw
        .split('x')
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| format!("bad dims '{dims_raw}'"))
        })
        .collect::<Result<_, _>>()?;
    if dims.len() != 3 {
        return Err(format!("dims '{dims_raw}' must be WxDxH"));
    }
    let mut mount = MountKind::Floor;
    let mut extra = false;
    let mut rest = tokens.peekable();
    while let Some(token) = rest.next() {
        match token {
            "wall" => {
                let height: f64 = rest
                    .next()
                    .ok_or("wall needs a height")?
                    .parse()
                    .map_err(|_| "bad wall height".to_string())?;
                mount = MountKind::Wall { height };
            }
            "extra" => extra = true,
            other => return Err(format!("unknown object token '{other}'")),
        }
    }
    Ok(DeclaredObject {
        spec: ObjectSpec {
            handle: name.to_string(),
            dims: Vec3::new(dims[0], dims[1], dims[2]),
            front_axis: crate::geom::Vec2::new(0.0, 1.0),
            mount,
        },
        extra,
    })
}

fn parse_room_arg(raw: &str) -> Result<Room, String> {
    let parts: Vec<f64> = raw
        .split('x')
        .map(|t| t.parse::<f64>().map_err(|_| format!("bad room '{raw}'")))
        .collect::<Result<_, _>>()?;
    if parts.len() != 2 {
        return Err(format!("room '{raw}' must be WIDTHxDEPTH"));
    }
    Room::new(parts[0], parts[1], Vec::new()).map_err(|e| e.to_string())
}

/// Shared loader for `solve`: declared objects plus validated clauses.
#[allow(clippy::type_complexity)]
fn load_clause_file(path: &Path) -> Result<(Vec<DeclaredObject>, Vec<Clause>), String> {
    let raw = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let mut objects: Vec<DeclaredObject> = Vec::new();
    let mut clause_lines: Vec<String> = Vec::new();
    for line in raw.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.starts_with("object ") {
            objects.push(parse_object_line(line)?);
        } else {
            clause_lines.push(line.to_string());
        }
    }
    // Subjects and references without a declaration default to a 1 m cube.
    let mut known: std::collections::BTreeSet<String> =
        objects.iter().map(|o| o.spec.handle.clone()).collect();
    for line in &clause_lines {
        let clause = parse_clause_line(line).map_err(|e| e.to_string())?;
        for name in std::iter::once(clause.subject.as_str()).chain(clause.kind.reference()) {
            if known.insert(name.to_string()) {
                objects.push(DeclaredObject {
                    spec: ObjectSpec::floor(name, Vec3::new(1.0, 1.0, 1.0)),
                    extra: false,
                });
            }
        }
    }
    let clauses = clauses_from_lines(&clause_lines, &known).map_err(|e| e.to_string())?;
    let mut all = clauses.hard;
    all.extend(clauses.soft);
    Ok((objects, all))
}

fn layout_manifest(layout: &SceneLayout, objects: &[DeclaredObject], seed: u64) -> Manifest {
    let ids = crate::export::assign_instance_ids(layout);
    let dims: BTreeMap<&str, Vec3> = objects
        .iter()
        .map(|o| (o.spec.handle.as_str(), o.spec.dims))
        .collect();
    Manifest {
        version: MANIFEST_VERSION,
        task: String::new(),
        context_free_prompt: String::new(),
        seed,
        room: layout.room.clone(),
        placements: layout
            .placements
            .iter()
            .map(|p| ManifestPlacement {
                instance_id: ids[&p.handle],
                asset_id: p.handle.clone(),
                category: p.handle.clone(),
                dims: dims
                    .get(p.handle.as_str())
                    .copied()
                    .unwrap_or(Vec3::new(1.0, 1.0, 1.0)),
                placement: p.clone(),
            })
            .collect(),
        required: layout.required.clone(),
        target: None,
        trajectory: Vec::new(),
        approximations: Vec::new(),
    }
}

fn cmd_solve(args: SolveArgs) -> u8 {
    let (objects, clauses) = match load_clause_file(&args.clause_file) {
        Ok(loaded) => loaded,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_CONFIG;
        }
    };
    let room = match parse_room_arg(&args.room) {
        Ok(room) => room,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_CONFIG;
        }
    };

    if let Some(manifest_path) = &args.check {
        // Checker mode: re-validate an existing manifest.
        let manifest = match read_manifest(manifest_path) {
            Ok(m) => m,
            Err(err) => {
                eprintln!("error: {err}");
                return EXIT_CONFIG;
            }
        };
        let layout = SceneLayout {
            room: manifest.room.clone(),
            placements: manifest
                .placements
                .iter()
                .map(|p| p.placement.clone())
                .collect(),
            required: manifest.required.clone(),
            score: 0.0,
        };
        let specs: BTreeMap<String, ObjectSpec> = manifest
            .placements
            .iter()
            .map(|p| {
                (
                    p.placement.handle.clone(),
                    ObjectSpec {
                        handle: p.placement.handle.clone(),
                        dims: p.dims,
                        front_axis: crate::geom::Vec2::new(0.0, 1.0),
                        mount: match p.placement.mounted {
                            Some(_) => MountKind::Wall {
                                height: p.placement.mount_height,
                            },
                            None => MountKind::Floor,
                        },
                    },
                )
            })
            .collect();
        let violations = check_solution(&layout, &clauses, &specs, &Default::default());
        if violations.is_empty() {
            println!("manifest satisfies all hard clauses; no violations");
            return EXIT_SUCCESS;
        }
        for violation in &violations {
            println!("violation: {violation}");
        }
        return EXIT_RUNTIME;
    }

    let params = SolveParams {
        grid_step: args.grid_step,
        time_limit: Duration::from_secs_f64(args.time_limit_secs),
        seed: args.seed,
        ..SolveParams::default()
    };
    let mut required = Vec::new();
    let mut extras = Vec::new();
    for declared in &objects {
        let own: Vec<Clause> = clauses
            .iter()
            .filter(|c| c.subject == declared.spec.handle)
            .cloned()
            .collect();
        let solve_object = SolveObject::new(declared.spec.clone(), own);
        if declared.extra {
            extras.push(solve_object);
        } else {
            required.push(solve_object);
        }
    }
    // Extras keep only their soft clauses.
    for extra in &mut extras {
        extra.clauses.retain(|c| c.hardness == Hardness::Soft);
    }
    match solve(&room, &required, &extras, &params) {
        Ok(layout) => {
            println!(
                "solved: {} placements, score {:.2}",
                layout.placements.len(),
                layout.score
            );
            for placement in &layout.placements {
                println!(
                    "  {} at ({:.2}, {:.2}) yaw {}",
                    placement.handle,
                    placement.center.x,
                    placement.center.y,
                    placement.yaw.degrees()
                );
            }
            if let Some(out) = &args.out {
                let manifest = layout_manifest(&layout, &objects, args.seed);
                if let Err(err) = write_manifest(out, &manifest) {
                    eprintln!("error: {err}");
                    return EXIT_RUNTIME;
                }
                println!("manifest written to {}", out.display());
            }
            EXIT_SUCCESS
        }
        Err(err) => {
            println!("infeasible: {err}");
            EXIT_RUNTIME
        }
    }
}

fn cmd_retrieve(args: RetrieveArgs) -> u8 {
    let index = match load_index(&args.index) {
        Ok(index) => index,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_CONFIG;
        }
    };
    if index.is_empty() {
        eprintln!("error: index is empty");
        return EXIT_RUNTIME;
    }
    let query = hash_embedding(&args.query, index.dim());
    let candidates =
        match retrieve_candidates(&index, &query, &query, args.threshold, args.text_weight) {
            Ok(candidates) => candidates,
            Err(err) => {
                eprintln!("error: {err}");
                return EXIT_RUNTIME;
            }
        };
    let shown = match args.top_k {
        Some(k) => &candidates[..k.min(candidates.len())],
        None => &candidates[..],
    };
    println!("{:<28} score", "asset_id");
    for candidate in shown {
        println!("{:<28} {:+.4}", candidate.asset_id, candidate.score);
    }
    EXIT_SUCCESS
}

fn cmd_annotate(args: AnnotateArgs) -> u8 {
    let config = match Config::load(&args.config) {
        Ok(config) => config,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_CONFIG;
        }
    };
    let manifest = match read_manifest(&args.manifest) {
        Ok(manifest) => manifest,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_CONFIG;
        }
    };
    let Some(target) = &manifest.target else {
        eprintln!("error: manifest has no target part to annotate");
        return EXIT_CONFIG;
    };
    let mode_raw = args.mode.unwrap_or_else(|| config.annotate.mode.clone());
    let mode = match parse_filter_mode(&mode_raw) {
        Ok(mode) => mode,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_CONFIG;
        }
    };
    let stride = args.stride.unwrap_or(config.annotate.stride);
    let top_k = args.top_k.unwrap_or(config.annotate.top_k);

    let asset_path = config
        .paths
        .assets_dir
        .join(format!("{}.json", target.asset_id));
    let record = match crate::asset::load_asset(&asset_path) {
        Ok(record) => record,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_CONFIG;
        }
    };
    let Some(part) = record.part(&target.part_id) else {
        eprintln!(
            "error: part '{}' not found in asset '{}'",
            target.part_id, target.asset_id
        );
        return EXIT_CONFIG;
    };
    let Some(target_placement) = manifest
        .placements
        .iter()
        .find(|p| p.asset_id == target.asset_id)
    else {
        eprintln!("error: target asset has no placement in the manifest");
        return EXIT_CONFIG;
    };
    let placement = &target_placement.placement;
    let centroid_world = part_world_point(placement, part.centroid3);
    let sub_centroids: Vec<Vec3> = part
        .leaves()
        .iter()
        .map(|p| part_world_point(placement, p.centroid3))
        .collect();
    let corners_world = part_world_corners(placement, &part.aabb);
    let obstacles: Vec<(&crate::layout::Placement, f64)> = manifest
        .placements
        .iter()
        .filter(|p| p.placement.handle != placement.handle)
        .map(|p| (&p.placement, p.dims.z))
        .collect();
    let frames: Vec<crate::export::AnnotationFrame> = manifest
        .trajectory
        .iter()
        .enumerate()
        .map(|(k, camera)| {
            let occluded = !line_of_sight_clear(camera.position, centroid_world, &obstacles);
            build_frame(
                k as u32,
                *camera,
                &target.part_id,
                centroid_world,
                &sub_centroids,
                &corners_world,
                occluded,
            )
        })
        .collect();
    let kept = select_frames(&frames, stride.max(1), top_k.max(1), mode);
    let samples = emit_pointing_samples(&kept, &manifest.task);
    if let Err(err) = write_pointing_samples(&args.out, &samples) {
        eprintln!("error: {err}");
        return EXIT_RUNTIME;
    }
    println!(
        "{} frames kept of {}, {} pointing samples -> {}",
        kept.len(),
        frames.len(),
        samples.len(),
        args.out.display()
    );
    EXIT_SUCCESS
}

fn cmd_validate_assets(args: ValidateArgs) -> u8 {
    let entries = match std::fs::read_dir(&args.dir) {
        Ok(entries) => entries,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_CONFIG;
        }
    };
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        eprintln!("error: no .json asset files in {}", args.dir.display());
        return EXIT_CONFIG;
    }
    let mut bad = 0usize;
    for path in &paths {
        let raw = match std::fs::read_to_string(path) {
            Ok(raw) => raw,
            Err(err) => {
                println!("{}: unreadable ({err})", path.display());
                bad += 1;
                continue;
            }
        };
        match serde_json::from_str::<crate::asset::AssetRecord>(&raw) {
            Ok(record) => {
                let report = validate_asset(&record);
                if report.is_empty() {
                    println!("{}: ok", record.asset_id);
                } else {
                    bad += 1;
                    for problem in report {
                        println!("{}: {problem}", record.asset_id);
                    }
                }
            }
            Err(err) => {
                bad += 1;
                println!("{}: parse error ({err})", path.display());
            }
        }
    }
    println!("{} of {} assets valid", paths.len() - bad, paths.len());
    if bad == 0 {
        EXIT_SUCCESS
    } else {
        EXIT_RUNTIME
    }
}

fn cmd_import_embeddings(args: ImportArgs) -> u8 {
    match import_tabular(&args.input, &args.output) {
        Ok(index) => {
            println!(
                "{} entries, dim {} -> {}",
                index.len(),
                index.dim(),
                args.output.display()
            );
            EXIT_SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            EXIT_CONFIG
        }
    }
}
