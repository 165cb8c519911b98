//! funscene turns a natural-language functional task description ("open the
//! second drawer of the cabinet next to the TV") into a solved 3D room
//! layout with the right part-annotated asset placed per the prompt's
//! spatial constraints, plus machine-readable ground truth (functional-mask
//! selection, camera trajectories, pointing samples) for training perception
//! models.
//!
//! The crate is a library first: each major capability has a runnable
//! example under `examples/`, and a thin `funscene` binary exposes the same
//! operations as subcommands (`generate`, `solve`, `retrieve`, `annotate`,
//! `validate-assets`, `import-embeddings`).
//!
//! Pipeline stages, one module each:
//!
//! - [`task`]: parse the task description into a layout prompt, the
//!   contextual object, and a context-free prompt.
//! - [`index`]: ensemble vector retrieval over precomputed embedding files.
//! - [`parts`]: functional-element extraction and centroid normalization
//!   over part hierarchies.
//! - [`requirement`]: infer a count predicate ("handle >= 3") and filter
//!   candidate assets by it.
//! - [`arrange`]: pick the part mask whose 2D position satisfies the
//!   prompt's spatial reference.
//! - [`layout`]: translate the layout into constraint clauses and solve
//!   placement with a two-pass depth-first search.
//! - [`export`]: orbit cameras, pinhole projection, frame filters, pointing
//!   samples and the scene manifest.
//! - [`llm`]: templates, structured-output parsing and record/replay for
//!   every model call, so everything above runs offline.
//!
//! [`pipeline`] wires the stages together, [`config`] carries the knobs,
//! and [`fixture`] builds a self-contained demo dataset plus a scripted
//! model backend for offline runs.
//!
//! # Examples
//!
//! One runnable example per capability lives under `examples/`:
//!
//! ```text
//! cargo run --example parse_task            # task description -> structured parse
//! cargo run --example retrieve_assets       # ensemble vector retrieval
//! cargo run --example filter_by_requirement # count predicates over part labels
//! cargo run --example arrange_parts         # spatial queries over 2D centroids
//! cargo run --example solve_layout          # two-pass DFS + checker
//! cargo run --example export_annotations    # orbits, projection, pointing samples
//! cargo run --example record_replay         # model-call cassettes
//! cargo run --example generate_scene        # the whole pipeline
//! ```

pub mod arrange;
pub mod asset;
pub mod cli;
pub mod config;
pub mod export;
pub mod fixture;
pub mod geom;
pub mod index;
pub mod layout;
pub mod llm;
pub mod parts;
pub mod pipeline;
pub mod requirement;
pub mod task;
