//! Engine configuration: one declarative TOML file carries index paths, the
//! asset metadata directory, model endpoint or cassette, solver and camera
//! knobs. Command-line flags override individual fields. Schema documented
//! in `docs/config-schema.md`.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::export::{FilterMode, Intrinsics, OrbitParams};
use crate::layout::{GeomParams, SolveParams};
use crate::llm::{Cassette, HttpBackend, LlmClient};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Llm(#[from] crate::llm::LlmError),
    #[error(transparent)]
    Cassette(#[from] crate::llm::CassetteError),
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PathsConfig {
    pub assets_dir: PathBuf,
    pub annotated_index: PathBuf,
    pub unannotated_index: PathBuf,
    pub functional_labels: Option<PathBuf>,
    /// Optional index of precomputed query vectors keyed by query text;
    /// absent, queries are embedded with the built-in hash featurizer.
    pub query_vectors: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmConfig {
    /// "off", "replay", "live" or "record".
    pub mode: String,
    pub endpoint: String,
    pub model: String,
    /// Name of the environment variable holding the bearer token.
    pub api_key_env: String,
    pub cassette: Option<PathBuf>,
    pub temperature: f64,
    /// Maximum attempts per call, including the first.
    pub max_retries: u32,
    pub max_inflight: usize,
}

impl Default for LlmConfig {
    fn default() -> Self {
        LlmConfig {
            mode: "off".to_string(),
            endpoint: "http://localhost:11434/v1/chat/completions".to_string(),
            model: "gpt-oss-20b".to_string(),
            api_key_env: "FUNSCENE_API_KEY".to_string(),
            cassette: None,
            temperature: 0.0,
            max_retries: 3,
            max_inflight: 4,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RetrievalConfig {
    /// Candidate score threshold (strict) for the annotated pool.
    pub threshold: f64,
    /// Ensemble weight of the text-side cosine; 0.5 is the plain mean.
    pub text_weight: f64,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        RetrievalConfig {
            threshold: 0.25,
            text_weight: 0.5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ArrangementConfig {
    pub tie_eps: f64,
    /// "engine" (default) or "llm".
    pub mode: String,
}

impl Default for ArrangementConfig {
    fn default() -> Self {
        ArrangementConfig {
            tie_eps: crate::arrange::DEFAULT_TIE_EPS,
            mode: "engine".to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RoomConfig {
    pub width: f64,
    pub depth: f64,
}

impl Default for RoomConfig {
    fn default() -> Self {
        RoomConfig {
            width: 5.0,
            depth: 5.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub grid_step: f64,
    pub time_limit_secs: f64,
    pub snap: f64,
    pub near_radius: f64,
    pub shuffle: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            grid_step: 0.1,
            time_limit_secs: 10.0,
            snap: 0.05,
            near_radius: 1.5,
            shuffle: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraConfig {
    pub fx: f64,
    pub fy: f64,
    pub width: u32,
    pub height: u32,
    pub n_frames: u32,
    pub radius_min: f64,
    pub radius_max: f64,
    pub height_min: f64,
    pub height_max: f64,
}

impl Default for CameraConfig {
    fn default() -> Self {
        let k = Intrinsics::default();
        CameraConfig {
            fx: k.fx,
            fy: k.fy,
            width: k.width,
            height: k.height,
            n_frames: 60,
            radius_min: 1.0,
            radius_max: 2.5,
            height_min: 1.0,
            height_max: 1.8,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnotateConfig {
    pub stride: u32,
    pub top_k: usize,
    /// "synthetic_style" or "real_style".
    pub mode: String,
}

impl Default for AnnotateConfig {
    fn default() -> Self {
        AnnotateConfig {
            stride: crate::export::DEFAULT_STRIDE,
            top_k: crate::export::DEFAULT_TOP_K,
            mode: "synthetic_style".to_string(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub paths: PathsConfig,
    pub llm: LlmConfig,
    pub retrieval: RetrievalConfig,
    pub arrangement: ArrangementConfig,
    pub room: RoomConfig,
    pub solver: SolverConfig,
    pub camera: CameraConfig,
    pub annotate: AnnotateConfig,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let raw = std::fs::read_to_string(path)?;
        Ok(toml::from_str(&raw)?)
    }

    pub fn intrinsics(&self) -> Intrinsics {
        Intrinsics {
            fx: self.camera.fx,
            fy: self.camera.fy,
            cx: self.camera.width as f64 / 2.0,
            cy: self.camera.height as f64 / 2.0,
            width: self.camera.width,
            height: self.camera.height,
        }
    }

    pub fn orbit_params(&self, seed: u64) -> OrbitParams {
        OrbitParams {
            n_frames: self.camera.n_frames,
            radius_range: (self.camera.radius_min, self.camera.radius_max),
            height_range: (self.camera.height_min, self.camera.height_max),
            seed,
        }
    }

    pub fn solve_params(&self, seed: u64) -> SolveParams {
        SolveParams {
            grid_step: self.solver.grid_step,
            time_limit: Duration::from_secs_f64(self.solver.time_limit_secs),
            seed,
            geom: GeomParams {
                snap: self.solver.snap,
                near_radius: self.solver.near_radius,
            },
            shuffle: self.solver.shuffle,
        }
    }

    pub fn filter_mode(&self) -> Result<FilterMode, ConfigError> {
        parse_filter_mode(&self.annotate.mode)
    }

    /// Builds the model client for the configured mode; `None` when the
    /// model routes are off and the deterministic fallbacks apply.
    pub fn build_client(&self) -> Result<Option<LlmClient>, ConfigError> {
        match self.llm.mode.as_str() {
            "off" => Ok(None),
            "replay" => {
                let path = self.llm.cassette.as_ref().ok_or_else(|| {
                    ConfigError::Invalid("llm.mode = \"replay\" needs llm.cassette".into())
                })?;
                Ok(Some(LlmClient::replay(Cassette::load(path)?)))
            }
            "live" => {
                let backend = self.http_backend();
                Ok(Some(LlmClient::live(
                    Box::new(backend),
                    self.llm.max_retries,
                    self.llm.max_inflight,
                )))
            }
            "record" => {
                let path = self.llm.cassette.as_ref().ok_or_else(|| {
                    ConfigError::Invalid("llm.mode = \"record\" needs llm.cassette".into())
                })?;
                let backend = self.http_backend();
                Ok(Some(LlmClient::recording(
                    Box::new(backend),
                    path.clone(),
                    self.llm.max_retries,
                    self.llm.max_inflight,
                )?))
            }
            other => Err(ConfigError::Invalid(format!("unknown llm.mode '{other}'"))),
        }
    }

    fn http_backend(&self) -> HttpBackend {
        HttpBackend::new(
            self.llm.endpoint.clone(),
            self.llm.model.clone(),
            std::env::var(&self.llm.api_key_env).ok(),
            self.llm.temperature,
        )
    }
}

pub fn parse_filter_mode(raw: &str) -> Result<FilterMode, ConfigError> {
    match raw {
        "synthetic_style" | "synthetic" => Ok(FilterMode::SyntheticStyle),
        "real_style" | "real" => Ok(FilterMode::RealStyle),
        other => Err(ConfigError::Invalid(format!(
            "unknown annotate.mode '{other}'"
        ))),
    }
}
