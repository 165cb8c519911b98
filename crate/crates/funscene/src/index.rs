//! Exhaustive-scan embedding index with ensemble cosine scoring.
//!
//! Each entry pairs a text vector with an image vector for one asset; the
//! engine never computes embeddings itself, it only ingests them from index
//! files. The binary format: magic "SFEI", version u32, dim u32, entry count
//! u64, an id table of length-prefixed UTF-8 strings, then two row-major
//! little-endian f32 matrices (text first, then image). Exhaustive scan is
//! adequate at this scale; there is no ANN structure.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const INDEX_MAGIC: [u8; 4] = *b"SFEI";
pub const INDEX_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("io failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt header: {0}")]
    CorruptHeader(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite value in vector for '{0}'")]
    NonFinite(String),
    #[error("duplicate asset id '{0}'")]
    DuplicateId(String),
    #[error("zero-norm vector")]
    ZeroNorm,
    #[error("empty index")]
    EmptyIndex,
    #[error("threshold {0} outside [-1, 1]")]
    BadThreshold(f64),
    #[error("unknown asset id '{0}'")]
    UnknownId(String),
}

/// Text and image vectors for one asset.
#[derive(Debug, Clone, Copy)]
pub struct EmbeddingEntry<'a> {
    pub text: &'a [f32],
    pub image: &'a [f32],
}

/// In-memory index over one embedding file. Immutable after load; concurrent
/// queries need no synchronization.
#[derive(Debug, Clone)]
pub struct EmbeddingIndex {
    dim: usize,
    ids: Vec<String>,
    by_id: BTreeMap<String, usize>,
    text: Vec<f32>,
    image: Vec<f32>,
}

impl EmbeddingIndex {
    pub fn new(dim: usize) -> Self {
        EmbeddingIndex {
            dim,
            ids: Vec::new(),
            by_id: BTreeMap::new(),
            text: Vec::new(),
            image: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn insert(&mut self, id: &str, text: &[f32], image: &[f32]) -> Result<(), IndexError> {
        if text.len() != self.dim {
            return Err(IndexError::DimensionMismatch {
                expected: self.dim,
                got: text.len(),
            });
        }
        if image.len() != self.dim {
            return Err(IndexError::DimensionMismatch {
                expected: self.dim,
                got: image.len(),
            });
        }
        if !text.iter().chain(image).all(|v| v.is_finite()) {
            return Err(IndexError::NonFinite(id.to_string()));
        }
        if self.by_id.contains_key(id) {
            return Err(IndexError::DuplicateId(id.to_string()));
        }
        self.by_id.insert(id.to_string(), self.ids.len());
        self.ids.push(id.to_string());
        self.text.extend_from_slice(text);
        self.image.extend_from_slice(image);
        Ok(())
    }

    pub fn entry(&self, idx: usize) -> EmbeddingEntry<'_> {
        let start = idx * self.dim;
        EmbeddingEntry {
            text: &self.text[start..start + self.dim],
            image: &self.image[start..start + self.dim],
        }
    }

    pub fn entry_by_id(&self, id: &str) -> Option<EmbeddingEntry<'_>> {
        self.by_id.get(id).map(|&idx| self.entry(idx))
    }

    pub fn write(&self, path: &Path) -> Result<(), IndexError> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(&INDEX_MAGIC)?;
        w.write_u32::<LittleEndian>(INDEX_VERSION)?;
        w.write_u32::<LittleEndian>(self.dim as u32)?;
        w.write_u64::<LittleEndian>(self.ids.len() as u64)?;
        for id in &self.ids {
            let bytes = id.as_bytes();
            w.write_u32::<LittleEndian>(bytes.len() as u32)?;
            w.write_all(bytes)?;
        }
        for v in self.text.iter().chain(self.image.iter()) {
            w.write_f32::<LittleEndian>(*v)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Loads an index file, verifying magic, version, declared dimensions and
/// value finiteness.
pub fn load_index(path: &Path) -> Result<EmbeddingIndex, IndexError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| IndexError::CorruptHeader("file shorter than magic".into()))?;
    if magic != INDEX_MAGIC {
        return Err(IndexError::CorruptHeader(format!(
            "bad magic {magic:?}, expected \"SFEI\""
        )));
    }
    let version = r
        .read_u32::<LittleEndian>()
        .map_err(|_| IndexError::CorruptHeader("truncated version".into()))?;
    if version != INDEX_VERSION {
        return Err(IndexError::CorruptHeader(format!(
            "unsupported version {version}"
        )));
    }
    let dim = r
        .read_u32::<LittleEndian>()
        .map_err(|_| IndexError::CorruptHeader("truncated dim".into()))? as usize;
    if dim == 0 {
        return Err(IndexError::CorruptHeader("zero dimension".into()));
    }
    let count = r
        .read_u64::<LittleEndian>()
        .map_err(|_| IndexError::CorruptHeader("truncated count".into()))? as usize;

    let mut ids = Vec::with_capacity(count);
    let mut by_id = BTreeMap::new();
    for i in 0..count {
        let len = r
            .read_u32::<LittleEndian>()
            .map_err(|_| IndexError::CorruptHeader(format!("truncated id table at entry {i}")))?
            as usize;
        let mut buf = vec![0u8; len];
        r.read_exact(&mut buf)
            .map_err(|_| IndexError::CorruptHeader(format!("truncated id at entry {i}")))?;
        let id = String::from_utf8(buf)
            .map_err(|_| IndexError::CorruptHeader(format!("non-utf8 id at entry {i}")))?;
        if by_id.insert(id.clone(), i).is_some() {
            return Err(IndexError::DuplicateId(id));
        }
        ids.push(id);
    }

    let mut read_matrix = |name: &str| -> Result<Vec<f32>, IndexError> {
        let mut out = vec![0f32; count * dim];
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = r.read_f32::<LittleEndian>().map_err(|_| {
                IndexError::CorruptHeader(format!("truncated {name} matrix at element {i}"))
            })?;
        }
        Ok(out)
    };
    let text = read_matrix("text")?;
    let image = read_matrix("image")?;
    for (row, id) in ids.iter().enumerate() {
        let start = row * dim;
        let finite = text[start..start + dim]
            .iter()
            .chain(&image[start..start + dim])
            .all(|v| v.is_finite());
        if !finite {
            return Err(IndexError::NonFinite(id.clone()));
        }
    }
    Ok(EmbeddingIndex {
        dim,
        ids,
        by_id,
        text,
        image,
    })
}

/// Cosine similarity with f64 accumulation. Errors on a zero-norm side.
pub fn cosine(a: &[f32], b: &[f32]) -> Result<f64, IndexError> {
    if a.len() != b.len() {
        return Err(IndexError::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let mut dot = 0f64;
    let mut na = 0f64;
    let mut nb = 0f64;
    for i in 0..a.len() {
        let (x, y) = (a[i] as f64, b[i] as f64);
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na <= 0.0 || nb <= 0.0 {
        return Err(IndexError::ZeroNorm);
    }
    Ok(dot / (na.sqrt() * nb.sqrt()))
}

/// Weighted ensemble of text-text and image-side cosine similarity. The
/// default weight 0.5 is the plain arithmetic mean.
pub fn ensemble_score(
    query_text: &[f32],
    query_image: &[f32],
    entry: EmbeddingEntry<'_>,
    text_weight: f64,
) -> Result<f64, IndexError> {
    let t = cosine(query_text, entry.text)?;
    let i = cosine(query_image, entry.image)?;
    Ok(text_weight * t + (1.0 - text_weight) * i)
}

/// One scored retrieval hit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub asset_id: String,
    pub score: f64,
}

/// Highest-scoring entry; ties break toward the lexicographically smallest
/// asset id.
pub fn retrieve_best(
    index: &EmbeddingIndex,
    query_text: &[f32],
    query_image: &[f32],
    text_weight: f64,
) -> Result<Candidate, IndexError> {
    if index.is_empty() {
        return Err(IndexError::EmptyIndex);
    }
    let mut best: Option<Candidate> = None;
    for (i, id) in index.ids.iter().enumerate() {
        let score = ensemble_score(query_text, query_image, index.entry(i), text_weight)?;
        let better = match &best {
            None => true,
            Some(b) => score > b.score || (score == b.score && id < &b.asset_id),
        };
        if better {
            best = Some(Candidate {
                asset_id: id.clone(),
                score,
            });
        }
    }
    Ok(best.expect("non-empty index yields a best entry"))
}

/// All entries scoring strictly above `threshold`, sorted by descending
/// score (ties by ascending id). An empty result is not an error.
pub fn retrieve_candidates(
    index: &EmbeddingIndex,
    query_text: &[f32],
    query_image: &[f32],
    threshold: f64,
    text_weight: f64,
) -> Result<Vec<Candidate>, IndexError> {
    if !(-1.0..=1.0).contains(&threshold) {
        return Err(IndexError::BadThreshold(threshold));
    }
    let mut out = Vec::new();
    for (i, id) in index.ids.iter().enumerate() {
        let score = ensemble_score(query_text, query_image, index.entry(i), text_weight)?;
        if score > threshold {
            out.push(Candidate {
                asset_id: id.clone(),
                score,
            });
        }
    }
    out.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.asset_id.cmp(&b.asset_id))
    });
    Ok(out)
}

/// Imports a plain tabular vector dump: one entry per line,
/// `id<TAB>text_vector<TAB>image_vector`, components separated by commas or
/// spaces. Companion tool for producing index files from embedding dumps.
pub fn import_tabular(input: &Path, output: &Path) -> Result<EmbeddingIndex, IndexError> {
    let raw = std::fs::read_to_string(input)?;
    let mut index: Option<EmbeddingIndex> = None;
    for (lineno, line) in raw.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split('\t');
        let (Some(id), Some(text_raw), Some(image_raw)) =
            (fields.next(), fields.next(), fields.next())
        else {
            return Err(IndexError::CorruptHeader(format!(
                "line {}: expected id<TAB>text<TAB>image",
                lineno + 1
            )));
        };
        let parse_vec = |raw: &str| -> Result<Vec<f32>, IndexError> {
            raw.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<f32>().map_err(|_| {
                        IndexError::CorruptHeader(format!("line {}: bad float '{t}'", lineno + 1))
                    })
                })
                .collect()
        };
        let text = parse_vec(text_raw)?;
        let image = parse_vec(image_raw)?;
        let index = index.get_or_insert_with(|| EmbeddingIndex::new(text.len()));
        index.insert(id, &text, &image)?;
    }
    let index = index.ok_or(IndexError::EmptyIndex)?;
    index.write(output)?;
    Ok(index)
}
