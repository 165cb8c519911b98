//! Record/replay storage for model calls.
//!
//! Each record keys on a hash of `(template_id, canonicalized bindings)`,
//! which stays stable across prompt-formatting changes. A cassette file is a
//! JSON array of records.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CassetteError {
    #[error("failed to read cassette: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse cassette: {0}")]
    Parse(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CassetteRecord {
    pub key: String,
    pub template_id: String,
    pub bindings: BTreeMap<String, String>,
    pub response: String,
}

/// Hash key for one call: template id plus canonical (sorted-key) bindings.
pub fn cassette_key(template_id: &str, bindings: &BTreeMap<String, String>) -> String {
    let mut hasher = Sha256::new();
    hasher.update(template_id.as_bytes());
    hasher.update([0u8]);
    for (k, v) in bindings {
        hasher.update(k.as_bytes());
        hasher.update([1u8]);
        hasher.update(v.as_bytes());
        hasher.update([2u8]);
    }
    hex::encode(hasher.finalize())
}

#[derive(Debug, Default, Clone)]
pub struct Cassette {
    records: BTreeMap<String, CassetteRecord>,
}

impl Cassette {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn load(path: &Path) -> Result<Self, CassetteError> {
        let raw = fs::read_to_string(path)?;
        let records: Vec<CassetteRecord> = serde_json::from_str(&raw)?;
        let mut map = BTreeMap::new();
        for record in records {
            map.insert(record.key.clone(), record);
        }
        Ok(Cassette { records: map })
    }

    pub fn save(&self, path: &Path) -> Result<(), CassetteError> {
        let records: Vec<&CassetteRecord> = self.records.values().collect();
        let body = serde_json::to_string_pretty(&records)?;
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, body)?;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&CassetteRecord> {
        self.records.get(key)
    }

    pub fn insert(&mut self, record: CassetteRecord) {
        self.records.insert(record.key.clone(), record);
    }

    /// Inserts a response under the key the client will compute for
    /// `(template_id, bindings)`.
    pub fn insert_response(
        &mut self,
        template_id: &str,
        bindings: BTreeMap<String, String>,
        response: String,
    ) {
        let key = cassette_key(template_id, &bindings);
        self.insert(CassetteRecord {
            key,
            template_id: template_id.to_string(),
            bindings,
            response,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_is_stable_and_order_independent() {
        let mut a = BTreeMap::new();
        a.insert("prompt".to_string(), "Open the door".to_string());
        a.insert("funclist".to_string(), "handle".to_string());
        let k1 = cassette_key("requirement", &a);
        let k2 = cassette_key("requirement", &a);
        assert_eq!(k1, k2);
        let k3 = cassette_key("task-parse", &a);
        assert_ne!(k1, k3);
    }

    #[test]
    fn cassette_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("calls.json");
        let mut cassette = Cassette::new();
        let mut bindings = BTreeMap::new();
        bindings.insert("prompt".to_string(), "Close the door".to_string());
        cassette.insert_response("task-parse", bindings.clone(), "```yaml\na: b\n```".into());
        cassette.save(&path).unwrap();
        let loaded = Cassette::load(&path).unwrap();
        assert_eq!(loaded.len(), 1);
        let key = cassette_key("task-parse", &bindings);
        assert_eq!(loaded.get(&key).unwrap().response, "```yaml\na: b\n```");
    }
}
