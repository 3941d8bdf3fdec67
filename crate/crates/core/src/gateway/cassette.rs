//! Replay cassettes: a flat JSONL file of (prompt-hash, prompt, response)
//! records. Lookups key on the hash; the verbatim prompt is stored alongside
//! for human diffing when a run drifts.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::GatewayError;

#[derive(Debug, Serialize, Deserialize)]
pub struct CassetteRecord {
    pub prompt_sha256: String,
    pub prompt: String,
    pub response: String,
}

#[derive(Debug, Default)]
pub struct Cassette {
    responses: BTreeMap<String, String>,
}

pub fn prompt_hash(prompt: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(prompt.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

impl Cassette {
    pub fn load(path: &Path) -> Result<Self, GatewayError> {
        let text = std::fs::read_to_string(path).map_err(|e| GatewayError::Cassette {
            message: format!("cannot read cassette {}: {e}", path.display()),
        })?;
        let mut responses = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let rec: CassetteRecord =
                serde_json::from_str(line).map_err(|e| GatewayError::Cassette {
                    message: format!("cassette {} line {}: {e}", path.display(), lineno + 1),
                })?;
            if prompt_hash(&rec.prompt) != rec.prompt_sha256 {
                return Err(GatewayError::Cassette {
                    message: format!(
                        "cassette {} line {}: stored prompt does not match its hash {}",
                        path.display(),
                        lineno + 1,
                        rec.prompt_sha256
                    ),
                });
            }
            responses.insert(rec.prompt_sha256, rec.response);
        }
        Ok(Cassette { responses })
    }

    pub fn lookup(&self, prompt: &str) -> Result<&str, GatewayError> {
        let hash = prompt_hash(prompt);
        self.responses
            .get(&hash)
            .map(|s| s.as_str())
            .ok_or(GatewayError::CassetteMiss { hash })
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }
}

/// Appends one record; used when recording cassettes for later replay.
pub fn append_record(path: &Path, prompt: &str, response: &str) -> Result<(), GatewayError> {
    let rec = CassetteRecord {
        prompt_sha256: prompt_hash(prompt),
        prompt: prompt.to_string(),
        response: response.to_string(),
    };
    let line = serde_json::to_string(&rec).map_err(|e| GatewayError::Cassette {
        message: format!("cannot serialize cassette record: {e}"),
    })?;
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| GatewayError::Cassette {
            message: format!("cannot open cassette {}: {e}", path.display()),
        })?;
    writeln!(file, "{line}").map_err(|e| GatewayError::Cassette {
        message: format!("cannot write cassette {}: {e}", path.display()),
    })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_hits_and_misses() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        append_record(&path, "prompt one", "ok").unwrap();
        let cassette = Cassette::load(&path).unwrap();
        assert_eq!(cassette.lookup("prompt one").unwrap(), "ok");
        match cassette.lookup("unknown prompt") {
            Err(GatewayError::CassetteMiss { hash }) => {
                assert_eq!(hash, prompt_hash("unknown prompt"));
            }
            other => panic!("expected CassetteMiss, got {other:?}"),
        }
    }

    #[test]
    fn corrupted_hash_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        std::fs::write(
            &path,
            "{\"prompt_sha256\":\"deadbeef\",\"prompt\":\"p\",\"response\":\"r\"}\n",
        )
        .unwrap();
        assert!(matches!(Cassette::load(&path), Err(GatewayError::Cassette { .. })));
    }
}
