use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::util::write_atomic;

/// One cached provider response, stored as pretty JSON so cache
/// directories double as replay fixtures.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CacheEntry {
    pub model_id: String,
    pub prompt: String,
    pub response_text: String,
}

/// Directory of response files keyed by prompt hash.
#[derive(Debug, Clone)]
pub struct PromptCache {
    dir: PathBuf,
}

impl PromptCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        PromptCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn entry_path(&self, hash: &str) -> PathBuf {
        self.dir.join(format!("{hash}.json"))
    }

    pub fn get(&self, hash: &str) -> io::Result<Option<CacheEntry>> {
        let path = self.entry_path(hash);
        let text = match std::fs::read_to_string(&path) {
            Ok(text) => text,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e),
        };
        serde_json::from_str(&text)
            .map(Some)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("{path:?}: {e}")))
    }

    pub fn put(&self, hash: &str, entry: &CacheEntry) -> io::Result<()> {
        std::fs::create_dir_all(&self.dir)?;
        let body = serde_json::to_string_pretty(entry).expect("cache entry serializes");
        write_atomic(&self.entry_path(hash), body.as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_miss() {
        let dir = tempfile::tempdir().unwrap();
        let cache = PromptCache::new(dir.path());
        assert!(cache.get("deadbeef").unwrap().is_none());
        let entry = CacheEntry {
            model_id: "m".into(),
            prompt: "p".into(),
            response_text: "r".into(),
        };
        cache.put("deadbeef", &entry).unwrap();
        let back = cache.get("deadbeef").unwrap().unwrap();
        assert_eq!(back.response_text, "r");
        assert_eq!(back.model_id, "m");
    }

    #[test]
    fn corrupt_entry_is_an_error_not_a_miss() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("bad.json"), b"{not json").unwrap();
        let cache = PromptCache::new(dir.path());
        assert!(cache.get("bad").is_err());
    }
}
