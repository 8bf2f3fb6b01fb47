//! Content-addressed file cache under `DGLR_CACHE` (default `./.dglr-cache`; `off` disables it).

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

pub const CACHE_ENV: &str = "DGLR_CACHE";
pub const DEFAULT_CACHE_DIR: &str = ".dglr-cache";

#[derive(Debug, Clone)]
pub struct Cache {
    root: PathBuf,
}

/// Hex SHA-256 of the parts, each length-prefixed so that concatenations cannot collide.
pub fn content_key(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    hex::encode(h.finalize())
}

impl Cache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    /// The directory named by the environment, the default when unset, `None` for `off` or empty.
    pub fn from_env() -> Option<Self> {
        Self::from_setting(std::env::var_os(CACHE_ENV).as_deref().map(|v| v.to_string_lossy()).as_deref())
    }

    pub fn from_setting(setting: Option<&str>) -> Option<Self> {
        match setting {
            None => Some(Self::new(DEFAULT_CACHE_DIR)),
            Some(v) if v.is_empty() || v.eq_ignore_ascii_case("off") => None,
            Some(v) => Some(Self::new(v)),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn path(&self, kind: &str, key: &str) -> PathBuf {
        self.root.join(kind).join(format!("{key}.json"))
    }

    pub fn get(&self, kind: &str, key: &str) -> Option<String> {
        fs::read_to_string(self.path(kind, key)).ok()
    }

    /// Writes through a temporary file in the same directory and renames it into place.
    pub fn put(&self, kind: &str, key: &str, contents: &str) -> io::Result<PathBuf> {
        let path = self.path(kind, key);
        let dir = path.parent().expect("cache paths have a parent");
        fs::create_dir_all(dir)?;
        let tmp = dir.join(format!(".{key}.{}.tmp", std::process::id()));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(contents.as_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &path)?;
        Ok(path)
    }

    /// Cached value, or `compute` stored under the key.
    pub fn get_or_put<E>(&self, kind: &str, key: &str, compute: impl FnOnce() -> Result<String, E>) -> Result<String, E> {
        if let Some(v) = self.get(kind, key) {
            return Ok(v);
        }
        let v = compute()?;
        let _ = self.put(kind, key, &v);
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_are_length_prefixed() {
        assert_ne!(content_key(&["ab", "c"]), content_key(&["a", "bc"]));
        assert_eq!(content_key(&["x"]).len(), 64);
    }

    #[test]
    fn settings() {
        assert_eq!(Cache::from_setting(None).unwrap().root(), Path::new(DEFAULT_CACHE_DIR));
        assert!(Cache::from_setting(Some("off")).is_none());
        assert!(Cache::from_setting(Some("")).is_none());
        assert_eq!(Cache::from_setting(Some("/tmp/x")).unwrap().root(), Path::new("/tmp/x"));
    }

    #[test]
    fn round_trip() {
        let dir = std::env::temp_dir().join(format!("dglr-cache-test-{}", std::process::id()));
        let c = Cache::new(&dir);
        let k = content_key(&["report", "1"]);
        assert_eq!(c.get("reports", &k), None);
        c.put("reports", &k, "{}").unwrap();
        assert_eq!(c.get("reports", &k).as_deref(), Some("{}"));
        let v: Result<String, ()> = c.get_or_put("reports", &k, || Ok("other".into()));
        assert_eq!(v.unwrap(), "{}");
        fs::remove_dir_all(dir).unwrap();
    }
}
