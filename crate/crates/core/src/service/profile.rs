//! Saved defaults, one JSON file per profile id.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::device::SettingValue;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("profile id `{0}` must be 1-64 letters, digits, `-` or `_`")]
    InvalidId(String),
    #[error("profile `{id}`: {source}")]
    Io {
        id: String,
        #[source]
        source: std::io::Error,
    },
    #[error("profile `{id}` is not a JSON object of settings: {source}")]
    Parse {
        id: String,
        #[source]
        source: serde_json::Error,
    },
}

/// `<dir>/<id>.json` holding a slot id to value map.
#[derive(Debug, Clone)]
pub struct ProfileStore {
    dir: PathBuf,
}

fn check_id(id: &str) -> Result<(), ProfileError> {
    let ok = !id.is_empty() && id.len() <= 64 && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
    if ok {
        Ok(())
    } else {
        Err(ProfileError::InvalidId(id.to_string()))
    }
}

impl ProfileStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ProfileStore { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, id: &str) -> Result<PathBuf, ProfileError> {
        check_id(id)?;
        Ok(self.dir.join(format!("{id}.json")))
    }

    pub fn exists(&self, id: &str) -> bool {
        self.path(id).is_ok_and(|p| p.is_file())
    }

    /// Saved defaults, or an empty map for a profile that has none yet.
    pub fn load(&self, id: &str) -> Result<BTreeMap<String, SettingValue>, ProfileError> {
        let path = self.path(id)?;
        let text = match std::fs::read_to_string(&path) {
            Ok(text) => text,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(BTreeMap::new()),
            Err(source) => return Err(ProfileError::Io { id: id.to_string(), source }),
        };
        serde_json::from_str(&text).map_err(|source| ProfileError::Parse { id: id.to_string(), source })
    }

    /// Writes through a temporary file so a crash never leaves half a profile.
    pub fn save(&self, id: &str, defaults: &BTreeMap<String, SettingValue>) -> Result<(), ProfileError> {
        let path = self.path(id)?;
        let io = |source| ProfileError::Io { id: id.to_string(), source };
        std::fs::create_dir_all(&self.dir).map_err(io)?;
        let tmp = path.with_extension("json.tmp");
        let text = serde_json::to_string_pretty(defaults).expect("settings serialize");
        std::fs::write(&tmp, text + "\n").map_err(io)?;
        std::fs::rename(&tmp, &path).map_err(io)
    }
}
