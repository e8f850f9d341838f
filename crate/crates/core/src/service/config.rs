//! Service configuration: one TOML file, overridable from the command line.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dialog::DialogConfig;
use crate::error::{Error, Result};
use crate::resources::ManifestPaths;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub manifests: ManifestPaths,
    pub dialog: DialogConfig,
    /// Recorded with every script run. The engine makes no random choices.
    pub seed: u64,
    pub listen: String,
    /// Where profile defaults are saved. Without it every session is ephemeral.
    pub profile_dir: Option<PathBuf>,
    /// One simulated device for all connections instead of one per session.
    pub shared_device: bool,
    /// Wall-clock milliseconds per simulator step for `serve` and `repl`; 0 stops the clock.
    pub tick_ms: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            manifests: ManifestPaths::default(),
            dialog: DialogConfig::default(),
            seed: 0,
            listen: "127.0.0.1:7411".to_string(),
            profile_dir: None,
            shared_device: false,
            tick_ms: 250,
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads `path`; relative manifest and profile paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut config = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut Option<PathBuf>| {
            if let Some(p) = p.as_mut().filter(|p| p.is_relative()) {
                *p = base.join(&*p);
            }
        };
        resolve(&mut config.manifests.device);
        resolve(&mut config.manifests.grammar);
        resolve(&mut config.manifests.knowledge);
        resolve(&mut config.manifests.templates);
        resolve(&mut config.profile_dir);
        Ok(config)
    }
}
