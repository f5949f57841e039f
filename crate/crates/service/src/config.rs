//! Server configuration, read from a TOML file.
//!
//! ```toml
//! port = 8080
//! packs = ["../packs/sample.json"]
//! storage_dir = "data"
//! secret = "change me"          # or set CTF_SERVER_SECRET
//!
//! [tokens]
//! "token-alice" = "alice"
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::StartupError;

pub const SECRET_ENV: &str = "CTF_SERVER_SECRET";

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default = "default_bind")]
    pub bind: String,
    /// 0 picks a free port.
    #[serde(default = "default_port")]
    pub port: u16,
    pub packs: Vec<PathBuf>,
    pub storage_dir: PathBuf,
    #[serde(default)]
    pub secret: Option<String>,
    /// Bearer token to player id.
    #[serde(default)]
    pub tokens: BTreeMap<String, String>,
}

fn default_bind() -> String {
    "127.0.0.1".to_string()
}

fn default_port() -> u16 {
    8080
}

impl Config {
    /// Reads `path`. Relative pack and storage paths are taken relative to
    /// the file; a missing `secret` falls back to the environment.
    pub fn from_file(path: &Path) -> Result<Config, StartupError> {
        let text = std::fs::read_to_string(path).map_err(|source| StartupError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config: Config =
            toml::from_str(&text).map_err(|e| StartupError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for pack in &mut config.packs {
            *pack = base.join(&*pack);
        }
        config.storage_dir = base.join(&config.storage_dir);
        if config.secret.is_none() {
            config.secret = std::env::var(SECRET_ENV).ok();
        }
        Ok(config)
    }
}
