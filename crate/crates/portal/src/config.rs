use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use serde::Deserialize;

/// Service configuration, read from a TOML file. Every key is optional.
///
/// | key                  | default |
/// |----------------------|---------|
/// | `listen`             | `127.0.0.1:8080` |
/// | `data_dir`           | `data` (relative to the working directory) |
/// | `rasterizer_command` | `pdf-raster --png --width 240 --pages 1-8 {input} {outdir}` |
/// | `harvest_endpoint`   | `http://export.arxiv.org/oai2` |
/// | `default_per_page`   | 20 |
/// | `max_per_page`       | 100 |
/// | `mention_links_cap`  | 20 |
/// | `thumbnail_workers`  | 4 |
/// | `pdf_base_url`       | `https://arxiv.org/pdf` |
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub listen: SocketAddr,
    pub data_dir: PathBuf,
    pub rasterizer_command: String,
    pub harvest_endpoint: String,
    pub default_per_page: u32,
    pub max_per_page: u32,
    pub mention_links_cap: usize,
    pub thumbnail_workers: usize,
    pub pdf_base_url: String,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            listen: ([127, 0, 0, 1], 8080).into(),
            data_dir: PathBuf::from("data"),
            rasterizer_command: "pdf-raster --png --width 240 --pages 1-8 {input} {outdir}".into(),
            harvest_endpoint: "http://export.arxiv.org/oai2".into(),
            default_per_page: 20,
            max_per_page: 100,
            mention_links_cap: 20,
            thumbnail_workers: 4,
            pdf_base_url: "https://arxiv.org/pdf".into(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("invalid config {0}: {1}")]
    Parse(PathBuf, toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(&'static str),
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// Loads `path`; a relative `data_dir` is resolved against the config
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.to_owned(), e))?;
        let mut config =
            Self::from_toml(&text).map_err(|e| ConfigError::Parse(path.to_owned(), e))?;
        if config.data_dir.is_relative() {
            if let Some(base) = path.parent() {
                config.data_dir = base.join(&config.data_dir);
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(1..=100).contains(&self.max_per_page) {
            return Err(ConfigError::Invalid("max_per_page must be within 1..=100"));
        }
        if self.default_per_page == 0 || self.default_per_page > self.max_per_page {
            return Err(ConfigError::Invalid(
                "default_per_page must be within 1..=max_per_page",
            ));
        }
        if self.mention_links_cap == 0 {
            return Err(ConfigError::Invalid("mention_links_cap must be positive"));
        }
        if self.thumbnail_workers == 0 {
            return Err(ConfigError::Invalid("thumbnail_workers must be positive"));
        }
        if !self.rasterizer_command.contains("{input}")
            || !self.rasterizer_command.contains("{outdir}")
        {
            return Err(ConfigError::Invalid(
                "rasterizer_command needs {input} and {outdir} placeholders",
            ));
        }
        Ok(())
    }
}
