//! The service configuration file.
//!
//! ```toml
//! host = "127.0.0.1"
//! port = 8080
//! course = "course"          # relative to this file
//! data_dir = "data"          # omit to keep records in memory only
//! admin_token = "change-me"  # omit to disable /admin endpoints
//!
//! [limits]
//! max_source_bytes = 65536
//! max_steps = 5000000
//! ```
//!
//! `COMMLAB_PORT` and `COMMLAB_COURSE` override `port` and `course`.

use std::fs;
use std::path::{Path, PathBuf};

use scriptlang::ExecLimits;
use serde::Deserialize;

pub const PORT_VAR: &str = "COMMLAB_PORT";
pub const COURSE_VAR: &str = "COMMLAB_COURSE";
pub const DEFAULT_MAX_SOURCE_BYTES: usize = 64 * 1024;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    File { path: PathBuf, message: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Limits {
    #[serde(default = "default_max_source")]
    pub max_source_bytes: usize,
    #[serde(default)]
    pub max_steps: Option<u64>,
    #[serde(default)]
    pub max_vector_len: Option<usize>,
    #[serde(default)]
    pub max_figures: Option<usize>,
}

fn default_max_source() -> usize {
    DEFAULT_MAX_SOURCE_BYTES
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_source_bytes: DEFAULT_MAX_SOURCE_BYTES,
            max_steps: None,
            max_vector_len: None,
            max_figures: None,
        }
    }
}

impl Limits {
    pub fn exec(&self) -> ExecLimits {
        let d = ExecLimits::default();
        ExecLimits {
            max_steps: self.max_steps.unwrap_or(d.max_steps),
            max_vector_len: self.max_vector_len.unwrap_or(d.max_vector_len),
            max_figures: self.max_figures.unwrap_or(d.max_figures),
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default = "default_host")]
    host: String,
    #[serde(default = "default_port")]
    port: i64,
    course: PathBuf,
    #[serde(default)]
    data_dir: Option<PathBuf>,
    #[serde(default)]
    admin_token: Option<String>,
    #[serde(default)]
    limits: Limits,
}

fn default_host() -> String {
    "127.0.0.1".into()
}

fn default_port() -> i64 {
    8080
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceConfig {
    pub host: String,
    pub port: u16,
    pub course: PathBuf,
    pub data_dir: Option<PathBuf>,
    pub admin_token: Option<String>,
    pub limits: Limits,
}

impl ServiceConfig {
    /// In-memory configuration for a course directory, used by tests and
    /// embedding code.
    pub fn for_course(course: impl Into<PathBuf>) -> Self {
        Self {
            host: default_host(),
            port: 8080,
            course: course.into(),
            data_dir: None,
            admin_token: None,
            limits: Limits::default(),
        }
    }

    /// Reads `path` and applies the environment overrides.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::load_with(path, |k| std::env::var(k).ok())
    }

    /// As [`ServiceConfig::load`] with an explicit environment lookup.
    pub fn load_with(path: &Path, env: impl Fn(&str) -> Option<String>) -> Result<Self, ConfigError> {
        let file_err = |message: String| ConfigError::File {
            path: path.to_path_buf(),
            message,
        };
        let text = fs::read_to_string(path).map_err(|e| file_err(e.to_string()))?;
        let raw: RawConfig = toml::from_str(&text).map_err(|e| file_err(e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new("."));

        let port = match env(PORT_VAR) {
            Some(p) => p
                .trim()
                .parse::<i64>()
                .map_err(|_| ConfigError::Invalid(format!("{PORT_VAR}={p} is not a port number")))?,
            None => raw.port,
        };
        let port = u16::try_from(port)
            .ok()
            .filter(|&p| p > 0)
            .ok_or_else(|| ConfigError::Invalid(format!("port {port} is outside 1..=65535")))?;
        let course = match env(COURSE_VAR) {
            Some(c) => PathBuf::from(c),
            None => base.join(raw.course),
        };
        if raw.limits.max_source_bytes == 0 {
            return Err(ConfigError::Invalid("limits.max_source_bytes must be positive".into()));
        }
        if !raw.limits.exec().is_valid() {
            return Err(ConfigError::Invalid("execution limits must be positive".into()));
        }
        Ok(Self {
            host: raw.host,
            port,
            course,
            data_dir: raw.data_dir.map(|d| base.join(d)),
            admin_token: raw.admin_token.filter(|t| !t.is_empty()),
            limits: raw.limits,
        })
    }
}
