//! The `.lore` file at the repository root.
//!
//! Line-based `key = value` pairs with `#` comments:
//!
//! ```text
//! stale_older_than = 90d
//! validate_window = 50
//! required_trailers = Constraint, Tested
//! strict_validate = true
//! detect_window = 50
//! ```
//!
//! Unknown keys are tolerated and reported as warnings.

use std::io;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::duration::AgeThreshold;
use crate::format::{is_valid_key, parse_message, TrailerKey};
use crate::repo::{HistoryQuery, Repo, RepoError};

pub const CONFIG_FILE: &str = ".lore";
pub const DEFAULT_STALE_DAYS: u32 = 180;
pub const DEFAULT_VALIDATE_WINDOW: usize = 20;
/// How many recent commits `detect_lore_repo` inspects.
pub const DEFAULT_DETECT_WINDOW: usize = 50;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoreConfig {
    pub stale_older_than_default: AgeThreshold,
    pub validate_window_default: usize,
    /// Canonical spellings for reserved keys; extension keys as written.
    pub required_trailers: Vec<String>,
    pub strict_validate: bool,
    pub detect_window: usize,
}

impl Default for LoreConfig {
    fn default() -> Self {
        LoreConfig {
            stale_older_than_default: AgeThreshold::days(DEFAULT_STALE_DAYS)
                .expect("default is positive"),
            validate_window_default: DEFAULT_VALIDATE_WINDOW,
            required_trailers: Vec::new(),
            strict_validate: false,
            detect_window: DEFAULT_DETECT_WINDOW,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigWarning {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error(".lore line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error("could not read .lore: {0}")]
    Io(#[from] io::Error),
}

impl ConfigError {
    pub fn code(&self) -> &'static str {
        "bad-config"
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LoadedConfig {
    pub config: LoreConfig,
    pub warnings: Vec<ConfigWarning>,
}

fn positive_count(value: &str) -> Option<usize> {
    value.parse::<usize>().ok().filter(|n| *n > 0)
}

/// Parse `.lore` file contents.
pub fn parse_config(text: &str) -> Result<LoadedConfig, ConfigError> {
    let mut loaded = LoadedConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split_once('#').map_or(raw, |(before, _)| before).trim();
        if content.is_empty() {
            continue;
        }
        let invalid = |message: String| ConfigError::Invalid { line, message };
        let Some((key, value)) = content.split_once('=') else {
            return Err(invalid(format!("expected `key = value`, found `{content}`")));
        };
        let (key, value) = (key.trim(), value.trim());
        let config = &mut loaded.config;
        match key {
            "stale_older_than" => {
                config.stale_older_than_default =
                    value.parse().map_err(|e| invalid(format!("{e}")))?;
            }
            "validate_window" => {
                config.validate_window_default = positive_count(value)
                    .ok_or_else(|| invalid(format!("`{value}` is not a positive integer")))?;
            }
            "detect_window" => {
                config.detect_window = positive_count(value)
                    .ok_or_else(|| invalid(format!("`{value}` is not a positive integer")))?;
            }
            "strict_validate" => {
                config.strict_validate = match value {
                    "true" => true,
                    "false" => false,
                    _ => return Err(invalid(format!("`{value}` is not true or false"))),
                };
            }
            "required_trailers" => {
                let mut keys = Vec::new();
                for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    if !is_valid_key(item) {
                        return Err(invalid(format!("`{item}` is not a trailer key")));
                    }
                    keys.push(
                        TrailerKey::from_key(item)
                            .map_or_else(|| item.to_string(), |k| k.canonical().to_string()),
                    );
                }
                config.required_trailers = keys;
            }
            _ => loaded.warnings.push(ConfigWarning {
                line,
                message: format!("unknown key `{key}` ignored"),
            }),
        }
    }
    Ok(loaded)
}

/// Read `<root>/.lore`; a missing file yields the defaults.
pub fn load_config(root: &Path) -> Result<LoadedConfig, ConfigError> {
    match std::fs::read(root.join(CONFIG_FILE)) {
        Ok(bytes) => parse_config(&String::from_utf8_lossy(&bytes)),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(LoadedConfig::default()),
        Err(e) => Err(e.into()),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "signal", rename_all = "kebab-case")]
pub enum Evidence {
    ConfigFile,
    History { hash: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Detection {
    pub is_lore: bool,
    pub evidence: Option<Evidence>,
}

/// Decide whether a repository uses Lore: a `.lore` file, or a recent commit
/// carrying at least one reserved trailer.
pub fn detect_lore_repo(repo: &Repo, window: usize) -> Result<Detection, RepoError> {
    if repo.root().join(CONFIG_FILE).is_file() {
        return Ok(Detection {
            is_lore: true,
            evidence: Some(Evidence::ConfigFile),
        });
    }
    let query = HistoryQuery {
        max_count: Some(window),
        include_merges: true,
        ..HistoryQuery::default()
    };
    for commit in repo.log_stream(&query)? {
        let commit = commit?;
        let report = parse_message(&commit.message);
        if report.atom.as_ref().is_some_and(|a| a.has_lore_trailers()) {
            return Ok(Detection {
                is_lore: true,
                evidence: Some(Evidence::History { hash: commit.hash }),
            });
        }
    }
    Ok(Detection {
        is_lore: false,
        evidence: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn absent_file_gives_documented_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let loaded = load_config(dir.path()).unwrap();
        assert_eq!(loaded.config.stale_older_than_default.total_days(), 180);
        assert_eq!(loaded.config.validate_window_default, 20);
        assert!(loaded.config.required_trailers.is_empty());
        assert!(!loaded.config.strict_validate);
        assert_eq!(loaded.config.detect_window, 50);
        assert!(loaded.warnings.is_empty());
    }

    #[test]
    fn reads_each_key() {
        let text = "# team policy\n\
                    stale_older_than = 90d\n\
                    validate_window = 5   # short\n\
                    required_trailers = constraint, Tested,Ticket\n\
                    strict_validate = true\n";
        let config = parse_config(text).unwrap().config;
        assert_eq!(config.stale_older_than_default.total_days(), 90);
        assert_eq!(config.validate_window_default, 5);
        assert_eq!(config.required_trailers, vec!["Constraint", "Tested", "Ticket"]);
        assert!(config.strict_validate);
    }

    #[test]
    fn bad_value_reports_line() {
        match parse_config("stale_older_than = soon").unwrap_err() {
            ConfigError::Invalid { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
        match parse_config("\n\nvalidate_window = 0").unwrap_err() {
            ConfigError::Invalid { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_config("just words").is_err());
        assert!(parse_config("required_trailers = bad key").is_err());
    }

    #[test]
    fn unknown_keys_warn() {
        let loaded = parse_config("colour = blue\nstale_older_than = 2w").unwrap();
        assert_eq!(loaded.warnings.len(), 1);
        assert_eq!(loaded.warnings[0].line, 1);
        assert_eq!(loaded.config.stale_older_than_default.total_days(), 14);
    }

    #[test]
    fn loading_is_idempotent() {
        let text = "stale_older_than = 3m\nrequired_trailers = Directive";
        assert_eq!(parse_config(text).unwrap(), parse_config(text).unwrap());
    }
}
