//! Building Lore commits and checking recent history for conformance.

mod draft;
mod interactive;
mod structured;
mod validate;

use std::io;

use thiserror::Error;

use crate::format::{serialize_atom, LoreAtom};
use crate::repo::{Repo, RepoError};

pub use draft::AtomDraft;
pub use interactive::{build_interactive, LinePrompt, PromptIo};
pub use structured::{build_from_structured, render_structured, SCHEMA_VERSION};
pub use validate::{check_message, validate, CommitFindings, SeverityTotals, ValidateOptions, ValidationReport};

#[derive(Debug, Error)]
pub enum AuthoringError {
    #[error("invalid JSON: {0}")]
    BadJson(String),
    #[error("{path}: {message}")]
    SchemaViolation { path: String, message: String },
    #[error("aborted")]
    Aborted,
    #[error("prompt i/o failed: {0}")]
    Io(#[from] io::Error),
    #[error(transparent)]
    Repo(#[from] RepoError),
}

impl AuthoringError {
    pub fn code(&self) -> &'static str {
        match self {
            AuthoringError::BadJson(_) => "bad-json",
            AuthoringError::SchemaViolation { .. } => "schema-violation",
            AuthoringError::Aborted => "aborted",
            AuthoringError::Io(_) => "io",
            AuthoringError::Repo(e) => e.code(),
        }
    }

    pub(crate) fn violation(path: impl Into<String>, message: impl Into<String>) -> AuthoringError {
        AuthoringError::SchemaViolation {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// Commit the staged changes with `atom` serialized as the message.
/// Returns the new commit's full hash.
pub fn commit_atom(repo: &Repo, atom: &LoreAtom) -> Result<String, AuthoringError> {
    let message = serialize_atom(atom)
        .map_err(|e| AuthoringError::violation(format!("$.{}", e.field), e.reason))?;
    Ok(repo.create_commit(&message, false)?)
}
