//! Structured decision records carried in git commit trailers.
//!
//! A commit message's final paragraph holds `Key: value` trailers recording
//! the constraints, rejected alternatives, directives and verification notes
//! behind a change. This crate parses and writes that format, reads history
//! through the `git` executable, and answers path-scoped questions over it.

pub mod authoring;
pub mod config;
pub mod duration;
pub mod format;
pub mod query;
pub mod repo;
pub mod timefmt;

pub use format::{parse_message, serialize_atom, LoreAtom, ParseReport};
pub use query::QueryEngine;
pub use repo::{Repo, RepoError};
