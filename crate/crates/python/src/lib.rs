//! Python bindings: parse, lint, author and query Lore commit messages.
//!
//! Results cross the boundary as plain Python dicts and lists with the same
//! shape as the CLI's JSON output.

use std::path::PathBuf;

use chrono::{DateTime, TimeZone, Utc};
use lore_core::authoring::{self, AuthoringError, ValidateOptions};
use lore_core::config::{detect_lore_repo, load_config, LoreConfig};
use lore_core::duration::AgeThreshold;
use lore_core::format::{self, Severity};
use lore_core::query::{QueryEngine, QueryOptions};
use lore_core::repo::{git_program, Repo, RepoError};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyString;
use serde::Serialize;

create_exception!(lore_py, LoreError, PyException, "Raised with `(code, message)` arguments.");

fn lore_err(code: &str, message: impl ToString) -> PyErr {
    LoreError::new_err((code.to_string(), message.to_string()))
}

fn repo_err(e: RepoError) -> PyErr {
    lore_err(e.code(), &e)
}

fn authoring_err(e: AuthoringError) -> PyErr {
    lore_err(e.code(), &e)
}

/// Serialize through JSON so Python sees exactly the CLI's field names.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| lore_err("internal", e))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Accept a JSON document either as text or as a dict.
fn document_text(doc: &Bound<'_, PyAny>) -> PyResult<String> {
    if let Ok(s) = doc.cast::<PyString>() {
        return Ok(s.to_str()?.to_string());
    }
    doc.py().import("json")?.call_method1("dumps", (doc,))?.extract()
}

fn threshold(text: Option<&str>, default: AgeThreshold) -> PyResult<AgeThreshold> {
    match text {
        Some(t) => t.parse().map_err(|e: lore_core::duration::DurationError| lore_err(e.code(), &e)),
        None => Ok(default),
    }
}

/// Parse a commit message: `{"atom": ... or None, "findings": [...], "trailers": [...]}`.
#[pyfunction]
fn parse_message<'py>(py: Python<'py>, message: &str) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &format::parse_message(message))
}

/// Canonical commit message for a structured document (str or dict).
#[pyfunction]
fn serialize(doc: &Bound<'_, PyAny>) -> PyResult<String> {
    let atom = authoring::build_from_structured(&document_text(doc)?).map_err(authoring_err)?;
    format::serialize_atom(&atom).map_err(|e| lore_err(e.code(), &e))
}

/// Validate a structured document and return the normalized atom.
#[pyfunction]
fn build_structured<'py>(doc: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let atom = authoring::build_from_structured(&document_text(doc)?).map_err(authoring_err)?;
    to_py(doc.py(), &atom)
}

/// Findings for one message, as `lore validate` reports them.
#[pyfunction]
#[pyo3(signature = (message, required_trailers = Vec::new()))]
fn lint<'py>(py: Python<'py>, message: &str, required_trailers: Vec<String>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &authoring::check_message(message, &required_trailers))
}

/// A git work tree queried through the Lore engine.
#[pyclass(module = "lore_py")]
struct Repository {
    repo: Repo,
    config: LoreConfig,
    now: Option<DateTime<Utc>>,
}

impl Repository {
    fn engine(&self, older_than: AgeThreshold) -> QueryEngine<'_> {
        let engine = QueryEngine::new(&self.repo, older_than);
        match self.now {
            Some(now) => engine.at(now),
            None => engine,
        }
    }

    fn default_age(&self) -> AgeThreshold {
        self.config.stale_older_than_default
    }
}

fn options(max_count: Option<usize>, include_merges: bool) -> QueryOptions {
    QueryOptions { max_count, include_merges, ..QueryOptions::default() }
}

#[pymethods]
impl Repository {
    /// Open the repository enclosing `path`. `now` (epoch seconds) pins the
    /// clock used for staleness; `git` overrides the executable.
    #[new]
    #[pyo3(signature = (path = None, git = None, now = None))]
    fn new(path: Option<PathBuf>, git: Option<String>, now: Option<i64>) -> PyResult<Self> {
        let git = git.map(Into::into).unwrap_or_else(git_program);
        let repo = Repo::discover_with(git, path.unwrap_or_else(|| PathBuf::from("."))).map_err(repo_err)?;
        let config = load_config(repo.root()).map_err(|e| lore_err(e.code(), &e))?.config;
        let now = match now {
            Some(ts) => Some(Utc.timestamp_opt(ts, 0).single().ok_or_else(|| lore_err("bad-time", ts))?),
            None => None,
        };
        Ok(Repository { repo, config, now })
    }

    #[getter]
    fn root(&self) -> PathBuf {
        self.repo.root().to_path_buf()
    }

    #[pyo3(signature = (path, depth = 1, max_count = None, include_merges = false))]
    fn context<'py>(
        &self,
        py: Python<'py>,
        path: &str,
        depth: usize,
        max_count: Option<usize>,
        include_merges: bool,
    ) -> PyResult<Bound<'py, PyAny>> {
        let opts = QueryOptions { related_depth: depth, ..options(max_count, include_merges) };
        to_py(py, &self.engine(self.default_age()).context(path, &opts).map_err(repo_err)?)
    }

    #[pyo3(signature = (path, older_than = None, max_count = None, include_merges = false))]
    fn constraints<'py>(
        &self,
        py: Python<'py>,
        path: &str,
        older_than: Option<&str>,
        max_count: Option<usize>,
        include_merges: bool,
    ) -> PyResult<Bound<'py, PyAny>> {
        let engine = self.engine(threshold(older_than, self.default_age())?);
        let set = engine.constraints(path, &options(max_count, include_merges)).map_err(repo_err)?;
        to_py(py, &set.entries)
    }

    #[pyo3(signature = (path, max_count = None, include_merges = false))]
    fn rejected<'py>(
        &self,
        py: Python<'py>,
        path: &str,
        max_count: Option<usize>,
        include_merges: bool,
    ) -> PyResult<Bound<'py, PyAny>> {
        let engine = self.engine(self.default_age());
        let ledger = engine.rejected(path, &options(max_count, include_merges)).map_err(repo_err)?;
        to_py(py, &ledger.entries)
    }

    #[pyo3(signature = (path, max_count = None, include_merges = false))]
    fn directives<'py>(
        &self,
        py: Python<'py>,
        path: &str,
        max_count: Option<usize>,
        include_merges: bool,
    ) -> PyResult<Bound<'py, PyAny>> {
        let engine = self.engine(self.default_age());
        let list = engine.directives(path, &options(max_count, include_merges)).map_err(repo_err)?;
        to_py(py, &list.entries)
    }

    /// Tested / Not-tested trailer claims (not code coverage).
    #[pyo3(signature = (path, max_count = None, include_merges = false))]
    fn coverage<'py>(
        &self,
        py: Python<'py>,
        path: &str,
        max_count: Option<usize>,
        include_merges: bool,
    ) -> PyResult<Bound<'py, PyAny>> {
        let engine = self.engine(self.default_age());
        to_py(py, &engine.coverage(path, &options(max_count, include_merges)).map_err(repo_err)?)
    }

    #[pyo3(signature = (path = None, older_than = None, max_count = None, include_merges = false))]
    fn stale<'py>(
        &self,
        py: Python<'py>,
        path: Option<&str>,
        older_than: Option<&str>,
        max_count: Option<usize>,
        include_merges: bool,
    ) -> PyResult<Bound<'py, PyAny>> {
        let age = threshold(older_than, self.default_age())?;
        let report = self.engine(age).stale(path, &age, &options(max_count, include_merges)).map_err(repo_err)?;
        to_py(py, &report.entries)
    }

    #[pyo3(signature = (hash, depth = 1))]
    fn related_chain<'py>(&self, py: Python<'py>, hash: &str, depth: usize) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.engine(self.default_age()).related_chain(hash, depth).map_err(repo_err)?)
    }

    /// Check recent commits; the report's `passed` key gives the verdict.
    #[pyo3(signature = (range = None, last = None, strict = false, include_merges = false))]
    fn validate<'py>(
        &self,
        py: Python<'py>,
        range: Option<String>,
        last: Option<usize>,
        strict: bool,
        include_merges: bool,
    ) -> PyResult<Bound<'py, PyAny>> {
        let last = if range.is_none() { last.or(Some(self.config.validate_window_default)) } else { last };
        let opts = ValidateOptions {
            range,
            last,
            threshold: if strict || self.config.strict_validate { Severity::Warning } else { Severity::Error },
            include_merges,
            required_trailers: self.config.required_trailers.clone(),
        };
        let report = authoring::validate(&self.repo, &opts).map_err(repo_err)?;
        let out = to_py(py, &report)?;
        out.set_item("passed", report.passed())?;
        Ok(out)
    }

    /// Commit the staged changes with a structured document; returns the hash.
    fn commit(&self, doc: &Bound<'_, PyAny>) -> PyResult<String> {
        let atom = authoring::build_from_structured(&document_text(doc)?).map_err(authoring_err)?;
        authoring::commit_atom(&self.repo, &atom).map_err(authoring_err)
    }

    /// Whether the repository uses Lore, and which signal said so.
    fn detect<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &detect_lore_repo(&self.repo, self.config.detect_window).map_err(repo_err)?)
    }
}

#[pymodule]
fn lore_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("LoreError", m.py().get_type::<LoreError>())?;
    m.add_class::<Repository>()?;
    m.add_function(wrap_pyfunction!(parse_message, m)?)?;
    m.add_function(wrap_pyfunction!(serialize, m)?)?;
    m.add_function(wrap_pyfunction!(build_structured, m)?)?;
    m.add_function(wrap_pyfunction!(lint, m)?)?;
    Ok(())
}
