//! The `lore` command: argument handling, dispatch and exit codes.
//!
//! [`run`] is the whole program minus process setup, so tests drive it
//! in-process with their own streams, clock and working directory.

mod args;
mod render;

use std::ffi::OsString;
use std::io::{self, BufRead, IsTerminal, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use clap::error::ErrorKind;
use clap::Parser;
use lore_core::authoring::{
    build_from_structured, build_interactive, commit_atom, validate, AuthoringError, LinePrompt,
    ValidateOptions,
};
use lore_core::config::{load_config, ConfigError, LoreConfig};
use lore_core::duration::{AgeThreshold, DurationError};
use lore_core::format::Severity;
use lore_core::query::{QueryEngine, QueryOptions};
use lore_core::repo::{git_program, Repo, RepoError};

pub use args::HELP;
pub use render::{Output, Style, OUTPUT_VERSION};

use args::{Cli, Command, Format, QueryArgs};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_ENVIRONMENT: i32 = 3;
pub const EXIT_DATA: i32 = 4;

/// Process context for one invocation.
#[derive(Clone, Debug)]
pub struct Env {
    pub cwd: PathBuf,
    pub git: OsString,
    pub color: bool,
    pub now: DateTime<Utc>,
}

impl Env {
    /// Current directory, `$LORE_GIT`, wall clock; color only on a terminal
    /// and only when `NO_COLOR` is unset.
    pub fn from_process() -> io::Result<Env> {
        Ok(Env {
            cwd: std::env::current_dir()?,
            git: git_program(),
            color: io::stdout().is_terminal() && std::env::var_os("NO_COLOR").is_none(),
            now: Utc::now(),
        })
    }
}

#[derive(Debug)]
enum CliError {
    Repo(RepoError),
    Config(ConfigError),
    Duration { flag: &'static str, source: DurationError },
    Authoring(AuthoringError),
    Input { path: PathBuf, source: io::Error },
}

impl CliError {
    fn code(&self) -> &'static str {
        match self {
            CliError::Repo(e) => e.code(),
            CliError::Config(e) => e.code(),
            CliError::Duration { source, .. } => source.code(),
            CliError::Authoring(e) => e.code(),
            CliError::Input { .. } => "io",
        }
    }

    fn exit_code(&self) -> i32 {
        match self {
            CliError::Repo(_) | CliError::Input { .. } => EXIT_ENVIRONMENT,
            CliError::Config(_) | CliError::Duration { .. } => EXIT_DATA,
            CliError::Authoring(e) => match e {
                AuthoringError::BadJson(_) | AuthoringError::SchemaViolation { .. } | AuthoringError::Aborted => {
                    EXIT_DATA
                }
                AuthoringError::Io(_) | AuthoringError::Repo(_) => EXIT_ENVIRONMENT,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Repo(e) => e.to_string(),
            CliError::Config(e) => e.to_string(),
            CliError::Duration { flag, source } => format!("invalid value for {flag}: {source}"),
            CliError::Authoring(e) => e.to_string(),
            CliError::Input { path, source } => format!("cannot read {}: {source}", path.display()),
        }
    }
}

impl From<RepoError> for CliError {
    fn from(e: RepoError) -> Self {
        CliError::Repo(e)
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<AuthoringError> for CliError {
    fn from(e: AuthoringError) -> Self {
        CliError::Authoring(e)
    }
}

/// Run one invocation. `args` includes the program name. Result data goes
/// to `stdout`; prompts, warnings and diagnostics go to `stderr`.
pub fn run<I, T>(args: I, env: &Env, stdin: &mut dyn BufRead, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => emit(stdout, &text, EXIT_OK),
                ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => emit(stderr, HELP, EXIT_USAGE),
                _ => emit(stderr, &text, EXIT_USAGE),
            };
        }
    };

    let (output, passed) = match execute(&cli, env, stdin, stderr) {
        Ok(result) => result,
        Err(e) => {
            let line = format!("lore: error[{}]: {}\n", e.code(), e.message());
            return emit(stderr, &line, e.exit_code());
        }
    };
    let text = match cli.format {
        Format::Json => render::json(&output),
        Format::Human => render::human(&output, Style { color: env.color }, env.now),
    };
    let code = if passed { EXIT_OK } else { EXIT_VALIDATION_FAILED };
    if stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush()).is_err() {
        return EXIT_ENVIRONMENT;
    }
    code
}

fn emit(stream: &mut dyn Write, text: &str, code: i32) -> i32 {
    // Nothing useful remains to be done if the diagnostic cannot be written.
    let _ = stream.write_all(text.as_bytes());
    let _ = stream.flush();
    code
}

fn open(env: &Env, stderr: &mut dyn Write) -> Result<(Repo, LoreConfig), CliError> {
    let repo = Repo::discover_with(env.git.clone(), &env.cwd)?;
    let loaded = load_config(repo.root())?;
    for w in &loaded.warnings {
        let _ = writeln!(stderr, "lore: warning: .lore line {}: {}", w.line, w.message);
    }
    Ok((repo, loaded.config))
}

fn age(flag: Option<&str>, config: &LoreConfig) -> Result<AgeThreshold, CliError> {
    match flag {
        Some(text) => text
            .parse()
            .map_err(|source| CliError::Duration { flag: "--older-than", source }),
        None => Ok(config.stale_older_than_default),
    }
}

fn query_options(q: &QueryArgs) -> QueryOptions {
    QueryOptions {
        max_count: q.max_count.map(|n| n as usize),
        include_merges: q.include_merges,
        ..QueryOptions::default()
    }
}

fn execute(
    cli: &Cli,
    env: &Env,
    stdin: &mut dyn BufRead,
    stderr: &mut dyn Write,
) -> Result<(Output, bool), CliError> {
    // Reject a bad duration before touching the repository.
    if let Command::Stale { older_than: Some(t), .. } | Command::Constraints { older_than: Some(t), .. } = &cli.command {
        age(Some(t), &LoreConfig::default())?;
    }
    let (repo, config) = open(env, stderr)?;
    let engine = |threshold| QueryEngine::new(&repo, threshold).at(env.now);
    let output = match &cli.command {
        Command::Context { query, depth } => {
            let opts = QueryOptions { related_depth: *depth, ..query_options(query) };
            let engine = engine(config.stale_older_than_default);
            Output::Context(engine.context(&query.path, &opts)?)
        }
        Command::Constraints { query, older_than } => {
            let engine = engine(age(older_than.as_deref(), &config)?);
            let set = engine.constraints(&query.path, &query_options(query))?;
            Output::Constraints { path: query.path.clone(), set }
        }
        Command::Rejected { query } => {
            let ledger = engine(config.stale_older_than_default).rejected(&query.path, &query_options(query))?;
            Output::Rejected { path: query.path.clone(), ledger }
        }
        Command::Directives { query } => {
            let list = engine(config.stale_older_than_default).directives(&query.path, &query_options(query))?;
            Output::Directives { path: query.path.clone(), list }
        }
        Command::Coverage { query } => {
            let map = engine(config.stale_older_than_default).coverage(&query.path, &query_options(query))?;
            Output::Coverage { path: query.path.clone(), map }
        }
        Command::Stale { path, older_than, max_count, include_merges } => {
            let older_than = age(older_than.as_deref(), &config)?;
            let opts = QueryOptions {
                max_count: max_count.map(|n| n as usize),
                include_merges: *include_merges,
                ..QueryOptions::default()
            };
            let report = engine(older_than).stale(path.as_deref(), &older_than, &opts)?;
            Output::Stale { scope: path.clone(), older_than, report }
        }
        Command::Commit { from_json } => {
            let atom = match from_json {
                Some(source) => build_from_structured(&read_document(source, stdin)?)?,
                None => {
                    // Fail before the prompts rather than after them.
                    if !repo.has_staged_changes()? {
                        return Err(RepoError::NothingStaged.into());
                    }
                    build_interactive(&mut LinePrompt::new(&mut *stdin, &mut *stderr))?
                }
            };
            let hash = commit_atom(&repo, &atom)?;
            Output::Commit { hash, atom }
        }
        Command::Validate { range, last, strict, include_merges } => {
            let last = last.map(|n| n as usize);
            let opts = ValidateOptions {
                range: range.clone(),
                last: if range.is_none() { last.or(Some(config.validate_window_default)) } else { last },
                threshold: if *strict || config.strict_validate { Severity::Warning } else { Severity::Error },
                include_merges: *include_merges,
                required_trailers: config.required_trailers.clone(),
            };
            let report = validate(&repo, &opts)?;
            let passed = report.passed();
            return Ok((Output::Validate(report), passed));
        }
    };
    Ok((output, true))
}

fn read_document(source: &Path, stdin: &mut dyn BufRead) -> Result<String, CliError> {
    let mut bytes = Vec::new();
    let read = if source == Path::new("-") {
        stdin.read_to_end(&mut bytes).map(|_| ())
    } else {
        std::fs::read(source).map(|b| bytes = b)
    };
    read.map_err(|source_err| CliError::Input { path: source.to_path_buf(), source: source_err })?;
    String::from_utf8(bytes).map_err(|_| AuthoringError::BadJson("input is not valid UTF-8".into()).into())
}
