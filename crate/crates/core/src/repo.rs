//! Access to repository history through the `git` executable.
//!
//! Commits are read with a frozen, NUL-delimited log format:
//!
//! ```text
//! git log -z --format=%x1e%H%x00%an%x00%ae%x00%at%x00%B [--name-only] [-- <path>]
//! ```
//!
//! Each record opens with a 0x1E sentinel followed by the full hash, then
//! author name, author email, author time (unix seconds) and the raw message,
//! each terminated by NUL. With `--name-only` the touched paths follow as
//! further NUL-terminated fields, the first prefixed by a newline.

use std::ffi::OsString;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Child, ChildStdout, Command, Stdio};
use std::thread::JoinHandle;

use chrono::{DateTime, TimeZone, Utc};
use serde::Serialize;
use thiserror::Error;

use crate::format::is_hash_ref;
use crate::timefmt;

/// Environment variable naming the git executable to run.
pub const GIT_ENV: &str = "LORE_GIT";

const RECORD_SENTINEL: u8 = 0x1e;
// `@<seconds>` is only read as an epoch for large values, so spell dates out.
const GIT_DATE: &str = "%Y-%m-%d %H:%M:%S +0000";
const LOG_FORMAT: &str = "--format=%x1e%H%x00%an%x00%ae%x00%at%x00%B";

#[derive(Debug, Error)]
pub enum RepoError {
    #[error("not inside a git work tree")]
    NotARepo,
    #[error("path `{0}` does not appear in repository history")]
    UnknownPath(String),
    #[error("no commit matches `{0}`")]
    UnknownCommit(String),
    #[error("`{0}` matches more than one object")]
    AmbiguousPrefix(String),
    #[error("nothing staged to commit")]
    NothingStaged,
    #[error("`git {args}` failed ({}): {stderr}", code.map_or("signal".to_string(), |c| format!("exit {c}")))]
    GitFailed {
        args: String,
        code: Option<i32>,
        stderr: String,
    },
    #[error("could not run git: {0}")]
    Io(#[from] io::Error),
    #[error("unexpected git output: {0}")]
    Protocol(String),
}

impl RepoError {
    pub fn code(&self) -> &'static str {
        match self {
            RepoError::NotARepo => "not-a-repo",
            RepoError::UnknownPath(_) => "unknown-path",
            RepoError::UnknownCommit(_) => "unknown-commit",
            RepoError::AmbiguousPrefix(_) => "ambiguous-prefix",
            RepoError::NothingStaged => "nothing-staged",
            RepoError::GitFailed { .. } | RepoError::Io(_) | RepoError::Protocol(_) => "git-failed",
        }
    }
}

pub type Result<T, E = RepoError> = std::result::Result<T, E>;

/// One commit as read from history.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CommitRecord {
    pub hash: String,
    pub author_name: String,
    pub author_email: String,
    #[serde(serialize_with = "timefmt::serialize")]
    pub author_date: DateTime<Utc>,
    #[serde(skip)]
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub touched_paths: Option<Vec<String>>,
}

/// Which commits to enumerate.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HistoryQuery {
    /// File or directory, relative to the working directory.
    pub path: Option<String>,
    /// Revision range such as `main..topic`; defaults to `HEAD`.
    pub rev_range: Option<String>,
    /// Zero is treated as one.
    pub max_count: Option<usize>,
    /// Commit-date window, applied by git.
    pub since: Option<DateTime<Utc>>,
    pub until: Option<DateTime<Utc>>,
    /// `None` follows renames for file paths and not for directories.
    pub follow_renames: Option<bool>,
    pub include_merges: bool,
    /// Populate `CommitRecord::touched_paths`.
    pub with_paths: bool,
}

impl HistoryQuery {
    pub fn path(path: impl Into<String>) -> HistoryQuery {
        HistoryQuery {
            path: Some(path.into()),
            ..HistoryQuery::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum PathKind {
    File,
    Directory,
}

/// Handle on a work tree, running git from `cwd`.
#[derive(Clone, Debug)]
pub struct Repo {
    git: OsString,
    cwd: PathBuf,
    root: PathBuf,
}

/// The git executable: `$LORE_GIT` if set, otherwise `git` from `PATH`.
pub fn git_program() -> OsString {
    std::env::var_os(GIT_ENV)
        .filter(|v| !v.is_empty())
        .unwrap_or_else(|| OsString::from("git"))
}

fn git_command(git: &OsString, cwd: &Path) -> Command {
    let mut cmd = Command::new(git);
    cmd.current_dir(cwd)
        .env("LC_ALL", "C")
        .env("GIT_PAGER", "cat")
        .env("GIT_OPTIONAL_LOCKS", "0")
        .args(["-c", "log.showSignature=false", "-c", "core.quotePath=false"])
        .stdin(Stdio::null());
    cmd
}

fn describe(args: &[&str]) -> String {
    args.join(" ")
}

struct Output {
    status: std::process::ExitStatus,
    stdout: Vec<u8>,
    stderr: String,
}

fn run(git: &OsString, cwd: &Path, args: &[&str], stdin: Option<&[u8]>) -> Result<Output> {
    let mut cmd = git_command(git, cwd);
    cmd.args(args).stdout(Stdio::piped()).stderr(Stdio::piped());
    if stdin.is_some() {
        cmd.stdin(Stdio::piped());
    }
    let mut child = cmd.spawn()?;
    if let Some(input) = stdin {
        let mut pipe = child.stdin.take().expect("stdin is piped");
        pipe.write_all(input)?;
    }
    let out = child.wait_with_output()?;
    Ok(Output {
        status: out.status,
        stdout: out.stdout,
        stderr: String::from_utf8_lossy(&out.stderr).trim_end().to_string(),
    })
}

fn failed(args: &[&str], out: Output) -> RepoError {
    if out.stderr.contains("not a git repository") {
        return RepoError::NotARepo;
    }
    RepoError::GitFailed {
        args: describe(args),
        code: out.status.code(),
        stderr: out.stderr,
    }
}

fn stdout_line(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).trim_end().to_string()
}

/// Work-tree root enclosing `cwd`, innermost repository first.
pub fn repo_root(cwd: &Path) -> Result<PathBuf> {
    repo_root_with(&git_program(), cwd)
}

fn repo_root_with(git: &OsString, cwd: &Path) -> Result<PathBuf> {
    let args = ["rev-parse", "--show-toplevel"];
    let out = run(git, cwd, &args, None)?;
    if !out.status.success() {
        if out.stderr.contains("not a git repository")
            || out.stderr.contains("must be run in a work tree")
        {
            return Err(RepoError::NotARepo);
        }
        return Err(failed(&args, out));
    }
    let root = stdout_line(&out);
    if root.is_empty() {
        return Err(RepoError::NotARepo);
    }
    Ok(PathBuf::from(root))
}

impl Repo {
    /// Open the repository enclosing `cwd`, using [`git_program`].
    pub fn discover(cwd: impl Into<PathBuf>) -> Result<Repo> {
        Repo::discover_with(git_program(), cwd)
    }

    pub fn discover_with(git: impl Into<OsString>, cwd: impl Into<PathBuf>) -> Result<Repo> {
        let git = git.into();
        let cwd = cwd.into();
        let root = repo_root_with(&git, &cwd)?;
        Ok(Repo { git, cwd, root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn cwd(&self) -> &Path {
        &self.cwd
    }

    fn run(&self, args: &[&str]) -> Result<Output> {
        run(&self.git, &self.cwd, args, None)
    }

    fn run_ok(&self, args: &[&str]) -> Result<Output> {
        let out = self.run(args)?;
        if out.status.success() {
            Ok(out)
        } else {
            Err(failed(args, out))
        }
    }

    /// True once the current branch has at least one commit.
    pub fn has_commits(&self) -> Result<bool> {
        Ok(self
            .run(&["rev-parse", "--verify", "--quiet", "HEAD^{commit}"])?
            .status
            .success())
    }

    fn object_type(&self, rev: &str) -> Result<Option<String>> {
        let out = self.run(&["cat-file", "-t", rev])?;
        Ok(out.status.success().then(|| stdout_line(&out)))
    }

    fn classify_path(&self, path: &str) -> Result<PathKind> {
        let trimmed = path.trim_end_matches('/');
        if trimmed.is_empty() || trimmed == "." || path.ends_with('/') {
            return Ok(PathKind::Directory);
        }
        let kind_at = |commit: &str| -> Result<Option<PathKind>> {
            Ok(
                match self.object_type(&format!("{commit}:./{trimmed}"))?.as_deref() {
                    Some("tree") => Some(PathKind::Directory),
                    Some(_) => Some(PathKind::File),
                    None => None,
                },
            )
        };
        if let Some(kind) = kind_at("HEAD")? {
            return Ok(kind);
        }
        // Not in HEAD: find the last commit that touched it.
        let out = self.run_ok(&["log", "-1", "--format=%H", "--full-history", "--", path])?;
        let last = stdout_line(&out);
        if last.is_empty() {
            return Err(RepoError::UnknownPath(path.to_string()));
        }
        if let Some(kind) = kind_at(&last)? {
            return Ok(kind);
        }
        Ok(kind_at(&format!("{last}^"))?.unwrap_or(PathKind::File))
    }

    fn log_args(&self, query: &HistoryQuery) -> Result<Option<Vec<String>>> {
        let mut args: Vec<String> = vec!["log".into(), "-z".into(), LOG_FORMAT.into()];
        if !query.include_merges {
            args.push("--no-merges".into());
        }
        if let Some(n) = query.max_count {
            args.push(format!("--max-count={}", n.max(1)));
        }
        if let Some(since) = query.since {
            args.push(format!("--since={}", since.format(GIT_DATE)));
        }
        if let Some(until) = query.until {
            args.push(format!("--until={}", until.format(GIT_DATE)));
        }
        if query.with_paths {
            // A rename touches both names, whatever diff.renames says.
            args.push("--name-only".into());
            args.push("--no-renames".into());
        }
        match &query.rev_range {
            Some(range) => {
                args.push("--end-of-options".into());
                args.push(range.clone());
            }
            None => {
                if !self.has_commits()? {
                    return Ok(None);
                }
            }
        }
        if let Some(path) = &query.path {
            let kind = self.classify_path(path)?;
            let follow = query.follow_renames.unwrap_or(kind == PathKind::File);
            args.push("--full-history".into());
            if follow && kind == PathKind::File {
                args.push("--follow".into());
            }
            args.push("--".into());
            args.push(path.clone());
        }
        Ok(Some(args))
    }

    /// Stream matching commits in the order git emits them.
    pub fn log_stream(&self, query: &HistoryQuery) -> Result<CommitStream> {
        let Some(args) = self.log_args(query)? else {
            return Ok(CommitStream::empty());
        };
        let mut cmd = git_command(&self.git, &self.cwd);
        cmd.args(&args).stdout(Stdio::piped()).stderr(Stdio::piped());
        let mut child = cmd.spawn()?;
        let stdout = child.stdout.take().expect("stdout is piped");
        let mut stderr = child.stderr.take().expect("stderr is piped");
        let stderr = std::thread::spawn(move || {
            let mut buf = Vec::new();
            let _ = stderr.read_to_end(&mut buf);
            String::from_utf8_lossy(&buf).trim_end().to_string()
        });
        let process = LiveProcess {
            child,
            stderr,
            args: args.join(" "),
        };
        Ok(CommitStream::live(stdout, process, query.with_paths))
    }

    /// Matching commits, newest author date first.
    pub fn list_commits(&self, query: &HistoryQuery) -> Result<Vec<CommitRecord>> {
        let mut commits = self.log_stream(query)?.collect::<Result<Vec<_>>>()?;
        commits.sort_by(|a, b| b.author_date.cmp(&a.author_date));
        Ok(commits)
    }

    /// Resolve a full or abbreviated hash and read that commit.
    pub fn read_commit(&self, hash_ref: &str) -> Result<CommitRecord> {
        if !is_hash_ref(hash_ref) {
            return Err(RepoError::UnknownCommit(hash_ref.to_string()));
        }
        let rev = format!("{hash_ref}^{{commit}}");
        let out = self.run(&["rev-parse", "--verify", &rev])?;
        if !out.status.success() {
            if out.stderr.contains("ambiguous") {
                return Err(RepoError::AmbiguousPrefix(hash_ref.to_string()));
            }
            if out.stderr.contains("not a git repository") {
                return Err(RepoError::NotARepo);
            }
            return Err(RepoError::UnknownCommit(hash_ref.to_string()));
        }
        let hash = stdout_line(&out);
        let args = ["log", "-1", "-z", LOG_FORMAT, &hash, "--"];
        let out = self.run_ok(&args)?;
        CommitStream::from_bytes(out.stdout, false)
            .next()
            .unwrap_or_else(|| Err(RepoError::UnknownCommit(hash_ref.to_string())))
    }

    /// True when the index differs from `HEAD` (or from the empty tree).
    pub fn has_staged_changes(&self) -> Result<bool> {
        let out = self.run(&["diff", "--cached", "--quiet", "--exit-code"])?;
        match out.status.code() {
            Some(0) => Ok(false),
            Some(1) => Ok(true),
            _ => Err(failed(&["diff", "--cached", "--quiet"], out)),
        }
    }

    /// Commit the staged changes with exactly `message` as the commit message.
    pub fn create_commit(&self, message: &str, allow_empty_stage: bool) -> Result<String> {
        if !allow_empty_stage && !self.has_staged_changes()? {
            return Err(RepoError::NothingStaged);
        }
        let mut args = vec!["commit", "--quiet", "--cleanup=verbatim", "--file=-"];
        if allow_empty_stage {
            args.push("--allow-empty");
        }
        let out = run(&self.git, &self.cwd, &args, Some(message.as_bytes()))?;
        if !out.status.success() {
            return Err(failed(&args, out));
        }
        let out = self.run_ok(&["rev-parse", "--verify", "HEAD"])?;
        Ok(stdout_line(&out))
    }
}

type FieldSource = Box<dyn Iterator<Item = io::Result<Vec<u8>>> + Send>;

struct LiveProcess {
    child: Child,
    stderr: JoinHandle<String>,
    args: String,
}

/// Iterator over commits decoded from the frozen log format.
pub struct CommitStream {
    fields: FieldSource,
    pending: Option<Vec<u8>>,
    process: Option<LiveProcess>,
    with_paths: bool,
    done: bool,
}

impl CommitStream {
    fn empty() -> CommitStream {
        CommitStream::from_bytes(Vec::new(), false)
    }

    fn from_bytes(bytes: Vec<u8>, with_paths: bool) -> CommitStream {
        let fields: Vec<io::Result<Vec<u8>>> =
            bytes.split(|&b| b == 0).map(|f| Ok(f.to_vec())).collect();
        CommitStream {
            fields: Box::new(fields.into_iter()),
            pending: None,
            process: None,
            with_paths,
            done: false,
        }
    }

    fn live(
        stdout: ChildStdout,
        process: LiveProcess,
        with_paths: bool,
    ) -> CommitStream {
        CommitStream {
            fields: Box::new(BufReader::new(stdout).split(0)),
            pending: None,
            process: Some(process),
            with_paths,
            done: false,
        }
    }

    fn next_field(&mut self) -> Option<io::Result<Vec<u8>>> {
        self.pending.take().map(Ok).or_else(|| self.fields.next())
    }

    /// Reap the git process once output is exhausted.
    fn finish(&mut self) -> Result<()> {
        let Some(mut process) = self.process.take() else {
            return Ok(());
        };
        self.fields = Box::new(std::iter::empty());
        let status = process.child.wait()?;
        let stderr = process.stderr.join().unwrap_or_default();
        if status.success() {
            return Ok(());
        }
        if stderr.contains("not a git repository") {
            return Err(RepoError::NotARepo);
        }
        Err(RepoError::GitFailed {
            args: process.args,
            code: status.code(),
            stderr,
        })
    }

    fn next_record(&mut self) -> Option<Result<CommitRecord>> {
        // Skip separators until the next record sentinel.
        let head = loop {
            match self.next_field()? {
                Err(e) => return Some(Err(e.into())),
                Ok(f) if f.first() == Some(&RECORD_SENTINEL) => break f,
                Ok(_) => continue,
            }
        };
        let hash = String::from_utf8_lossy(&head[1..]).into_owned();
        let mut rest = Vec::with_capacity(4);
        for _ in 0..4 {
            match self.next_field() {
                Some(Ok(f)) => rest.push(f),
                Some(Err(e)) => return Some(Err(e.into())),
                None => {
                    return Some(Err(RepoError::Protocol(format!(
                        "truncated record for {hash}"
                    ))))
                }
            }
        }
        let text = |b: &[u8]| String::from_utf8_lossy(b).into_owned();
        let author_date = std::str::from_utf8(&rest[2])
            .ok()
            .and_then(|s| s.trim().parse::<i64>().ok())
            .and_then(|secs| Utc.timestamp_opt(secs, 0).single());
        let Some(author_date) = author_date else {
            return Some(Err(RepoError::Protocol(format!(
                "bad author time for {hash}"
            ))));
        };

        let touched_paths = if self.with_paths {
            let mut paths = Vec::new();
            while let Some(field) = self.next_field() {
                let field = match field {
                    Ok(f) => f,
                    Err(e) => return Some(Err(e.into())),
                };
                if field.first() == Some(&RECORD_SENTINEL) {
                    self.pending = Some(field);
                    break;
                }
                let name = field.strip_prefix(b"\n").unwrap_or(&field);
                if !name.is_empty() {
                    paths.push(text(name));
                }
            }
            Some(paths)
        } else {
            None
        };

        if hash.len() != 40 || !hash.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Some(Err(RepoError::Protocol(format!(
                "bad commit hash `{hash}`"
            ))));
        }
        Some(Ok(CommitRecord {
            hash,
            author_name: text(&rest[0]),
            author_email: text(&rest[1]),
            author_date,
            message: text(&rest[3]),
            touched_paths,
        }))
    }
}

impl Iterator for CommitStream {
    type Item = Result<CommitRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.next_record() {
            Some(Ok(record)) => Some(Ok(record)),
            Some(Err(e)) => {
                self.done = true;
                let _ = self.finish();
                Some(Err(e))
            }
            None => {
                self.done = true;
                self.finish().err().map(Err)
            }
        }
    }
}

impl Drop for CommitStream {
    fn drop(&mut self) {
        if let Some(process) = self.process.as_mut() {
            let _ = process.child.kill();
        }
        let _ = self.finish();
    }
}
