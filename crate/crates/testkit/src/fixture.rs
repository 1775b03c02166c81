use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use lore_core::Repo;
use tempfile::TempDir;

/// First timestamp handed out by [`FixtureRepo::commit`]: 2023-11-14T22:13:20Z.
pub const EPOCH: i64 = 1_700_000_000;

/// A throwaway repository on branch `main` with deterministic identities
/// and dates.
pub struct FixtureRepo {
    dir: TempDir,
    clock: i64,
}

fn git_at(dir: &Path, args: &[&str], env: &[(&str, String)], stdin: Option<&str>) -> String {
    let mut cmd = Command::new("git");
    cmd.current_dir(dir)
        .args(args)
        .env("GIT_CONFIG_NOSYSTEM", "1")
        .env("HOME", dir)
        .env("LC_ALL", "C")
        .stdin(if stdin.is_some() { Stdio::piped() } else { Stdio::null() })
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    for (k, v) in env {
        cmd.env(k, v);
    }
    let mut child = cmd.spawn().expect("git runs");
    if let Some(input) = stdin {
        child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    }
    let out = child.wait_with_output().unwrap();
    assert!(
        out.status.success(),
        "git {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap().trim_end().to_string()
}

fn dated(ts: i64) -> Vec<(&'static str, String)> {
    let stamp = format!("@{ts} +0000");
    vec![("GIT_AUTHOR_DATE", stamp.clone()), ("GIT_COMMITTER_DATE", stamp)]
}

impl FixtureRepo {
    pub fn new() -> FixtureRepo {
        let dir = tempfile::tempdir().unwrap();
        git_at(dir.path(), &["init", "-q", "-b", "main"], &[], None);
        for (key, value) in [
            ("user.name", "Fixture Author"),
            ("user.email", "author@example.com"),
            ("commit.gpgsign", "false"),
            ("core.autocrlf", "false"),
        ] {
            git_at(dir.path(), &["config", key, value], &[], None);
        }
        FixtureRepo { dir, clock: EPOCH }
    }

    pub fn path(&self) -> &Path {
        self.dir.path()
    }

    pub fn repo(&self) -> Repo {
        Repo::discover_with("git", self.path()).unwrap()
    }

    /// Run git in the work tree and return trimmed stdout. Panics on failure.
    pub fn git(&self, args: &[&str]) -> String {
        git_at(self.path(), args, &[], None)
    }

    pub fn write(&self, rel: &str, contents: &str) -> &Self {
        let path = self.path().join(rel);
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(path, contents).unwrap();
        self
    }

    /// Append a line, creating the file if needed.
    pub fn touch(&self, rel: &str, line: &str) -> &Self {
        let path: PathBuf = self.path().join(rel);
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        let mut f = std::fs::OpenOptions::new().create(true).append(true).open(path).unwrap();
        writeln!(f, "{line}").unwrap();
        self
    }

    pub fn remove(&self, rel: &str) -> &Self {
        self.git(&["rm", "-q", rel]);
        self
    }

    pub fn rename(&self, from: &str, to: &str) -> &Self {
        if let Some(parent) = Path::new(to).parent() {
            std::fs::create_dir_all(self.path().join(parent)).unwrap();
        }
        self.git(&["mv", from, to]);
        self
    }

    /// Stage everything and commit with `message` verbatim at time `ts`.
    pub fn commit_at(&self, message: &str, ts: i64) -> String {
        self.git(&["add", "-A"]);
        git_at(
            self.path(),
            &["commit", "-q", "--allow-empty", "--cleanup=verbatim", "-F", "-"],
            &dated(ts),
            Some(message),
        );
        self.git(&["rev-parse", "HEAD"])
    }

    /// Commit one hour after the previous [`FixtureRepo::commit`].
    pub fn commit(&mut self, message: &str) -> String {
        self.clock += 3600;
        self.commit_at(message, self.clock)
    }

    /// The timestamp the next [`FixtureRepo::commit`] will use.
    pub fn next_time(&self) -> i64 {
        self.clock + 3600
    }

    pub fn checkout_new(&self, branch: &str) {
        self.git(&["checkout", "-q", "-b", branch]);
    }

    pub fn checkout(&self, branch: &str) {
        self.git(&["checkout", "-q", branch]);
    }

    /// Merge `branch` into the current branch with a merge commit.
    pub fn merge(&mut self, branch: &str, message: &str) -> String {
        self.clock += 3600;
        git_at(
            self.path(),
            &["merge", "-q", "--no-ff", "-m", message, branch],
            &dated(self.clock),
            None,
        );
        self.git(&["rev-parse", "HEAD"])
    }

    /// Make `original` read with a different message while keeping its hash.
    pub fn replace_message(&self, original: &str, message: &str) {
        let raw = self.git(&["cat-file", "commit", original]);
        let headers = raw.split_once("\n\n").map_or(raw.as_str(), |(h, _)| h);
        let content = format!("{headers}\n\n{message}");
        let replacement = git_at(
            self.path(),
            &["hash-object", "-t", "commit", "-w", "--stdin"],
            &[],
            Some(&content),
        );
        self.git(&["replace", "-f", original, &replacement]);
    }
}

impl Default for FixtureRepo {
    fn default() -> Self {
        FixtureRepo::new()
    }
}
