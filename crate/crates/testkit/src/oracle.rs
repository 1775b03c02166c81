//! Slow, obvious reimplementations of the history queries.
//!
//! History is read with plumbing only (`rev-list`, `cat-file`, `diff-tree`)
//! and every fold is a nested loop over the whole commit list, so agreement
//! with the engine says something about both.

use std::collections::HashMap;
use std::path::Path;
use std::process::Command;

use chrono::{DateTime, TimeZone, Utc};
use lore_core::duration::AgeThreshold;
use lore_core::format::{parse_message, LoreAtom};
use lore_core::query::{
    ConstraintItem, CoverageItem, CoverageMap, DirectiveItem, RejectedItem, StaleEntry, StaleKind,
    TrailerCounts, STALE_RULE,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Change {
    /// Added, modified, deleted or type-changed.
    Plain(String),
    Renamed { from: String, to: String },
}

impl Change {
    fn touches(&self, path: &str) -> bool {
        match self {
            Change::Plain(p) => p == path,
            Change::Renamed { from, to } => from == path || to == path,
        }
    }

    fn paths(&self) -> Vec<&str> {
        match self {
            Change::Plain(p) => vec![p],
            Change::Renamed { from, to } => vec![from, to],
        }
    }
}

#[derive(Clone, Debug)]
pub struct OracleCommit {
    pub hash: String,
    pub parents: Vec<String>,
    pub author_name: String,
    pub author_email: String,
    pub author_date: DateTime<Utc>,
    pub message: String,
    pub changes: Vec<Change>,
}

impl OracleCommit {
    pub fn is_merge(&self) -> bool {
        self.parents.len() > 1
    }

    /// The Lore atom, if the message parses and carries a reserved trailer.
    pub fn lore_atom(&self) -> Option<LoreAtom> {
        parse_message(&self.message).atom.filter(|a| a.has_lore_trailers())
    }

    /// True when `self` comes before `other` in newest-first fold order.
    pub fn newer_than(&self, other: &OracleCommit) -> bool {
        (self.author_date, std::cmp::Reverse(&self.hash)) > (other.author_date, std::cmp::Reverse(&other.hash))
    }
}

fn git(dir: &Path, args: &[&str]) -> Vec<u8> {
    let out = Command::new("git")
        .current_dir(dir)
        .args(args)
        .env("LC_ALL", "C")
        .output()
        .unwrap();
    assert!(out.status.success(), "git {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn parse_raw_commit(hash: &str, raw: &[u8]) -> OracleCommit {
    let text = String::from_utf8_lossy(raw);
    let (headers, message) = text.split_once("\n\n").unwrap_or((&text, ""));
    let mut parents = Vec::new();
    let mut author = None;
    for line in headers.lines() {
        if let Some(p) = line.strip_prefix("parent ") {
            parents.push(p.to_string());
        } else if let Some(a) = line.strip_prefix("author ") {
            // Name <email> 1700000000 +0000
            let open = a.rfind('<').unwrap();
            let close = a.rfind('>').unwrap();
            let mut stamp = a[close + 1..].split_whitespace();
            let secs: i64 = stamp.next().unwrap().parse().unwrap();
            author = Some((
                a[..open].trim().to_string(),
                a[open + 1..close].to_string(),
                Utc.timestamp_opt(secs, 0).unwrap(),
            ));
        }
    }
    let (author_name, author_email, author_date) = author.expect("author header");
    OracleCommit {
        hash: hash.to_string(),
        parents,
        author_name,
        author_email,
        author_date,
        message: message.to_string(),
        changes: Vec::new(),
    }
}

fn changes_of(dir: &Path, commit: &OracleCommit) -> Vec<Change> {
    if commit.is_merge() {
        return Vec::new();
    }
    let out = git(
        dir,
        &["diff-tree", "-r", "-z", "--root", "--no-commit-id", "--name-status", "-M", &commit.hash],
    );
    let fields: Vec<String> = out
        .split(|&b| b == 0)
        .filter(|f| !f.is_empty())
        .map(|f| String::from_utf8_lossy(f).into_owned())
        .collect();
    let mut changes = Vec::new();
    let mut i = 0;
    while i < fields.len() {
        let status = &fields[i];
        if status.starts_with('R') || status.starts_with('C') {
            let (from, to) = (fields[i + 1].clone(), fields[i + 2].clone());
            changes.push(if status.starts_with('R') {
                Change::Renamed { from, to }
            } else {
                Change::Plain(to)
            });
            i += 3;
        } else {
            changes.push(Change::Plain(fields[i + 1].clone()));
            i += 2;
        }
    }
    changes
}

/// Every commit reachable from `HEAD`, in `rev-list` order.
pub struct History {
    pub commits: Vec<OracleCommit>,
}

impl History {
    pub fn load(dir: &Path) -> History {
        let list = String::from_utf8(git(dir, &["rev-list", "HEAD"])).unwrap();
        let commits = list
            .lines()
            .map(|hash| {
                let raw = git(dir, &["cat-file", "commit", hash]);
                let mut c = parse_raw_commit(hash, &raw);
                c.changes = changes_of(dir, &c);
                c
            })
            .collect();
        History { commits }
    }

    pub fn get(&self, hash: &str) -> Option<&OracleCommit> {
        self.commits.iter().find(|c| c.hash == hash)
    }

    /// Non-merge commits touching `path`. A directory matches anything
    /// beneath it; with `follow`, a file's earlier names are tracked
    /// through renames.
    pub fn scoped(&self, path: &str, is_dir: bool, follow: bool) -> Vec<&OracleCommit> {
        let prefix = format!("{}/", path.trim_end_matches('/'));
        let mut name = path.to_string();
        let mut hits = Vec::new();
        for c in self.commits.iter().filter(|c| !c.is_merge()) {
            let touched = if is_dir {
                c.changes.iter().flat_map(Change::paths).any(|p| p.starts_with(&prefix))
            } else {
                c.changes.iter().any(|ch| ch.touches(&name))
            };
            if !touched {
                continue;
            }
            hits.push(c);
            if follow && !is_dir {
                for ch in &c.changes {
                    if let Change::Renamed { from, to } = ch {
                        if *to == name {
                            name = from.clone();
                            break;
                        }
                    }
                }
            }
        }
        hits
    }
}

/// Sort into newest-first fold order by repeated selection.
pub fn fold<'a>(commits: &[&'a OracleCommit]) -> Vec<&'a OracleCommit> {
    let mut rest: Vec<&OracleCommit> = commits.to_vec();
    let mut out = Vec::new();
    while !rest.is_empty() {
        let mut best = 0;
        for i in 1..rest.len() {
            if rest[i].newer_than(rest[best]) {
                best = i;
            }
        }
        out.push(rest.remove(best));
    }
    out
}

/// Counts, non-Lore total and atom hashes (fold order) for `context`.
pub fn context(scoped: &[&OracleCommit]) -> (TrailerCounts, usize, Vec<String>) {
    let mut counts = TrailerCounts::default();
    let mut non_lore = 0;
    let mut hashes = Vec::new();
    for c in fold(scoped) {
        match c.lore_atom() {
            Some(a) => {
                counts.constraints += a.constraints.len();
                counts.rejected += a.rejected.len();
                counts.directives += a.directives.len();
                counts.tested += a.tested.len();
                counts.not_tested += a.not_tested.len();
                counts.related += a.related.len();
                counts.extensions += a.extensions.len();
                hashes.push(c.hash.clone());
            }
            None => non_lore += 1,
        }
    }
    (counts, non_lore, hashes)
}

fn squash(text: &str) -> String {
    let mut out = String::new();
    for word in text.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

fn later_touches(scoped: &[&OracleCommit], c: &OracleCommit) -> usize {
    scoped.iter().filter(|o| o.newer_than(c)).count()
}

fn aged(c: &OracleCommit, now: DateTime<Utc>, threshold: &AgeThreshold) -> bool {
    (now - c.author_date).num_seconds() > threshold.total_days() as i64 * 86_400
}

pub fn constraints(
    scoped: &[&OracleCommit],
    now: DateTime<Utc>,
    threshold: &AgeThreshold,
) -> Vec<ConstraintItem> {
    let mut out: Vec<ConstraintItem> = Vec::new();
    for c in fold(scoped) {
        let Some(atom) = c.lore_atom() else { continue };
        for k in atom.constraints {
            // Keep only the newest statement of each text.
            let newer_exists = scoped.iter().any(|o| {
                o.newer_than(c)
                    && o.lore_atom().is_some_and(|a| {
                        a.constraints.iter().any(|x| squash(&x.text) == squash(&k.text))
                    })
            });
            let earlier_in_same = out
                .iter()
                .any(|e| e.source_hash == c.hash && squash(&e.text) == squash(&k.text));
            if newer_exists || earlier_in_same {
                continue;
            }
            out.push(ConstraintItem {
                text: k.text,
                source_hash: c.hash.clone(),
                author_date: c.author_date,
                stale: aged(c, now, threshold) && later_touches(scoped, c) > 0,
            });
        }
    }
    out
}

pub fn rejected(scoped: &[&OracleCommit]) -> Vec<RejectedItem> {
    let mut out = Vec::new();
    for c in fold(scoped) {
        for r in c.lore_atom().map(|a| a.rejected).unwrap_or_default() {
            out.push(RejectedItem {
                alternative: r.alternative,
                reason: r.reason,
                source_hash: c.hash.clone(),
                author_date: c.author_date,
            });
        }
    }
    out
}

pub fn directives(scoped: &[&OracleCommit]) -> Vec<DirectiveItem> {
    let mut out = Vec::new();
    for c in fold(scoped) {
        for d in c.lore_atom().map(|a| a.directives).unwrap_or_default() {
            out.push(DirectiveItem {
                text: d.text,
                source_hash: c.hash.clone(),
                author_date: c.author_date,
            });
        }
    }
    out
}

pub fn coverage(scoped: &[&OracleCommit]) -> CoverageMap {
    let mut map = CoverageMap::default();
    for c in fold(scoped) {
        let Some(atom) = c.lore_atom() else { continue };
        let item = |t: &lore_core::format::TestEntry| CoverageItem {
            description: t.description.clone(),
            method: t.method.clone(),
            source_hash: c.hash.clone(),
            author_date: c.author_date,
        };
        for t in &atom.not_tested {
            let superseded = scoped.iter().any(|o| {
                o.newer_than(c)
                    && o.lore_atom()
                        .is_some_and(|a| a.tested.iter().any(|x| x.description == t.description))
            });
            if !superseded {
                map.not_tested.push(item(t));
            }
        }
        map.tested.extend(atom.tested.iter().map(item));
    }
    map
}

fn stale_entries(
    c: &OracleCommit,
    path: &str,
    later: usize,
    now: DateTime<Utc>,
    threshold: &AgeThreshold,
) -> Vec<StaleEntry> {
    let Some(atom) = c.lore_atom() else { return Vec::new() };
    if later == 0 || !aged(c, now, threshold) {
        return Vec::new();
    }
    let entry = |kind, text: &str| StaleEntry {
        kind,
        text: text.to_string(),
        path: path.to_string(),
        source_hash: c.hash.clone(),
        author_date: c.author_date,
        rule: STALE_RULE,
        later_touch_count: later,
    };
    let mut out: Vec<StaleEntry> =
        atom.constraints.iter().map(|k| entry(StaleKind::Constraint, &k.text)).collect();
    out.extend(atom.directives.iter().map(|d| entry(StaleKind::Directive, &d.text)));
    out
}

/// Stale entries for one path.
pub fn stale_scoped(
    scoped: &[&OracleCommit],
    path: &str,
    now: DateTime<Utc>,
    threshold: &AgeThreshold,
) -> Vec<StaleEntry> {
    fold(scoped)
        .into_iter()
        .flat_map(|c| stale_entries(c, path, later_touches(scoped, c), now, threshold))
        .collect()
}

/// Stale entries for every path ever touched, grouped by path.
pub fn stale_all(history: &History, now: DateTime<Utc>, threshold: &AgeThreshold) -> Vec<StaleEntry> {
    let mut by_path: HashMap<&str, Vec<&OracleCommit>> = HashMap::new();
    for c in history.commits.iter().filter(|c| !c.is_merge()) {
        for p in c.changes.iter().flat_map(Change::paths) {
            let list = by_path.entry(p).or_default();
            if !list.iter().any(|x| x.hash == c.hash) {
                list.push(c);
            }
        }
    }
    let mut paths: Vec<&str> = by_path.keys().copied().collect();
    paths.sort();
    paths
        .into_iter()
        .flat_map(|p| stale_scoped(&by_path[p], p, now, threshold))
        .collect()
}

/// Minimum hop count from `root` to every commit reachable through
/// `Related:` within `max_depth`, plus `(from, reference)` pairs that name
/// no commit. Computed by relaxing distances until nothing changes.
pub fn related_reach(
    history: &History,
    root: &str,
    max_depth: usize,
) -> (HashMap<String, usize>, Vec<(String, String)>) {
    let resolve = |r: &str| -> Option<String> {
        let r = r.to_ascii_lowercase();
        let hits: Vec<&OracleCommit> = history.commits.iter().filter(|c| c.hash.starts_with(&r)).collect();
        (hits.len() == 1).then(|| hits[0].hash.clone())
    };
    let mut dist: HashMap<String, usize> = HashMap::from([(root.to_string(), 0)]);
    loop {
        let mut changed = false;
        let snapshot: Vec<(String, usize)> = dist.iter().map(|(k, v)| (k.clone(), *v)).collect();
        for (hash, d) in snapshot {
            if d >= max_depth {
                continue;
            }
            let atom = history.get(&hash).and_then(|c| parse_message(&c.message).atom);
            for r in atom.map(|a| a.related).unwrap_or_default() {
                if let Some(target) = resolve(r.as_str()) {
                    let best = dist.get(&target).copied().unwrap_or(usize::MAX);
                    if d + 1 < best {
                        dist.insert(target, d + 1);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut unresolved = Vec::new();
    for (hash, d) in &dist {
        if *d >= max_depth {
            continue;
        }
        let atom = history.get(hash).and_then(|c| parse_message(&c.message).atom);
        for r in atom.map(|a| a.related).unwrap_or_default() {
            if resolve(r.as_str()).is_none() {
                unresolved.push((hash.clone(), r.to_string()));
            }
        }
    }
    unresolved.sort();
    (dist, unresolved)
}

/// Run every query on every path of `history` through `engine` and the
/// brute-force versions above. Returns one line per disagreement and the
/// number of comparisons made.
pub fn compare_engine(
    engine: &lore_core::QueryEngine<'_>,
    history: &History,
    files: &[String],
    dirs: &[String],
    threshold: &AgeThreshold,
) -> (Vec<String>, usize) {
    use lore_core::query::QueryOptions;

    let now = engine.now();
    let opts = QueryOptions::default();
    let mut problems = Vec::new();
    let mut checks = 0;
    let mut check = |what: String, same: bool| {
        checks += 1;
        if !same {
            problems.push(what);
        }
    };

    let scopes = files.iter().map(|f| (f, false)).chain(dirs.iter().map(|d| (d, true)));
    for (path, is_dir) in scopes {
        let scoped = history.scoped(path, is_dir, !is_dir);

        let ctx = engine.context(path, &opts).unwrap();
        let (counts, non_lore, hashes) = context(&scoped);
        let ours: Vec<String> = ctx.atoms.iter().map(|a| a.commit.hash.clone()).collect();
        check(format!("context {path}: counts"), ctx.counts == counts);
        check(format!("context {path}: non_lore_commits"), ctx.non_lore_commits == non_lore);
        check(format!("context {path}: atoms {ours:?} vs {hashes:?}"), ours == hashes);

        let got = engine.constraints(path, &opts).unwrap().entries;
        let want = constraints(&scoped, now, threshold);
        check(format!("constraints {path}: {got:#?} vs {want:#?}"), got == want);
        let got = engine.rejected(path, &opts).unwrap().entries;
        check(format!("rejected {path}"), got == rejected(&scoped));
        let got = engine.directives(path, &opts).unwrap().entries;
        check(format!("directives {path}"), got == directives(&scoped));
        let got = engine.coverage(path, &opts).unwrap();
        check(format!("coverage {path}"), got == coverage(&scoped));
        let got = engine.stale(Some(path), threshold, &opts).unwrap().entries;
        let want = stale_scoped(&scoped, path, now, threshold);
        check(format!("stale {path}: {got:#?} vs {want:#?}"), got == want);
    }
    let got = engine.stale(None, threshold, &opts).unwrap().entries;
    let want = stale_all(history, now, threshold);
    check(format!("stale (all paths): {} vs {} entries", got.len(), want.len()), got == want);

    for c in history.commits.iter().filter(|c| c.lore_atom().is_some()) {
        for depth in [1, 3] {
            let chain = engine.related_chain(&c.hash, depth).unwrap();
            let (reach, unresolved) = related_reach(history, &c.hash, depth);
            let mut ours: Vec<String> = chain.atoms.iter().map(|a| a.commit.hash.clone()).collect();
            ours.sort();
            let mut want: Vec<String> = reach.keys().cloned().collect();
            want.sort();
            check(format!("related {} depth {depth}: reach", &c.hash[..12]), ours == want);
            let mut ours_unresolved: Vec<(String, String)> = chain
                .unresolved
                .iter()
                .map(|u| (u.from_hash.clone(), u.reference.clone()))
                .collect();
            ours_unresolved.sort();
            check(format!("related {} depth {depth}: unresolved", &c.hash[..12]), ours_unresolved == unresolved);
        }
    }
    (problems, checks)
}
