//! Path-scoped questions over Lore history.
//!
//! Every query enumerates the commits touching a path, parses each message,
//! and folds the results newest first. The fold order is author date
//! descending with ties broken by ascending hash, so output never depends on
//! how git happened to order commits. "Later" and "newer" below always mean
//! earlier in that order.

use std::collections::{HashMap, HashSet, VecDeque};

use chrono::{DateTime, Utc};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::duration::AgeThreshold;
use crate::format::{parse_message, LoreAtom, ParseReport};
use crate::repo::{CommitRecord, HistoryQuery, Repo, RepoError};
use crate::timefmt::{self, iso8601};

/// The only staleness trigger: old enough and the path changed since.
pub const STALE_RULE: &str = "age+later-touch";

/// A parsed atom together with the commit that carries it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttributedAtom {
    pub atom: LoreAtom,
    pub commit: CommitRecord,
}

impl Serialize for AttributedAtom {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("AttributedAtom", 5)?;
        s.serialize_field("hash", &self.commit.hash)?;
        s.serialize_field("author_name", &self.commit.author_name)?;
        s.serialize_field("author_email", &self.commit.author_email)?;
        s.serialize_field("author_date", &iso8601(&self.commit.author_date))?;
        s.serialize_field("atom", &self.atom)?;
        s.end()
    }
}

/// Per-kind trailer totals over a set of atoms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TrailerCounts {
    pub constraints: usize,
    pub rejected: usize,
    pub directives: usize,
    pub tested: usize,
    pub not_tested: usize,
    pub related: usize,
    pub extensions: usize,
}

impl TrailerCounts {
    pub fn add(&mut self, atom: &LoreAtom) {
        self.constraints += atom.constraints.len();
        self.rejected += atom.rejected.len();
        self.directives += atom.directives.len();
        self.tested += atom.tested.len();
        self.not_tested += atom.not_tested.len();
        self.related += atom.related.len();
        self.extensions += atom.extensions.len();
    }
}

/// A `Related:` reference that could not be followed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UnresolvedRef {
    pub from_hash: String,
    pub reference: String,
    pub reason: &'static str,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ContextSummary {
    pub path: String,
    pub counts: TrailerCounts,
    pub non_lore_commits: usize,
    pub atoms: Vec<AttributedAtom>,
    /// Commits reached through `Related:` trailers that are not already in `atoms`.
    pub related: Vec<AttributedAtom>,
    pub unresolved_related: Vec<UnresolvedRef>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConstraintItem {
    pub text: String,
    pub source_hash: String,
    #[serde(serialize_with = "timefmt::serialize")]
    pub author_date: DateTime<Utc>,
    pub stale: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ConstraintSet {
    pub entries: Vec<ConstraintItem>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RejectedItem {
    pub alternative: String,
    pub reason: Option<String>,
    pub source_hash: String,
    #[serde(serialize_with = "timefmt::serialize")]
    pub author_date: DateTime<Utc>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RejectedLedger {
    pub entries: Vec<RejectedItem>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DirectiveItem {
    pub text: String,
    pub source_hash: String,
    #[serde(serialize_with = "timefmt::serialize")]
    pub author_date: DateTime<Utc>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DirectiveList {
    pub entries: Vec<DirectiveItem>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoverageItem {
    pub description: String,
    pub method: Option<String>,
    pub source_hash: String,
    #[serde(serialize_with = "timefmt::serialize")]
    pub author_date: DateTime<Utc>,
}

/// Tested / Not-tested claims. A not-tested entry disappears once a newer
/// commit records a Tested entry with exactly the same description.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CoverageMap {
    pub tested: Vec<CoverageItem>,
    pub not_tested: Vec<CoverageItem>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StaleKind {
    Constraint,
    Directive,
}

impl StaleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StaleKind::Constraint => "constraint",
            StaleKind::Directive => "directive",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StaleEntry {
    pub kind: StaleKind,
    pub text: String,
    pub path: String,
    pub source_hash: String,
    #[serde(serialize_with = "timefmt::serialize")]
    pub author_date: DateTime<Utc>,
    pub rule: &'static str,
    pub later_touch_count: usize,
}

/// Flagged entries grouped by path (ascending), newest first within a path.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StaleReport {
    pub entries: Vec<StaleEntry>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RelatedChain {
    pub atoms: Vec<AttributedAtom>,
    pub unresolved: Vec<UnresolvedRef>,
}

/// History filters shared by every query.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QueryOptions {
    pub max_count: Option<usize>,
    pub since: Option<DateTime<Utc>>,
    pub until: Option<DateTime<Utc>>,
    pub follow_renames: Option<bool>,
    pub include_merges: bool,
    /// How many `Related:` hops `context` follows; 0 disables expansion.
    pub related_depth: usize,
}

/// Resolves a commit reference. Implemented by [`Repo`]; tests substitute
/// in-memory graphs.
pub trait CommitLookup {
    fn lookup(&self, hash_ref: &str) -> Result<CommitRecord, RepoError>;
}

impl CommitLookup for Repo {
    fn lookup(&self, hash_ref: &str) -> Result<CommitRecord, RepoError> {
        self.read_commit(hash_ref)
    }
}

/// Sort newest first: author date descending, then hash ascending.
pub fn fold_order(commits: &mut [CommitRecord]) {
    commits.sort_by(|a, b| {
        b.author_date
            .cmp(&a.author_date)
            .then_with(|| a.hash.cmp(&b.hash))
    });
}

/// True when `atom_date` is strictly older than `now - threshold`.
pub fn is_aged(atom_date: DateTime<Utc>, now: DateTime<Utc>, threshold: &AgeThreshold) -> bool {
    atom_date < now - threshold.as_delta()
}

struct Parsed {
    commit: CommitRecord,
    report: ParseReport,
}

impl Parsed {
    fn lore_atom(&self) -> Option<&LoreAtom> {
        self.report.atom.as_ref().filter(|a| a.has_lore_trailers())
    }
}

pub struct QueryEngine<'r> {
    repo: &'r Repo,
    now: DateTime<Utc>,
    stale_after: AgeThreshold,
}

impl<'r> QueryEngine<'r> {
    pub fn new(repo: &'r Repo, stale_after: AgeThreshold) -> QueryEngine<'r> {
        QueryEngine {
            repo,
            now: Utc::now(),
            stale_after,
        }
    }

    /// Pin the clock used for staleness.
    pub fn at(mut self, now: DateTime<Utc>) -> QueryEngine<'r> {
        self.now = now;
        self
    }

    pub fn now(&self) -> DateTime<Utc> {
        self.now
    }

    fn history(&self, path: Option<&str>, opts: &QueryOptions, with_paths: bool) -> Result<Vec<Parsed>, RepoError> {
        let query = HistoryQuery {
            path: path.map(str::to_string),
            rev_range: None,
            max_count: opts.max_count,
            since: opts.since,
            until: opts.until,
            follow_renames: opts.follow_renames,
            include_merges: opts.include_merges,
            with_paths,
        };
        let mut commits = self.repo.log_stream(&query)?.collect::<Result<Vec<_>, _>>()?;
        fold_order(&mut commits);
        Ok(commits
            .into_iter()
            .map(|commit| Parsed {
                report: parse_message(&commit.message),
                commit,
            })
            .collect())
    }

    /// Every Lore atom on `path`, newest first, with trailer totals.
    pub fn context(&self, path: &str, opts: &QueryOptions) -> Result<ContextSummary, RepoError> {
        let history = self.history(Some(path), opts, false)?;
        let mut counts = TrailerCounts::default();
        let mut non_lore_commits = 0;
        let mut atoms = Vec::new();
        for entry in history {
            match entry.lore_atom() {
                Some(atom) => {
                    counts.add(atom);
                    atoms.push(AttributedAtom {
                        atom: atom.clone(),
                        commit: entry.commit,
                    });
                }
                None => non_lore_commits += 1,
            }
        }

        let (related, unresolved_related) = if opts.related_depth > 0 && !atoms.is_empty() {
            let roots: Vec<CommitRecord> = atoms.iter().map(|a| a.commit.clone()).collect();
            let walk = walk_related(self.repo, roots, opts.related_depth);
            let in_scope: HashSet<&str> = atoms.iter().map(|a| a.commit.hash.as_str()).collect();
            let extra = walk
                .atoms
                .into_iter()
                .filter(|a| !in_scope.contains(a.commit.hash.as_str()))
                .collect();
            (extra, walk.unresolved)
        } else {
            (Vec::new(), Vec::new())
        };

        Ok(ContextSummary {
            path: path.to_string(),
            counts,
            non_lore_commits,
            atoms,
            related,
            unresolved_related,
        })
    }

    /// Distinct constraints on `path`, each sourced to its newest statement.
    pub fn constraints(&self, path: &str, opts: &QueryOptions) -> Result<ConstraintSet, RepoError> {
        let history = self.history(Some(path), opts, false)?;
        let mut seen = HashSet::new();
        let mut entries = Vec::new();
        for (later_touches, entry) in history.iter().enumerate() {
            let Some(atom) = entry.lore_atom() else {
                continue;
            };
            let stale = later_touches > 0
                && is_aged(entry.commit.author_date, self.now, &self.stale_after);
            for c in &atom.constraints {
                if seen.insert(normalize_whitespace(&c.text)) {
                    entries.push(ConstraintItem {
                        text: c.text.clone(),
                        source_hash: entry.commit.hash.clone(),
                        author_date: entry.commit.author_date,
                        stale,
                    });
                }
            }
        }
        Ok(ConstraintSet { entries })
    }

    pub fn rejected(&self, path: &str, opts: &QueryOptions) -> Result<RejectedLedger, RepoError> {
        let history = self.history(Some(path), opts, false)?;
        let entries = history
            .iter()
            .filter_map(|e| e.lore_atom().map(|a| (e, a)))
            .flat_map(|(e, atom)| {
                atom.rejected.iter().map(move |r| RejectedItem {
                    alternative: r.alternative.clone(),
                    reason: r.reason.clone(),
                    source_hash: e.commit.hash.clone(),
                    author_date: e.commit.author_date,
                })
            })
            .collect();
        Ok(RejectedLedger { entries })
    }

    pub fn directives(&self, path: &str, opts: &QueryOptions) -> Result<DirectiveList, RepoError> {
        let history = self.history(Some(path), opts, false)?;
        let entries = history
            .iter()
            .filter_map(|e| e.lore_atom().map(|a| (e, a)))
            .flat_map(|(e, atom)| {
                atom.directives.iter().map(move |d| DirectiveItem {
                    text: d.text.clone(),
                    source_hash: e.commit.hash.clone(),
                    author_date: e.commit.author_date,
                })
            })
            .collect();
        Ok(DirectiveList { entries })
    }

    pub fn coverage(&self, path: &str, opts: &QueryOptions) -> Result<CoverageMap, RepoError> {
        let history = self.history(Some(path), opts, false)?;
        let mut map = CoverageMap::default();
        // Descriptions tested in strictly newer commits than the one being visited.
        let mut tested_newer: HashSet<String> = HashSet::new();
        for entry in &history {
            let Some(atom) = entry.lore_atom() else {
                continue;
            };
            let item = |description: &str, method: &Option<String>| CoverageItem {
                description: description.to_string(),
                method: method.clone(),
                source_hash: entry.commit.hash.clone(),
                author_date: entry.commit.author_date,
            };
            for t in &atom.not_tested {
                if !tested_newer.contains(&t.description) {
                    map.not_tested.push(item(&t.description, &t.method));
                }
            }
            for t in &atom.tested {
                map.tested.push(item(&t.description, &t.method));
            }
            tested_newer.extend(atom.tested.iter().map(|t| t.description.clone()));
        }
        Ok(map)
    }

    /// Constraints and directives that are older than `older_than` on a path
    /// that has changed since. With no scope every touched path is checked.
    pub fn stale(
        &self,
        scope: Option<&str>,
        older_than: &AgeThreshold,
        opts: &QueryOptions,
    ) -> Result<StaleReport, RepoError> {
        let history = self.history(scope, opts, scope.is_none())?;
        let mut entries = Vec::new();
        let mut touches: HashMap<String, usize> = HashMap::new();
        for (index, entry) in history.iter().enumerate() {
            let atom = entry.lore_atom();
            let aged = is_aged(entry.commit.author_date, self.now, older_than);
            let paths: Vec<(String, usize)> = match scope {
                Some(path) => vec![(path.to_string(), index)],
                None => entry
                    .commit
                    .touched_paths
                    .iter()
                    .flatten()
                    .map(|p| (p.clone(), touches.get(p).copied().unwrap_or(0)))
                    .collect(),
            };
            if let Some(atom) = atom.filter(|_| aged) {
                for (path, later_touch_count) in paths.iter().filter(|(_, n)| *n > 0) {
                    let flagged = atom
                        .constraints
                        .iter()
                        .map(|c| (StaleKind::Constraint, &c.text))
                        .chain(atom.directives.iter().map(|d| (StaleKind::Directive, &d.text)));
                    for (kind, text) in flagged {
                        entries.push(StaleEntry {
                            kind,
                            text: text.clone(),
                            path: path.clone(),
                            source_hash: entry.commit.hash.clone(),
                            author_date: entry.commit.author_date,
                            rule: STALE_RULE,
                            later_touch_count: *later_touch_count,
                        });
                    }
                }
            }
            if scope.is_none() {
                for path in entry.commit.touched_paths.iter().flatten() {
                    *touches.entry(path.clone()).or_default() += 1;
                }
            }
        }
        // Stable: keeps newest-first order inside each path.
        entries.sort_by(|a, b| a.path.cmp(&b.path));
        Ok(StaleReport { entries })
    }

    /// Breadth-first walk of `Related:` references starting at `hash_ref`.
    pub fn related_chain(&self, hash_ref: &str, max_depth: usize) -> Result<RelatedChain, RepoError> {
        related_chain(self.repo, hash_ref, max_depth)
    }
}

/// Collapse runs of whitespace to single spaces and trim.
pub fn normalize_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Breadth-first walk of `Related:` references starting at `hash_ref`,
/// following at most `max_depth` hops. Visited commits are never revisited,
/// so cycles terminate. Only an unresolvable root is an error.
pub fn related_chain<L: CommitLookup + ?Sized>(
    lookup: &L,
    hash_ref: &str,
    max_depth: usize,
) -> Result<RelatedChain, RepoError> {
    let root = lookup.lookup(hash_ref)?;
    Ok(walk_related(lookup, vec![root], max_depth))
}

fn walk_related<L: CommitLookup + ?Sized>(
    lookup: &L,
    roots: Vec<CommitRecord>,
    max_depth: usize,
) -> RelatedChain {
    let mut chain = RelatedChain::default();
    let mut visited: HashSet<String> = HashSet::new();
    let mut queue: VecDeque<(CommitRecord, usize)> = VecDeque::new();
    for root in roots {
        if visited.insert(root.hash.clone()) {
            queue.push_back((root, 0));
        }
    }
    let mut resolved: HashMap<String, Result<CommitRecord, &'static str>> = HashMap::new();

    while let Some((commit, depth)) = queue.pop_front() {
        let report = parse_message(&commit.message);
        let Some(atom) = report.atom else {
            chain.unresolved.push(UnresolvedRef {
                from_hash: commit.hash.clone(),
                reference: commit.hash.clone(),
                reason: "empty-message",
            });
            continue;
        };
        if depth < max_depth {
            for reference in &atom.related {
                let target = resolved
                    .entry(reference.as_str().to_ascii_lowercase())
                    .or_insert_with(|| lookup.lookup(reference.as_str()).map_err(|e| e.code()));
                match target {
                    Ok(next) => {
                        if visited.insert(next.hash.clone()) {
                            queue.push_back((next.clone(), depth + 1));
                        }
                    }
                    Err(reason) => chain.unresolved.push(UnresolvedRef {
                        from_hash: commit.hash.clone(),
                        reference: reference.to_string(),
                        reason,
                    }),
                }
            }
        }
        chain.atoms.push(AttributedAtom { atom, commit });
    }
    chain
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    struct Graph(HashMap<String, CommitRecord>);

    impl Graph {
        fn new(edges: &[(&str, &[&str])]) -> Graph {
            let mut map = HashMap::new();
            for (i, (name, targets)) in edges.iter().enumerate() {
                let hash = hash_of(name);
                let mut message = format!("commit {name}\n");
                if !targets.is_empty() {
                    message.push('\n');
                    for t in targets.iter() {
                        let target = if t.len() >= 7 { t.to_string() } else { hash_of(t) };
                        message.push_str(&format!("Related: {target}\n"));
                    }
                }
                map.insert(
                    hash.clone(),
                    CommitRecord {
                        hash,
                        author_name: "a".into(),
                        author_email: "a@x".into(),
                        author_date: Utc.timestamp_opt(1_000 + i as i64, 0).unwrap(),
                        message,
                        touched_paths: None,
                    },
                );
            }
            Graph(map)
        }
    }

    fn hash_of(name: &str) -> String {
        let byte = name.as_bytes()[0];
        format!("{byte:02x}").repeat(20)
    }

    impl CommitLookup for Graph {
        fn lookup(&self, hash_ref: &str) -> Result<CommitRecord, RepoError> {
            let hits: Vec<_> = self
                .0
                .values()
                .filter(|c| c.hash.starts_with(&hash_ref.to_ascii_lowercase()))
                .collect();
            match hits.as_slice() {
                [one] => Ok((*one).clone()),
                [] => Err(RepoError::UnknownCommit(hash_ref.into())),
                _ => Err(RepoError::AmbiguousPrefix(hash_ref.into())),
            }
        }
    }

    fn names(chain: &RelatedChain) -> Vec<String> {
        chain
            .atoms
            .iter()
            .map(|a| a.atom.intent.trim_start_matches("commit ").to_string())
            .collect()
    }

    #[test]
    fn follows_a_chain() {
        let g = Graph::new(&[("A", &["B"]), ("B", &["C"]), ("C", &[])]);
        let chain = related_chain(&g, &hash_of("A"), 10).unwrap();
        assert_eq!(names(&chain), ["A", "B", "C"]);
        assert!(chain.unresolved.is_empty());
    }

    #[test]
    fn depth_limits_hops() {
        let g = Graph::new(&[("A", &["B"]), ("B", &["C"]), ("C", &[])]);
        assert_eq!(names(&related_chain(&g, &hash_of("A"), 1).unwrap()), ["A", "B"]);
        assert_eq!(names(&related_chain(&g, &hash_of("A"), 0).unwrap()), ["A"]);
    }

    #[test]
    fn cycles_terminate() {
        let g = Graph::new(&[("A", &["B"]), ("B", &["A"])]);
        assert_eq!(names(&related_chain(&g, &hash_of("A"), 10).unwrap()), ["A", "B"]);
        let g = Graph::new(&[("S", &["S"])]);
        assert_eq!(names(&related_chain(&g, &hash_of("S"), 10).unwrap()), ["S"]);
    }

    #[test]
    fn breadth_first_with_shared_targets() {
        let g = Graph::new(&[
            ("A", &["B", "C"]),
            ("B", &["D"]),
            ("C", &["D", "A"]),
            ("D", &[]),
        ]);
        assert_eq!(
            names(&related_chain(&g, &hash_of("A"), 10).unwrap()),
            ["A", "B", "C", "D"]
        );
    }

    #[test]
    fn unresolvable_references_are_reported_inline() {
        let g = Graph::new(&[("A", &["deadbee"])]);
        let chain = related_chain(&g, &hash_of("A"), 3).unwrap();
        assert_eq!(names(&chain), ["A"]);
        assert_eq!(chain.unresolved.len(), 1);
        assert_eq!(chain.unresolved[0].reason, "unknown-commit");
        assert!(matches!(
            related_chain(&g, "deadbee", 3),
            Err(RepoError::UnknownCommit(_))
        ));
    }

    #[test]
    fn whitespace_normalization() {
        assert_eq!(normalize_whitespace("  a \t b\nc  "), "a b c");
    }

    #[test]
    fn fold_order_breaks_ties_by_hash() {
        let at = |h: &str, t: i64| CommitRecord {
            hash: h.repeat(40),
            author_name: String::new(),
            author_email: String::new(),
            author_date: Utc.timestamp_opt(t, 0).unwrap(),
            message: String::new(),
            touched_paths: None,
        };
        let mut commits = vec![at("b", 5), at("c", 9), at("a", 5)];
        fold_order(&mut commits);
        let order: Vec<char> = commits.iter().map(|c| c.hash.chars().next().unwrap()).collect();
        assert_eq!(order, ['c', 'a', 'b']);
    }
}
