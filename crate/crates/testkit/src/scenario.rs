//! Seeded random histories for oracle comparisons.

use lore_core::format::{parse_message, serialize_atom, RelatedRef};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fixture::FixtureRepo;

const MAIN_FILES: &[&str] = &["src/session.c", "src/net/http.c", "src/net/retry.c", "README"];
const BRANCH_FILES: &[&str] = &["lib/util.rs", "docs/guide.md", "docs/api.md"];
/// Successive names of the one file that gets renamed.
const RENAMED: &[&str] = &["src/auth.c", "src/authn.c", "src/core/auth.c"];

const CONSTRAINTS: &[&str] = &[
    "Auth service does not support token introspection",
    "Must not add latency to non-expired-token paths",
    "Must not add  latency to non-expired-token paths",
    "Retries are capped at three attempts",
    "Public API stays source compatible",
    "No allocations on the hot path",
];
const REJECTED: &[&str] = &[
    "Extend token TTL to 24h | security policy violation",
    "Background refresh on timer | race condition",
    "Use a global lock",
    "Switch to HTTP/2 | proxy support is missing",
];
const DIRECTIVES: &[&str] = &[
    "Error handling is intentionally broad (all 4xx) -- do not narrow without verifying upstream behavior",
    "Keep the retry budget in sync with the load balancer timeout",
    "Do not log token contents",
];
const TEST_CLAIMS: &[&str] = &[
    "Single expired token refresh (unit)",
    "cold-start",
    "Concurrent refresh (integration)",
    "Proxy failover",
];
const PLAIN_SUBJECTS: &[&str] = &[
    "fix: handle empty header",
    "chore: bump dependencies",
    "docs: clarify retry semantics",
    "refactor(net): split http client",
    "feat: add session metrics",
];

/// Paths a generated scenario can be queried on.
pub struct ScenarioPaths {
    pub files: Vec<String>,
    pub dirs: Vec<String>,
}

pub struct Scenario {
    pub fx: FixtureRepo,
    pub paths: ScenarioPaths,
    /// Hashes of the two commits whose `Related:` trailers form a cycle.
    pub cycle: Option<(String, String)>,
    /// Latest author timestamp used.
    pub last_time: i64,
}

struct Builder {
    fx: FixtureRepo,
    rng: ChaCha8Rng,
    time: i64,
    hashes: Vec<String>,
    lore_hashes: Vec<String>,
    rename_step: usize,
    count: usize,
}

impl Builder {
    fn tick(&mut self) -> i64 {
        match self.rng.gen_range(0..10) {
            // Same second as the previous commit: exercises the hash tie-break.
            0 => self.time,
            // Back-dated: author order disagrees with topology.
            1 => self.time - self.rng.gen_range(1..5) * 86_400,
            _ => {
                self.time += self.rng.gen_range(1..20 * 24) * 3600;
                self.time
            }
        }
    }

    fn lore_message(&mut self) -> String {
        let rng = &mut self.rng;
        let mut lines = Vec::new();
        for _ in 0..rng.gen_range(0..3) {
            lines.push(format!("Constraint: {}", CONSTRAINTS.choose(rng).unwrap()));
        }
        for _ in 0..rng.gen_range(0..2) {
            lines.push(format!("Rejected: {}", REJECTED.choose(rng).unwrap()));
        }
        if rng.gen_bool(0.4) {
            let v = ["low", "medium", "high", "maybe"].choose(rng).unwrap();
            lines.push(format!("Confidence: {v}"));
        }
        if rng.gen_bool(0.3) {
            lines.push(format!("Scope-risk: {}", ["narrow", "moderate", "wide"].choose(rng).unwrap()));
        }
        if rng.gen_bool(0.3) {
            let d = DIRECTIVES.choose(rng).unwrap();
            match d.split_once(" -- ") {
                Some((a, b)) if rng.gen_bool(0.5) => {
                    lines.push(format!("Directive: {a}"));
                    lines.push(format!("  -- {b}"));
                }
                _ => lines.push(format!("Directive: {d}")),
            }
        }
        for _ in 0..rng.gen_range(0..2) {
            lines.push(format!("Tested: {}", TEST_CLAIMS.choose(rng).unwrap()));
        }
        for _ in 0..rng.gen_range(0..2) {
            lines.push(format!("Not-tested: {}", TEST_CLAIMS.choose(rng).unwrap()));
        }
        if rng.gen_bool(0.25) {
            let target = if !self.hashes.is_empty() && rng.gen_bool(0.85) {
                let h = self.hashes.choose(rng).unwrap();
                if rng.gen_bool(0.5) { h.clone() } else { h[..12].to_string() }
            } else {
                "deadbeefcafe".to_string()
            };
            lines.push(format!("Related: {target}"));
        }
        if rng.gen_bool(0.15) {
            lines.push(format!("Ticket: OPS-{}", rng.gen_range(1..500)));
        }
        if lines.is_empty() {
            lines.push(format!("Constraint: {}", CONSTRAINTS.choose(rng).unwrap()));
        }
        let body = if rng.gen_bool(0.5) { "\nNarrative context for the change.\n" } else { "" };
        format!("Decision {} about the session layer\n{body}\n{}\n", self.count, lines.join("\n"))
    }

    fn message(&mut self) -> (String, bool) {
        self.count += 1;
        if self.rng.gen_bool(0.6) {
            (self.lore_message(), true)
        } else {
            let s = PLAIN_SUBJECTS.choose(&mut self.rng).unwrap();
            (format!("{s} #{}\n", self.count), false)
        }
    }

    fn commit_touching(&mut self, files: &[String]) {
        for f in files {
            let line = format!("{f} change {}", self.count);
            self.fx.touch(f, &line);
        }
        let (message, lore) = self.message();
        let ts = self.tick();
        let hash = self.fx.commit_at(&message, ts);
        if lore {
            self.lore_hashes.push(hash.clone());
        }
        self.hashes.push(hash);
    }

    fn main_files(&mut self) -> Vec<String> {
        let mut pool: Vec<String> = MAIN_FILES.iter().map(|s| s.to_string()).collect();
        pool.push(RENAMED[self.rename_step].to_string());
        let n = self.rng.gen_range(1..=2);
        pool.choose_multiple(&mut self.rng, n).cloned().collect()
    }
}

/// Build a history of roughly `commits` commits (merges included).
pub fn generate(commits: usize, seed: u64) -> Scenario {
    let mut b = Builder {
        fx: FixtureRepo::new(),
        rng: ChaCha8Rng::seed_from_u64(seed),
        time: crate::fixture::EPOCH,
        hashes: Vec::new(),
        lore_hashes: Vec::new(),
        rename_step: 0,
        count: 0,
    };
    let all: Vec<String> = MAIN_FILES.iter().chain(&RENAMED[..1]).map(|s| s.to_string()).collect();
    b.commit_touching(&all);

    let mut made = 1;
    let mut branch = 0;
    while made + 3 < commits {
        let roll = b.rng.gen_range(0..100);
        if roll < 6 && b.rename_step + 1 < RENAMED.len() && made > commits / 4 {
            let (from, to) = (RENAMED[b.rename_step], RENAMED[b.rename_step + 1]);
            b.fx.rename(from, to);
            b.rename_step += 1;
            b.count += 1;
            let ts = b.tick();
            let message = format!("Move {from} to {to}\n\nConstraint: Keep the old include path working\n");
            let hash = b.fx.commit_at(&message, ts);
            b.lore_hashes.push(hash.clone());
            b.hashes.push(hash);
            made += 1;
        } else if roll < 14 && made + 6 < commits {
            branch += 1;
            let name = format!("topic-{branch}");
            b.fx.checkout_new(&name);
            for _ in 0..b.rng.gen_range(1..=2) {
                let f = BRANCH_FILES.choose(&mut b.rng).unwrap().to_string();
                b.commit_touching(&[f]);
                made += 1;
            }
            b.fx.checkout("main");
            let files = b.main_files();
            b.commit_touching(&files);
            b.count += 1;
            let ts = b.tick();
            b.fx.git(&["merge", "-q", "--no-ff", "--no-commit", &name]);
            let message = if b.rng.gen_bool(0.5) {
                format!("Merge {name}\n\nConstraint: Merged work keeps the public API\n")
            } else {
                format!("Merge branch '{name}'\n")
            };
            b.hashes.push(b.fx.commit_at(&message, ts));
            made += 2;
        } else {
            let files = b.main_files();
            b.commit_touching(&files);
            made += 1;
        }
    }

    // A Related cycle: B names A, then A is replaced to name B.
    let mut cycle = None;
    if let Some(a) = b.lore_hashes.first().cloned() {
        let file = RENAMED[b.rename_step].to_string();
        b.fx.touch(&file, "cycle");
        let ts = b.tick();
        let msg = format!("Tie the refresh decision back to its origin\n\nConstraint: Refresh stays inline\nRelated: {a}\n");
        let bh = b.fx.commit_at(&msg, ts);
        b.hashes.push(bh.clone());

        let original = b.fx.git(&["cat-file", "commit", &a]);
        let message = original.split_once("\n\n").map(|(_, m)| m).unwrap_or("");
        let mut atom = parse_message(&format!("{message}\n")).atom.unwrap();
        atom.related.push(RelatedRef::parse(&bh).unwrap());
        b.fx.replace_message(&a, &serialize_atom(&atom).unwrap());
        cycle = Some((a, bh));
    }
    while b.hashes.len() < commits {
        let files = b.main_files();
        b.commit_touching(&files);
    }

    let mut files: Vec<String> = MAIN_FILES.iter().chain(BRANCH_FILES).chain(RENAMED).map(|s| s.to_string()).collect();
    files.retain(|f| b.fx.path().join(f).exists() || RENAMED[..b.rename_step].contains(&f.as_str()));
    let mut dirs: Vec<String> = ["src", "src/net", "lib", "docs"].iter().map(|s| s.to_string()).collect();
    if b.rename_step == RENAMED.len() - 1 {
        dirs.push("src/core".into());
    }
    dirs.retain(|d| b.fx.path().join(d).is_dir());
    let last_time = b.time;
    Scenario {
        paths: ScenarioPaths { files, dirs },
        fx: b.fx,
        cycle,
        last_time,
    }
}
