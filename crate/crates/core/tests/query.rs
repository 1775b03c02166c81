use chrono::{DateTime, Utc};
use lore_core::duration::AgeThreshold;
use lore_core::query::{related_chain, QueryOptions, StaleKind, STALE_RULE};
use lore_core::{QueryEngine, RepoError};
use lore_testkit::oracle::{compare_engine, History};
use lore_testkit::scenario::generate;
use lore_testkit::{FixtureRepo, TOKEN_REFRESH_MESSAGE};

const DAY: i64 = 86_400;

fn at(ts: i64) -> DateTime<Utc> {
    DateTime::from_timestamp(ts, 0).unwrap()
}

fn days(n: u32) -> AgeThreshold {
    AgeThreshold::days(n).unwrap()
}

fn opts() -> QueryOptions {
    QueryOptions::default()
}

#[test]
fn context_counts_lore_and_plain_commits() {
    let mut fx = FixtureRepo::new();
    for (i, msg) in [
        "one\n\nConstraint: a\n",
        "fix: plain\n",
        "two\n\nDirective: d\nTicket: T-1\n",
        "chore: plain again\n",
        "three\n\nTested: t (unit)\n",
        "four\n\nTicket: only an extension\n",
    ]
    .iter()
    .enumerate()
    {
        fx.touch("src/a.c", &format!("line {i}"));
        fx.commit(msg);
    }
    let repo = fx.repo();
    let engine = QueryEngine::new(&repo, days(180));
    let ctx = engine.context("src/a.c", &opts()).unwrap();
    assert_eq!(ctx.atoms.len(), 3);
    assert_eq!(ctx.non_lore_commits, 3);
    assert_eq!(ctx.atoms[0].atom.intent, "three");
    assert_eq!(ctx.counts.extensions, 1);
}

#[test]
fn token_refresh_context_counts() {
    let mut fx = FixtureRepo::new();
    fx.write("src/auth/interceptor.ts", "x");
    fx.commit(TOKEN_REFRESH_MESSAGE);
    let repo = fx.repo();
    let engine = QueryEngine::new(&repo, days(180));
    let ctx = engine.context("src/auth/interceptor.ts", &opts()).unwrap();
    let c = ctx.counts;
    assert_eq!(
        (c.constraints, c.rejected, c.directives, c.tested, c.not_tested, c.related),
        (2, 2, 1, 1, 1, 0)
    );
    let ledger = engine.rejected("src/auth", &opts()).unwrap();
    assert_eq!(ledger.entries.len(), 2);
    assert!(ledger.entries.iter().all(|e| e.reason.is_some()));
}

#[test]
fn unknown_path() {
    let mut fx = FixtureRepo::new();
    fx.write("a", "1");
    fx.commit("x");
    let repo = fx.repo();
    let err = QueryEngine::new(&repo, days(1)).context("missing.c", &opts()).unwrap_err();
    assert!(matches!(err, RepoError::UnknownPath(_)));
}

#[test]
fn empty_history_gives_empty_results() {
    let fx = FixtureRepo::new();
    let repo = fx.repo();
    let engine = QueryEngine::new(&repo, days(1));
    assert!(engine.rejected("a", &opts()).unwrap().entries.is_empty());
    assert!(engine.directives("a", &opts()).unwrap().entries.is_empty());
    let cov = engine.coverage("a", &opts()).unwrap();
    assert!(cov.tested.is_empty() && cov.not_tested.is_empty());
}

#[test]
fn constraints_dedupe_to_newest_source() {
    let mut fx = FixtureRepo::new();
    fx.touch("f", "f 1");
    let old = fx.commit("a\n\nConstraint: A\nConstraint: Must not add latency to non-expired-token paths\nConstraint: B\n");
    fx.touch("f", "f 2");
    let new = fx.commit("b\n\nConstraint: B\nConstraint: Must not add  latency to non-expired-token paths\nConstraint: C\n");
    let repo = fx.repo();
    let set = QueryEngine::new(&repo, days(180)).constraints("f", &opts()).unwrap();
    let got: Vec<(&str, &str)> = set
        .entries
        .iter()
        .map(|e| (e.text.as_str(), if e.source_hash == new { "new" } else if e.source_hash == old { "old" } else { "?" }))
        .collect();
    assert_eq!(
        got,
        [
            ("B", "new"),
            ("Must not add  latency to non-expired-token paths", "new"),
            ("C", "new"),
            ("A", "old"),
        ]
    );
}

#[test]
fn newer_tested_claim_supersedes_not_tested() {
    let mut fx = FixtureRepo::new();
    fx.touch("f", "f 1");
    fx.commit("a\n\nNot-tested: cold-start\nNot-tested: warm path\n");
    fx.touch("f", "f 2");
    fx.commit("b\n\nTested: cold-start (integration)\n");
    let repo = fx.repo();
    let cov = QueryEngine::new(&repo, days(1)).coverage("f", &opts()).unwrap();
    let open: Vec<&str> = cov.not_tested.iter().map(|t| t.description.as_str()).collect();
    assert_eq!(open, ["warm path"]);
    assert_eq!(cov.tested[0].method.as_deref(), Some("integration"));
}

#[test]
fn staleness_needs_both_age_and_a_later_touch() {
    let now = 2_000_000_000;
    let fx = FixtureRepo::new();
    fx.touch("old.c", "old.c 1");
    let flagged = fx.commit_at("old\n\nConstraint: Old rule\nDirective: Old advice\n", now - 400 * DAY);
    fx.touch("old.c", "old.c 2");
    fx.commit_at("later one", now - 200 * DAY);
    fx.touch("old.c", "old.c 3");
    fx.commit_at("later two", now - 10 * DAY);
    fx.touch("untouched.c", "untouched.c 1");
    fx.commit_at("old but alone\n\nConstraint: Nobody changed this since\n", now - 400 * DAY);
    fx.touch("fresh.c", "fresh.c 1");
    fx.commit_at("young\n\nConstraint: Made yesterday\n", now - DAY);
    fx.touch("fresh.c", "fresh.c 2");
    fx.commit_at("then touched", now - DAY / 2);

    let repo = fx.repo();
    let engine = QueryEngine::new(&repo, days(90)).at(at(now));
    let report = engine.stale(Some("old.c"), &days(90), &opts()).unwrap();
    assert_eq!(report.entries.len(), 2);
    let e = &report.entries[0];
    assert_eq!((e.kind, e.text.as_str()), (StaleKind::Constraint, "Old rule"));
    assert_eq!((e.rule, e.later_touch_count, e.source_hash.as_str()), (STALE_RULE, 2, flagged.as_str()));
    assert_eq!(report.entries[1].kind, StaleKind::Directive);

    assert!(engine.stale(Some("untouched.c"), &days(90), &opts()).unwrap().entries.is_empty());
    for n in [1, 2, 30, 365] {
        let r = engine.stale(Some("fresh.c"), &days(n), &opts()).unwrap();
        assert!(r.entries.is_empty(), "{n}: {r:#?}");
    }
    let all = engine.stale(None, &days(90), &opts()).unwrap();
    let paths: Vec<&str> = all.entries.iter().map(|e| e.path.as_str()).collect();
    assert_eq!(paths, ["old.c", "old.c"]);
    assert!(engine.constraints("old.c", &opts()).unwrap().entries[0].stale);
}

#[test]
fn related_chain_follows_real_commits_and_cycles() {
    let mut fx = FixtureRepo::new();
    let c = fx.commit("C\n\nConstraint: root cause\n");
    let b = fx.commit(&format!("B\n\nRelated: {c}\n"));
    let a = fx.commit(&format!("A\n\nRelated: {}\n", &b[..12]));
    let lone = fx.commit("lonely\n\nConstraint: none\n");
    fx.replace_message(&c, &format!("C\n\nConstraint: root cause\nRelated: {a}\n"));

    let repo = fx.repo();
    let intents = |h: &str, d: usize| -> Vec<String> {
        related_chain(&repo, h, d).unwrap().atoms.iter().map(|x| x.atom.intent.clone()).collect()
    };
    assert_eq!(intents(&a, 10), ["A", "B", "C"]);
    assert_eq!(intents(&lone, 10), ["lonely"]);
    assert_eq!(intents(&c, 10), ["C", "A", "B"]);
    assert_eq!(intents(&a, 1), ["A", "B"]);
}

#[test]
fn context_can_expand_related_commits() {
    let mut fx = FixtureRepo::new();
    fx.touch("elsewhere", "elsewhere 1");
    let origin = fx.commit("origin\n\nConstraint: upstream rule\n");
    fx.touch("here", "here 1");
    fx.commit(&format!("follow-up\n\nRelated: {origin}\nRelated: 0123456789ab\n"));
    let repo = fx.repo();
    let engine = QueryEngine::new(&repo, days(1));
    let plain = engine.context("here", &opts()).unwrap();
    assert!(plain.related.is_empty());
    let expanded = engine
        .context("here", &QueryOptions { related_depth: 1, ..opts() })
        .unwrap();
    assert_eq!(expanded.related.len(), 1);
    assert_eq!(expanded.related[0].commit.hash, origin);
    assert_eq!(expanded.unresolved_related.len(), 1);
    assert_eq!(expanded.unresolved_related[0].reason, "unknown-commit");
}

#[test]
fn engine_matches_oracle_on_generated_history() {
    for seed in [7, 11] {
        let sc = generate(40, seed);
        let repo = sc.fx.repo();
        let threshold = days(30);
        let engine = QueryEngine::new(&repo, threshold).at(at(sc.last_time + 45 * DAY));
        let history = History::load(sc.fx.path());
        let (problems, checks) =
            compare_engine(&engine, &history, &sc.paths.files, &sc.paths.dirs, &threshold);
        assert!(checks > 50);
        assert!(problems.is_empty(), "seed {seed}: {problems:#?}");
    }
}
