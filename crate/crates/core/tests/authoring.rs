use std::io::Cursor;

use lore_core::authoring::{
    build_from_structured, build_interactive, commit_atom, render_structured, validate, AuthoringError,
    LinePrompt, ValidateOptions,
};
use lore_core::format::{parse_message, serialize_atom, FindingCode, Severity};
use lore_testkit::strategies::arb_authorable_atom;
use lore_testkit::{FixtureRepo, TOKEN_REFRESH_MESSAGE};
use proptest::prelude::*;

const TOKEN_REFRESH_JSON: &str = r#"{
  "lore": 1,
  "intent": "Prevent silent session drops during long-running operations",
  "body": "The auth service returns inconsistent status codes on token\nexpiry, so the interceptor catches all 4xx responses and\ntriggers an inline refresh.",
  "constraints": [
    "Auth service does not support token introspection",
    "Must not add latency to non-expired-token paths"
  ],
  "rejected": [
    {"alternative": "Extend token TTL to 24h", "reason": "security policy violation"},
    {"alternative": "Background refresh on timer", "reason": "race condition"}
  ],
  "confidence": "high",
  "scope_risk": "narrow",
  "reversibility": "clean",
  "directives": ["Error handling is intentionally broad (all 4xx) -- do not narrow without verifying upstream behavior"],
  "tested": ["Single expired token refresh (unit)"],
  "not_tested": ["Auth service cold-start > 500ms behavior"]
}"#;

#[test]
fn structured_document_equals_parsed_message() {
    let parsed = parse_message(TOKEN_REFRESH_MESSAGE).atom.unwrap();
    assert_eq!(build_from_structured(TOKEN_REFRESH_JSON).unwrap(), parsed);
    assert_eq!(build_from_structured(&render_structured(&parsed)).unwrap(), parsed);
}

#[test]
fn interactive_session_reproduces_canonical_form() {
    let answers = [
        "Prevent silent session drops during long-running operations",
        "The auth service returns inconsistent status codes on token",
        "expiry, so the interceptor catches all 4xx responses and",
        "triggers an inline refresh.",
        "",
        "Auth service does not support token introspection",
        "Must not add latency to non-expired-token paths",
        "",
        "Extend token TTL to 24h | security policy violation",
        "Background refresh on timer | race condition",
        "",
        "high",
        "narrow",
        "clean",
        "Error handling is intentionally broad (all 4xx) -- do not narrow without verifying upstream behavior",
        "",
        "Single expired token refresh (unit)",
        "",
        "Auth service cold-start > 500ms behavior",
        "",
        "",
        "",
        "y",
    ];
    let input = answers.join("\n") + "\n";
    let mut shown = Vec::new();
    let atom = build_interactive(&mut LinePrompt::new(Cursor::new(input), &mut shown)).unwrap();
    let canonical = serialize_atom(&parse_message(TOKEN_REFRESH_MESSAGE).atom.unwrap()).unwrap();
    assert_eq!(serialize_atom(&atom).unwrap(), canonical);
    // The confirmation step showed the full message.
    let shown = String::from_utf8(shown).unwrap();
    assert!(shown.contains("Directive: Error handling is intentionally broad (all 4xx) -- do not"));
}

#[test]
fn interactive_cancel_creates_nothing() {
    let mut fx = FixtureRepo::new();
    fx.commit("base");
    let before = fx.git(&["rev-parse", "HEAD"]);
    let mut sink = Vec::new();
    let result = build_interactive(&mut LinePrompt::new(Cursor::new("only intent\n"), &mut sink));
    assert!(matches!(result, Err(AuthoringError::Aborted)));
    assert_eq!(fx.git(&["rev-parse", "HEAD"]), before);
}

#[test]
fn validate_reports_per_commit_findings() {
    let mut fx = FixtureRepo::new();
    let refresh = fx.commit(TOKEN_REFRESH_MESSAGE);
    let plain = fx.commit("Plain subject\n");
    let bad_enum = fx.commit("Keep it\n\nConfidence: maybe\n");
    let report = validate(&fx.repo(), &ValidateOptions::default()).unwrap();
    let order: Vec<&str> = report.commits.iter().map(|c| c.hash.as_str()).collect();
    assert_eq!(order, [bad_enum.as_str(), plain.as_str(), refresh.as_str()]);
    let codes = |i: usize| -> Vec<FindingCode> { report.commits[i].findings.iter().map(|f| f.code).collect() };
    assert_eq!(codes(0), [FindingCode::InvalidEnum]);
    assert_eq!(codes(1), [FindingCode::NoTrailers]);
    assert!(codes(2).is_empty());
    assert_eq!(report.totals.error, 0);
    assert!(report.passed());

    let strict = ValidateOptions { threshold: Severity::Warning, ..ValidateOptions::default() };
    assert!(!validate(&fx.repo(), &strict).unwrap().passed());
}

#[test]
fn validate_empty_range_and_bad_hash() {
    let mut fx = FixtureRepo::new();
    fx.commit("base");
    let repo = fx.repo();
    let empty = ValidateOptions { range: Some("HEAD..HEAD".into()), ..ValidateOptions::default() };
    let report = validate(&repo, &empty).unwrap();
    assert!(report.commits.is_empty() && report.passed());

    fx.commit("Point at nothing\n\nRelated: zzzz\n");
    let report = validate(&fx.repo(), &ValidateOptions::default()).unwrap();
    assert!(!report.passed());
    assert_eq!(report.commits[0].findings[0].code, FindingCode::RelatedBadHash);
}

#[test]
fn validate_window_and_merges() {
    let mut fx = FixtureRepo::new();
    for i in 0..5 {
        fx.commit(&format!("c{i}\n\nConstraint: x\n"));
    }
    fx.checkout_new("side");
    fx.touch("s", "side");
    fx.commit("side\n\nConstraint: y\n");
    fx.checkout("main");
    let merge = fx.merge("side", "Merge branch 'side'");
    let last3 = ValidateOptions { last: Some(3), ..ValidateOptions::default() };
    let report = validate(&fx.repo(), &last3).unwrap();
    assert_eq!(report.commits.len(), 3);
    assert!(report.commits.iter().all(|c| c.hash != merge));
}

#[test]
fn empty_repository_validates() {
    let fx = FixtureRepo::new();
    let report = validate(&fx.repo(), &ValidateOptions::default()).unwrap();
    assert!(report.commits.is_empty() && report.passed());
}

proptest! {
    #[test]
    fn structured_round_trip(atom in arb_authorable_atom()) {
        let doc = render_structured(&atom);
        prop_assert_eq!(build_from_structured(&doc).unwrap(), atom.clone());
        let message = serialize_atom(&atom).unwrap();
        prop_assert!(!parse_message(&message).has_errors());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn built_commits_always_validate(atoms in proptest::collection::vec(arb_authorable_atom(), 1..4)) {
        let fx = FixtureRepo::new();
        let repo = fx.repo();
        for (i, atom) in atoms.iter().enumerate() {
            fx.touch("f", &format!("f {i}"));
            fx.git(&["add", "f"]);
            let hash = commit_atom(&repo, atom).unwrap();
            prop_assert_eq!(repo.read_commit(&hash).unwrap().message, serialize_atom(atom).unwrap());
        }
        let report = validate(&repo, &ValidateOptions::default()).unwrap();
        prop_assert_eq!(report.totals.error, 0, "{:#?}", report);
    }
}
