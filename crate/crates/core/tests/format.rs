use std::io::Write;
use std::process::{Command, Stdio};

use lore_core::format::{
    parse_message, parse_message_bytes, serialize_atom, split_trailer_block, ConfidenceLevel,
    FindingCode, Reversibility, ScopeRisk, TestEntry,
};
use lore_testkit::strategies::{arb_atom, phrase};
use lore_testkit::TOKEN_REFRESH_MESSAGE;
use proptest::prelude::*;

#[test]
fn token_refresh_parses_exactly() {
    let report = parse_message(TOKEN_REFRESH_MESSAGE);
    assert!(report.findings.is_empty(), "{:?}", report.findings);
    let atom = report.atom.unwrap();

    assert_eq!(atom.intent, "Prevent silent session drops during long-running operations");
    assert!(atom.body.starts_with("The auth service returns inconsistent status codes"));
    assert_eq!(atom.constraints.len(), 2);
    assert_eq!(atom.constraints[1].text, "Must not add latency to non-expired-token paths");
    assert_eq!(atom.rejected.len(), 2);
    assert_eq!(atom.rejected[0].alternative, "Extend token TTL to 24h");
    assert_eq!(atom.rejected[0].reason.as_deref(), Some("security policy violation"));
    assert_eq!(atom.rejected[1].reason.as_deref(), Some("race condition"));
    assert_eq!(atom.confidence, Some(ConfidenceLevel::High));
    assert_eq!(atom.scope_risk, Some(ScopeRisk::Narrow));
    assert_eq!(atom.reversibility, Some(Reversibility::Clean));
    assert_eq!(
        atom.directives[0].text,
        "Error handling is intentionally broad (all 4xx) -- do not narrow without verifying upstream behavior"
    );
    assert_eq!(
        atom.tested,
        vec![TestEntry {
            description: "Single expired token refresh".into(),
            method: Some("unit".into())
        }]
    );
    assert_eq!(atom.not_tested[0].description, "Auth service cold-start > 500ms behavior");
    assert!(atom.related.is_empty() && atom.extensions.is_empty());
}

#[test]
fn token_refresh_block_has_eleven_physical_lines() {
    let split = split_trailer_block(TOKEN_REFRESH_MESSAGE);
    assert_eq!(split.block_lines.len(), 11);
    assert_eq!(parse_message(TOKEN_REFRESH_MESSAGE).trailers.len(), 10);
}

#[test]
fn token_refresh_canonical_form_is_stable() {
    let atom = parse_message(TOKEN_REFRESH_MESSAGE).atom.unwrap();
    let canonical = serialize_atom(&atom).unwrap();
    assert_eq!(parse_message(&canonical).atom.unwrap(), atom);
    assert_eq!(serialize_atom(&parse_message(&canonical).atom.unwrap()).unwrap(), canonical);
}

#[test]
fn keys_match_case_insensitively() {
    let atom = parse_message("x\n\nconstraint: a\nSCOPE-RISK: wide\nnOt-TeStEd: b\n").atom.unwrap();
    assert_eq!(atom.constraints[0].text, "a");
    assert_eq!(atom.scope_risk, Some(ScopeRisk::Wide));
    assert_eq!(atom.not_tested.len(), 1);
}

#[test]
fn unknown_keys_are_preserved_in_order() {
    let atom = parse_message("x\n\nTicket: OPS-1\nConstraint: c\nReviewed-by: Kim\nTicket: OPS-2\n")
        .atom
        .unwrap();
    let ext: Vec<(&str, &str)> = atom
        .extensions
        .iter()
        .map(|e| (e.key.as_str(), e.value.as_str()))
        .collect();
    assert_eq!(ext, [("Ticket", "OPS-1"), ("Reviewed-by", "Kim"), ("Ticket", "OPS-2")]);
    let again = parse_message(&serialize_atom(&atom).unwrap()).atom.unwrap();
    assert_eq!(again, atom);
}

#[test]
fn plain_and_empty_messages() {
    let report = parse_message("fix typo\n");
    assert!(report.has_finding(FindingCode::NoTrailers));
    assert!(!report.has_errors());
    assert!(!report.atom.unwrap().has_trailers());

    for empty in ["", "\n\n", "   \n"] {
        let report = parse_message(empty);
        assert!(report.atom.is_none());
        assert!(report.has_finding(FindingCode::EmptyMessage));
    }
}

#[test]
fn bad_enum_is_a_warning_and_leaves_field_unset() {
    let report = parse_message("x\n\nConfidence: High\nConstraint: c\n");
    assert!(report.has_finding(FindingCode::InvalidEnum));
    assert!(!report.has_errors());
    assert_eq!(report.atom.unwrap().confidence, None);
}

proptest! {
    #[test]
    fn serialize_then_parse_is_identity(atom in arb_atom()) {
        let message = serialize_atom(&atom).unwrap();
        let report = parse_message(&message);
        prop_assert!(!report.has_errors(), "{:?}", report.findings);
        prop_assert_eq!(report.atom.unwrap(), atom.clone());
        // Byte stability.
        prop_assert_eq!(serialize_atom(&atom).unwrap(), message);
    }

    #[test]
    fn parsing_arbitrary_bytes_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..512)) {
        let report = parse_message_bytes(&bytes);
        prop_assert_eq!(report.atom.is_none(), report.has_errors());
    }

    #[test]
    fn parsing_trailer_shaped_noise_never_panics(
        lines in proptest::collection::vec(
            prop_oneof![
                Just(String::new()),
                "[A-Za-z][A-Za-z0-9-]{0,8}:( [ -~]{0,20})?",
                "[ \t]{1,3}[ -~]{0,20}",
                "[ -~]{0,30}",
            ],
            0..12,
        )
    ) {
        let _ = parse_message(&lines.join("\n"));
    }
}

/// Trailers as git itself reads them, continuations unfolded.
fn git_trailers(message: &str) -> Vec<(String, String)> {
    let mut child = Command::new("git")
        .args(["interpret-trailers", "--parse"])
        .env("GIT_CONFIG_NOSYSTEM", "1")
        .env("HOME", "/nonexistent")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(message.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| {
            let (k, v) = l.split_once(':').unwrap();
            (k.to_string(), v.trim().to_string())
        })
        .collect()
}

/// Message lines drawn from the shapes both parsers must agree on: keyed
/// lines with a space after the colon, indented continuations, prose with no
/// colon, and blank lines.
fn block_line() -> impl Strategy<Value = String> {
    prop_oneof![
        4 => ("[A-Za-z][A-Za-z0-9-]{0,10}", phrase(4, "")).prop_map(|(k, v)| format!("{k}: {v}")),
        1 => phrase(3, "").prop_map(|v| format!("  {v}")),
        2 => phrase(5, "").prop_map(|v| v.replace([':', '#', '-'], ".")),
        1 => Just(String::new()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn block_detection_agrees_with_git(
        subject in phrase(5, "").prop_map(|s| s.replace([':', '#', '-'], ".")),
        lines in proptest::collection::vec(block_line(), 0..10),
    ) {
        let message = format!("{subject}\n\n{}\n", lines.join("\n"));
        let ours: Vec<(String, String)> = parse_message(&message)
            .trailers
            .into_iter()
            .map(|t| (t.key, t.value))
            .collect();
        prop_assert_eq!(ours, git_trailers(&message), "message:\n{}", message);
    }
}
