use lore_core::format::{
    check_atom, ConfidenceLevel, ConstraintEntry, DirectiveEntry, ExtensionTrailer, LoreAtom,
    RejectedEntry, RelatedRef, Reversibility, ScopeRisk, TestEntry, TrailerKey,
};
use proptest::collection::vec;
use proptest::option;
use proptest::prelude::*;

/// Words mixing ASCII, punctuation that trailer values commonly carry, and
/// a little non-ASCII text.
fn word(extra: &'static str) -> impl Strategy<Value = String> {
    let pattern = format!("[a-zA-Z0-9.,;:'\"/<>=+*#!?%&_\\-{extra}éßø漢字🙂]{{1,12}}");
    proptest::string::string_regex(&pattern).unwrap()
}

/// Single-line text: words joined by single spaces.
pub fn phrase(max_words: usize, extra: &'static str) -> impl Strategy<Value = String> {
    vec(word(extra), 1..=max_words).prop_map(|w| w.join(" "))
}

fn body() -> impl Strategy<Value = String> {
    let line = phrase(10, "()|");
    let paragraph = vec(line, 1..4).prop_map(|l| l.join("\n"));
    prop_oneof![
        2 => Just(String::new()),
        3 => vec(paragraph, 1..3).prop_map(|p| p.join("\n\n")),
    ]
}

fn extension_key() -> impl Strategy<Value = String> {
    "[A-Z][a-zA-Z0-9-]{0,14}".prop_filter("reserved key", |k| !TrailerKey::is_reserved(k))
}

fn hash() -> impl Strategy<Value = RelatedRef> {
    "[0-9a-f]{7,40}".prop_map(|h| RelatedRef::parse(&h).unwrap())
}

fn test_entry() -> impl Strategy<Value = TestEntry> {
    (phrase(8, "|"), option::of(phrase(2, "|"))).prop_map(|(description, method)| TestEntry { description, method })
}

/// Atoms that satisfy every serialization invariant.
pub fn arb_atom() -> impl Strategy<Value = LoreAtom> {
    let head = (phrase(12, "()|"), body());
    let lists = (
        vec(phrase(12, "()|"), 0..4),
        vec((phrase(6, "()"), option::of(phrase(8, "()|"))), 0..3),
        vec(phrase(30, "()|"), 0..3),
        vec(test_entry(), 0..3),
        vec(test_entry(), 0..3),
    );
    let scalars = (
        option::of(prop::sample::select(ConfidenceLevel::VALUES)),
        option::of(prop::sample::select(ScopeRisk::VALUES)),
        option::of(prop::sample::select(Reversibility::VALUES)),
    );
    let tail = (
        vec(hash(), 0..3),
        vec((extension_key(), prop_oneof![5 => phrase(6, "()|"), 1 => Just(String::new())]), 0..3),
    );
    (head, lists, scalars, tail)
        .prop_map(|((intent, body), lists, scalars, tail)| {
            let (constraints, rejected, directives, tested, not_tested) = lists;
            let (confidence, scope_risk, reversibility) = scalars;
            let (related, extensions) = tail;
            LoreAtom {
                intent,
                body,
                constraints: constraints.into_iter().map(|text| ConstraintEntry { text }).collect(),
                rejected: rejected
                    .into_iter()
                    .map(|(alternative, reason)| RejectedEntry { alternative, reason })
                    .collect(),
                confidence: confidence.map(|v| v.parse().unwrap()),
                scope_risk: scope_risk.map(|v| v.parse().unwrap()),
                reversibility: reversibility.map(|v| v.parse().unwrap()),
                directives: directives.into_iter().map(|text| DirectiveEntry { text }).collect(),
                tested,
                not_tested,
                related,
                extensions: extensions
                    .into_iter()
                    .map(|(key, value)| ExtensionTrailer { key, value })
                    .collect(),
            }
        })
        .prop_filter("atom must be serializable", |a| check_atom(a).is_ok())
}

/// Atoms a user can author: like [`arb_atom`] but without empty extension
/// values, which parse and serialize but are rejected at authoring time.
pub fn arb_authorable_atom() -> impl Strategy<Value = LoreAtom> {
    arb_atom().prop_map(|mut a| {
        a.extensions.retain(|e| !e.value.is_empty());
        a
    })
}
