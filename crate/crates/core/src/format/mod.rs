//! The commit-message format: an intent line, an optional narrative body and
//! a trailer block drawn from a fixed vocabulary plus free-form extensions.

mod atom;
mod block;
mod lint;
mod parse;
mod serialize;

pub use atom::{
    ConfidenceLevel, ConstraintEntry, DirectiveEntry, ExtensionTrailer, LoreAtom, RejectedEntry,
    RelatedRef, Reversibility, ScopeRisk, TestEntry, TrailerKey, UnknownVariant,
};
pub use block::{split_trailer_block, TrailerSplit};
pub use lint::{is_diff_summary_intent, lint_atom};
pub use parse::{
    normalize_body, parse_message, parse_message_bytes, parse_rejected_value, parse_test_value,
    Finding, FindingCode, ParseReport, RawTrailer, Severity, MAX_INTENT_CHARS,
};
pub use serialize::{check_atom, serialize_atom, InvalidAtom, WRAP_COLUMNS};

pub(crate) use atom::is_hash_ref;
pub(crate) use block::is_valid_key;
