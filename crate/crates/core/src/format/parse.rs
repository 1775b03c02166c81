use std::fmt;

use serde::{Serialize, Serializer};

use super::atom::{
    ConfidenceLevel, ConstraintEntry, DirectiveEntry, ExtensionTrailer, LoreAtom, RejectedEntry,
    RelatedRef, Reversibility, ScopeRisk, TestEntry, TrailerKey,
};
use super::block::{is_blank, split_index, trailer_key_len};

/// Intent lines longer than this many characters draw a `long-intent` warning.
pub const MAX_INTENT_CHARS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Warning,
    Error,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Warning => "warning",
            Severity::Error => "error",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Severity {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FindingCode {
    EmptyMessage,
    LongIntent,
    InvalidEnum,
    NoTrailers,
    DuplicateScalar,
    RejectedEmptyAlternative,
    IntentIsDiffSummary,
    RejectedMissingReason,
    RelatedBadHash,
    EmptyTrailerValue,
    MissingRequiredTrailer,
}

impl FindingCode {
    pub fn as_str(self) -> &'static str {
        match self {
            FindingCode::EmptyMessage => "empty-message",
            FindingCode::LongIntent => "long-intent",
            FindingCode::InvalidEnum => "invalid-enum",
            FindingCode::NoTrailers => "no-trailers",
            FindingCode::DuplicateScalar => "duplicate-scalar",
            FindingCode::RejectedEmptyAlternative => "rejected-empty-alternative",
            FindingCode::IntentIsDiffSummary => "intent-is-diff-summary",
            FindingCode::RejectedMissingReason => "rejected-missing-reason",
            FindingCode::RelatedBadHash => "related-bad-hash",
            FindingCode::EmptyTrailerValue => "empty-trailer-value",
            FindingCode::MissingRequiredTrailer => "missing-required-trailer",
        }
    }
}

impl fmt::Display for FindingCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for FindingCode {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub severity: Severity,
    pub code: FindingCode,
    pub message: String,
    /// 1-based message line; 0 when the finding is not tied to a line.
    pub line: usize,
}

impl Finding {
    pub fn error(code: FindingCode, line: usize, message: impl Into<String>) -> Finding {
        Finding {
            severity: Severity::Error,
            code,
            message: message.into(),
            line,
        }
    }

    pub fn warning(code: FindingCode, line: usize, message: impl Into<String>) -> Finding {
        Finding {
            severity: Severity::Warning,
            code,
            message: message.into(),
            line,
        }
    }
}

/// One trailer as it appeared in the block, continuations joined.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RawTrailer {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ParseReport {
    /// Absent iff `findings` holds an error.
    pub atom: Option<LoreAtom>,
    pub findings: Vec<Finding>,
    /// Every trailer in the block, in source order, including ones the typed
    /// fields rejected.
    pub trailers: Vec<RawTrailer>,
}

impl ParseReport {
    pub fn has_errors(&self) -> bool {
        self.findings.iter().any(|f| f.severity == Severity::Error)
    }

    pub fn has_finding(&self, code: FindingCode) -> bool {
        self.findings.iter().any(|f| f.code == code)
    }
}

/// Split a `Rejected:` value on its first `|`.
pub fn parse_rejected_value(value: &str) -> RejectedEntry {
    match value.split_once('|') {
        Some((alternative, reason)) => {
            let reason = reason.trim();
            RejectedEntry {
                alternative: alternative.trim().to_string(),
                reason: (!reason.is_empty()).then(|| reason.to_string()),
            }
        }
        None => RejectedEntry {
            alternative: value.trim().to_string(),
            reason: None,
        },
    }
}

/// Split a `Tested:`/`Not-tested:` value into description and trailing
/// `(method)`. The suffix is only taken when both sides are non-empty.
pub fn parse_test_value(value: &str) -> TestEntry {
    let value = value.trim();
    let whole = || TestEntry {
        description: value.to_string(),
        method: None,
    };
    let Some(inner_end) = value.strip_suffix(')') else {
        return whole();
    };
    let Some(open) = inner_end.rfind('(') else {
        return whole();
    };
    let method = inner_end[open + 1..].trim();
    let description = inner_end[..open].trim();
    if method.is_empty() || description.is_empty() || method.contains(')') {
        return whole();
    }
    TestEntry {
        description: description.to_string(),
        method: Some(method.to_string()),
    }
}

/// Gather block lines into trailers, joining continuation lines with one space.
fn collect_trailers(lines: &[&str], first_line_no: usize) -> Vec<RawTrailer> {
    let mut trailers: Vec<RawTrailer> = Vec::new();
    for (offset, line) in lines.iter().enumerate() {
        if let Some(key_len) = trailer_key_len(line) {
            trailers.push(RawTrailer {
                key: line[..key_len].to_string(),
                value: line[key_len + 1..].trim().to_string(),
                line: first_line_no + offset,
            });
        } else if let Some(last) = trailers.last_mut() {
            let piece = line.trim();
            if last.value.is_empty() {
                last.value = piece.to_string();
            } else {
                last.value.push(' ');
                last.value.push_str(piece);
            }
        }
    }
    trailers
}

fn set_scalar<T: std::str::FromStr>(
    slot: &mut Option<T>,
    trailer: &RawTrailer,
    key: TrailerKey,
    findings: &mut Vec<Finding>,
) where
    T::Err: fmt::Display,
{
    if trailer.value.is_empty() {
        return;
    }
    match trailer.value.parse::<T>() {
        Ok(parsed) => {
            if slot.is_some() {
                findings.push(Finding::warning(
                    FindingCode::DuplicateScalar,
                    trailer.line,
                    format!("{key} given more than once; the last value wins"),
                ));
            }
            *slot = Some(parsed);
        }
        Err(err) => findings.push(Finding::warning(
            FindingCode::InvalidEnum,
            trailer.line,
            format!("{key}: {err}"),
        )),
    }
}

/// Parse a full commit message into a Lore atom plus findings.
pub fn parse_message(message: &str) -> ParseReport {
    if message.trim().is_empty() {
        return ParseReport {
            atom: None,
            findings: vec![Finding::error(
                FindingCode::EmptyMessage,
                1,
                "commit message is empty",
            )],
            trailers: Vec::new(),
        };
    }

    let index = split_index(message);
    let mut findings = Vec::new();

    let head = &index.lines[..index.head_end];
    // A non-blank message always has a non-blank head: the intent paragraph
    // is never part of the trailer block.
    let intent_idx = head.iter().position(|l| !is_blank(l)).unwrap_or(0);
    let intent = head.get(intent_idx).map_or("", |l| l.trim()).to_string();
    if intent.chars().count() > MAX_INTENT_CHARS {
        findings.push(Finding::warning(
            FindingCode::LongIntent,
            intent_idx + 1,
            format!(
                "intent line is {} characters; keep it under {MAX_INTENT_CHARS}",
                intent.chars().count()
            ),
        ));
    }
    let body = normalize_body(head.get(intent_idx + 1..).unwrap_or_default());

    let mut atom = LoreAtom {
        intent,
        body,
        ..LoreAtom::default()
    };

    let trailers = collect_trailers(
        &index.lines[index.block_start..index.block_end],
        index.block_start + 1,
    );
    if trailers.is_empty() {
        findings.push(Finding::warning(
            FindingCode::NoTrailers,
            0,
            "message carries no trailer block",
        ));
    }

    for trailer in &trailers {
        let Some(key) = TrailerKey::from_key(&trailer.key) else {
            atom.extensions.push(ExtensionTrailer {
                key: trailer.key.clone(),
                value: trailer.value.clone(),
            });
            continue;
        };
        let value = trailer.value.as_str();
        match key {
            TrailerKey::Confidence => {
                set_scalar::<ConfidenceLevel>(&mut atom.confidence, trailer, key, &mut findings)
            }
            TrailerKey::ScopeRisk => {
                set_scalar::<ScopeRisk>(&mut atom.scope_risk, trailer, key, &mut findings)
            }
            TrailerKey::Reversibility => {
                set_scalar::<Reversibility>(&mut atom.reversibility, trailer, key, &mut findings)
            }
            // Empty values are reported by lint_atom from the raw trailers.
            _ if value.is_empty() => {}
            TrailerKey::Constraint => atom.constraints.push(ConstraintEntry {
                text: value.to_string(),
            }),
            TrailerKey::Rejected => {
                let entry = parse_rejected_value(value);
                if entry.alternative.is_empty() {
                    findings.push(Finding::warning(
                        FindingCode::RejectedEmptyAlternative,
                        trailer.line,
                        "Rejected trailer names no alternative before `|`",
                    ));
                } else {
                    atom.rejected.push(entry);
                }
            }
            TrailerKey::Directive => atom.directives.push(DirectiveEntry {
                text: value.to_string(),
            }),
            TrailerKey::Tested => atom.tested.push(parse_test_value(value)),
            TrailerKey::NotTested => atom.not_tested.push(parse_test_value(value)),
            // Malformed hashes are reported by lint_atom.
            TrailerKey::Related => atom.related.extend(RelatedRef::parse(value)),
        }
    }

    ParseReport {
        atom: Some(atom),
        findings,
        trailers,
    }
}

/// Decode raw message bytes, replacing invalid UTF-8, then parse.
pub fn parse_message_bytes(message: &[u8]) -> ParseReport {
    parse_message(&String::from_utf8_lossy(message))
}

/// Body text as the parser sees it: trailing whitespace stripped from each
/// line, leading and trailing blank lines dropped.
pub fn normalize_body<S: AsRef<str>>(lines: &[S]) -> String {
    let trimmed: Vec<&str> = lines.iter().map(|l| l.as_ref().trim_end()).collect();
    let Some(first) = trimmed.iter().position(|l| !l.is_empty()) else {
        return String::new();
    };
    let last = trimmed.iter().rposition(|l| !l.is_empty()).unwrap_or(first);
    trimmed[first..=last].join("\n")
}
