use thiserror::Error;

use super::atom::{LoreAtom, TrailerKey};
use super::block::{is_valid_key, split_index};
use super::parse::{normalize_body, parse_rejected_value, parse_test_value};

/// Column limit for wrapped `Directive:` trailers.
pub const WRAP_COLUMNS: usize = 72;
const CONTINUATION_INDENT: &str = "  ";

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("invalid atom: {field}: {reason}")]
pub struct InvalidAtom {
    pub field: String,
    pub reason: String,
}

impl InvalidAtom {
    pub fn code(&self) -> &'static str {
        "invalid-atom"
    }
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> InvalidAtom {
    InvalidAtom {
        field: field.into(),
        reason: reason.into(),
    }
}

fn check_value(field: &str, value: &str, allow_empty: bool) -> Result<(), InvalidAtom> {
    if value.contains(['\n', '\r']) {
        return Err(invalid(field, "contains a line break"));
    }
    if value.trim() != value {
        return Err(invalid(field, "has leading or trailing whitespace"));
    }
    if !allow_empty && value.is_empty() {
        return Err(invalid(field, "is empty"));
    }
    Ok(())
}

/// Check every invariant that `serialize_atom` relies on to round-trip.
pub fn check_atom(atom: &LoreAtom) -> Result<(), InvalidAtom> {
    check_value("intent", &atom.intent, false)?;

    if atom.body.contains('\r') {
        return Err(invalid("body", "contains a carriage return"));
    }
    let body_lines: Vec<&str> = atom.body.split('\n').collect();
    if normalize_body(&body_lines) != atom.body {
        return Err(invalid(
            "body",
            "has trailing whitespace or leading/trailing blank lines",
        ));
    }
    if !atom.has_trailers() && !atom.body.is_empty() {
        let probe = format!("{}\n\n{}\n", atom.intent, atom.body);
        if split_index(&probe).has_block() {
            return Err(invalid(
                "body",
                "final paragraph would be read as a trailer block",
            ));
        }
    }

    for (i, c) in atom.constraints.iter().enumerate() {
        check_value(&format!("constraints[{i}]"), &c.text, false)?;
    }
    for (i, r) in atom.rejected.iter().enumerate() {
        let field = format!("rejected[{i}]");
        check_value(&field, &r.alternative, false)?;
        if let Some(reason) = &r.reason {
            check_value(&field, reason, false)?;
        }
        if parse_rejected_value(&r.to_value()) != *r {
            return Err(invalid(field, "alternative must not contain `|`"));
        }
    }
    for (i, d) in atom.directives.iter().enumerate() {
        check_value(&format!("directives[{i}]"), &d.text, false)?;
    }
    for (name, entries) in [("tested", &atom.tested), ("not_tested", &atom.not_tested)] {
        for (i, t) in entries.iter().enumerate() {
            let field = format!("{name}[{i}]");
            check_value(&field, &t.description, false)?;
            if let Some(method) = &t.method {
                check_value(&field, method, false)?;
            }
            if parse_test_value(&t.to_value()) != *t {
                return Err(invalid(
                    field,
                    "description/method would not survive a round trip",
                ));
            }
        }
    }
    // RelatedRef is only constructible from a valid hash.
    for (i, e) in atom.extensions.iter().enumerate() {
        let field = format!("extensions[{i}]");
        if !is_valid_key(&e.key) {
            return Err(invalid(field, format!("`{}` is not a valid trailer key", e.key)));
        }
        if TrailerKey::is_reserved(&e.key) {
            return Err(invalid(field, format!("`{}` is a reserved key", e.key)));
        }
        check_value(&field, &e.value, true)?;
    }
    Ok(())
}

/// Break `text` so that `prefix + first line` and each indented continuation
/// fit in [`WRAP_COLUMNS`] where possible. Breaks only fall on single spaces
/// between non-space characters, so re-joining with one space is lossless.
fn wrap_value(prefix: &str, text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let breakable = |i: usize| {
        chars[i] == ' '
            && i > 0
            && i + 1 < chars.len()
            && chars[i - 1] != ' '
            && chars[i + 1] != ' '
    };

    let mut lines = Vec::new();
    let mut start = 0;
    let mut lead = prefix.chars().count();
    loop {
        let remaining = chars.len() - start;
        if lead + remaining <= WRAP_COLUMNS {
            break;
        }
        let limit = start + WRAP_COLUMNS.saturating_sub(lead);
        let best_fit = (start + 1..=limit.min(chars.len() - 1))
            .rev()
            .find(|&i| breakable(i));
        let cut = best_fit.or_else(|| (limit + 1..chars.len()).find(|&i| breakable(i)));
        let Some(cut) = cut else { break };
        lines.push(chars[start..cut].iter().collect::<String>());
        start = cut + 1;
        lead = CONTINUATION_INDENT.len();
    }
    lines.push(chars[start..].iter().collect());
    lines
}

fn push_trailer(out: &mut Vec<String>, key: &str, value: &str) {
    if value.is_empty() {
        out.push(format!("{key}:"));
    } else {
        out.push(format!("{key}: {value}"));
    }
}

/// Render an atom as a canonical commit message.
///
/// Trailers are emitted in vocabulary order with canonical capitalization,
/// extensions last. Identical atoms always produce identical bytes.
pub fn serialize_atom(atom: &LoreAtom) -> Result<String, InvalidAtom> {
    check_atom(atom)?;

    let mut trailers = Vec::new();
    for (key, value) in atom.trailer_pairs() {
        if key == TrailerKey::Directive.canonical() {
            let prefix = format!("{key}: ");
            let mut pieces = wrap_value(&prefix, &value).into_iter();
            if let Some(first) = pieces.next() {
                trailers.push(format!("{prefix}{first}"));
            }
            trailers.extend(pieces.map(|p| format!("{CONTINUATION_INDENT}{p}")));
        } else {
            push_trailer(&mut trailers, key, &value);
        }
    }

    let mut out = String::with_capacity(256);
    out.push_str(&atom.intent);
    out.push('\n');
    if !atom.body.is_empty() {
        out.push('\n');
        out.push_str(&atom.body);
        out.push('\n');
    }
    if !trailers.is_empty() {
        out.push('\n');
        for line in trailers {
            out.push_str(&line);
            out.push('\n');
        }
    }
    Ok(out)
}
