use super::atom::{is_hash_ref, LoreAtom, TrailerKey};
use super::parse::{parse_rejected_value, Finding, FindingCode, ParseReport};

/// True when `intent` opens with a Conventional-Commits `type(scope):` prefix.
pub fn is_diff_summary_intent(intent: &str) -> bool {
    let bytes = intent.as_bytes();
    let type_len = bytes
        .iter()
        .position(|b| !(b.is_ascii_lowercase() || b.is_ascii_digit() || *b == b'-'))
        .unwrap_or(bytes.len());
    if type_len == 0 || !bytes[0].is_ascii_lowercase() {
        return false;
    }
    let mut rest = &intent[type_len..];
    if let Some(scoped) = rest.strip_prefix('(') {
        let Some(close) = scoped.find(')') else {
            return false;
        };
        if scoped[..close].contains('(') {
            return false;
        }
        rest = &scoped[close + 1..];
    }
    let rest = rest.strip_prefix('!').unwrap_or(rest);
    rest.starts_with(": ")
}

/// Quality checks layered on top of a successful parse.
///
/// `report` must be the report `atom` came from; empty values and malformed
/// hashes are only visible in its raw trailers.
pub fn lint_atom(atom: &LoreAtom, report: &ParseReport) -> Vec<Finding> {
    let mut findings = Vec::new();

    if is_diff_summary_intent(&atom.intent) {
        findings.push(Finding::warning(
            FindingCode::IntentIsDiffSummary,
            1,
            "intent line reads as a diff summary (`type(scope): ...`); state why the change was made",
        ));
    }

    for trailer in &report.trailers {
        if trailer.value.is_empty() {
            findings.push(Finding::error(
                FindingCode::EmptyTrailerValue,
                trailer.line,
                format!("{} trailer has no value", trailer.key),
            ));
            continue;
        }
        match TrailerKey::from_key(&trailer.key) {
            Some(TrailerKey::Rejected) => {
                let entry = parse_rejected_value(&trailer.value);
                if !entry.alternative.is_empty() && entry.reason.is_none() {
                    findings.push(Finding::warning(
                        FindingCode::RejectedMissingReason,
                        trailer.line,
                        format!("rejected alternative `{}` gives no reason", entry.alternative),
                    ));
                }
            }
            Some(TrailerKey::Related) if !is_hash_ref(&trailer.value) => {
                findings.push(Finding::error(
                    FindingCode::RelatedBadHash,
                    trailer.line,
                    format!(
                        "Related value `{}` is not a 7-40 digit hex commit hash",
                        trailer.value
                    ),
                ));
            }
            _ => {}
        }
    }

    findings
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse::{parse_message, Severity};

    fn lint(msg: &str) -> Vec<Finding> {
        let report = parse_message(msg);
        lint_atom(report.atom.as_ref().unwrap(), &report)
    }

    #[test]
    fn conventional_prefix_detection() {
        assert!(is_diff_summary_intent("fix(auth): handle expired token refresh"));
        assert!(is_diff_summary_intent("feat: add thing"));
        assert!(is_diff_summary_intent("refactor!: drop api"));
        assert!(is_diff_summary_intent("chore(deps)!: bump"));
        assert!(!is_diff_summary_intent(
            "Prevent silent session drops during long-running operations"
        ));
        assert!(!is_diff_summary_intent("Note: capitalised words are prose"));
        assert!(!is_diff_summary_intent("fix(auth handle"));
        assert!(!is_diff_summary_intent("fix:no-space"));
    }

    #[test]
    fn diff_summary_intent_warns() {
        let findings = lint("fix(auth): handle expired token refresh\n\nConfidence: low\n");
        assert_eq!(findings.len(), 1);
        assert_eq!(findings[0].code, FindingCode::IntentIsDiffSummary);
    }

    #[test]
    fn rejected_without_reason_warns() {
        let findings = lint("s\n\nRejected: Use a cron job\nRejected: ok | fine\n");
        assert_eq!(findings.len(), 1);
        assert_eq!(findings[0].code, FindingCode::RejectedMissingReason);
        assert_eq!(findings[0].line, 3);
    }

    #[test]
    fn bad_hash_and_empty_value_are_errors() {
        let findings = lint("s\n\nRelated: zzzz\nConstraint:\n");
        let codes: Vec<_> = findings.iter().map(|f| (f.code, f.severity)).collect();
        assert_eq!(
            codes,
            vec![
                (FindingCode::RelatedBadHash, Severity::Error),
                (FindingCode::EmptyTrailerValue, Severity::Error),
            ]
        );
    }
}
