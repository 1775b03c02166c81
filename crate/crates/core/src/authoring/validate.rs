use serde::Serialize;

use crate::format::{lint_atom, parse_message, Finding, FindingCode, LoreAtom, Severity, TrailerKey};
use crate::query::fold_order;
use crate::repo::{HistoryQuery, Repo, RepoError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidateOptions {
    /// Revision range such as `origin/main..HEAD`.
    pub range: Option<String>,
    /// Most recent N commits. Applied within `range` when both are set.
    pub last: Option<usize>,
    pub threshold: Severity,
    pub include_merges: bool,
    /// Keys that every commit must carry.
    pub required_trailers: Vec<String>,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions {
            range: None,
            last: None,
            threshold: Severity::Error,
            include_merges: false,
            required_trailers: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CommitFindings {
    pub hash: String,
    pub intent: String,
    pub findings: Vec<Finding>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SeverityTotals {
    pub error: usize,
    pub warning: usize,
}

impl SeverityTotals {
    pub fn at_or_above(&self, threshold: Severity) -> usize {
        match threshold {
            Severity::Error => self.error,
            Severity::Warning => self.error + self.warning,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub threshold: Severity,
    pub totals: SeverityTotals,
    /// Newest first; every inspected commit appears, with or without findings.
    pub commits: Vec<CommitFindings>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.totals.at_or_above(self.threshold) == 0
    }
}

fn carries(atom: &LoreAtom, key: &str) -> bool {
    match TrailerKey::from_key(key) {
        Some(reserved) => atom.count(reserved) > 0,
        None => atom.extensions.iter().any(|e| e.key.eq_ignore_ascii_case(key)),
    }
}

/// Parse and lint one message.
pub fn check_message(message: &str, required_trailers: &[String]) -> Vec<Finding> {
    let report = parse_message(message);
    let mut findings = report.findings.clone();
    if let Some(atom) = &report.atom {
        findings.extend(lint_atom(atom, &report));
        for key in required_trailers {
            if !carries(atom, key) {
                findings.push(Finding::error(
                    FindingCode::MissingRequiredTrailer,
                    0,
                    format!("required trailer `{key}` is missing"),
                ));
            }
        }
    }
    findings.sort_by_key(|f| f.line);
    findings
}

/// Check each commit in the window for format conformance.
pub fn validate(repo: &Repo, opts: &ValidateOptions) -> Result<ValidationReport, RepoError> {
    let query = HistoryQuery {
        rev_range: opts.range.clone(),
        max_count: opts.last,
        include_merges: opts.include_merges,
        ..HistoryQuery::default()
    };
    let mut commits = repo.log_stream(&query)?.collect::<Result<Vec<_>, _>>()?;
    fold_order(&mut commits);

    let mut totals = SeverityTotals::default();
    let commits = commits
        .into_iter()
        .map(|commit| {
            let findings = check_message(&commit.message, &opts.required_trailers);
            for f in &findings {
                match f.severity {
                    Severity::Error => totals.error += 1,
                    Severity::Warning => totals.warning += 1,
                }
            }
            CommitFindings {
                intent: commit.message.lines().next().unwrap_or("").trim().to_string(),
                hash: commit.hash,
                findings,
            }
        })
        .collect();
    Ok(ValidationReport {
        threshold: opts.threshold,
        totals,
        commits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn codes(message: &str) -> Vec<&'static str> {
        check_message(message, &[]).iter().map(|f| f.code.as_str()).collect()
    }

    #[test]
    fn per_message_findings() {
        assert_eq!(codes("Plain subject"), ["no-trailers"]);
        assert_eq!(codes("x\n\nConfidence: maybe\n"), ["invalid-enum"]);
        assert_eq!(codes("x\n\nRelated: zzzz\n"), ["related-bad-hash"]);
        assert!(codes("x\n\nConstraint: c\n").is_empty());
    }

    #[test]
    fn required_trailers() {
        let required = vec!["Tested".to_string(), "Ticket".to_string()];
        let findings = check_message("x\n\nTested: t\nticket: T-1\n", &required);
        assert!(findings.is_empty());
        let findings = check_message("x\n\nConstraint: c\n", &required);
        assert_eq!(findings.len(), 2);
        assert!(findings.iter().all(|f| f.code == FindingCode::MissingRequiredTrailer));
    }

    #[test]
    fn threshold_semantics() {
        let totals = SeverityTotals { error: 0, warning: 2 };
        let mut report = ValidationReport { threshold: Severity::Error, totals, commits: vec![] };
        assert!(report.passed());
        report.threshold = Severity::Warning;
        assert!(!report.passed());
    }
}
