//! Human and JSON renderings of command results.
//!
//! Both renderers walk entries in the same order, so a human reader and an
//! agent parsing JSON see the same sequence.

use std::fmt::Write as _;

use chrono::{DateTime, Utc};
use lore_core::authoring::ValidationReport;
use lore_core::duration::AgeThreshold;
use lore_core::format::LoreAtom;
use lore_core::query::{
    AttributedAtom, ConstraintSet, ContextSummary, CoverageItem, CoverageMap, DirectiveList, RejectedLedger,
    StaleReport,
};
use serde::Serialize;

/// Version of the JSON document layout.
pub const OUTPUT_VERSION: u32 = 1;

const SHORT_HASH: usize = 12;

/// Result of one successful command.
#[derive(Debug)]
pub enum Output {
    Context(ContextSummary),
    Constraints { path: String, set: ConstraintSet },
    Rejected { path: String, ledger: RejectedLedger },
    Directives { path: String, list: DirectiveList },
    Coverage { path: String, map: CoverageMap },
    Stale { scope: Option<String>, older_than: AgeThreshold, report: StaleReport },
    Commit { hash: String, atom: LoreAtom },
    Validate(ValidationReport),
}

#[derive(Serialize)]
struct CreatedCommit<'a> {
    hash: &'a str,
    atom: &'a LoreAtom,
}

/// Compact JSON: `lore_output` first, then the command's fields in a fixed
/// order. Struct fields keep declaration order, so equal results give equal
/// bytes.
pub fn json(output: &Output) -> String {
    let fields: Vec<(&str, String)> = match output {
        Output::Context(summary) => vec![("context", to_json(summary))],
        Output::Constraints { set, .. } => vec![("constraints", to_json(&set.entries))],
        Output::Rejected { ledger, .. } => vec![("rejected", to_json(&ledger.entries))],
        Output::Directives { list, .. } => vec![("directives", to_json(&list.entries))],
        Output::Coverage { map, .. } => vec![("coverage", to_json(map))],
        Output::Stale { older_than, report, .. } => vec![
            ("older_than", to_json(&older_than.to_string())),
            ("stale", to_json(&report.entries)),
        ],
        Output::Commit { hash, atom } => vec![("commit", to_json(&CreatedCommit { hash, atom }))],
        Output::Validate(report) => vec![("validate", to_json(report))],
    };
    let mut out = format!("{{\"lore_output\":{OUTPUT_VERSION}");
    for (key, value) in fields {
        let _ = write!(out, ",{}:{value}", to_json(&key));
    }
    out.push_str("}\n");
    out
}

fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    // Result types hold only strings, numbers and plain containers.
    serde_json::to_string(value).expect("result types always serialize")
}

/// Terminal styling; a no-op unless color is enabled.
#[derive(Clone, Copy, Debug)]
pub struct Style {
    pub color: bool,
}

impl Style {
    fn paint(self, code: &str, text: &str) -> String {
        if self.color {
            format!("\x1b[{code}m{text}\x1b[0m")
        } else {
            text.to_string()
        }
    }

    fn hash(self, hash: &str) -> String {
        self.paint("33", short(hash))
    }

    fn bold(self, text: &str) -> String {
        self.paint("1", text)
    }

    fn dim(self, text: &str) -> String {
        self.paint("2", text)
    }

    fn alert(self, text: &str) -> String {
        self.paint("31", text)
    }
}

fn short(hash: &str) -> &str {
    hash.get(..SHORT_HASH).unwrap_or(hash)
}

/// `2024-05-01 12:00 UTC (3 days ago)`.
fn when(ts: &DateTime<Utc>, now: &DateTime<Utc>) -> String {
    format!("{} ({})", ts.format("%Y-%m-%d %H:%M UTC"), relative(ts, now))
}

fn relative(ts: &DateTime<Utc>, now: &DateTime<Utc>) -> String {
    let secs = (*now - *ts).num_seconds();
    if secs < 0 {
        return "in the future".to_string();
    }
    let (n, unit) = match secs {
        0..=59 => return "just now".to_string(),
        60..=3_599 => (secs / 60, "minute"),
        3_600..=86_399 => (secs / 3_600, "hour"),
        86_400..=5_183_999 => (secs / 86_400, "day"),
        5_184_000..=31_535_999 => (secs / 2_592_000, "month"),
        _ => (secs / 31_536_000, "year"),
    };
    format!("{n} {unit}{} ago", if n == 1 { "" } else { "s" })
}

/// Writes one header line per source commit, before its first entry.
struct Grouper<'a> {
    out: &'a mut String,
    style: Style,
    now: DateTime<Utc>,
    last: Option<String>,
}

impl<'a> Grouper<'a> {
    fn new(out: &'a mut String, style: Style, now: DateTime<Utc>) -> Grouper<'a> {
        Grouper { out, style, now, last: None }
    }

    fn entry(&mut self, hash: &str, date: &DateTime<Utc>, line: &str) {
        if self.last.as_deref() != Some(hash) {
            if self.last.is_some() {
                self.out.push('\n');
            }
            let _ = writeln!(self.out, "{}  {}", self.style.hash(hash), self.style.dim(&when(date, &self.now)));
            self.last = Some(hash.to_string());
        }
        let _ = writeln!(self.out, "  {line}");
    }
}

pub fn human(output: &Output, style: Style, now: DateTime<Utc>) -> String {
    let mut out = String::new();
    match output {
        Output::Context(summary) => context(&mut out, summary, style, now),
        Output::Constraints { path, set } => {
            if set.entries.is_empty() {
                let _ = writeln!(out, "no constraints recorded for {path}");
            }
            let mut g = Grouper::new(&mut out, style, now);
            for c in &set.entries {
                let line = if c.stale { format!("{} {}", c.text, style.alert("[stale]")) } else { c.text.clone() };
                g.entry(&c.source_hash, &c.author_date, &line);
            }
        }
        Output::Rejected { path, ledger } => {
            if ledger.entries.is_empty() {
                let _ = writeln!(out, "no rejected alternatives recorded for {path}");
            }
            let mut g = Grouper::new(&mut out, style, now);
            for r in &ledger.entries {
                let line = match &r.reason {
                    Some(reason) => format!("{} | {reason}", r.alternative),
                    None => r.alternative.clone(),
                };
                g.entry(&r.source_hash, &r.author_date, &line);
            }
        }
        Output::Directives { path, list } => {
            if list.entries.is_empty() {
                let _ = writeln!(out, "no directives recorded for {path}");
            }
            let mut g = Grouper::new(&mut out, style, now);
            for d in &list.entries {
                g.entry(&d.source_hash, &d.author_date, &d.text);
            }
        }
        Output::Coverage { path, map } => {
            if map.tested.is_empty() && map.not_tested.is_empty() {
                let _ = writeln!(out, "no test claims recorded for {path}");
            } else {
                coverage_section(&mut out, "Tested", &map.tested, style, now);
                out.push('\n');
                coverage_section(&mut out, "Not tested", &map.not_tested, style, now);
            }
        }
        Output::Stale { scope, older_than, report } => stale(&mut out, scope.as_deref(), older_than, report, style, now),
        Output::Commit { hash, atom } => {
            let _ = writeln!(out, "created {} {}", style.hash(hash), atom.intent);
        }
        Output::Validate(report) => validation(&mut out, report, style),
    }
    out
}

fn context(out: &mut String, summary: &ContextSummary, style: Style, now: DateTime<Utc>) {
    let path = &summary.path;
    let plain = summary.non_lore_commits;
    if summary.atoms.is_empty() {
        let _ = writeln!(out, "no lore recorded for {path} ({plain} commits without lore)");
        return;
    }
    let c = &summary.counts;
    let _ = writeln!(
        out,
        "{}: {} lore commits, {plain} without lore",
        style.bold(path),
        summary.atoms.len()
    );
    let _ = writeln!(
        out,
        "constraints {}, rejected {}, directives {}, tested {}, not tested {}, related {}, other {}",
        c.constraints, c.rejected, c.directives, c.tested, c.not_tested, c.related, c.extensions
    );
    for atom in &summary.atoms {
        out.push('\n');
        attributed(out, atom, style, now);
    }
    if !summary.related.is_empty() {
        let _ = writeln!(out, "\n{}", style.bold("Related commits"));
        for atom in &summary.related {
            out.push('\n');
            attributed(out, atom, style, now);
        }
    }
    if !summary.unresolved_related.is_empty() {
        out.push('\n');
        for u in &summary.unresolved_related {
            let _ = writeln!(
                out,
                "unresolved Related: {} in {} ({})",
                u.reference,
                style.hash(&u.from_hash),
                u.reason
            );
        }
    }
}

fn attributed(out: &mut String, a: &AttributedAtom, style: Style, now: DateTime<Utc>) {
    let commit = &a.commit;
    let _ = writeln!(
        out,
        "{}  {}  {}",
        style.hash(&commit.hash),
        style.dim(&when(&commit.author_date, &now)),
        commit.author_name
    );
    let _ = writeln!(out, "  {}", style.bold(&a.atom.intent));
    for line in a.atom.body.lines() {
        let _ = writeln!(out, "{}", format!("  {line}").trim_end());
    }
    for (key, value) in a.atom.trailer_pairs() {
        let _ = writeln!(out, "    {key}: {value}");
    }
}

fn coverage_section(out: &mut String, title: &str, items: &[CoverageItem], style: Style, now: DateTime<Utc>) {
    let _ = writeln!(out, "{}", style.bold(&format!("{title}:")));
    if items.is_empty() {
        let _ = writeln!(out, "  (none)");
        return;
    }
    let mut g = Grouper::new(out, style, now);
    for item in items {
        let line = match &item.method {
            Some(method) => format!("{} ({method})", item.description),
            None => item.description.clone(),
        };
        g.entry(&item.source_hash, &item.author_date, &line);
    }
}

fn stale(
    out: &mut String,
    scope: Option<&str>,
    older_than: &AgeThreshold,
    report: &StaleReport,
    style: Style,
    now: DateTime<Utc>,
) {
    if report.entries.is_empty() {
        let under = scope.map(|p| format!(" under {p}")).unwrap_or_default();
        let _ = writeln!(out, "no stale constraints or directives older than {older_than}{under}");
        return;
    }
    let mut path: Option<&str> = None;
    for e in &report.entries {
        if path != Some(e.path.as_str()) {
            if path.is_some() {
                out.push('\n');
            }
            let _ = writeln!(out, "{}", style.bold(&e.path));
            path = Some(&e.path);
        }
        let n = e.later_touch_count;
        let _ = writeln!(
            out,
            "  {}  {}  {}: {} {}",
            style.hash(&e.source_hash),
            style.dim(&when(&e.author_date, &now)),
            e.kind.as_str(),
            e.text,
            style.dim(&format!("({n} later commit{})", if n == 1 { "" } else { "s" }))
        );
    }
}

fn validation(out: &mut String, report: &ValidationReport, style: Style) {
    for commit in &report.commits {
        let _ = writeln!(out, "{}  {}", style.hash(&commit.hash), commit.intent);
        if commit.findings.is_empty() {
            let _ = writeln!(out, "  ok");
        }
        for f in &commit.findings {
            let severity = style.alert(f.severity.as_str());
            let at = if f.line > 0 { format!("line {}: ", f.line) } else { String::new() };
            let _ = writeln!(out, "  {severity} [{}] {at}{}", f.code, f.message);
        }
    }
    let t = &report.totals;
    let verdict = if report.passed() { "passed" } else { "failed" };
    let _ = writeln!(
        out,
        "{} commits checked: {} errors, {} warnings (failing at {}): {verdict}",
        report.commits.len(),
        t.error,
        t.warning,
        report.threshold
    );
}
