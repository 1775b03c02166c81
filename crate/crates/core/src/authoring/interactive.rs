use std::io::{self, BufRead, Write};

use crate::format::{serialize_atom, ConfidenceLevel, LoreAtom, Reversibility, ScopeRisk};

use super::{AtomDraft, AuthoringError};

/// A question/answer channel for the commit builder.
pub trait PromptIo {
    /// Ask one question. `None` means the input is exhausted.
    fn ask(&mut self, prompt: &str) -> io::Result<Option<String>>;
    /// Show informational text.
    fn say(&mut self, text: &str) -> io::Result<()>;
}

/// Line-oriented prompts: questions to `output`, answers read from `input`.
pub struct LinePrompt<R, W> {
    input: R,
    output: W,
}

impl<R: BufRead, W: Write> LinePrompt<R, W> {
    pub fn new(input: R, output: W) -> Self {
        LinePrompt { input, output }
    }
}

impl<R: BufRead, W: Write> PromptIo for LinePrompt<R, W> {
    fn ask(&mut self, prompt: &str) -> io::Result<Option<String>> {
        write!(self.output, "{prompt}")?;
        self.output.flush()?;
        let mut line = String::new();
        if self.input.read_line(&mut line)? == 0 {
            writeln!(self.output)?;
            return Ok(None);
        }
        let trimmed = line.trim_end_matches(['\n', '\r']).len();
        line.truncate(trimmed);
        Ok(Some(line))
    }

    fn say(&mut self, text: &str) -> io::Result<()> {
        writeln!(self.output, "{text}")
    }
}

fn ask_trimmed(io: &mut dyn PromptIo, prompt: &str) -> io::Result<Option<String>> {
    Ok(io.ask(prompt)?.map(|s| s.trim().to_string()))
}

/// Ask repeatedly until a blank answer, passing each answer through `accept`.
fn ask_list<T>(
    io: &mut dyn PromptIo,
    prompt: &str,
    mut accept: impl FnMut(&str) -> Result<T, String>,
) -> io::Result<Vec<T>> {
    let mut items = Vec::new();
    while let Some(answer) = ask_trimmed(io, prompt)? {
        if answer.is_empty() {
            break;
        }
        match accept(&answer) {
            Ok(item) => items.push(item),
            Err(why) => io.say(&format!("  {why}"))?,
        }
    }
    Ok(items)
}

fn ask_choice(io: &mut dyn PromptIo, label: &str, choices: &[&str]) -> io::Result<Option<String>> {
    let prompt = format!("{label} [{}] (blank to skip): ", choices.join("/"));
    loop {
        match ask_trimmed(io, &prompt)? {
            None => return Ok(None),
            Some(a) if a.is_empty() => return Ok(None),
            Some(a) if choices.contains(&a.as_str()) => return Ok(Some(a)),
            Some(a) => io.say(&format!("  `{a}` is not one of {}", choices.join(", ")))?,
        }
    }
}

fn check_single(draft: AtomDraft) -> Result<(), String> {
    draft.into_atom().map(drop).map_err(|e| e.to_string())
}

/// Walk the user through each field in canonical trailer order, then show
/// the serialized message and ask for confirmation.
pub fn build_interactive(io: &mut dyn PromptIo) -> Result<LoreAtom, AuthoringError> {
    io.say("Blank answers skip a field; repeatable fields end at a blank answer.")?;
    let intent = loop {
        match ask_trimmed(io, "Intent (why this change was made): ")? {
            None => return Err(AuthoringError::Aborted),
            Some(a) if a.is_empty() => io.say("  an intent line is required")?,
            Some(a) => break a,
        }
    };

    let mut body_lines = Vec::new();
    io.say("Body: blank line ends it, a line with only `.` starts a new paragraph.")?;
    while let Some(line) = io.ask("> ")? {
        match line.trim() {
            "" => break,
            "." => body_lines.push(String::new()),
            _ => body_lines.push(line.trim_end().to_string()),
        }
    }

    let mut draft = AtomDraft::new(intent);
    if !body_lines.is_empty() {
        draft.body = Some(body_lines.join("\n"));
    }

    draft.constraints = ask_list(io, "Constraint: ", |a| {
        check_single(AtomDraft { constraints: vec![a.into()], ..AtomDraft::new("x") })?;
        Ok(a.to_string())
    })?;
    draft.rejected = ask_list(io, "Rejected (alternative | reason): ", |a| {
        let (alternative, reason) = match a.split_once('|') {
            Some((alt, why)) => (alt.trim().to_string(), Some(why.trim().to_string()).filter(|r| !r.is_empty())),
            None => (a.to_string(), None),
        };
        if alternative.is_empty() {
            return Err("the alternative before `|` is empty".into());
        }
        Ok((alternative, reason))
    })?;
    draft.confidence = ask_choice(io, "Confidence", ConfidenceLevel::VALUES)?;
    draft.scope_risk = ask_choice(io, "Scope-risk", ScopeRisk::VALUES)?;
    draft.reversibility = ask_choice(io, "Reversibility", Reversibility::VALUES)?;
    draft.directives = ask_list(io, "Directive: ", |a| Ok(a.to_string()))?;
    draft.tested = ask_list(io, "Tested (description (method)): ", |a| Ok(a.to_string()))?;
    draft.not_tested = ask_list(io, "Not-tested: ", |a| Ok(a.to_string()))?;
    draft.related = ask_list(io, "Related (commit hash): ", |a| {
        check_single(AtomDraft { related: vec![a.into()], ..AtomDraft::new("x") })?;
        Ok(a.to_string())
    })?;
    draft.extensions = ask_list(io, "Other trailer (Key: value): ", |a| {
        let (key, value) = a.split_once(':').ok_or("expected `Key: value`")?;
        let pair = (key.trim().to_string(), value.trim().to_string());
        check_single(AtomDraft { extensions: vec![pair.clone()], ..AtomDraft::new("x") })?;
        Ok(pair)
    })?;

    let atom = draft.into_atom()?;
    let message = serialize_atom(&atom)
        .map_err(|e| AuthoringError::violation(format!("$.{}", e.field), e.reason))?;
    io.say("\n--- commit message ---")?;
    io.say(message.trim_end())?;
    io.say("----------------------")?;
    match ask_trimmed(io, "Commit with this message? [y/N]: ")? {
        Some(a) if a.eq_ignore_ascii_case("y") || a.eq_ignore_ascii_case("yes") => Ok(atom),
        _ => Err(AuthoringError::Aborted),
    }
}
