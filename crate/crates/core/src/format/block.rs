//! Trailer-block detection.
//!
//! The trailer block is the final blank-line-delimited paragraph of a message,
//! provided every line in it is either `Key: value` or an indented
//! continuation, and it starts with a `Key: value` line. The paragraph holding
//! the intent line is never a trailer block. This matches the rule git's
//! `interpret-trailers` applies to all-trailer paragraphs.

/// A message split into the part before the trailer block and the block itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrailerSplit {
    pub head: String,
    pub block_lines: Vec<String>,
}

/// Line-index view of a split, used by the parser to report line numbers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct SplitIndex<'a> {
    pub lines: Vec<&'a str>,
    /// Lines `[0, head_end)` make up the head.
    pub head_end: usize,
    /// Lines `[block_start, block_end)` make up the trailer block (empty when equal).
    pub block_start: usize,
    pub block_end: usize,
}

impl SplitIndex<'_> {
    pub fn has_block(&self) -> bool {
        self.block_start < self.block_end
    }
}

pub(crate) fn is_blank(line: &str) -> bool {
    line.trim().is_empty()
}

/// Length of the key if `line` opens a trailer: `[A-Za-z][A-Za-z0-9-]*:` then
/// whitespace or end of line.
pub(crate) fn trailer_key_len(line: &str) -> Option<usize> {
    let bytes = line.as_bytes();
    if !bytes.first()?.is_ascii_alphabetic() {
        return None;
    }
    let key_len = bytes
        .iter()
        .position(|&b| !(b.is_ascii_alphanumeric() || b == b'-'))?;
    if bytes[key_len] != b':' {
        return None;
    }
    match bytes.get(key_len + 1) {
        None => Some(key_len),
        Some(b) if b.is_ascii_whitespace() => Some(key_len),
        Some(_) => None,
    }
}

pub(crate) fn is_trailer_line(line: &str) -> bool {
    trailer_key_len(line).is_some()
}

pub(crate) fn is_continuation_line(line: &str) -> bool {
    line.starts_with([' ', '\t']) && !is_blank(line)
}

pub(crate) fn is_valid_key(key: &str) -> bool {
    let mut bytes = key.bytes();
    matches!(bytes.next(), Some(b) if b.is_ascii_alphabetic())
        && bytes.all(|b| b.is_ascii_alphanumeric() || b == b'-')
}

fn no_block(lines: Vec<&str>) -> SplitIndex<'_> {
    let n = lines.len();
    SplitIndex {
        lines,
        head_end: n,
        block_start: n,
        block_end: n,
    }
}

pub(crate) fn split_index(message: &str) -> SplitIndex<'_> {
    let lines: Vec<&str> = message.lines().collect();

    let Some(last) = lines.iter().rposition(|l| !is_blank(l)) else {
        return no_block(lines);
    };
    let start = lines[..last]
        .iter()
        .rposition(|l| is_blank(l))
        .map_or(0, |i| i + 1);

    // The intent paragraph is never a trailer block.
    if !lines[..start].iter().any(|l| !is_blank(l)) {
        return no_block(lines);
    }

    let paragraph = &lines[start..=last];
    let well_formed = is_trailer_line(paragraph[0])
        && paragraph
            .iter()
            .all(|l| is_trailer_line(l) || is_continuation_line(l));
    if !well_formed {
        return no_block(lines);
    }

    let head_end = lines[..start]
        .iter()
        .rposition(|l| !is_blank(l))
        .map_or(0, |i| i + 1);
    SplitIndex {
        lines,
        head_end,
        block_start: start,
        block_end: last + 1,
    }
}

/// Split a message into its head and trailer-block lines.
///
/// When no trailer block exists the head is the whole message and
/// `block_lines` is empty. Total: never fails.
pub fn split_trailer_block(message: &str) -> TrailerSplit {
    let index = split_index(message);
    if !index.has_block() {
        return TrailerSplit {
            head: message.to_string(),
            block_lines: Vec::new(),
        };
    }
    TrailerSplit {
        head: index.lines[..index.head_end].join("\n"),
        block_lines: index.lines[index.block_start..index.block_end]
            .iter()
            .map(|l| l.to_string())
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subject_only_is_never_split() {
        let split = split_trailer_block("subject only");
        assert_eq!(split.head, "subject only");
        assert!(split.block_lines.is_empty());
    }

    #[test]
    fn single_trailer_shaped_paragraph_is_not_a_block() {
        let msg = "Constraint: looks like a trailer\nConstraint: so does this";
        assert!(split_trailer_block(msg).block_lines.is_empty());
    }

    #[test]
    fn mixed_paragraph_disqualifies_block() {
        let split = split_trailer_block("subject\n\nConstraint: A\nnot a trailer line");
        assert!(split.block_lines.is_empty());
        assert_eq!(split.head, "subject\n\nConstraint: A\nnot a trailer line");
    }

    #[test]
    fn leading_continuation_disqualifies_block() {
        let split = split_trailer_block("subject\n\n  indented\nConstraint: A");
        assert!(split.block_lines.is_empty());
    }

    #[test]
    fn trailing_blank_lines_are_ignored() {
        let split = split_trailer_block("subject\n\nbody\n\nConstraint: A\n\n\n");
        assert_eq!(split.head, "subject\n\nbody");
        assert_eq!(split.block_lines, vec!["Constraint: A"]);
    }

    #[test]
    fn crlf_line_endings_split_like_lf() {
        let split = split_trailer_block("subject\r\n\r\nConstraint: A\r\nTicket: X-1\r\n");
        assert_eq!(split.head, "subject");
        assert_eq!(split.block_lines, vec!["Constraint: A", "Ticket: X-1"]);
    }

    #[test]
    fn key_grammar() {
        assert!(is_trailer_line("Constraint: x"));
        assert!(is_trailer_line("Not-tested:\tx"));
        assert!(is_trailer_line("Constraint:"));
        assert!(is_trailer_line("X1-y: z"));
        assert!(!is_trailer_line("Constraint:x"));
        assert!(!is_trailer_line("Constraint : x"));
        assert!(!is_trailer_line("1abc: x"));
        assert!(!is_trailer_line("-abc: x"));
        assert!(!is_trailer_line("has space: x"));
        assert!(!is_trailer_line("https://example.com"));
        assert!(is_continuation_line("  -- more"));
        assert!(is_continuation_line("\tmore"));
        assert!(!is_continuation_line("   "));
    }
}
