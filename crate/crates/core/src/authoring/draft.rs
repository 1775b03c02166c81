use crate::format::{
    check_atom, normalize_body, parse_rejected_value, parse_test_value, ConstraintEntry,
    DirectiveEntry, ExtensionTrailer, LoreAtom, RejectedEntry, RelatedRef,
};

use super::AuthoringError;

/// An atom under construction. Values are kept as entered until
/// [`AtomDraft::into_atom`] checks them.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AtomDraft {
    pub intent: String,
    pub body: Option<String>,
    pub constraints: Vec<String>,
    /// `(alternative, reason)` pairs.
    pub rejected: Vec<(String, Option<String>)>,
    pub confidence: Option<String>,
    pub scope_risk: Option<String>,
    pub reversibility: Option<String>,
    pub directives: Vec<String>,
    /// `description` or `description (method)`.
    pub tested: Vec<String>,
    pub not_tested: Vec<String>,
    pub related: Vec<String>,
    /// `(key, value)` pairs.
    pub extensions: Vec<(String, String)>,
}

fn single_line(path: &str, value: &str) -> Result<String, AuthoringError> {
    if value.contains(['\n', '\r']) {
        return Err(AuthoringError::violation(path, "must be a single line"));
    }
    let value = value.trim();
    if value.is_empty() {
        return Err(AuthoringError::violation(path, "must not be empty"));
    }
    Ok(value.to_string())
}

fn enum_value<T: std::str::FromStr>(path: &str, value: &Option<String>) -> Result<Option<T>, AuthoringError>
where
    T::Err: std::fmt::Display,
{
    value
        .as_deref()
        .map(|v| v.parse::<T>().map_err(|e| AuthoringError::violation(path, e.to_string())))
        .transpose()
}

impl AtomDraft {
    pub fn new(intent: impl Into<String>) -> AtomDraft {
        AtomDraft {
            intent: intent.into(),
            ..AtomDraft::default()
        }
    }

    /// Check every field and produce the atom. Errors name the offending
    /// field as a JSON path such as `$.constraints[2]`.
    pub fn into_atom(self) -> Result<LoreAtom, AuthoringError> {
        let list = |name: &str, values: &[String]| -> Result<Vec<String>, AuthoringError> {
            values
                .iter()
                .enumerate()
                .map(|(i, v)| single_line(&format!("$.{name}[{i}]"), v))
                .collect()
        };

        let mut atom = LoreAtom::new(single_line("$.intent", &self.intent)?);
        if let Some(body) = &self.body {
            let lines: Vec<&str> = body.lines().collect();
            atom.body = normalize_body(&lines);
        }
        atom.constraints = list("constraints", &self.constraints)?
            .into_iter()
            .map(|text| ConstraintEntry { text })
            .collect();
        for (i, (alternative, reason)) in self.rejected.iter().enumerate() {
            let path = format!("$.rejected[{i}]");
            let alternative = single_line(&format!("{path}.alternative"), alternative)?;
            if alternative.contains('|') {
                return Err(AuthoringError::violation(
                    format!("{path}.alternative"),
                    "must not contain `|`",
                ));
            }
            let reason = reason
                .as_deref()
                .map(|r| single_line(&format!("{path}.reason"), r))
                .transpose()?;
            let entry = RejectedEntry {
                alternative,
                reason,
            };
            debug_assert_eq!(parse_rejected_value(&entry.to_value()), entry);
            atom.rejected.push(entry);
        }
        atom.confidence = enum_value("$.confidence", &self.confidence)?;
        atom.scope_risk = enum_value("$.scope_risk", &self.scope_risk)?;
        atom.reversibility = enum_value("$.reversibility", &self.reversibility)?;
        atom.directives = list("directives", &self.directives)?
            .into_iter()
            .map(|text| DirectiveEntry { text })
            .collect();
        atom.tested = list("tested", &self.tested)?
            .iter()
            .map(|v| parse_test_value(v))
            .collect();
        atom.not_tested = list("not_tested", &self.not_tested)?
            .iter()
            .map(|v| parse_test_value(v))
            .collect();
        for (i, value) in self.related.iter().enumerate() {
            let path = format!("$.related[{i}]");
            let value = single_line(&path, value)?;
            let reference = RelatedRef::parse(&value).ok_or_else(|| {
                AuthoringError::violation(&path, "must be a 7-40 digit hex commit hash")
            })?;
            atom.related.push(reference);
        }
        for (i, (key, value)) in self.extensions.iter().enumerate() {
            let path = format!("$.extensions[{i}]");
            atom.extensions.push(ExtensionTrailer {
                key: key.trim().to_string(),
                value: single_line(&format!("{path}.value"), value)?,
            });
        }

        check_atom(&atom).map_err(|e| AuthoringError::violation(format!("$.{}", e.field), e.reason))?;
        Ok(atom)
    }
}
