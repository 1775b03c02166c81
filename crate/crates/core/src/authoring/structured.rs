//! The JSON document accepted by `lore commit --from-json`.
//!
//! ```json
//! {
//!   "lore": 1,
//!   "intent": "Prevent silent session drops",
//!   "body": "Narrative context.",
//!   "constraints": ["..."],
//!   "rejected": [{"alternative": "...", "reason": "..."}],
//!   "confidence": "high",
//!   "scope_risk": "narrow",
//!   "reversibility": "clean",
//!   "directives": ["..."],
//!   "tested": ["Single expired token refresh (unit)"],
//!   "not_tested": ["..."],
//!   "related": ["abc1234"],
//!   "extensions": [{"key": "Ticket", "value": "OPS-12"}]
//! }
//! ```
//!
//! Only `intent` is required. Unknown keys are rejected so typos surface
//! instead of silently dropping knowledge.

use serde_json::{Map, Value};

use crate::format::LoreAtom;

use super::{AtomDraft, AuthoringError};

/// Value of the optional `"lore"` key.
pub const SCHEMA_VERSION: u64 = 1;

const TOP_LEVEL_KEYS: &[&str] = &[
    "lore",
    "intent",
    "body",
    "constraints",
    "rejected",
    "confidence",
    "scope_risk",
    "reversibility",
    "directives",
    "tested",
    "not_tested",
    "related",
    "extensions",
];

fn type_name(value: &Value) -> &'static str {
    match value {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

fn expect_string(path: &str, value: &Value) -> Result<String, AuthoringError> {
    value
        .as_str()
        .map(str::to_string)
        .ok_or_else(|| AuthoringError::violation(path, format!("expected a string, found {}", type_name(value))))
}

fn expect_object<'v>(path: &str, value: &'v Value, allowed: &[&str]) -> Result<&'v Map<String, Value>, AuthoringError> {
    let object = value.as_object().ok_or_else(|| {
        AuthoringError::violation(path, format!("expected an object, found {}", type_name(value)))
    })?;
    // Report the first unknown key in sorted order so the message is stable.
    let mut unknown: Vec<&String> = object.keys().filter(|k| !allowed.contains(&k.as_str())).collect();
    unknown.sort();
    if let Some(key) = unknown.first() {
        return Err(AuthoringError::violation(format!("{path}.{key}"), "unknown key"));
    }
    Ok(object)
}

fn expect_array<'v>(path: &str, value: &'v Value) -> Result<&'v [Value], AuthoringError> {
    value.as_array().map(Vec::as_slice).ok_or_else(|| {
        AuthoringError::violation(path, format!("expected an array, found {}", type_name(value)))
    })
}

fn string_list(object: &Map<String, Value>, key: &str) -> Result<Vec<String>, AuthoringError> {
    let Some(value) = object.get(key) else {
        return Ok(Vec::new());
    };
    let path = format!("$.{key}");
    expect_array(&path, value)?
        .iter()
        .enumerate()
        .map(|(i, v)| expect_string(&format!("{path}[{i}]"), v))
        .collect()
}

fn optional_string(object: &Map<String, Value>, key: &str) -> Result<Option<String>, AuthoringError> {
    object
        .get(key)
        .map(|v| expect_string(&format!("$.{key}"), v))
        .transpose()
}

/// Parse a structured document into a draft, checking shape only.
fn parse_document(doc: &str) -> Result<AtomDraft, AuthoringError> {
    let value: Value = serde_json::from_str(doc).map_err(|e| AuthoringError::BadJson(e.to_string()))?;
    let object = expect_object("$", &value, TOP_LEVEL_KEYS)?;

    if let Some(version) = object.get("lore") {
        if version.as_u64() != Some(SCHEMA_VERSION) {
            return Err(AuthoringError::violation(
                "$.lore",
                format!("unsupported schema version, expected {SCHEMA_VERSION}"),
            ));
        }
    }
    let intent = match object.get("intent") {
        Some(v) => expect_string("$.intent", v)?,
        None => return Err(AuthoringError::violation("$.intent", "required key is missing")),
    };

    let mut draft = AtomDraft::new(intent);
    draft.body = optional_string(object, "body")?;
    draft.constraints = string_list(object, "constraints")?;
    if let Some(value) = object.get("rejected") {
        for (i, item) in expect_array("$.rejected", value)?.iter().enumerate() {
            let path = format!("$.rejected[{i}]");
            let entry = expect_object(&path, item, &["alternative", "reason"])?;
            let alternative = match entry.get("alternative") {
                Some(v) => expect_string(&format!("{path}.alternative"), v)?,
                None => {
                    return Err(AuthoringError::violation(
                        format!("{path}.alternative"),
                        "required key is missing",
                    ))
                }
            };
            let reason = entry
                .get("reason")
                .map(|v| expect_string(&format!("{path}.reason"), v))
                .transpose()?;
            draft.rejected.push((alternative, reason));
        }
    }
    draft.confidence = optional_string(object, "confidence")?;
    draft.scope_risk = optional_string(object, "scope_risk")?;
    draft.reversibility = optional_string(object, "reversibility")?;
    draft.directives = string_list(object, "directives")?;
    draft.tested = string_list(object, "tested")?;
    draft.not_tested = string_list(object, "not_tested")?;
    draft.related = string_list(object, "related")?;
    if let Some(value) = object.get("extensions") {
        for (i, item) in expect_array("$.extensions", value)?.iter().enumerate() {
            let path = format!("$.extensions[{i}]");
            let entry = expect_object(&path, item, &["key", "value"])?;
            let field = |name: &str| match entry.get(name) {
                Some(v) => expect_string(&format!("{path}.{name}"), v),
                None => Err(AuthoringError::violation(
                    format!("{path}.{name}"),
                    "required key is missing",
                )),
            };
            draft.extensions.push((field("key")?, field("value")?));
        }
    }
    Ok(draft)
}

/// Build an atom from a structured JSON document.
pub fn build_from_structured(doc: &str) -> Result<LoreAtom, AuthoringError> {
    parse_document(doc)?.into_atom()
}

/// The structured document for `atom`; inverse of [`build_from_structured`].
pub fn render_structured(atom: &LoreAtom) -> String {
    serde_json::to_string(atom).expect("atom serialization is infallible")
}
