use std::fmt;
use std::str::FromStr;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

/// The nine reserved trailer keys, in canonical emission order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TrailerKey {
    Constraint,
    Rejected,
    Confidence,
    ScopeRisk,
    Reversibility,
    Directive,
    Tested,
    NotTested,
    Related,
}

impl TrailerKey {
    pub const ALL: [TrailerKey; 9] = [
        TrailerKey::Constraint,
        TrailerKey::Rejected,
        TrailerKey::Confidence,
        TrailerKey::ScopeRisk,
        TrailerKey::Reversibility,
        TrailerKey::Directive,
        TrailerKey::Tested,
        TrailerKey::NotTested,
        TrailerKey::Related,
    ];

    pub fn canonical(self) -> &'static str {
        match self {
            TrailerKey::Constraint => "Constraint",
            TrailerKey::Rejected => "Rejected",
            TrailerKey::Confidence => "Confidence",
            TrailerKey::ScopeRisk => "Scope-risk",
            TrailerKey::Reversibility => "Reversibility",
            TrailerKey::Directive => "Directive",
            TrailerKey::Tested => "Tested",
            TrailerKey::NotTested => "Not-tested",
            TrailerKey::Related => "Related",
        }
    }

    /// Case-insensitive lookup of a reserved key.
    pub fn from_key(key: &str) -> Option<TrailerKey> {
        TrailerKey::ALL
            .into_iter()
            .find(|k| k.canonical().eq_ignore_ascii_case(key))
    }

    pub fn is_reserved(key: &str) -> bool {
        TrailerKey::from_key(key).is_some()
    }
}

impl fmt::Display for TrailerKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.canonical())
    }
}

/// Returned when an enumerated trailer value is outside its vocabulary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnknownVariant {
    pub value: String,
    pub expected: &'static [&'static str],
}

impl fmt::Display for UnknownVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "`{}` is not one of {}",
            self.value,
            self.expected.join(", ")
        )
    }
}

impl std::error::Error for UnknownVariant {}

macro_rules! vocabulary {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const VALUES: &'static [&'static str] = &[$($text),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl FromStr for $name {
            type Err = UnknownVariant;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text => Ok($name::$variant),)+
                    _ => Err(UnknownVariant { value: s.to_string(), expected: Self::VALUES }),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.serialize_str(self.as_str())
            }
        }
    };
}

vocabulary! {
    /// Author's assessment of the change.
    ConfidenceLevel { Low => "low", Medium => "medium", High => "high" }
}

vocabulary! {
    /// Blast radius of the change.
    ScopeRisk { Narrow => "narrow", Moderate => "moderate", Wide => "wide" }
}

vocabulary! {
    Reversibility {
        Clean => "clean",
        MigrationNeeded => "migration-needed",
        Irreversible => "irreversible",
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConstraintEntry {
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RejectedEntry {
    pub alternative: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl RejectedEntry {
    /// Trailer value form: `alternative | reason`, or just the alternative.
    pub fn to_value(&self) -> String {
        match &self.reason {
            Some(reason) => format!("{} | {}", self.alternative, reason),
            None => self.alternative.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DirectiveEntry {
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TestEntry {
    pub description: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
}

impl TestEntry {
    /// Trailer value form: `description (method)`, or just the description.
    pub fn to_value(&self) -> String {
        match &self.method {
            Some(method) => format!("{} ({})", self.description, method),
            None => self.description.clone(),
        }
    }
}

/// A commit reference carried by a `Related:` trailer. One hash per trailer.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct RelatedRef(String);

impl RelatedRef {
    /// Accepts 7 to 40 hex digits, either case.
    pub fn parse(value: &str) -> Option<RelatedRef> {
        is_hash_ref(value).then(|| RelatedRef(value.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for RelatedRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub(crate) fn is_hash_ref(value: &str) -> bool {
    (7..=40).contains(&value.len()) && value.bytes().all(|b| b.is_ascii_hexdigit())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExtensionTrailer {
    pub key: String,
    pub value: String,
}

/// The decision record carried by one commit message.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LoreAtom {
    pub intent: String,
    pub body: String,
    pub constraints: Vec<ConstraintEntry>,
    pub rejected: Vec<RejectedEntry>,
    pub confidence: Option<ConfidenceLevel>,
    pub scope_risk: Option<ScopeRisk>,
    pub reversibility: Option<Reversibility>,
    pub directives: Vec<DirectiveEntry>,
    pub tested: Vec<TestEntry>,
    pub not_tested: Vec<TestEntry>,
    pub related: Vec<RelatedRef>,
    pub extensions: Vec<ExtensionTrailer>,
}

impl LoreAtom {
    pub fn new(intent: impl Into<String>) -> LoreAtom {
        LoreAtom {
            intent: intent.into(),
            ..LoreAtom::default()
        }
    }

    /// True when at least one reserved trailer is present.
    pub fn has_lore_trailers(&self) -> bool {
        !self.constraints.is_empty()
            || !self.rejected.is_empty()
            || self.confidence.is_some()
            || self.scope_risk.is_some()
            || self.reversibility.is_some()
            || !self.directives.is_empty()
            || !self.tested.is_empty()
            || !self.not_tested.is_empty()
            || !self.related.is_empty()
    }

    pub fn has_trailers(&self) -> bool {
        self.has_lore_trailers() || !self.extensions.is_empty()
    }

    /// Trailers as `(key, value)` in canonical order: vocabulary order with
    /// canonical capitalization, extensions last and as written.
    pub fn trailer_pairs(&self) -> Vec<(&str, String)> {
        let mut out = Vec::new();
        for c in &self.constraints {
            out.push((TrailerKey::Constraint.canonical(), c.text.clone()));
        }
        for r in &self.rejected {
            out.push((TrailerKey::Rejected.canonical(), r.to_value()));
        }
        if let Some(v) = self.confidence {
            out.push((TrailerKey::Confidence.canonical(), v.as_str().to_string()));
        }
        if let Some(v) = self.scope_risk {
            out.push((TrailerKey::ScopeRisk.canonical(), v.as_str().to_string()));
        }
        if let Some(v) = self.reversibility {
            out.push((TrailerKey::Reversibility.canonical(), v.as_str().to_string()));
        }
        for d in &self.directives {
            out.push((TrailerKey::Directive.canonical(), d.text.clone()));
        }
        for t in &self.tested {
            out.push((TrailerKey::Tested.canonical(), t.to_value()));
        }
        for t in &self.not_tested {
            out.push((TrailerKey::NotTested.canonical(), t.to_value()));
        }
        for r in &self.related {
            out.push((TrailerKey::Related.canonical(), r.as_str().to_string()));
        }
        for e in &self.extensions {
            out.push((e.key.as_str(), e.value.clone()));
        }
        out
    }

    /// Number of trailers of the given reserved kind.
    pub fn count(&self, key: TrailerKey) -> usize {
        match key {
            TrailerKey::Constraint => self.constraints.len(),
            TrailerKey::Rejected => self.rejected.len(),
            TrailerKey::Confidence => usize::from(self.confidence.is_some()),
            TrailerKey::ScopeRisk => usize::from(self.scope_risk.is_some()),
            TrailerKey::Reversibility => usize::from(self.reversibility.is_some()),
            TrailerKey::Directive => self.directives.len(),
            TrailerKey::Tested => self.tested.len(),
            TrailerKey::NotTested => self.not_tested.len(),
            TrailerKey::Related => self.related.len(),
        }
    }
}

// Serialized shape is the structured-input document, so JSON output can be
// fed straight back into `lore commit --from-json`. Empty fields are omitted.
impl Serialize for LoreAtom {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(None)?;
        map.serialize_entry("intent", &self.intent)?;
        if !self.body.is_empty() {
            map.serialize_entry("body", &self.body)?;
        }
        if !self.constraints.is_empty() {
            let texts: Vec<&str> = self.constraints.iter().map(|c| c.text.as_str()).collect();
            map.serialize_entry("constraints", &texts)?;
        }
        if !self.rejected.is_empty() {
            map.serialize_entry("rejected", &self.rejected)?;
        }
        if let Some(confidence) = self.confidence {
            map.serialize_entry("confidence", &confidence)?;
        }
        if let Some(scope_risk) = self.scope_risk {
            map.serialize_entry("scope_risk", &scope_risk)?;
        }
        if let Some(reversibility) = self.reversibility {
            map.serialize_entry("reversibility", &reversibility)?;
        }
        if !self.directives.is_empty() {
            let texts: Vec<&str> = self.directives.iter().map(|d| d.text.as_str()).collect();
            map.serialize_entry("directives", &texts)?;
        }
        if !self.tested.is_empty() {
            let values: Vec<String> = self.tested.iter().map(TestEntry::to_value).collect();
            map.serialize_entry("tested", &values)?;
        }
        if !self.not_tested.is_empty() {
            let values: Vec<String> = self.not_tested.iter().map(TestEntry::to_value).collect();
            map.serialize_entry("not_tested", &values)?;
        }
        if !self.related.is_empty() {
            map.serialize_entry("related", &self.related)?;
        }
        if !self.extensions.is_empty() {
            map.serialize_entry("extensions", &self.extensions)?;
        }
        map.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_resolve_case_insensitively() {
        for spelling in ["constraint", "CONSTRAINT", "Constraint", "cOnStRaInT"] {
            assert_eq!(TrailerKey::from_key(spelling), Some(TrailerKey::Constraint));
        }
        assert_eq!(TrailerKey::from_key("scope-RISK"), Some(TrailerKey::ScopeRisk));
        assert_eq!(TrailerKey::from_key("Not-Tested"), Some(TrailerKey::NotTested));
        assert_eq!(TrailerKey::from_key("Constraints"), None);
        assert_eq!(TrailerKey::from_key("Ticket"), None);
    }

    #[test]
    fn vocabularies_accept_only_their_values() {
        assert_eq!("high".parse::<ConfidenceLevel>(), Ok(ConfidenceLevel::High));
        assert!("maybe".parse::<ConfidenceLevel>().is_err());
        assert!("High".parse::<ConfidenceLevel>().is_err());
        assert_eq!("wide".parse::<ScopeRisk>(), Ok(ScopeRisk::Wide));
        assert_eq!(
            "migration-needed".parse::<Reversibility>(),
            Ok(Reversibility::MigrationNeeded)
        );
        assert!("migration needed".parse::<Reversibility>().is_err());
    }

    #[test]
    fn related_refs_are_hex_of_bounded_length() {
        assert!(RelatedRef::parse("abc1234").is_some());
        assert!(RelatedRef::parse("ABCDEF0").is_some());
        assert!(RelatedRef::parse(&"f".repeat(40)).is_some());
        assert!(RelatedRef::parse("abc123").is_none());
        assert!(RelatedRef::parse(&"f".repeat(41)).is_none());
        assert!(RelatedRef::parse("zzzzzzz").is_none());
    }

    #[test]
    fn minimal_atom_serializes_to_intent_only_json() {
        let json = serde_json::to_string(&LoreAtom::new("x")).unwrap();
        assert_eq!(json, r#"{"intent":"x"}"#);
    }
}
