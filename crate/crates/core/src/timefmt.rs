use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serializer;

/// ISO-8601 UTC with second precision, e.g. `2024-05-01T12:00:00Z`.
pub fn iso8601(ts: &DateTime<Utc>) -> String {
    ts.to_rfc3339_opts(SecondsFormat::Secs, true)
}

pub(crate) fn serialize<S: Serializer>(ts: &DateTime<Utc>, serializer: S) -> Result<S::Ok, S::Error> {
    serializer.serialize_str(&iso8601(ts))
}
