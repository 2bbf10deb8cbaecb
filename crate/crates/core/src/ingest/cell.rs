//! Cell model shared by every stage of the pipeline.

use std::fmt;
use std::sync::OnceLock;

use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};
use regex::Regex;
use serde::{Deserialize, Serialize};

/// A single spreadsheet cell after type inference.
///
/// `Text` never holds the empty string and `Number` never holds a non-finite
/// value; use [`CellValue::text`] and [`CellValue::number`] to uphold that.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum CellValue {
    Empty,
    Text(String),
    Number(f64),
    /// Epoch seconds, UTC.
    Timestamp(i64),
    Boolean(bool),
}

impl CellValue {
    pub fn text(s: impl Into<String>) -> Self {
        let s = s.into();
        if s.is_empty() {
            CellValue::Empty
        } else {
            CellValue::Text(s)
        }
    }

    pub fn number(v: f64) -> Self {
        if v.is_finite() {
            CellValue::Number(v)
        } else {
            CellValue::Empty
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, CellValue::Empty)
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            CellValue::Number(v) => Some(*v),
            _ => None,
        }
    }
}

impl fmt::Display for CellValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellValue::Empty => Ok(()),
            CellValue::Text(s) => f.write_str(s),
            CellValue::Number(v) => write!(f, "{v}"),
            CellValue::Timestamp(ts) => f.write_str(&format_timestamp(*ts)),
            CellValue::Boolean(b) => write!(f, "{b}"),
        }
    }
}

/// RFC 3339 rendering used for timestamp cells, e.g. `2020-03-01T00:00:00Z`.
pub fn format_timestamp(ts: i64) -> String {
    match DateTime::<Utc>::from_timestamp(ts, 0) {
        Some(dt) => dt.format("%Y-%m-%dT%H:%M:%SZ").to_string(),
        None => ts.to_string(),
    }
}

fn number_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?$").expect("valid regex")
    })
}

fn grouped_number_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[+-]?\d{1,3}(?:,\d{3})+(?:\.\d+)?$").expect("valid regex"))
}

fn parse_number(s: &str) -> Option<f64> {
    let candidate = if number_re().is_match(s) {
        s.to_string()
    } else if grouped_number_re().is_match(s) {
        s.replace(',', "")
    } else {
        return None;
    };
    candidate.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn parse_timestamp(s: &str) -> Option<i64> {
    if s.len() < 10 || !s.as_bytes()[0].is_ascii_digit() {
        return None;
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.timestamp());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(dt.and_utc().timestamp());
        }
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(|dt| dt.and_utc().timestamp())
}

/// Infers a typed cell from raw text, as read from a CSV field.
///
/// Surrounding whitespace is ignored. Recognises booleans, plain and
/// thousands-grouped numbers, and ISO-8601 dates/datetimes; everything else
/// is text.
pub fn parse_cell(raw: &str) -> CellValue {
    let s = raw.trim();
    if s.is_empty() {
        return CellValue::Empty;
    }
    if s.eq_ignore_ascii_case("true") {
        return CellValue::Boolean(true);
    }
    if s.eq_ignore_ascii_case("false") {
        return CellValue::Boolean(false);
    }
    if let Some(v) = parse_number(s) {
        return CellValue::Number(v);
    }
    if let Some(ts) = parse_timestamp(s) {
        return CellValue::Timestamp(ts);
    }
    CellValue::Text(s.to_string())
}

/// Encodes a cell for the normalized on-disk CSV.
///
/// Text that would otherwise re-parse as a different value (or that starts
/// with the escape quote) is prefixed with `'`, so `decode_stored_cell`
/// reproduces the exact cell.
pub fn encode_stored_cell(cell: &CellValue) -> String {
    match cell {
        CellValue::Text(s) => {
            if s.starts_with('\'') || parse_cell(s) != *cell {
                format!("'{s}")
            } else {
                s.clone()
            }
        }
        other => other.to_string(),
    }
}

pub fn decode_stored_cell(field: &str) -> CellValue {
    match field.strip_prefix('\'') {
        Some(rest) => CellValue::text(rest),
        None => parse_cell(field),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_basic_kinds() {
        assert_eq!(parse_cell("  "), CellValue::Empty);
        assert_eq!(parse_cell("42"), CellValue::Number(42.0));
        assert_eq!(parse_cell("-1.5e3"), CellValue::Number(-1500.0));
        assert_eq!(parse_cell("1,234.5"), CellValue::Number(1234.5));
        assert_eq!(parse_cell("TRUE"), CellValue::Boolean(true));
        assert_eq!(parse_cell("2020-03-01"), CellValue::Timestamp(1_583_020_800));
        assert_eq!(parse_cell("P1234"), CellValue::Text("P1234".into()));
    }

    #[test]
    fn rejects_non_finite_spellings() {
        assert_eq!(parse_cell("inf"), CellValue::Text("inf".into()));
        assert_eq!(parse_cell("NaN"), CellValue::Text("NaN".into()));
        assert_eq!(CellValue::number(f64::NAN), CellValue::Empty);
    }

    #[test]
    fn empty_text_is_empty() {
        assert_eq!(CellValue::text(""), CellValue::Empty);
    }

    #[test]
    fn stored_encoding_escapes_ambiguous_text() {
        for cell in [
            CellValue::Text("123".into()),
            CellValue::Text("'quoted".into()),
            CellValue::Text(" padded ".into()),
            CellValue::Text("true".into()),
            CellValue::Number(0.1),
            CellValue::Number(-0.0),
            CellValue::Timestamp(86_400),
            CellValue::Boolean(false),
            CellValue::Empty,
        ] {
            let encoded = encode_stored_cell(&cell);
            let decoded = decode_stored_cell(&encoded);
            match (&cell, &decoded) {
                (CellValue::Number(a), CellValue::Number(b)) => {
                    assert_eq!(a.to_bits(), b.to_bits())
                }
                _ => assert_eq!(decoded, cell, "encoded as {encoded:?}"),
            }
        }
    }
}
