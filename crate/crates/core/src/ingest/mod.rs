//! Snapshot ingestion: parse uploaded sheets, assign timestamps, persist them
//! per report type and serve the moving window of the newest snapshots.

mod cell;
mod grid;
mod store;
mod timestamp;
mod window;

use std::sync::Arc;

pub use cell::{decode_stored_cell, encode_stored_cell, format_timestamp, parse_cell, CellValue};
pub use grid::{parse_csv, parse_sheet, parse_xlsx, SheetFormat, SheetGrid};
pub use store::SnapshotStore;
pub(crate) use store::write_atomic;
pub use timestamp::{resolve_timestamp, timestamp_from_name};
pub use window::{WindowDescriptor, WindowSize};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("malformed file: {0}")]
    MalformedFile(String),
    #[error("report type {report_type:?} already has a snapshot at timestamp {timestamp}")]
    DuplicateTimestamp { report_type: String, timestamp: i64 },
    #[error("sheet has no non-empty cells")]
    EmptySheet,
    #[error("unknown report type {0:?}")]
    UnknownReportType(String),
    #[error("invalid report type {0:?}: use letters, digits, '-', '_' or '.', not starting with '_' or '.'")]
    InvalidReportType(String),
    #[error("storage error: {0}")]
    Io(#[from] std::io::Error),
}

/// One timestamped spreadsheet of a report type.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportSnapshot {
    pub report_type: String,
    /// Epoch seconds.
    pub timestamp: i64,
    pub source_name: String,
    pub grid: Arc<SheetGrid>,
    /// Position in the timestamp-sorted history of the report type.
    pub ordinal: usize,
}

/// Report types double as directory names.
pub fn validate_report_type(report_type: &str) -> Result<(), IngestError> {
    let ok = !report_type.is_empty()
        && report_type.len() <= 128
        && !report_type.starts_with(['_', '.'])
        && report_type
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if ok {
        Ok(())
    } else {
        Err(IngestError::InvalidReportType(report_type.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_type_names() {
        assert!(validate_report_type("R1").is_ok());
        assert!(validate_report_type("sales.weekly-v2").is_ok());
        for bad in ["", "_configs", ".hidden", "a/b", "with space", ".."] {
            assert!(validate_report_type(bad).is_err(), "{bad}");
        }
    }
}
