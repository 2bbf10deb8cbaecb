//! Snapshot persistence.
//!
//! Layout: `<root>/<report_type>/<timestamp>.csv` holds the normalized grid,
//! `<timestamp>.meta` holds `{"timestamp", "source_name"}`. The meta file is
//! written last and acts as the commit marker; a CSV without one is ignored
//! on load.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use parking_lot::RwLock;
use serde::{Deserialize, Serialize};

use super::cell::{decode_stored_cell, encode_stored_cell};
use super::grid::{parse_sheet, read_csv_with, SheetFormat, SheetGrid};
use super::timestamp::resolve_timestamp;
use super::window::WindowSize;
use super::{validate_report_type, IngestError, ReportSnapshot};

#[derive(Debug, Serialize, Deserialize)]
struct SnapshotMeta {
    timestamp: i64,
    source_name: String,
}

/// Snapshots grouped by report type, each group sorted by timestamp.
///
/// Writers are serialized by the internal lock and readers only ever see
/// fully persisted snapshots.
#[derive(Debug, Default)]
pub struct SnapshotStore {
    root: Option<PathBuf>,
    reports: RwLock<BTreeMap<String, Vec<ReportSnapshot>>>,
}

impl SnapshotStore {
    /// A store that keeps everything in memory.
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens (or creates) a store rooted at `root` and loads every committed snapshot.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, IngestError> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        let mut reports = BTreeMap::new();
        for entry in fs::read_dir(&root)? {
            let entry = entry?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if !entry.file_type()?.is_dir() || validate_report_type(&name).is_err() {
                continue;
            }
            let snapshots = load_report_dir(&name, &entry.path())?;
            if !snapshots.is_empty() {
                reports.insert(name, snapshots);
            }
        }
        Ok(SnapshotStore {
            root: Some(root),
            reports: RwLock::new(reports),
        })
    }

    pub fn root(&self) -> Option<&Path> {
        self.root.as_deref()
    }

    /// Parses and stores one sheet. See [`resolve_timestamp`] for how the
    /// timestamp is chosen when `explicit_timestamp` is `None`.
    pub fn ingest_snapshot(
        &self,
        report_type: &str,
        source_name: &str,
        bytes: &[u8],
        format: SheetFormat,
        explicit_timestamp: Option<i64>,
    ) -> Result<ReportSnapshot, IngestError> {
        validate_report_type(report_type)?;
        let grid = parse_sheet(bytes, format)?;
        if grid.non_empty_count() == 0 {
            return Err(IngestError::EmptySheet);
        }
        let timestamp = resolve_timestamp(explicit_timestamp, source_name, || {
            chrono::Utc::now().timestamp()
        });
        self.insert(report_type, source_name, grid, timestamp)
    }

    fn insert(
        &self,
        report_type: &str,
        source_name: &str,
        grid: SheetGrid,
        timestamp: i64,
    ) -> Result<ReportSnapshot, IngestError> {
        let mut reports = self.reports.write();
        let existing = reports.get(report_type).map(Vec::as_slice).unwrap_or(&[]);
        if existing.iter().any(|s| s.timestamp == timestamp) {
            return Err(IngestError::DuplicateTimestamp {
                report_type: report_type.to_string(),
                timestamp,
            });
        }
        if let Some(root) = &self.root {
            persist(root, report_type, timestamp, source_name, &grid)?;
        }
        let snapshots = reports.entry(report_type.to_string()).or_default();
        snapshots.push(ReportSnapshot {
            report_type: report_type.to_string(),
            timestamp,
            source_name: source_name.to_string(),
            grid: Arc::new(grid),
            ordinal: 0,
        });
        renumber(snapshots);
        Ok(snapshots
            .iter()
            .find(|s| s.timestamp == timestamp)
            .cloned()
            .expect("just inserted"))
    }

    pub fn report_types(&self) -> Vec<String> {
        self.reports.read().keys().cloned().collect()
    }

    pub fn contains(&self, report_type: &str) -> bool {
        self.reports.read().contains_key(report_type)
    }

    /// Every snapshot of a report type in timestamp order.
    pub fn snapshots(&self, report_type: &str) -> Result<Vec<ReportSnapshot>, IngestError> {
        self.reports
            .read()
            .get(report_type)
            .cloned()
            .ok_or_else(|| IngestError::UnknownReportType(report_type.to_string()))
    }

    /// The newest `window` snapshots, oldest first.
    pub fn active_window(
        &self,
        report_type: &str,
        window: WindowSize,
    ) -> Result<Vec<ReportSnapshot>, IngestError> {
        let reports = self.reports.read();
        let all = reports
            .get(report_type)
            .ok_or_else(|| IngestError::UnknownReportType(report_type.to_string()))?;
        let skip = match window.limit() {
            Some(n) => all.len().saturating_sub(n),
            None => 0,
        };
        Ok(all[skip..].to_vec())
    }
}

fn renumber(snapshots: &mut [ReportSnapshot]) {
    snapshots.sort_by_key(|s| s.timestamp);
    for (i, s) in snapshots.iter_mut().enumerate() {
        s.ordinal = i;
    }
}

/// Normalized CSV bytes for a grid.
pub(crate) fn encode_grid(grid: &SheetGrid) -> Vec<u8> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for row in grid.rows() {
        writer
            .write_record(row.iter().map(encode_stored_cell))
            .expect("writing to a Vec cannot fail");
    }
    writer.into_inner().expect("flushing a Vec cannot fail")
}

pub(crate) fn decode_grid(bytes: &[u8]) -> Result<SheetGrid, IngestError> {
    read_csv_with(bytes, decode_stored_cell)
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

fn persist(
    root: &Path,
    report_type: &str,
    timestamp: i64,
    source_name: &str,
    grid: &SheetGrid,
) -> Result<(), IngestError> {
    let dir = root.join(report_type);
    fs::create_dir_all(&dir)?;
    write_atomic(&dir.join(format!("{timestamp}.csv")), &encode_grid(grid))?;
    let meta = SnapshotMeta {
        timestamp,
        source_name: source_name.to_string(),
    };
    let meta = serde_json::to_vec_pretty(&meta).expect("meta serializes");
    write_atomic(&dir.join(format!("{timestamp}.meta")), &meta)?;
    Ok(())
}

fn load_report_dir(report_type: &str, dir: &Path) -> Result<Vec<ReportSnapshot>, IngestError> {
    let mut snapshots = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("meta") {
            continue;
        }
        let meta: SnapshotMeta = serde_json::from_slice(&fs::read(&path)?).map_err(|e| {
            IngestError::MalformedFile(format!("{}: {e}", path.display()))
        })?;
        let csv_path = path.with_extension("csv");
        let grid = decode_grid(&fs::read(&csv_path)?)?;
        snapshots.push(ReportSnapshot {
            report_type: report_type.to_string(),
            timestamp: meta.timestamp,
            source_name: meta.source_name,
            grid: Arc::new(grid),
            ordinal: 0,
        });
    }
    renumber(&mut snapshots);
    Ok(snapshots)
}
