//! Pull the most significant table out of a loosely structured sheet and
//! classify its columns.
//!
//! The header is the first row (top-down) with the largest number of
//! non-empty cells. Columns to the left of the header's first non-empty cell
//! and to the right of its last one are dropped; the body is everything
//! below the header minus trailing blank rows.

mod classify;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::ingest::{CellValue, SheetGrid};

pub use classify::{
    classify_attributes, select_categorical_subset, Categorical, ClassifyConfig, Combo,
    Diagnostic, Rule, SchemaProfile,
};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ExtractError {
    #[error("no row with at least two non-empty cells")]
    NoTableFound,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractedTable {
    /// Non-empty, unique column names.
    pub header: Vec<String>,
    /// Column-major body; every column has the same length.
    pub columns: Vec<Vec<CellValue>>,
    pub header_row_index: usize,
    pub dropped_leading_columns: usize,
}

impl ExtractedTable {
    pub fn row_count(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn column(&self, name: &str) -> Option<&[CellValue]> {
        self.column_index(name).map(|i| self.columns[i].as_slice())
    }

    /// The table as a grid with the header as row 0.
    pub fn to_grid(&self) -> SheetGrid {
        let mut rows = Vec::with_capacity(self.row_count() + 1);
        rows.push(self.header.iter().map(|h| CellValue::text(h.clone())).collect());
        for r in 0..self.row_count() {
            rows.push(self.columns.iter().map(|c| c[r].clone()).collect());
        }
        SheetGrid::from_rows(rows)
    }
}

pub fn extract_table(grid: &SheetGrid) -> Result<ExtractedTable, ExtractError> {
    let counts: Vec<usize> = grid
        .rows()
        .iter()
        .map(|r| r.iter().filter(|c| !c.is_empty()).count())
        .collect();
    let max = counts.iter().copied().max().unwrap_or(0);
    if max < 2 {
        return Err(ExtractError::NoTableFound);
    }
    let header_row_index = counts.iter().position(|&c| c == max).expect("max exists");
    let header_row = &grid.rows()[header_row_index];
    let first = header_row.iter().position(|c| !c.is_empty()).expect("non-empty row");
    let last = header_row.iter().rposition(|c| !c.is_empty()).expect("non-empty row");

    let raw_names: Vec<String> = (first..=last)
        .map(|c| match header_row[c].to_string().trim() {
            "" => format!("column_{}", c + 1),
            name => name.to_string(),
        })
        .collect();
    let header = dedupe_names(raw_names);

    let mut body: Vec<&[CellValue]> = grid.rows()[header_row_index + 1..]
        .iter()
        .map(|r| &r[first..=last])
        .collect();
    while body.last().is_some_and(|r| r.iter().all(CellValue::is_empty)) {
        body.pop();
    }
    let columns = (0..header.len())
        .map(|c| body.iter().map(|r| r[c].clone()).collect())
        .collect();

    Ok(ExtractedTable {
        header,
        columns,
        header_row_index,
        dropped_leading_columns: first,
    })
}

/// Repeated names get `#2`, `#3`, ... appended, skipping suffixes already taken.
fn dedupe_names(names: Vec<String>) -> Vec<String> {
    let mut taken: HashSet<String> = HashSet::new();
    let originals: HashSet<String> = names.iter().cloned().collect();
    let mut out = Vec::with_capacity(names.len());
    for name in names {
        if taken.insert(name.clone()) {
            out.push(name);
            continue;
        }
        let mut n = 2;
        loop {
            let candidate = format!("{name}#{n}");
            if !originals.contains(&candidate) && taken.insert(candidate.clone()) {
                out.push(candidate);
                break;
            }
            n += 1;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    Text,
    Timestamp,
    Boolean,
    Mixed,
    Empty,
}

pub const DEFAULT_KIND_DOMINANCE: f64 = 0.95;

pub fn infer_column_kind(column: &[CellValue]) -> ColumnKind {
    infer_column_kind_with(column, DEFAULT_KIND_DOMINANCE)
}

/// A column has a kind when at least `dominance` of its non-empty cells share it.
pub fn infer_column_kind_with(column: &[CellValue], dominance: f64) -> ColumnKind {
    let mut counts = [0usize; 4];
    for cell in column {
        match cell {
            CellValue::Empty => {}
            CellValue::Number(_) => counts[0] += 1,
            CellValue::Text(_) => counts[1] += 1,
            CellValue::Timestamp(_) => counts[2] += 1,
            CellValue::Boolean(_) => counts[3] += 1,
        }
    }
    let total: usize = counts.iter().sum();
    if total == 0 {
        return ColumnKind::Empty;
    }
    let kinds = [
        ColumnKind::Numeric,
        ColumnKind::Text,
        ColumnKind::Timestamp,
        ColumnKind::Boolean,
    ];
    kinds
        .into_iter()
        .zip(counts)
        .find(|&(_, n)| n as f64 >= dominance * total as f64)
        .map_or(ColumnKind::Mixed, |(k, _)| k)
}
