use std::io::Cursor;
use std::str::FromStr;

use calamine::{Data, Reader, Xlsx};

use super::cell::{parse_cell, CellValue};
use super::IngestError;

/// A rectangular grid of cells. Every row has the same width, at least 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SheetGrid {
    rows: Vec<Vec<CellValue>>,
    width: usize,
}

impl SheetGrid {
    /// Builds a grid, padding short rows with `Empty`.
    pub fn from_rows(mut rows: Vec<Vec<CellValue>>) -> Self {
        let width = rows.iter().map(Vec::len).max().unwrap_or(0).max(1);
        if rows.is_empty() {
            rows.push(Vec::new());
        }
        for row in &mut rows {
            row.resize(width, CellValue::Empty);
        }
        SheetGrid { rows, width }
    }

    pub fn rows(&self) -> &[Vec<CellValue>] {
        &self.rows
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.rows.len()
    }

    pub fn cell(&self, row: usize, col: usize) -> Option<&CellValue> {
        self.rows.get(row).and_then(|r| r.get(col))
    }

    pub fn non_empty_count(&self) -> usize {
        self.rows
            .iter()
            .flatten()
            .filter(|c| !c.is_empty())
            .count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SheetFormat {
    Csv,
    Xlsx,
}

impl SheetFormat {
    /// Guesses the format from a file name's extension.
    pub fn from_file_name(name: &str) -> Option<Self> {
        let ext = name.rsplit_once('.')?.1;
        ext.parse().ok()
    }
}

impl FromStr for SheetFormat {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(SheetFormat::Csv),
            "xlsx" => Ok(SheetFormat::Xlsx),
            other => Err(IngestError::MalformedFile(format!(
                "unsupported format {other:?}, expected csv or xlsx"
            ))),
        }
    }
}

pub fn parse_sheet(bytes: &[u8], format: SheetFormat) -> Result<SheetGrid, IngestError> {
    match format {
        SheetFormat::Csv => parse_csv(bytes),
        SheetFormat::Xlsx => parse_xlsx(bytes),
    }
}

/// Reads RFC-4180 CSV (UTF-8, comma separated, optional quoting).
pub fn parse_csv(bytes: &[u8]) -> Result<SheetGrid, IngestError> {
    read_csv_with(bytes, parse_cell)
}

pub(crate) fn read_csv_with(
    bytes: &[u8],
    decode: impl Fn(&str) -> CellValue,
) -> Result<SheetGrid, IngestError> {
    let bytes = bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(bytes);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(bytes);
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| IngestError::MalformedFile(e.to_string()))?;
        rows.push(record.iter().map(&decode).collect());
    }
    Ok(SheetGrid::from_rows(rows))
}

/// Reads the first worksheet of an XLSX workbook.
///
/// String cells stay text; only numeric, boolean and date cells are typed.
pub fn parse_xlsx(bytes: &[u8]) -> Result<SheetGrid, IngestError> {
    let mut workbook = Xlsx::new(Cursor::new(bytes))
        .map_err(|e| IngestError::MalformedFile(format!("xlsx: {e}")))?;
    let range = match workbook.worksheet_range_at(0) {
        Some(r) => r.map_err(|e| IngestError::MalformedFile(format!("xlsx: {e}")))?,
        None => return Err(IngestError::MalformedFile("xlsx has no worksheets".into())),
    };
    // Keep absolute positions so leading blank rows/columns survive.
    let (row0, col0) = range.start().unwrap_or((0, 0));
    let mut rows: Vec<Vec<CellValue>> = vec![Vec::new(); row0 as usize];
    for source in range.rows() {
        let mut row = vec![CellValue::Empty; col0 as usize];
        row.extend(source.iter().map(convert_xlsx_cell));
        rows.push(row);
    }
    Ok(SheetGrid::from_rows(rows))
}

fn convert_xlsx_cell(cell: &Data) -> CellValue {
    match cell {
        Data::Empty | Data::Error(_) => CellValue::Empty,
        Data::String(s) => CellValue::text(s.trim()),
        Data::Int(i) => CellValue::Number(*i as f64),
        Data::Float(f) => CellValue::number(*f),
        Data::Bool(b) => CellValue::Boolean(*b),
        Data::DateTime(dt) => match dt.as_datetime() {
            Some(naive) => CellValue::Timestamp(naive.and_utc().timestamp()),
            None => CellValue::number(dt.as_f64()),
        },
        Data::DateTimeIso(s) => match parse_cell(s) {
            ts @ CellValue::Timestamp(_) => ts,
            _ => CellValue::text(s.trim()),
        },
        Data::DurationIso(s) => CellValue::text(s.trim()),
    }
}
