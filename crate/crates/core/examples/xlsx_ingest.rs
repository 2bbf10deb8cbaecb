//! Ingests an Excel workbook whose file name carries the report date.

use anyhow::Result;
use rust_xlsxwriter::Workbook;
use sheetstack::ingest::{format_timestamp, SheetFormat, SnapshotStore};
use sheetstack::table_extract::extract_table;

fn main() -> Result<()> {
    let mut workbook = Workbook::new();
    let sheet = workbook.add_worksheet();
    sheet.write_string(0, 0, "Monthly headcount")?;
    for (c, h) in ["Team", "Site", "Heads"].iter().enumerate() {
        sheet.write_string(2, c as u16, *h)?;
    }
    for (r, (team, site, heads)) in [("core", "Oslo", 12.0), ("infra", "Lima", 7.0), ("data", "Oslo", 9.0)]
        .into_iter()
        .enumerate()
    {
        let r = r as u32 + 3;
        sheet.write_string(r, 0, team)?;
        sheet.write_string(r, 1, site)?;
        sheet.write_number(r, 2, heads)?;
    }
    let bytes = workbook.save_to_buffer()?;

    let store = SnapshotStore::in_memory();
    let snap = store.ingest_snapshot("headcount", "headcount-2024-03-31.xlsx", &bytes, SheetFormat::Xlsx, None)?;
    println!("snapshot at {} (ordinal {})", format_timestamp(snap.timestamp), snap.ordinal);
    let table = extract_table(&snap.grid)?;
    println!("header {:?} at row {}", table.header, table.header_row_index);
    Ok(())
}
