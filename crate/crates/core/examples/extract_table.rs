//! Finds the data table inside a sheet that carries title rows and a spacer column.

use anyhow::Result;
use sheetstack::ingest::parse_csv;
use sheetstack::table_extract::extract_table;

const SHEET: &str = "\
Weekly stock report,,,,
generated by the warehouse,,,,
,,,,
,SKU,Site,On hand,Reorder
,A-100,North,12,yes
,A-101,North,0,yes
,B-200,South,45,no
";

fn main() -> Result<()> {
    let grid = parse_csv(SHEET.as_bytes())?;
    let table = extract_table(&grid)?;
    println!(
        "header at row {}, {} leading column(s) dropped",
        table.header_row_index, table.dropped_leading_columns
    );
    println!("{}", table.header.join(" | "));
    for r in 0..table.row_count() {
        let row: Vec<String> = table.columns.iter().map(|c| c[r].to_string()).collect();
        println!("{}", row.join(" | "));
    }
    Ok(())
}
