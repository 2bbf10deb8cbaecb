//! Turns a window of sheets into numeric, rank and count series.

use anyhow::Result;
use sheetstack::ingest::{SheetFormat, SnapshotStore, WindowSize};
use sheetstack::pipeline::build_frames;
use sheetstack::synth::{retail_corpus, RetailOptions};
use sheetstack::table_extract::ClassifyConfig;
use sheetstack::timeseries::{build_all, Group, WindowSchema};

fn main() -> Result<()> {
    let store = SnapshotStore::in_memory();
    for s in retail_corpus(RetailOptions { sheets: 4, products: 5, ..RetailOptions::default() }) {
        store.ingest_snapshot("retail", &s.name, &s.csv, SheetFormat::Csv, None)?;
    }
    let snapshots = store.active_window("retail", WindowSize::Unbounded)?;
    let frames = build_frames(&snapshots, &ClassifyConfig::default());
    let schema = WindowSchema::reconcile(&frames);
    println!("keys {:?}, numerics {:?}", schema.keys, schema.numerics);

    let series = build_all(&frames, &schema, false);
    for group in Group::ALL {
        let n = series.keys().filter(|id| id.group == group).count();
        println!("{group}: {n} series");
    }
    for (id, s) in series.iter().filter(|(id, _)| id.entity == ["P1000"]) {
        println!("{:<40} {:?}", id.key(), s.values());
    }
    Ok(())
}
