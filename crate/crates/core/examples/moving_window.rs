//! Keeps only the newest sheets in the analysis window as new ones arrive.

use anyhow::Result;
use sheetstack::ingest::{SheetFormat, SnapshotStore, WindowDescriptor, WindowSize};
use sheetstack::synth::{retail_corpus, RetailOptions};

fn main() -> Result<()> {
    let store = SnapshotStore::in_memory();
    let size = WindowSize::Latest(4);
    for s in retail_corpus(RetailOptions { sheets: 7, products: 3, ..RetailOptions::default() }) {
        let snap = store.ingest_snapshot("R1", &s.name, &s.csv, SheetFormat::Csv, None)?;
        let window = WindowDescriptor::from_snapshots(&store.active_window("R1", size)?);
        println!(
            "ingested {} as ordinal {}: window ordinals {:?}, latest two {:?}",
            s.name,
            snap.ordinal,
            window.ordinals,
            window.latest_two()
        );
    }
    Ok(())
}
