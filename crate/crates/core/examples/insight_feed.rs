//! Runs the whole pipeline over a synthetic retail report and prints the feed.

use anyhow::Result;
use sheetstack::ingest::{SheetFormat, SnapshotStore, WindowSize};
use sheetstack::personalize::{ConfigDefaults, UserConfig};
use sheetstack::pipeline::{analyze_window, generate_feed, AnalysisOptions};
use sheetstack::synth::{retail_corpus, RetailOptions};

fn main() -> Result<()> {
    let store = SnapshotStore::in_memory();
    for s in retail_corpus(RetailOptions::default()) {
        store.ingest_snapshot("retail", &s.name, &s.csv, SheetFormat::Csv, None)?;
    }
    let window = store.active_window("retail", WindowSize::Latest(10))?;
    let scored = analyze_window(&window, &AnalysisOptions::default());
    let config = UserConfig::defaults("default", "retail", &ConfigDefaults::default());
    let feed = generate_feed(&scored, "retail", &config, 5);

    for insight in &feed.insights {
        let group = insight.group.map(|g| g.to_string()).unwrap_or_default();
        println!("[{:?} {group}] {}", insight.category, insight.narrative);
    }
    println!("\n{} short series in the appendix", feed.short_series.len());
    if std::env::args().any(|a| a == "--json") {
        println!("{}", feed.to_json());
    }
    Ok(())
}
