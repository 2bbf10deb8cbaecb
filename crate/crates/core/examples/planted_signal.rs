//! Hides one steep series among noisy flat peers and checks that the feed
//! highlights it.

use anyhow::Result;
use sheetstack::ingest::{SheetFormat, SnapshotStore, WindowSize};
use sheetstack::insights::Category;
use sheetstack::personalize::{ConfigDefaults, UserConfig};
use sheetstack::pipeline::{analyze_window, generate_feed, AnalysisOptions};
use sheetstack::synth::{planted_signal, PlantedOptions};
use sheetstack::timeseries::Group;

fn main() -> Result<()> {
    let trials = 20;
    let mut found = 0;
    for seed in 0..trials {
        let (sheets, planted) = planted_signal(PlantedOptions { seed, ..PlantedOptions::default() });
        let store = SnapshotStore::in_memory();
        for s in &sheets {
            store.ingest_snapshot("P", &s.name, &s.csv, SheetFormat::Csv, Some(s.timestamp))?;
        }
        let scored = analyze_window(&store.active_window("P", WindowSize::Unbounded)?, &AnalysisOptions::default());
        let config = UserConfig::defaults("default", "P", &ConfigDefaults::default());
        let feed = generate_feed(&scored, "P", &config, 0);
        let hit = feed.insights.iter().any(|i| {
            i.group == Some(Group::Nts)
                && matches!(i.category, Category::Highlight | Category::Trend)
                && i.entity == [planted.clone()]
        });
        found += usize::from(hit);
    }
    println!("planted series surfaced in {found}/{trials} trials");
    Ok(())
}
