//! Two outbreak phases: the leading regions change between phases and the
//! feed follows them.

use anyhow::Result;
use sheetstack::ingest::{SheetFormat, SnapshotStore, WindowSize};
use sheetstack::insights::Category;
use sheetstack::personalize::{ConfigDefaults, UserConfig};
use sheetstack::pipeline::{analyze_window, generate_feed, AnalysisOptions};
use sheetstack::synth::two_phase_outbreak;

const PHASE: usize = 10;

fn main() -> Result<()> {
    let store = SnapshotStore::in_memory();
    let config = UserConfig::defaults("default", "outbreak", &ConfigDefaults::default());
    for (i, s) in two_phase_outbreak(PHASE).into_iter().enumerate() {
        store.ingest_snapshot("outbreak", &s.name, &s.csv, SheetFormat::Csv, None)?;
        if (i + 1) % PHASE != 0 {
            continue;
        }
        let window = store.active_window("outbreak", WindowSize::Latest(PHASE))?;
        let feed = generate_feed(&analyze_window(&window, &AnalysisOptions::default()), "outbreak", &config, 0);
        println!("after phase {}:", (i + 1) / PHASE);
        for insight in feed
            .insights
            .iter()
            .filter(|i| i.group.is_some() && matches!(i.category, Category::Highlight | Category::Trend))
        {
            println!("  {}", insight.narrative);
        }
    }
    Ok(())
}
