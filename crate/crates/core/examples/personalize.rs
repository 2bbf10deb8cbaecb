//! Parses preference commands and shows how each one narrows a user's feed.

use std::collections::BTreeSet;

use anyhow::Result;
use sheetstack::ingest::{SheetFormat, SnapshotStore, WindowSize};
use sheetstack::personalize::{apply_command, parse_command, ConfigDefaults, UserConfig};
use sheetstack::pipeline::{analyze_window, generate_feed, AnalysisOptions};
use sheetstack::synth::{retail_corpus, RetailOptions};

fn main() -> Result<()> {
    let store = SnapshotStore::in_memory();
    for s in retail_corpus(RetailOptions::default()) {
        store.ingest_snapshot("R1", &s.name, &s.csv, SheetFormat::Csv, None)?;
    }
    let defaults = ConfigDefaults::default();
    let scored = analyze_window(&store.active_window("R1", WindowSize::Latest(10))?, &AnalysisOptions::default());
    let known: BTreeSet<String> = scored.attributes.iter().cloned().collect();

    let mut config = UserConfig::defaults("ana", "R1", &defaults);
    for text in [
        "use combinations Region+Status for R1",
        "use attributes Sales, Units, Region, Status for R1",
        "ignore attribute Units for R1",
        "ignore attribute Margin for R1",
    ] {
        let command = parse_command(text)?;
        let (next, warnings) = apply_command(&config, &command, &defaults, &known)?;
        config = next;
        println!("> {text}");
        for w in warnings {
            println!("  warning: {w:?}");
        }
        let feed = generate_feed(&scored, "R1", &config, 0);
        let subjects: BTreeSet<&str> = feed
            .insights
            .iter()
            .filter(|i| i.group.is_some())
            .map(|i| i.attribute.as_str())
            .collect();
        println!("  feed attributes: {subjects:?}");
    }

    match parse_command("sett window 3 for R1") {
        Ok(_) => unreachable!(),
        Err(e) => println!("\n{e}\ndid you mean: {}", e.suggestion.as_deref().unwrap_or("-")),
    }
    Ok(())
}
