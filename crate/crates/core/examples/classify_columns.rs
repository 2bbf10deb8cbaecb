//! Splits the columns of one sheet into keys, categoricals and numerics, and
//! prints the reason behind every decision.

use anyhow::Result;
use sheetstack::ingest::parse_csv;
use sheetstack::synth::{retail_corpus, RetailOptions};
use sheetstack::table_extract::{classify_attributes, extract_table, ClassifyConfig};

fn main() -> Result<()> {
    let sheet = &retail_corpus(RetailOptions::default())[0];
    let table = extract_table(&parse_csv(&sheet.csv)?)?;
    let profile = classify_attributes(&table, &ClassifyConfig::default());

    println!("keys:         {:?}", profile.keys);
    println!("numerics:     {:?}", profile.numerics);
    println!("categoricals: {:?}", profile.selected);
    let combos: Vec<String> = profile.combos.iter().map(ToString::to_string).collect();
    println!("combos:       {combos:?}");
    println!();
    for d in &profile.diagnostics {
        println!(
            "{:<12} {:<24} kind={:?} non_empty={}/{} unique={}",
            d.column,
            format!("{:?}", d.rule),
            d.kind,
            d.non_empty,
            d.rows,
            d.unique
        );
    }
    Ok(())
}
