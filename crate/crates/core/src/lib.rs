//! Insight discovery over recurring spreadsheet reports.
//!
//! Each report type receives a sheet per period. For the newest `W` sheets
//! the engine finds the main table of every sheet, classifies its columns
//! into keys, categoricals and numerics, turns them into numeric (NTS), rank
//! (RTS) and category-count (CTS) time series, fits a trend line with
//! Cook's distance to each, and picks a handful of insights per group:
//! Highlight, Trend, Outlier, Delta and Novelty. Users steer the selection
//! with short English commands.
//!
//! The layers, bottom up:
//!
//! - [`ingest`]: parse CSV/XLSX, timestamp and persist snapshots, serve the window.
//! - [`table_extract`]: widest-header table detection and column classification.
//! - [`timeseries`]: NTS, RTS and CTS construction.
//! - [`analytics`]: OLS, Cook's distance, short-series stats, deltas, novelty.
//! - [`insights`]: orderings, selection, narratives and the feed document.
//! - [`personalize`]: command grammar, per-user configs, series filtering.
//! - [`pipeline`]: one call from snapshots to a feed.
//! - [`service`]: cached engine, HTTP routes.
//! - [`synth`]: seeded corpora for demos and tests.
//!
//! ```
//! use sheetstack::ingest::{SheetFormat, SnapshotStore, WindowSize};
//! use sheetstack::personalize::{ConfigDefaults, UserConfig};
//! use sheetstack::pipeline::{analyze_window, generate_feed, AnalysisOptions};
//! use sheetstack::synth::{retail_corpus, RetailOptions};
//!
//! let store = SnapshotStore::in_memory();
//! for sheet in retail_corpus(RetailOptions::default()) {
//!     store.ingest_snapshot("R1", &sheet.name, &sheet.csv, SheetFormat::Csv, None).unwrap();
//! }
//! let window = store.active_window("R1", WindowSize::Latest(10)).unwrap();
//! let scored = analyze_window(&window, &AnalysisOptions::default());
//! let config = UserConfig::defaults("default", "R1", &ConfigDefaults::default());
//! let feed = generate_feed(&scored, "R1", &config, 25);
//! assert!(!feed.insights.is_empty());
//! ```

pub mod analytics;
pub mod ingest;
pub mod insights;
pub mod personalize;
pub mod pipeline;
pub mod service;
pub mod synth;
pub mod table_extract;
pub mod timeseries;
