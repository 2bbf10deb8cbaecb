//! End-to-end analysis of one window: extract, classify, build series, score,
//! then select and render per user config.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::analytics::{detect_novelty, score_population, FitOptions, NoveltyReport, SeriesStats};
use crate::ingest::{ReportSnapshot, WindowDescriptor};
use crate::insights::{build_feed, select_insights, FeedInputs, InsightFeed, SelectError, SelectionInput};
use crate::personalize::{filter_series, UserConfig};
use crate::table_extract::{classify_attributes, extract_table, ClassifyConfig};
use crate::timeseries::{build_all, Group, SeriesId, SeriesMap, SheetFrame, WindowSchema};

pub const DEFAULT_APPENDIX_LIMIT: usize = 25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub classify: ClassifyConfig,
    pub fit: FitOptions,
    pub cts_zero_fill: bool,
    pub appendix_limit: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            classify: ClassifyConfig::default(),
            fit: FitOptions::default(),
            cts_zero_fill: false,
            appendix_limit: DEFAULT_APPENDIX_LIMIT,
        }
    }
}

/// Config-independent results for one window, shared by every user's feed.
#[derive(Debug, Clone)]
pub struct ScoredWindow {
    pub window: WindowDescriptor,
    pub frames: Vec<SheetFrame>,
    pub schema: WindowSchema,
    pub population: SeriesMap,
    pub stats: BTreeMap<SeriesId, SeriesStats>,
    pub novelty: NoveltyReport,
    /// Every column name seen in the window.
    pub attributes: BTreeSet<String>,
}

impl ScoredWindow {
    pub fn series_counts(&self) -> BTreeMap<Group, usize> {
        let mut counts: BTreeMap<Group, usize> = Group::ALL.iter().map(|g| (*g, 0)).collect();
        for id in self.population.keys() {
            *counts.entry(id.group).or_default() += 1;
        }
        counts
    }
}

/// Extracts and classifies each snapshot. Sheets without a usable table are
/// skipped with a warning.
pub fn build_frames(snapshots: &[ReportSnapshot], classify: &ClassifyConfig) -> Vec<SheetFrame> {
    snapshots
        .iter()
        .filter_map(|s| match extract_table(&s.grid) {
            Ok(table) => {
                let profile = classify_attributes(&table, classify);
                Some(SheetFrame {
                    table,
                    profile,
                    ordinal: s.ordinal,
                    timestamp: s.timestamp,
                })
            }
            Err(e) => {
                tracing::warn!(source = %s.source_name, timestamp = s.timestamp, "skipping sheet: {e}");
                None
            }
        })
        .collect()
}

pub fn analyze_window(snapshots: &[ReportSnapshot], opts: &AnalysisOptions) -> ScoredWindow {
    let window = WindowDescriptor::from_snapshots(snapshots);
    let frames = build_frames(snapshots, &opts.classify);
    let schema = WindowSchema::reconcile(&frames);
    let population = build_all(&frames, &schema, opts.cts_zero_fill);
    let stats = score_population(&population, &window, opts.fit);
    let novelty = detect_novelty(&frames, &schema);
    let attributes = frames.iter().flat_map(|f| f.table.header.iter().cloned()).collect();
    ScoredWindow {
        window,
        frames,
        schema,
        population,
        stats,
        novelty,
        attributes,
    }
}

/// Filters the scored population by `config`, selects insights and renders
/// the feed. A window with nothing to report yields an empty insight list.
pub fn generate_feed(scored: &ScoredWindow, report_type: &str, config: &UserConfig, appendix_limit: usize) -> InsightFeed {
    let population = filter_series(&scored.population, config);
    let stats: BTreeMap<SeriesId, SeriesStats> = population
        .keys()
        .filter_map(|id| scored.stats.get(id).map(|s| (id.clone(), s.clone())))
        .collect();
    let regression = stats
        .iter()
        .filter_map(|(id, s)| s.regression.clone().map(|r| (id.clone(), r)))
        .collect();
    let deltas = stats
        .iter()
        .filter_map(|(id, s)| s.delta.map(|d| (id.clone(), d)))
        .collect();
    let input = SelectionInput {
        regression: &regression,
        deltas: &deltas,
        novelty: &scored.novelty,
    };
    let selections = match select_insights(&input, config.rng_seed) {
        Ok(s) => s,
        Err(SelectError::NoInsights) => Vec::new(),
    };
    let inputs = FeedInputs {
        report_type,
        user: &config.user,
        window: &scored.window,
        population: &population,
        stats: &stats,
        novelty: &scored.novelty,
        appendix_limit,
    };
    build_feed(&inputs, &selections)
}
