//! Ranking scored series into insights and assembling the feed document.
//!
//! Per group (NTS, RTS, CTS), regression-eligible series are ordered three
//! ways (m², mse, max Cook's distance). The Highlight minimizes the product
//! of the three positions; Trend takes the sharpest and flattest remaining
//! slopes; Outlier the highest remaining Cook's distance; Delta the largest
//! squared change between the two newest reports.

mod narrative;
mod select;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::analytics::{NoveltyReport, SeriesStats};
use crate::ingest::WindowDescriptor;
use crate::timeseries::{Group, Point, SeriesId, SeriesMap};

pub use narrative::{format_number, render_narrative};
pub use select::{
    build_orderings, composite_rank, select_insights, Category, GroupOrderings, SelectError,
    Selection, SelectionInput, TrendKind,
};

/// JSON schema describing [`InsightFeed`] documents.
pub const FEED_SCHEMA_V1: &str = include_str!("../../schema/feed.schema.v1.json");
pub const FEED_SCHEMA_ID: &str = "feed.schema.v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Insight {
    pub category: Category,
    pub kind: Option<TrendKind>,
    pub group: Option<Group>,
    pub series_key: Option<String>,
    pub entity: Vec<String>,
    pub attribute: String,
    pub narrative: String,
    pub score: f64,
    pub stats: Option<SeriesStats>,
    /// Sparkline data: the series' points inside the window.
    pub points: Vec<Point>,
    pub novelty: Option<NoveltyReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedWindow {
    pub from_ts: Option<i64>,
    pub to_ts: Option<i64>,
    pub count: usize,
    pub ordinals: Vec<usize>,
}

/// Mean and variance of a short series, listed outside the ranked insights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShortSeriesEntry {
    pub series_key: String,
    pub group: Group,
    pub entity: Vec<String>,
    pub attribute: String,
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InsightFeed {
    pub schema: String,
    pub report_type: String,
    pub window: FeedWindow,
    pub user: String,
    /// Timestamp of the newest snapshot in the window, so identical inputs
    /// give identical documents.
    pub generated_at: Option<i64>,
    pub insights: Vec<Insight>,
    pub short_series: Vec<ShortSeriesEntry>,
}

impl InsightFeed {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("feed serializes")
    }
}

pub struct FeedInputs<'a> {
    pub report_type: &'a str,
    pub user: &'a str,
    pub window: &'a WindowDescriptor,
    pub population: &'a SeriesMap,
    pub stats: &'a BTreeMap<SeriesId, SeriesStats>,
    pub novelty: &'a NoveltyReport,
    /// Cap on `short_series` entries, highest variance first.
    pub appendix_limit: usize,
}

pub fn build_insight(selection: &Selection, inputs: &FeedInputs<'_>) -> Insight {
    let series = selection.series.as_ref();
    let mut insight = Insight {
        category: selection.category,
        kind: selection.trend,
        group: selection.group,
        series_key: series.map(SeriesId::key),
        entity: series.map(|s| s.entity.clone()).unwrap_or_default(),
        attribute: series.map(|s| s.attribute.clone()).unwrap_or_default(),
        narrative: String::new(),
        score: selection.score,
        stats: series.and_then(|s| inputs.stats.get(s).cloned()),
        points: series
            .and_then(|s| inputs.population.get(s))
            .map(|s| s.points.clone())
            .unwrap_or_default(),
        novelty: (selection.category == Category::Novelty).then(|| inputs.novelty.clone()),
    };
    insight.narrative = render_narrative(&insight);
    insight
}

pub fn build_feed(inputs: &FeedInputs<'_>, selections: &[Selection]) -> InsightFeed {
    let mut short_series: Vec<ShortSeriesEntry> = inputs
        .population
        .keys()
        .filter_map(|id| {
            let short = inputs.stats.get(id)?.short?;
            Some(ShortSeriesEntry {
                series_key: id.key(),
                group: id.group,
                entity: id.entity.clone(),
                attribute: id.attribute.clone(),
                n: short.n,
                mean: short.mean,
                variance: short.variance,
            })
        })
        .collect();
    short_series.sort_by(|a, b| {
        b.variance
            .total_cmp(&a.variance)
            .then_with(|| a.series_key.cmp(&b.series_key))
    });
    short_series.truncate(inputs.appendix_limit);

    InsightFeed {
        schema: FEED_SCHEMA_ID.to_string(),
        report_type: inputs.report_type.to_string(),
        window: FeedWindow {
            from_ts: inputs.window.from_ts(),
            to_ts: inputs.window.to_ts(),
            count: inputs.window.len(),
            ordinals: inputs.window.ordinals.clone(),
        },
        user: inputs.user.to_string(),
        generated_at: inputs.window.to_ts(),
        insights: selections.iter().map(|s| build_insight(s, inputs)).collect(),
        short_series,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::{DeltaStat, McdPoint, RegressionStats};

    fn insight(category: Category, kind: Option<TrendKind>, group: Group, m: f64) -> Insight {
        Insight {
            category,
            kind,
            group: Some(group),
            series_key: None,
            entity: vec!["P1234".into()],
            attribute: if group == Group::Rts { "Sales-rank".into() } else { "Sales".into() },
            narrative: String::new(),
            score: 0.0,
            stats: Some(SeriesStats {
                n: 10,
                regression: Some(RegressionStats {
                    n: 10,
                    m,
                    b: 1.0,
                    mse: 2.5,
                    cook: vec![],
                    mcd: McdPoint { ordinal: 4, value: 77.0, distance: 1.25 },
                }),
                short: None,
                delta: Some(DeltaStat {
                    squared_diff: 900.0,
                    from_ordinal: 8,
                    to_ordinal: 9,
                    from_value: 100.0,
                    to_value: 130.0,
                }),
            }),
            points: vec![],
            novelty: None,
        }
    }

    #[test]
    fn sharpest_falling_trend() {
        let text = render_narrative(&insight(Category::Trend, Some(TrendKind::Sharpest), Group::Nts, -4.2));
        assert_eq!(text, "P1234's Sales shows the sharpest falling trend (slope -4.2 per period) over 10 reports.");
    }

    #[test]
    fn flattest_and_rank_wording() {
        let text = render_narrative(&insight(Category::Trend, Some(TrendKind::Flattest), Group::Rts, 0.01));
        assert!(text.starts_with("P1234's rank by Sales shows the flattest trend"), "{text}");
    }

    #[test]
    fn delta_mentions_both_values() {
        let text = render_narrative(&insight(Category::Delta, None, Group::Nts, 1.0));
        assert!(text.contains("from 100 to 130 (+30)"), "{text}");
    }

    #[test]
    fn outlier_and_highlight() {
        let text = render_narrative(&insight(Category::Outlier, None, Group::Cts, 1.0));
        assert!(text.starts_with("The row count for Sales = P1234 has the most significant outlier: 77 at report 4"), "{text}");
        let text = render_narrative(&insight(Category::Highlight, None, Group::Nts, 2.0));
        assert!(text.contains("rising trend (slope 2 per period)"), "{text}");
    }

    #[test]
    fn novelty_lists_keys() {
        let mut i = insight(Category::Novelty, None, Group::Nts, 0.0);
        i.group = None;
        i.novelty = Some(NoveltyReport {
            new_keys: vec![vec!["P9999".into()], vec!["P8888".into()]],
            new_attributes: vec![],
        });
        assert_eq!(render_narrative(&i), "New in the latest report: 2 new key values (P9999, P8888).");
    }
}
