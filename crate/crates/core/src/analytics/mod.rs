//! Per-series scoring.
//!
//! Series with six or more points get a regression fit (slope, intercept,
//! MSE, Cook's distances). Series with two to five points get mean and
//! population variance instead. Independently of length, a series that has
//! points at the window's two newest ordinals gets a squared latest delta.

mod regression;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ingest::WindowDescriptor;
use crate::table_extract::ExtractedTable;
use crate::timeseries::{SeriesId, SeriesMap, SheetFrame, TimeSeries, WindowSchema};

pub use regression::{cooks_distances, leverage, ols_line, residuals, LineFit, LINE_PARAMS};

/// Fewest points that get a regression fit.
pub const MIN_REGRESSION_POINTS: usize = 6;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum AnalyticsError {
    #[error("series has {0} points; regression needs at least {MIN_REGRESSION_POINTS}")]
    DegenerateSeries(usize),
    #[error("series has {0} points; summary stats need at least 2")]
    TooShort(usize),
    #[error("series has {0} points; use the regression fit instead")]
    UseRegression(usize),
}

/// What the regression abscissa is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Abscissa {
    /// Snapshot ordinal; slopes are per report.
    #[default]
    Ordinal,
    /// Epoch seconds; slopes are per second.
    Epoch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct FitOptions {
    /// Min-max scale values to [0, 1] before fitting.
    pub normalize: bool,
    pub abscissa: Abscissa,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McdPoint {
    pub ordinal: usize,
    /// The raw (unnormalized) value at that point.
    pub value: f64,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionStats {
    pub n: usize,
    pub m: f64,
    pub b: f64,
    pub mse: f64,
    pub cook: Vec<f64>,
    pub mcd: McdPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShortStats {
    pub n: usize,
    pub mean: f64,
    /// Population variance.
    pub variance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaStat {
    pub squared_diff: f64,
    pub from_ordinal: usize,
    pub to_ordinal: usize,
    pub from_value: f64,
    pub to_value: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NoveltyReport {
    pub new_keys: Vec<Vec<String>>,
    pub new_attributes: Vec<String>,
}

impl NoveltyReport {
    pub fn is_empty(&self) -> bool {
        self.new_keys.is_empty() && self.new_attributes.is_empty()
    }
}

/// Everything known about one series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesStats {
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regression: Option<RegressionStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub short: Option<ShortStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<DeltaStat>,
}

fn abscissa(series: &TimeSeries, abscissa: Abscissa) -> Vec<f64> {
    series
        .points
        .iter()
        .map(|p| match abscissa {
            Abscissa::Ordinal => p.ordinal as f64,
            Abscissa::Epoch => p.timestamp as f64,
        })
        .collect()
}

/// Values as fitted: raw, or min-max scaled (a constant series maps to all 0).
fn ordinate(series: &TimeSeries, normalize: bool) -> Vec<f64> {
    let ys = series.values();
    if !normalize {
        return ys;
    }
    let lo = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    ys.iter()
        .map(|y| if range > 0.0 { (y - lo) / range } else { 0.0 })
        .collect()
}

pub fn fit_ols(series: &TimeSeries, opts: FitOptions) -> Result<RegressionStats, AnalyticsError> {
    let n = series.points.len();
    if n < MIN_REGRESSION_POINTS {
        return Err(AnalyticsError::DegenerateSeries(n));
    }
    let xs = abscissa(series, opts.abscissa);
    let ys = ordinate(series, opts.normalize);
    let fit = ols_line(&xs, &ys);
    let cook = cooks_distances(&xs, &ys, fit.slope, fit.intercept);
    let (idx, distance) = cook
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, d)| if d > best.1 { (i, d) } else { best });
    let point = series.points[idx];
    Ok(RegressionStats {
        n,
        m: fit.slope,
        b: fit.intercept,
        mse: fit.sse / n as f64,
        cook,
        mcd: McdPoint {
            ordinal: point.ordinal,
            value: point.value,
            distance,
        },
    })
}

/// Cook's distances of `series` under an existing fit.
pub fn cook_distance(series: &TimeSeries, fit: &RegressionStats, opts: FitOptions) -> Vec<f64> {
    let xs = abscissa(series, opts.abscissa);
    let ys = ordinate(series, opts.normalize);
    cooks_distances(&xs, &ys, fit.m, fit.b)
}

pub fn short_stats(series: &TimeSeries) -> Result<ShortStats, AnalyticsError> {
    let n = series.points.len();
    if n < 2 {
        return Err(AnalyticsError::TooShort(n));
    }
    if n >= MIN_REGRESSION_POINTS {
        return Err(AnalyticsError::UseRegression(n));
    }
    let ys = series.values();
    let mean = ys.iter().sum::<f64>() / n as f64;
    let variance = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n as f64;
    Ok(ShortStats { n, mean, variance })
}

/// Squared change between the window's two newest snapshots, if the series
/// has a point at both.
pub fn latest_delta(series: &TimeSeries, window: &WindowDescriptor) -> Option<DeltaStat> {
    let (prev, last) = window.latest_two()?;
    let [.., a, b] = series.points.as_slice() else { return None };
    if a.ordinal != prev || b.ordinal != last {
        return None;
    }
    Some(DeltaStat {
        squared_diff: (b.value - a.value).powi(2),
        from_ordinal: a.ordinal,
        to_ordinal: b.ordinal,
        from_value: a.value,
        to_value: b.value,
    })
}

fn key_values(table: &ExtractedTable, keys: &[String]) -> BTreeSet<Vec<String>> {
    let Some(cols) = keys.iter().map(|k| table.column_index(k)).collect::<Option<Vec<_>>>() else {
        return BTreeSet::new();
    };
    if cols.is_empty() {
        return BTreeSet::new();
    }
    (0..table.row_count())
        .filter_map(|r| {
            let cells: Vec<String> = cols.iter().map(|&c| table.columns[c][r].to_string()).collect();
            (!cells.iter().any(String::is_empty)).then_some(cells)
        })
        .collect()
}

/// Keys and columns of the newest sheet that no earlier sheet of the window has.
///
/// With a single sheet there is no history, so everything in it is new.
pub fn detect_novelty(frames: &[SheetFrame], schema: &WindowSchema) -> NoveltyReport {
    let Some((latest, prior)) = frames.split_last() else {
        return NoveltyReport::default();
    };
    let mut seen_keys = BTreeSet::new();
    let mut seen_attrs = BTreeSet::new();
    for f in prior {
        seen_keys.extend(key_values(&f.table, &schema.keys));
        seen_attrs.extend(f.table.header.iter().cloned());
    }
    let mut new_keys: Vec<Vec<String>> = Vec::new();
    let mut emitted = BTreeSet::new();
    // Keep sheet order for keys so reports read top-down like the sheet.
    if let Some(cols) = schema
        .keys
        .iter()
        .map(|k| latest.table.column_index(k))
        .collect::<Option<Vec<_>>>()
        .filter(|c| !c.is_empty())
    {
        for r in 0..latest.table.row_count() {
            let key: Vec<String> = cols.iter().map(|&c| latest.table.columns[c][r].to_string()).collect();
            if key.iter().any(String::is_empty) || seen_keys.contains(&key) {
                continue;
            }
            if emitted.insert(key.clone()) {
                new_keys.push(key);
            }
        }
    }
    let new_attributes = latest
        .table
        .header
        .iter()
        .filter(|h| !seen_attrs.contains(*h))
        .cloned()
        .collect();
    NoveltyReport {
        new_keys,
        new_attributes,
    }
}

pub fn score_series(series: &TimeSeries, window: &WindowDescriptor, opts: FitOptions) -> SeriesStats {
    SeriesStats {
        n: series.points.len(),
        regression: fit_ols(series, opts).ok(),
        short: short_stats(series).ok(),
        delta: latest_delta(series, window),
    }
}

pub fn score_population(
    population: &SeriesMap,
    window: &WindowDescriptor,
    opts: FitOptions,
) -> BTreeMap<SeriesId, SeriesStats> {
    population
        .iter()
        .map(|(id, s)| (id.clone(), score_series(s, window, opts)))
        .collect()
}

/// Debug dump: one line per series with m, b, mse, mcd, mean, variance, delta.
pub fn dump_stats(stats: &BTreeMap<SeriesId, SeriesStats>) -> String {
    fn opt(v: Option<f64>) -> String {
        v.map_or_else(|| "-".to_string(), |v| v.to_string())
    }
    let mut out = String::from("group\tentity\tattribute\tn\tm\tb\tmse\tmcd\tmean\tvariance\tdelta\n");
    for (id, s) in stats {
        let r = s.regression.as_ref();
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            id.group,
            id.entity.join(","),
            id.attribute,
            s.n,
            opt(r.map(|r| r.m)),
            opt(r.map(|r| r.b)),
            opt(r.map(|r| r.mse)),
            opt(r.map(|r| r.mcd.distance)),
            opt(s.short.map(|x| x.mean)),
            opt(s.short.map(|x| x.variance)),
            opt(s.delta.map(|d| d.squared_diff)),
        ));
    }
    out
}
