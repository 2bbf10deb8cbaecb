//! Fits a line to a short series and reports slope, fit error and the most
//! influential point by Cook's distance.

use anyhow::Result;
use sheetstack::analytics::{fit_ols, short_stats, FitOptions};
use sheetstack::timeseries::{Group, Point, SeriesId, TimeSeries};

fn series(values: &[f64]) -> TimeSeries {
    let id = SeriesId { group: Group::Nts, entity: vec!["demo".into()], attribute: "value".into() };
    TimeSeries {
        id,
        base: vec!["value".into()],
        points: values
            .iter()
            .enumerate()
            .map(|(i, &value)| Point { ordinal: i, timestamp: i as i64 * 604_800, value })
            .collect(),
    }
}

fn main() -> Result<()> {
    let s = series(&[10.0, 12.0, 13.5, 16.0, 40.0, 20.0, 22.5, 24.0]);
    let fit = fit_ols(&s, FitOptions::default())?;
    println!("slope {:.3}, intercept {:.3}, mse {:.3}", fit.m, fit.b, fit.mse);
    for (p, d) in s.points.iter().zip(&fit.cook) {
        println!("  ordinal {:>2} value {:>5} cook {:.4}", p.ordinal, p.value, d);
    }
    println!("most influential: {:?}", fit.mcd);

    let normalized = fit_ols(&s, FitOptions { normalize: true, ..FitOptions::default() })?;
    println!("normalized slope {:.4}", normalized.m);

    // Too short for a regression; summary stats only.
    let short = short_stats(&series(&[3.0, 5.0, 4.0]))?;
    println!("short series: mean {:.3}, variance {:.3}", short.mean, short.variance);
    Ok(())
}
