use super::{Category, Insight, TrendKind};
use crate::timeseries::Group;

/// Compact number rendering for narratives: integers without decimals, other
/// values with up to four decimals, tiny magnitudes in scientific notation.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if v.fract() == 0.0 && v.abs() < 1e15 {
        return format!("{v:.0}");
    }
    if v.abs() < 1e-3 {
        return format!("{v:.3e}");
    }
    let s = format!("{v:.4}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn subject(insight: &Insight) -> String {
    let entity = insight.entity.join(" / ");
    match insight.group {
        Some(Group::Nts) => format!("{entity}'s {}", insight.attribute),
        Some(Group::Rts) => {
            let base = insight.attribute.strip_suffix("-rank").unwrap_or(&insight.attribute);
            format!("{entity}'s rank by {base}")
        }
        Some(Group::Cts) => format!("the row count for {} = {entity}", insight.attribute),
        None => entity,
    }
}

fn capitalize(s: String) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => s,
    }
}

fn direction(m: f64) -> &'static str {
    if m > 0.0 {
        "rising"
    } else if m < 0.0 {
        "falling"
    } else {
        "flat"
    }
}

fn enumerate(items: &[String], limit: usize) -> String {
    let shown: Vec<&str> = items.iter().take(limit).map(String::as_str).collect();
    let mut s = shown.join(", ");
    if items.len() > limit {
        s.push_str(&format!(" and {} more", items.len() - limit));
    }
    s
}

/// Deterministic English sentence for an insight, one template per category
/// and group.
pub fn render_narrative(insight: &Insight) -> String {
    let subject = subject(insight);
    let stats = insight.stats.as_ref();
    let regression = stats.and_then(|s| s.regression.as_ref());
    match (insight.category, regression) {
        (Category::Highlight, Some(r)) => format!(
            "{} stands out overall: a {} trend (slope {} per period), fit error {} and its most unusual value {} at report {}, over {} reports.",
            capitalize(subject),
            direction(r.m),
            format_number(r.m),
            format_number(r.mse),
            format_number(r.mcd.value),
            r.mcd.ordinal,
            r.n
        ),
        (Category::Trend, Some(r)) => match insight.kind {
            Some(TrendKind::Flattest) => format!(
                "{} shows the flattest trend (slope {} per period) over {} reports.",
                capitalize(subject),
                format_number(r.m),
                r.n
            ),
            _ => format!(
                "{} shows the sharpest {} trend (slope {} per period) over {} reports.",
                capitalize(subject),
                direction(r.m),
                format_number(r.m),
                r.n
            ),
        },
        (Category::Outlier, Some(r)) => format!(
            "{} has the most significant outlier: {} at report {} (Cook's distance {}) against a trend of slope {} per period.",
            capitalize(subject),
            format_number(r.mcd.value),
            r.mcd.ordinal,
            format_number(r.mcd.distance),
            format_number(r.m)
        ),
        (Category::Delta, _) => match stats.and_then(|s| s.delta) {
            Some(d) => {
                let change = d.to_value - d.from_value;
                let sign = if change >= 0.0 { "+" } else { "" };
                format!(
                    "{} changed from {} to {} ({sign}{}) between the latest two reports.",
                    capitalize(subject),
                    format_number(d.from_value),
                    format_number(d.to_value),
                    format_number(change)
                )
            }
            None => format!("{} changed between the latest two reports.", capitalize(subject)),
        },
        (Category::Novelty, _) => {
            let report = insight.novelty.clone().unwrap_or_default();
            let keys: Vec<String> = report.new_keys.iter().map(|k| k.join(" / ")).collect();
            let mut parts = Vec::new();
            if !keys.is_empty() {
                parts.push(format!("{} new key value{} ({})", keys.len(), plural(keys.len()), enumerate(&keys, 10)));
            }
            if !report.new_attributes.is_empty() {
                let n = report.new_attributes.len();
                parts.push(format!("{n} new attribute{} ({})", plural(n), enumerate(&report.new_attributes, 10)));
            }
            format!("New in the latest report: {}.", parts.join(" and "))
        }
        (_, None) => format!("{} is notable in this window.", capitalize(subject)),
    }
}

fn plural(n: usize) -> &'static str {
    if n == 1 {
        ""
    } else {
        "s"
    }
}
