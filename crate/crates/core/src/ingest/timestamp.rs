use std::sync::OnceLock;

use chrono::NaiveDate;
use regex::Regex;

fn date_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(\d{4})-(\d{2})-(\d{2})|(\d{4})(\d{2})(\d{2})").expect("valid regex")
    })
}

/// Finds the first valid calendar date (`YYYY-MM-DD` or `YYYYMMDD`) in a
/// file name and returns midnight UTC of that day in epoch seconds.
pub fn timestamp_from_name(name: &str) -> Option<i64> {
    let re = date_re();
    let mut start = 0;
    while let Some(caps) = re.captures_at(name, start) {
        let whole = caps.get(0).expect("group 0");
        let (y, m, d) = if caps.get(1).is_some() {
            (&caps[1], &caps[2], &caps[3])
        } else {
            (&caps[4], &caps[5], &caps[6])
        };
        let date = NaiveDate::from_ymd_opt(
            y.parse().ok()?,
            m.parse().ok()?,
            d.parse().ok()?,
        );
        if let Some(dt) = date.and_then(|d| d.and_hms_opt(0, 0, 0)) {
            return Some(dt.and_utc().timestamp());
        }
        // Not a real date: resume one byte further so overlapping digit runs are tried.
        start = whole.start() + 1;
    }
    None
}

/// Explicit value first, then a date in the file name, then `now`.
pub fn resolve_timestamp(explicit: Option<i64>, source_name: &str, now: impl FnOnce() -> i64) -> i64 {
    explicit
        .or_else(|| timestamp_from_name(source_name))
        .unwrap_or_else(now)
}
