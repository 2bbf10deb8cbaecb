//! Seeded generators for synthetic report corpora.
//!
//! Every generator returns CSV sheets named with their date, so ingesting
//! them without an explicit timestamp orders them correctly.

use chrono::{Days, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSheet {
    pub name: String,
    pub timestamp: i64,
    pub csv: Vec<u8>,
}

fn day(start: NaiveDate, offset: u64) -> NaiveDate {
    start.checked_add_days(Days::new(offset)).expect("date in range")
}

fn epoch(date: NaiveDate) -> i64 {
    date.and_hms_opt(0, 0, 0).expect("midnight").and_utc().timestamp()
}

fn to_csv(rows: &[Vec<String>]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn sheet(prefix: &str, date: NaiveDate, rows: &[Vec<String>]) -> SyntheticSheet {
    SyntheticSheet {
        name: format!("{prefix}-{}.csv", date.format("%Y-%m-%d")),
        timestamp: epoch(date),
        csv: to_csv(rows),
    }
}

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetailOptions {
    pub sheets: usize,
    pub products: usize,
    pub seed: u64,
}

impl Default for RetailOptions {
    fn default() -> Self {
        RetailOptions {
            sheets: 12,
            products: 40,
            seed: 7,
        }
    }
}

pub const RETAIL_REGIONS: [&str; 4] = ["EU", "NA", "APAC", "LATAM"];

/// Weekly sales sheets with title rows and a blank leading column.
///
/// Sheet 3 lacks product `P1003`; the last sheet adds product `P9999` and a
/// `Refunds` column.
pub fn retail_corpus(opts: RetailOptions) -> Vec<SyntheticSheet> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let noise = Normal::new(0.0, 5.0).expect("valid sigma");
    let products: Vec<(String, f64, f64)> = (0..opts.products)
        .map(|i| (format!("P{}", 1000 + i), rng.gen_range(200.0..2000.0), rng.gen_range(-20.0..20.0)))
        .collect();
    let start = NaiveDate::from_ymd_opt(2020, 1, 6).expect("valid date");

    (0..opts.sheets)
        .map(|t| {
            let date = day(start, 7 * t as u64);
            let last = t + 1 == opts.sheets;
            let mut header = vec!["", "Product-ID", "Region", "Status", "Sales", "Cost", "Units"];
            if last {
                header.push("Refunds");
            }
            let mut rows = vec![
                vec![String::new(), "Acme weekly sales".into()],
                vec![String::new(), format!("Week of {date}")],
                vec![],
                header.iter().map(|h| h.to_string()).collect(),
            ];
            let mut lines: Vec<(String, usize, f64)> = products
                .iter()
                .enumerate()
                .filter(|(i, _)| !(t == 3 && *i == 3))
                .map(|(i, (id, base, slope))| (id.clone(), i, base + slope * t as f64))
                .collect();
            if last {
                lines.push(("P9999".into(), 0, 500.0));
            }
            for (id, i, level) in lines {
                let sales = round2((level + noise.sample(&mut rng)).max(0.0));
                let cost = round2(sales * 0.6 + noise.sample(&mut rng));
                let units = (sales / 10.0).round();
                let status = if rng.gen_bool(0.7) { "Open" } else { "Closed" };
                let mut row = vec![
                    String::new(),
                    id,
                    RETAIL_REGIONS[i % RETAIL_REGIONS.len()].to_string(),
                    status.to_string(),
                    sales.to_string(),
                    cost.to_string(),
                    units.to_string(),
                ];
                if last {
                    row.push(round2(rng.gen_range(0.0..50.0)).to_string());
                }
                rows.push(row);
            }
            sheet("retail", date, &rows)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedOptions {
    pub entities: usize,
    pub sheets: usize,
    /// Peer slopes are drawn from N(0, 1) and noise is N(0, 1).
    pub planted_slope: f64,
    pub seed: u64,
}

impl Default for PlantedOptions {
    fn default() -> Self {
        PlantedOptions {
            entities: 50,
            sheets: 12,
            planted_slope: 20.0,
            seed: 1,
        }
    }
}

/// One numeric attribute per entity, one entity with a much steeper slope.
/// Returns the sheets and the planted entity name.
pub fn planted_signal(opts: PlantedOptions) -> (Vec<SyntheticSheet>, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let unit = Normal::new(0.0, 1.0).expect("valid sigma");
    let planted = rng.gen_range(0..opts.entities);
    let entities: Vec<(String, f64, f64)> = (0..opts.entities)
        .map(|i| {
            let slope = if i == planted { opts.planted_slope } else { unit.sample(&mut rng) };
            (format!("E{i:03}"), rng.gen_range(50.0..150.0), slope)
        })
        .collect();
    let start = NaiveDate::from_ymd_opt(2021, 1, 1).expect("valid date");
    let sheets = (0..opts.sheets)
        .map(|t| {
            let mut rows = vec![vec!["Entity".to_string(), "Value".to_string()]];
            for (name, base, slope) in &entities {
                let v = base + slope * t as f64 + unit.sample(&mut rng);
                rows.push(vec![name.clone(), v.to_string()]);
            }
            sheet("planted", day(start, t as u64), &rows)
        })
        .collect();
    (sheets, format!("E{planted:03}"))
}

pub const OUTBREAK_EARLY: [&str; 4] = ["Hubei", "Guangdong", "Henan", "Zhejiang"];
pub const OUTBREAK_LATE: [&str; 2] = ["Italy", "Spain"];
pub const OUTBREAK_PEERS: [&str; 6] = ["Brazil", "Canada", "India", "Japan", "Korea", "Mexico"];

/// Two phases of `phase_len` daily sheets. The early group grows with
/// curvature in phase one and then stays constant; the late group stays
/// constant in phase one and grows in phase two. Peers never change.
pub fn two_phase_outbreak(phase_len: usize) -> Vec<SyntheticSheet> {
    let start = NaiveDate::from_ymd_opt(2020, 2, 1).expect("valid date");
    let growth = |k: usize, t: f64| 40.0 * (k + 3) as f64 * t + 6.0 * t * t;
    let p = phase_len as f64 - 1.0;
    (0..2 * phase_len)
        .map(|t| {
            let mut rows = vec![vec!["Province".to_string(), "Confirmed".to_string()]];
            let early_t = (t as f64).min(p);
            let late_t = (t as f64 - phase_len as f64).max(0.0);
            for (k, name) in OUTBREAK_EARLY.iter().enumerate() {
                rows.push(vec![name.to_string(), (100.0 + growth(k, early_t)).to_string()]);
            }
            for (k, name) in OUTBREAK_LATE.iter().enumerate() {
                rows.push(vec![name.to_string(), (20.0 + growth(k, late_t)).to_string()]);
            }
            for (k, name) in OUTBREAK_PEERS.iter().enumerate() {
                rows.push(vec![name.to_string(), (10 * (k + 1)).to_string()]);
            }
            sheet("outbreak", day(start, t as u64), &rows)
        })
        .collect()
}
