//! Timeseries construction across the snapshots of a window.
//!
//! * NTS: one series per (composite key value, numeric attribute).
//! * RTS: the same keys over per-sheet ascending ranks of each numeric attribute.
//! * CTS: per (categorical value, combo), the number of rows holding that value.
//!
//! A sheet contributes a point only when the entity is present there, so
//! series can have gaps.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use percent_encoding::{percent_decode_str, utf8_percent_encode, AsciiSet, CONTROLS};
use serde::{Deserialize, Serialize};

use crate::ingest::CellValue;
use crate::table_extract::{Combo, ExtractedTable, SchemaProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Group {
    #[serde(rename = "NTS")]
    Nts,
    #[serde(rename = "RTS")]
    Rts,
    #[serde(rename = "CTS")]
    Cts,
}

impl Group {
    pub const ALL: [Group; 3] = [Group::Nts, Group::Rts, Group::Cts];

    pub fn as_str(self) -> &'static str {
        match self {
            Group::Nts => "NTS",
            Group::Rts => "RTS",
            Group::Cts => "CTS",
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Names a series. Ordering is lexicographic by group, entity, attribute and
/// serves as the deterministic tie-breaker everywhere.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SeriesId {
    pub group: Group,
    pub entity: Vec<String>,
    pub attribute: String,
}

const KEY_COMPONENT: &AsciiSet = &CONTROLS.add(b'/').add(b'%');

impl SeriesId {
    /// Compact string form `GROUP/entity.../attribute`, each component
    /// percent-encoded so `/` never appears inside one.
    pub fn key(&self) -> String {
        let mut parts = vec![self.group.as_str().to_string()];
        parts.extend(self.entity.iter().map(|e| utf8_percent_encode(e, KEY_COMPONENT).to_string()));
        parts.push(utf8_percent_encode(&self.attribute, KEY_COMPONENT).to_string());
        parts.join("/")
    }

    pub fn parse_key(key: &str) -> Option<SeriesId> {
        let parts: Vec<&str> = key.split('/').collect();
        if parts.len() < 3 {
            return None;
        }
        let group = match parts[0] {
            "NTS" => Group::Nts,
            "RTS" => Group::Rts,
            "CTS" => Group::Cts,
            _ => return None,
        };
        let decode = |s: &str| percent_decode_str(s).decode_utf8().ok().map(|c| c.into_owned());
        let entity = parts[1..parts.len() - 1]
            .iter()
            .map(|p| decode(p))
            .collect::<Option<Vec<_>>>()?;
        let attribute = decode(parts[parts.len() - 1])?;
        Some(SeriesId {
            group,
            entity,
            attribute,
        })
    }
}

impl fmt::Display for SeriesId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({}) {}", self.group, self.entity.join(", "), self.attribute)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub ordinal: usize,
    #[serde(rename = "ts")]
    pub timestamp: i64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub id: SeriesId,
    /// Visible column names the series derives from: the numeric attribute
    /// for NTS/RTS, the combo members for CTS.
    pub base: Vec<String>,
    /// Strictly increasing ordinals.
    pub points: Vec<Point>,
}

impl TimeSeries {
    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }
}

pub type SeriesMap = BTreeMap<SeriesId, TimeSeries>;

/// One analysed sheet of the window.
#[derive(Debug, Clone)]
pub struct SheetFrame {
    pub table: ExtractedTable,
    pub profile: SchemaProfile,
    pub ordinal: usize,
    pub timestamp: i64,
}

/// The attribute roles used for the whole window.
///
/// Per-sheet heuristics can disagree (a column may look unique in one sheet
/// and not in another), so keys and combos follow the most common per-sheet
/// choice, ties going to the newest sheet. Numeric attributes are the union
/// over all sheets, so attributes that appear late simply start late.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WindowSchema {
    pub keys: Vec<String>,
    pub numerics: Vec<String>,
    pub combos: Vec<Combo>,
}

fn consensus<T: Clone + Eq + std::hash::Hash>(items: impl Iterator<Item = T>) -> Option<T> {
    let items: Vec<T> = items.collect();
    let mut counts: HashMap<&T, usize> = HashMap::new();
    for item in &items {
        *counts.entry(item).or_default() += 1;
    }
    let best = counts.values().copied().max()?;
    items.iter().rev().find(|i| counts[i] == best).cloned()
}

impl WindowSchema {
    pub fn reconcile(frames: &[SheetFrame]) -> Self {
        let keys = consensus(frames.iter().map(|f| f.profile.keys.clone())).unwrap_or_default();
        let combos = consensus(frames.iter().map(|f| f.profile.combos.clone())).unwrap_or_default();
        let mut numerics: Vec<String> = Vec::new();
        for frame in frames {
            for n in &frame.profile.numerics {
                if !keys.contains(n) && !numerics.contains(n) {
                    numerics.push(n.clone());
                }
            }
        }
        WindowSchema {
            keys,
            numerics,
            combos,
        }
    }
}

/// Rows of `table` addressed by composite key, first occurrence only.
fn keyed_rows(table: &ExtractedTable, keys: &[String]) -> Option<Vec<(Vec<String>, usize)>> {
    if keys.is_empty() {
        return None;
    }
    let cols: Vec<usize> = keys
        .iter()
        .map(|k| table.column_index(k))
        .collect::<Option<_>>()?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut duplicates = 0usize;
    for r in 0..table.row_count() {
        let cells: Vec<&CellValue> = cols.iter().map(|&c| &table.columns[c][r]).collect();
        if cells.iter().any(|c| c.is_empty()) {
            continue;
        }
        let key: Vec<String> = cells.iter().map(ToString::to_string).collect();
        if seen.insert(key.clone()) {
            out.push((key, r));
        } else {
            duplicates += 1;
        }
    }
    if duplicates > 0 {
        tracing::warn!(duplicates, ?keys, "duplicate key values ignored, first occurrence wins");
    }
    Some(out)
}

/// Ascending competition ranks: smallest value gets 1, ties share the lowest rank.
pub fn competition_ranks(values: &[Option<f64>]) -> Vec<Option<u32>> {
    let mut present: Vec<(usize, f64)> = values
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|v| (i, v)))
        .collect();
    present.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut ranks = vec![None; values.len()];
    let mut current_rank = 0u32;
    for (pos, &(i, v)) in present.iter().enumerate() {
        if pos == 0 || v != present[pos - 1].1 {
            current_rank = pos as u32 + 1;
        }
        ranks[i] = Some(current_rank);
    }
    ranks
}

/// Appends an `<n>-rank` column per numeric attribute. Ranks run over the
/// first occurrence of each key; other rows and non-numeric cells get `Empty`.
pub fn add_rank_columns(table: &ExtractedTable, keys: &[String], numerics: &[String]) -> ExtractedTable {
    let mut out = table.clone();
    let rows = keyed_rows(table, keys).unwrap_or_default();
    for n in numerics {
        let Some(col) = table.column_index(n) else { continue };
        let values: Vec<Option<f64>> = rows.iter().map(|(_, r)| table.columns[col][*r].as_number()).collect();
        let ranks = competition_ranks(&values);
        let mut column = vec![CellValue::Empty; table.row_count()];
        for ((_, r), rank) in rows.iter().zip(ranks) {
            if let Some(rank) = rank {
                column[*r] = CellValue::Number(rank as f64);
            }
        }
        out.header.push(rank_attribute(n));
        out.columns.push(column);
    }
    out
}

pub fn rank_attribute(numeric: &str) -> String {
    format!("{numeric}-rank")
}

fn push_point(map: &mut SeriesMap, id: SeriesId, base: &[String], point: Point) {
    map.entry(id.clone())
        .or_insert_with(|| TimeSeries {
            id,
            base: base.to_vec(),
            points: Vec::new(),
        })
        .points
        .push(point);
}

fn finish(mut map: SeriesMap) -> SeriesMap {
    for s in map.values_mut() {
        s.points.sort_by_key(|p| p.ordinal);
    }
    map
}

pub fn build_nts(frames: &[SheetFrame], schema: &WindowSchema) -> SeriesMap {
    let mut map = SeriesMap::new();
    for frame in frames {
        let Some(rows) = keyed_rows(&frame.table, &schema.keys) else { continue };
        for n in &schema.numerics {
            let Some(col) = frame.table.column_index(n) else { continue };
            let base = [n.clone()];
            for (key, r) in &rows {
                if let Some(value) = frame.table.columns[col][*r].as_number() {
                    let id = SeriesId {
                        group: Group::Nts,
                        entity: key.clone(),
                        attribute: n.clone(),
                    };
                    push_point(&mut map, id, &base, Point {
                        ordinal: frame.ordinal,
                        timestamp: frame.timestamp,
                        value,
                    });
                }
            }
        }
    }
    finish(map)
}

pub fn build_rts(frames: &[SheetFrame], schema: &WindowSchema) -> SeriesMap {
    let mut map = SeriesMap::new();
    for frame in frames {
        let Some(rows) = keyed_rows(&frame.table, &schema.keys) else { continue };
        for n in &schema.numerics {
            let Some(col) = frame.table.column_index(n) else { continue };
            let base = [n.clone()];
            let attribute = rank_attribute(n);
            let values: Vec<Option<f64>> = rows.iter().map(|(_, r)| frame.table.columns[col][*r].as_number()).collect();
            for ((key, _), rank) in rows.iter().zip(competition_ranks(&values)) {
                let Some(rank) = rank else { continue };
                let id = SeriesId {
                    group: Group::Rts,
                    entity: key.clone(),
                    attribute: attribute.clone(),
                };
                push_point(&mut map, id, &base, Point {
                    ordinal: frame.ordinal,
                    timestamp: frame.timestamp,
                    value: rank as f64,
                });
            }
        }
    }
    finish(map)
}

/// Row counts per categorical value. With `zero_fill`, sheets that carry the
/// combo's columns but not the value record an explicit 0.
pub fn build_cts(frames: &[SheetFrame], schema: &WindowSchema, zero_fill: bool) -> SeriesMap {
    let mut counts: BTreeMap<(usize, Vec<String>), BTreeMap<usize, u64>> = BTreeMap::new();
    let mut carriers: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    let timestamps: BTreeMap<usize, i64> = frames.iter().map(|f| (f.ordinal, f.timestamp)).collect();

    for frame in frames {
        for (ci, combo) in schema.combos.iter().enumerate() {
            let Some(cols) = combo
                .members()
                .iter()
                .map(|m| frame.table.column_index(m))
                .collect::<Option<Vec<_>>>()
            else {
                continue;
            };
            carriers.entry(ci).or_default().insert(frame.ordinal);
            for r in 0..frame.table.row_count() {
                let cells: Vec<&CellValue> = cols.iter().map(|&c| &frame.table.columns[c][r]).collect();
                if cells.iter().any(|c| c.is_empty()) {
                    continue;
                }
                let value = cells.iter().map(ToString::to_string).collect();
                *counts
                    .entry((ci, value))
                    .or_default()
                    .entry(frame.ordinal)
                    .or_default() += 1;
            }
        }
    }

    let mut map = SeriesMap::new();
    for ((ci, value), per_sheet) in counts {
        let combo = &schema.combos[ci];
        let id = SeriesId {
            group: Group::Cts,
            entity: value,
            attribute: combo.to_string(),
        };
        let ordinals: Vec<usize> = if zero_fill {
            carriers[&ci].iter().copied().collect()
        } else {
            per_sheet.keys().copied().collect()
        };
        let points = ordinals
            .into_iter()
            .map(|o| Point {
                ordinal: o,
                timestamp: timestamps[&o],
                value: per_sheet.get(&o).copied().unwrap_or(0) as f64,
            })
            .collect();
        map.insert(id.clone(), TimeSeries {
            id,
            base: combo.members().to_vec(),
            points,
        });
    }
    map
}

/// NTS, RTS and CTS series of a window in one map.
pub fn build_all(frames: &[SheetFrame], schema: &WindowSchema, cts_zero_fill: bool) -> SeriesMap {
    let mut all = build_nts(frames, schema);
    all.extend(build_rts(frames, schema));
    all.extend(build_cts(frames, schema, cts_zero_fill));
    all
}

/// Debug dump: one line per series, `GROUP<TAB>entity<TAB>attribute<TAB>(ordinal:value) ...`.
pub fn dump_series(series: &SeriesMap) -> String {
    let mut out = String::new();
    for s in series.values() {
        let points: Vec<String> = s.points.iter().map(|p| format!("({}:{})", p.ordinal, p.value)).collect();
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            s.id.group,
            s.id.entity.join(","),
            s.id.attribute,
            points.join(" ")
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::parse_csv;
    use crate::table_extract::{classify_attributes, extract_table, ClassifyConfig};

    fn frame(csv: &str, ordinal: usize) -> SheetFrame {
        let table = extract_table(&parse_csv(csv.as_bytes()).unwrap()).unwrap();
        let profile = classify_attributes(&table, &ClassifyConfig::default());
        SheetFrame {
            table,
            profile,
            ordinal,
            timestamp: 1000 + ordinal as i64,
        }
    }

    fn nts_id(key: &str, attr: &str) -> SeriesId {
        SeriesId {
            group: Group::Nts,
            entity: vec![key.into()],
            attribute: attr.into(),
        }
    }

    #[test]
    fn worked_rank_example() {
        let f = frame("Product-ID,Sales\nP1234,1000\nP2345,500\nP3456,1200\n", 0);
        let ranked = add_rank_columns(&f.table, &["Product-ID".into()], &["Sales".into()]);
        assert_eq!(ranked.header.last().unwrap(), "Sales-rank");
        let ranks: Vec<f64> = ranked.columns.last().unwrap().iter().filter_map(CellValue::as_number).collect();
        assert_eq!(ranks, vec![2.0, 1.0, 3.0]);
    }

    #[test]
    fn rank_edge_cases() {
        assert_eq!(competition_ranks(&[Some(4.0)]), vec![Some(1)]);
        assert_eq!(
            competition_ranks(&[Some(5.0), Some(5.0), Some(7.0)]),
            vec![Some(1), Some(1), Some(3)]
        );
        assert_eq!(competition_ranks(&[None, Some(2.0), Some(1.0)]), vec![None, Some(2), Some(1)]);
    }

    #[test]
    fn nts_follows_sales_over_sheets() {
        let frames: Vec<SheetFrame> = [1000, 1100, 1200]
            .iter()
            .enumerate()
            .map(|(i, s)| frame(&format!("Product-ID,Sales\nP1234,{s}\nP2345,7\n"), i))
            .collect();
        let schema = WindowSchema::reconcile(&frames);
        let nts = build_nts(&frames, &schema);
        let s = &nts[&nts_id("P1234", "Sales")];
        assert_eq!(s.values(), vec![1000.0, 1100.0, 1200.0]);
        assert_eq!(s.points.iter().map(|p| p.ordinal).collect::<Vec<_>>(), vec![0, 1, 2]);
        let rts = build_rts(&frames, &schema);
        assert_eq!(rts.len(), nts.len());
        let r = &rts[&SeriesId {
            group: Group::Rts,
            entity: vec!["P1234".into()],
            attribute: "Sales-rank".into(),
        }];
        assert_eq!(r.values(), vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn missing_key_leaves_gap() {
        let frames: Vec<SheetFrame> = (0..10)
            .map(|i| {
                let body = if i == 4 { "P2,5\n".to_string() } else { format!("P1,{i}\nP2,5\n") };
                frame(&format!("id,Sales\n{body}"), i)
            })
            .collect();
        let schema = WindowSchema::reconcile(&frames);
        let nts = build_nts(&frames, &schema);
        let s = &nts[&nts_id("P1", "Sales")];
        assert_eq!(s.points.len(), 9);
        assert!(s.points.iter().all(|p| p.ordinal != 4));
    }

    #[test]
    fn empty_sales_drops_rank_point() {
        let frames: Vec<SheetFrame> = (0..5)
            .map(|i| {
                let v = if i == 3 { String::new() } else { "3".into() };
                frame(&format!("id,Sales\nA,{v}\nB,1\nC,2\n"), i)
            })
            .collect();
        let schema = WindowSchema::reconcile(&frames);
        let rts = build_rts(&frames, &schema);
        let a = &rts[&SeriesId {
            group: Group::Rts,
            entity: vec!["A".into()],
            attribute: "Sales-rank".into(),
        }];
        assert_eq!(a.points.iter().map(|p| p.ordinal).collect::<Vec<_>>(), vec![0, 1, 2, 4]);
        assert_eq!(a.values(), vec![3.0; 4]);
    }

    #[test]
    fn no_keys_no_nts() {
        let frames = vec![
            frame("Region,Status\nEU,Open\nEU,Open\nUS,Closed\nUS,Closed\n", 0),
            frame("Region,Status\nEU,Open\nEU,Closed\nUS,Closed\nUS,Closed\n", 1),
        ];
        let schema = WindowSchema::reconcile(&frames);
        assert!(schema.keys.is_empty());
        assert!(build_nts(&frames, &schema).is_empty());
        assert!(!build_cts(&frames, &schema, false).is_empty());
    }

    #[test]
    fn cts_counts_single_and_pair() {
        let mut csv = String::from("Region,Status\n");
        for i in 0..60 {
            let region = if i < 40 { "EU" } else { "US" };
            let status = if i % 2 == 0 { "Open" } else { "Closed" };
            csv.push_str(&format!("{region},{status}\n"));
        }
        csv.push_str(",Open\n");
        let frames = vec![frame(&csv, 0)];
        let schema = WindowSchema::reconcile(&frames);
        let cts = build_cts(&frames, &schema, false);
        let eu = &cts[&SeriesId {
            group: Group::Cts,
            entity: vec!["EU".into()],
            attribute: "Region".into(),
        }];
        assert_eq!(eu.points, vec![Point { ordinal: 0, timestamp: 1000, value: 40.0 }]);
        let eu_open = &cts[&SeriesId {
            group: Group::Cts,
            entity: vec!["EU".into(), "Open".into()],
            attribute: "Region+Status".into(),
        }];
        assert_eq!(eu_open.values(), vec![20.0]);
        assert_eq!(eu_open.base, vec!["Region", "Status"]);
    }

    #[test]
    fn cts_zero_fill() {
        let frames = vec![
            frame("Region,x\nEU,a\nEU,b\nUS,c\nUS,d\n", 0),
            frame("Region,x\nEU,a\nEU,b\nAP,c\nAP,d\n", 1),
        ];
        let schema = WindowSchema::reconcile(&frames);
        let us = SeriesId {
            group: Group::Cts,
            entity: vec!["US".into()],
            attribute: "Region".into(),
        };
        assert_eq!(build_cts(&frames, &schema, false)[&us].values(), vec![2.0]);
        assert_eq!(build_cts(&frames, &schema, true)[&us].values(), vec![2.0, 0.0]);
    }

    #[test]
    fn key_round_trip() {
        let id = SeriesId {
            group: Group::Cts,
            entity: vec!["a/b".into(), "50%".into(), "".into()],
            attribute: "Region+Status".into(),
        };
        let key = id.key();
        assert_eq!(key, "CTS/a%2Fb/50%25//Region+Status");
        assert_eq!(SeriesId::parse_key(&key), Some(id));
        assert_eq!(SeriesId::parse_key("XYZ/a/b"), None);
        assert_eq!(SeriesId::parse_key("NTS/a"), None);
    }

    #[test]
    fn dump_format() {
        let frames = vec![frame("id,Sales\nP1,10\nP2,20\n", 3)];
        let schema = WindowSchema::reconcile(&frames);
        let dump = dump_series(&build_nts(&frames, &schema));
        assert_eq!(dump, "NTS\tP1\tSales\t(3:10)\nNTS\tP2\tSales\t(3:20)\n");
    }
}
