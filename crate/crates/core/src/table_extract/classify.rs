//! Column classification into key (K), categorical (C), numeric (N) and
//! other attributes, plus the categorical combinations used for CTS series.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{infer_column_kind_with, ColumnKind, ExtractedTable};
use crate::ingest::CellValue;

/// Thresholds for the classification heuristics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyConfig {
    /// Distinct composite values / non-empty rows needed for a key.
    pub key_unique_ratio: f64,
    /// Rows with every key cell filled / all rows needed for a key.
    pub key_non_empty_ratio: f64,
    /// Only this many leading columns are searched for keys.
    pub key_search_columns: usize,
    pub categorical_max_unique_floor: usize,
    /// Upper bound on unique values as a fraction of rows (when above the floor).
    pub categorical_max_unique_fraction: f64,
    /// Minimum non-empty rows / unique values.
    pub categorical_min_ratio: f64,
    pub kind_dominance: f64,
    pub max_categoricals: usize,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            key_unique_ratio: 0.99,
            key_non_empty_ratio: 0.99,
            key_search_columns: 5,
            categorical_max_unique_floor: 20,
            categorical_max_unique_fraction: 0.5,
            categorical_min_ratio: 2.0,
            kind_dominance: super::DEFAULT_KIND_DOMINANCE,
            max_categoricals: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Categorical {
    pub name: String,
    /// Non-empty rows divided by unique values.
    pub ratio: f64,
    pub unique: usize,
}

/// One or two categorical attributes analysed together.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Combo(pub Vec<String>);

impl Combo {
    pub fn members(&self) -> &[String] {
        &self.0
    }
}

impl fmt::Display for Combo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join("+"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Key,
    KeyCandidateRejected,
    Categorical,
    CategoricalTooManyValues,
    CategoricalRatioTooLow,
    Numeric,
    Other,
    CategoricalNotSelected,
}

/// Why a column ended up where it did.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub column: String,
    pub rule: Rule,
    pub kind: ColumnKind,
    pub rows: usize,
    pub non_empty: usize,
    pub unique: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SchemaProfile {
    pub keys: Vec<String>,
    pub categoricals: Vec<Categorical>,
    pub numerics: Vec<String>,
    pub other: Vec<String>,
    /// The categorical subset (at most five) that combos are built from.
    pub selected: Vec<String>,
    pub combos: Vec<Combo>,
    pub diagnostics: Vec<Diagnostic>,
}

struct ColumnFacts {
    kind: ColumnKind,
    non_empty: usize,
    unique: usize,
    integral: bool,
}

fn facts(column: &[CellValue], dominance: f64) -> ColumnFacts {
    let kind = infer_column_kind_with(column, dominance);
    let values: Vec<String> = column
        .iter()
        .filter(|c| !c.is_empty())
        .map(ToString::to_string)
        .collect();
    let unique = values.iter().collect::<HashSet<_>>().len();
    let integral = column
        .iter()
        .filter_map(CellValue::as_number)
        .all(|v| v.fract() == 0.0);
    ColumnFacts {
        kind,
        non_empty: values.len(),
        unique,
        integral,
    }
}

/// Measurements (fractional numbers), booleans and blank columns never form keys.
fn key_candidate(f: &ColumnFacts) -> bool {
    match f.kind {
        ColumnKind::Empty | ColumnKind::Boolean => false,
        ColumnKind::Numeric => f.integral,
        _ => true,
    }
}

fn qualifies_as_key(table: &ExtractedTable, cols: &[usize], cfg: &ClassifyConfig) -> bool {
    let rows = table.row_count();
    if rows == 0 {
        return false;
    }
    let mut seen = HashSet::new();
    let mut filled = 0usize;
    for r in 0..rows {
        let cells: Vec<&CellValue> = cols.iter().map(|&c| &table.columns[c][r]).collect();
        if cells.iter().any(|c| c.is_empty()) {
            continue;
        }
        filled += 1;
        seen.insert(cells.iter().map(ToString::to_string).collect::<Vec<_>>());
    }
    filled > 0
        && filled as f64 >= cfg.key_non_empty_ratio * rows as f64
        && seen.len() as f64 >= cfg.key_unique_ratio * filled as f64
}

/// All index subsets of `pool` of the given size, in lexicographic order.
fn subsets(pool: &[usize], size: usize) -> Vec<Vec<usize>> {
    fn rec(pool: &[usize], size: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..pool.len() {
            cur.push(pool[i]);
            rec(pool, size, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(pool, size, 0, &mut Vec::new(), &mut out);
    out
}

pub fn classify_attributes(table: &ExtractedTable, cfg: &ClassifyConfig) -> SchemaProfile {
    let rows = table.row_count();
    let all_facts: Vec<ColumnFacts> = table
        .columns
        .iter()
        .map(|c| facts(c, cfg.kind_dominance))
        .collect();

    let pool: Vec<usize> = (0..table.header.len().min(cfg.key_search_columns))
        .filter(|&i| key_candidate(&all_facts[i]))
        .collect();
    let key_cols: Vec<usize> = (1..=pool.len())
        .flat_map(|size| subsets(&pool, size))
        .find(|cols| qualifies_as_key(table, cols, cfg))
        .unwrap_or_default();

    let mut profile = SchemaProfile::default();
    let max_unique = (cfg.categorical_max_unique_floor as f64)
        .max(cfg.categorical_max_unique_fraction * rows as f64);

    for (i, name) in table.header.iter().enumerate() {
        let f = &all_facts[i];
        let rule = if key_cols.contains(&i) {
            profile.keys.push(name.clone());
            Rule::Key
        } else if f.kind == ColumnKind::Numeric {
            profile.numerics.push(name.clone());
            Rule::Numeric
        } else if matches!(f.kind, ColumnKind::Text | ColumnKind::Boolean) {
            let ratio = if f.unique == 0 { 0.0 } else { f.non_empty as f64 / f.unique as f64 };
            if f.unique < 2 || f.unique as f64 > max_unique {
                profile.other.push(name.clone());
                Rule::CategoricalTooManyValues
            } else if ratio < cfg.categorical_min_ratio {
                profile.other.push(name.clone());
                Rule::CategoricalRatioTooLow
            } else {
                profile.categoricals.push(Categorical {
                    name: name.clone(),
                    ratio,
                    unique: f.unique,
                });
                Rule::Categorical
            }
        } else {
            profile.other.push(name.clone());
            Rule::Other
        };
        profile.diagnostics.push(Diagnostic {
            column: name.clone(),
            rule,
            kind: f.kind,
            rows,
            non_empty: f.non_empty,
            unique: f.unique,
        });
    }

    let (selected, combos) = select_categorical_subset_with(&profile.categoricals, cfg.max_categoricals);
    for d in &mut profile.diagnostics {
        if d.rule == Rule::Categorical && !selected.contains(&d.column) {
            d.rule = Rule::CategoricalNotSelected;
        }
    }
    profile.selected = selected;
    profile.combos = combos;
    profile
}

pub fn select_categorical_subset(categoricals: &[Categorical]) -> (Vec<String>, Vec<Combo>) {
    select_categorical_subset_with(categoricals, 5)
}

/// Picks at most `limit` categoricals spread evenly over the descending-ratio
/// order, then forms every singleton and every unordered pair.
fn select_categorical_subset_with(categoricals: &[Categorical], limit: usize) -> (Vec<String>, Vec<Combo>) {
    let selected: Vec<String> = if categoricals.len() <= limit {
        categoricals.iter().map(|c| c.name.clone()).collect()
    } else {
        let mut sorted: Vec<&Categorical> = categoricals.iter().collect();
        sorted.sort_by(|a, b| b.ratio.total_cmp(&a.ratio).then_with(|| a.name.cmp(&b.name)));
        let span = (sorted.len() - 1) as f64;
        let steps = (limit.max(2) - 1) as f64;
        (0..limit)
            .map(|i| sorted[(i as f64 * span / steps).round() as usize].name.clone())
            .collect()
    };
    let mut combos: Vec<Combo> = selected.iter().map(|c| Combo(vec![c.clone()])).collect();
    for i in 0..selected.len() {
        for j in i + 1..selected.len() {
            combos.push(Combo(vec![selected[i].clone(), selected[j].clone()]));
        }
    }
    (selected, combos)
}
