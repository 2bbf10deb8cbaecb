use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analytics::{DeltaStat, NoveltyReport, RegressionStats};
use crate::timeseries::{Group, SeriesId};

/// The three descending orders of one group's regression-eligible series.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroupOrderings {
    pub group: Option<Group>,
    pub by_m2: Vec<SeriesId>,
    pub by_mse: Vec<SeriesId>,
    pub by_mcd: Vec<SeriesId>,
}

impl GroupOrderings {
    pub fn len(&self) -> usize {
        self.by_m2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_m2.is_empty()
    }
}

fn descending_by(
    members: &[(&SeriesId, &RegressionStats)],
    metric: impl Fn(&RegressionStats) -> f64,
) -> Vec<SeriesId> {
    let mut sorted = members.to_vec();
    sorted.sort_by(|a, b| {
        metric(b.1)
            .total_cmp(&metric(a.1))
            .then_with(|| a.0.cmp(b.0))
    });
    sorted.into_iter().map(|(id, _)| id.clone()).collect()
}

/// Orders the series of `group` by m², mse and max Cook's distance, each
/// descending with ties broken by ascending `SeriesId`.
pub fn build_orderings(stats: &BTreeMap<SeriesId, RegressionStats>, group: Group) -> GroupOrderings {
    let members: Vec<(&SeriesId, &RegressionStats)> =
        stats.iter().filter(|(id, _)| id.group == group).collect();
    GroupOrderings {
        group: Some(group),
        by_m2: descending_by(&members, |r| r.m * r.m),
        by_mse: descending_by(&members, |r| r.mse),
        by_mcd: descending_by(&members, |r| r.mcd.distance),
    }
}

/// Product of the 1-based positions in the three orderings; lower is better.
pub fn composite_rank(orderings: &GroupOrderings) -> BTreeMap<SeriesId, u64> {
    fn position(list: &[SeriesId]) -> BTreeMap<&SeriesId, u64> {
        list.iter().enumerate().map(|(i, id)| (id, i as u64 + 1)).collect()
    }
    let mse = position(&orderings.by_mse);
    let mcd = position(&orderings.by_mcd);
    orderings
        .by_m2
        .iter()
        .enumerate()
        .map(|(i, id)| (id.clone(), (i as u64 + 1) * mse[id] * mcd[id]))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Highlight,
    Trend,
    Outlier,
    Delta,
    Novelty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendKind {
    Sharpest,
    Flattest,
}

/// A chosen series (or the novelty report) before rendering.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub category: Category,
    pub group: Option<Group>,
    pub series: Option<SeriesId>,
    pub trend: Option<TrendKind>,
    /// Highlight: composite rank. Trend: m². Outlier: max Cook's distance.
    /// Delta: squared change. Novelty: number of new keys and attributes.
    pub score: f64,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SelectError {
    #[error("nothing to report: no scored series, deltas or novelties")]
    NoInsights,
}

pub struct SelectionInput<'a> {
    /// Regression stats of every eligible series, all groups mixed.
    pub regression: &'a BTreeMap<SeriesId, RegressionStats>,
    pub deltas: &'a BTreeMap<SeriesId, DeltaStat>,
    pub novelty: &'a NoveltyReport,
}

fn first_not_in<'a>(list: impl IntoIterator<Item = &'a SeriesId>, taken: &BTreeSet<SeriesId>) -> Option<SeriesId> {
    list.into_iter().find(|id| !taken.contains(*id)).cloned()
}

/// Picks Highlight, Trend (sharpest and flattest), Outlier and Delta per group,
/// then Novelty.
///
/// Within a group each pick excludes the earlier ones. Trend picks are
/// skipped when the pool runs out; the Outlier then falls back to the top
/// of the mcd order even if that repeats an earlier pick. Highlight ties are
/// resolved by a PRNG seeded with `seed`.
pub fn select_insights(input: &SelectionInput<'_>, seed: u64) -> Result<Vec<Selection>, SelectError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picks = Vec::new();

    for group in Group::ALL {
        let orderings = build_orderings(input.regression, group);
        if !orderings.is_empty() {
            let ranks = composite_rank(&orderings);
            let best = ranks.values().copied().min().expect("non-empty");
            let tied: Vec<&SeriesId> = ranks.iter().filter(|(_, &r)| r == best).map(|(id, _)| id).collect();
            let highlight = (*tied.choose(&mut rng).expect("non-empty")).clone();
            let mut taken = BTreeSet::from([highlight.clone()]);
            picks.push(Selection {
                category: Category::Highlight,
                group: Some(group),
                series: Some(highlight),
                trend: None,
                score: best as f64,
            });

            let m2 = |id: &SeriesId| {
                let r = &input.regression[id];
                r.m * r.m
            };
            if let Some(sharp) = first_not_in(&orderings.by_m2, &taken) {
                taken.insert(sharp.clone());
                picks.push(Selection {
                    category: Category::Trend,
                    group: Some(group),
                    score: m2(&sharp),
                    series: Some(sharp),
                    trend: Some(TrendKind::Sharpest),
                });
            }
            if let Some(flat) = first_not_in(orderings.by_m2.iter().rev(), &taken) {
                taken.insert(flat.clone());
                picks.push(Selection {
                    category: Category::Trend,
                    group: Some(group),
                    score: m2(&flat),
                    series: Some(flat),
                    trend: Some(TrendKind::Flattest),
                });
            }
            let outlier = first_not_in(&orderings.by_mcd, &taken).unwrap_or_else(|| orderings.by_mcd[0].clone());
            picks.push(Selection {
                category: Category::Outlier,
                group: Some(group),
                score: input.regression[&outlier].mcd.distance,
                series: Some(outlier),
                trend: None,
            });
        }

        let delta = input
            .deltas
            .iter()
            .filter(|(id, _)| id.group == group)
            .max_by(|a, b| {
                a.1.squared_diff
                    .total_cmp(&b.1.squared_diff)
                    // max_by keeps the last maximum, so reverse the id order to prefer the smallest id.
                    .then_with(|| b.0.cmp(a.0))
            });
        if let Some((id, d)) = delta.filter(|(_, d)| d.squared_diff > 0.0) {
            picks.push(Selection {
                category: Category::Delta,
                group: Some(group),
                series: Some(id.clone()),
                trend: None,
                score: d.squared_diff,
            });
        }
    }

    if !input.novelty.is_empty() {
        picks.push(Selection {
            category: Category::Novelty,
            group: None,
            series: None,
            trend: None,
            score: (input.novelty.new_keys.len() + input.novelty.new_attributes.len()) as f64,
        });
    }

    if picks.is_empty() {
        Err(SelectError::NoInsights)
    } else {
        Ok(picks)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::McdPoint;

    fn id(name: &str) -> SeriesId {
        SeriesId {
            group: Group::Nts,
            entity: vec![name.into()],
            attribute: "Sales".into(),
        }
    }

    fn stats(m: f64, mse: f64, mcd: f64) -> RegressionStats {
        RegressionStats {
            n: 8,
            m,
            b: 0.0,
            mse,
            cook: vec![mcd],
            mcd: McdPoint {
                ordinal: 0,
                value: 0.0,
                distance: mcd,
            },
        }
    }

    #[test]
    fn m2_ignores_direction() {
        let s = BTreeMap::from([
            (id("A"), stats(3.0, 1.0, 1.0)),
            (id("B"), stats(-5.0, 1.0, 1.0)),
            (id("C"), stats(1.0, 1.0, 1.0)),
        ]);
        let o = build_orderings(&s, Group::Nts);
        assert_eq!(o.by_m2, vec![id("B"), id("A"), id("C")]);
        // Equal mse and mcd fall back to id order.
        assert_eq!(o.by_mse, vec![id("A"), id("B"), id("C")]);
        assert!(build_orderings(&s, Group::Cts).is_empty());
    }

    #[test]
    fn composite_is_product() {
        let o = GroupOrderings {
            group: Some(Group::Nts),
            by_m2: vec![id("A"), id("B"), id("C")],
            by_mse: vec![id("C"), id("B"), id("A")],
            by_mcd: vec![id("B"), id("A"), id("C")],
        };
        let r = composite_rank(&o);
        assert_eq!(r[&id("A")], 3 * 2);
        assert_eq!(r[&id("B")], 2 * 2);
        assert_eq!(r[&id("C")], 3 * 3);
    }

    #[test]
    fn single_series() {
        let s = BTreeMap::from([(id("A"), stats(1.0, 1.0, 1.0))]);
        let o = build_orderings(&s, Group::Nts);
        assert_eq!(composite_rank(&o)[&id("A")], 1);
        let picks = select_insights(
            &SelectionInput {
                regression: &s,
                deltas: &BTreeMap::new(),
                novelty: &NoveltyReport::default(),
            },
            42,
        )
        .unwrap();
        let cats: Vec<Category> = picks.iter().map(|p| p.category).collect();
        assert_eq!(cats, vec![Category::Highlight, Category::Outlier]);
    }

    #[test]
    fn three_series_outlier_doubles() {
        let s = BTreeMap::from([
            (id("A"), stats(9.0, 9.0, 9.0)),
            (id("B"), stats(5.0, 1.0, 1.0)),
            (id("C"), stats(1.0, 2.0, 2.0)),
        ]);
        let picks = select_insights(
            &SelectionInput {
                regression: &s,
                deltas: &BTreeMap::new(),
                novelty: &NoveltyReport::default(),
            },
            42,
        )
        .unwrap();
        let chosen: Vec<&SeriesId> = picks.iter().filter_map(|p| p.series.as_ref()).collect();
        assert_eq!(chosen, vec![&id("A"), &id("B"), &id("C"), &id("A")]);
    }

    #[test]
    fn nothing_to_say() {
        let err = select_insights(
            &SelectionInput {
                regression: &BTreeMap::new(),
                deltas: &BTreeMap::new(),
                novelty: &NoveltyReport::default(),
            },
            1,
        );
        assert_eq!(err, Err(SelectError::NoInsights));
    }

    #[test]
    fn delta_ties_prefer_smallest_id() {
        let d = |v: f64| DeltaStat {
            squared_diff: v,
            from_ordinal: 0,
            to_ordinal: 1,
            from_value: 0.0,
            to_value: v.sqrt(),
        };
        let deltas = BTreeMap::from([(id("B"), d(4.0)), (id("A"), d(4.0)), (id("C"), d(1.0))]);
        let picks = select_insights(
            &SelectionInput {
                regression: &BTreeMap::new(),
                deltas: &deltas,
                novelty: &NoveltyReport::default(),
            },
            1,
        )
        .unwrap();
        assert_eq!(picks.len(), 1);
        assert_eq!(picks[0].series, Some(id("A")));
        assert_eq!(picks[0].score, 4.0);
    }

    #[test]
    fn highlight_tie_is_seeded() {
        // Positions (1,2,3), (2,3,1), (3,1,2): every composite rank is 6.
        let s = BTreeMap::from([
            (id("A"), stats(3.0, 2.0, 1.0)),
            (id("B"), stats(2.0, 1.0, 3.0)),
            (id("C"), stats(1.0, 3.0, 2.0)),
        ]);
        let r = composite_rank(&build_orderings(&s, Group::Nts));
        assert!(r.values().all(|&v| v == 6));
        let input = SelectionInput {
            regression: &s,
            deltas: &BTreeMap::new(),
            novelty: &NoveltyReport::default(),
        };
        assert_eq!(select_insights(&input, 7).unwrap(), select_insights(&input, 7).unwrap());
        let winners: BTreeSet<SeriesId> = (0..64)
            .map(|seed| select_insights(&input, seed).unwrap()[0].series.clone().unwrap())
            .collect();
        assert_eq!(winners.len(), 3, "every tied series should win for some seed");
    }
}
