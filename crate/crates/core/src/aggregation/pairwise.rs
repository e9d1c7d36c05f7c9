use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AggregationError, ScoreRecord};
use crate::suite::DimensionId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairOutcome {
    AWins,
    BWins,
    Tie,
}

/// One pairwise comparison.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgment {
    pub model_a: String,
    pub model_b: String,
    pub outcome: PairOutcome,
}

impl Judgment {
    pub fn new(a: impl Into<String>, b: impl Into<String>, outcome: PairOutcome) -> Self {
        Self {
            model_a: a.into(),
            model_b: b.into(),
            outcome,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairTally {
    pub model_a: String,
    pub model_b: String,
    pub a_wins: usize,
    pub b_wins: usize,
    pub ties: usize,
}

impl PairTally {
    pub fn total(&self) -> usize {
        self.a_wins + self.b_wins + self.ties
    }
}

/// Points (win 1, tie 0.5) over comparisons, per model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinRatioTable {
    pub points: BTreeMap<String, f64>,
    pub comparisons: BTreeMap<String, usize>,
    pub ratios: BTreeMap<String, f64>,
    /// Pairs keyed with the lexicographically smaller model first.
    pub pairs: Vec<PairTally>,
}

impl WinRatioTable {
    pub fn ratio(&self, model: &str) -> Option<f64> {
        self.ratios.get(model).copied()
    }

    pub fn total_points(&self) -> f64 {
        self.points.values().sum()
    }

    pub fn total_comparisons(&self) -> usize {
        self.pairs.iter().map(PairTally::total).sum()
    }
}

pub fn win_ratio(judgments: &[Judgment]) -> Result<WinRatioTable, AggregationError> {
    let mut points: BTreeMap<String, f64> = BTreeMap::new();
    let mut comparisons: BTreeMap<String, usize> = BTreeMap::new();
    let mut pairs: BTreeMap<(String, String), PairTally> = BTreeMap::new();
    for j in judgments {
        if j.model_a == j.model_b {
            return Err(AggregationError::Contract(format!("model {} compared with itself", j.model_a)));
        }
        let (pa, pb) = match j.outcome {
            PairOutcome::AWins => (1.0, 0.0),
            PairOutcome::BWins => (0.0, 1.0),
            PairOutcome::Tie => (0.5, 0.5),
        };
        *points.entry(j.model_a.clone()).or_default() += pa;
        *points.entry(j.model_b.clone()).or_default() += pb;
        *comparisons.entry(j.model_a.clone()).or_default() += 1;
        *comparisons.entry(j.model_b.clone()).or_default() += 1;
        let swapped = j.model_a > j.model_b;
        let key = if swapped {
            (j.model_b.clone(), j.model_a.clone())
        } else {
            (j.model_a.clone(), j.model_b.clone())
        };
        let tally = pairs.entry(key.clone()).or_insert_with(|| PairTally {
            model_a: key.0,
            model_b: key.1,
            a_wins: 0,
            b_wins: 0,
            ties: 0,
        });
        match (j.outcome, swapped) {
            (PairOutcome::Tie, _) => tally.ties += 1,
            (PairOutcome::AWins, false) | (PairOutcome::BWins, true) => tally.a_wins += 1,
            _ => tally.b_wins += 1,
        }
    }
    let ratios = points
        .iter()
        .map(|(m, p)| (m.clone(), p / comparisons[m] as f64))
        .collect();
    Ok(WinRatioTable {
        points,
        comparisons,
        ratios,
        pairs: pairs.into_values().collect(),
    })
}

/// Human choice in one annotated pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Choice {
    A,
    B,
    Tie,
}

/// One row of the annotations CSV.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub dimension: DimensionId,
    pub prompt_id: String,
    pub group: usize,
    pub model_a: String,
    pub model_b: String,
    pub choice: Choice,
}

/// Human judgments of one dimension.
pub fn human_judgments(annotations: &[AnnotationRecord], dim: DimensionId) -> Result<Vec<Judgment>, AggregationError> {
    annotations
        .iter()
        .filter(|a| a.dimension == dim)
        .map(|a| {
            if a.model_a == a.model_b {
                return Err(AggregationError::Contract(format!(
                    "annotation {}#{} pairs {} with itself",
                    a.prompt_id, a.group, a.model_a
                )));
            }
            let outcome = match a.choice {
                Choice::A => PairOutcome::AWins,
                Choice::B => PairOutcome::BWins,
                Choice::Tie => PairOutcome::Tie,
            };
            Ok(Judgment::new(a.model_a.clone(), a.model_b.clone(), outcome))
        })
        .collect()
}

/// Pairwise judgments from scores: per (prompt, sample) slot, the higher score wins.
pub fn machine_judgments(records: &[ScoreRecord], dim: DimensionId) -> Vec<Judgment> {
    let mut slots: BTreeMap<(&str, usize), BTreeMap<&str, f64>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.dimension == dim) {
        if let Some(s) = r.value.score() {
            slots.entry((&r.prompt_id, r.sample)).or_default().insert(&r.model, s);
        }
    }
    let mut out = Vec::new();
    for models in slots.values() {
        let entries: Vec<(&str, f64)> = models.iter().map(|(m, s)| (*m, *s)).collect();
        for i in 0..entries.len() {
            for j in i + 1..entries.len() {
                let (a, sa) = entries[i];
                let (b, sb) = entries[j];
                let outcome = if sa > sb {
                    PairOutcome::AWins
                } else if sb > sa {
                    PairOutcome::BWins
                } else {
                    PairOutcome::Tie
                };
                out.push(Judgment::new(a, b, outcome));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregation::ScoreValue;
    use proptest::prelude::*;

    #[test]
    fn three_wins_one_tie() {
        let mut js = vec![Judgment::new("A", "B", PairOutcome::AWins); 3];
        js.push(Judgment::new("B", "A", PairOutcome::Tie));
        let t = win_ratio(&js).unwrap();
        assert_eq!(t.ratio("A"), Some(0.875));
        assert_eq!(t.ratio("B"), Some(0.125));
        assert_eq!(t.pairs[0].total(), 4);
    }

    #[test]
    fn all_ties_half() {
        let js = vec![
            Judgment::new("A", "B", PairOutcome::Tie),
            Judgment::new("B", "C", PairOutcome::Tie),
            Judgment::new("A", "C", PairOutcome::Tie),
        ];
        let t = win_ratio(&js).unwrap();
        assert!(t.ratios.values().all(|&r| r == 0.5));
    }

    #[test]
    fn self_pair_rejected() {
        assert!(win_ratio(&[Judgment::new("A", "A", PairOutcome::Tie)]).is_err());
    }

    fn rec(model: &str, prompt: &str, score: f64) -> ScoreRecord {
        ScoreRecord {
            prompt_id: prompt.into(),
            dimension: DimensionId::Diversity,
            model: model.into(),
            sample: 0,
            value: ScoreValue::Score(score),
            evidence: serde_json::Value::Null,
        }
    }

    #[test]
    fn machine_judgments_from_scores() {
        let rs = vec![rec("x", "p", 0.3), rec("y", "p", 0.5), rec("z", "p", 0.5)];
        let js = machine_judgments(&rs, DimensionId::Diversity);
        assert_eq!(
            js,
            vec![
                Judgment::new("x", "y", PairOutcome::BWins),
                Judgment::new("x", "z", PairOutcome::BWins),
                Judgment::new("y", "z", PairOutcome::Tie),
            ]
        );
        let t = win_ratio(&js).unwrap();
        assert_eq!(t.ratio("x"), Some(0.0));
        assert_eq!(t.ratio("y"), Some(0.75));
    }

    proptest! {
        #[test]
        fn one_point_per_pair(outcomes in proptest::collection::vec((0usize..4, 0usize..4, 0u8..3), 1..60)) {
            let names = ["a", "b", "c", "d"];
            let js: Vec<_> = outcomes
                .iter()
                .filter(|(i, j, _)| i != j)
                .map(|&(i, j, o)| {
                    let o = [PairOutcome::AWins, PairOutcome::BWins, PairOutcome::Tie][o as usize];
                    Judgment::new(names[i], names[j], o)
                })
                .collect();
            if !js.is_empty() {
                let t = win_ratio(&js).unwrap();
                prop_assert!((t.total_points() - js.len() as f64).abs() < 1e-9);
                prop_assert_eq!(t.total_comparisons(), js.len());
            }
        }

        #[test]
        fn antisymmetric(sa in 0.0f64..1.0, sb in 0.0f64..1.0) {
            let ab = machine_judgments(&[rec("a", "p", sa), rec("b", "p", sb)], DimensionId::Diversity);
            let ba = machine_judgments(&[rec("b", "p", sa), rec("a", "p", sb)], DimensionId::Diversity);
            let flip = |o: PairOutcome| match o {
                PairOutcome::AWins => PairOutcome::BWins,
                PairOutcome::BWins => PairOutcome::AWins,
                PairOutcome::Tie => PairOutcome::Tie,
            };
            prop_assert_eq!(ab[0].outcome, flip(ba[0].outcome));
        }
    }
}
