use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::suite::DimensionId;

/// Dimension → model → score.
pub type ScoreTable = BTreeMap<DimensionId, BTreeMap<String, f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarTable {
    pub values: ScoreTable,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Min-max rescales each dimension across models; a constant column maps to 1.
///
/// A dimension with a single model passes through unchanged with a note.
pub fn normalize_for_radar(table: &ScoreTable) -> RadarTable {
    let mut values = ScoreTable::new();
    let mut notes = Vec::new();
    for (dim, column) in table {
        if column.len() < 2 {
            notes.push(format!("{dim}: single model, values passed through unnormalized"));
            values.insert(*dim, column.clone());
            continue;
        }
        let lo = column.values().copied().fold(f64::INFINITY, f64::min);
        let hi = column.values().copied().fold(f64::NEG_INFINITY, f64::max);
        let span = hi - lo;
        let scaled = column
            .iter()
            .map(|(m, v)| (m.clone(), if span > 0.0 { (v - lo) / span } else { 1.0 }))
            .collect();
        values.insert(*dim, scaled);
    }
    RadarTable { values, notes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn column(vals: &[(&str, f64)]) -> ScoreTable {
        let mut t = ScoreTable::new();
        t.insert(DimensionId::Anatomy, vals.iter().map(|(m, v)| ((*m).to_owned(), *v)).collect());
        t
    }

    #[test]
    fn min_max_cases() {
        let r = normalize_for_radar(&column(&[("a", 0.2), ("b", 0.8)]));
        assert_eq!(r.values[&DimensionId::Anatomy]["a"], 0.0);
        assert_eq!(r.values[&DimensionId::Anatomy]["b"], 1.0);
        let r = normalize_for_radar(&column(&[("a", 0.4), ("b", 0.4)]));
        assert!(r.values[&DimensionId::Anatomy].values().all(|&v| v == 1.0));
        let r = normalize_for_radar(&column(&[("a", 0.4)]));
        assert_eq!(r.values[&DimensionId::Anatomy]["a"], 0.4);
        assert_eq!(r.notes.len(), 1);
    }

    #[test]
    fn anatomy_column() {
        let r = normalize_for_radar(&column(&[("hunyuan", 0.8858), ("cogvideox", 0.5972), ("sora", 0.8645), ("kling", 0.8699)]));
        let c = &r.values[&DimensionId::Anatomy];
        assert_eq!(c["hunyuan"], 1.0);
        assert_eq!(c["cogvideox"], 0.0);
        assert!((c["sora"] - (0.8645 - 0.5972) / (0.8858 - 0.5972)).abs() < 1e-12);
        assert!((c["sora"] - 0.9262).abs() < 1e-4);
        assert!((c["kling"] - 0.9449).abs() < 1e-4);
    }

    proptest! {
        #[test]
        fn preserves_ranking(vals in proptest::collection::vec(0.0f64..1.0, 2..8)) {
            let names: Vec<String> = (0..vals.len()).map(|i| format!("m{i}")).collect();
            let mut t = ScoreTable::new();
            t.insert(DimensionId::Diversity, names.iter().cloned().zip(vals.iter().copied()).collect());
            let r = normalize_for_radar(&t);
            let col = &r.values[&DimensionId::Diversity];
            for i in 0..vals.len() {
                for j in 0..vals.len() {
                    if vals[i] < vals[j] {
                        prop_assert!(col[&names[i]] < col[&names[j]]);
                    }
                    if vals[i] == vals[j] {
                        prop_assert_eq!(col[&names[i]], col[&names[j]]);
                    }
                }
                prop_assert!((0.0..=1.0).contains(&col[&names[i]]));
            }
        }
    }
}
