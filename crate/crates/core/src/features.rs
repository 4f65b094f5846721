//! Per-column features used by the role classifiers.
//!
//! Seven local features are computed per cell and averaged over the column;
//! two global features describe the column's value histogram.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::EventLog;

pub const FEATURE_COUNT: usize = 9;

/// Feature names in the fixed order used by [`FeatureVector::to_array`].
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "f_s_letters",
    "f_l_letters",
    "f_digits",
    "f_spaces",
    "f_symbols",
    "f_chars",
    "f_words",
    "f_r_unique",
    "f_m_unique",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("cannot compute features of an empty column")]
pub struct EmptyColumn;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LocalFeatures {
    pub f_s_letters: f64,
    pub f_l_letters: f64,
    pub f_digits: f64,
    pub f_spaces: f64,
    pub f_symbols: f64,
    pub f_chars: f64,
    pub f_words: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalFeatures {
    pub f_r_unique: f64,
    pub f_m_unique: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub f_s_letters: f64,
    pub f_l_letters: f64,
    pub f_digits: f64,
    pub f_spaces: f64,
    pub f_symbols: f64,
    pub f_chars: f64,
    pub f_words: f64,
    pub f_r_unique: f64,
    pub f_m_unique: f64,
}

impl FeatureVector {
    pub fn new(local: LocalFeatures, global: GlobalFeatures) -> Self {
        Self {
            f_s_letters: local.f_s_letters,
            f_l_letters: local.f_l_letters,
            f_digits: local.f_digits,
            f_spaces: local.f_spaces,
            f_symbols: local.f_symbols,
            f_chars: local.f_chars,
            f_words: local.f_words,
            f_r_unique: global.f_r_unique,
            f_m_unique: global.f_m_unique,
        }
    }

    pub fn to_array(&self) -> [f64; FEATURE_COUNT] {
        [
            self.f_s_letters,
            self.f_l_letters,
            self.f_digits,
            self.f_spaces,
            self.f_symbols,
            self.f_chars,
            self.f_words,
            self.f_r_unique,
            self.f_m_unique,
        ]
    }

    pub fn from_array(v: [f64; FEATURE_COUNT]) -> Self {
        Self {
            f_s_letters: v[0],
            f_l_letters: v[1],
            f_digits: v[2],
            f_spaces: v[3],
            f_symbols: v[4],
            f_chars: v[5],
            f_words: v[6],
            f_r_unique: v[7],
            f_m_unique: v[8],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

#[derive(Clone, Copy)]
enum CharClass {
    Small,
    Large,
    Digit,
    Space,
    Symbol,
}

fn classify(c: char) -> CharClass {
    match c {
        'a'..='z' => CharClass::Small,
        'A'..='Z' => CharClass::Large,
        '0'..='9' => CharClass::Digit,
        ' ' | '\t' => CharClass::Space,
        _ => CharClass::Symbol,
    }
}

/// Mean per-cell character-class ratios, character count and word count.
pub fn local_features<S: AsRef<str>>(cells: &[S]) -> Result<LocalFeatures, EmptyColumn> {
    if cells.is_empty() {
        return Err(EmptyColumn);
    }
    let mut sum = LocalFeatures::default();
    for cell in cells {
        let cell = cell.as_ref();
        let mut counts = [0usize; 5];
        let mut total = 0usize;
        for c in cell.chars() {
            counts[classify(c) as usize] += 1;
            total += 1;
        }
        if total > 0 {
            let t = total as f64;
            sum.f_s_letters += counts[CharClass::Small as usize] as f64 / t;
            sum.f_l_letters += counts[CharClass::Large as usize] as f64 / t;
            sum.f_digits += counts[CharClass::Digit as usize] as f64 / t;
            sum.f_spaces += counts[CharClass::Space as usize] as f64 / t;
            sum.f_symbols += counts[CharClass::Symbol as usize] as f64 / t;
        }
        sum.f_chars += total as f64;
        sum.f_words += cell.split_whitespace().count() as f64;
    }
    let n = cells.len() as f64;
    Ok(LocalFeatures {
        f_s_letters: sum.f_s_letters / n,
        f_l_letters: sum.f_l_letters / n,
        f_digits: sum.f_digits / n,
        f_spaces: sum.f_spaces / n,
        f_symbols: sum.f_symbols / n,
        f_chars: sum.f_chars / n,
        f_words: sum.f_words / n,
    })
}

/// Ratio of distinct values and mean multiplicity per distinct value.
pub fn global_features<S: AsRef<str>>(cells: &[S]) -> Result<GlobalFeatures, EmptyColumn> {
    if cells.is_empty() {
        return Err(EmptyColumn);
    }
    let mut histogram: HashMap<&str, usize> = HashMap::new();
    for cell in cells {
        *histogram.entry(cell.as_ref()).or_default() += 1;
    }
    let n = cells.len() as f64;
    let unique = histogram.len() as f64;
    Ok(GlobalFeatures {
        f_r_unique: unique / n,
        f_m_unique: histogram.values().sum::<usize>() as f64 / unique,
    })
}

pub fn column_features<S: AsRef<str>>(cells: &[S]) -> Result<FeatureVector, EmptyColumn> {
    Ok(FeatureVector::new(local_features(cells)?, global_features(cells)?))
}

/// One feature vector per column, in column order.
pub fn featurize_log(log: &EventLog) -> Vec<(String, FeatureVector)> {
    log.columns()
        .iter()
        .map(|c| {
            let fv = column_features(&c.cells).expect("event logs have at least one row");
            (c.name.clone(), fv)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EPS: f64 = 1e-12;

    #[test]
    fn case_prefix_example() {
        let f = local_features(&["Case01", "Case02", "Case03"]).unwrap();
        assert!((f.f_s_letters - 0.5).abs() < EPS);
        assert!((f.f_l_letters - 1.0 / 6.0).abs() < EPS);
        assert!((f.f_digits - 2.0 / 6.0).abs() < EPS);
        assert_eq!(f.f_chars, 6.0);
        assert_eq!(f.f_words, 1.0);
    }

    #[test]
    fn hyphenated_values_count_the_symbol() {
        let f = local_features(&["Case-01"]).unwrap();
        assert!((f.f_s_letters - 3.0 / 7.0).abs() < EPS);
        assert!((f.f_symbols - 1.0 / 7.0).abs() < EPS);
    }

    #[test]
    fn single_class_string() {
        let f = local_features(&["abc"]).unwrap();
        assert_eq!(f.f_s_letters, 1.0);
        assert_eq!(f.f_l_letters + f.f_digits + f.f_spaces + f.f_symbols, 0.0);
        assert_eq!(f.f_chars, 3.0);
        assert_eq!(f.f_words, 1.0);
    }

    #[test]
    fn mixed_string() {
        let f = local_features(&["a1 b!"]).unwrap();
        assert!((f.f_s_letters - 0.4).abs() < EPS);
        assert!((f.f_digits - 0.2).abs() < EPS);
        assert!((f.f_spaces - 0.2).abs() < EPS);
        assert!((f.f_symbols - 0.2).abs() < EPS);
        assert_eq!(f.f_l_letters, 0.0);
        assert_eq!(f.f_chars, 5.0);
        assert_eq!(f.f_words, 2.0);
    }

    #[test]
    fn tabs_are_spaces_and_non_ascii_are_symbols() {
        let f = local_features(&["a\tb", "é"]).unwrap();
        assert!((f.f_spaces - (1.0 / 3.0) / 2.0).abs() < EPS);
        assert!((f.f_symbols - 0.5).abs() < EPS);
        assert_eq!(f.f_chars, 2.0);
    }

    #[test]
    fn empty_cells_contribute_zeros() {
        let f = local_features(&["", "ab"]).unwrap();
        assert_eq!(f.f_s_letters, 0.5);
        assert_eq!(f.f_chars, 1.0);
        assert_eq!(f.f_words, 0.5);
        let g = global_features(&["", "", "x"]).unwrap();
        assert!((g.f_r_unique - 2.0 / 3.0).abs() < EPS);
    }

    #[test]
    fn global_worked_example() {
        let g = global_features(&["1", "2", "3", "1", "2"]).unwrap();
        assert!((g.f_r_unique - 0.6).abs() < EPS);
        assert!((g.f_m_unique - 5.0 / 3.0).abs() < EPS);
    }

    #[test]
    fn global_extremes() {
        let g = global_features(&["a", "b", "c", "d"]).unwrap();
        assert_eq!((g.f_r_unique, g.f_m_unique), (1.0, 1.0));
        let g = global_features(&["x"; 5]).unwrap();
        assert!((g.f_r_unique - 0.2).abs() < EPS);
        assert_eq!(g.f_m_unique, 5.0);
    }

    #[test]
    fn empty_column_is_an_error() {
        let none: [&str; 0] = [];
        assert_eq!(local_features(&none), Err(EmptyColumn));
        assert_eq!(global_features(&none), Err(EmptyColumn));
    }

    #[test]
    fn featurize_columns_in_order() {
        let log = EventLog::from_columns(
            vec![
                ("a".into(), vec!["x".into(), "y".into()]),
                ("b".into(), vec!["x".into(), "y".into()]),
                ("c".into(), vec!["1".into(), "1".into()]),
            ],
            "t",
        )
        .unwrap();
        let fv = featurize_log(&log);
        assert_eq!(fv.len(), 3);
        assert_eq!(fv[0].0, "a");
        assert_eq!(fv[0].1, fv[1].1);
        assert_ne!(fv[0].1, fv[2].1);

        let single = EventLog::from_columns(vec![("only".into(), vec!["v".into()])], "t").unwrap();
        assert_eq!(featurize_log(&single).len(), 1);
    }

    proptest! {
        #[test]
        fn ratios_sum_to_one(cells in proptest::collection::vec(".{1,12}", 1..40)) {
            let f = local_features(&cells).unwrap();
            let sum = f.f_s_letters + f.f_l_letters + f.f_digits + f.f_spaces + f.f_symbols;
            prop_assert!((sum - 1.0).abs() < 1e-9);
        }

        #[test]
        fn unique_ratio_times_multiplicity_is_one(cells in proptest::collection::vec("[a-c]{0,2}", 1..60)) {
            let g = global_features(&cells).unwrap();
            prop_assert!((g.f_r_unique * g.f_m_unique - 1.0).abs() < 1e-9);
            prop_assert!(g.f_r_unique > 0.0 && g.f_r_unique <= 1.0);
            prop_assert!(g.f_m_unique >= 1.0);
        }

        #[test]
        fn permutation_invariant(mut cells in proptest::collection::vec("[a-zA-Z0-9 :/-]{0,10}", 1..30), seed in any::<u64>()) {
            let before = column_features(&cells).unwrap();
            let n = cells.len();
            let mut s = seed;
            for i in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                cells.swap(i, (s >> 33) as usize % (i + 1));
            }
            let after = column_features(&cells).unwrap();
            for (x, y) in before.to_array().iter().zip(after.to_array()) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }

        #[test]
        fn duplicates_never_raise_uniqueness(cells in proptest::collection::vec("[a-d]{1,2}", 1..30), pick in any::<prop::sample::Index>()) {
            let before = global_features(&cells).unwrap();
            let mut more = cells.clone();
            more.push(cells[pick.index(cells.len())].clone());
            let after = global_features(&more).unwrap();
            prop_assert!(after.f_r_unique <= before.f_r_unique);
            prop_assert!(after.f_m_unique >= before.f_m_unique);
        }
    }
}
