use serde::{Deserialize, Serialize};

use super::ColumnProbabilities;
use crate::roles::Role;

pub const DEFAULT_TIE_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub column: String,
    pub probability: f64,
}

/// Ranked candidate columns per role.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub k: usize,
    pub case: Vec<Candidate>,
    pub activity: Vec<Candidate>,
    pub timestamp: Vec<Candidate>,
}

impl CandidateSet {
    pub fn get(&self, role: Role) -> &[Candidate] {
        match role {
            Role::Case => &self.case,
            Role::Activity => &self.activity,
            Role::Timestamp => &self.timestamp,
        }
    }

    fn get_mut(&mut self, role: Role) -> &mut Vec<Candidate> {
        match role {
            Role::Case => &mut self.case,
            Role::Activity => &mut self.activity,
            Role::Timestamp => &mut self.timestamp,
        }
    }

    /// Product of the per-role list sizes: the number of raw combinations.
    pub fn cross_product_size(&self) -> usize {
        Role::ALL.iter().map(|&r| self.get(r).len()).product()
    }
}

/// Keep the `k` most probable columns per role plus any column tied with the
/// k-th within `epsilon`. Ties sort by column order. A boundary at zero
/// probability is not extended: zero-vote columns are kept only to fill `k`.
pub fn select_candidates(probabilities: &[ColumnProbabilities], k: usize, epsilon: f64) -> CandidateSet {
    let k = k.max(1);
    let mut set = CandidateSet {
        k,
        case: Vec::new(),
        activity: Vec::new(),
        timestamp: Vec::new(),
    };
    for role in Role::ALL {
        let mut ranked: Vec<(usize, f64)> = probabilities
            .iter()
            .enumerate()
            .map(|(i, c)| (i, c.probabilities.get(role)))
            .collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let take = if ranked.len() <= k {
            ranked.len()
        } else {
            let boundary = ranked[k - 1].1;
            if boundary <= epsilon {
                k
            } else {
                ranked.iter().take_while(|(_, p)| *p >= boundary - epsilon).count()
            }
        };
        *set.get_mut(role) = ranked[..take]
            .iter()
            .map(|&(i, p)| Candidate {
                column: probabilities[i].column.clone(),
                probability: p,
            })
            .collect();
    }
    set
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::RoleProbabilities;
    use proptest::prelude::*;

    fn cols(case: &[(&str, f64)]) -> Vec<ColumnProbabilities> {
        case.iter()
            .map(|&(n, p)| ColumnProbabilities {
                column: n.into(),
                probabilities: RoleProbabilities {
                    case: p,
                    activity: p,
                    timestamp: p,
                },
            })
            .collect()
    }

    fn names(c: &[Candidate]) -> Vec<&str> {
        c.iter().map(|c| c.column.as_str()).collect()
    }

    #[test]
    fn unique_max() {
        let s = select_candidates(&cols(&[("A", 0.9), ("B", 0.2), ("C", 0.1)]), 1, DEFAULT_TIE_EPSILON);
        assert_eq!(names(&s.case), vec!["A"]);
    }

    #[test]
    fn ties_at_the_boundary_are_kept() {
        let s = select_candidates(&cols(&[("A", 0.9), ("B", 0.9), ("C", 0.1)]), 1, DEFAULT_TIE_EPSILON);
        assert_eq!(names(&s.case), vec!["A", "B"]);
    }

    #[test]
    fn top_two() {
        let s = select_candidates(
            &cols(&[("A", 0.9), ("B", 0.5), ("C", 0.4), ("D", 0.1)]),
            2,
            DEFAULT_TIE_EPSILON,
        );
        assert_eq!(names(&s.case), vec!["A", "B"]);
    }

    #[test]
    fn ties_sort_by_column_order() {
        let s = select_candidates(&cols(&[("C", 0.5), ("A", 0.7), ("B", 0.5)]), 2, DEFAULT_TIE_EPSILON);
        assert_eq!(names(&s.case), vec!["A", "C", "B"]);
    }

    #[test]
    fn zero_boundary_is_not_extended() {
        let s = select_candidates(
            &cols(&[("A", 1.0), ("B", 0.0), ("C", 0.0), ("D", 0.0)]),
            2,
            DEFAULT_TIE_EPSILON,
        );
        assert_eq!(names(&s.case), vec!["A", "B"]);
    }

    #[test]
    fn fewer_columns_than_k() {
        let s = select_candidates(&cols(&[("A", 0.3), ("B", 0.6)]), 5, DEFAULT_TIE_EPSILON);
        assert_eq!(names(&s.case), vec!["B", "A"]);
    }

    proptest! {
        #[test]
        fn list_invariants(ps in proptest::collection::vec(0u32..5, 1..12), k in 1usize..4) {
            let named: Vec<(String, f64)> = ps.iter().enumerate().map(|(i, &p)| (format!("c{i}"), p as f64 / 4.0)).collect();
            let input: Vec<ColumnProbabilities> = named.iter().map(|(n, p)| ColumnProbabilities {
                column: n.clone(),
                probabilities: RoleProbabilities { case: *p, activity: 1.0 - *p, timestamp: 0.5 },
            }).collect();
            let s = select_candidates(&input, k, DEFAULT_TIE_EPSILON);
            for role in Role::ALL {
                let list = s.get(role);
                prop_assert!(list.len() >= k.min(input.len()));
                prop_assert!(list.windows(2).all(|w| w[0].probability >= w[1].probability));
                if list.len() > k {
                    let boundary = list[k - 1].probability;
                    prop_assert!(list[k..].iter().all(|c| (c.probability - boundary).abs() <= DEFAULT_TIE_EPSILON));
                }
                // Nothing left out beats the last kept candidate.
                let last = list.last().unwrap().probability;
                let kept: std::collections::HashSet<_> = list.iter().map(|c| c.column.clone()).collect();
                for c in &input {
                    if !kept.contains(&c.column) {
                        prop_assert!(c.probabilities.get(role) <= last);
                    }
                }
            }
        }

        #[test]
        fn distinct_probabilities_select_permutation_invariant_sets(seed in any::<u64>(), n in 3usize..10, k in 1usize..3) {
            let input: Vec<ColumnProbabilities> = (0..n).map(|i| ColumnProbabilities {
                column: format!("c{i}"),
                probabilities: RoleProbabilities { case: (i as f64 + 1.0) / (n as f64 + 1.0), activity: 0.5, timestamp: 0.5 },
            }).collect();
            let mut shuffled = input.clone();
            let mut s = seed;
            for i in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                shuffled.swap(i, (s >> 33) as usize % (i + 1));
            }
            let a = select_candidates(&input, k, DEFAULT_TIE_EPSILON);
            let b = select_candidates(&shuffled, k, DEFAULT_TIE_EPSILON);
            prop_assert_eq!(names(&a.case), names(&b.case));
        }
    }
}
