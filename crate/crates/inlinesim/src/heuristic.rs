//! The manual baseline: inline when the estimated post-inlining cost clears a
//! threshold, with a bonus for single-block callees.

use serde::{Deserialize, Serialize};

use crate::environment::Action;
use crate::features::FeatureVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeuristicParams {
    pub base_threshold: i64,
    pub single_block_bonus: i64,
}

impl Default for HeuristicParams {
    fn default() -> Self {
        // Tuned so the rule is non-trivial on default corpora (inlines some
        // sites, refuses others); configuration, not ground truth.
        HeuristicParams { base_threshold: 25, single_block_bonus: 15 }
    }
}

/// Pure function of the feature vector: inline iff
/// `cost_estimate <= base_threshold (+ bonus for single-block callees)`.
pub fn heuristic_decide(f: &FeatureVector, p: &HeuristicParams) -> Action {
    let mut threshold = p.base_threshold;
    if f.callee_basic_block_count == 1 {
        threshold += p.single_block_bonus;
    }
    if f.cost_estimate <= threshold {
        Action::Inline
    } else {
        Action::Skip
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::compute_heights;
    use crate::features::extract_features;
    use crate::fixtures::reference_module;

    fn with_cost_and_blocks(cost: i64, blocks: i64) -> FeatureVector {
        let mut a = [1i64; 11];
        a[3] = blocks;
        a[7] = cost;
        FeatureVector::from_array(a)
    }

    #[test]
    fn threshold_rule_with_defaults() {
        let p = HeuristicParams::default();
        let m = reference_module();
        let h = compute_heights(&m);
        let c1 = extract_features(&m, &"c1".into(), &h).unwrap();
        assert_eq!(heuristic_decide(&c1, &p), Action::Inline);

        assert_eq!(heuristic_decide(&with_cost_and_blocks(100, 2), &p), Action::Skip);
        // Single-block bonus lifts the threshold from 25 to 40.
        assert_eq!(heuristic_decide(&with_cost_and_blocks(30, 1), &p), Action::Inline);
        assert_eq!(heuristic_decide(&with_cost_and_blocks(30, 2), &p), Action::Skip);
    }

    #[test]
    fn decision_is_monotone_in_cost() {
        let p = HeuristicParams::default();
        let mut last = Action::Inline;
        for cost in 0..100 {
            let a = heuristic_decide(&with_cost_and_blocks(cost, 2), &p);
            assert!(!(last == Action::Skip && a == Action::Inline), "not monotone at {cost}");
            last = a;
        }
    }
}
