//! The distilled state representation: 11 numerical features per call site.
//!
//! The field order below is the canonical wire order everywhere: trajectory
//! logs, policy inputs and the stats block of policy files.

use std::collections::HashMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::irmodel::{CallSiteId, FunctionId, ModuleGraph};

pub const FEATURE_COUNT: usize = 11;

pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "caller_basic_block_count",
    "caller_conditionally_executed_blocks",
    "caller_users",
    "callee_basic_block_count",
    "callee_conditionally_executed_blocks",
    "callee_users",
    "callsite_height",
    "cost_estimate",
    "number_constant_params",
    "edge_count",
    "node_count",
];

/// Smallest standard deviation used for input normalization.
pub const STD_FLOOR: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FeatureVector {
    pub caller_basic_block_count: i64,
    pub caller_conditionally_executed_blocks: i64,
    pub caller_users: i64,
    pub callee_basic_block_count: i64,
    pub callee_conditionally_executed_blocks: i64,
    pub callee_users: i64,
    pub callsite_height: i64,
    pub cost_estimate: i64,
    pub number_constant_params: i64,
    pub edge_count: i64,
    pub node_count: i64,
}

impl FeatureVector {
    pub fn as_array(&self) -> [i64; FEATURE_COUNT] {
        [
            self.caller_basic_block_count,
            self.caller_conditionally_executed_blocks,
            self.caller_users,
            self.callee_basic_block_count,
            self.callee_conditionally_executed_blocks,
            self.callee_users,
            self.callsite_height,
            self.cost_estimate,
            self.number_constant_params,
            self.edge_count,
            self.node_count,
        ]
    }

    pub fn from_array(a: [i64; FEATURE_COUNT]) -> Self {
        FeatureVector {
            caller_basic_block_count: a[0],
            caller_conditionally_executed_blocks: a[1],
            caller_users: a[2],
            callee_basic_block_count: a[3],
            callee_conditionally_executed_blocks: a[4],
            callee_users: a[5],
            callsite_height: a[6],
            cost_estimate: a[7],
            number_constant_params: a[8],
            edge_count: a[9],
            node_count: a[10],
        }
    }
}

// Wire form is the bare 11-integer array in canonical order.
impl Serialize for FeatureVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.as_array().serialize(s)
    }
}

impl<'de> Deserialize<'de> for FeatureVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        <[i64; FEATURE_COUNT]>::deserialize(d).map(FeatureVector::from_array)
    }
}

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("call site `{0}` is dead or unknown")]
    DeadCallSite(CallSiteId),
    #[error("no height recorded for function `{0}`")]
    MissingHeight(FunctionId),
    #[error("cannot compute feature statistics over an empty sample")]
    EmptySample,
}

/// Longest-path heights over the initial call-graph condensation.
///
/// `height(f)` is the number of edges on the longest path from `f`'s SCC to
/// any leaf SCC. Computed once per module and frozen for the episode; call
/// sites then report the height of their callee.
pub fn compute_heights(m: &ModuleGraph) -> HashMap<FunctionId, i64> {
    let cond = m.initial_condensation();
    // SCCs arrive in reverse topological order, so every successor is
    // resolved before its callers.
    let mut scc_height = vec![0i64; cond.scc_count()];
    for scc in 0..cond.scc_count() {
        let succs = cond.out_edges(scc);
        if !succs.is_empty() {
            scc_height[scc] = 1 + succs.iter().map(|&s| scc_height[s]).max().unwrap();
        }
    }
    let mut out = HashMap::new();
    for (scc, members) in cond.sccs().iter().enumerate() {
        for id in members {
            out.insert(id.clone(), scc_height[scc]);
        }
    }
    out
}

/// Reads the 11 features for a live call site from the current module state.
pub fn extract_features(
    m: &ModuleGraph,
    site: &CallSiteId,
    heights: &HashMap<FunctionId, i64>,
) -> Result<FeatureVector, FeatureError> {
    let (caller, cs) = m
        .find_site(site)
        .ok_or_else(|| FeatureError::DeadCallSite(site.clone()))?;
    let callee = m
        .function(&cs.callee)
        .ok_or_else(|| FeatureError::DeadCallSite(site.clone()))?;
    let height = *heights
        .get(&cs.callee)
        .ok_or_else(|| FeatureError::MissingHeight(cs.callee.clone()))?;

    let savings: i64 = cs
        .const_args
        .iter()
        .zip(&callee.param_savings)
        .filter_map(|(&c, &s)| c.then_some(s))
        .sum();

    Ok(FeatureVector {
        caller_basic_block_count: caller.basic_block_count,
        caller_conditionally_executed_blocks: caller.conditional_block_count,
        caller_users: m.user_count(&caller.id),
        callee_basic_block_count: callee.basic_block_count,
        callee_conditionally_executed_blocks: callee.conditional_block_count,
        callee_users: m.user_count(&cs.callee),
        callsite_height: height,
        cost_estimate: callee.size - savings - 1,
        number_constant_params: cs.const_args.iter().filter(|&&c| c).count() as i64,
        edge_count: m.call_site_count() as i64,
        node_count: m.function_count() as i64,
    })
}

/// Per-feature mean and standard deviation over observed step features.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureStats {
    pub mean: [f64; FEATURE_COUNT],
    pub std: [f64; FEATURE_COUNT],
    pub count: u64,
}

impl FeatureStats {
    /// Normalization that leaves inputs untouched: zero mean, unit scale.
    pub fn identity() -> Self {
        FeatureStats { mean: [0.0; FEATURE_COUNT], std: [1.0; FEATURE_COUNT], count: 0 }
    }

    /// Z-normalizes a feature vector, flooring the scale at [`STD_FLOOR`].
    pub fn normalize(&self, f: &FeatureVector) -> [f64; FEATURE_COUNT] {
        let raw = f.as_array();
        let mut out = [0.0; FEATURE_COUNT];
        for i in 0..FEATURE_COUNT {
            out[i] = (raw[i] as f64 - self.mean[i]) / self.std[i].max(STD_FLOOR);
        }
        out
    }
}

/// Population mean/std per feature slot.
///
/// Accumulation is exact integer arithmetic, so the result is bit-identical
/// under any input permutation.
pub fn corpus_stats<'a, I>(vectors: I) -> Result<FeatureStats, FeatureError>
where
    I: IntoIterator<Item = &'a FeatureVector>,
{
    let mut n: u64 = 0;
    let mut sum = [0i128; FEATURE_COUNT];
    let mut sumsq = [0i128; FEATURE_COUNT];
    for v in vectors {
        let a = v.as_array();
        for i in 0..FEATURE_COUNT {
            let x = a[i] as i128;
            sum[i] += x;
            sumsq[i] += x * x;
        }
        n += 1;
    }
    if n == 0 {
        return Err(FeatureError::EmptySample);
    }
    let mut mean = [0.0; FEATURE_COUNT];
    let mut std = [0.0; FEATURE_COUNT];
    for i in 0..FEATURE_COUNT {
        mean[i] = sum[i] as f64 / n as f64;
        let var = (sumsq[i] as f64 / n as f64 - mean[i] * mean[i]).max(0.0);
        std[i] = var.sqrt().max(STD_FLOOR);
    }
    Ok(FeatureStats { mean, std, count: n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{mutually_recursive_module, reference_module};
    use crate::irmodel::{textfmt, FunctionDef, Linkage, ModuleGraph};

    #[test]
    fn heights_follow_longest_condensation_path() {
        let m = reference_module();
        let h = compute_heights(&m);
        assert_eq!(h[&"f_leaf".into()], 0);
        assert_eq!(h[&"f_helper".into()], 1);
        assert_eq!(h[&"f_main".into()], 2);

        let single = ModuleGraph::new(
            "one",
            vec![FunctionDef {
                id: "f".into(),
                linkage: Linkage::External,
                size: 3,
                basic_block_count: 1,
                conditional_block_count: 0,
                param_savings: vec![],
                call_sites: vec![],
            }],
        )
        .unwrap();
        assert_eq!(compute_heights(&single)[&"f".into()], 0);

        let cycle = mutually_recursive_module();
        let h = compute_heights(&cycle);
        assert_eq!(h[&"f_a".into()], 0);
        assert_eq!(h[&"f_b".into()], 0);
    }

    #[test]
    fn reference_module_features_read_off_declared_fields() {
        let m = reference_module();
        let h = compute_heights(&m);
        let c1 = extract_features(&m, &"c1".into(), &h).unwrap();
        assert_eq!(c1.as_array(), [3, 1, 0, 2, 1, 1, 1, 3, 1, 3, 3]);
        let c2 = extract_features(&m, &"c2".into(), &h).unwrap();
        assert_eq!(c2.as_array(), [3, 1, 0, 1, 0, 2, 0, 2, 0, 3, 3]);
    }

    #[test]
    fn dead_site_is_an_error() {
        let m = reference_module();
        let h = compute_heights(&m);
        assert!(matches!(
            extract_features(&m, &"gone".into(), &h),
            Err(FeatureError::DeadCallSite(_))
        ));
    }

    #[test]
    fn features_after_inline_match_fresh_recomputation() {
        let mut m = reference_module();
        let h = compute_heights(&m);
        m.inline(&"c3".into()).unwrap();

        // Rebuild the mutated module from its printed form: user counts and
        // sizes are recomputed from scratch there.
        let reparsed = textfmt::parse_module(&textfmt::print_module(&m)).unwrap();
        let h_fresh = compute_heights(&reparsed);
        for site in ["c1", "c2"] {
            let live = extract_features(&m, &site.into(), &h).unwrap();
            let fresh = extract_features(&reparsed, &site.into(), &h_fresh).unwrap();
            assert_eq!(live, fresh, "site {site}");
        }
    }

    #[test]
    fn stats_floor_identical_inputs_and_average_pairs() {
        let v = FeatureVector::from_array([1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11]);
        let s = corpus_stats([&v, &v, &v]).unwrap();
        assert_eq!(s.count, 3);
        for i in 0..FEATURE_COUNT {
            assert_eq!(s.mean[i], (i as f64) + 1.0);
            assert_eq!(s.std[i], STD_FLOOR);
        }

        let mut b = v.as_array();
        b[7] += 2;
        let w = FeatureVector::from_array(b);
        let s = corpus_stats([&v, &w]).unwrap();
        assert_eq!(s.mean[7], 9.0);
        assert_eq!(s.std[7], 1.0);

        // Order invariance is exact.
        let s_rev = corpus_stats([&w, &v]).unwrap();
        assert_eq!(s, s_rev);

        assert!(matches!(corpus_stats([]), Err(FeatureError::EmptySample)));
    }
}
