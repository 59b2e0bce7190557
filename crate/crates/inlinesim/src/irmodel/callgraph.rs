//! Frozen call-graph condensation: SCCs in bottom-up order.

use std::collections::{BTreeSet, HashMap};

use indexmap::IndexMap;
use petgraph::graph::{DiGraph, NodeIndex};

use super::{FunctionDef, FunctionId};

/// The strongly connected components of a call graph, condensed into a DAG.
///
/// SCCs are stored in reverse topological order with respect to caller→callee
/// edges (callees first), which is exactly the bottom-up visitation order the
/// inliner uses. Within an SCC, members are sorted by function id.
#[derive(Clone, Debug)]
pub struct Condensation {
    sccs: Vec<Vec<FunctionId>>,
    index: HashMap<FunctionId, usize>,
    /// Out-edges between distinct SCCs, deduplicated, indexed like `sccs`.
    edges: Vec<Vec<usize>>,
}

impl Condensation {
    pub(crate) fn build(map: &IndexMap<FunctionId, FunctionDef>) -> Self {
        let mut graph: DiGraph<(), ()> = DiGraph::with_capacity(map.len(), 0);
        let mut nodes: HashMap<&FunctionId, NodeIndex> = HashMap::with_capacity(map.len());
        for id in map.keys() {
            nodes.insert(id, graph.add_node(()));
        }
        for f in map.values() {
            for cs in &f.call_sites {
                if let Some(&to) = nodes.get(&cs.callee) {
                    graph.add_edge(nodes[&f.id], to, ());
                }
            }
        }

        // tarjan_scc emits SCCs in reverse topological order of the
        // condensation: sinks (leaf callees) first.
        let raw = petgraph::algo::tarjan_scc(&graph);
        let by_node: HashMap<NodeIndex, usize> = raw
            .iter()
            .enumerate()
            .flat_map(|(i, scc)| scc.iter().map(move |&n| (n, i)))
            .collect();

        let ids: Vec<&FunctionId> = map.keys().collect();
        let mut sccs: Vec<Vec<FunctionId>> = raw
            .iter()
            .map(|scc| {
                let mut members: Vec<FunctionId> =
                    scc.iter().map(|&n| ids[n.index()].clone()).collect();
                members.sort();
                members
            })
            .collect();

        let mut index = HashMap::with_capacity(map.len());
        for (i, scc) in sccs.iter().enumerate() {
            for id in scc {
                index.insert(id.clone(), i);
            }
        }

        let mut edge_sets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); sccs.len()];
        for f in map.values() {
            let from = index[&f.id];
            for cs in &f.call_sites {
                if let Some(&to) = index.get(&cs.callee) {
                    if to != from {
                        edge_sets[from].insert(to);
                    }
                }
            }
        }
        let edges = edge_sets
            .iter_mut()
            .map(|s| std::mem::take(s).into_iter().collect())
            .collect();

        Condensation { sccs, index, edges }
    }

    pub fn scc_count(&self) -> usize {
        self.sccs.len()
    }

    /// SCC index of a function present at module construction.
    pub fn scc_of(&self, id: &FunctionId) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// SCC members (sorted by id), SCCs in reverse topological order.
    pub fn sccs(&self) -> &[Vec<FunctionId>] {
        &self.sccs
    }

    /// Successor SCCs of `scc` in the condensation DAG.
    pub fn out_edges(&self, scc: usize) -> &[usize] {
        &self.edges[scc]
    }
}
