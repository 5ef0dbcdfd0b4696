//! PC structure search against a perfect conditional-independence oracle.

use thiserror::Error;

use crate::equivalence::{meek_closure, Cpdag, MeekRules};
use crate::graph::{NodeSet, MAX_NODES};
use crate::independence::{pair_index, pairs, CiSignature};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiscoveryError {
    #[error("oracle is not faithful to any DAG: {0}")]
    FaithfulnessViolation(String),
    #[error("oracle covers {oracle} nodes, search asked for {requested}")]
    NodeCount { oracle: usize, requested: usize },
}

/// Answers "is `i` independent of `j` given `z`".
pub trait IndependenceOracle {
    fn node_count(&self) -> usize;
    fn independent(&self, i: usize, j: usize, z: NodeSet) -> bool;
}

impl IndependenceOracle for CiSignature {
    fn node_count(&self) -> usize {
        CiSignature::node_count(self)
    }

    fn independent(&self, i: usize, j: usize, z: NodeSet) -> bool {
        CiSignature::independent(self, i, j, z)
    }
}

/// Oracle backed by a closure, used to feed hand-built (possibly unfaithful) relations.
pub struct FnOracle<F> {
    n: usize,
    f: F,
}

impl<F: Fn(usize, usize, NodeSet) -> bool> FnOracle<F> {
    /// The query closure is always called with `i < j`.
    pub fn new(n: usize, f: F) -> Self {
        FnOracle { n, f }
    }
}

impl<F: Fn(usize, usize, NodeSet) -> bool> IndependenceOracle for FnOracle<F> {
    fn node_count(&self) -> usize {
        self.n
    }

    fn independent(&self, i: usize, j: usize, z: NodeSet) -> bool {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        (self.f)(a, b, z)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PcOptions {
    pub rules: MeekRules,
}

/// PC search result with its intermediate skeleton state.
#[derive(Debug, Clone)]
pub struct PcOutcome {
    pub cpdag: Cpdag,
    /// Separating set recorded for each removed pair, in pair order.
    pub sepsets: Vec<Option<NodeSet>>,
}

pub fn pc<O: IndependenceOracle + ?Sized>(oracle: &O, n: usize) -> Result<Cpdag, DiscoveryError> {
    pc_with(oracle, n, PcOptions::default()).map(|o| o.cpdag)
}

/// Skeleton by edge removal, v-structure orientation from recorded separating sets,
/// then Meek closure with `options.rules`.
pub fn pc_with<O: IndependenceOracle + ?Sized>(
    oracle: &O,
    n: usize,
    options: PcOptions,
) -> Result<PcOutcome, DiscoveryError> {
    if oracle.node_count() != n || n > MAX_NODES {
        return Err(DiscoveryError::NodeCount { oracle: oracle.node_count(), requested: n });
    }
    let mut graph = Cpdag::complete(n);
    let mut sepsets = vec![None; n * n.saturating_sub(1) / 2];

    // Conditioning candidates come from every other node, smallest sets first.
    for (i, j) in pairs(n) {
        let rest = NodeSet::full(n).without(i).without(j);
        let found = (0..=rest.len()).find_map(|k| {
            let mut sets: Vec<NodeSet> = rest.subsets_of_size(k).collect();
            sets.sort_by_key(|z| z.listing_key());
            sets.into_iter().find(|&z| oracle.independent(i, j, z))
        });
        if let Some(z) = found {
            graph.remove_edge(i, j);
            sepsets[pair_index(n, i, j)] = Some(z);
        }
    }

    // Unshielded triples i - k - j whose separating set omits k become colliders.
    let mut arrows: Vec<(usize, usize)> = Vec::new();
    for (i, j) in pairs(n) {
        let Some(sep) = sepsets[pair_index(n, i, j)] else { continue };
        for k in 0..n {
            if k != i && k != j && graph.adjacent(i, k) && graph.adjacent(j, k) && !sep.contains(k) {
                arrows.push((i, k));
                arrows.push((j, k));
            }
        }
    }
    for &(a, b) in &arrows {
        if arrows.contains(&(b, a)) {
            let names = crate::graph::default_names(n);
            return Err(DiscoveryError::FaithfulnessViolation(format!(
                "edge {}-{} oriented both ways",
                names[a], names[b]
            )));
        }
    }
    for (a, b) in arrows {
        if graph.has_undirected(a, b) {
            graph.orient(a, b);
        }
    }

    meek_closure(&mut graph, options.rules);
    Ok(PcOutcome { cpdag: graph, sepsets })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equivalence::cpdag_of;
    use crate::graph::Dag;
    use crate::independence::ci_signature;

    #[test]
    fn chain_gives_undirected_chain() {
        let chain = Dag::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let got = pc(&ci_signature(&chain), 3).unwrap();
        assert_eq!(got, cpdag_of(&chain));
        assert!(got.directed_edges().is_empty());
    }

    #[test]
    fn collider_is_oriented() {
        let collider = Dag::from_edges(3, &[(0, 2), (1, 2)]).unwrap();
        let got = pc(&ci_signature(&collider), 3).unwrap();
        assert_eq!(got.directed_edges(), vec![(0, 2), (1, 2)]);
    }

    #[test]
    fn no_independencies_give_complete_undirected_graph() {
        let oracle = FnOracle::new(4, |_, _, _| false);
        let got = pc(&oracle, 4).unwrap();
        assert_eq!(got, Cpdag::complete(4));
    }

    #[test]
    fn contradictory_orientations_are_reported() {
        // 4-cycle skeleton where both diagonals are marginally independent.
        let oracle = FnOracle::new(4, |i, j, z| z.is_empty() && ((i, j) == (0, 2) || (i, j) == (1, 3)));
        assert!(matches!(pc(&oracle, 4), Err(DiscoveryError::FaithfulnessViolation(_))));
    }

    #[test]
    fn node_count_mismatch() {
        let sig = ci_signature(&Dag::empty(3).unwrap());
        assert!(matches!(pc(&sig, 4), Err(DiscoveryError::NodeCount { .. })));
    }

    #[test]
    fn sepsets_are_minimal_first_found() {
        let chain = Dag::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let out = pc_with(&ci_signature(&chain), 3, PcOptions::default()).unwrap();
        assert_eq!(out.sepsets, vec![None, Some(NodeSet::singleton(1)), None]);
    }
}
