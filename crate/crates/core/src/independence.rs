//! d-separation and complete conditional-independence signatures.

use thiserror::Error;

use crate::graph::{Dag, NodeSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IndependenceError {
    #[error("invalid d-separation query: {0}")]
    InvalidArgument(String),
}

fn validate(g: &Dag, i: usize, j: usize, z: NodeSet) -> Result<(), IndependenceError> {
    let n = g.node_count();
    if i >= n || j >= n {
        return Err(IndependenceError::InvalidArgument(format!("node out of range for {n} nodes")));
    }
    if i == j {
        return Err(IndependenceError::InvalidArgument(format!("endpoints coincide ({i})")));
    }
    if z.contains(i) || z.contains(j) {
        return Err(IndependenceError::InvalidArgument("conditioning set contains an endpoint".into()));
    }
    if !z.is_subset(NodeSet::full(n)) {
        return Err(IndependenceError::InvalidArgument("conditioning set out of range".into()));
    }
    Ok(())
}

/// Is `i` d-separated from `j` given `z`?
///
/// Reachability search over (node, direction-of-entry) states: a trail may pass a
/// non-collider only if it is unobserved, and a collider only if it has a descendant
/// (itself included) in `z`.
pub fn d_separated(g: &Dag, i: usize, j: usize, z: NodeSet) -> Result<bool, IndependenceError> {
    validate(g, i, j, z)?;
    Ok(!reachable(g, i, z).contains(j))
}

/// Nodes connected to `source` by an active trail given `z`.
pub fn reachable(g: &Dag, source: usize, z: NodeSet) -> NodeSet {
    // Observed nodes and their ancestors: the colliders that are open.
    let mut opens = z;
    for v in z.iter() {
        opens = opens.union(g.ancestors(v));
    }

    // Bit 0 of the state: entered from a child (moving up); bit 1: entered from a parent.
    let mut up_seen = NodeSet::EMPTY;
    let mut down_seen = NodeSet::EMPTY;
    let mut stack = vec![(source, true)];
    let mut reached = NodeSet::EMPTY;
    while let Some((v, up)) = stack.pop() {
        let seen = if up { &mut up_seen } else { &mut down_seen };
        if seen.contains(v) {
            continue;
        }
        seen.insert(v);
        let observed = z.contains(v);
        if !observed && v != source {
            reached.insert(v);
        }
        if up && !observed {
            stack.extend(g.parents(v).iter().map(|p| (p, true)));
            stack.extend(g.children(v).iter().map(|c| (c, false)));
        } else if !up {
            if !observed {
                stack.extend(g.children(v).iter().map(|c| (c, false)));
            }
            if opens.contains(v) {
                stack.extend(g.parents(v).iter().map(|p| (p, true)));
            }
        }
    }
    reached
}

/// Same question as [`d_separated`], answered by listing every simple path of the
/// skeleton and testing each interior node with the fork/chain/collider rules.
pub fn d_separated_by_paths(g: &Dag, i: usize, j: usize, z: NodeSet) -> Result<bool, IndependenceError> {
    validate(g, i, j, z)?;
    let mut path = vec![i];
    Ok(!any_open_path(g, j, z, &mut path))
}

fn any_open_path(g: &Dag, target: usize, z: NodeSet, path: &mut Vec<usize>) -> bool {
    let last = *path.last().expect("non-empty path");
    if last == target {
        return path_is_open(g, z, path);
    }
    for next in g.neighbors(last).iter() {
        if path.contains(&next) {
            continue;
        }
        path.push(next);
        let open = any_open_path(g, target, z, path);
        path.pop();
        if open {
            return true;
        }
    }
    false
}

fn path_is_open(g: &Dag, z: NodeSet, path: &[usize]) -> bool {
    path.windows(3).all(|w| {
        let (a, v, b) = (w[0], w[1], w[2]);
        if g.has_edge(a, v) && g.has_edge(b, v) {
            z.contains(v) || !g.descendants(v).is_disjoint(z)
        } else {
            !z.contains(v)
        }
    })
}

/// Every conditioning set that d-separates each unordered pair of a graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CiSignature {
    n: usize,
    /// Indexed by [`pair_index`]; each list sorted by [`NodeSet::listing_key`].
    sets: Vec<Vec<NodeSet>>,
}

/// Position of the unordered pair `{i, j}` in lexicographic pair order.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    a * (2 * n - a - 1) / 2 + (b - a - 1)
}

/// All pairs `(i, j)`, `i < j`, lexicographically.
pub fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

impl CiSignature {
    /// Builds a signature from per-pair separating-set lists in [`pairs`] order.
    pub fn from_sets(n: usize, mut sets: Vec<Vec<NodeSet>>) -> Result<Self, IndependenceError> {
        if sets.len() != n * (n.saturating_sub(1)) / 2 {
            return Err(IndependenceError::InvalidArgument("wrong number of pairs".into()));
        }
        for ((i, j), list) in pairs(n).zip(sets.iter_mut()) {
            let allowed = NodeSet::full(n).without(i).without(j);
            if list.iter().any(|z| !z.is_subset(allowed)) {
                return Err(IndependenceError::InvalidArgument(format!("bad separating set for pair ({i},{j})")));
            }
            list.sort_by_key(|z| z.listing_key());
            list.dedup();
        }
        Ok(CiSignature { n, sets })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn separating_sets(&self, i: usize, j: usize) -> &[NodeSet] {
        &self.sets[pair_index(self.n, i, j)]
    }

    /// `true` when no conditioning set separates the pair.
    pub fn correlated(&self, i: usize, j: usize) -> bool {
        self.separating_sets(i, j).is_empty()
    }

    pub fn independent(&self, i: usize, j: usize, z: NodeSet) -> bool {
        self.separating_sets(i, j).contains(&z)
    }

    /// Total number of (pair, separating set) statements.
    pub fn statement_count(&self) -> usize {
        self.sets.iter().map(|s| s.len().max(1)).sum()
    }

    /// The signature of the graph relabeled by `perm` (node `i` becomes `perm[i]`).
    pub fn permuted(&self, perm: &[usize]) -> CiSignature {
        let mut sets = vec![Vec::new(); self.sets.len()];
        for ((i, j), list) in pairs(self.n).zip(&self.sets) {
            sets[pair_index(self.n, perm[i], perm[j])] =
                list.iter().map(|z| z.iter().map(|v| perm[v]).collect()).collect();
        }
        CiSignature::from_sets(self.n, sets).expect("permutation preserves validity")
    }
}

/// Complete conditional-independence relation map of `g`.
pub fn ci_signature(g: &Dag) -> CiSignature {
    let n = g.node_count();
    let sets = pairs(n)
        .map(|(i, j)| {
            let mut list: Vec<NodeSet> = NodeSet::full(n)
                .without(i)
                .without(j)
                .subsets()
                .filter(|&z| d_separated(g, i, j, z).expect("validated query"))
                .collect();
            list.sort_by_key(|z| z.listing_key());
            list
        })
        .collect();
    CiSignature { n, sets }
}

/// Local Markov property self-test: each node is d-separated from every non-descendant
/// outside its parents, given its parents.
pub fn markov_check(g: &Dag) -> bool {
    (0..g.node_count()).all(|v| {
        let pa = g.parents(v);
        let others = NodeSet::full(g.node_count()).difference(g.descendants(v)).difference(pa).without(v);
        others.iter().all(|u| d_separated(g, v, u, pa).expect("validated query"))
    })
}
