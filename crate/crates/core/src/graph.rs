//! Labeled DAGs on at most [`MAX_NODES`] variables, stored as one bitmask row per node.
//!
//! Besides the [`Dag`] type this module owns DAG enumeration up to isomorphism and the
//! permutation-minimizing [`canonical_key`], which also works for mixed graphs through the
//! [`ArcMatrix`] view.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

/// Hard ceiling on the number of variables a graph may carry.
pub const MAX_NODES: usize = 8;

/// Largest `n` accepted by [`enumerate_dags`]; 2^28 masks at n = 8 is out of reach.
pub const MAX_ENUMERATION_NODES: usize = 7;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("node count {0} outside 1..={max}", max = MAX_NODES)]
    NodeCount(usize),
    #[error("enumeration supports 1..={max} nodes, got {0}", max = MAX_ENUMERATION_NODES)]
    EnumerationRange(usize),
    #[error("node index {index} out of range for a {n}-node graph")]
    NodeIndex { index: usize, n: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("edge set contains a directed cycle")]
    Cycle,
    #[error("expected {expected} node names, got {got}")]
    NameCount { expected: usize, got: usize },
    #[error("duplicate or empty node name {0:?}")]
    BadName(String),
    #[error("cannot parse edge list: {0}")]
    Parse(String),
}

/// A set of node indices below [`MAX_NODES`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct NodeSet(u8);

impl NodeSet {
    pub const EMPTY: NodeSet = NodeSet(0);

    pub const fn from_bits(bits: u8) -> Self {
        NodeSet(bits)
    }

    pub const fn bits(self) -> u8 {
        self.0
    }

    /// `{0, 1, .., n-1}`.
    pub fn full(n: usize) -> Self {
        debug_assert!(n <= MAX_NODES);
        NodeSet(((1u16 << n) - 1) as u8)
    }

    pub fn singleton(i: usize) -> Self {
        NodeSet(1 << i)
    }

    pub fn contains(self, i: usize) -> bool {
        i < MAX_NODES && self.0 & (1 << i) != 0
    }

    pub fn insert(&mut self, i: usize) {
        self.0 |= 1 << i;
    }

    pub fn remove(&mut self, i: usize) {
        self.0 &= !(1 << i);
    }

    pub fn with(self, i: usize) -> Self {
        NodeSet(self.0 | 1 << i)
    }

    pub fn without(self, i: usize) -> Self {
        NodeSet(self.0 & !(1 << i))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: Self) -> Self {
        NodeSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        NodeSet(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        NodeSet(self.0 & !other.0)
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..MAX_NODES).filter(move |&i| bits & (1 << i) != 0)
    }

    /// Every subset of `self`, in ascending bit order (the empty set first).
    pub fn subsets(self) -> impl Iterator<Item = NodeSet> {
        let mask = self.0;
        let mut next = Some(0u8);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == mask { None } else { Some((cur.wrapping_sub(mask)) & mask) };
            Some(NodeSet(cur))
        })
    }

    /// Subsets of `self` with exactly `k` members, in ascending bit order.
    pub fn subsets_of_size(self, k: usize) -> impl Iterator<Item = NodeSet> {
        self.subsets().filter(move |s| s.len() == k)
    }

    /// Ordering used wherever conditioning sets are listed: by size, then by the sorted
    /// member list.
    pub fn listing_key(self) -> (usize, Vec<usize>) {
        (self.len(), self.iter().collect())
    }
}

impl FromIterator<usize> for NodeSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = NodeSet::EMPTY;
        for i in iter {
            s.insert(i);
        }
        s
    }
}

impl fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Default variable labels `A, B, C, ...`.
pub fn default_names(n: usize) -> Vec<String> {
    (0..n).map(|i| ((b'A' + i as u8) as char).to_string()).collect()
}

fn shared_default_names(n: usize) -> Arc<[String]> {
    static CACHE: std::sync::OnceLock<Vec<Arc<[String]>>> = std::sync::OnceLock::new();
    let cache = CACHE.get_or_init(|| (0..=MAX_NODES).map(|n| default_names(n).into()).collect());
    Arc::clone(&cache[n])
}

/// Square boolean adjacency matrix view shared by DAGs and mixed graphs.
///
/// Row `i` holds the targets of arcs leaving `i`. An undirected edge is encoded as the
/// pair of opposite arcs, which never occurs in a DAG.
pub trait ArcMatrix {
    fn order(&self) -> usize;
    fn arc_row(&self, i: usize) -> u8;
}

/// Labeled directed acyclic graph.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dag {
    n: usize,
    children: [u8; MAX_NODES],
    names: Arc<[String]>,
}

/// Direct and transitive relatives of one node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Kin {
    pub parents: NodeSet,
    pub children: NodeSet,
    pub ancestors: NodeSet,
    pub descendants: NodeSet,
}

impl Dag {
    pub fn empty(n: usize) -> Result<Self, GraphError> {
        if n == 0 || n > MAX_NODES {
            return Err(GraphError::NodeCount(n));
        }
        Ok(Dag { n, children: [0; MAX_NODES], names: shared_default_names(n) })
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Dag::empty(n)?;
        for &(i, j) in edges {
            for index in [i, j] {
                if index >= n {
                    return Err(GraphError::NodeIndex { index, n });
                }
            }
            if i == j {
                return Err(GraphError::SelfLoop(i));
            }
            g.children[i] |= 1 << j;
        }
        if g.topological_order().is_none() {
            return Err(GraphError::Cycle);
        }
        Ok(g)
    }

    /// Builds a DAG from child bitmask rows, validating acyclicity.
    pub fn from_rows(n: usize, rows: &[u8]) -> Result<Self, GraphError> {
        let mut g = Dag::empty(n)?;
        for (i, &row) in rows.iter().enumerate().take(n) {
            if row & !NodeSet::full(n).bits() != 0 {
                return Err(GraphError::NodeIndex { index: 7 - row.leading_zeros() as usize, n });
            }
            if row & (1 << i) != 0 {
                return Err(GraphError::SelfLoop(i));
            }
            g.children[i] = row;
        }
        if g.topological_order().is_none() {
            return Err(GraphError::Cycle);
        }
        Ok(g)
    }

    /// Upper-triangular DAG whose edge `(i, j)`, `i < j`, is present iff the bit for that
    /// pair is set; pairs are numbered `(0,1), (0,2), .., (1,2), ..` from bit 0.
    pub fn from_upper_mask(n: usize, mask: u32) -> Result<Self, GraphError> {
        let mut g = Dag::empty(n)?;
        let mut bit = 0;
        for i in 0..n {
            for j in i + 1..n {
                if mask & (1 << bit) != 0 {
                    g.children[i] |= 1 << j;
                }
                bit += 1;
            }
        }
        Ok(g)
    }

    /// Replaces the variable labels.
    pub fn with_names<S: AsRef<str>>(mut self, names: &[S]) -> Result<Self, GraphError> {
        if names.len() != self.n {
            return Err(GraphError::NameCount { expected: self.n, got: names.len() });
        }
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        for (k, name) in names.iter().enumerate() {
            if name.is_empty() || names[..k].contains(name) {
                return Err(GraphError::BadName(name.clone()));
            }
        }
        self.names = names.into();
        Ok(self)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn rows(&self) -> &[u8] {
        &self.children[..self.n]
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        from < self.n && to < self.n && self.children[from] & (1 << to) != 0
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.has_edge(a, b) || self.has_edge(b, a)
    }

    pub fn children(&self, i: usize) -> NodeSet {
        NodeSet(self.children[i])
    }

    pub fn parents(&self, i: usize) -> NodeSet {
        (0..self.n).filter(|&p| self.children[p] & (1 << i) != 0).collect()
    }

    pub fn neighbors(&self, i: usize) -> NodeSet {
        self.children(i).union(self.parents(i))
    }

    pub fn ancestors(&self, i: usize) -> NodeSet {
        self.closure(i, |g, v| g.parents(v))
    }

    pub fn descendants(&self, i: usize) -> NodeSet {
        self.closure(i, |g, v| g.children(v))
    }

    fn closure(&self, start: usize, step: impl Fn(&Self, usize) -> NodeSet) -> NodeSet {
        let mut seen = NodeSet::EMPTY;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for u in step(self, v).iter() {
                if !seen.contains(u) {
                    seen.insert(u);
                    stack.push(u);
                }
            }
        }
        seen
    }

    pub fn kin(&self, node: usize) -> Result<Kin, GraphError> {
        if node >= self.n {
            return Err(GraphError::NodeIndex { index: node, n: self.n });
        }
        Ok(Kin {
            parents: self.parents(node),
            children: self.children(node),
            ancestors: self.ancestors(node),
            descendants: self.descendants(node),
        })
    }

    pub fn edge_count(&self) -> usize {
        self.rows().iter().map(|r| r.count_ones() as usize).sum()
    }

    /// Edges as `(from, to)` in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| self.children(i).iter().map(move |j| (i, j)))
    }

    /// Kahn order, smallest index first; `None` if the rows contain a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let mut indeg: Vec<usize> = (0..self.n).map(|i| self.parents(i).len()).collect();
        let mut order = Vec::with_capacity(self.n);
        let mut placed = NodeSet::EMPTY;
        while order.len() < self.n {
            let next = (0..self.n).find(|&v| !placed.contains(v) && indeg[v] == 0)?;
            placed.insert(next);
            order.push(next);
            for c in self.children(next).iter() {
                indeg[c] -= 1;
            }
        }
        Some(order)
    }

    pub fn is_upper_triangular(&self) -> bool {
        self.edges().all(|(i, j)| i < j)
    }

    /// Symmetric adjacency rows.
    pub fn skeleton(&self) -> [u8; MAX_NODES] {
        let mut sk = [0u8; MAX_NODES];
        for (i, j) in self.edges() {
            sk[i] |= 1 << j;
            sk[j] |= 1 << i;
        }
        sk
    }

    /// Unshielded colliders `(a, c, b)` with `a < b`, `a -> c <- b` and `a`, `b` nonadjacent.
    pub fn v_structures(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for c in 0..self.n {
            let pa: Vec<usize> = self.parents(c).iter().collect();
            for (k, &a) in pa.iter().enumerate() {
                for &b in &pa[k + 1..] {
                    if !self.adjacent(a, b) {
                        out.push((a, c, b));
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Relabels node `i` as `perm[i]`; names travel with their nodes.
    pub fn permuted(&self, perm: &[usize]) -> Dag {
        assert_eq!(perm.len(), self.n, "permutation length");
        let mut children = [0u8; MAX_NODES];
        let mut names = vec![String::new(); self.n];
        for i in 0..self.n {
            for j in self.children(i).iter() {
                children[perm[i]] |= 1 << perm[j];
            }
            names[perm[i]] = self.names[i].clone();
        }
        Dag { n: self.n, children, names: names.into() }
    }

    /// Debug export `A->B;B->C`; an edgeless graph exports as the empty string.
    pub fn to_edge_list(&self) -> String {
        self.edges().map(|(i, j)| format!("{}->{}", self.names[i], self.names[j])).collect::<Vec<_>>().join(";")
    }

    /// Parses the [`to_edge_list`](Self::to_edge_list) format over the given names.
    pub fn parse_edge_list<S: AsRef<str>>(names: &[S], text: &str) -> Result<Self, GraphError> {
        let n = names.len();
        let idx = |name: &str| {
            names
                .iter()
                .position(|s| s.as_ref() == name)
                .ok_or_else(|| GraphError::Parse(format!("unknown node {name:?}")))
        };
        let mut edges = Vec::new();
        for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (a, b) = part.split_once("->").ok_or_else(|| GraphError::Parse(format!("missing '->' in {part:?}")))?;
            edges.push((idx(a.trim())?, idx(b.trim())?));
        }
        Dag::from_edges(n, &edges)?.with_names(names)
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph {\n");
        for name in self.names.iter() {
            out.push_str(&format!("  \"{name}\";\n"));
        }
        for (i, j) in self.edges() {
            out.push_str(&format!("  \"{}\" -> \"{}\";\n", self.names[i], self.names[j]));
        }
        out.push('}');
        out.push('\n');
        out
    }
}

impl fmt::Debug for Dag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dag({}: {})", self.n, self.to_edge_list())
    }
}

impl ArcMatrix for Dag {
    fn order(&self) -> usize {
        self.n
    }

    fn arc_row(&self, i: usize) -> u8 {
        self.children[i]
    }
}

/// Permutation-invariant identifier of a graph: the node count followed by the minimal
/// row-major adjacency bit string over all relabelings.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey(Vec<u8>);

impl CanonicalKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.0)
    }

    pub fn from_hex(s: &str) -> Option<Self> {
        hex::decode(s).ok().filter(|b| !b.is_empty()).map(CanonicalKey)
    }

    pub fn node_count(&self) -> usize {
        self.0[0] as usize
    }

    /// Arc rows of the canonical relabeling this key encodes.
    pub fn arc_rows(&self) -> Vec<u8> {
        let n = self.node_count();
        let code = self.code();
        let total = n * n;
        (0..n)
            .map(|i| {
                (0..n).fold(0u8, |row, j| {
                    let bit = total - 1 - (i * n + j);
                    if code >> bit & 1 == 1 {
                        row | 1 << j
                    } else {
                        row
                    }
                })
            })
            .collect()
    }

    fn code(&self) -> u64 {
        let n = self.node_count();
        let body = &self.0[1..];
        let mut code = 0u64;
        for &b in body {
            code = code << 8 | b as u64;
        }
        let pad = body.len() * 8 - n * n;
        code >> pad
    }

    fn encode(n: usize, code: u64) -> Self {
        let bits = n * n;
        let nbytes = bits.div_ceil(8);
        let shifted = code << (nbytes * 8 - bits);
        let mut out = Vec::with_capacity(1 + nbytes);
        out.push(n as u8);
        for k in (0..nbytes).rev() {
            out.push((shifted >> (8 * k)) as u8);
        }
        CanonicalKey(out)
    }
}

impl fmt::Debug for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CanonicalKey({})", self.to_hex())
    }
}

impl fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// Canonical key of a directed or mixed graph.
///
/// Nodes are first sorted by the isomorphism invariant (undirected degree, out-arcs,
/// in-arcs); only permutations respecting that order are scanned, and the minimal
/// row-major bit string among them is kept.
pub fn canonical_key<G: ArcMatrix + ?Sized>(g: &G) -> CanonicalKey {
    let n = g.order();
    let rows: Vec<u8> = (0..n).map(|i| g.arc_row(i)).collect();
    let mut inv: Vec<(u32, u32, u32, usize)> = (0..n)
        .map(|i| {
            let out = rows[i];
            let inn: u8 = (0..n).filter(|&k| rows[k] & (1 << i) != 0).fold(0, |m, k| m | 1 << k);
            let und = out & inn;
            (und.count_ones(), (out & !und).count_ones(), (inn & !und).count_ones(), i)
        })
        .collect();
    inv.sort_unstable();

    // Blocks of nodes sharing an invariant; permutations only shuffle within blocks.
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for (k, item) in inv.iter().enumerate() {
        if k > 0 && inv[k - 1].0 == item.0 && inv[k - 1].1 == item.1 && inv[k - 1].2 == item.2 {
            blocks.last_mut().expect("block").push(item.3);
        } else {
            blocks.push(vec![item.3]);
        }
    }

    let mut order = Vec::with_capacity(n);
    let mut best = u64::MAX;
    search_orders(&rows, &mut blocks, 0, &mut order, &mut best);
    CanonicalKey::encode(n, best)
}

fn search_orders(rows: &[u8], blocks: &mut [Vec<usize>], block: usize, order: &mut Vec<usize>, best: &mut u64) {
    if block == blocks.len() {
        let code = code_of(rows, order);
        if code < *best {
            *best = code;
        }
        return;
    }
    let len = blocks[block].len();
    for k in 0..len {
        let v = blocks[block][k];
        if order.contains(&v) {
            continue;
        }
        order.push(v);
        let placed_all = blocks[block].iter().all(|u| order.contains(u));
        search_orders(rows, blocks, if placed_all { block + 1 } else { block }, order, best);
        order.pop();
    }
}

fn code_of(rows: &[u8], order: &[usize]) -> u64 {
    let mut code = 0u64;
    for &a in order {
        let row = rows[a];
        for &b in order {
            code = code << 1 | u64::from(row >> b & 1);
        }
    }
    code
}

/// One upper-triangular representative per isomorphism class of DAGs on `n` unlabeled
/// nodes, sorted by canonical key. The representative of a class is its smallest mask.
pub fn enumerate_dags(n: usize) -> Result<Vec<Dag>, GraphError> {
    Ok(enumerate_keyed(n)?.into_iter().map(|(_, g)| g).collect())
}

/// [`enumerate_dags`] together with each representative's canonical key.
pub fn enumerate_keyed(n: usize) -> Result<Vec<(CanonicalKey, Dag)>, GraphError> {
    if n == 0 || n > MAX_ENUMERATION_NODES {
        return Err(GraphError::EnumerationRange(n));
    }
    let pairs = n * (n - 1) / 2;
    let classes: BTreeMap<CanonicalKey, u32> = (0..1u32 << pairs)
        .into_par_iter()
        .map(|mask| {
            let g = Dag::from_upper_mask(n, mask).expect("valid node count");
            (canonical_key(&g), mask)
        })
        .fold(BTreeMap::new, |mut acc: BTreeMap<CanonicalKey, u32>, (key, mask)| {
            acc.entry(key).and_modify(|m| *m = (*m).min(mask)).or_insert(mask);
            acc
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (key, mask) in b {
                a.entry(key).and_modify(|m| *m = (*m).min(mask)).or_insert(mask);
            }
            a
        });
    Ok(classes.into_iter().map(|(key, mask)| (key, Dag::from_upper_mask(n, mask).expect("valid node count"))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> Dag {
        Dag::from_edges(3, &[(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn small_enumeration_counts() {
        assert_eq!(enumerate_dags(1).unwrap().len(), 1);
        assert_eq!(enumerate_dags(2).unwrap().len(), 2);
        assert_eq!(enumerate_dags(3).unwrap().len(), 6);
        assert_eq!(enumerate_dags(4).unwrap().len(), 31);
    }

    #[test]
    fn enumeration_range_errors() {
        assert_eq!(enumerate_dags(0), Err(GraphError::EnumerationRange(0)));
        assert_eq!(enumerate_dags(9), Err(GraphError::EnumerationRange(9)));
    }

    #[test]
    fn representatives_are_upper_triangular_and_sorted() {
        let keyed = enumerate_keyed(4).unwrap();
        assert!(keyed.iter().all(|(_, g)| g.is_upper_triangular()));
        assert!(keyed.windows(2).all(|w| w[0].0 < w[1].0));
        for (k, g) in &keyed {
            assert_eq!(&canonical_key(g), k);
        }
    }

    #[test]
    fn empty_graph_key_is_permutation_invariant() {
        let g = Dag::empty(3).unwrap();
        let key = canonical_key(&g);
        for perm in [[0, 1, 2], [2, 0, 1], [1, 2, 0], [2, 1, 0]] {
            assert_eq!(canonical_key(&g.permuted(&perm)), key);
        }
    }

    #[test]
    fn chain_reversal_matches_fork_differs() {
        let reversed = Dag::from_edges(3, &[(2, 1), (1, 0)]).unwrap();
        let fork = Dag::from_edges(3, &[(0, 1), (0, 2)]).unwrap();
        assert_eq!(canonical_key(&chain()), canonical_key(&reversed));
        assert_ne!(canonical_key(&chain()), canonical_key(&fork));
    }

    #[test]
    fn key_roundtrips_through_hex_and_rows() {
        let g = Dag::from_edges(4, &[(0, 3), (1, 3), (2, 0)]).unwrap();
        let key = canonical_key(&g);
        assert_eq!(CanonicalKey::from_hex(&key.to_hex()), Some(key.clone()));
        let rows = key.arc_rows();
        let rebuilt = Dag::from_rows(4, &rows).unwrap();
        assert_eq!(canonical_key(&rebuilt), key);
    }

    #[test]
    fn kin_sets() {
        let k = chain().kin(2).unwrap();
        assert_eq!(k.parents, NodeSet::singleton(1));
        assert_eq!(k.ancestors, [0, 1].into_iter().collect());
        assert!(k.children.is_empty() && k.descendants.is_empty());

        let e = Dag::empty(3).unwrap().kin(1).unwrap();
        assert!(e.parents.is_empty() && e.children.is_empty());
        assert!(e.ancestors.is_empty() && e.descendants.is_empty());

        let collider = Dag::from_edges(3, &[(0, 2), (1, 2)]).unwrap();
        let c = collider.kin(2).unwrap();
        assert_eq!(c.parents, [0, 1].into_iter().collect());
        assert!(c.descendants.is_empty());

        assert_eq!(chain().kin(3), Err(GraphError::NodeIndex { index: 3, n: 3 }));
    }

    #[test]
    fn rejects_cycles_and_loops() {
        assert_eq!(Dag::from_edges(3, &[(0, 1), (1, 2), (2, 0)]), Err(GraphError::Cycle));
        assert_eq!(Dag::from_edges(2, &[(1, 1)]), Err(GraphError::SelfLoop(1)));
        assert!(matches!(Dag::from_edges(2, &[(0, 2)]), Err(GraphError::NodeIndex { .. })));
        assert!(Dag::empty(9).is_err());
    }

    #[test]
    fn edge_list_and_dot_export() {
        assert_eq!(chain().to_edge_list(), "A->B;B->C");
        let back = Dag::parse_edge_list(&["A", "B", "C"], "A->B;B->C").unwrap();
        assert_eq!(back, chain());
        let dot = chain().to_dot();
        assert!(dot.starts_with("digraph {") && dot.contains("\"A\" -> \"B\";"));
    }

    #[test]
    fn names_must_be_distinct() {
        assert!(matches!(chain().with_names(&["X", "X", "Y"]), Err(GraphError::BadName(_))));
        assert!(matches!(chain().with_names(&["X"]), Err(GraphError::NameCount { .. })));
        let named = chain().with_names(&["X", "Y", "Z"]).unwrap();
        assert_eq!(named.to_edge_list(), "X->Y;Y->Z");
    }

    #[test]
    fn subset_iteration() {
        let s: NodeSet = [1, 3, 4].into_iter().collect();
        let all: Vec<NodeSet> = s.subsets().collect();
        assert_eq!(all.len(), 8);
        assert!(all.iter().all(|x| x.is_subset(s)));
        assert_eq!(s.subsets_of_size(2).count(), 3);
        assert_eq!(NodeSet::EMPTY.subsets().count(), 1);
    }

    #[test]
    fn v_structures_of_collider_and_shielded_collider() {
        let collider = Dag::from_edges(3, &[(0, 2), (1, 2)]).unwrap();
        assert_eq!(collider.v_structures(), vec![(0, 2, 1)]);
        let shielded = Dag::from_edges(3, &[(0, 2), (1, 2), (0, 1)]).unwrap();
        assert!(shielded.v_structures().is_empty());
    }
}
