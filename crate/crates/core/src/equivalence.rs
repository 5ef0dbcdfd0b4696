//! CPDAGs, Meek orientation closure, and Markov equivalence classes.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{canonical_key, ArcMatrix, CanonicalKey, Dag, NodeSet, MAX_NODES};
use crate::independence::{ci_signature, CiSignature};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EquivalenceError {
    #[error("partially directed graph has no consistent DAG extension")]
    NoExtension,
    #[error("malformed partially directed graph: {0}")]
    Malformed(String),
}

/// Partially directed graph; the CPDAG of a Markov equivalence class when produced by
/// [`cpdag_of`] or the PC search.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Cpdag {
    n: usize,
    directed: [u8; MAX_NODES],
    undirected: [u8; MAX_NODES],
}

impl Cpdag {
    /// Graph with no edges.
    pub fn empty(n: usize) -> Self {
        assert!(n <= MAX_NODES, "node count");
        Cpdag { n, directed: [0; MAX_NODES], undirected: [0; MAX_NODES] }
    }

    /// Complete undirected graph.
    pub fn complete(n: usize) -> Self {
        let mut c = Cpdag::empty(n);
        for i in 0..n {
            c.undirected[i] = NodeSet::full(n).without(i).bits();
        }
        c
    }

    pub fn from_edges(
        n: usize,
        directed: &[(usize, usize)],
        undirected: &[(usize, usize)],
    ) -> Result<Self, EquivalenceError> {
        if n > MAX_NODES {
            return Err(EquivalenceError::Malformed(format!("{n} nodes")));
        }
        let mut c = Cpdag::empty(n);
        for &(a, b) in directed.iter().chain(undirected) {
            if a >= n || b >= n || a == b {
                return Err(EquivalenceError::Malformed(format!("edge ({a},{b})")));
            }
            if c.adjacent(a, b) {
                return Err(EquivalenceError::Malformed(format!("duplicate edge ({a},{b})")));
            }
            if directed.contains(&(a, b)) {
                c.directed[a] |= 1 << b;
            } else {
                c.add_undirected(a, b);
            }
        }
        Ok(c)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn has_directed(&self, a: usize, b: usize) -> bool {
        self.directed[a] & (1 << b) != 0
    }

    pub fn has_undirected(&self, a: usize, b: usize) -> bool {
        self.undirected[a] & (1 << b) != 0
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.has_directed(a, b) || self.has_directed(b, a) || self.has_undirected(a, b)
    }

    pub fn directed_edges(&self) -> Vec<(usize, usize)> {
        (0..self.n).flat_map(|a| NodeSet::from_bits(self.directed[a]).iter().map(move |b| (a, b))).collect()
    }

    /// Undirected edges as `(a, b)` with `a < b`.
    pub fn undirected_edges(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|a| NodeSet::from_bits(self.undirected[a]).iter().filter(move |&b| b > a).map(move |b| (a, b)))
            .collect()
    }

    /// Directed parents of `v`.
    pub fn parents(&self, v: usize) -> NodeSet {
        (0..self.n).filter(|&p| self.has_directed(p, v)).collect()
    }

    fn add_undirected(&mut self, a: usize, b: usize) {
        self.undirected[a] |= 1 << b;
        self.undirected[b] |= 1 << a;
    }

    pub(crate) fn remove_edge(&mut self, a: usize, b: usize) {
        self.directed[a] &= !(1 << b);
        self.directed[b] &= !(1 << a);
        self.undirected[a] &= !(1 << b);
        self.undirected[b] &= !(1 << a);
    }

    /// Turns the undirected edge `a - b` into `a -> b`.
    pub(crate) fn orient(&mut self, a: usize, b: usize) {
        self.undirected[a] &= !(1 << b);
        self.undirected[b] &= !(1 << a);
        self.directed[a] |= 1 << b;
    }

    /// Unshielded colliders among the directed edges, as `(a, c, b)` with `a < b`.
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

    /// Debug export `A->B;B--C`.
    pub fn to_edge_list<S: AsRef<str>>(&self, names: &[S]) -> String {
        let mut parts: Vec<String> = self
            .directed_edges()
            .into_iter()
            .map(|(a, b)| format!("{}->{}", names[a].as_ref(), names[b].as_ref()))
            .collect();
        parts.extend(
            self.undirected_edges().into_iter().map(|(a, b)| format!("{}--{}", names[a].as_ref(), names[b].as_ref())),
        );
        parts.join(";")
    }

    pub fn to_dot<S: AsRef<str>>(&self, names: &[S]) -> String {
        let mut out = String::from("digraph {\n");
        for (a, b) in self.directed_edges() {
            out.push_str(&format!("  \"{}\" -> \"{}\";\n", names[a].as_ref(), names[b].as_ref()));
        }
        for (a, b) in self.undirected_edges() {
            out.push_str(&format!("  \"{}\" -> \"{}\" [dir=none];\n", names[a].as_ref(), names[b].as_ref()));
        }
        out.push_str("}\n");
        out
    }
}

impl ArcMatrix for Cpdag {
    fn order(&self) -> usize {
        self.n
    }

    fn arc_row(&self, i: usize) -> u8 {
        self.directed[i] | self.undirected[i]
    }
}

impl fmt::Debug for Cpdag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = crate::graph::default_names(self.n);
        write!(f, "Cpdag({}: {})", self.n, self.to_edge_list(&names))
    }
}

/// Which Meek orientation rules the closure applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeekRules {
    pub r1: bool,
    pub r2: bool,
    pub r3: bool,
    pub r4: bool,
}

impl MeekRules {
    pub const ALL: MeekRules = MeekRules { r1: true, r2: true, r3: true, r4: true };
}

impl Default for MeekRules {
    fn default() -> Self {
        MeekRules::ALL
    }
}

fn forced(c: &Cpdag, a: usize, b: usize, rules: MeekRules) -> bool {
    let n = c.n;
    // R1: c -> a - b with c, b nonadjacent.
    if rules.r1 && (0..n).any(|k| c.has_directed(k, a) && k != b && !c.adjacent(k, b)) {
        return true;
    }
    // R2: a -> k -> b.
    if rules.r2 && (0..n).any(|k| c.has_directed(a, k) && c.has_directed(k, b)) {
        return true;
    }
    // R3: a - k -> b and a - l -> b with k, l nonadjacent.
    if rules.r3 {
        let mids: Vec<usize> = (0..n).filter(|&k| c.has_undirected(a, k) && c.has_directed(k, b)).collect();
        for (x, &k) in mids.iter().enumerate() {
            if mids[x + 1..].iter().any(|&l| !c.adjacent(k, l)) {
                return true;
            }
        }
    }
    // R4: a - k -> l -> b with k, b nonadjacent and a adjacent to l.
    if rules.r4 {
        for k in (0..n).filter(|&k| c.has_undirected(a, k) && !c.adjacent(k, b) && k != b) {
            if (0..n).any(|l| c.has_directed(k, l) && c.has_directed(l, b) && c.adjacent(a, l)) {
                return true;
            }
        }
    }
    false
}

/// Applies the selected orientation rules until nothing changes.
pub fn meek_closure(c: &mut Cpdag, rules: MeekRules) {
    loop {
        let mut changed = false;
        for (a, b) in c.undirected_edges() {
            if forced(c, a, b, rules) {
                c.orient(a, b);
                changed = true;
            } else if forced(c, b, a, rules) {
                c.orient(b, a);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
}

/// Skeleton of `g` with its v-structures oriented and the rest completed by Meek closure.
pub fn cpdag_of(g: &Dag) -> Cpdag {
    let n = g.node_count();
    let mut c = Cpdag::empty(n);
    for (i, j) in g.edges() {
        c.add_undirected(i, j);
    }
    for (a, v, b) in g.v_structures() {
        if c.has_undirected(a, v) {
            c.orient(a, v);
        }
        if c.has_undirected(b, v) {
            c.orient(b, v);
        }
    }
    meek_closure(&mut c, MeekRules::ALL);
    c
}

/// Every DAG obtained by orienting the undirected edges of `c` without creating a cycle
/// or a new v-structure, sorted by adjacency rows.
pub fn mec_members(c: &Cpdag) -> Result<Vec<Dag>, EquivalenceError> {
    let n = c.n;
    let edges = c.undirected_edges();
    let mut rows = [0u8; MAX_NODES];
    rows[..n].copy_from_slice(&c.directed[..n]);
    let target = c.v_structures();
    let mut out = Vec::new();
    orient_rest(c, &edges, 0, &mut rows, &mut out);
    let mut members: Vec<Dag> = out
        .into_iter()
        .filter_map(|r| Dag::from_rows(n, &r[..n]).ok())
        .filter(|g| g.v_structures() == target)
        .collect();
    if members.is_empty() {
        return Err(EquivalenceError::NoExtension);
    }
    members.sort_by(|a, b| a.rows().cmp(b.rows()));
    Ok(members)
}

fn reaches(rows: &[u8; MAX_NODES], from: usize, to: usize) -> bool {
    let mut seen = NodeSet::singleton(from);
    let mut stack = vec![from];
    while let Some(v) = stack.pop() {
        if v == to {
            return true;
        }
        for w in NodeSet::from_bits(rows[v]).iter() {
            if !seen.contains(w) {
                seen.insert(w);
                stack.push(w);
            }
        }
    }
    false
}

fn orient_rest(
    c: &Cpdag,
    edges: &[(usize, usize)],
    k: usize,
    rows: &mut [u8; MAX_NODES],
    out: &mut Vec<[u8; MAX_NODES]>,
) {
    if k == edges.len() {
        out.push(*rows);
        return;
    }
    let (a, b) = edges[k];
    for (u, v) in [(a, b), (b, a)] {
        if reaches(rows, v, u) {
            continue;
        }
        // Any existing parent of v not adjacent to u would form a new collider at v.
        let new_collider = (0..c.n).any(|w| w != u && rows[w] & (1 << v) != 0 && !c.adjacent(w, u));
        if new_collider {
            continue;
        }
        rows[u] |= 1 << v;
        orient_rest(c, edges, k + 1, rows, out);
        rows[u] &= !(1 << v);
    }
}

/// One Markov equivalence class of the unlabeled DAGs on `n` nodes.
#[derive(Debug, Clone)]
pub struct Mec {
    /// Canonical key of the class CPDAG.
    pub key: CanonicalKey,
    pub cpdag: Cpdag,
    /// First enumerated DAG of the class; fixes the node labeling of `members`.
    pub representative: Dag,
    /// Labeled DAGs Markov-equivalent to the representative.
    pub members: Vec<Dag>,
    /// Enumerated (unlabeled) DAGs that fall into this class.
    pub dags: Vec<Dag>,
    pub signature: CiSignature,
}

impl Mec {
    pub fn node_count(&self) -> usize {
        self.representative.node_count()
    }
}

/// Partitions isomorphism-class representatives by canonical CPDAG key.
///
/// Classes come out sorted by key; within a class the input order is kept and the
/// first DAG becomes the representative.
pub fn group_mecs(dags: &[Dag]) -> Result<Vec<Mec>, EquivalenceError> {
    let keyed: Vec<(CanonicalKey, Cpdag)> = dags
        .par_iter()
        .map(|g| {
            let c = cpdag_of(g);
            (canonical_key(&c), c)
        })
        .collect();
    let mut groups: BTreeMap<CanonicalKey, Vec<usize>> = BTreeMap::new();
    for (idx, (key, _)) in keyed.iter().enumerate() {
        groups.entry(key.clone()).or_default().push(idx);
    }
    groups
        .into_par_iter()
        .map(|(key, idxs)| {
            let representative = dags[idxs[0]].clone();
            let cpdag = keyed[idxs[0]].1.clone();
            let members = mec_members(&cpdag)?;
            Ok(Mec {
                key,
                cpdag,
                signature: ci_signature(&representative),
                representative,
                members,
                dags: idxs.iter().map(|&i| dags[i].clone()).collect(),
            })
        })
        .collect()
}
