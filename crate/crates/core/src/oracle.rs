//! Brute-force reference implementations.
//!
//! Nothing here shares code paths with the enumeration, canonicalization or
//! orientation search it is used to check. Everything is exponential and meant for
//! small `n`.

use std::collections::{BTreeMap, HashSet};

use crate::equivalence::Cpdag;
use crate::graph::{Dag, GraphError, MAX_NODES};
use crate::independence::CiSignature;

/// Every labeled DAG on `n` nodes: each unordered pair is absent, forward or backward,
/// and cyclic assignments are dropped. Sorted by adjacency rows.
pub fn labeled_dags(n: usize) -> Result<Vec<Dag>, GraphError> {
    if n == 0 || n > 5 {
        return Err(GraphError::EnumerationRange(n));
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let total = 3usize.pow(pairs.len() as u32);
    let mut out = Vec::new();
    for code in 0..total {
        let mut rest = code;
        let mut edges = Vec::with_capacity(pairs.len());
        for &(i, j) in &pairs {
            match rest % 3 {
                1 => edges.push((i, j)),
                2 => edges.push((j, i)),
                _ => {}
            }
            rest /= 3;
        }
        if let Ok(g) = Dag::from_edges(n, &edges) {
            out.push(g);
        }
    }
    out.sort_by(|a, b| a.rows().cmp(b.rows()));
    Ok(out)
}

fn sorted_edges(g: &Dag) -> Vec<(usize, usize)> {
    let mut e: Vec<(usize, usize)> = g.edges().map(|(a, b)| if a < b { (a, b) } else { (b, a) }).collect();
    e.sort_unstable();
    e
}

fn cpdag_skeleton(c: &Cpdag) -> Vec<(usize, usize)> {
    let mut e: Vec<(usize, usize)> = c
        .directed_edges()
        .into_iter()
        .map(|(a, b)| if a < b { (a, b) } else { (b, a) })
        .chain(c.undirected_edges())
        .collect();
    e.sort_unstable();
    e
}

/// Members of the class described by `c`, by filtering every labeled DAG on the
/// same skeleton and the same v-structures.
pub fn mec_members_brute(c: &Cpdag) -> Result<Vec<Dag>, GraphError> {
    let skeleton = cpdag_skeleton(c);
    let vs = c.v_structures();
    Ok(labeled_dags(c.node_count())?
        .into_iter()
        .filter(|g| sorted_edges(g) == skeleton && g.v_structures() == vs)
        .collect())
}

/// Upper-triangular labeled DAGs grouped by isomorphism through explicit relabeling:
/// a mask joins the first earlier class whose representative becomes equal to it
/// under some permutation. Returns one representative (the smallest mask) per class.
pub fn isomorphism_classes_brute(n: usize) -> Result<Vec<Dag>, GraphError> {
    if n == 0 || n > 5 {
        return Err(GraphError::EnumerationRange(n));
    }
    let perms = permutations(n);
    let masks = 1u32 << (n * (n - 1) / 2);
    let mut reps: Vec<Dag> = Vec::new();
    let mut seen: HashSet<[u8; MAX_NODES]> = HashSet::new();
    for mask in 0..masks {
        let g = Dag::from_upper_mask(n, mask)?;
        if seen.contains(&rows_array(&g)) {
            continue;
        }
        for p in &perms {
            seen.insert(rows_array(&g.permuted(p)));
        }
        reps.push(g);
    }
    Ok(reps)
}

fn rows_array(g: &Dag) -> [u8; MAX_NODES] {
    let mut out = [0u8; MAX_NODES];
    out[..g.node_count()].copy_from_slice(g.rows());
    out
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    loop {
        out.push(current.clone());
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else { break };
        let j = (i..n).rev().find(|&j| current[j] > current[i - 1]).unwrap();
        current.swap(i - 1, j);
        current[i..].reverse();
    }
    out
}

/// Partition of `dags` (as index lists, in input order) by "CI signatures equal up to
/// some node permutation". Each class is compared against every relabeling of the
/// first signature seen for it.
pub fn signature_classes(signatures: &[CiSignature]) -> Vec<Vec<usize>> {
    let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut variants: Vec<(usize, HashSet<CiSignature>)> = Vec::new();
    for (idx, sig) in signatures.iter().enumerate() {
        let found = variants.iter().find(|(_, vs)| vs.contains(sig)).map(|(first, _)| *first);
        match found {
            Some(first) => classes.get_mut(&first).unwrap().push(idx),
            None => {
                let vs = permutations(sig.node_count()).iter().map(|p| sig.permuted(p)).collect();
                variants.push((idx, vs));
                classes.insert(idx, vec![idx]);
            }
        }
    }
    classes.into_values().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labeled_dag_counts() {
        // OEIS A003024
        let counts: Vec<usize> = (1..=4).map(|n| labeled_dags(n).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 3, 25, 543]);
    }

    #[test]
    fn permutation_count_and_order() {
        let p = permutations(3);
        assert_eq!(p.len(), 6);
        assert_eq!(p[0], vec![0, 1, 2]);
        assert_eq!(p[5], vec![2, 1, 0]);
    }

    #[test]
    fn brute_isomorphism_counts() {
        let counts: Vec<usize> = (1..=4).map(|n| isomorphism_classes_brute(n).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 2, 6, 31]);
    }
}
