use std::collections::BTreeSet;

use causeforge::graph::{canonical_key, enumerate_dags, enumerate_keyed, CanonicalKey, Dag, NodeSet};
use causeforge::oracle::{isomorphism_classes_brute, permutations};
use proptest::prelude::*;

fn keys(dags: &[Dag]) -> BTreeSet<CanonicalKey> {
    dags.iter().map(canonical_key).collect()
}

#[test]
fn enumeration_matches_relabeling_brute_force() {
    for n in 1..=5 {
        let fast = enumerate_dags(n).unwrap();
        let slow = isomorphism_classes_brute(n).unwrap();
        assert_eq!(fast.len(), slow.len(), "n={n}");
        assert_eq!(keys(&fast), keys(&slow), "n={n}");
        // both keep the smallest upper-triangular mask of each class
        let fast_rows: BTreeSet<Vec<u8>> = fast.iter().map(|g| g.rows().to_vec()).collect();
        let slow_rows: BTreeSet<Vec<u8>> = slow.iter().map(|g| g.rows().to_vec()).collect();
        assert_eq!(fast_rows, slow_rows, "n={n}");
    }
}

#[test]
fn keys_unique_and_sorted_within_n() {
    for n in 2..=6 {
        let keyed = enumerate_keyed(n).unwrap();
        assert!(keyed.windows(2).all(|w| w[0].0 < w[1].0), "n={n}");
        assert!(keyed.iter().all(|(k, g)| *k == canonical_key(g)));
    }
}

#[test]
fn representatives_are_upper_triangular() {
    for n in 2..=6 {
        assert!(enumerate_dags(n).unwrap().iter().all(Dag::is_upper_triangular));
    }
}

#[test]
fn every_relabeling_of_a_representative_shares_its_key() {
    for g in enumerate_dags(4).unwrap() {
        let key = canonical_key(&g);
        for p in permutations(4) {
            assert_eq!(canonical_key(&g.permuted(&p)), key);
        }
    }
}

fn arb_dag(max_n: usize) -> impl Strategy<Value = Dag> {
    (2..=max_n)
        .prop_flat_map(|n| {
            let bits = n * (n - 1) / 2;
            (0..(1u32 << bits), Just(n), Just((0..n).collect::<Vec<usize>>()).prop_shuffle())
        })
        .prop_map(|(mask, n, perm)| Dag::from_upper_mask(n, mask).unwrap().permuted(&perm))
}

fn closure_of_parents(g: &Dag, x: usize) -> NodeSet {
    let mut seen = NodeSet::EMPTY;
    let mut stack: Vec<usize> = g.parents(x).iter().collect();
    while let Some(v) = stack.pop() {
        if !seen.contains(v) {
            seen.insert(v);
            stack.extend(g.parents(v).iter());
        }
    }
    seen
}

proptest! {
    #[test]
    fn key_is_relabeling_invariant(g in arb_dag(7), perm in Just((0..7usize).collect::<Vec<_>>()).prop_shuffle()) {
        let n = g.node_count();
        let p: Vec<usize> = perm.into_iter().filter(|&v| v < n).collect();
        prop_assert_eq!(canonical_key(&g), canonical_key(&g.permuted(&p)));
    }

    #[test]
    fn ancestors_are_parent_closure(g in arb_dag(8)) {
        for x in 0..g.node_count() {
            prop_assert_eq!(g.ancestors(x), closure_of_parents(&g, x));
            prop_assert!(g.ancestors(x).is_disjoint(g.descendants(x)));
            let kin = g.kin(x).unwrap();
            prop_assert!(kin.parents.is_subset(kin.ancestors));
            prop_assert!(kin.children.is_subset(kin.descendants));
        }
    }

    #[test]
    fn edge_list_round_trip(g in arb_dag(8)) {
        let parsed = Dag::parse_edge_list(g.names(), &g.to_edge_list()).unwrap();
        prop_assert_eq!(parsed, g);
    }

    #[test]
    fn key_hex_round_trip(g in arb_dag(6)) {
        let key = canonical_key(&g);
        prop_assert_eq!(CanonicalKey::from_hex(&key.to_hex()), Some(key.clone()));
        prop_assert_eq!(key.node_count(), g.node_count());
    }
}
