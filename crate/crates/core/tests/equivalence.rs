use std::collections::BTreeSet;

use causeforge::dataset::mec_index;
use causeforge::equivalence::{cpdag_of, group_mecs, mec_members};
use causeforge::graph::{canonical_key, enumerate_dags};
use causeforge::independence::ci_signature;
use causeforge::oracle::{labeled_dags, mec_members_brute, signature_classes};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

#[test]
fn orientation_search_matches_brute_force_filter() {
    for n in 1..=4 {
        let mut seen = BTreeSet::new();
        for g in labeled_dags(n).unwrap() {
            let c = cpdag_of(&g);
            if !seen.insert(format!("{c:?}")) {
                continue;
            }
            assert_eq!(mec_members(&c).unwrap(), mec_members_brute(&c).unwrap(), "{}", g.to_edge_list());
        }
    }
}

#[test]
fn class_sizes_over_labeled_dags() {
    // Labeled DAG counts 1, 3, 25, 543 and labeled MEC counts 1, 2, 11, 185.
    for (n, dags, classes) in [(1, 1, 1), (2, 3, 2), (3, 25, 11), (4, 543, 185)] {
        let all = labeled_dags(n).unwrap();
        assert_eq!(all.len(), dags);
        let cpdags: BTreeSet<String> = all.iter().map(|g| format!("{:?}", cpdag_of(g))).collect();
        assert_eq!(cpdags.len(), classes, "n={n}");
    }
}

#[test]
fn cpdag_grouping_matches_signature_permutation_grouping() {
    for n in 2..=5 {
        let dags = enumerate_dags(n).unwrap();
        let sigs: Vec<_> = dags.iter().map(ci_signature).collect();
        let mut by_signature: Vec<BTreeSet<usize>> =
            signature_classes(&sigs).into_iter().map(|c| c.into_iter().collect()).collect();
        by_signature.sort();

        let mut by_key: std::collections::BTreeMap<_, BTreeSet<usize>> = Default::default();
        for (idx, g) in dags.iter().enumerate() {
            by_key.entry(canonical_key(&cpdag_of(g))).or_default().insert(idx);
        }
        let mut by_key: Vec<BTreeSet<usize>> = by_key.into_values().collect();
        by_key.sort();
        assert_eq!(by_key, by_signature, "n={n}");
    }
}

#[test]
fn members_share_signature_exhaustively_small() {
    for n in 2..=4 {
        for m in group_mecs(&enumerate_dags(n).unwrap()).unwrap() {
            assert!(m.members.iter().all(|g| ci_signature(g) == m.signature));
            assert!(m.members.contains(&m.representative));
        }
    }
}

#[test]
fn members_share_signature_sampled_large() {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    for n in [5, 6] {
        let mecs = group_mecs(&enumerate_dags(n).unwrap()).unwrap();
        for _ in 0..200 {
            let m = &mecs[rng.gen_range(0..mecs.len())];
            let g = &m.members[rng.gen_range(0..m.members.len())];
            assert_eq!(ci_signature(g), m.signature);
        }
    }
}

#[test]
fn compelled_edges_are_shared_by_all_members_and_reversible_ones_are_not() {
    for m in group_mecs(&enumerate_dags(5).unwrap()).unwrap() {
        for (a, b) in m.cpdag.directed_edges() {
            assert!(m.members.iter().all(|g| g.has_edge(a, b)));
        }
        for (a, b) in m.cpdag.undirected_edges() {
            assert!(m.members.iter().any(|g| g.has_edge(a, b)));
            assert!(m.members.iter().any(|g| g.has_edge(b, a)));
        }
    }
}

#[test]
fn every_enumerated_dag_lands_in_exactly_one_class() {
    for n in 2..=6 {
        let dags = enumerate_dags(n).unwrap();
        let mecs = group_mecs(&dags).unwrap();
        assert_eq!(mecs.iter().map(|m| m.dags.len()).sum::<usize>(), dags.len());
        for m in &mecs {
            // the representative is one of the grouped unlabeled DAGs, and each grouped
            // DAG is isomorphic to some labeled member
            assert_eq!(m.dags[0], m.representative);
            let member_keys: BTreeSet<_> = m.members.iter().map(canonical_key).collect();
            assert!(m.dags.iter().all(|g| member_keys.contains(&canonical_key(g))));
        }
    }
}

#[test]
fn index_keys_are_hex_cpdag_keys() {
    for (key, m) in mec_index(4).unwrap() {
        assert_eq!(key, canonical_key(&m.cpdag).to_hex());
    }
}
