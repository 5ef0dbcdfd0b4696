use std::collections::{BTreeMap, HashMap};
use std::fs;

use causeforge::dataset::{
    build, mec_index, read_records, split, split_sizes, stats, write_records, BuildOptions, DatasetError, Format,
    Perturbation, SampleRecord, Split, SubsetStats,
};
use causeforge::graph::{default_names, Dag};
use causeforge::independence::ci_signature;
use causeforge::labeling::label;
use causeforge::verbalizer::{paraphrase, parse_premise, refactor_variables, tokenize, verbalize_premise};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn corpus(n_min: usize, n_max: usize) -> Vec<SampleRecord> {
    build(n_min, n_max, &BuildOptions::default()).unwrap()
}

#[test]
fn sizes_for_small_node_counts() {
    assert_eq!(corpus(2, 2).len(), 24);
    assert_eq!(corpus(3, 3).len(), 180);
    assert_eq!(corpus(4, 4).len(), 1440);
    assert!(corpus(2, 2).iter().all(|r| r.label == 0));
}

#[test]
fn range_is_validated() {
    for (a, b) in [(1, 3), (4, 3), (2, 8)] {
        assert!(matches!(build(a, b, &BuildOptions::default()), Err(DatasetError::Range { .. })));
    }
}

#[test]
fn builds_are_deterministic_and_sorted() {
    let a = corpus(2, 5);
    let b = corpus(2, 5);
    assert_eq!(a, b);
    assert!(a.windows(2).all(|w| w[0].id < w[1].id));
    let dir = tempfile::tempdir().unwrap();
    let (pa, pb) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"));
    write_records(&a, &pa, Format::Jsonl).unwrap();
    write_records(&b, &pb, Format::Jsonl).unwrap();
    assert_eq!(fs::read(pa).unwrap(), fs::read(pb).unwrap());
}

#[test]
fn ids_are_unique_and_derived_from_fields() {
    let recs = corpus(2, 5);
    let mut ids: Vec<&str> = recs.iter().map(|r| r.id.as_str()).collect();
    ids.dedup();
    assert_eq!(ids.len(), recs.len());
    for r in &recs {
        let mut copy = r.clone();
        copy.id.clear();
        copy.refresh_id();
        assert_eq!(copy.id, r.id);
    }
}

#[test]
fn labels_recompute_from_class_key() {
    let mut recs = corpus(2, 6);
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    recs.shuffle(&mut rng);
    let sample = &recs[..recs.len() / 100];
    let mut index = BTreeMap::new();
    for n in 2..=6 {
        index.insert(n, mec_index(n).unwrap());
    }
    for r in sample {
        let m = &index[&r.n_nodes][&r.mec_key];
        assert_eq!(label(m, &r.hypothesis_spec()), r.label, "{}", r.id);
    }
}

#[test]
fn split_partitions_each_node_count() {
    let mut recs = corpus(2, 5);
    split(&mut recs, 42);
    let mut counts: BTreeMap<usize, [usize; 3]> = BTreeMap::new();
    for r in &recs {
        let slot = match r.split.expect("every record gets a split") {
            Split::Test => 0,
            Split::Dev => 1,
            Split::Train => 2,
        };
        counts.entry(r.n_nodes).or_default()[slot] += 1;
    }
    assert_eq!(counts[&2], [12, 12, 0]);
    assert_eq!(counts[&3], [90, 90, 0]);
    assert_eq!(counts[&4], [144, 144, 1152]);
    assert_eq!(counts[&5], [1000, 1000, 15040]);
    assert_eq!(split_sizes(396_180), (1000, 1000, 394_180));
}

#[test]
fn split_membership_depends_only_on_seed() {
    let mut a = corpus(2, 4);
    let mut b = corpus(2, 4);
    let mut c = corpus(2, 4);
    split(&mut a, 1);
    split(&mut b, 1);
    split(&mut c, 2);
    assert_eq!(a, b);
    assert_ne!(a, c);
    // extending the node range leaves smaller subsets untouched
    let mut wide = corpus(2, 5);
    split(&mut wide, 1);
    let narrow: HashMap<&str, Option<Split>> = a.iter().map(|r| (r.id.as_str(), r.split)).collect();
    assert!(wide.iter().filter(|r| r.n_nodes <= 4).all(|r| narrow[r.id.as_str()] == r.split));
}

#[test]
fn jsonl_and_csv_round_trip() {
    let mut recs = corpus(2, 4);
    split(&mut recs, 0);
    let dir = tempfile::tempdir().unwrap();
    for format in [Format::Jsonl, Format::Csv] {
        let path = dir.path().join(format!("c.{}", format.extension()));
        write_records(&recs, &path, format).unwrap();
        assert_eq!(read_records(&path, format).unwrap(), recs);
        let bytes = fs::read(&path).unwrap();
        assert!(!bytes.contains(&b'\r'));
        assert!(std::str::from_utf8(&bytes).is_ok());
    }
    let jsonl = fs::read_to_string(dir.path().join("c.jsonl")).unwrap();
    assert_eq!(jsonl.lines().count(), recs.len());
    let first: serde_json::Value = serde_json::from_str(jsonl.lines().next().unwrap()).unwrap();
    let keys: Vec<&str> = first.as_object().unwrap().keys().map(String::as_str).collect();
    let mut expected =
        vec!["hypothesis", "id", "label", "mec_key", "n_nodes", "pair", "perturbation", "premise", "relation", "split"];
    expected.sort();
    let mut keys = keys;
    keys.sort();
    assert_eq!(keys, expected);
    let header = fs::read_to_string(dir.path().join("c.csv")).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, "id,n_nodes,mec_key,pair,relation,premise,hypothesis,label,split,perturbation");
}

#[test]
fn missing_label_is_a_schema_error_naming_the_field() {
    let recs = corpus(2, 2);
    let mut value = serde_json::to_value(&recs[0]).unwrap();
    value.as_object_mut().unwrap().remove("label");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.jsonl");
    let good = serde_json::to_string(&recs[1]).unwrap();
    fs::write(&path, format!("{good}\n{value}\n")).unwrap();
    match read_records(&path, Format::Jsonl) {
        Err(DatasetError::Schema { line, message }) => {
            assert_eq!(line, 2);
            assert!(message.contains("label"), "{message}");
        }
        other => panic!("expected schema error, got {other:?}"),
    }
    let csv_path = dir.path().join("bad.csv");
    fs::write(&csv_path, "id,n_nodes,mec_key,pair,relation,premise,hypothesis,split,perturbation\nx,2,0200,0-1,Is-Parent,p,h,test,none\n").unwrap();
    match read_records(&csv_path, Format::Csv) {
        Err(DatasetError::Schema { message, .. }) => assert!(message.contains("label"), "{message}"),
        other => panic!("expected schema error, got {other:?}"),
    }
}

#[test]
fn non_binary_label_rejected() {
    let recs = corpus(2, 2);
    let mut value = serde_json::to_value(&recs[0]).unwrap();
    value["label"] = serde_json::json!(2);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.jsonl");
    fs::write(&path, format!("{value}\n")).unwrap();
    assert!(matches!(read_records(&path, Format::Jsonl), Err(DatasetError::Schema { line: 1, .. })));
}

#[test]
fn empty_stats_are_zero() {
    let s = stats(&[]);
    assert_eq!(s.overall, SubsetStats::default());
    assert!(s.by_n.is_empty());
}

#[test]
fn stats_sum_over_splits() {
    let mut recs = corpus(2, 5);
    split(&mut recs, 3);
    let s = stats(&recs);
    for sub in s.by_n.values().chain([&s.overall]) {
        assert_eq!(sub.test + sub.dev + sub.train, sub.samples);
    }
    assert_eq!(s.by_n.values().map(|v| v.samples).sum::<usize>(), s.overall.samples);
    assert!((s.by_n[&3].valid_label_pct - 100.0 / 30.0).abs() < 1e-9);
    assert!((s.overall.mean_hypothesis_tokens - 67.0 / 6.0).abs() < 1e-9);
}

#[test]
fn refactor_keeps_labels_and_drops_original_names() {
    let mut recs = corpus(2, 6);
    split(&mut recs, 0);
    let test: Vec<&SampleRecord> = recs.iter().filter(|r| r.split == Some(Split::Test)).collect();
    let out: Vec<SampleRecord> = test.iter().map(|r| refactor_variables(r).unwrap()).collect();
    assert_eq!(out.len(), test.len());
    let originals = ["A", "B", "C", "D", "E", "F"];
    for (o, r) in out.iter().zip(&test) {
        assert_eq!(o.label, r.label);
        assert_eq!(o.perturbation, Perturbation::Refactor);
        assert_eq!((o.mec_key.as_str(), o.pair, o.relation), (r.mec_key.as_str(), r.pair, r.relation));
        for text in [&*o.premise, o.hypothesis.as_str()] {
            assert!(tokenize(text).iter().all(|t| !originals.contains(t)), "{text}");
        }
        // the refactored premise still parses to the same relation map
        assert_eq!(parse_premise(&o.premise).unwrap().0, parse_premise(&r.premise).unwrap().0);
    }
}

#[test]
fn paraphrase_keeps_labels_and_changes_only_the_hypothesis() {
    let recs = corpus(2, 5);
    for r in &recs {
        let p = paraphrase(r).unwrap();
        assert_eq!((p.label, &p.premise, p.perturbation), (r.label, &r.premise, Perturbation::Paraphrase));
        assert_ne!(p.hypothesis, r.hypothesis);
    }
    let base_rate = |v: &[SampleRecord]| v.iter().filter(|r| r.label == 1).count();
    let para: Vec<SampleRecord> = recs.iter().map(|r| paraphrase(r).unwrap()).collect();
    assert_eq!(base_rate(&para), base_rate(&recs));
}

fn arb_dag() -> impl Strategy<Value = Dag> {
    (2..=7usize)
        .prop_flat_map(|n| (Just(n), 0..(1u32 << (n * (n - 1) / 2)), Just((0..n).collect::<Vec<_>>()).prop_shuffle()))
        .prop_map(|(n, mask, perm)| Dag::from_upper_mask(n, mask).unwrap().permuted(&perm))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn premise_round_trips(g in arb_dag()) {
        let names = default_names(g.node_count());
        let sig = ci_signature(&g);
        let text = verbalize_premise(&sig, &names).unwrap();
        let (parsed, parsed_names) = parse_premise(text.as_str()).unwrap();
        prop_assert_eq!(parsed, sig);
        prop_assert_eq!(parsed_names, names);
        prop_assert!(!text.as_str().contains("  "));
    }
}
