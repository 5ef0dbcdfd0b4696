//! Acceptance checks against the reference corpus statistics plus the oracle
//! equivalence properties. Each check emits one or more [`CheckLine`]s.

use std::fmt;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::dataset::{self, BuildOptions, SampleRecord, Split};
use crate::discovery::{pc_with, PcOptions};
use crate::equivalence::{cpdag_of, group_mecs, mec_members, MeekRules};
use crate::evaluation::{baseline, pmi_table, score, BaselineKind, PmiSource};
use crate::graph::{enumerate_dags, Dag, NodeSet};
use crate::independence::{ci_signature, d_separated, d_separated_by_paths};
use crate::oracle::{labeled_dags, mec_members_brute};
use crate::verbalizer::tokenize;

pub const NODE_RANGE: std::ops::RangeInclusive<usize> = 2..=6;

pub const DAG_COUNTS: [usize; 5] = [2, 6, 31, 302, 5984];
pub const EDGES_PER_DAG: [f64; 5] = [0.50, 1.67, 3.48, 5.89, 8.77];
pub const MEC_COUNTS: [usize; 5] = [2, 5, 20, 142, 2207];
pub const DAGS_PER_MEC: [f64; 5] = [1.0, 1.2, 1.55, 2.13, 2.71];
pub const SAMPLE_COUNTS: [usize; 5] = [24, 180, 1440, 17040, 397260];
pub const SAMPLE_TOTAL: usize = 415_944;
pub const VALID_PCT: [f64; 5] = [0.00, 3.33, 7.50, 13.01, 18.85];
pub const VALID_PCT_OVERALL: f64 = 18.57;
pub const TEST_DEV_SIZES: [usize; 5] = [12, 90, 144, 1000, 1000];
pub const TRAIN_SIZES: [usize; 5] = [0, 0, 1152, 15040, 395260];
pub const PREMISE_TOKENS: [f64; 5] = [31.5, 52.0, 104.0, 212.61, 434.54];
pub const HYPOTHESIS_TOKENS: f64 = 10.83;
pub const MAJORITY_ACCURACY: f64 = 84.77;
/// Top-ranked n-grams of the reference PMI ranking.
pub const PMI_FRAGMENTS: [&str; 10] = [
    "a cause",
    "a cause for",
    "A causes",
    "A causes something",
    "a direct",
    "a direct one",
    "for D",
    "for D but",
    "for E",
    "for E but",
];

pub const EDGE_TOL: f64 = 0.01;
pub const VALID_TOL_PP: f64 = 0.02;
pub const HYPOTHESIS_TOL_REL: f64 = 0.10;
pub const PREMISE_TOL_REL: f64 = 0.20;
pub const MAJORITY_TOL: f64 = 0.5;
pub const UNIFORM_RECALL_TOL: f64 = 2.0;
pub const ENUMERATION_BUDGET: Duration = Duration::from_secs(60);
pub const BUILD_BUDGET: Duration = Duration::from_secs(30 * 60);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Out of tolerance on a soft criterion.
    Warn,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckLine {
    pub criterion: u8,
    pub name: String,
    pub status: Status,
    pub detail: String,
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Warn => "WARN",
        };
        write!(f, "[{tag}] C{:<2} {} ({})", self.criterion, self.name, self.detail)
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Report {
    pub lines: Vec<CheckLine>,
}

impl Report {
    pub fn failures(&self) -> impl Iterator<Item = &CheckLine> {
        self.lines.iter().filter(|l| l.status == Status::Fail)
    }

    pub fn all_passed(&self) -> bool {
        self.failures().next().is_none()
    }

    fn push(&mut self, criterion: u8, name: impl Into<String>, ok: bool, detail: impl Into<String>) {
        self.push_status(criterion, name, if ok { Status::Pass } else { Status::Fail }, detail);
    }

    fn push_status(&mut self, criterion: u8, name: impl Into<String>, status: Status, detail: impl Into<String>) {
        self.lines.push(CheckLine { criterion, name: name.into(), status, detail: detail.into() });
    }
}

#[derive(Debug, Clone)]
pub struct CheckConfig {
    pub seed: u64,
    /// Random d-separation queries per node count in {5, 6}.
    pub dsep_queries: usize,
    /// Random 6-node DAGs for the PC comparison.
    pub pc_samples: usize,
    pub uniform_seeds: u64,
    pub meek_rules: MeekRules,
    /// Criteria to run; empty means all.
    pub criteria: Vec<u8>,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            seed: 0,
            dsep_queries: 10_000,
            pc_samples: 500,
            uniform_seeds: 10,
            meek_rules: MeekRules::ALL,
            criteria: Vec::new(),
        }
    }
}

impl CheckConfig {
    fn wants(&self, c: u8) -> bool {
        self.criteria.is_empty() || self.criteria.contains(&c)
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol + 1e-9
}

/// Uniformly random `n`-node DAG: random upper-triangular mask, random relabeling.
pub fn random_dag(n: usize, rng: &mut impl Rng) -> Dag {
    let bits = n * (n - 1) / 2;
    let mask = rng.gen_range(0..1u32 << bits);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    Dag::from_upper_mask(n, mask).expect("n within range").permuted(&perm)
}

/// Criterion 1: unique DAG counts and mean edges per DAG.
pub fn check_dag_enumeration(report: &mut Report) -> Vec<Vec<Dag>> {
    let mut all = Vec::new();
    for (k, n) in NODE_RANGE.enumerate() {
        let start = Instant::now();
        let dags = enumerate_dags(n).expect("supported node count");
        let elapsed = start.elapsed();
        let mean = dags.iter().map(Dag::edge_count).sum::<usize>() as f64 / dags.len() as f64;
        report.push(
            1,
            format!("unique DAGs n={n} == {}", DAG_COUNTS[k]),
            dags.len() == DAG_COUNTS[k],
            format!("got {}", dags.len()),
        );
        report.push(
            1,
            format!("edges/DAG n={n} == {:.2} ±{EDGE_TOL}", EDGES_PER_DAG[k]),
            close(mean, EDGES_PER_DAG[k], EDGE_TOL),
            format!("got {mean:.4}"),
        );
        if n == 6 {
            report.push(
                1,
                format!("n=6 enumeration < {}s", ENUMERATION_BUDGET.as_secs()),
                elapsed < ENUMERATION_BUDGET,
                format!("took {:.2}s", elapsed.as_secs_f64()),
            );
        }
        all.push(dags);
    }
    all
}

/// Criterion 2: MEC counts and mean unlabeled DAGs per MEC.
pub fn check_mec_grouping(report: &mut Report, dags: &[Vec<Dag>]) {
    for (k, n) in NODE_RANGE.enumerate() {
        let mecs = group_mecs(&dags[k]).expect("enumerated DAGs have extensions");
        let mean = dags[k].len() as f64 / mecs.len() as f64;
        report.push(
            2,
            format!("MEC count n={n} == {}", MEC_COUNTS[k]),
            mecs.len() == MEC_COUNTS[k],
            format!("got {}", mecs.len()),
        );
        report.push(
            2,
            format!("DAGs/MEC n={n} == {:.2} ±{EDGE_TOL}", DAGS_PER_MEC[k]),
            close(mean, DAGS_PER_MEC[k], EDGE_TOL),
            format!("got {mean:.4}"),
        );
    }
}

fn by_n(records: &[SampleRecord], n: usize) -> impl Iterator<Item = &SampleRecord> {
    records.iter().filter(move |r| r.n_nodes == n)
}

/// Criterion 3: corpus sizes and build time.
pub fn check_corpus_sizes(report: &mut Report, records: &[SampleRecord], build_time: Duration) {
    for (k, n) in NODE_RANGE.enumerate() {
        let count = by_n(records, n).count();
        report.push(
            3,
            format!("samples n={n} == {}", SAMPLE_COUNTS[k]),
            count == SAMPLE_COUNTS[k],
            format!("got {count}"),
        );
    }
    report.push(
        3,
        format!("samples total == {SAMPLE_TOTAL}"),
        records.len() == SAMPLE_TOTAL,
        format!("got {}", records.len()),
    );
    report.push(
        3,
        format!("full build < {} min", BUILD_BUDGET.as_secs() / 60),
        build_time < BUILD_BUDGET,
        format!("took {:.2}s", build_time.as_secs_f64()),
    );
}

fn valid_pct<'a>(records: impl Iterator<Item = &'a SampleRecord>) -> f64 {
    let (mut total, mut valid) = (0usize, 0usize);
    for r in records {
        total += 1;
        valid += r.label as usize;
    }
    100.0 * valid as f64 / total.max(1) as f64
}

/// Criterion 4: valid-label rates.
pub fn check_label_rates(report: &mut Report, records: &[SampleRecord]) {
    for (k, n) in NODE_RANGE.enumerate() {
        let pct = valid_pct(by_n(records, n));
        report.push(
            4,
            format!("valid % n={n} == {:.2} ±{VALID_TOL_PP}pp", VALID_PCT[k]),
            close(pct, VALID_PCT[k], VALID_TOL_PP),
            format!("got {pct:.4}"),
        );
    }
    let pct = valid_pct(records.iter());
    report.push(
        4,
        format!("valid % overall == {VALID_PCT_OVERALL:.2} ±{VALID_TOL_PP}pp"),
        close(pct, VALID_PCT_OVERALL, VALID_TOL_PP),
        format!("got {pct:.4}"),
    );
}

/// Criterion 5: split sizes (records must already carry splits).
pub fn check_split_sizes(report: &mut Report, records: &[SampleRecord]) {
    for (k, n) in NODE_RANGE.enumerate() {
        let mut counts = [0usize; 3];
        for r in by_n(records, n) {
            match r.split {
                Some(Split::Test) => counts[0] += 1,
                Some(Split::Dev) => counts[1] += 1,
                Some(Split::Train) => counts[2] += 1,
                None => {}
            }
        }
        let want = [TEST_DEV_SIZES[k], TEST_DEV_SIZES[k], TRAIN_SIZES[k]];
        report.push(
            5,
            format!("split n={n} test/dev/train == {}/{}/{}", want[0], want[1], want[2]),
            counts == want,
            format!("got {}/{}/{}", counts[0], counts[1], counts[2]),
        );
    }
}

/// Number of DAGs (out of those given) whose PC output differs from `cpdag_of`.
pub fn pc_mismatches<'a>(dags: impl IntoIterator<Item = &'a Dag>, rules: MeekRules) -> (usize, usize) {
    let options = PcOptions { rules };
    let (mut checked, mut bad) = (0, 0);
    for g in dags {
        checked += 1;
        let sig = ci_signature(g);
        match pc_with(&sig, g.node_count(), options) {
            Ok(out) if out.cpdag == cpdag_of(g) => {}
            _ => bad += 1,
        }
    }
    (checked, bad)
}

/// Criterion 6: PC on a perfect oracle recovers the CPDAG.
pub fn check_pc_equivalence(report: &mut Report, config: &CheckConfig) {
    let mut exhaustive = Vec::new();
    for n in 2..=5 {
        exhaustive.extend(labeled_dags(n).expect("small n"));
    }
    let (checked, bad) = pc_mismatches(&exhaustive, config.meek_rules);
    report.push(6, "PC == CPDAG, all labeled DAGs n<=5", bad == 0, format!("{bad} mismatches of {checked}"));

    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    rng.set_stream(6);
    let sample: Vec<Dag> = (0..config.pc_samples).map(|_| random_dag(6, &mut rng)).collect();
    let (checked, bad) = pc_mismatches(&sample, config.meek_rules);
    report.push(
        6,
        format!("PC == CPDAG, {} random 6-node DAGs", config.pc_samples),
        bad == 0 && checked >= 500,
        format!("{bad} mismatches of {checked}"),
    );
}

fn dsep_agree(g: &Dag, i: usize, j: usize, z: NodeSet) -> bool {
    d_separated(g, i, j, z).expect("valid query") == d_separated_by_paths(g, i, j, z).expect("valid query")
}

/// Criterion 7: reachability and path-enumeration d-separation agree.
pub fn check_dsep_agreement(report: &mut Report, config: &CheckConfig) {
    let (mut checked, mut bad) = (0usize, 0usize);
    for n in 1..=4 {
        for g in labeled_dags(n).expect("small n") {
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    for z in NodeSet::full(n).without(i).without(j).subsets() {
                        checked += 1;
                        bad += usize::from(!dsep_agree(&g, i, j, z));
                    }
                }
            }
        }
    }
    report.push(7, "d-separation agreement, exhaustive n<=4", bad == 0, format!("{bad} mismatches of {checked}"));

    for n in [5usize, 6] {
        let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
        rng.set_stream(100 + n as u64);
        let mut bad = 0;
        for _ in 0..config.dsep_queries {
            let g = random_dag(n, &mut rng);
            let i = rng.gen_range(0..n);
            let j = (i + rng.gen_range(1..n)) % n;
            let rest = NodeSet::full(n).without(i).without(j);
            let z: NodeSet = rest.iter().filter(|_| rng.gen_bool(0.5)).collect();
            bad += usize::from(!dsep_agree(&g, i, j, z));
        }
        report.push(
            7,
            format!("d-separation agreement, {} random queries n={n}", config.dsep_queries),
            bad == 0 && config.dsep_queries >= 10_000,
            format!("{bad} mismatches"),
        );
    }
}

/// Criterion 8: orientation search equals brute-force member filtering.
pub fn check_mec_members(report: &mut Report) {
    let (mut checked, mut bad) = (0usize, 0usize);
    for n in 1..=4 {
        for g in labeled_dags(n).expect("small n") {
            let c = cpdag_of(&g);
            checked += 1;
            let fast = mec_members(&c).expect("CPDAG of a DAG");
            let slow = mec_members_brute(&c).expect("small n");
            bad += usize::from(fast != slow);
        }
    }
    report.push(
        8,
        "MEC members == brute force, all labeled DAGs n<=4",
        bad == 0,
        format!("{bad} mismatches of {checked} classes"),
    );
}

/// Criterion 9: token statistics (soft).
pub fn check_text_stats(report: &mut Report, records: &[SampleRecord]) {
    let soft = |ok: bool| if ok { Status::Pass } else { Status::Warn };
    let hyp = records.iter().map(|r| tokenize(&r.hypothesis).len()).sum::<usize>() as f64 / records.len().max(1) as f64;
    report.push_status(
        9,
        format!("hypothesis tokens == {HYPOTHESIS_TOKENS} ±{:.0}%", HYPOTHESIS_TOL_REL * 100.0),
        soft((hyp - HYPOTHESIS_TOKENS).abs() <= HYPOTHESIS_TOL_REL * HYPOTHESIS_TOKENS),
        format!("got {hyp:.3}"),
    );
    let stats = dataset::stats(records);
    for (k, n) in NODE_RANGE.enumerate() {
        let got = stats.by_n.get(&n).map_or(0.0, |s| s.mean_premise_tokens);
        report.push_status(
            9,
            format!("premise tokens n={n} == {} ±{:.0}%", PREMISE_TOKENS[k], PREMISE_TOL_REL * 100.0),
            soft((got - PREMISE_TOKENS[k]).abs() <= PREMISE_TOL_REL * PREMISE_TOKENS[k]),
            format!("got {got:.2}"),
        );
    }
}

/// Criterion 10: majority and uniform baselines on the test split.
pub fn check_baselines(report: &mut Report, records: &[SampleRecord], config: &CheckConfig) {
    let test: Vec<SampleRecord> = records.iter().filter(|r| r.split == Some(Split::Test)).cloned().collect();
    if test.is_empty() {
        report.push(10, "baselines", false, "empty test split");
        return;
    }
    let positive = valid_pct(test.iter());
    let majority = score(&baseline(BaselineKind::Majority, &test, config.seed, None).unwrap(), &test).unwrap();
    report.push(
        10,
        "majority accuracy == 100 - test positive rate",
        close(majority.accuracy, 100.0 - positive, 1e-9),
        format!("accuracy {:.2}, positive rate {positive:.2}", majority.accuracy),
    );
    report.push(
        10,
        format!("majority accuracy == {MAJORITY_ACCURACY} ±{MAJORITY_TOL}"),
        close(majority.accuracy, MAJORITY_ACCURACY, MAJORITY_TOL),
        format!("got {:.2} at split seed {}", majority.accuracy, config.seed),
    );
    let recalls: Vec<f64> = (0..config.uniform_seeds)
        .map(|k| {
            let preds = baseline(BaselineKind::Uniform, &test, config.seed + k, None).unwrap();
            score(&preds, &test).unwrap().recall
        })
        .collect();
    let mean = recalls.iter().sum::<f64>() / recalls.len().max(1) as f64;
    report.push(
        10,
        format!("uniform recall == 50 ±{UNIFORM_RECALL_TOL} over {} seeds", config.uniform_seeds),
        close(mean, 50.0, UNIFORM_RECALL_TOL),
        format!("mean {mean:.2}"),
    );
}

/// Criterion 11: template fragments among the top PMI differences.
pub fn check_pmi(report: &mut Report, records: &[SampleRecord]) {
    let rows = pmi_table(records, 4, PmiSource::default());
    let top = &rows[..rows.len().min(10)];
    let hits: Vec<&str> = top
        .iter()
        .filter(|r| PMI_FRAGMENTS.contains(&r.ngram.as_str()) && r.pmi_neg > 0.0 && r.pmi_pos < 0.0)
        .map(|r| r.ngram.as_str())
        .collect();
    let listed: Vec<String> = top.iter().map(|r| format!("{:?}", r.ngram)).collect();
    report.push(
        11,
        "top-10 PMI n-grams include >= 3 reference fragments with invalid-positive sign",
        hits.len() >= 3,
        format!("{} hits; top-10 = [{}]", hits.len(), listed.join(", ")),
    );
}

/// Runs the selected criteria over a fresh n=2..6 build.
pub fn run(config: &CheckConfig) -> Report {
    let mut report = Report::default();
    if config.wants(1) || config.wants(2) {
        let mut scratch = Report::default();
        let dags = check_dag_enumeration(&mut scratch);
        if config.wants(1) {
            report.lines.append(&mut scratch.lines);
        }
        if config.wants(2) {
            check_mec_grouping(&mut report, &dags);
        }
    }
    if [3, 4, 5, 9, 10, 11].iter().any(|&c| config.wants(c)) {
        let start = Instant::now();
        let mut records = dataset::build(*NODE_RANGE.start(), *NODE_RANGE.end(), &BuildOptions::default())
            .expect("supported node range");
        let build_time = start.elapsed();
        dataset::split(&mut records, config.seed);
        if config.wants(3) {
            check_corpus_sizes(&mut report, &records, build_time);
        }
        if config.wants(4) {
            check_label_rates(&mut report, &records);
        }
        if config.wants(5) {
            check_split_sizes(&mut report, &records);
        }
        if config.wants(9) {
            check_text_stats(&mut report, &records);
        }
        if config.wants(10) {
            check_baselines(&mut report, &records, config);
        }
        if config.wants(11) {
            check_pmi(&mut report, &records);
        }
    }
    if config.wants(6) {
        check_pc_equivalence(&mut report, config);
    }
    if config.wants(7) {
        check_dsep_agreement(&mut report, config);
    }
    if config.wants(8) {
        check_mec_members(&mut report);
    }
    report.lines.sort_by_key(|l| l.criterion);
    report
}
