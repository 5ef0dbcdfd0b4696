//! Corpus assembly, splitting, statistics and JSONL/CSV serialization.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equivalence::{group_mecs, EquivalenceError, Mec};
use crate::graph::{default_names, enumerate_dags, GraphError, MAX_ENUMERATION_NODES};
use crate::labeling::{all_hypotheses, label, Hypothesis, RelationType};
use crate::verbalizer::{tokenize, verbalize_hypothesis, verbalize_premise, TemplateSet, VerbalizeError};

/// Name and version of the generator behind [`split`]; recorded in run manifests.
pub const SPLIT_RNG: &str = "chacha20/stream-per-n/v1";

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("node range {n_min}..={n_max} invalid (allowed 2..={max})", max = MAX_ENUMERATION_NODES)]
    Range { n_min: usize, n_max: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Equivalence(#[from] EquivalenceError),
    #[error(transparent)]
    Verbalize(#[from] VerbalizeError),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("schema violation at line {line}: {message}")]
    Schema { line: usize, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io { path: path.display().to_string(), source }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        })
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "dev" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Perturbation {
    #[default]
    None,
    Paraphrase,
    Refactor,
}

impl Perturbation {
    pub fn as_str(self) -> &'static str {
        match self {
            Perturbation::None => "none",
            Perturbation::Paraphrase => "paraphrase",
            Perturbation::Refactor => "refactor",
        }
    }
}

impl fmt::Display for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Perturbation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Perturbation::None),
            "paraphrase" => Ok(Perturbation::Paraphrase),
            "refactor" => Ok(Perturbation::Refactor),
            other => Err(format!("unknown perturbation {other:?}")),
        }
    }
}

/// One premise/hypothesis/label sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub id: String,
    pub n_nodes: usize,
    /// Hex canonical key of the class CPDAG.
    pub mec_key: String,
    pub pair: [usize; 2],
    pub relation: RelationType,
    pub premise: Arc<str>,
    pub hypothesis: String,
    pub label: u8,
    pub split: Option<Split>,
    pub perturbation: Perturbation,
}

/// Stable sample identifier; sorts by node count, class key, pair, relation.
pub fn record_id(
    n_nodes: usize,
    mec_key: &str,
    pair: [usize; 2],
    relation: RelationType,
    perturbation: Perturbation,
) -> String {
    format!("n{n_nodes}-{mec_key}-{}{}-r{}-{}", pair[0], pair[1], relation.index(), perturbation)
}

impl SampleRecord {
    pub fn hypothesis_spec(&self) -> Hypothesis {
        Hypothesis { relation: self.relation, i: self.pair[0], j: self.pair[1] }
    }

    pub fn refresh_id(&mut self) {
        self.id = record_id(self.n_nodes, &self.mec_key, self.pair, self.relation, self.perturbation);
    }

    fn validate(&self) -> Result<(), String> {
        if self.label > 1 {
            return Err(format!("label must be 0 or 1, got {}", self.label));
        }
        if self.pair[0] == self.pair[1] || self.pair.iter().any(|&v| v >= self.n_nodes) {
            return Err(format!("pair {:?} invalid for {} nodes", self.pair, self.n_nodes));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct BuildOptions {
    pub templates: TemplateSet,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { templates: TemplateSet::default_set() }
    }
}

/// Equivalence classes of `n`-node DAGs, keyed by hex CPDAG key.
pub fn mec_index(n: usize) -> Result<BTreeMap<String, Mec>, DatasetError> {
    let mecs = group_mecs(&enumerate_dags(n)?)?;
    Ok(mecs.into_iter().map(|m| (m.key.to_hex(), m)).collect())
}

/// Records for one class: one per hypothesis, all sharing the rendered premise.
pub fn mec_records(m: &Mec, templates: &TemplateSet) -> Result<Vec<SampleRecord>, DatasetError> {
    let n = m.node_count();
    let names = default_names(n);
    let premise: Arc<str> = verbalize_premise(&m.signature, &names)?.into_string().into();
    let key = m.key.to_hex();
    Ok(all_hypotheses(n)
        .into_iter()
        .map(|h| {
            let pair = [h.i, h.j];
            SampleRecord {
                id: record_id(n, &key, pair, h.relation, Perturbation::None),
                n_nodes: n,
                mec_key: key.clone(),
                pair,
                relation: h.relation,
                premise: Arc::clone(&premise),
                hypothesis: verbalize_hypothesis(&h, &names, templates),
                label: label(m, &h),
                split: None,
                perturbation: Perturbation::None,
            }
        })
        .collect())
}

/// Full corpus for node counts `n_min..=n_max`, sorted by id.
pub fn build(n_min: usize, n_max: usize, options: &BuildOptions) -> Result<Vec<SampleRecord>, DatasetError> {
    if n_min < 2 || n_min > n_max || n_max > MAX_ENUMERATION_NODES {
        return Err(DatasetError::Range { n_min, n_max });
    }
    let mut out = Vec::new();
    for n in n_min..=n_max {
        let mecs = group_mecs(&enumerate_dags(n)?)?;
        let chunks: Vec<Vec<SampleRecord>> =
            mecs.par_iter().map(|m| mec_records(m, &options.templates)).collect::<Result<_, _>>()?;
        out.extend(chunks.into_iter().flatten());
    }
    out.par_sort_by(|a, b| a.id.cmp(&b.id));
    Ok(out)
}

/// Test/dev/train sizes for a subset of `count` records.
pub fn split_sizes(count: usize) -> (usize, usize, usize) {
    if count < 1000 {
        let test = count / 2;
        (test, count - test, 0)
    } else {
        let k = (count / 10).min(1000);
        (k, k, count - 2 * k)
    }
}

/// Assigns splits per node count from one seeded shuffle of that subset.
pub fn split(records: &mut [SampleRecord], seed: u64) {
    let mut by_n: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (idx, r) in records.iter().enumerate() {
        by_n.entry(r.n_nodes).or_default().push(idx);
    }
    for (n, mut idxs) in by_n {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(n as u64);
        idxs.shuffle(&mut rng);
        let (test, dev, _) = split_sizes(idxs.len());
        for (rank, idx) in idxs.into_iter().enumerate() {
            records[idx].split = Some(if rank < test {
                Split::Test
            } else if rank < test + dev {
                Split::Dev
            } else {
                Split::Train
            });
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SubsetStats {
    pub samples: usize,
    pub test: usize,
    pub dev: usize,
    pub train: usize,
    pub mean_premise_tokens: f64,
    pub mean_hypothesis_tokens: f64,
    pub valid_label_pct: f64,
    pub vocab_size: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub overall: SubsetStats,
    pub by_n: BTreeMap<usize, SubsetStats>,
}

fn subset_stats<'a>(records: impl Iterator<Item = &'a SampleRecord>) -> SubsetStats {
    let mut s = SubsetStats::default();
    let mut premise_tokens = 0usize;
    let mut hypothesis_tokens = 0usize;
    let mut valid = 0usize;
    let mut vocab: BTreeSet<&str> = BTreeSet::new();
    let mut premise_cache: HashMap<&str, usize> = HashMap::new();
    for r in records {
        s.samples += 1;
        match r.split {
            Some(Split::Test) => s.test += 1,
            Some(Split::Dev) => s.dev += 1,
            Some(Split::Train) => s.train += 1,
            None => {}
        }
        premise_tokens += *premise_cache.entry(&r.premise).or_insert_with(|| {
            let toks = tokenize(&r.premise);
            vocab.extend(toks.iter().copied());
            toks.len()
        });
        let toks = tokenize(&r.hypothesis);
        hypothesis_tokens += toks.len();
        vocab.extend(toks);
        valid += r.label as usize;
    }
    if s.samples > 0 {
        let total = s.samples as f64;
        s.mean_premise_tokens = premise_tokens as f64 / total;
        s.mean_hypothesis_tokens = hypothesis_tokens as f64 / total;
        s.valid_label_pct = 100.0 * valid as f64 / total;
    }
    s.vocab_size = vocab.len();
    s
}

pub fn stats(records: &[SampleRecord]) -> CorpusStats {
    let mut ns: Vec<usize> = records.iter().map(|r| r.n_nodes).collect();
    ns.sort_unstable();
    ns.dedup();
    CorpusStats {
        overall: subset_stats(records.iter()),
        by_n: ns.into_iter().map(|n| (n, subset_stats(records.iter().filter(|r| r.n_nodes == n)))).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Jsonl,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Jsonl => "jsonl",
            Format::Csv => "csv",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "jsonl" => Ok(Format::Jsonl),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format {other:?}")),
        }
    }
}

/// Flat CSV row; `pair` is written as `i-j` and an unassigned split as an empty cell.
#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    id: String,
    n_nodes: usize,
    mec_key: String,
    pair: String,
    relation: RelationType,
    premise: String,
    hypothesis: String,
    label: u8,
    split: Option<Split>,
    perturbation: Perturbation,
}

impl From<&SampleRecord> for CsvRow {
    fn from(r: &SampleRecord) -> Self {
        CsvRow {
            id: r.id.clone(),
            n_nodes: r.n_nodes,
            mec_key: r.mec_key.clone(),
            pair: format!("{}-{}", r.pair[0], r.pair[1]),
            relation: r.relation,
            premise: r.premise.to_string(),
            hypothesis: r.hypothesis.clone(),
            label: r.label,
            split: r.split,
            perturbation: r.perturbation,
        }
    }
}

impl TryFrom<CsvRow> for SampleRecord {
    type Error = String;

    fn try_from(row: CsvRow) -> Result<Self, Self::Error> {
        let (a, b) = row.pair.split_once('-').ok_or_else(|| format!("pair {:?} is not i-j", row.pair))?;
        let parse = |s: &str| s.parse::<usize>().map_err(|e| format!("pair {:?}: {e}", row.pair));
        Ok(SampleRecord {
            id: row.id,
            n_nodes: row.n_nodes,
            mec_key: row.mec_key,
            pair: [parse(a)?, parse(b)?],
            relation: row.relation,
            premise: row.premise.into(),
            hypothesis: row.hypothesis,
            label: row.label,
            split: row.split,
            perturbation: row.perturbation,
        })
    }
}

/// Writes one record per line (jsonl) or a headed CSV table; UTF-8 with LF endings.
pub fn write_records(records: &[SampleRecord], path: &Path, format: Format) -> Result<(), DatasetError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    match format {
        Format::Jsonl => {
            for r in records {
                serde_json::to_writer(&mut w, r).map_err(|e| io_err(path)(e.into()))?;
                w.write_all(b"\n").map_err(io_err(path))?;
            }
        }
        Format::Csv => {
            let mut cw = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut w);
            for r in records {
                cw.serialize(CsvRow::from(r)).map_err(|e| io_err(path)(std::io::Error::other(e)))?;
            }
            cw.flush().map_err(io_err(path))?;
        }
    }
    w.flush().map_err(io_err(path))
}

pub fn read_records(path: &Path, format: Format) -> Result<Vec<SampleRecord>, DatasetError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    // Identical premises are shared again after loading.
    let mut premises: HashMap<Arc<str>, ()> = HashMap::new();
    let mut intern = |r: &mut SampleRecord| {
        if let Some((k, _)) = premises.get_key_value(&r.premise) {
            r.premise = Arc::clone(k);
        } else {
            premises.insert(Arc::clone(&r.premise), ());
        }
    };
    match format {
        Format::Jsonl => {
            for (idx, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(io_err(path))?;
                if line.trim().is_empty() {
                    continue;
                }
                let mut r: SampleRecord = serde_json::from_str(&line)
                    .map_err(|e| DatasetError::Schema { line: idx + 1, message: e.to_string() })?;
                r.validate().map_err(|message| DatasetError::Schema { line: idx + 1, message })?;
                intern(&mut r);
                out.push(r);
            }
        }
        Format::Csv => {
            let mut rd = csv::Reader::from_reader(BufReader::new(file));
            for (idx, row) in rd.deserialize::<CsvRow>().enumerate() {
                let line = idx + 2;
                let row = row.map_err(|e| DatasetError::Schema { line, message: e.to_string() })?;
                let mut r = SampleRecord::try_from(row).map_err(|message| DatasetError::Schema { line, message })?;
                r.validate().map_err(|message| DatasetError::Schema { line, message })?;
                intern(&mut r);
                out.push(r);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_node_corpus() {
        let recs = build(2, 2, &BuildOptions::default()).unwrap();
        assert_eq!(recs.len(), 24);
        assert!(recs.iter().all(|r| r.label == 0));
        assert!(recs.windows(2).all(|w| w[0].id < w[1].id));
    }

    #[test]
    fn range_errors() {
        assert!(matches!(build(1, 3, &BuildOptions::default()), Err(DatasetError::Range { .. })));
        assert!(matches!(build(4, 3, &BuildOptions::default()), Err(DatasetError::Range { .. })));
        assert!(matches!(build(2, 9, &BuildOptions::default()), Err(DatasetError::Range { .. })));
    }

    #[test]
    fn split_size_rule() {
        assert_eq!(split_sizes(24), (12, 12, 0));
        assert_eq!(split_sizes(180), (90, 90, 0));
        assert_eq!(split_sizes(1440), (144, 144, 1152));
        assert_eq!(split_sizes(17040), (1000, 1000, 15040));
        assert_eq!(split_sizes(397260), (1000, 1000, 395260));
    }

    #[test]
    fn split_assigns_everything() {
        let mut recs = build(2, 4, &BuildOptions::default()).unwrap();
        split(&mut recs, 7);
        let s = stats(&recs);
        assert_eq!((s.by_n[&4].test, s.by_n[&4].dev, s.by_n[&4].train), (144, 144, 1152));
        assert_eq!((s.by_n[&2].test, s.by_n[&2].dev), (12, 12));
        assert!(recs.iter().all(|r| r.split.is_some()));
    }

    #[test]
    fn empty_stats_are_zero() {
        let s = stats(&[]);
        assert_eq!(s.overall, SubsetStats::default());
        assert!(s.by_n.is_empty());
    }

    #[test]
    fn ids_follow_fields() {
        let recs = build(3, 3, &BuildOptions::default()).unwrap();
        for r in &recs {
            assert_eq!(r.id, record_id(r.n_nodes, &r.mec_key, r.pair, r.relation, r.perturbation));
        }
    }
}
