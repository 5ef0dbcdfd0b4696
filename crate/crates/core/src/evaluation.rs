//! Prediction scoring, random baselines, and n-gram/label PMI analysis.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::SampleRecord;
use crate::verbalizer::{is_punctuation, tokenize};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("prediction for unknown id {0:?}")]
    UnknownId(String),
    #[error("duplicate prediction for id {0:?}")]
    DuplicateId(String),
    #[error("label for {id:?} must be 0 or 1, got {label}")]
    NonBinaryLabel { id: String, label: i64 },
    #[error("prediction file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("gold set is empty")]
    EmptyGold,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: String,
    pub label: u8,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Positive-class (label 1) metrics, in percent.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
}

impl From<Confusion> for Metrics {
    fn from(c: Confusion) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { 100.0 * num as f64 / den as f64 };
        let precision = ratio(c.tp, c.tp + c.fp);
        let recall = ratio(c.tp, c.tp + c.fn_);
        let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
        Metrics { f1, precision, recall, accuracy: ratio(c.tp + c.tn, c.total()) }
    }
}

pub fn confusion(predictions: &[Prediction], gold: &[SampleRecord]) -> Result<Confusion, EvalError> {
    let gold: HashMap<&str, u8> = gold.iter().map(|r| (r.id.as_str(), r.label)).collect();
    let mut seen: HashSet<&str> = HashSet::with_capacity(predictions.len());
    let mut c = Confusion::default();
    for p in predictions {
        if p.label > 1 {
            return Err(EvalError::NonBinaryLabel { id: p.id.clone(), label: p.label as i64 });
        }
        let truth = *gold.get(p.id.as_str()).ok_or_else(|| EvalError::UnknownId(p.id.clone()))?;
        if !seen.insert(&p.id) {
            return Err(EvalError::DuplicateId(p.id.clone()));
        }
        match (p.label, truth) {
            (1, 1) => c.tp += 1,
            (1, _) => c.fp += 1,
            (_, 1) => c.fn_ += 1,
            _ => c.tn += 1,
        }
    }
    Ok(c)
}

pub fn score(predictions: &[Prediction], gold: &[SampleRecord]) -> Result<Metrics, EvalError> {
    confusion(predictions, gold).map(Metrics::from)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineKind {
    Majority,
    Uniform,
    Proportional,
}

impl std::str::FromStr for BaselineKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "majority" => Ok(BaselineKind::Majority),
            "uniform" => Ok(BaselineKind::Uniform),
            "proportional" => Ok(BaselineKind::Proportional),
            other => Err(format!("unknown baseline {other:?}")),
        }
    }
}

/// Random or constant predictions for every gold record.
///
/// `positive_rate` is the dev-set share of valid labels, used by the proportional
/// baseline; when absent the gold set's own rate is used.
pub fn baseline(
    kind: BaselineKind,
    gold: &[SampleRecord],
    seed: u64,
    positive_rate: Option<f64>,
) -> Result<Vec<Prediction>, EvalError> {
    if gold.is_empty() {
        return Err(EvalError::EmptyGold);
    }
    let positives = gold.iter().filter(|r| r.label == 1).count();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let p = match kind {
        BaselineKind::Majority => {
            let majority = u8::from(2 * positives > gold.len());
            return Ok(gold.iter().map(|r| Prediction { id: r.id.clone(), label: majority }).collect());
        }
        BaselineKind::Uniform => 0.5,
        BaselineKind::Proportional => positive_rate.unwrap_or(positives as f64 / gold.len() as f64),
    };
    Ok(gold.iter().map(|r| Prediction { id: r.id.clone(), label: u8::from(rng.gen_bool(p)) }).collect())
}

pub fn read_predictions(path: &Path) -> Result<Vec<Prediction>, EvalError> {
    #[derive(Deserialize)]
    struct Raw {
        id: String,
        label: i64,
    }
    let file = File::open(path).map_err(|source| EvalError::Io { path: path.display().to_string(), source })?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| EvalError::Io { path: path.display().to_string(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: Raw =
            serde_json::from_str(&line).map_err(|e| EvalError::Parse { line: idx + 1, message: e.to_string() })?;
        if !(0..=1).contains(&raw.label) {
            return Err(EvalError::NonBinaryLabel { id: raw.id, label: raw.label });
        }
        out.push(Prediction { id: raw.id, label: raw.label as u8 });
    }
    Ok(out)
}

pub fn write_predictions(predictions: &[Prediction], path: &Path) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for p in predictions {
        serde_json::to_writer(&mut w, p)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

/// Association of one n-gram with each label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmiRow {
    pub ngram: String,
    pub pmi_neg: f64,
    pub pmi_pos: f64,
    pub abs_diff: f64,
}

/// Which text fields contribute n-grams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PmiSource {
    Hypothesis,
    #[default]
    PremiseAndHypothesis,
}

fn ngrams(text: &str, max_len: usize, into: &mut HashSet<String>) {
    let words: Vec<&str> = tokenize(text).into_iter().filter(|t| !is_punctuation(t)).collect();
    for len in 1..=max_len {
        for w in words.windows(len) {
            into.insert(w.join(" "));
        }
    }
}

/// PMI of every n-gram of at most `max_len` words with each label.
///
/// Each sample contributes each distinct n-gram once. Counts get add-one smoothing on
/// both sides: `p(label | g) = (c(g, label) + 1) / (c(g) + 2)`,
/// `p(label) = (c(label) + 1) / (N + 2)` and `PMI = ln(p(label | g) / p(label))`, so an
/// n-gram present in every sample scores exactly zero. Rows are sorted by `abs_diff` descending, ties by
/// n-gram text.
pub fn pmi_table(records: &[SampleRecord], max_len: usize, source: PmiSource) -> Vec<PmiRow> {
    let total = records.len();
    if total == 0 {
        return Vec::new();
    }
    let mut counts: HashMap<String, [usize; 2]> = HashMap::new();
    let mut label_counts = [0usize; 2];

    // Samples sharing a premise share its n-gram set; only hypothesis-specific n-grams
    // need per-sample handling.
    let mut by_premise: HashMap<&str, Vec<&SampleRecord>> = HashMap::new();
    for r in records {
        label_counts[r.label.min(1) as usize] += 1;
        let key = match source {
            PmiSource::PremiseAndHypothesis => &*r.premise,
            PmiSource::Hypothesis => "",
        };
        by_premise.entry(key).or_default().push(r);
    }
    let mut premise_grams = HashSet::new();
    let mut hyp_grams = HashSet::new();
    for (premise, group) in by_premise {
        premise_grams.clear();
        ngrams(premise, max_len, &mut premise_grams);
        let mut group_labels = [0usize; 2];
        for r in &group {
            group_labels[r.label.min(1) as usize] += 1;
        }
        for g in &premise_grams {
            let c = counts.entry(g.clone()).or_default();
            c[0] += group_labels[0];
            c[1] += group_labels[1];
        }
        let mut by_hypothesis: HashMap<&str, [usize; 2]> = HashMap::new();
        for r in &group {
            by_hypothesis.entry(&r.hypothesis).or_default()[r.label.min(1) as usize] += 1;
        }
        for (hyp, labels) in by_hypothesis {
            hyp_grams.clear();
            ngrams(hyp, max_len, &mut hyp_grams);
            for g in hyp_grams.iter().filter(|g| !premise_grams.contains(*g)) {
                let c = counts.entry(g.clone()).or_default();
                c[0] += labels[0];
                c[1] += labels[1];
            }
        }
    }

    let smoothed = (total + 2) as f64;
    let prior = [(label_counts[0] + 1) as f64 / smoothed, (label_counts[1] + 1) as f64 / smoothed];
    let pmi = |c: [usize; 2], l: usize| {
        let cond = (c[l] as f64 + 1.0) / ((c[0] + c[1]) as f64 + 2.0);
        (cond / prior[l]).ln()
    };
    let mut rows: Vec<PmiRow> = counts
        .into_iter()
        .map(|(ngram, c)| {
            let (pmi_neg, pmi_pos) = (pmi(c, 0), pmi(c, 1));
            PmiRow { ngram, pmi_neg, pmi_pos, abs_diff: (pmi_neg - pmi_pos).abs() }
        })
        .collect();
    rows.sort_by(|a, b| b.abs_diff.total_cmp(&a.abs_diff).then_with(|| a.ngram.cmp(&b.ngram)));
    rows
}

/// TSV with header `ngram\tpmi_neg\tpmi_pos\tabs_diff`.
pub fn write_pmi_tsv(rows: &[PmiRow], path: &Path) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "ngram\tpmi_neg\tpmi_pos\tabs_diff")?;
    for r in rows {
        writeln!(w, "{}\t{:.6}\t{:.6}\t{:.6}", r.ngram, r.pmi_neg, r.pmi_pos, r.abs_diff)?;
    }
    w.flush()
}
