//! Python bindings for graph enumeration, equivalence classes, labeling and the corpus tools.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use causeforge::dataset::{self, BuildOptions, Format, SampleRecord, SubsetStats};
use causeforge::discovery;
use causeforge::equivalence::{self, Cpdag, Mec};
use causeforge::evaluation::{self, BaselineKind, PmiSource, Prediction};
use causeforge::graph::{self, default_names, NodeSet};
use causeforge::independence;
use causeforge::labeling::{self, Hypothesis, RelationType};
use causeforge::verbalizer::{self, TemplateSet};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn hypothesis(relation: &str, i: usize, j: usize) -> PyResult<Hypothesis> {
    let relation: RelationType = relation.parse().map_err(value_err)?;
    Hypothesis::new(relation, i, j).ok_or_else(|| value_err("hypothesis needs two distinct variables"))
}

fn node_set(n: usize, nodes: &[usize]) -> PyResult<NodeSet> {
    match nodes.iter().find(|&&v| v >= n) {
        Some(v) => Err(value_err(format!("node {v} out of range for {n} nodes"))),
        None => Ok(nodes.iter().copied().collect()),
    }
}

fn cpdag_dict<'py>(py: Python<'py>, c: &Cpdag) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("directed", c.directed_edges())?;
    d.set_item("undirected", c.undirected_edges())?;
    Ok(d)
}

#[pyclass(name = "Dag", module = "_causeforge", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyDag(graph::Dag);

#[pymethods]
impl PyDag {
    #[new]
    #[pyo3(signature = (n, edges, names=None))]
    fn new(n: usize, edges: Vec<(usize, usize)>, names: Option<Vec<String>>) -> PyResult<Self> {
        let mut g = graph::Dag::from_edges(n, &edges).map_err(value_err)?;
        if let Some(names) = names {
            g = g.with_names(&names).map_err(value_err)?;
        }
        Ok(PyDag(g))
    }

    #[staticmethod]
    fn parse(names: Vec<String>, text: &str) -> PyResult<Self> {
        graph::Dag::parse_edge_list(&names, text).map(PyDag).map_err(value_err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.node_count()
    }

    #[getter]
    fn names(&self) -> Vec<String> {
        self.0.names().to_vec()
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.0.edges().collect()
    }

    fn has_edge(&self, from: usize, to: usize) -> bool {
        from < self.0.node_count() && to < self.0.node_count() && self.0.has_edge(from, to)
    }

    /// Parents, children, ancestors and descendants of `node` as sorted index lists.
    fn kin<'py>(&self, py: Python<'py>, node: usize) -> PyResult<Bound<'py, PyDict>> {
        let k = self.0.kin(node).map_err(value_err)?;
        let d = PyDict::new(py);
        d.set_item("parents", k.parents.iter().collect::<Vec<_>>())?;
        d.set_item("children", k.children.iter().collect::<Vec<_>>())?;
        d.set_item("ancestors", k.ancestors.iter().collect::<Vec<_>>())?;
        d.set_item("descendants", k.descendants.iter().collect::<Vec<_>>())?;
        Ok(d)
    }

    fn canonical_key(&self) -> String {
        graph::canonical_key(&self.0).to_hex()
    }

    fn to_edge_list(&self) -> String {
        self.0.to_edge_list()
    }

    fn to_dot(&self) -> String {
        self.0.to_dot()
    }

    fn __repr__(&self) -> String {
        format!("Dag({:?})", self.0.to_edge_list())
    }
}

#[pyclass(name = "Mec", module = "_causeforge", frozen)]
struct PyMec(Mec);

#[pymethods]
impl PyMec {
    #[getter]
    fn key(&self) -> String {
        self.0.key.to_hex()
    }

    #[getter]
    fn representative(&self) -> PyDag {
        PyDag(self.0.representative.clone())
    }

    #[getter]
    fn members(&self) -> Vec<PyDag> {
        self.0.members.iter().cloned().map(PyDag).collect()
    }

    fn cpdag<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        cpdag_dict(py, &self.0.cpdag)
    }

    /// 1 when the relation holds in every member of the class.
    fn label(&self, relation: &str, i: usize, j: usize) -> PyResult<u8> {
        let n = self.0.node_count();
        if i >= n || j >= n {
            return Err(value_err(format!("pair ({i}, {j}) out of range for {n} nodes")));
        }
        Ok(labeling::label(&self.0, &hypothesis(relation, i, j)?))
    }

    fn __len__(&self) -> usize {
        self.0.members.len()
    }

    fn __repr__(&self) -> String {
        format!("Mec(key={:?}, members={})", self.0.key.to_hex(), self.0.members.len())
    }
}

#[pyclass(name = "Sample", module = "_causeforge", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PySample {
    id: String,
    n_nodes: usize,
    mec_key: String,
    pair: (usize, usize),
    relation: String,
    premise: String,
    hypothesis: String,
    label: u8,
    split: Option<String>,
    perturbation: String,
}

#[pymethods]
impl PySample {
    fn __repr__(&self) -> String {
        format!("Sample(id={:?}, label={})", self.id, self.label)
    }
}

#[pyclass(name = "Corpus", module = "_causeforge", frozen)]
struct PyCorpus(Vec<SampleRecord>);

fn sample(r: &SampleRecord) -> PySample {
    PySample {
        id: r.id.clone(),
        n_nodes: r.n_nodes,
        mec_key: r.mec_key.clone(),
        pair: (r.pair[0], r.pair[1]),
        relation: r.relation.name().to_string(),
        premise: r.premise.to_string(),
        hypothesis: r.hypothesis.clone(),
        label: r.label,
        split: r.split.map(|s| s.to_string()),
        perturbation: r.perturbation.to_string(),
    }
}

fn format_of(path: &Path) -> PyResult<Format> {
    path.extension().and_then(|e| e.to_str()).unwrap_or("").parse().map_err(value_err)
}

fn subset_dict<'py>(py: Python<'py>, s: &SubsetStats) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("samples", s.samples)?;
    d.set_item("test", s.test)?;
    d.set_item("dev", s.dev)?;
    d.set_item("train", s.train)?;
    d.set_item("mean_premise_tokens", s.mean_premise_tokens)?;
    d.set_item("mean_hypothesis_tokens", s.mean_hypothesis_tokens)?;
    d.set_item("valid_label_pct", s.valid_label_pct)?;
    d.set_item("vocab_size", s.vocab_size)?;
    Ok(d)
}

#[pymethods]
impl PyCorpus {
    /// Samples for every class on `n_min..=n_max` nodes; assigns splits when `seed` is given.
    #[new]
    #[pyo3(signature = (n_min=2, n_max=6, seed=None))]
    fn new(py: Python<'_>, n_min: usize, n_max: usize, seed: Option<u64>) -> PyResult<Self> {
        let mut records = py.detach(|| dataset::build(n_min, n_max, &BuildOptions::default())).map_err(value_err)?;
        if let Some(seed) = seed {
            dataset::split(&mut records, seed);
        }
        Ok(PyCorpus(records))
    }

    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        let format = format_of(&path)?;
        dataset::read_records(&path, format).map(PyCorpus).map_err(value_err)
    }

    fn write(&self, path: PathBuf) -> PyResult<()> {
        let format = format_of(&path)?;
        dataset::write_records(&self.0, &path, format).map_err(value_err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __getitem__(&self, index: isize) -> PyResult<PySample> {
        let len = self.0.len() as isize;
        let k = if index < 0 { index + len } else { index };
        if !(0..len).contains(&k) {
            return Err(pyo3::exceptions::PyIndexError::new_err("sample index out of range"));
        }
        Ok(sample(&self.0[k as usize]))
    }

    /// Samples of one split, or all of them.
    #[pyo3(signature = (split=None))]
    fn samples(&self, split: Option<&str>) -> PyResult<Vec<PySample>> {
        let want = split.map(|s| s.parse::<dataset::Split>().map_err(value_err)).transpose()?;
        Ok(self.0.iter().filter(|r| want.is_none() || r.split == want).map(sample).collect())
    }

    fn subset(&self, split: &str) -> PyResult<PyCorpus> {
        let want: dataset::Split = split.parse().map_err(value_err)?;
        Ok(PyCorpus(self.0.iter().filter(|r| r.split == Some(want)).cloned().collect()))
    }

    fn stats<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let s = dataset::stats(&self.0);
        let d = PyDict::new(py);
        d.set_item("overall", subset_dict(py, &s.overall)?)?;
        let by_n = PyDict::new(py);
        for (n, sub) in &s.by_n {
            by_n.set_item(n, subset_dict(py, sub)?)?;
        }
        d.set_item("by_n", by_n)?;
        Ok(d)
    }

    /// Copy with a test-time perturbation applied to every sample.
    fn perturb(&self, kind: &str) -> PyResult<PyCorpus> {
        let f = match kind {
            "refactor" => verbalizer::refactor_variables,
            "paraphrase" => verbalizer::paraphrase,
            other => return Err(value_err(format!("unknown perturbation {other:?}"))),
        };
        self.0.iter().map(f).collect::<Result<_, _>>().map(PyCorpus).map_err(value_err)
    }

    /// F1, precision, recall and accuracy (percent) of `predictions` keyed by sample id.
    fn score(&self, predictions: HashMap<String, u8>) -> PyResult<HashMap<&'static str, f64>> {
        let p: Vec<Prediction> = predictions.into_iter().map(|(id, label)| Prediction { id, label }).collect();
        let m = evaluation::score(&p, &self.0).map_err(value_err)?;
        Ok(HashMap::from([("f1", m.f1), ("precision", m.precision), ("recall", m.recall), ("accuracy", m.accuracy)]))
    }

    #[pyo3(signature = (kind, seed=0, positive_rate=None))]
    fn baseline(&self, kind: &str, seed: u64, positive_rate: Option<f64>) -> PyResult<HashMap<String, u8>> {
        let kind: BaselineKind = kind.parse().map_err(value_err)?;
        let p = evaluation::baseline(kind, &self.0, seed, positive_rate).map_err(value_err)?;
        Ok(p.into_iter().map(|x| (x.id, x.label)).collect())
    }

    /// `(ngram, pmi_neg, pmi_pos, abs_diff)` rows sorted by decreasing `abs_diff`.
    #[pyo3(signature = (max_len=4, top=None, hypothesis_only=false))]
    fn pmi(
        &self,
        py: Python<'_>,
        max_len: usize,
        top: Option<usize>,
        hypothesis_only: bool,
    ) -> Vec<(String, f64, f64, f64)> {
        let source = if hypothesis_only { PmiSource::Hypothesis } else { PmiSource::PremiseAndHypothesis };
        let rows = py.detach(|| evaluation::pmi_table(&self.0, max_len, source));
        rows.into_iter().take(top.unwrap_or(usize::MAX)).map(|r| (r.ngram, r.pmi_neg, r.pmi_pos, r.abs_diff)).collect()
    }
}

#[pyfunction]
fn enumerate_dags(n: usize) -> PyResult<Vec<PyDag>> {
    Ok(graph::enumerate_dags(n).map_err(value_err)?.into_iter().map(PyDag).collect())
}

#[pyfunction]
fn group_mecs(py: Python<'_>, n: usize) -> PyResult<Vec<PyMec>> {
    let mecs = py.detach(|| {
        graph::enumerate_dags(n).map_err(value_err).and_then(|d| equivalence::group_mecs(&d).map_err(value_err))
    })?;
    Ok(mecs.into_iter().map(PyMec).collect())
}

#[pyfunction]
#[pyo3(signature = (dag, i, j, given=Vec::new()))]
fn d_separated(dag: &PyDag, i: usize, j: usize, given: Vec<usize>) -> PyResult<bool> {
    let z = node_set(dag.0.node_count(), &given)?;
    independence::d_separated(&dag.0, i, j, z).map_err(value_err)
}

/// Every separating set for each pair `(i, j)`, `i < j`.
#[pyfunction]
fn ci_signature(dag: &PyDag) -> HashMap<(usize, usize), Vec<Vec<usize>>> {
    let sig = independence::ci_signature(&dag.0);
    independence::pairs(dag.0.node_count())
        .map(|(i, j)| ((i, j), sig.separating_sets(i, j).iter().map(|s| s.iter().collect()).collect()))
        .collect()
}

#[pyfunction]
fn cpdag<'py>(py: Python<'py>, dag: &PyDag) -> PyResult<Bound<'py, PyDict>> {
    cpdag_dict(py, &equivalence::cpdag_of(&dag.0))
}

/// PC run against the exact independence relation of `dag`.
#[pyfunction]
fn pc<'py>(py: Python<'py>, dag: &PyDag) -> PyResult<Bound<'py, PyDict>> {
    let sig = independence::ci_signature(&dag.0);
    let c = discovery::pc(&sig, dag.0.node_count()).map_err(value_err)?;
    cpdag_dict(py, &c)
}

#[pyfunction]
fn mec_members(dag: &PyDag) -> PyResult<Vec<PyDag>> {
    let members = equivalence::mec_members(&equivalence::cpdag_of(&dag.0)).map_err(value_err)?;
    Ok(members.into_iter().map(PyDag).collect())
}

#[pyfunction]
fn relation_holds(dag: &PyDag, relation: &str, i: usize, j: usize) -> PyResult<bool> {
    let n = dag.0.node_count();
    if i >= n || j >= n {
        return Err(value_err(format!("pair ({i}, {j}) out of range for {n} nodes")));
    }
    Ok(labeling::relation_holds(&dag.0, &hypothesis(relation, i, j)?))
}

#[pyfunction]
fn verbalize_premise(dag: &PyDag) -> PyResult<String> {
    let sig = independence::ci_signature(&dag.0);
    verbalizer::verbalize_premise(&sig, dag.0.names()).map(|p| p.into_string()).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (relation, i, j, names=None))]
fn verbalize_hypothesis(relation: &str, i: usize, j: usize, names: Option<Vec<String>>) -> PyResult<String> {
    let names = names.unwrap_or_else(|| default_names(i.max(j) + 1));
    if i >= names.len() || j >= names.len() {
        return Err(value_err("variable index beyond the name list"));
    }
    Ok(verbalizer::verbalize_hypothesis(&hypothesis(relation, i, j)?, &names, &TemplateSet::default_set()))
}

#[pyfunction]
fn tokenize(text: &str) -> Vec<String> {
    verbalizer::tokenize(text).into_iter().map(str::to_string).collect()
}

#[pymodule]
pub fn _causeforge(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDag>()?;
    m.add_class::<PyMec>()?;
    m.add_class::<PySample>()?;
    m.add_class::<PyCorpus>()?;
    m.add_function(wrap_pyfunction!(enumerate_dags, m)?)?;
    m.add_function(wrap_pyfunction!(group_mecs, m)?)?;
    m.add_function(wrap_pyfunction!(d_separated, m)?)?;
    m.add_function(wrap_pyfunction!(ci_signature, m)?)?;
    m.add_function(wrap_pyfunction!(cpdag, m)?)?;
    m.add_function(wrap_pyfunction!(pc, m)?)?;
    m.add_function(wrap_pyfunction!(mec_members, m)?)?;
    m.add_function(wrap_pyfunction!(relation_holds, m)?)?;
    m.add_function(wrap_pyfunction!(verbalize_premise, m)?)?;
    m.add_function(wrap_pyfunction!(verbalize_hypothesis, m)?)?;
    m.add_function(wrap_pyfunction!(tokenize, m)?)?;
    m.add("RELATIONS", RelationType::ALL.map(|r| r.name()).to_vec())?;
    Ok(())
}
