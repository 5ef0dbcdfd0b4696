//! Natural-language rendering of premises and hypotheses, plus the two text perturbations.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Perturbation, SampleRecord};
use crate::graph::NodeSet;
use crate::independence::{pairs, CiSignature};
use crate::labeling::{Hypothesis, RelationType};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerbalizeError {
    #[error("expected {expected} variable names, got {got}")]
    NameCount { expected: usize, got: usize },
    #[error("template for {relation} must contain {{Var i}} and {{Var j}} exactly once: {template:?}")]
    Template { relation: RelationType, template: String },
    #[error("template override line {line}: {message}")]
    Override { line: usize, message: String },
    #[error("cannot parse premise: {0}")]
    Premise(String),
    #[error("hypothesis does not match any template: {0:?}")]
    UnrecognizedHypothesis(String),
    #[error("variable {0:?} is not a single letter")]
    NonAlphabeticName(String),
}

pub const VAR_I: &str = "{Var i}";
pub const VAR_J: &str = "{Var j}";

const DEFAULT_TEMPLATES: [&str; 6] = [
    "{Var i} directly causes {Var j}.",
    "{Var i} causes something else which causes {Var j}.",
    "{Var j} directly causes {Var i}.",
    "{Var j} is a cause for {Var i}, but not a direct one.",
    "There exists at least one collider (i.e., common effect) of {Var i} and {Var j}.",
    "There exists at least one confounder (i.e., common cause) of {Var i} and {Var j}.",
];

const PARAPHRASE_TEMPLATES: [&str; 6] = [
    "{Var i} directly affects {Var j}.",
    "{Var i} influences {Var j} through some mediator(s).",
    "{Var j} directly affects {Var i}.",
    "{Var j} influences {Var i} through some mediator(s).",
    "{Var i} and {Var j} together cause some other variable(s).",
    "Some variable(s) cause(s) both {Var i} and {Var j}.",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TemplateStyle {
    #[default]
    Default,
    Paraphrase,
}

impl std::str::FromStr for TemplateStyle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "default" => Ok(TemplateStyle::Default),
            "paraphrase" => Ok(TemplateStyle::Paraphrase),
            other => Err(format!("unknown template style {other:?}")),
        }
    }
}

/// One hypothesis template per relation, each with a `{Var i}` and a `{Var j}` slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet {
    pub style: TemplateStyle,
    templates: [String; 6],
}

impl TemplateSet {
    pub fn new(style: TemplateStyle) -> Self {
        let src = match style {
            TemplateStyle::Default => DEFAULT_TEMPLATES,
            TemplateStyle::Paraphrase => PARAPHRASE_TEMPLATES,
        };
        TemplateSet { style, templates: src.map(String::from) }
    }

    pub fn default_set() -> Self {
        Self::new(TemplateStyle::Default)
    }

    pub fn paraphrase_set() -> Self {
        Self::new(TemplateStyle::Paraphrase)
    }

    pub fn template(&self, relation: RelationType) -> &str {
        &self.templates[relation.index()]
    }

    pub fn set_template(&mut self, relation: RelationType, template: &str) -> Result<(), VerbalizeError> {
        if template.matches(VAR_I).count() != 1 || template.matches(VAR_J).count() != 1 {
            return Err(VerbalizeError::Template { relation, template: template.to_string() });
        }
        self.templates[relation.index()] = template.to_string();
        Ok(())
    }

    /// Applies `key=value` lines (keys are relation slugs such as `is_parent`) on top of
    /// `self`. Blank lines and `#` comments are skipped.
    pub fn with_overrides(mut self, text: &str) -> Result<Self, VerbalizeError> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| VerbalizeError::Override { line: idx + 1, message: "missing '='".into() })?;
            let relation: RelationType =
                key.trim().parse().map_err(|message| VerbalizeError::Override { line: idx + 1, message })?;
            self.set_template(relation, value.trim())?;
        }
        Ok(self)
    }

    pub fn render(&self, relation: RelationType, name_i: &str, name_j: &str) -> String {
        self.template(relation).replace(VAR_I, name_i).replace(VAR_J, name_j)
    }

    /// Inverse of [`render`](Self::render) for a known relation: recovers `(name_i, name_j)`.
    pub fn parse_as(&self, relation: RelationType, text: &str) -> Option<(String, String)> {
        match_template(self.template(relation), text)
    }

    /// First relation (in [`RelationType::ALL`] order) whose template matches `text`.
    /// Mirror pairs such as Is-Parent/Is-Child share a surface form, so the result
    /// renders back to `text` but need not be the relation that produced it.
    pub fn parse(&self, text: &str) -> Option<(RelationType, String, String)> {
        RelationType::ALL.into_iter().find_map(|r| {
            let (i, j) = self.parse_as(r, text)?;
            Some((r, i, j))
        })
    }
}

fn match_template(template: &str, text: &str) -> Option<(String, String)> {
    let pi = template.find(VAR_I)?;
    let pj = template.find(VAR_J)?;
    let (first, second, i_first) = if pi < pj { (pi, pj, true) } else { (pj, pi, false) };
    let prefix = &template[..first];
    let middle = &template[first + VAR_I.len()..second];
    let suffix = &template[second + VAR_I.len()..];
    let rest = text.strip_prefix(prefix)?.strip_suffix(suffix)?;
    let (a, b) = rest.split_once(middle)?;
    if !is_name(a) || !is_name(b) {
        return None;
    }
    let (a, b) = (a.to_string(), b.to_string());
    Some(if i_first { (a, b) } else { (b, a) })
}

fn is_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_alphanumeric() || c == '_')
}

/// `A`, `A and B`, or `A, B, C`.
pub fn join_names<S: AsRef<str>>(names: &[S]) -> String {
    match names {
        [a, b] => format!("{} and {}", a.as_ref(), b.as_ref()),
        _ => names.iter().map(AsRef::as_ref).collect::<Vec<_>>().join(", "),
    }
}

fn split_names(list: &str) -> Vec<String> {
    if list.contains(", ") {
        list.split(", ").map(String::from).collect()
    } else {
        list.split(" and ").map(String::from).collect()
    }
}

/// Correlation statement for one equivalence class.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PremiseText(String);

impl PremiseText {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for PremiseText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn preamble<S: AsRef<str>>(names: &[S]) -> String {
    let n = names.len();
    format!(
        "Suppose there is a closed system of {n} variables, {}. All the statistical relations among these {n} variables are as follows:",
        join_names(names)
    )
}

pub fn verbalize_premise<S: AsRef<str>>(sig: &CiSignature, names: &[S]) -> Result<PremiseText, VerbalizeError> {
    let n = sig.node_count();
    if names.len() != n {
        return Err(VerbalizeError::NameCount { expected: n, got: names.len() });
    }
    let mut out = preamble(names);
    for (i, j) in pairs(n) {
        let (x, y) = (names[i].as_ref(), names[j].as_ref());
        let sets = sig.separating_sets(i, j);
        if sets.is_empty() {
            out.push_str(&format!(" {x} correlates with {y}."));
        }
        for z in sets {
            if z.is_empty() {
                out.push_str(&format!(" {x} is independent of {y}."));
            } else {
                let given: Vec<&str> = z.iter().map(|v| names[v].as_ref()).collect();
                out.push_str(&format!(" {x} is independent of {y} given {}.", join_names(&given)));
            }
        }
    }
    Ok(PremiseText(out))
}

/// Variable names listed in a premise preamble.
pub fn premise_names(text: &str) -> Result<Vec<String>, VerbalizeError> {
    let bad = || VerbalizeError::Premise("missing closed-system preamble".into());
    let rest = text.strip_prefix("Suppose there is a closed system of ").ok_or_else(bad)?;
    let (count, rest) = rest.split_once(" variables, ").ok_or_else(bad)?;
    let n: usize = count.parse().map_err(|_| bad())?;
    let (list, _) = rest.split_once(". All the statistical relations").ok_or_else(bad)?;
    let names = split_names(list);
    if names.len() != n {
        return Err(VerbalizeError::Premise(format!("preamble announces {n} variables but lists {}", names.len())));
    }
    Ok(names)
}

/// Recovers the signature and variable names from a rendered premise.
pub fn parse_premise(text: &str) -> Result<(CiSignature, Vec<String>), VerbalizeError> {
    let names = premise_names(text)?;
    let n = names.len();
    let head = preamble(&names);
    let body =
        text.strip_prefix(head.as_str()).ok_or_else(|| VerbalizeError::Premise("preamble does not match".into()))?;
    let index = |name: &str| {
        names
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| VerbalizeError::Premise(format!("unknown variable {name:?}")))
    };
    let mut sets: Vec<Vec<NodeSet>> = vec![Vec::new(); n * n.saturating_sub(1) / 2];
    let mut correlated = vec![false; sets.len()];
    for sentence in body.split('.').map(str::trim).filter(|s| !s.is_empty()) {
        let (i, j, z) = if let Some((x, y)) = sentence.split_once(" correlates with ") {
            (index(x)?, index(y)?, None)
        } else if let Some((x, rest)) = sentence.split_once(" is independent of ") {
            match rest.split_once(" given ") {
                Some((y, list)) => {
                    let z = split_names(list).iter().map(|s| index(s)).collect::<Result<NodeSet, _>>()?;
                    (index(x)?, index(y)?, Some(z))
                }
                None => (index(x)?, index(rest)?, Some(NodeSet::EMPTY)),
            }
        } else {
            return Err(VerbalizeError::Premise(format!("unrecognized statement {sentence:?}")));
        };
        if i == j {
            return Err(VerbalizeError::Premise(format!("statement relates {} to itself", names[i])));
        }
        let p = crate::independence::pair_index(n, i, j);
        match z {
            Some(z) => sets[p].push(z),
            None => correlated[p] = true,
        }
    }
    for (p, (i, j)) in pairs(n).enumerate() {
        if correlated[p] == !sets[p].is_empty() {
            return Err(VerbalizeError::Premise(format!(
                "pair {}/{} must be either correlated or have separating sets",
                names[i], names[j]
            )));
        }
    }
    let sig = CiSignature::from_sets(n, sets).map_err(|e| VerbalizeError::Premise(e.to_string()))?;
    Ok((sig, names))
}

pub fn verbalize_hypothesis<S: AsRef<str>>(h: &Hypothesis, names: &[S], t: &TemplateSet) -> String {
    t.render(h.relation, names[h.i].as_ref(), names[h.j].as_ref())
}

/// Whitespace split, then leading and trailing `.,;:()` peeled off as their own tokens.
pub fn tokenize(text: &str) -> Vec<&str> {
    const PUNCT: &[char] = &['.', ',', ';', ':', '(', ')'];
    let mut out = Vec::new();
    for word in text.split_whitespace() {
        let mut core = word;
        let mut lead = Vec::new();
        while let Some(c) = core.chars().next().filter(|c| PUNCT.contains(c)) {
            lead.push(&core[..c.len_utf8()]);
            core = &core[c.len_utf8()..];
        }
        let mut trail = Vec::new();
        while let Some(c) = core.chars().last().filter(|c| PUNCT.contains(c)) {
            let at = core.len() - c.len_utf8();
            trail.push(&core[at..]);
            core = &core[..at];
        }
        out.extend(lead);
        if !core.is_empty() {
            out.push(core);
        }
        out.extend(trail.into_iter().rev());
    }
    out
}

/// Token is one of the punctuation marks [`tokenize`] splits off.
pub fn is_punctuation(token: &str) -> bool {
    matches!(token, "." | "," | ";" | ":" | "(" | ")")
}

/// Reverse-alphabet image of a single uppercase letter (`A <-> Z`, `B <-> Y`, ...).
pub fn mirror_letter(c: char) -> Option<char> {
    c.is_ascii_uppercase().then(|| (b'Z' - (c as u8 - b'A')) as char)
}

/// Replaces every whole-word occurrence of a name in `names` by its mirror image.
fn mirror_words(text: &str, names: &[String]) -> String {
    let mut out = String::with_capacity(text.len());
    let mut word = String::new();
    let flush = |word: &mut String, out: &mut String| {
        if names.iter().any(|n| n == word) {
            let c = word.chars().next().expect("non-empty name");
            out.push(mirror_letter(c).expect("validated letter"));
        } else {
            out.push_str(word);
        }
        word.clear();
    };
    for c in text.chars() {
        if c.is_alphanumeric() {
            word.push(c);
        } else {
            flush(&mut word, &mut out);
            out.push(c);
        }
    }
    flush(&mut word, &mut out);
    out
}

/// Mirrors the variable alphabet in premise and hypothesis; label is untouched.
pub fn refactor_variables(sample: &SampleRecord) -> Result<SampleRecord, VerbalizeError> {
    let names = premise_names(&sample.premise)?;
    for name in &names {
        let mut chars = name.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) if c.is_ascii_uppercase() => {}
            _ => return Err(VerbalizeError::NonAlphabeticName(name.clone())),
        }
    }
    let mut out = sample.clone();
    out.premise = mirror_words(&sample.premise, &names).into();
    out.hypothesis = mirror_words(&sample.hypothesis, &names);
    out.perturbation = Perturbation::Refactor;
    out.refresh_id();
    Ok(out)
}

/// Re-renders a default-template hypothesis with the paraphrase templates.
pub fn paraphrase(sample: &SampleRecord) -> Result<SampleRecord, VerbalizeError> {
    let (i, j) = TemplateSet::default_set()
        .parse_as(sample.relation, &sample.hypothesis)
        .ok_or_else(|| VerbalizeError::UnrecognizedHypothesis(sample.hypothesis.clone()))?;
    let mut out = sample.clone();
    out.hypothesis = TemplateSet::paraphrase_set().render(sample.relation, &i, &j);
    out.perturbation = Perturbation::Paraphrase;
    out.refresh_id();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{default_names, Dag};
    use crate::independence::ci_signature;

    fn names(n: usize) -> Vec<String> {
        default_names(n)
    }

    fn h(relation: RelationType, i: usize, j: usize) -> Hypothesis {
        Hypothesis::new(relation, i, j).unwrap()
    }

    #[test]
    fn premise_for_two_nodes() {
        let empty = verbalize_premise(&ci_signature(&Dag::empty(2).unwrap()), &names(2)).unwrap();
        assert_eq!(
            empty.as_str(),
            "Suppose there is a closed system of 2 variables, A and B. All the statistical relations among these 2 variables are as follows: A is independent of B."
        );
        let edge = verbalize_premise(&ci_signature(&Dag::from_edges(2, &[(0, 1)]).unwrap()), &names(2)).unwrap();
        assert!(edge.as_str().ends_with("are as follows: A correlates with B."));
    }

    #[test]
    fn collider_premise_statements() {
        let collider = Dag::from_edges(3, &[(0, 2), (1, 2)]).unwrap();
        let text = verbalize_premise(&ci_signature(&collider), &names(3)).unwrap();
        assert!(text
            .as_str()
            .ends_with("as follows: A is independent of B. A correlates with C. B correlates with C."));
        assert!(text.as_str().contains("of 3 variables, A, B, C."));
    }

    #[test]
    fn conditioning_set_rendering() {
        let g = Dag::empty(4).unwrap();
        let text = verbalize_premise(&ci_signature(&g), &names(4)).unwrap();
        assert!(text.as_str().contains(" A is independent of B given C and D."));
        assert!(text.as_str().contains(" A is independent of B given C."));
        let g5 = Dag::empty(5).unwrap();
        let text5 = verbalize_premise(&ci_signature(&g5), &names(5)).unwrap();
        assert!(text5.as_str().contains(" A is independent of B given C, D, E."));
    }

    #[test]
    fn name_count_mismatch() {
        let sig = ci_signature(&Dag::empty(3).unwrap());
        assert_eq!(verbalize_premise(&sig, &names(2)), Err(VerbalizeError::NameCount { expected: 3, got: 2 }));
    }

    #[test]
    fn premise_parses_back() {
        let g = Dag::from_edges(5, &[(0, 2), (1, 2), (2, 3), (4, 3)]).unwrap();
        let sig = ci_signature(&g);
        let text = verbalize_premise(&sig, &names(5)).unwrap();
        let (back, parsed_names) = parse_premise(text.as_str()).unwrap();
        assert_eq!(back, sig);
        assert_eq!(parsed_names, names(5));
        assert!(parse_premise("A correlates with B.").is_err());
    }

    #[test]
    fn hypothesis_templates() {
        let d = TemplateSet::default_set();
        let p = TemplateSet::paraphrase_set();
        let n = names(2);
        assert_eq!(verbalize_hypothesis(&h(RelationType::IsParent, 0, 1), &n, &d), "A directly causes B.");
        assert_eq!(
            verbalize_hypothesis(&h(RelationType::IsDescendant, 0, 1), &n, &d),
            "B is a cause for A, but not a direct one."
        );
        assert_eq!(verbalize_hypothesis(&h(RelationType::IsParent, 0, 1), &n, &p), "A directly affects B.");
        assert_eq!(
            verbalize_hypothesis(&h(RelationType::HasConfounder, 0, 1), &n, &p),
            "Some variable(s) cause(s) both A and B."
        );
        assert_eq!(
            verbalize_hypothesis(&h(RelationType::HasCollider, 0, 1), &n, &p),
            "A and B together cause some other variable(s)."
        );
    }

    #[test]
    fn template_parse_inverts_render() {
        for t in [TemplateSet::default_set(), TemplateSet::paraphrase_set()] {
            for r in RelationType::ALL {
                let text = t.render(r, "C", "E");
                assert_eq!(t.parse_as(r, &text), Some(("C".to_string(), "E".to_string())), "{text}");
                let (r2, a, b) = t.parse(&text).unwrap();
                assert_eq!(t.render(r2, &a, &b), text);
            }
        }
    }

    #[test]
    fn overrides() {
        let t = TemplateSet::default_set().with_overrides("# comment\nis_parent = {Var i} pushes {Var j}.\n").unwrap();
        assert_eq!(t.render(RelationType::IsParent, "A", "B"), "A pushes B.");
        assert!(TemplateSet::default_set().with_overrides("is_parent = {Var i} only").is_err());
        assert!(TemplateSet::default_set().with_overrides("bogus = {Var i} {Var j}").is_err());
        assert!(TemplateSet::default_set().with_overrides("no equals sign").is_err());
    }

    #[test]
    fn tokenizer() {
        assert_eq!(
            tokenize("B is a cause for A, but not a direct one."),
            vec!["B", "is", "a", "cause", "for", "A", ",", "but", "not", "a", "direct", "one", "."]
        );
        assert_eq!(tokenize("(i.e., common effect)"), vec!["(", "i.e", ".", ",", "common", "effect", ")"]);
        assert_eq!(tokenize("follows: A"), vec!["follows", ":", "A"]);
        assert!(tokenize("   ").is_empty());
    }

    #[test]
    fn mirror() {
        assert_eq!(mirror_letter('A'), Some('Z'));
        assert_eq!(mirror_letter('F'), Some('U'));
        assert_eq!(mirror_letter('a'), None);
        let n = names(2);
        assert_eq!(mirror_words("A correlates with B.", &n), "Z correlates with Y.");
    }
}
