//! The six pairwise causal relations and hypothesis validity over an equivalence class.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::equivalence::Mec;
use crate::graph::Dag;

/// Relation between an ordered pair of variables, in hypothesis-template order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RelationType {
    #[serde(rename = "Is-Parent")]
    IsParent,
    #[serde(rename = "Is-Ancestor")]
    IsAncestor,
    #[serde(rename = "Is-Child")]
    IsChild,
    #[serde(rename = "Is-Descendant")]
    IsDescendant,
    #[serde(rename = "Has-Collider")]
    HasCollider,
    #[serde(rename = "Has-Confounder")]
    HasConfounder,
}

impl RelationType {
    pub const ALL: [RelationType; 6] = [
        RelationType::IsParent,
        RelationType::IsAncestor,
        RelationType::IsChild,
        RelationType::IsDescendant,
        RelationType::HasCollider,
        RelationType::HasConfounder,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            RelationType::IsParent => "Is-Parent",
            RelationType::IsAncestor => "Is-Ancestor",
            RelationType::IsChild => "Is-Child",
            RelationType::IsDescendant => "Is-Descendant",
            RelationType::HasCollider => "Has-Collider",
            RelationType::HasConfounder => "Has-Confounder",
        }
    }

    /// Lower-case key used in template override files.
    pub fn slug(self) -> &'static str {
        match self {
            RelationType::IsParent => "is_parent",
            RelationType::IsAncestor => "is_ancestor",
            RelationType::IsChild => "is_child",
            RelationType::IsDescendant => "is_descendant",
            RelationType::HasCollider => "has_collider",
            RelationType::HasConfounder => "has_confounder",
        }
    }

    pub fn is_symmetric(self) -> bool {
        matches!(self, RelationType::HasCollider | RelationType::HasConfounder)
    }
}

impl fmt::Display for RelationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RelationType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RelationType::ALL
            .into_iter()
            .find(|r| r.name() == s || r.slug() == s)
            .ok_or_else(|| format!("unknown relation {s:?}"))
    }
}

/// Claim that `relation` holds from variable `i` to variable `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Hypothesis {
    pub relation: RelationType,
    pub i: usize,
    pub j: usize,
}

impl Hypothesis {
    pub fn new(relation: RelationType, i: usize, j: usize) -> Option<Self> {
        (i != j).then_some(Hypothesis { relation, i, j })
    }
}

pub fn relation_holds(g: &Dag, h: &Hypothesis) -> bool {
    let (i, j) = (h.i, h.j);
    match h.relation {
        RelationType::IsParent => g.has_edge(i, j),
        RelationType::IsChild => g.has_edge(j, i),
        RelationType::IsAncestor => g.ancestors(j).contains(i) && !g.has_edge(i, j),
        RelationType::IsDescendant => g.ancestors(i).contains(j) && !g.has_edge(j, i),
        RelationType::HasCollider => !g.children(i).is_disjoint(g.children(j)),
        RelationType::HasConfounder => !g.parents(i).is_disjoint(g.parents(j)),
    }
}

/// 1 iff the relation holds in every member of the class.
pub fn label(m: &Mec, h: &Hypothesis) -> u8 {
    u8::from(m.members.iter().all(|g| relation_holds(g, h)))
}

/// All six relations over every ordered pair, pair-lexicographic then relation order.
pub fn all_hypotheses(n: usize) -> Vec<Hypothesis> {
    let mut out = Vec::with_capacity(6 * n * n.saturating_sub(1));
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            out.extend(RelationType::ALL.into_iter().map(|relation| Hypothesis { relation, i, j }));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equivalence::group_mecs;
    use crate::graph::enumerate_dags;

    fn h(relation: RelationType, i: usize, j: usize) -> Hypothesis {
        Hypothesis::new(relation, i, j).unwrap()
    }

    #[test]
    fn relation_examples() {
        let edge = Dag::from_edges(2, &[(0, 1)]).unwrap();
        assert!(relation_holds(&edge, &h(RelationType::IsParent, 0, 1)));
        assert!(!relation_holds(&edge, &h(RelationType::IsAncestor, 0, 1)));

        let chain = Dag::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(relation_holds(&chain, &h(RelationType::IsAncestor, 0, 2)));
        assert!(relation_holds(&chain, &h(RelationType::IsDescendant, 2, 0)));
        assert!(!relation_holds(&chain, &h(RelationType::HasCollider, 0, 2)));

        let collider = Dag::from_edges(3, &[(0, 2), (1, 2)]).unwrap();
        assert!(relation_holds(&collider, &h(RelationType::HasCollider, 0, 1)));
        assert!(!relation_holds(&collider, &h(RelationType::HasConfounder, 0, 1)));
    }

    #[test]
    fn hypothesis_counts() {
        assert_eq!(all_hypotheses(2).len(), 12);
        assert_eq!(all_hypotheses(3).len(), 36);
        assert_eq!(all_hypotheses(6).len(), 180);
        let first: Vec<_> = all_hypotheses(3).into_iter().take(7).collect();
        assert_eq!(first[0], h(RelationType::IsParent, 0, 1));
        assert_eq!(first[5], h(RelationType::HasConfounder, 0, 1));
        assert_eq!(first[6], h(RelationType::IsParent, 0, 2));
        assert!(Hypothesis::new(RelationType::IsParent, 1, 1).is_none());
    }

    #[test]
    fn labels_on_small_classes() {
        let mecs2 = group_mecs(&enumerate_dags(2).unwrap()).unwrap();
        let edge_class = mecs2.iter().find(|m| m.members.len() == 2).unwrap();
        assert_eq!(label(edge_class, &h(RelationType::IsParent, 0, 1)), 0);

        let mecs3 = group_mecs(&enumerate_dags(3).unwrap()).unwrap();
        let collider = mecs3.iter().find(|m| !m.representative.v_structures().is_empty()).unwrap();
        assert_eq!(collider.members.len(), 1);
        let (a, c, b) = collider.representative.v_structures()[0];
        assert_eq!(label(collider, &h(RelationType::IsParent, a, c)), 1);
        assert_eq!(label(collider, &h(RelationType::HasCollider, a, b)), 1);

        let chain = mecs3.iter().find(|m| m.members.len() == 3).unwrap();
        let ends: Vec<usize> = (0..3)
            .filter(|&v| chain.cpdag.undirected_edges().iter().filter(|e| e.0 == v || e.1 == v).count() == 1)
            .collect();
        assert_eq!(label(chain, &h(RelationType::HasCollider, ends[0], ends[1])), 0);
    }
}
