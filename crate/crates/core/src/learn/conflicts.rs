//! Conflicts between positive and negative examples, and the choice of the
//! vertex set `X` around which the critical examples cluster.

use super::{examples_of, Example, Rate, Sample};
use crate::error::{Error, Result};
use crate::graph::{multi_source_distances, ColoredGraph, INFINITE};
use crate::types::{local_type, TypeId};
use std::collections::BTreeMap;

/// Examples sharing a local type while carrying both labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConflictClass {
    pub positives: Vec<usize>,
    pub negatives: Vec<usize>,
}

/// Conflicts `Ξ`, critical examples `Γ` and the index `w ↦ Γ(w)`.
///
/// Examples are referred to by their position in the example list (positives
/// first, then negatives, for a [`Sample`]).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConflictReport {
    pub classes: Vec<ConflictClass>,
    /// Ascending positions of critical examples.
    pub critical: Vec<usize>,
    /// For each vertex `w`, the critical examples with an entry within
    /// distance `2r+1` of `w`.
    pub index: Vec<Vec<usize>>,
}

impl ConflictReport {
    /// `|Ξ|`.
    pub fn conflict_count(&self) -> u64 {
        self.classes
            .iter()
            .map(|c| c.positives.len() as u64 * c.negatives.len() as u64)
            .sum()
    }

    pub fn is_conflict_free(&self) -> bool {
        self.classes.is_empty()
    }

    /// All conflicting (positive, negative) pairs.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.classes
            .iter()
            .flat_map(|c| c.positives.iter().flat_map(move |&p| c.negatives.iter().map(move |&n| (p, n))))
    }

    /// `|Γ(w)|`.
    pub fn count_at(&self, w: usize) -> usize {
        self.index[w].len()
    }
}

/// Conflicts of a sample under local `(q, r)`-types.
pub fn compute_conflicts(graph: &ColoredGraph, sample: &Sample, q: u32, r: u32) -> Result<ConflictReport> {
    sample.check(graph)?;
    conflicts_of(graph, &examples_of(sample), q, r)
}

pub(crate) fn conflicts_of(graph: &ColoredGraph, examples: &[Example], q: u32, r: u32) -> Result<ConflictReport> {
    let mut groups: BTreeMap<TypeId, ConflictClass> = BTreeMap::new();
    for (i, ex) in examples.iter().enumerate() {
        let class = groups.entry(local_type(graph, &ex.tuple, q, r)?).or_insert(ConflictClass {
            positives: Vec::new(),
            negatives: Vec::new(),
        });
        if ex.positive {
            class.positives.push(i);
        } else {
            class.negatives.push(i);
        }
    }
    let classes: Vec<ConflictClass> = groups
        .into_values()
        .filter(|c| !c.positives.is_empty() && !c.negatives.is_empty())
        .collect();
    let mut critical: Vec<usize> = classes
        .iter()
        .flat_map(|c| c.positives.iter().chain(&c.negatives).copied())
        .collect();
    critical.sort_unstable();
    let mut index = vec![Vec::new(); graph.n()];
    for &i in &critical {
        let dist = multi_source_distances(graph, &examples[i].tuple, 2 * r + 1);
        for (w, &d) in dist.iter().enumerate() {
            if d != INFINITE {
                index[w].push(i);
            }
        }
    }
    Ok(ConflictReport {
        classes,
        critical,
        index,
    })
}

/// Parameters of the greedy selection of `X`.
#[derive(Clone, Debug)]
pub struct SelectParams {
    pub k: usize,
    pub l: usize,
    /// Splitter depth `s`.
    pub s: usize,
    pub r: u32,
    pub epsilon: Rate,
    /// `|Γ|` of the original sample.
    pub total_critical: usize,
}

/// Greedily picks vertices pairwise more than `4r+2` apart, each maximizing
/// `|Γ(x)|` (ties to the least id), stopping when no vertex with a nonzero
/// count remains or after `⌊kℓs/ε⌋` picks.
///
/// Checks that `|X| ≤ kℓs/ε` and that every `u` outside `N_{4r+2}(X)` has
/// `|Γ(u)| / |Γ| < ε/(ℓs)`.
pub fn select_x(graph: &ColoredGraph, report: &ConflictReport, params: &SelectParams) -> Result<Vec<usize>> {
    let SelectParams {
        k,
        l,
        s,
        r,
        ref epsilon,
        total_critical,
    } = *params;
    if report.critical.is_empty() || l == 0 || s == 0 {
        return Ok(Vec::new());
    }
    if *epsilon <= Rate::from_integer(0) {
        return Err(Error::input("epsilon must be positive"));
    }
    let (num, den) = (*epsilon.numer() as u128, *epsilon.denom() as u128);
    let kls = (k * l * s) as u128;
    let cap = (kls * den / num) as usize;
    let separation = 4 * r + 2;

    let mut blocked = vec![false; graph.n()];
    let mut chosen = Vec::new();
    while chosen.len() < cap {
        let best = (0..graph.n())
            .filter(|&u| !blocked[u] && report.count_at(u) > 0)
            .max_by_key(|&u| (report.count_at(u), std::cmp::Reverse(u)));
        let Some(x) = best else { break };
        chosen.push(x);
        let dist = multi_source_distances(graph, &[x], separation);
        for (u, &d) in dist.iter().enumerate() {
            if d != INFINITE {
                blocked[u] = true;
            }
        }
    }

    if chosen.len() as u128 * num > kls * den {
        return Err(Error::invariant(format!("selected {} vertices, above kls/eps", chosen.len())));
    }
    let threshold = num * total_critical as u128;
    let ls = (l * s) as u128;
    if let Some(u) = (0..graph.n()).find(|&u| !blocked[u] && report.count_at(u) as u128 * ls * den >= threshold) {
        return Err(Error::invariant(format!(
            "vertex {u} outside the selected balls has {} critical examples nearby",
            report.count_at(u)
        )));
    }
    chosen.sort_unstable();
    Ok(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{VertexTuple, Vocabulary};

    fn t(v: usize) -> VertexTuple {
        VertexTuple::new(vec![v])
    }

    fn path(n: usize) -> ColoredGraph {
        let edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        ColoredGraph::build(Vocabulary::empty(), n, &edges, &[]).unwrap()
    }

    #[test]
    fn automorphic_pair_conflicts() {
        let g = ColoredGraph::build(Vocabulary::empty(), 2, &[], &[]).unwrap();
        let s = Sample::new(1, vec![t(0)], vec![t(1)]).unwrap();
        let rep = compute_conflicts(&g, &s, 1, 1).unwrap();
        assert_eq!(rep.conflict_count(), 1);
        assert_eq!(rep.critical, vec![0, 1]);
        assert_eq!(rep.pairs().collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn distinct_types_do_not_conflict() {
        // star center vs leaf
        let g = ColoredGraph::build(Vocabulary::empty(), 3, &[(0, 1), (0, 2)], &[]).unwrap();
        let s = Sample::new(1, vec![t(0)], vec![t(1)]).unwrap();
        let rep = compute_conflicts(&g, &s, 1, 3).unwrap();
        assert!(rep.is_conflict_free());
        assert!(rep.critical.is_empty());
    }

    #[test]
    fn index_respects_radius() {
        // 0 hangs off the path 2..7, 1 is isolated; r = 0 gives radius 1
        let mut edges: Vec<(usize, usize)> = (3..8).map(|i| (i - 1, i)).collect();
        edges.push((0, 2));
        let g = ColoredGraph::build(Vocabulary::empty(), 8, &edges, &[]).unwrap();
        let s = Sample::new(1, vec![t(0)], vec![t(7)]).unwrap();
        let rep = compute_conflicts(&g, &s, 0, 0).unwrap();
        assert_eq!(rep.critical, vec![0, 1]);
        assert_eq!(rep.index[2], vec![0]);
        assert_eq!(rep.index[6], vec![1]);
        assert!(rep.index[4].is_empty());
        assert!(rep.index[1].is_empty());
    }

    #[test]
    fn selection_in_one_ball() {
        // all critical examples near vertex 2 of a 5-path, r = 0
        let g = path(5);
        let s = Sample::new(1, vec![t(1), t(2)], vec![t(3)]).unwrap();
        let rep = compute_conflicts(&g, &s, 0, 0).unwrap();
        assert_eq!(rep.critical.len(), 3);
        let params = SelectParams {
            k: 1,
            l: 1,
            s: 1,
            r: 0,
            epsilon: Rate::new(1, 2),
            total_critical: 3,
        };
        assert_eq!(select_x(&g, &rep, &params).unwrap(), vec![2]);
    }

    #[test]
    fn empty_critical_set() {
        let g = path(3);
        let s = Sample::new(1, vec![t(0)], vec![t(1)]).unwrap();
        let rep = compute_conflicts(&g, &s, 1, 3).unwrap();
        let params = SelectParams {
            k: 1,
            l: 1,
            s: 2,
            r: 1,
            epsilon: Rate::new(1, 10),
            total_critical: 0,
        };
        assert!(select_x(&g, &rep, &params).unwrap().is_empty());
    }
}
