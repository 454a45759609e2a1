//! Brute-force ERM over parameter tuples and type-set rules.

use super::{examples_of, finish_hypothesis, fit_majority, nth_tuple, tuple_count, Hypothesis, LearnOutcome, Rate, Sample, TypeRule};
use crate::error::{Error, Result};
use crate::graph::ColoredGraph;
use crate::par;
use crate::types::{gaifman_radius, TypeContext};

/// Default cap on the number of enumerated parameter tuples.
pub const DEFAULT_TUPLE_BUDGET: u64 = 1_000_000;

/// Best type-set hypothesis found by [`erm_typeset`].
#[derive(Clone, Debug)]
pub struct ErmOutcome {
    pub hypothesis: Hypothesis,
    pub error: Rate,
    /// Misclassified examples of the best hypothesis.
    pub mistakes: usize,
    /// Parameter tuples examined.
    pub tuples_examined: u64,
}

/// Minimizes training error over all `w̄ ∈ V^l` and all sets of local
/// `(q, r(q))`-types of `v̄w̄`. Ties go to the lexicographically least `w̄`.
pub fn erm_typeset(graph: &ColoredGraph, sample: &Sample, l: usize, q: u32) -> Result<ErmOutcome> {
    erm_typeset_with(graph, sample, l, q, gaifman_radius(q), DEFAULT_TUPLE_BUDGET)
}

/// [`erm_typeset`] with an explicit locality radius and tuple budget.
pub fn erm_typeset_with(
    graph: &ColoredGraph,
    sample: &Sample,
    l: usize,
    q: u32,
    r: u32,
    budget: u64,
) -> Result<ErmOutcome> {
    let search = Search::new(graph, sample, l, q, r, budget)?;
    let (index, mistakes) = par::min_by_key(search.count as usize, |i| search.mistakes(i as u64))
        .expect("at least one parameter tuple");
    let params = nth_tuple(index as u64, graph.n(), l);
    let hypothesis = search.finish(params)?;
    let error = if sample.is_empty() {
        Rate::from_integer(0)
    } else {
        Rate::new(mistakes as u64, sample.len() as u64)
    };
    Ok(ErmOutcome {
        hypothesis,
        error,
        mistakes,
        tuples_examined: search.count,
    })
}

/// Returns the first consistent type-set hypothesis in enumeration order,
/// or [`LearnOutcome::Reject`] if there is none.
pub fn learn_const_l(graph: &ColoredGraph, sample: &Sample, l: usize, q: u32) -> Result<LearnOutcome> {
    learn_const_l_with(graph, sample, l, q, gaifman_radius(q), DEFAULT_TUPLE_BUDGET)
}

pub(crate) fn learn_const_l_with(
    graph: &ColoredGraph,
    sample: &Sample,
    l: usize,
    q: u32,
    r: u32,
    budget: u64,
) -> Result<LearnOutcome> {
    let search = Search::new(graph, sample, l, q, r, budget)?;
    let hit = par::find_first(search.count as usize, |i| (search.mistakes(i as u64) == 0).then_some(()));
    match hit {
        Some((index, ())) => {
            let params = nth_tuple(index as u64, graph.n(), l);
            Ok(LearnOutcome::Learned(search.finish(params)?))
        }
        None => Ok(LearnOutcome::Reject),
    }
}

struct Search<'a> {
    graph: &'a ColoredGraph,
    sample: &'a Sample,
    examples: Vec<super::Example>,
    contexts: Vec<TypeContext>,
    l: usize,
    count: u64,
}

impl<'a> Search<'a> {
    fn new(graph: &'a ColoredGraph, sample: &'a Sample, l: usize, q: u32, r: u32, budget: u64) -> Result<Self> {
        sample.check(graph)?;
        if graph.n() == 0 && l > 0 {
            return Err(Error::input("cannot choose parameters in an empty graph"));
        }
        let count = tuple_count(graph.n(), l, budget)?;
        Ok(Search {
            graph,
            sample,
            examples: examples_of(sample),
            contexts: vec![TypeContext::with_radius(q, r, graph.vocabulary().clone())],
            l,
            count,
        })
    }

    fn mistakes(&self, index: u64) -> usize {
        let params = nth_tuple(index, self.graph.n(), self.l);
        fit_majority(self.graph, &self.examples, &params, &self.contexts).1
    }

    fn finish(&self, params: Vec<usize>) -> Result<Hypothesis> {
        let (positive, _) = fit_majority(self.graph, &self.examples, &params, &self.contexts);
        let rule = TypeRule {
            contexts: self.contexts.clone(),
            positive,
        };
        let bound = rule.rank_bound();
        finish_hypothesis(self.graph, &self.examples, self.sample.k(), params, rule, bound, Vec::new())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{VertexTuple, Vocabulary};
    use crate::learn::training_error;

    fn t(v: usize) -> VertexTuple {
        VertexTuple::new(vec![v])
    }

    fn isolated(n: usize) -> ColoredGraph {
        ColoredGraph::build(Vocabulary::empty(), n, &[], &[]).unwrap()
    }

    #[test]
    fn automorphic_pair_without_parameters() {
        let g = isolated(2);
        let s = Sample::new(1, vec![t(0)], vec![t(1)]).unwrap();
        let out = erm_typeset(&g, &s, 0, 1).unwrap();
        assert_eq!(out.error, Rate::new(1, 2));
        assert!(learn_const_l(&g, &s, 0, 1).unwrap().is_reject());
    }

    #[test]
    fn one_parameter_separates_isolated_vertices() {
        let g = isolated(2);
        let s = Sample::new(1, vec![t(0)], vec![t(1)]).unwrap();
        let out = erm_typeset(&g, &s, 1, 1).unwrap();
        assert_eq!(out.error, Rate::from_integer(0));
        assert_eq!(out.hypothesis.parameters, vec![0]);
        assert_eq!(training_error(&g, &out.hypothesis, &s).unwrap(), Rate::from_integer(0));
        let LearnOutcome::Learned(h) = learn_const_l(&g, &s, 1, 1).unwrap() else {
            panic!("expected a hypothesis");
        };
        assert_eq!(training_error(&g, &h, &s).unwrap(), Rate::from_integer(0));
        assert!(h.quantifier_rank() <= h.rule.as_ref().unwrap().rank_bound());
    }

    #[test]
    fn budget_and_empty_graph() {
        let g = isolated(10);
        let s = Sample::new(1, vec![t(0)], vec![]).unwrap();
        assert!(erm_typeset_with(&g, &s, 3, 0, 0, 999).unwrap_err().is_budget());
        let empty = isolated(0);
        let none = Sample::new(1, vec![], vec![]).unwrap();
        assert!(erm_typeset(&empty, &none, 1, 0).is_err());
        let out = erm_typeset(&empty, &none, 0, 0).unwrap();
        assert_eq!(out.error, Rate::from_integer(0));
    }
}
