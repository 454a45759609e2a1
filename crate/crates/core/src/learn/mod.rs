//! Learning algorithms for first-order definable concepts.
//!
//! Every learner searches over parameter tuples and classifies examples by
//! the local types of the example extended by the parameters; the resulting
//! type-set rule is turned into a formula only at the end.

mod conflicts;
mod erm;
mod k1;
mod nd;
mod projection;

pub use conflicts::{compute_conflicts, select_x, ConflictClass, ConflictReport, SelectParams};
pub use erm::{erm_typeset, erm_typeset_with, learn_const_l, ErmOutcome, DEFAULT_TUPLE_BUDGET};
pub use k1::{learn_k1, learn_k1_with, DEFAULT_CANDIDATE_BUDGET};
pub use nd::{learn_nd, learn_nd_with, NdBudget, NdOutcome, StageTrace};
pub use projection::{project_stage, Component, ProjectionOutcome, StageInput};

use crate::error::{Error, Result};
use crate::graph::{ColoredGraph, VertexTuple};
use crate::logic::{Assignment, Formula, ModelChecker};
use crate::types::{gaifman_radius, hintikka_formula, local_type, realize_formula, realized_rank_bound, TypeContext, TypeId};
use num_rational::Ratio;
use std::collections::{BTreeMap, BTreeSet};

/// Exact error rates.
pub type Rate = Ratio<u64>;

/// Labeled example tuples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sample {
    k: usize,
    positives: Vec<VertexTuple>,
    negatives: Vec<VertexTuple>,
    duplicates_removed: usize,
}

impl Sample {
    /// Builds a sample of `k`-tuples. Repeated tuples within one side are
    /// dropped (see [`Sample::duplicates_removed`]); a tuple on both sides
    /// is an input error.
    pub fn new(k: usize, positives: Vec<VertexTuple>, negatives: Vec<VertexTuple>) -> Result<Self> {
        if k == 0 {
            return Err(Error::input("example arity must be at least 1"));
        }
        if let Some(bad) = positives.iter().chain(&negatives).find(|t| t.arity() != k) {
            return Err(Error::input(format!("example {bad} does not have arity {k}")));
        }
        let before = positives.len() + negatives.len();
        let positives = dedup_keep_order(positives);
        let negatives = dedup_keep_order(negatives);
        let pos_set: BTreeSet<&VertexTuple> = positives.iter().collect();
        if let Some(both) = negatives.iter().find(|t| pos_set.contains(t)) {
            return Err(Error::input(format!("example {both} is labeled both positive and negative")));
        }
        let duplicates_removed = before - positives.len() - negatives.len();
        Ok(Sample {
            k,
            positives,
            negatives,
            duplicates_removed,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn positives(&self) -> &[VertexTuple] {
        &self.positives
    }

    pub fn negatives(&self) -> &[VertexTuple] {
        &self.negatives
    }

    /// Number of examples `m`.
    pub fn len(&self) -> usize {
        self.positives.len() + self.negatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duplicates_removed(&self) -> usize {
        self.duplicates_removed
    }

    /// Positives then negatives, with their labels.
    pub fn examples(&self) -> impl Iterator<Item = (&VertexTuple, bool)> + '_ {
        self.positives
            .iter()
            .map(|t| (t, true))
            .chain(self.negatives.iter().map(|t| (t, false)))
    }

    /// Checks that every entry is a vertex of `graph`.
    pub fn check(&self, graph: &ColoredGraph) -> Result<()> {
        for (t, _) in self.examples() {
            graph.check_tuple(t)?;
        }
        Ok(())
    }
}

fn dedup_keep_order(tuples: Vec<VertexTuple>) -> Vec<VertexTuple> {
    let mut seen = BTreeSet::new();
    tuples.into_iter().filter(|t| seen.insert(t.clone())).collect()
}

/// Hyperparameters of a learning problem and the quantities derived from
/// them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LearnConfig {
    pub k: usize,
    pub l: usize,
    pub q: u32,
    /// Approximation budget of the agnostic learner.
    pub epsilon: Rate,
    /// Locality radius; `None` means [`gaifman_radius`]`(q)`.
    pub radius: Option<u32>,
}

impl LearnConfig {
    pub fn new(k: usize, l: usize, q: u32, epsilon: Rate) -> Self {
        LearnConfig {
            k,
            l,
            q,
            epsilon,
            radius: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::input("k must be at least 1"));
        }
        if self.epsilon <= Rate::from_integer(0) {
            return Err(Error::input("epsilon must be positive"));
        }
        Ok(())
    }

    /// Locality radius `r`.
    pub fn r(&self) -> u32 {
        self.radius.unwrap_or_else(|| gaifman_radius(self.q))
    }

    /// Cover base radius `(k+2)(2r+1)`.
    pub fn base_radius(&self) -> u32 {
        (self.k as u32 + 2) * (2 * self.r() + 1)
    }

    /// Splitter game radius `R = 3^(l-1) (k+2)(2r+1)`; equal to the base
    /// radius when `l = 0`.
    pub fn game_radius(&self) -> u32 {
        3u32.pow(self.l.saturating_sub(1) as u32) * self.base_radius()
    }

    /// Number of parameters `L = l * s` for splitter depth `s`.
    pub fn parameter_count(&self, s: usize) -> usize {
        self.l * s
    }

    /// Quantifier-rank bound `q + ceil(log2 max(R, 1))` of the output.
    pub fn rank_bound(&self) -> u32 {
        if self.q == 0 {
            0
        } else {
            self.q + Formula::distance_rank(self.game_radius().max(1))
        }
    }
}

/// A classification rule: a tuple is positive when its key, the list of its
/// local types under each context, is in `positive`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeRule {
    pub contexts: Vec<TypeContext>,
    pub positive: BTreeSet<Vec<TypeId>>,
}

impl TypeRule {
    pub fn key(&self, graph: &ColoredGraph, tuple: &[usize]) -> Result<Vec<TypeId>> {
        self.contexts
            .iter()
            .map(|c| local_type(graph, tuple, c.q, c.r))
            .collect()
    }

    /// Classifies the tuple `example ++ params`.
    pub fn classify(&self, graph: &ColoredGraph, example: &[usize], params: &[usize]) -> Result<bool> {
        let key = self.key(graph, &[example, params].concat())?;
        Ok(self.positive.contains(&key))
    }

    /// A formula over `x1..xk, y1..yl` defining the rule.
    pub fn to_formula(&self, k: usize, l: usize) -> Result<Formula> {
        if let [ctx] = self.contexts.as_slice() {
            let types: Vec<TypeId> = self.positive.iter().map(|key| key[0].clone()).collect();
            return realize_formula(&types, ctx, k, l);
        }
        if self.positive.is_empty() {
            return Ok(Formula::canonical_false());
        }
        let mut cache: BTreeMap<&TypeId, Formula> = BTreeMap::new();
        let mut disjuncts = Vec::with_capacity(self.positive.len());
        for key in &self.positive {
            let mut parts = Vec::with_capacity(key.len());
            for (t, ctx) in key.iter().zip(&self.contexts) {
                if !cache.contains_key(t) {
                    cache.insert(t, hintikka_formula(t, ctx, k, l)?);
                }
                parts.push(cache[t].clone());
            }
            disjuncts.push(Formula::conjunction(parts));
        }
        Ok(Formula::disjunction(disjuncts))
    }

    /// Largest realization rank over the contexts.
    pub fn rank_bound(&self) -> u32 {
        self.contexts
            .iter()
            .map(|c| realized_rank_bound(c.q, c.r))
            .max()
            .unwrap_or(0)
    }
}

/// A learned concept `(φ, w̄)`.
#[derive(Clone, Debug)]
pub struct Hypothesis {
    pub k: usize,
    pub parameters: Vec<usize>,
    pub formula: Formula,
    /// The type-set rule the formula was realized from, when known.
    pub rule: Option<TypeRule>,
    /// Per-stage choices of the nowhere-dense learner.
    pub trace: Vec<StageTrace>,
}

impl Hypothesis {
    /// A hypothesis given only by its formula and parameters.
    pub fn from_formula(k: usize, formula: Formula, parameters: Vec<usize>) -> Self {
        Hypothesis {
            k,
            parameters,
            formula,
            rule: None,
            trace: Vec::new(),
        }
    }

    pub fn quantifier_rank(&self) -> u32 {
        self.formula.quantifier_rank()
    }

    /// Evaluates the formula on every example tuple.
    pub fn classifier<'g>(&self, graph: &'g ColoredGraph) -> Result<Classifier<'g, '_>> {
        graph.check_tuple(&self.parameters)?;
        Ok(Classifier {
            checker: ModelChecker::new(graph, &self.formula)?,
            hypothesis: self,
        })
    }
}

/// A hypothesis compiled against one graph.
pub struct Classifier<'g, 'h> {
    checker: ModelChecker<'g>,
    hypothesis: &'h Hypothesis,
}

impl Classifier<'_, '_> {
    pub fn classify(&self, example: &[usize]) -> Result<bool> {
        let h = self.hypothesis;
        if example.len() != h.k {
            return Err(Error::input(format!(
                "example of arity {} for a hypothesis of arity {}",
                example.len(),
                h.k
            )));
        }
        let tuple = [example, &h.parameters].concat();
        self.checker.eval(&Assignment::from_tuple(h.k, &tuple))
    }
}

/// Result of a learner that may reject.
#[derive(Clone, Debug)]
pub enum LearnOutcome {
    Learned(Hypothesis),
    /// No hypothesis in the search space is consistent with the sample.
    Reject,
}

impl LearnOutcome {
    pub fn hypothesis(&self) -> Option<&Hypothesis> {
        match self {
            LearnOutcome::Learned(h) => Some(h),
            LearnOutcome::Reject => None,
        }
    }

    pub fn is_reject(&self) -> bool {
        matches!(self, LearnOutcome::Reject)
    }
}

/// Fraction of examples the hypothesis's formula misclassifies; `0` for an
/// empty sample.
pub fn training_error(graph: &ColoredGraph, h: &Hypothesis, sample: &Sample) -> Result<Rate> {
    if h.k != sample.k() {
        return Err(Error::input(format!(
            "hypothesis arity {} does not match sample arity {}",
            h.k,
            sample.k()
        )));
    }
    sample.check(graph)?;
    if sample.is_empty() {
        return Ok(Rate::from_integer(0));
    }
    let classifier = h.classifier(graph)?;
    let mut wrong = 0u64;
    for (t, label) in sample.examples() {
        if classifier.classify(t)? != label {
            wrong += 1;
        }
    }
    Ok(Rate::new(wrong, sample.len() as u64))
}

/// A labeled tuple of some (stage) graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Example {
    pub tuple: Vec<usize>,
    pub positive: bool,
}

pub(crate) fn examples_of(sample: &Sample) -> Vec<Example> {
    sample
        .examples()
        .map(|(t, positive)| Example {
            tuple: t.to_vec(),
            positive,
        })
        .collect()
}

/// Majority vote per key class (ties negative). Returns the positive keys
/// and the number of misclassified examples. Entries must be validated.
pub(crate) fn fit_majority(
    graph: &ColoredGraph,
    examples: &[Example],
    params: &[usize],
    contexts: &[TypeContext],
) -> (BTreeSet<Vec<TypeId>>, usize) {
    let mut counts: BTreeMap<Vec<TypeId>, (usize, usize)> = BTreeMap::new();
    let mut tuple = Vec::new();
    for ex in examples {
        tuple.clear();
        tuple.extend_from_slice(&ex.tuple);
        tuple.extend_from_slice(params);
        let key: Vec<TypeId> = contexts
            .iter()
            .map(|c| local_type(graph, &tuple, c.q, c.r).expect("validated tuple"))
            .collect();
        let entry = counts.entry(key).or_default();
        if ex.positive {
            entry.0 += 1;
        } else {
            entry.1 += 1;
        }
    }
    let mut positive = BTreeSet::new();
    let mut wrong = 0;
    for (key, (pos, neg)) in counts {
        if pos > neg {
            wrong += neg;
            positive.insert(key);
        } else {
            wrong += pos;
        }
    }
    (positive, wrong)
}

/// Realizes the rule, checks the rank bound, and checks that the formula
/// reproduces the rule on every example.
pub(crate) fn finish_hypothesis(
    graph: &ColoredGraph,
    examples: &[Example],
    k: usize,
    parameters: Vec<usize>,
    rule: TypeRule,
    rank_bound: u32,
    trace: Vec<StageTrace>,
) -> Result<Hypothesis> {
    let formula = rule.to_formula(k, parameters.len())?;
    if formula.quantifier_rank() > rank_bound {
        return Err(Error::invariant(format!(
            "hypothesis rank {} exceeds the bound {rank_bound}",
            formula.quantifier_rank()
        )));
    }
    let h = Hypothesis {
        k,
        parameters,
        formula,
        rule: Some(rule),
        trace,
    };
    let classifier = h.classifier(graph)?;
    let rule = h.rule.as_ref().expect("just set");
    for ex in examples {
        let by_rule = rule.classify(graph, &ex.tuple, &h.parameters)?;
        if classifier.classify(&ex.tuple)? != by_rule {
            return Err(Error::invariant(format!(
                "emitted formula disagrees with its type rule on {:?}",
                ex.tuple
            )));
        }
    }
    Ok(h)
}

/// Decodes index `i` of `n^len` into a tuple in lexicographic order.
pub(crate) fn nth_tuple(mut i: u64, n: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = (i % n as u64) as usize;
        i /= n as u64;
    }
    out
}

/// `n^len`, or a budget error above `budget`.
pub(crate) fn tuple_count(n: usize, len: usize, budget: u64) -> Result<u64> {
    let count = (n as u64)
        .checked_pow(len as u32)
        .filter(|&c| c <= budget)
        .ok_or_else(|| {
            Error::Budget(format!("{n}^{len} parameter tuples exceed the budget of {budget}"))
        })?;
    Ok(count)
}
