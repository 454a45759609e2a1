//! Learning unary concepts by fixing parameters one at a time, each step
//! decided by model checking a sentence over the graph expanded by the
//! example labels.

use super::{examples_of, finish_hypothesis, nth_tuple, tuple_count, LearnOutcome, Sample, TypeRule};
use crate::error::{Error, Result};
use crate::graph::{ColoredGraph, Vocabulary};
use crate::logic::{Assignment, Formula, ModelChecker, Var};
use crate::par;
use crate::types::{gaifman_radius, local_type, realize_formula, TypeContext, TypeId};
use std::collections::{BTreeSet, HashSet};

/// Default cap on the number of parameter tuples generating candidates.
pub const DEFAULT_CANDIDATE_BUDGET: u64 = 100_000;

const PARAM_BASE: u32 = 1000;
const INSTANCE_VAR: Var = Var::Bound(2000);

/// Learns a consistent hypothesis for `k = 1`, or rejects.
///
/// Candidate rules are the sets of local types of `(v, w̄)` over the
/// positive examples `v`, one per `w̄ ∈ V^l`, deduplicated. For each
/// candidate `φ` the parameters are fixed left to right: `w_i` is the first
/// vertex for which
/// `∃y_{i+1} … ∃y_l ∀x ((P₊x → φ) ∧ (P₋x → ¬φ))` holds with `y_1..y_i`
/// pinned by fresh colors.
pub fn learn_k1(graph: &ColoredGraph, sample: &Sample, l: usize, q: u32) -> Result<LearnOutcome> {
    learn_k1_with(graph, sample, l, q, gaifman_radius(q), DEFAULT_CANDIDATE_BUDGET)
}

pub fn learn_k1_with(
    graph: &ColoredGraph,
    sample: &Sample,
    l: usize,
    q: u32,
    r: u32,
    budget: u64,
) -> Result<LearnOutcome> {
    if sample.k() != 1 {
        return Err(Error::input(format!("this learner needs k = 1, got k = {}", sample.k())));
    }
    sample.check(graph)?;
    if graph.n() == 0 && l > 0 {
        return Err(Error::input("cannot choose parameters in an empty graph"));
    }
    let count = tuple_count(graph.n(), l, budget)?;
    let n = graph.n();
    let ctx = TypeContext::with_radius(q, r, graph.vocabulary().clone());

    let families: Vec<BTreeSet<TypeId>> = par::map_range(count as usize, |i| {
        let w = nth_tuple(i as u64, n, l);
        sample
            .positives()
            .iter()
            .map(|v| local_type(graph, &v.extended(&w), q, r).expect("validated tuple"))
            .collect()
    });
    let mut seen = HashSet::new();
    let candidates: Vec<BTreeSet<TypeId>> = families.into_iter().filter(|f| seen.insert(f.clone())).collect();

    let names = fresh_names(graph.vocabulary(), &["Ppos", "Pneg"]);
    let labeled = graph.expand_colors(&[
        (names[0].clone(), sample.positives().iter().map(|v| v[0]).collect()),
        (names[1].clone(), sample.negatives().iter().map(|v| v[0]).collect()),
    ])?;
    let markers = fresh_names(labeled.vocabulary(), &(1..=l).map(|j| format!("S{j}")).collect::<Vec<_>>());
    let checker = PrefixChecker {
        graph: &labeled,
        positive: &names[0],
        negative: &names[1],
        markers: &markers,
        l,
    };

    let found = par::find_first(candidates.len(), |c| {
        let types: Vec<TypeId> = candidates[c].iter().cloned().collect();
        let phi = match realize_formula(&types, &ctx, 1, l) {
            Ok(phi) => phi,
            Err(e) => return Some(Err(e)),
        };
        match checker.fix_parameters(&phi) {
            Ok(Some(params)) => Some(Ok((phi, params))),
            Ok(None) => None,
            Err(e) => Some(Err(e)),
        }
    });
    let Some((c, result)) = found else {
        return Ok(LearnOutcome::Reject);
    };
    let (_, params) = result?;
    let rule = TypeRule {
        contexts: vec![ctx],
        positive: candidates[c].iter().map(|t| vec![t.clone()]).collect(),
    };
    let bound = rule.rank_bound();
    let examples = examples_of(sample);
    let h = finish_hypothesis(graph, &examples, 1, params, rule, bound, Vec::new())?;
    Ok(LearnOutcome::Learned(h))
}

/// Names based on `bases` that are new to `vocab` and to each other.
fn fresh_names(vocab: &Vocabulary, bases: &[impl AsRef<str>]) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    for base in bases {
        let base = base.as_ref();
        let name = (0..)
            .map(|i| if i == 0 { base.to_string() } else { format!("{base}_{i}") })
            .find(|c| !vocab.contains(c) && !names.contains(c))
            .expect("unbounded suffix search");
        names.push(name);
    }
    names
}

struct PrefixChecker<'a> {
    graph: &'a ColoredGraph,
    positive: &'a str,
    negative: &'a str,
    markers: &'a [String],
    l: usize,
}

impl PrefixChecker<'_> {
    /// Parameters making `phi` consistent, found prefix by prefix, or `None`.
    fn fix_parameters(&self, phi: &Formula) -> Result<Option<Vec<usize>>> {
        let mut body = phi.rename_free(Var::Instance(1), INSTANCE_VAR);
        for j in 1..=self.l as u32 {
            body = body.rename_free(Var::Param(j), Var::Bound(PARAM_BASE + j));
        }
        let x = INSTANCE_VAR;
        let consistent = Formula::forall(
            x,
            Formula::Color(self.positive.to_string(), x)
                .implies(body.clone())
                .and(Formula::Color(self.negative.to_string(), x).implies(body.not())),
        );
        if self.l == 0 {
            return Ok(self.holds(&consistent, &[])?.then(Vec::new));
        }
        let mut prefix = Vec::with_capacity(self.l);
        for i in 1..=self.l {
            let sentence = self.extension_sentence(&consistent, i);
            let mut found = false;
            for u in 0..self.graph.n() {
                prefix.push(u);
                if self.holds(&sentence, &prefix)? {
                    found = true;
                    break;
                }
                prefix.pop();
            }
            if !found {
                return Ok(None);
            }
        }
        Ok(Some(prefix))
    }

    // ∃y_1 (S_1 y_1 ∧ … ∃y_i (S_i y_i ∧ ∃y_{i+1} … ∃y_l consistent))
    fn extension_sentence(&self, consistent: &Formula, i: usize) -> Formula {
        let mut sentence = consistent.clone();
        for j in (i + 1..=self.l).rev() {
            sentence = Formula::exists(Var::Bound(PARAM_BASE + j as u32), sentence);
        }
        for j in (1..=i).rev() {
            let y = Var::Bound(PARAM_BASE + j as u32);
            sentence = Formula::exists(y, Formula::Color(self.markers[j - 1].clone(), y).and(sentence));
        }
        sentence
    }

    fn holds(&self, sentence: &Formula, prefix: &[usize]) -> Result<bool> {
        let marks: Vec<(String, Vec<usize>)> = prefix
            .iter()
            .enumerate()
            .map(|(j, &v)| (self.markers[j].clone(), vec![v]))
            .collect();
        let mut marked = self.graph.expand_colors(&marks)?;
        for name in &self.markers[prefix.len()..] {
            marked = marked.expand_colors(&[(name.clone(), Vec::new())])?;
        }
        ModelChecker::new(&marked, sentence)?.eval(&Assignment::new())
    }
}
