//! Deciding first-order sentences with nothing but a learning oracle.
//!
//! For `∃x ψ`, every pair of vertices is handed to the oracle as a one
//! positive, one negative sample. Pairs the oracle cannot separate are
//! joined, and the components of the resulting graph partition the vertices
//! into classes of equal rank-`(q-1)` type. One representative per class is
//! pinned as a constant and the procedure recurses on `ψ`.

use crate::error::{Error, Result};
use crate::graph::{ColoredGraph, VertexTuple};
use crate::learn::{learn_const_l, training_error, LearnOutcome, Rate, Sample, erm_typeset};
use crate::logic::{eval, pin_constant, Assignment, Formula, Var};
use crate::par;
use serde::{Deserialize, Serialize};
use std::sync::atomic::{AtomicU64, Ordering};

/// A learner answering the consistent-learning problem.
pub trait LearnOracle: Sync {
    /// A hypothesis consistent with `sample`, or a rejection. The hypothesis
    /// may use up to [`LearnOracle::parameter_budget`]`(l, k, q)` parameters.
    fn learn(&self, graph: &ColoredGraph, sample: &Sample, l: usize, q: u32) -> Result<LearnOutcome>;

    /// Number of parameters the oracle may use when asked for `l`.
    fn parameter_budget(&self, l: usize, k: usize, q: u32) -> usize;

    fn name(&self) -> &'static str;
}

/// The constant-parameter learner.
#[derive(Clone, Copy, Debug, Default)]
pub struct ConstLOracle;

impl LearnOracle for ConstLOracle {
    fn learn(&self, graph: &ColoredGraph, sample: &Sample, l: usize, q: u32) -> Result<LearnOutcome> {
        learn_const_l(graph, sample, l, q)
    }

    fn parameter_budget(&self, l: usize, _k: usize, _q: u32) -> usize {
        l
    }

    fn name(&self) -> &'static str {
        "const-l"
    }
}

/// Brute-force ERM, rejecting unless the minimum error is zero.
#[derive(Clone, Copy, Debug, Default)]
pub struct ErmOracle;

impl LearnOracle for ErmOracle {
    fn learn(&self, graph: &ColoredGraph, sample: &Sample, l: usize, q: u32) -> Result<LearnOutcome> {
        let out = erm_typeset(graph, sample, l, q)?;
        if out.mistakes == 0 {
            Ok(LearnOutcome::Learned(out.hypothesis))
        } else {
            Ok(LearnOutcome::Reject)
        }
    }

    fn parameter_budget(&self, l: usize, _k: usize, _q: u32) -> usize {
        l
    }

    fn name(&self) -> &'static str {
        "erm"
    }
}

/// The constant-parameter learner granted `extra` parameters beyond the
/// requested number.
#[derive(Clone, Copy, Debug)]
pub struct ExtraParamOracle {
    pub extra: usize,
}

impl LearnOracle for ExtraParamOracle {
    fn learn(&self, graph: &ColoredGraph, sample: &Sample, l: usize, q: u32) -> Result<LearnOutcome> {
        learn_const_l(graph, sample, l + self.extra, q)
    }

    fn parameter_budget(&self, l: usize, _k: usize, _q: u32) -> usize {
        l + self.extra
    }

    fn name(&self) -> &'static str {
        "extra-param"
    }
}

/// One `∃`-step of the recursion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelRecord {
    /// Nesting depth of the step.
    pub depth: usize,
    pub vertices: usize,
    pub oracle_calls: u64,
    pub classes: Vec<Vec<usize>>,
}

/// Verdict and bookkeeping of [`mc_via_learn_oracle`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct McReport {
    pub verdict: bool,
    pub oracle_calls: u64,
    pub levels: Vec<LevelRecord>,
}

/// Decides `graph ⊨ sentence` using the oracle for every type comparison.
///
/// Fails with an invariant error when the oracle returns a hypothesis that
/// is not consistent with its sample.
pub fn mc_via_learn_oracle(graph: &ColoredGraph, sentence: &Formula, oracle: &dyn LearnOracle) -> Result<McReport> {
    if !sentence.is_sentence() {
        return Err(Error::input(format!("`{sentence}` has free variables")));
    }
    sentence.check(graph.vocabulary())?;
    let mut run = Run {
        oracle,
        calls: AtomicU64::new(0),
        levels: Vec::new(),
    };
    let verdict = run.decide(graph, sentence, 0)?;
    Ok(McReport {
        verdict,
        oracle_calls: run.calls.load(Ordering::Relaxed),
        levels: run.levels,
    })
}

struct Run<'o> {
    oracle: &'o dyn LearnOracle,
    calls: AtomicU64,
    levels: Vec<LevelRecord>,
}

impl Run<'_> {
    fn decide(&mut self, graph: &ColoredGraph, phi: &Formula, depth: usize) -> Result<bool> {
        if phi.quantifier_rank() == 0 {
            return eval(graph, phi, &Assignment::new());
        }
        match phi {
            Formula::Not(a) => Ok(!self.decide(graph, a, depth)?),
            Formula::And(a, b) => Ok(self.decide(graph, a, depth)? && self.decide(graph, b, depth)?),
            Formula::Or(a, b) => Ok(self.decide(graph, a, depth)? || self.decide(graph, b, depth)?),
            Formula::Implies(a, b) => Ok(!self.decide(graph, a, depth)? || self.decide(graph, b, depth)?),
            Formula::Forall(x, body) => {
                let dual = Formula::exists(*x, body.as_ref().clone().not());
                Ok(!self.decide(graph, &dual, depth)?)
            }
            Formula::Exists(x, body) => {
                if graph.n() == 0 {
                    return Ok(false);
                }
                if !body.free_vars().contains(x) {
                    return self.decide(graph, body, depth);
                }
                // Sentences only quantify z-variables, so x1 is unused and
                // can stand for the pinned vertex.
                let open = body.rename_free(*x, Var::Instance(1));
                let classes = self.classes(graph, body.quantifier_rank(), depth)?;
                for class in &classes {
                    let pinned = pin_constant(graph, &open, Var::Instance(1), class[0])?;
                    if self.decide(&pinned.graph, &pinned.formula, depth + 1)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            _ => unreachable!("atoms have rank 0"),
        }
    }

    /// Components of the graph joining oracle-inseparable pairs; each class
    /// ascending, classes ordered by least element.
    fn classes(&mut self, graph: &ColoredGraph, q: u32, depth: usize) -> Result<Vec<Vec<usize>>> {
        let n = graph.n();
        let copies = self.oracle.parameter_budget(0, 1, q) + 1;
        let (union, maps) = graph.disjoint_copies(copies)?;
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|v| (v + 1..n).map(move |w| (v, w))).collect();
        let before = self.calls.load(Ordering::Relaxed);
        let oracle = self.oracle;
        let calls = &self.calls;
        let joined = par::map_range(pairs.len(), |i| -> Result<bool> {
            let (v, w) = pairs[i];
            let tuples = |u: usize| maps.iter().map(|m| VertexTuple::new(vec![m[u]])).collect::<Vec<_>>();
            let sample = Sample::new(1, tuples(w), tuples(v))?;
            calls.fetch_add(1, Ordering::Relaxed);
            match oracle.learn(&union, &sample, 0, q)? {
                LearnOutcome::Reject => Ok(true),
                LearnOutcome::Learned(h) => {
                    if training_error(&union, &h, &sample)? != Rate::from_integer(0) {
                        return Err(Error::invariant(format!(
                            "{} oracle returned an inconsistent hypothesis for ({v}, {w})",
                            oracle.name()
                        )));
                    }
                    Ok(false)
                }
            }
        });
        let mut parent: Vec<usize> = (0..n).collect();
        fn root(parent: &mut [usize], mut a: usize) -> usize {
            while parent[a] != a {
                parent[a] = parent[parent[a]];
                a = parent[a];
            }
            a
        }
        for (&(v, w), same) in pairs.iter().zip(joined) {
            if same? {
                let (a, b) = (root(&mut parent, v), root(&mut parent, w));
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut classes: Vec<Vec<usize>> = Vec::new();
        let mut slot = vec![usize::MAX; n];
        for v in 0..n {
            let r = root(&mut parent, v);
            if slot[r] == usize::MAX {
                slot[r] = classes.len();
                classes.push(Vec::new());
            }
            classes[slot[r]].push(v);
        }
        self.levels.push(LevelRecord {
            depth,
            vertices: n,
            oracle_calls: self.calls.load(Ordering::Relaxed) - before,
            classes: classes.clone(),
        });
        Ok(classes)
    }
}
