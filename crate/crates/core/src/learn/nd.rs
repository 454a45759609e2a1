//! The agnostic learner for nowhere dense classes.
//!
//! Stage `i` looks at the conflicts of the current examples, picks the set
//! `X` they cluster around, and for every `Y ⊆ X` with `|Y| ≤ ℓ` covers `Y`
//! by disjoint balls, asks the splitter for answers to the ball centers, and
//! projects to the next stage graph. Every branch ends in a parameter tuple;
//! the one with the fewest training mistakes wins.

use super::conflicts::{conflicts_of, select_x, SelectParams};
use super::projection::{project_stage, StageInput};
use super::{examples_of, finish_hypothesis, fit_majority, Example, Hypothesis, LearnConfig, Rate, Sample, TypeRule};
use crate::error::{Error, Result};
use crate::graph::{multi_source_distances, vitali_cover, ColoredGraph, CoverResult};
use crate::par;
use crate::splitter::{minimax_depth, Strategy, DEFAULT_STATE_BUDGET};
use crate::types::TypeContext;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, Ordering};

/// Limits of the branch search and of the per-stage game check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NdBudget {
    /// Maximum number of explored branches.
    pub leaves: u64,
    /// Stage graphs up to this size get their splitter game value checked.
    pub check_vertices: usize,
}

impl Default for NdBudget {
    fn default() -> Self {
        NdBudget {
            leaves: 200_000,
            check_vertices: 15,
        }
    }
}

/// The choices of one stage on the winning branch.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageTrace {
    pub stage: usize,
    /// Size of the stage graph.
    pub vertices: usize,
    pub examples: usize,
    pub conflicts: u64,
    pub critical: usize,
    /// Stage-graph ids.
    pub x: Vec<usize>,
    pub y: Vec<usize>,
    pub centers: Vec<usize>,
    pub cover_radius: u32,
    pub answers: Vec<usize>,
    /// The stage's `ℓ` parameters in ids of the input graph.
    pub parameters: Vec<usize>,
    /// Examples passed on to the next stage, if there is one.
    pub projected: Option<usize>,
}

/// Result of [`learn_nd_with`].
#[derive(Clone, Debug)]
pub struct NdOutcome {
    pub hypothesis: Hypothesis,
    pub error: Rate,
    pub mistakes: usize,
    /// Number of explored branches.
    pub leaves: u64,
    /// Splitter depth `s` used.
    pub depth: usize,
    /// Projections built across all branches.
    pub projections: u64,
    /// Projections whose stage graph had its splitter depth checked.
    pub depth_checks: u64,
}

/// Learns with [`NdBudget::default`].
pub fn learn_nd(graph: &ColoredGraph, sample: &Sample, cfg: &LearnConfig, strategy: &dyn Strategy) -> Result<Hypothesis> {
    Ok(learn_nd_with(graph, sample, cfg, strategy, NdBudget::default())?.hypothesis)
}

/// Runs the staged search and returns the best branch's hypothesis.
///
/// The final rule classifies `v̄` by the pair of local types of `v̄w̄` at
/// radii `r` and `R`, by majority vote (ties negative).
pub fn learn_nd_with(
    graph: &ColoredGraph,
    sample: &Sample,
    cfg: &LearnConfig,
    strategy: &dyn Strategy,
    budget: NdBudget,
) -> Result<NdOutcome> {
    cfg.validate()?;
    if cfg.k != sample.k() {
        return Err(Error::input(format!(
            "config arity {} does not match sample arity {}",
            cfg.k,
            sample.k()
        )));
    }
    sample.check(graph)?;
    let s = strategy.depth();
    let total = cfg.parameter_count(s);
    if graph.n() == 0 && total > 0 {
        return Err(Error::input("cannot choose parameters in an empty graph"));
    }
    let examples = examples_of(sample);
    let vocab = graph.vocabulary().clone();
    let contexts = vec![
        TypeContext::with_radius(cfg.q, cfg.r(), vocab.clone()),
        TypeContext::with_radius(cfg.q, cfg.game_radius(), vocab),
    ];
    let search = Search {
        root: graph,
        root_examples: &examples,
        cfg,
        strategy,
        contexts: &contexts,
        s,
        total,
        r: cfg.r(),
        base: cfg.base_radius(),
        game_radius: cfg.game_radius(),
        total_critical: conflicts_of(graph, &examples, cfg.q, cfg.r())?.critical.len(),
        budget,
        leaves: AtomicU64::new(0),
        projections: AtomicU64::new(0),
        depth_checks: AtomicU64::new(0),
    };
    let best = if examples.is_empty() || s == 0 {
        search.leaf(Vec::new(), Vec::new())?
    } else {
        let start = StageGraph {
            graph: graph.clone(),
            to_root: (0..graph.n()).map(Some).collect(),
            examples: examples.clone(),
        };
        search.explore(0, start, Vec::new(), Vec::new())?
    };
    let (positive, mistakes) = fit_majority(graph, &examples, &best.parameters, &contexts);
    debug_assert_eq!(mistakes, best.mistakes);
    let rule = TypeRule {
        contexts: contexts.clone(),
        positive,
    };
    let hypothesis = finish_hypothesis(
        graph,
        &examples,
        cfg.k,
        best.parameters,
        rule,
        cfg.rank_bound(),
        best.trace,
    )?;
    let error = if examples.is_empty() {
        Rate::from_integer(0)
    } else {
        Rate::new(mistakes as u64, examples.len() as u64)
    };
    Ok(NdOutcome {
        hypothesis,
        error,
        mistakes,
        leaves: search.leaves.load(Ordering::Relaxed),
        depth: s,
        projections: search.projections.load(Ordering::Relaxed),
        depth_checks: search.depth_checks.load(Ordering::Relaxed),
    })
}

struct StageGraph {
    graph: ColoredGraph,
    to_root: Vec<Option<usize>>,
    examples: Vec<Example>,
}

#[derive(Clone, Debug)]
struct Best {
    mistakes: usize,
    parameters: Vec<usize>,
    trace: Vec<StageTrace>,
}

struct Search<'a> {
    root: &'a ColoredGraph,
    root_examples: &'a [Example],
    cfg: &'a LearnConfig,
    strategy: &'a dyn Strategy,
    contexts: &'a [TypeContext],
    s: usize,
    total: usize,
    r: u32,
    base: u32,
    game_radius: u32,
    total_critical: usize,
    budget: NdBudget,
    leaves: AtomicU64,
    projections: AtomicU64,
    depth_checks: AtomicU64,
}

impl Search<'_> {
    fn leaf(&self, mut parameters: Vec<usize>, trace: Vec<StageTrace>) -> Result<Best> {
        let seen = self.leaves.fetch_add(1, Ordering::Relaxed) + 1;
        if seen > self.budget.leaves {
            return Err(Error::Budget(format!(
                "more than {} parameter branches",
                self.budget.leaves
            )));
        }
        parameters.resize(self.total, 0);
        let (_, mistakes) = fit_majority(self.root, self.root_examples, &parameters, self.contexts);
        Ok(Best {
            mistakes,
            parameters,
            trace,
        })
    }

    fn explore(&self, stage: usize, current: StageGraph, prefix: Vec<usize>, trace: Vec<StageTrace>) -> Result<Best> {
        let cfg = self.cfg;
        let report = conflicts_of(&current.graph, &current.examples, cfg.q, self.r)?;
        let mut entry = StageTrace {
            stage,
            vertices: current.graph.n(),
            examples: current.examples.len(),
            conflicts: report.conflict_count(),
            critical: report.critical.len(),
            x: Vec::new(),
            y: Vec::new(),
            centers: Vec::new(),
            cover_radius: 0,
            answers: Vec::new(),
            parameters: Vec::new(),
            projected: None,
        };
        if report.is_conflict_free() {
            return self.leaf(prefix, with(trace, entry));
        }
        let x = select_x(
            &current.graph,
            &report,
            &SelectParams {
                k: cfg.k,
                l: cfg.l,
                s: self.s,
                r: self.r,
                epsilon: cfg.epsilon,
                total_critical: self.total_critical,
            },
        )?;
        entry.x = x.clone();
        let subsets = small_subsets(&x, cfg.l);
        let results = par::map_range(subsets.len(), |i| {
            let y = &subsets[i];
            if y.is_empty() {
                let mut e = entry.clone();
                e.parameters = Vec::new();
                return self.leaf(prefix.clone(), with(trace.clone(), e));
            }
            self.branch(stage, &current, &report.critical, y, &prefix, &trace, entry.clone())
        });
        let mut best: Option<Best> = None;
        for result in results {
            let candidate = result?;
            if best.as_ref().is_none_or(|b| candidate.mistakes < b.mistakes) {
                best = Some(candidate);
            }
        }
        Ok(best.expect("the empty subset is always explored"))
    }

    #[allow(clippy::too_many_arguments)]
    fn branch(
        &self,
        stage: usize,
        current: &StageGraph,
        critical: &[usize],
        y: &[usize],
        prefix: &[usize],
        trace: &[StageTrace],
        mut entry: StageTrace,
    ) -> Result<Best> {
        let cfg = self.cfg;
        let graph = &current.graph;
        let cover = vitali_cover(graph, y, self.base)?;
        if cover.radius > self.game_radius {
            return Err(Error::invariant(format!(
                "cover radius {} exceeds the game radius {}",
                cover.radius, self.game_radius
            )));
        }
        let answers = self.answers(current, &cover)?;
        let mut block: Vec<usize> = answers.iter().map(|&w| current.to_root[w].unwrap_or(0)).collect();
        let last = *block.last().expect("cover of a nonempty set");
        block.resize(cfg.l, last);

        entry.y = y.to_vec();
        entry.centers = cover.centers.clone();
        entry.cover_radius = cover.radius;
        entry.answers = answers.clone();
        entry.parameters = block.clone();
        let parameters = [prefix, &block].concat();

        if stage + 1 >= self.s {
            return self.leaf(parameters, with(trace.to_vec(), entry));
        }
        let projection = project_stage(&StageInput {
            stage,
            graph,
            examples: &current.examples,
            critical,
            y,
            cover: &cover,
            answers: &answers,
            q: cfg.q,
            r: self.r,
            base: self.base,
        })?;
        let next = projection.graph;
        self.projections.fetch_add(1, Ordering::Relaxed);
        if next.n() <= self.budget.check_vertices && next.n() > 0 {
            self.depth_checks.fetch_add(1, Ordering::Relaxed);
            let value = minimax_depth(&next, self.game_radius, DEFAULT_STATE_BUDGET)? as usize;
            if value > self.s - (stage + 1) {
                return Err(Error::invariant(format!(
                    "stage graph {} needs {value} splitter rounds, more than the remaining {}",
                    stage + 1,
                    self.s - (stage + 1)
                )));
            }
        }
        entry.projected = Some(projection.examples.len());
        let to_root = projection
            .origin
            .iter()
            .map(|o| o.and_then(|v| current.to_root[v]))
            .collect();
        let following = StageGraph {
            graph: next,
            to_root,
            examples: projection.examples,
        };
        self.explore(stage + 1, following, parameters, with(trace.to_vec(), entry))
    }

    fn answers(&self, current: &StageGraph, cover: &CoverResult) -> Result<Vec<usize>> {
        let graph = &current.graph;
        let mut answers = Vec::with_capacity(cover.centers.len());
        for &z in &cover.centers {
            let (w, radius) = self.strategy.answer(graph, &current.to_root, z, cover.radius)?;
            if radius < cover.radius {
                return Err(Error::input(format!(
                    "{} splitter answered with radius {radius}, below the required {}",
                    self.strategy.name(),
                    cover.radius
                )));
            }
            let dist = multi_source_distances(graph, &[z], cover.radius);
            if w >= graph.n() || dist[w] > cover.radius {
                return Err(Error::invariant(format!(
                    "splitter answer {w} is not within distance {} of {z}",
                    cover.radius
                )));
            }
            answers.push(w);
        }
        Ok(answers)
    }
}

fn with(mut trace: Vec<StageTrace>, entry: StageTrace) -> Vec<StageTrace> {
    trace.push(entry);
    trace
}

/// Subsets of `x` with at most `l` elements: the empty set, then by size,
/// then lexicographically.
pub(crate) fn small_subsets(x: &[usize], l: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut layer: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..l.min(x.len()) {
        let mut next = Vec::new();
        for set in &layer {
            let start = set.last().map_or(0, |&last| x.iter().position(|&v| v == last).unwrap() + 1);
            for &v in &x[start..] {
                let mut grown = set.clone();
                grown.push(v);
                next.push(grown);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    debug_assert!(out.iter().map(|s| s.iter().collect::<BTreeSet<_>>().len()).eq(out.iter().map(Vec::len)));
    out
}
