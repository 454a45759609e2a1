//! Exact game values by memoized search over vertex subsets.

use super::{bits, Strategy};
use crate::error::{Error, Result};
use crate::graph::{multi_source_distances, ColoredGraph, INFINITE};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// Default cap on the number of memoized states.
pub const DEFAULT_STATE_BUDGET: usize = 2_000_000;

/// Game values of the classic `(r, ·)`-game on a fixed graph, where
/// Splitter always plays radius `r`. States are vertex subsets, stored as
/// bit masks, so graphs are limited to 128 vertices.
#[derive(Debug)]
pub struct ExactSolver {
    adjacency: Vec<u128>,
    radius: u32,
    budget: usize,
    memo: Mutex<HashMap<u128, u32>>,
}

impl ExactSolver {
    pub fn new(graph: &ColoredGraph, radius: u32, budget: usize) -> Result<Self> {
        if graph.n() > 128 {
            return Err(Error::Budget(format!(
                "exact game search supports at most 128 vertices, got {}",
                graph.n()
            )));
        }
        let adjacency = (0..graph.n())
            .map(|v| graph.neighbors(v).iter().fold(0u128, |m, &w| m | (1u128 << w)))
            .collect();
        Ok(ExactSolver {
            adjacency,
            radius,
            budget,
            memo: Mutex::new(HashMap::new()),
        })
    }

    pub fn full_mask(&self) -> u128 {
        match self.adjacency.len() {
            128 => u128::MAX,
            n => (1u128 << n) - 1,
        }
    }

    fn ball(&self, state: u128, v: usize, r: u32) -> u128 {
        let mut seen = 1u128 << v;
        let mut frontier = seen;
        for _ in 0..r {
            let next = bits(frontier).fold(0u128, |m, u| m | self.adjacency[u]) & state & !seen;
            if next == 0 {
                break;
            }
            seen |= next;
            frontier = next;
        }
        seen
    }

    fn components(&self, state: u128) -> Vec<u128> {
        let mut rest = state;
        let mut out = Vec::new();
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            let comp = self.ball(rest, v, u32::MAX);
            out.push(comp);
            rest &= !comp;
        }
        out
    }

    /// Number of rounds Splitter needs from `state` against best play.
    pub fn value(&self, state: u128) -> Result<u32> {
        if state == 0 {
            return Ok(0);
        }
        if let Some(&known) = self.memo.lock().expect("memo lock").get(&state) {
            return Ok(known);
        }
        let components = self.components(state);
        let value = if components.len() > 1 {
            let mut worst = 0;
            for c in components {
                worst = worst.max(self.value(c)?);
            }
            worst
        } else {
            let mut balls: Vec<u128> = bits(state).map(|v| self.ball(state, v, self.radius)).collect();
            balls.sort_unstable();
            balls.dedup();
            let mut worst = 0;
            for b in balls {
                let mut best = u32::MAX;
                for w in bits(b) {
                    best = best.min(self.value(b & !(1u128 << w))?);
                    if best == 0 {
                        break;
                    }
                }
                worst = worst.max(best + 1);
            }
            worst
        };
        let mut memo = self.memo.lock().expect("memo lock");
        if memo.len() >= self.budget {
            return Err(Error::Budget(format!(
                "game search exceeded {} states",
                self.budget
            )));
        }
        memo.insert(state, value);
        Ok(value)
    }

    /// An optimal answer to a pick of `v` in `state`: the ball vertex whose
    /// removal leaves the smallest value, least id on ties. Returns the
    /// answer and the value left after it.
    pub fn best_answer(&self, state: u128, v: usize) -> Result<(usize, u32)> {
        self.best_answer_within(state, v, self.radius)
    }

    /// Like [`ExactSolver::best_answer`], but the game continues in the
    /// `ball_radius`-ball around `v`; values are still those of the game at
    /// the solver's radius.
    pub fn best_answer_within(&self, state: u128, v: usize, ball_radius: u32) -> Result<(usize, u32)> {
        let b = self.ball(state, v, ball_radius);
        let mut best = (u32::MAX, usize::MAX);
        for w in bits(b) {
            let value = self.value(b & !(1u128 << w))?;
            if value < best.0 {
                best = (value, w);
            }
        }
        Ok((best.1, best.0))
    }

    /// Number of memoized states so far.
    pub fn states(&self) -> usize {
        self.memo.lock().expect("memo lock").len()
    }
}

/// The least `s` such that Splitter wins the `(r, s)`-game on `graph`, with
/// Splitter playing radius `r` in every round.
///
/// In the variant where Splitter may shrink the radius, radius 1 is always
/// at least as good as any larger one, so that variant's value does not
/// depend on `r`; this function reports the fixed-radius value.
pub fn minimax_depth(graph: &ColoredGraph, r: u32, budget: usize) -> Result<u32> {
    if r == 0 {
        return Err(Error::input("splitter game radius must be at least 1"));
    }
    let solver = ExactSolver::new(graph, r, budget)?;
    solver.value(solver.full_mask())
}

type SolverKey = Vec<Vec<usize>>;

/// Splitter playing optimal answers, computed by [`ExactSolver`].
///
/// When asked to answer within a smaller radius, the answer still minimizes
/// the value of the game at the strategy's own radius, so the remaining
/// graph is never worse than after an optimal full-radius answer.
///
/// Answers are computed on the component of the pick. When that component
/// is an induced subgraph of the graph the strategy was built for, the
/// strategy's own search table is reused; otherwise the component gets its
/// own solver.
#[derive(Debug)]
pub struct ExactStrategy {
    base: Arc<ExactSolver>,
    base_neighbors: Vec<u128>,
    radius: u32,
    depth: usize,
    budget: usize,
    others: Mutex<HashMap<SolverKey, Arc<ExactSolver>>>,
}

impl ExactStrategy {
    pub fn new(graph: &ColoredGraph, radius: u32) -> Result<Self> {
        Self::with_budget(graph, radius, DEFAULT_STATE_BUDGET)
    }

    pub fn with_budget(graph: &ColoredGraph, radius: u32, budget: usize) -> Result<Self> {
        if radius == 0 {
            return Err(Error::input("splitter game radius must be at least 1"));
        }
        let base = ExactSolver::new(graph, radius, budget)?;
        let depth = base.value(base.full_mask())? as usize;
        Ok(ExactStrategy {
            base_neighbors: base.adjacency.clone(),
            base: Arc::new(base),
            radius,
            depth,
            budget,
            others: Mutex::new(HashMap::new()),
        })
    }

    // The origin mask when `graph` is the induced subgraph of the base graph
    // on its origins.
    fn induced_mask(&self, graph: &ColoredGraph, origin: &[Option<usize>]) -> Option<u128> {
        let mut mask = 0u128;
        for o in origin {
            let o = (*o)?;
            if o >= self.base_neighbors.len() || mask & (1u128 << o) != 0 {
                return None;
            }
            mask |= 1u128 << o;
        }
        for (u, o) in origin.iter().enumerate() {
            let here = graph
                .neighbors(u)
                .iter()
                .fold(0u128, |m, &w| m | (1u128 << origin[w].expect("checked")));
            if here != self.base_neighbors[o.expect("checked")] & mask {
                return None;
            }
        }
        Some(mask)
    }

    fn solver_for(&self, graph: &ColoredGraph) -> Result<Arc<ExactSolver>> {
        let key: SolverKey = (0..graph.n()).map(|v| graph.neighbors(v).to_vec()).collect();
        if let Some(s) = self.others.lock().expect("solver cache lock").get(&key) {
            return Ok(s.clone());
        }
        let solver = Arc::new(ExactSolver::new(graph, self.radius, self.budget)?);
        self.others
            .lock()
            .expect("solver cache lock")
            .insert(key, solver.clone());
        Ok(solver)
    }
}

impl Strategy for ExactStrategy {
    fn answer(
        &self,
        graph: &ColoredGraph,
        origin: &[Option<usize>],
        pick: usize,
        radius: u32,
    ) -> Result<(usize, u32)> {
        graph.check_vertex(pick)?;
        let radius = radius.min(self.radius);
        if radius == 0 {
            return Ok((pick, 0));
        }
        if origin.len() != graph.n() {
            return Err(Error::input("origin map does not match the graph"));
        }
        // Only the component of the pick matters for the answer.
        let dist = multi_source_distances(graph, &[pick], u32::MAX);
        let component: Vec<usize> = (0..graph.n()).filter(|&v| dist[v] != INFINITE).collect();
        let sub = graph.induced_subgraph(&component)?;
        let sub_origin: Vec<Option<usize>> = sub.to_old.iter().map(|&v| origin[v]).collect();
        let sub_pick = sub.to_new[pick].expect("pick is in its component");
        if let Some(mask) = self.induced_mask(&sub.graph, &sub_origin) {
            let (w, _) = self
                .base
                .best_answer_within(mask, sub_origin[sub_pick].expect("checked"), radius)?;
            let local = sub_origin
                .iter()
                .position(|&o| o == Some(w))
                .expect("answer lies in the state");
            return Ok((sub.to_old[local], radius));
        }
        let solver = self.solver_for(&sub.graph)?;
        let (w, _) = solver.best_answer_within(solver.full_mask(), sub_pick, radius)?;
        Ok((sub.to_old[w], radius))
    }

    fn depth(&self) -> usize {
        self.depth
    }

    fn name(&self) -> &'static str {
        "exact"
    }
}
