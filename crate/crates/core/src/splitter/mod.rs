//! The (r,s)-splitter game.
//!
//! In each round Connector picks a vertex `v` of the current graph, Splitter
//! answers with a vertex `w` and a radius `r' <= r`, and the game continues
//! on the subgraph induced by the `r'`-ball around `v` minus `w`. Splitter
//! wins once the graph is empty.

mod exact;
mod forest;

pub use exact::{minimax_depth, ExactSolver, ExactStrategy, DEFAULT_STATE_BUDGET};
pub use forest::ForestStrategy;

use crate::error::{Error, Result};
use crate::graph::{multi_source_distances, ColoredGraph};
use std::collections::HashMap;

/// A rule for Splitter's answers.
///
/// `origin[v]` is the vertex of the graph the strategy was built for that
/// `v` stands for, or `None` for vertices without a counterpart. Answers are
/// ids in `graph`; the returned radius must not exceed `radius`.
pub trait Strategy: Send + Sync {
    fn answer(
        &self,
        graph: &ColoredGraph,
        origin: &[Option<usize>],
        pick: usize,
        radius: u32,
    ) -> Result<(usize, u32)>;

    /// Number of rounds within which the strategy wins on the graph it was
    /// built for.
    fn depth(&self) -> usize;

    fn name(&self) -> &'static str;
}

/// One round of play, in ids of the starting graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Round {
    pub pick: usize,
    pub answer: usize,
    pub radius: u32,
}

/// A position in the game.
#[derive(Clone, Debug)]
pub struct GameState {
    pub graph: ColoredGraph,
    /// Current id to id in the starting graph.
    pub origin: Vec<usize>,
    pub radius: u32,
    pub history: Vec<Round>,
}

impl GameState {
    pub fn new(graph: ColoredGraph, radius: u32) -> Self {
        let origin = (0..graph.n()).collect();
        GameState {
            graph,
            origin,
            radius,
            history: Vec::new(),
        }
    }

    pub fn round(&self) -> usize {
        self.history.len()
    }

    pub fn is_won(&self) -> bool {
        self.graph.is_empty()
    }

    /// Connector picks `pick` (an id in the current graph) and `strategy`
    /// answers.
    pub fn play_round(&self, strategy: &dyn Strategy, pick: usize) -> Result<GameState> {
        if self.is_won() {
            return Err(Error::input("the game is already won"));
        }
        self.graph.check_vertex(pick)?;
        let origin: Vec<Option<usize>> = self.origin.iter().map(|&o| Some(o)).collect();
        let (w, r) = strategy.answer(&self.graph, &origin, pick, self.radius)?;
        let ball = legal_ball(&self.graph, pick, w, r, self.radius)?;
        let keep: Vec<usize> = ball.into_iter().filter(|&u| u != w).collect();
        let sub = self.graph.induced_subgraph(&keep)?;
        let mut history = self.history.clone();
        history.push(Round {
            pick: self.origin[pick],
            answer: self.origin[w],
            radius: r,
        });
        Ok(GameState {
            origin: sub.to_old.iter().map(|&v| self.origin[v]).collect(),
            graph: sub.graph,
            radius: self.radius,
            history,
        })
    }
}

// The r-ball around `pick`, after checking that (w, r) is a legal answer.
fn legal_ball(graph: &ColoredGraph, pick: usize, w: usize, r: u32, budget: u32) -> Result<Vec<usize>> {
    if r > budget {
        return Err(Error::invariant(format!("answer radius {r} exceeds {budget}")));
    }
    let dist = multi_source_distances(graph, &[pick], r);
    if w >= graph.n() || dist[w] > r {
        return Err(Error::invariant(format!(
            "answer {w} is not within distance {r} of pick {pick}"
        )));
    }
    Ok((0..graph.n()).filter(|&u| dist[u] <= r).collect())
}

/// Outcome of [`verify_winning`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// The strategy wins against every Connector play within the bound.
    Winning,
    /// Some Connector play survives the bound; `rounds_needed` is what the
    /// strategy actually needs in the worst case.
    Losing { rounds_needed: usize },
    /// The search budget ran out.
    Indeterminate,
}

/// Checks by exhaustive search over Connector's picks whether `strategy`
/// wins the `(r, s)`-game on `graph`.
pub fn verify_winning(
    graph: &ColoredGraph,
    r: u32,
    s: usize,
    strategy: &dyn Strategy,
    budget: usize,
) -> Result<Verdict> {
    if graph.n() > 128 {
        return Ok(Verdict::Indeterminate);
    }
    let mut search = Verifier {
        graph,
        r,
        strategy,
        memo: HashMap::new(),
        budget,
    };
    let full = if graph.n() == 128 {
        u128::MAX
    } else {
        (1u128 << graph.n()) - 1
    };
    match search.need(full) {
        Ok(need) if need <= s => Ok(Verdict::Winning),
        Ok(need) => Ok(Verdict::Losing { rounds_needed: need }),
        Err(e) if e.is_budget() => Ok(Verdict::Indeterminate),
        Err(e) => Err(e),
    }
}

struct Verifier<'a> {
    graph: &'a ColoredGraph,
    r: u32,
    strategy: &'a dyn Strategy,
    memo: HashMap<u128, usize>,
    budget: usize,
}

pub(crate) fn bits(mut mask: u128) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let v = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(v)
        }
    })
}

impl Verifier<'_> {
    fn need(&mut self, state: u128) -> Result<usize> {
        if state == 0 {
            return Ok(0);
        }
        if let Some(&known) = self.memo.get(&state) {
            return Ok(known);
        }
        if self.memo.len() >= self.budget {
            return Err(Error::Budget("verification state limit reached".into()));
        }
        let members: Vec<usize> = bits(state).collect();
        let sub = self.graph.induced_subgraph(&members)?;
        let origin: Vec<Option<usize>> = sub.to_old.iter().map(|&v| Some(v)).collect();
        let mut worst = 0;
        for pick in 0..sub.graph.n() {
            let (w, r) = self.strategy.answer(&sub.graph, &origin, pick, self.r)?;
            let ball = legal_ball(&sub.graph, pick, w, r, self.r)?;
            let next = ball
                .into_iter()
                .filter(|&u| u != w)
                .fold(0u128, |m, u| m | (1u128 << sub.to_old[u]));
            worst = worst.max(self.need(next)?);
        }
        let need = worst + 1;
        self.memo.insert(state, need);
        Ok(need)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Vocabulary;

    fn graph(n: usize, edges: &[(usize, usize)]) -> ColoredGraph {
        ColoredGraph::build(Vocabulary::empty(), n, edges, &[]).unwrap()
    }

    #[test]
    fn single_vertex_won_in_one_round() {
        let g = graph(1, &[]);
        let strategy = ExactStrategy::new(&g, 3).unwrap();
        let state = GameState::new(g.clone(), 3).play_round(&strategy, 0).unwrap();
        assert!(state.is_won());
        assert_eq!(state.round(), 1);
        assert_eq!(state.history[0].answer, 0);
        assert_eq!(verify_winning(&g, 3, 1, &strategy, 1000).unwrap(), Verdict::Winning);
    }

    #[test]
    fn k2_needs_two_rounds_under_any_answer() {
        let g = graph(2, &[(0, 1)]);
        for strategy in [
            Box::new(ExactStrategy::new(&g, 1).unwrap()) as Box<dyn Strategy>,
            Box::new(ForestStrategy::new(&g).unwrap()),
        ] {
            for pick in 0..2 {
                let after = GameState::new(g.clone(), 1).play_round(strategy.as_ref(), pick).unwrap();
                assert_eq!(after.graph.n(), 1);
                assert!(!after.is_won());
                let done = after.play_round(strategy.as_ref(), 0).unwrap();
                assert!(done.is_won());
            }
            assert_eq!(
                verify_winning(&g, 1, 1, strategy.as_ref(), 1000).unwrap(),
                Verdict::Losing { rounds_needed: 2 }
            );
            assert_eq!(verify_winning(&g, 1, 2, strategy.as_ref(), 1000).unwrap(), Verdict::Winning);
        }
    }

    #[test]
    fn star_leaf_pick_answered_by_center() {
        let g = graph(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        let strategy = ForestStrategy::new(&g).unwrap();
        let after = GameState::new(g, 1).play_round(&strategy, 3).unwrap();
        assert_eq!(after.history[0].answer, 0);
        assert_eq!(after.origin, vec![3]);
    }

    #[test]
    fn successor_is_induced_subgraph() {
        let g = graph(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)]);
        let strategy = ExactStrategy::new(&g, 2).unwrap();
        let mut state = GameState::new(g.clone(), 2);
        while !state.is_won() {
            let next = state.play_round(&strategy, state.graph.n() - 1).unwrap();
            assert!(next.graph.n() < state.graph.n());
            let check = g.induced_subgraph(&next.origin).unwrap();
            assert_eq!(check.graph, next.graph);
            state = next;
        }
        assert!(state.round() <= strategy.depth());
    }

    #[test]
    fn illegal_answers_are_rejected() {
        struct Far;
        impl Strategy for Far {
            fn answer(&self, g: &ColoredGraph, _: &[Option<usize>], _: usize, r: u32) -> Result<(usize, u32)> {
                Ok((g.n() - 1, r))
            }
            fn depth(&self) -> usize {
                1
            }
            fn name(&self) -> &'static str {
                "far"
            }
        }
        let g = graph(4, &[(0, 1), (1, 2), (2, 3)]);
        let err = GameState::new(g, 1).play_round(&Far, 0).unwrap_err();
        assert!(matches!(err, Error::Invariant(_)));
    }
}
