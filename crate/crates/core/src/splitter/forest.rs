//! A Splitter strategy for forests.
//!
//! Every component is rooted once. Splitter answers with the ball vertex
//! closest to the root; every component of the remaining graph lies strictly
//! below that vertex, so component heights drop each round and the game
//! ends within `height + 1` rounds.

use super::Strategy;
use crate::error::{Error, Result};
use crate::graph::{bfs_distances, multi_source_distances, ColoredGraph, INFINITE};

#[derive(Clone, Debug)]
pub struct ForestStrategy {
    depth_of: Vec<u32>,
    height: u32,
    empty: bool,
}

impl ForestStrategy {
    /// Roots every component at a center: the vertex of least eccentricity,
    /// least id on ties.
    pub fn new(graph: &ColoredGraph) -> Result<Self> {
        if !graph.is_forest() {
            return Err(Error::input("forest strategy needs an acyclic graph"));
        }
        let mut roots = Vec::new();
        for comp in graph.components() {
            let center = comp
                .iter()
                .copied()
                .min_by_key(|&v| {
                    let d = bfs_distances(graph, v);
                    (comp.iter().map(|&u| d[u]).max().unwrap_or(0), v)
                })
                .expect("components are non-empty");
            roots.push(center);
        }
        Self::with_roots(graph, &roots)
    }

    /// Uses the given roots, one per component.
    pub fn with_roots(graph: &ColoredGraph, roots: &[usize]) -> Result<Self> {
        if !graph.is_forest() {
            return Err(Error::input("forest strategy needs an acyclic graph"));
        }
        graph.check_tuple(roots)?;
        let depth_of = multi_source_distances(graph, roots, INFINITE);
        let components = graph.components();
        for comp in &components {
            let count = comp.iter().filter(|v| roots.contains(v)).count();
            if count != 1 {
                return Err(Error::input(format!(
                    "component of vertex {} has {count} roots, expected 1",
                    comp[0]
                )));
            }
        }
        Ok(ForestStrategy {
            height: depth_of.iter().copied().max().unwrap_or(0),
            empty: graph.is_empty(),
            depth_of,
        })
    }

    /// Distance from the root of the vertex's component.
    pub fn root_depth(&self, v: usize) -> u32 {
        self.depth_of[v]
    }

    /// Largest root depth over the forest.
    pub fn height(&self) -> u32 {
        self.height
    }

    /// Largest component height of a graph whose vertices map to vertices
    /// of the rooted forest, measured in root depths; vertices without a
    /// counterpart count as height 0.
    pub fn state_height(&self, graph: &ColoredGraph, origin: &[Option<usize>]) -> u32 {
        graph
            .components()
            .iter()
            .map(|comp| {
                let depths: Vec<u32> = comp.iter().map(|&v| self.depth_in(origin, v)).collect();
                depths.iter().max().unwrap() - depths.iter().min().unwrap()
            })
            .max()
            .unwrap_or(0)
    }

    fn depth_in(&self, origin: &[Option<usize>], v: usize) -> u32 {
        origin[v].map_or(0, |o| self.depth_of[o])
    }

    /// The answer to a pick of `v` in the rooted forest itself.
    pub fn answer_in_forest(&self, graph: &ColoredGraph, v: usize, r: u32) -> Result<(usize, u32)> {
        let origin: Vec<Option<usize>> = (0..graph.n()).map(Some).collect();
        self.answer(graph, &origin, v, r)
    }
}

impl Strategy for ForestStrategy {
    fn answer(
        &self,
        graph: &ColoredGraph,
        origin: &[Option<usize>],
        pick: usize,
        radius: u32,
    ) -> Result<(usize, u32)> {
        graph.check_vertex(pick)?;
        if origin.len() != graph.n() {
            return Err(Error::input("origin map does not match the graph"));
        }
        let dist = multi_source_distances(graph, &[pick], radius);
        let w = (0..graph.n())
            .filter(|&u| dist[u] <= radius)
            .min_by_key(|&u| (self.depth_in(origin, u), u))
            .expect("the pick is in its own ball");
        Ok((w, radius))
    }

    fn depth(&self) -> usize {
        if self.empty {
            0
        } else {
            self.height as usize + 1
        }
    }

    fn name(&self) -> &'static str {
        "forest"
    }
}
