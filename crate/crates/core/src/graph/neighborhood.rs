use super::ColoredGraph;
use crate::error::Result;
use std::sync::OnceLock;

/// Distance value for unreachable pairs.
pub const INFINITE: u32 = u32::MAX;

/// BFS distances from `source`; unreachable vertices get [`INFINITE`].
pub fn bfs_distances(graph: &ColoredGraph, source: usize) -> Vec<u32> {
    multi_source_distances(graph, &[source], u32::MAX)
}

/// Distances from the nearest seed, explored up to `limit` (vertices
/// further away stay [`INFINITE`]).
pub fn multi_source_distances(graph: &ColoredGraph, seeds: &[usize], limit: u32) -> Vec<u32> {
    let mut dist = vec![INFINITE; graph.n()];
    let mut frontier = Vec::with_capacity(seeds.len());
    for &s in seeds {
        if dist[s] == INFINITE {
            dist[s] = 0;
            frontier.push(s);
        }
    }
    let mut d = 0;
    while !frontier.is_empty() && d < limit {
        d += 1;
        let mut next = Vec::new();
        for u in frontier {
            for &w in graph.neighbors(u) {
                if dist[w] == INFINITE {
                    dist[w] = d;
                    next.push(w);
                }
            }
        }
        frontier = next;
    }
    dist
}

/// The `r`-neighborhood of a tuple or vertex set: every vertex at distance
/// at most `r` from some seed, ascending.
pub fn ball(graph: &ColoredGraph, seeds: &[usize], r: u32) -> Result<Vec<usize>> {
    graph.check_tuple(seeds)?;
    let dist = multi_source_distances(graph, seeds, r);
    Ok((0..graph.n()).filter(|&v| dist[v] <= r).collect())
}

/// All-pairs distances, computed one BFS row at a time on first use.
///
/// Rows are write-once, so a table can be shared between worker threads and
/// always returns the same values as [`bfs_distances`].
pub struct DistanceTable<'g> {
    graph: &'g ColoredGraph,
    rows: Vec<OnceLock<Vec<u32>>>,
}

impl<'g> DistanceTable<'g> {
    pub fn new(graph: &'g ColoredGraph) -> Self {
        DistanceTable {
            graph,
            rows: (0..graph.n()).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn graph(&self) -> &'g ColoredGraph {
        self.graph
    }

    pub fn row(&self, source: usize) -> &[u32] {
        self.rows[source].get_or_init(|| bfs_distances(self.graph, source))
    }

    pub fn dist(&self, u: usize, v: usize) -> u32 {
        self.row(u)[v]
    }

    /// Distance from `v` to the nearest entry of `seeds`.
    pub fn dist_to_set(&self, v: usize, seeds: &[usize]) -> u32 {
        seeds.iter().map(|&s| self.dist(s, v)).min().unwrap_or(INFINITE)
    }

    /// Ascending ball around `seeds`.
    pub fn ball(&self, seeds: &[usize], r: u32) -> Vec<usize> {
        (0..self.graph.n())
            .filter(|&v| self.dist_to_set(v, seeds) <= r)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Vocabulary;
    use proptest::prelude::*;

    fn path_1_to_5() -> ColoredGraph {
        // vertex i stands for the label i+1 of the path 1-2-3-4-5
        ColoredGraph::build(Vocabulary::empty(), 5, &[(0, 1), (1, 2), (2, 3), (3, 4)], &[]).unwrap()
    }

    #[test]
    fn ball_examples() {
        let g = path_1_to_5();
        assert_eq!(ball(&g, &[2], 1).unwrap(), vec![1, 2, 3]);
        assert_eq!(ball(&g, &[3], 0).unwrap(), vec![3]);
        assert_eq!(ball(&g, &[0, 4], 1).unwrap(), vec![0, 1, 3, 4]);
        assert!(ball(&g, &[9], 1).is_err());
    }

    #[test]
    fn table_matches_bfs() {
        let g = path_1_to_5();
        let table = DistanceTable::new(&g);
        for u in 0..5 {
            assert_eq!(table.row(u), bfs_distances(&g, u).as_slice());
        }
        assert_eq!(table.ball(&[0, 4], 1), ball(&g, &[0, 4], 1).unwrap());
    }

    fn arb_graph() -> impl Strategy<Value = ColoredGraph> {
        (1usize..12).prop_flat_map(|n| {
            proptest::collection::vec((0..n, 0..n), 0..2 * n).prop_map(move |pairs| {
                let edges: Vec<_> = pairs.into_iter().filter(|(u, v)| u != v).collect();
                ColoredGraph::build(Vocabulary::empty(), n, &edges, &[]).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn ball_monotone_in_radius(g in arb_graph(), seed in 0usize..12, r in 0u32..5) {
            let seed = seed % g.n();
            let small = ball(&g, &[seed], r).unwrap();
            let big = ball(&g, &[seed], r + 1).unwrap();
            prop_assert!(small.iter().all(|v| big.contains(v)));
            prop_assert!(small.contains(&seed));
        }

        #[test]
        fn distance_is_symmetric(g in arb_graph(), u in 0usize..12, v in 0usize..12, r in 0u32..5) {
            let (u, v) = (u % g.n(), v % g.n());
            let uv = ball(&g, &[u], r).unwrap().contains(&v);
            let vu = ball(&g, &[v], r).unwrap().contains(&u);
            prop_assert_eq!(uv, vu);
        }
    }
}
