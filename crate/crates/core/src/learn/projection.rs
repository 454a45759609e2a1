//! Passing from one stage graph to the next.
//!
//! The next graph keeps the `R'`-ball around the cover centers `Z`, with the
//! splitter's answers cut loose, distance and neighborhood information
//! recorded in fresh colors, and one isolated vertex per far component type
//! of the projected examples.

use super::Example;
use crate::error::{Error, Result};
use crate::graph::{multi_source_distances, ColoredGraph, CoverResult, INFINITE};
use crate::types::{local_type, TypeId};
use std::collections::{BTreeMap, BTreeSet};

/// Everything the projection needs from one stage.
#[derive(Clone, Copy, Debug)]
pub struct StageInput<'a> {
    /// Stage index `i`, used in fresh color names.
    pub stage: usize,
    pub graph: &'a ColoredGraph,
    pub examples: &'a [Example],
    /// Positions of the critical examples in `examples`.
    pub critical: &'a [usize],
    /// The guessed set `Y`.
    pub y: &'a [usize],
    /// `Z ⊆ Y` and `R'` from the ball cover of `Y`.
    pub cover: &'a CoverResult,
    /// The splitter's answer to each center of `cover`, in order.
    pub answers: &'a [usize],
    pub q: u32,
    pub r: u32,
    /// Radius of the cover base, `(k+2)(2r+1)`.
    pub base: u32,
}

/// A connected component of the closeness graph on example positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub positions: Vec<usize>,
    /// Whether the entries were kept, as opposed to replaced by a type vertex.
    pub kept: bool,
}

/// The next stage graph and its examples.
#[derive(Clone, Debug)]
pub struct ProjectionOutcome {
    pub graph: ColoredGraph,
    /// Vertex of the current graph each new vertex came from; `None` for
    /// fresh type vertices.
    pub origin: Vec<Option<usize>>,
    /// `N_{R'}(Z)`, ascending, in current ids. These are new vertices
    /// `0..ball.len()`.
    pub ball: Vec<usize>,
    /// Isolated vertices of the current graph outside the ball, in current ids.
    pub kept_isolated: Vec<usize>,
    /// New ids of the fresh type vertices.
    pub fresh: Vec<usize>,
    /// Names of the colors added by the projection.
    pub new_colors: Vec<String>,
    pub examples: Vec<Example>,
    /// Position in the current example list of each projected example.
    pub example_origin: Vec<usize>,
    pub components: Vec<Vec<Component>>,
}

/// Builds the next stage graph and projects the critical examples near `Y`.
///
/// Checks that the vertex set splits into ball, kept isolated and fresh
/// vertices, that every edge comes from an edge of the current graph, and
/// that projected examples of equal type with opposite labels come from
/// examples of equal type.
pub fn project_stage(input: &StageInput<'_>) -> Result<ProjectionOutcome> {
    let StageInput {
        stage,
        graph,
        examples,
        critical,
        y,
        cover,
        answers,
        q,
        r,
        base,
    } = *input;
    if answers.len() != cover.centers.len() {
        return Err(Error::input(format!(
            "{} splitter answers for {} cover centers",
            answers.len(),
            cover.centers.len()
        )));
    }
    graph.check_tuple(y)?;
    graph.check_tuple(&cover.centers)?;
    graph.check_tuple(answers)?;

    let to_ball = multi_source_distances(graph, &cover.centers, cover.radius);
    let ball: Vec<usize> = (0..graph.n()).filter(|&v| to_ball[v] != INFINITE).collect();
    let kept_isolated: Vec<usize> = (0..graph.n())
        .filter(|&v| to_ball[v] == INFINITE && graph.degree(v) == 0)
        .collect();

    let restriction = graph.induced_subgraph(&ball)?;
    let mut next = restriction.graph;
    let mut origin: Vec<Option<usize>> = ball.iter().map(|&v| Some(v)).collect();
    for &v in &kept_isolated {
        let id = next.push_vertex();
        for &c in graph.colors_of(v) {
            next.insert_color(c as usize, id)?;
        }
        origin.push(Some(v));
    }
    let new_id = |v: usize| -> Option<usize> { restriction.to_new[v] };

    let mut new_colors = Vec::new();
    let mut add_color = |next: &mut ColoredGraph, base_name: String| -> Result<usize> {
        let name = next.vocabulary().fresh_name(&base_name);
        new_colors.push(name.clone());
        next.push_color(name)
    };

    for (j, &yj) in y.iter().enumerate() {
        let dist = multi_source_distances(graph, &[yj], base);
        for d in 0..=base {
            let c = add_color(&mut next, format!("D{stage}_{}_{d}", j + 1))?;
            for &v in &ball {
                if dist[v] == d {
                    next.insert_color(c, new_id(v).expect("ball vertex"))?;
                }
            }
        }
    }
    for (j, &w) in answers.iter().enumerate() {
        let near = add_color(&mut next, format!("C{stage}_{}", j + 1))?;
        let mark = add_color(&mut next, format!("B{stage}_{}", j + 1))?;
        let w_new = new_id(w).ok_or_else(|| Error::invariant(format!("splitter answer {w} outside the ball")))?;
        next.insert_color(near, w_new)?;
        for &u in graph.neighbors(w) {
            if let Some(u_new) = new_id(u) {
                next.insert_color(near, u_new)?;
            }
        }
        next.insert_color(mark, w_new)?;
        next.isolate(w_new);
    }

    // Examples with an entry close to Y.
    let to_y = multi_source_distances(graph, y, 6 * r + 3);
    let mut type_vertices: BTreeMap<(Vec<usize>, TypeId), usize> = BTreeMap::new();
    let mut fresh = Vec::new();
    let mut projected = Vec::new();
    let mut example_origin = Vec::new();
    let mut all_components = Vec::new();
    for &idx in critical {
        let ex = &examples[idx];
        let v = &ex.tuple;
        if v.iter().all(|&a| to_y[a] == INFINITE) {
            continue;
        }
        let mut tuple = vec![usize::MAX; v.len()];
        let mut components = Vec::new();
        for positions in closeness_components(graph, v, 2 * r + 1) {
            let kept = positions.iter().any(|&a| to_y[v[a]] != INFINITE);
            if kept {
                for &a in &positions {
                    tuple[a] = new_id(v[a]).ok_or_else(|| {
                        Error::invariant(format!("kept example vertex {} lies outside the ball", v[a]))
                    })?;
                }
            } else {
                let sub: Vec<usize> = positions.iter().map(|&a| v[a]).collect();
                let theta = local_type(graph, &sub, q, r)?;
                let key = (positions.clone(), theta);
                let t = match type_vertices.get(&key) {
                    Some(&t) => t,
                    None => {
                        let t = next.push_vertex();
                        let c = add_color(&mut next, format!("A{stage}_{}", type_vertices.len() + 1))?;
                        next.insert_color(c, t)?;
                        origin.push(None);
                        fresh.push(t);
                        type_vertices.insert(key, t);
                        t
                    }
                };
                for &a in &positions {
                    tuple[a] = t;
                }
            }
            components.push(Component { positions, kept });
        }
        projected.push(Example {
            tuple,
            positive: ex.positive,
        });
        example_origin.push(idx);
        all_components.push(components);
    }
    next.normalize();

    let outcome = ProjectionOutcome {
        graph: next,
        origin,
        ball,
        kept_isolated,
        fresh,
        new_colors,
        examples: projected,
        example_origin,
        components: all_components,
    };
    check_vertex_split(graph, &outcome)?;
    check_edges(graph, &outcome)?;
    check_no_new_conflicts(graph, examples, &outcome, q, r)?;
    Ok(outcome)
}

/// Components of the graph on positions `0..k` joining `a, b` when
/// `1 <= dist(v_a, v_b) <= limit`. Each component is ascending; components
/// are ordered by their least position.
fn closeness_components(graph: &ColoredGraph, v: &[usize], limit: u32) -> Vec<Vec<usize>> {
    let k = v.len();
    let mut label: Vec<usize> = (0..k).collect();
    fn find(label: &mut [usize], a: usize) -> usize {
        let mut root = a;
        while label[root] != root {
            root = label[root];
        }
        label[a] = root;
        root
    }
    for a in 0..k {
        let dist = multi_source_distances(graph, &[v[a]], limit);
        for b in a + 1..k {
            let d = dist[v[b]];
            if d >= 1 && d <= limit {
                let (ra, rb) = (find(&mut label, a), find(&mut label, b));
                if ra != rb {
                    label[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for a in 0..k {
        let root = find(&mut label, a);
        groups.entry(root).or_default().push(a);
    }
    groups.into_values().collect()
}

fn check_vertex_split(graph: &ColoredGraph, out: &ProjectionOutcome) -> Result<()> {
    let n = out.graph.n();
    let parts = out.ball.len() + out.kept_isolated.len() + out.fresh.len();
    let fresh_ok = out
        .fresh
        .iter()
        .all(|&t| out.origin[t].is_none() && out.graph.degree(t) == 0);
    let isolated_ok = out
        .kept_isolated
        .iter()
        .all(|&v| graph.degree(v) == 0 && out.ball.binary_search(&v).is_err());
    if n != parts || out.origin.len() != n || !fresh_ok || !isolated_ok {
        return Err(Error::invariant(format!(
            "stage graph with {n} vertices is not ball ({}) + isolated ({}) + fresh ({})",
            out.ball.len(),
            out.kept_isolated.len(),
            out.fresh.len()
        )));
    }
    Ok(())
}

fn check_edges(graph: &ColoredGraph, out: &ProjectionOutcome) -> Result<()> {
    for (a, b) in out.graph.edges() {
        let lifted = out.origin[a].zip(out.origin[b]);
        if !lifted.is_some_and(|(u, v)| graph.has_edge(u, v)) {
            return Err(Error::invariant(format!("stage edge ({a},{b}) has no counterpart")));
        }
    }
    Ok(())
}

fn check_no_new_conflicts(
    graph: &ColoredGraph,
    examples: &[Example],
    out: &ProjectionOutcome,
    q: u32,
    r: u32,
) -> Result<()> {
    let mut classes: BTreeMap<TypeId, Vec<usize>> = BTreeMap::new();
    for (i, ex) in out.examples.iter().enumerate() {
        classes.entry(local_type(&out.graph, &ex.tuple, q, r)?).or_default().push(i);
    }
    for members in classes.values() {
        let labels: BTreeSet<bool> = members.iter().map(|&i| out.examples[i].positive).collect();
        if labels.len() < 2 {
            continue;
        }
        let mut before = BTreeSet::new();
        for &i in members {
            before.insert(local_type(graph, &examples[out.example_origin[i]].tuple, q, r)?);
        }
        if before.len() > 1 {
            return Err(Error::invariant(format!(
                "projection merged {} distinct example types into one conflicting class",
                before.len()
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{vitali_cover, Vocabulary};

    fn path(n: usize) -> ColoredGraph {
        let edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        ColoredGraph::build(Vocabulary::empty(), n, &edges, &[]).unwrap()
    }

    #[test]
    fn no_critical_examples() {
        let g = path(4);
        let cover = vitali_cover(&g, &[1], 3).unwrap();
        let out = project_stage(&StageInput {
            stage: 0,
            graph: &g,
            examples: &[],
            critical: &[],
            y: &[1],
            cover: &cover,
            answers: &[1],
            q: 0,
            r: 0,
            base: 3,
        })
        .unwrap();
        assert!(out.examples.is_empty());
        assert!(out.fresh.is_empty());
        assert_eq!(out.ball, vec![0, 1, 2, 3]);
        assert_eq!(out.graph.n(), 4);
        // edges at the answer are gone
        assert_eq!(out.graph.edge_count(), 1);
        assert!(out.graph.has_edge(2, 3));
    }

    #[test]
    fn near_examples_carry_over() {
        // forest: path 0-1-2-3 plus isolated 4
        let g = ColoredGraph::build(Vocabulary::empty(), 5, &[(0, 1), (1, 2), (2, 3)], &[]).unwrap();
        let examples = vec![
            Example { tuple: vec![0], positive: true },
            Example { tuple: vec![3], positive: false },
        ];
        let cover = vitali_cover(&g, &[1], 3).unwrap();
        let out = project_stage(&StageInput {
            stage: 0,
            graph: &g,
            examples: &examples,
            critical: &[0, 1],
            y: &[1],
            cover: &cover,
            answers: &[2],
            q: 0,
            r: 0,
            base: 3,
        })
        .unwrap();
        assert_eq!(out.examples, examples);
        assert_eq!(out.example_origin, vec![0, 1]);
        assert_eq!(out.kept_isolated, vec![4]);
        assert_eq!(out.origin[4], Some(4));
        assert!(out.components.iter().all(|c| c.len() == 1 && c[0].kept));
    }

    #[test]
    fn far_components_become_type_vertices() {
        // two far-apart paths; the pair (0, 10) has one near and one far entry
        let mut edges: Vec<(usize, usize)> = (1..8).map(|i| (i - 1, i)).collect();
        edges.extend((9..16).map(|i| (i - 1, i)));
        let g = ColoredGraph::build(Vocabulary::empty(), 16, &edges, &[]).unwrap();
        let examples = vec![
            Example { tuple: vec![0, 10], positive: true },
            Example { tuple: vec![1, 12], positive: false },
        ];
        let cover = vitali_cover(&g, &[0], 3).unwrap();
        let out = project_stage(&StageInput {
            stage: 0,
            graph: &g,
            examples: &examples,
            critical: &[0, 1],
            y: &[0],
            cover: &cover,
            answers: &[3],
            q: 0,
            r: 0,
            base: 3,
        })
        .unwrap();
        assert_eq!(out.ball, vec![0, 1, 2, 3]);
        // one shared type vertex: both far entries have the same rank-0 type
        assert_eq!(out.fresh.len(), 1);
        let t = out.fresh[0];
        assert_eq!(out.examples[0].tuple, vec![0, t]);
        assert_eq!(out.examples[1].tuple, vec![1, t]);
        assert_eq!(out.components[0][1], Component { positions: vec![1], kept: false });
    }

    #[test]
    fn closeness_components_group_by_distance() {
        let g = path(10);
        // equal entries are not joined directly
        assert_eq!(closeness_components(&g, &[0, 0], 1), vec![vec![0], vec![1]]);
        let comps = closeness_components(&g, &[0, 9, 1, 0], 1);
        assert_eq!(comps, vec![vec![0, 2, 3], vec![1]]);
    }
}
