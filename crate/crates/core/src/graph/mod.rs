//! Colored graphs and the neighborhood machinery the learners are built on.
//!
//! Vertices are dense ids `0..n`. Edges are undirected and loop-free, colors
//! are unary relations named by a [`Vocabulary`]. Graphs are immutable once
//! built; every transformation returns a new graph.

mod cover;
mod io;
mod neighborhood;

pub use cover::{vitali_cover, CoverResult};
pub use io::{parse_graph, write_graph};
pub use neighborhood::{ball, bfs_distances, multi_source_distances, DistanceTable, INFINITE};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::ops::Deref;

/// Ordered list of distinct color names.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Vocabulary {
    names: Vec<String>,
}

impl Vocabulary {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let mut vocab = Vocabulary::default();
        for name in names {
            vocab.push(name.into())?;
        }
        Ok(vocab)
    }

    pub fn empty() -> Self {
        Self::default()
    }

    fn push(&mut self, name: String) -> Result<()> {
        if !is_color_name(&name) {
            return Err(Error::input(format!("`{name}` is not a valid color name")));
        }
        if self.names.contains(&name) {
            return Err(Error::input(format!("duplicate color name `{name}`")));
        }
        self.names.push(name);
        Ok(())
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index_of(name).is_some()
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }

    /// A name based on `base` that is not yet in the vocabulary.
    pub fn fresh_name(&self, base: &str) -> String {
        if !self.contains(base) {
            return base.to_string();
        }
        (1..)
            .map(|i| format!("{base}_{i}"))
            .find(|candidate| !self.contains(candidate))
            .expect("unbounded suffix search")
    }
}

/// Color names are identifiers that cannot be confused with the edge symbol,
/// a variable, or a keyword of the formula grammar.
pub(crate) fn is_color_name(name: &str) -> bool {
    let mut chars = name.chars();
    let Some(first) = chars.next() else {
        return false;
    };
    if !first.is_ascii_alphabetic() || !chars.all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return false;
    }
    if matches!(name, "E" | "exists" | "forall" | "true" | "false") {
        return false;
    }
    !crate::logic::Var::parse(name).is_some()
}

/// A tuple of vertices of some host graph. Repetitions are allowed.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexTuple(Vec<usize>);

impl VertexTuple {
    pub fn new(entries: Vec<usize>) -> Self {
        VertexTuple(entries)
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }

    /// The tuple followed by `tail`.
    pub fn extended(&self, tail: &[usize]) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.0.len() + tail.len());
        out.extend_from_slice(&self.0);
        out.extend_from_slice(tail);
        out
    }
}

impl Deref for VertexTuple {
    type Target = [usize];

    fn deref(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for VertexTuple {
    fn from(v: Vec<usize>) -> Self {
        VertexTuple(v)
    }
}

impl fmt::Display for VertexTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// A finite undirected loop-free graph with unary color relations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColoredGraph {
    vocab: Vocabulary,
    adjacency: Vec<Vec<usize>>,
    /// Sorted color indices per vertex.
    vertex_colors: Vec<Vec<u32>>,
}

/// The result of restricting a graph to a vertex subset.
#[derive(Clone, Debug)]
pub struct Restriction {
    pub graph: ColoredGraph,
    /// New id to old id.
    pub to_old: Vec<usize>,
    /// Old id to new id, `None` for dropped vertices.
    pub to_new: Vec<Option<usize>>,
}

impl ColoredGraph {
    /// Builds and normalizes a graph. Edges are deduplicated and stored in
    /// both directions; colors are given as `(name, vertex)` memberships.
    pub fn build(
        vocab: Vocabulary,
        n: usize,
        edges: &[(usize, usize)],
        colors: &[(&str, usize)],
    ) -> Result<Self> {
        let mut graph = ColoredGraph::edgeless(vocab, n);
        for &(u, v) in edges {
            graph.insert_edge(u, v)?;
        }
        for &(name, v) in colors {
            let c = graph
                .vocab
                .index_of(name)
                .ok_or_else(|| Error::UnknownColor(name.to_string()))?;
            graph.insert_color(c, v)?;
        }
        graph.normalize();
        Ok(graph)
    }

    pub(crate) fn edgeless(vocab: Vocabulary, n: usize) -> Self {
        ColoredGraph {
            vocab,
            adjacency: vec![Vec::new(); n],
            vertex_colors: vec![Vec::new(); n],
        }
    }

    pub(crate) fn insert_edge(&mut self, u: usize, v: usize) -> Result<()> {
        let n = self.n();
        if u >= n || v >= n {
            return Err(Error::input(format!("edge ({u},{v}) out of range for {n} vertices")));
        }
        if u == v {
            return Err(Error::input(format!("self-loop at vertex {u}")));
        }
        self.adjacency[u].push(v);
        self.adjacency[v].push(u);
        Ok(())
    }

    pub(crate) fn insert_color(&mut self, color: usize, v: usize) -> Result<()> {
        if v >= self.n() {
            return Err(Error::input(format!(
                "colored vertex {v} out of range for {} vertices",
                self.n()
            )));
        }
        self.vertex_colors[v].push(color as u32);
        Ok(())
    }

    /// Appends a vertex with no edges and returns its id.
    pub(crate) fn push_vertex(&mut self) -> usize {
        self.adjacency.push(Vec::new());
        self.vertex_colors.push(Vec::new());
        self.adjacency.len() - 1
    }

    /// Adds a color to the vocabulary, returning its index.
    pub(crate) fn push_color(&mut self, name: String) -> Result<usize> {
        self.vocab.push(name)?;
        Ok(self.vocab.len() - 1)
    }

    pub(crate) fn normalize(&mut self) {
        for list in &mut self.adjacency {
            list.sort_unstable();
            list.dedup();
        }
        for list in &mut self.vertex_colors {
            list.sort_unstable();
            list.dedup();
        }
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn colors_of(&self, v: usize) -> &[u32] {
        &self.vertex_colors[v]
    }

    pub fn has_color(&self, color: usize, v: usize) -> bool {
        self.vertex_colors[v].binary_search(&(color as u32)).is_ok()
    }

    /// Vertices carrying the named color, ascending.
    pub fn color_members(&self, name: &str) -> Result<Vec<usize>> {
        let c = self
            .vocab
            .index_of(name)
            .ok_or_else(|| Error::UnknownColor(name.to_string()))?;
        Ok((0..self.n()).filter(|&v| self.has_color(c, v)).collect())
    }

    /// Undirected edges `(u, v)` with `u < v`, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.n() {
            Ok(())
        } else {
            Err(Error::input(format!("vertex {v} out of range for {} vertices", self.n())))
        }
    }

    pub fn check_tuple(&self, tuple: &[usize]) -> Result<()> {
        tuple.iter().try_for_each(|&v| self.check_vertex(v))
    }

    /// The induced subgraph on `subset`, relabeled `0..|subset|` in ascending
    /// order of old ids.
    pub fn induced_subgraph(&self, subset: &[usize]) -> Result<Restriction> {
        let mut to_old: Vec<usize> = subset.to_vec();
        to_old.sort_unstable();
        to_old.dedup();
        self.check_tuple(&to_old)?;
        let mut to_new = vec![None; self.n()];
        for (new, &old) in to_old.iter().enumerate() {
            to_new[old] = Some(new);
        }
        let mut graph = ColoredGraph::edgeless(self.vocab.clone(), to_old.len());
        for (new, &old) in to_old.iter().enumerate() {
            graph.adjacency[new] = self.adjacency[old]
                .iter()
                .filter_map(|&w| to_new[w])
                .collect();
            graph.vertex_colors[new] = self.vertex_colors[old].clone();
        }
        graph.normalize();
        Ok(Restriction {
            graph,
            to_old,
            to_new,
        })
    }

    /// Adds new colors. The vocabulary becomes the old names followed by the
    /// additions in order.
    pub fn expand_colors(&self, additions: &[(String, Vec<usize>)]) -> Result<ColoredGraph> {
        let mut graph = self.clone();
        for (name, members) in additions {
            let c = graph.push_color(name.clone())?;
            for &v in members {
                graph.insert_color(c, v)?;
            }
        }
        graph.normalize();
        Ok(graph)
    }

    /// The disjoint union of `copies` copies of the graph. `maps[c][v]` is
    /// the id of vertex `v` in copy `c`.
    pub fn disjoint_copies(&self, copies: usize) -> Result<(ColoredGraph, Vec<Vec<usize>>)> {
        if copies == 0 {
            return Err(Error::input("number of copies must be at least 1"));
        }
        let n = self.n();
        let mut graph = ColoredGraph::edgeless(self.vocab.clone(), n * copies);
        let mut maps = Vec::with_capacity(copies);
        for c in 0..copies {
            let offset = c * n;
            for v in 0..n {
                graph.adjacency[offset + v] = self.adjacency[v].iter().map(|&w| w + offset).collect();
                graph.vertex_colors[offset + v] = self.vertex_colors[v].clone();
            }
            maps.push((offset..offset + n).collect());
        }
        Ok((graph, maps))
    }

    /// The isomorphic copy in which vertex `v` becomes `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<ColoredGraph> {
        let n = self.n();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::input("relabeling is not a permutation"));
        }
        let mut graph = ColoredGraph::edgeless(self.vocab.clone(), n);
        for v in 0..n {
            graph.adjacency[perm[v]] = self.adjacency[v].iter().map(|&w| perm[w]).collect();
            graph.vertex_colors[perm[v]] = self.vertex_colors[v].clone();
        }
        graph.normalize();
        Ok(graph)
    }

    /// Deletes every edge incident to `v`.
    pub(crate) fn isolate(&mut self, v: usize) {
        for w in std::mem::take(&mut self.adjacency[v]) {
            self.adjacency[w].retain(|&x| x != v);
        }
    }

    /// True when the graph has no cycles.
    pub fn is_forest(&self) -> bool {
        // A graph is a forest iff |E| = n - #components.
        let components = self.components().len();
        self.edge_count() + components == self.n()
    }

    /// Connected components, each sorted ascending, ordered by least vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n()];
        let mut out = Vec::new();
        for start in 0..self.n() {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut i = 0;
            while i < comp.len() {
                let u = comp[i];
                i += 1;
                for &w in &self.adjacency[u] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Maps color names to member lists, in vocabulary order.
    pub fn color_table(&self) -> Vec<(String, Vec<usize>)> {
        let mut members: HashMap<u32, Vec<usize>> = HashMap::new();
        for (v, colors) in self.vertex_colors.iter().enumerate() {
            for &c in colors {
                members.entry(c).or_default().push(v);
            }
        }
        self.vocab
            .names()
            .iter()
            .enumerate()
            .map(|(c, name)| (name.clone(), members.remove(&(c as u32)).unwrap_or_default()))
            .collect()
    }
}
