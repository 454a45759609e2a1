//! Rank-q types of pointed graphs and their local variants.
//!
//! A type is built by the usual recursion: the rank-0 type of a tuple is its
//! atomic diagram, and the rank-(j+1) type adds the set of rank-j types of
//! all one-vertex extensions. Types are stored in a canonical byte encoding,
//! so equality of [`TypeId`]s is equality of types.

mod realize;

pub use realize::{hintikka_formula, realize_formula, realized_rank_bound};

use crate::error::{Error, Result};
use crate::graph::{multi_source_distances, ColoredGraph, Vocabulary};
use std::fmt;
use std::sync::Arc;

/// Default locality radius for rank `q`: `(7^q - 1) / 2`.
pub fn gaifman_radius(q: u32) -> u32 {
    (7u32.pow(q) - 1) / 2
}

/// The rank and radius under which local types are compared.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeContext {
    pub q: u32,
    pub r: u32,
    pub vocabulary: Vocabulary,
}

impl TypeContext {
    /// Context with the default radius [`gaifman_radius`].
    pub fn new(q: u32, vocabulary: Vocabulary) -> Self {
        TypeContext {
            q,
            r: gaifman_radius(q),
            vocabulary,
        }
    }

    pub fn with_radius(q: u32, r: u32, vocabulary: Vocabulary) -> Self {
        TypeContext { q, r, vocabulary }
    }

    pub fn local_type(&self, graph: &ColoredGraph, tuple: &[usize]) -> Result<TypeId> {
        local_type(graph, tuple, self.q, self.r)
    }
}

/// A canonical identifier of a rank-q type of a tuple.
///
/// `radius` is `Some(r)` for local (q,r)-types and `None` for types of the
/// whole graph. Two ids are equal exactly when the types are.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeId {
    arity: usize,
    q: u32,
    radius: Option<u32>,
    repr: Arc<[u8]>,
}

impl TypeId {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn radius(&self) -> Option<u32> {
        self.radius
    }

    /// The canonical encoding.
    pub fn bytes(&self) -> &[u8] {
        &self.repr
    }

    /// Short stable digest of the encoding (64-bit FNV-1a), for display.
    pub fn fingerprint(&self) -> u64 {
        self.repr.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
            (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
        })
    }

    /// Decodes the type back into its recursive form.
    pub fn decode(&self) -> Result<TypeTree> {
        let mut reader = Reader {
            bytes: &self.repr,
            at: 0,
        };
        let tree = reader.tree(self.arity, self.q)?;
        if reader.at != self.repr.len() {
            return Err(Error::input("trailing bytes in type encoding"));
        }
        Ok(tree)
    }
}

impl fmt::Debug for TypeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TypeId({}/{}", self.arity, self.q)?;
        if let Some(r) = self.radius {
            write!(f, "/r{r}")?;
        }
        write!(f, " {:016x})", self.fingerprint())
    }
}

impl fmt::Display for TypeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.fingerprint())
    }
}

/// The atomic diagram of a tuple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagram {
    pub arity: usize,
    /// `equal[i][j]` for `i < j`.
    pub equal: Vec<Vec<bool>>,
    /// `edge[i][j]` for `i < j`.
    pub edge: Vec<Vec<bool>>,
    /// Sorted color indices per position.
    pub colors: Vec<Vec<u32>>,
}

/// A decoded type: the diagram and, above rank 0, the distinct types of the
/// one-vertex extensions in canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeTree {
    pub diagram: Diagram,
    pub children: Vec<TypeTree>,
}

fn write_u32(out: &mut Vec<u8>, x: u32) {
    out.extend_from_slice(&x.to_le_bytes());
}

fn write_diagram(graph: &ColoredGraph, tuple: &[usize], out: &mut Vec<u8>) {
    for i in 0..tuple.len() {
        for j in i + 1..tuple.len() {
            let (a, b) = (tuple[i], tuple[j]);
            out.push(u8::from(a == b) | (u8::from(graph.has_edge(a, b)) << 1));
        }
    }
    for &v in tuple {
        let colors = graph.colors_of(v);
        write_u32(out, colors.len() as u32);
        for &c in colors {
            write_u32(out, c);
        }
    }
}

fn encode(graph: &ColoredGraph, tuple: &mut Vec<usize>, depth: u32, domain: &[usize], out: &mut Vec<u8>) {
    write_diagram(graph, tuple, out);
    if depth == 0 {
        return;
    }
    let mut children: Vec<Vec<u8>> = domain
        .iter()
        .map(|&a| {
            tuple.push(a);
            let mut child = Vec::new();
            encode(graph, tuple, depth - 1, domain, &mut child);
            tuple.pop();
            child
        })
        .collect();
    children.sort_unstable();
    children.dedup();
    write_u32(out, children.len() as u32);
    for child in children {
        write_u32(out, child.len() as u32);
        out.extend_from_slice(&child);
    }
}

fn type_over(graph: &ColoredGraph, tuple: &[usize], q: u32, domain: &[usize], radius: Option<u32>) -> TypeId {
    let mut out = Vec::new();
    encode(graph, &mut tuple.to_vec(), q, domain, &mut out);
    TypeId {
        arity: tuple.len(),
        q,
        radius,
        repr: out.into(),
    }
}

/// The rank-`q` type of `tuple` in `graph`.
pub fn rank_type(graph: &ColoredGraph, tuple: &[usize], q: u32) -> Result<TypeId> {
    graph.check_tuple(tuple)?;
    let domain: Vec<usize> = (0..graph.n()).collect();
    Ok(type_over(graph, tuple, q, &domain, None))
}

/// The local (q,r)-type of `tuple`: the rank-`q` type of the subgraph
/// induced on the `r`-ball around the tuple, pointed at the tuple.
///
/// Quantification is restricted to the ball directly, which gives the same
/// encoding as materializing the induced subgraph: adjacency and colors
/// among ball vertices are those of `graph`.
pub fn local_type(graph: &ColoredGraph, tuple: &[usize], q: u32, r: u32) -> Result<TypeId> {
    graph.check_tuple(tuple)?;
    let domain = if q == 0 {
        Vec::new()
    } else {
        let dist = multi_source_distances(graph, tuple, r);
        (0..graph.n()).filter(|&v| dist[v] <= r).collect()
    };
    Ok(type_over(graph, tuple, q, &domain, Some(r)))
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl Reader<'_> {
    fn byte(&mut self) -> Result<u8> {
        let b = *self
            .bytes
            .get(self.at)
            .ok_or_else(|| Error::input("truncated type encoding"))?;
        self.at += 1;
        Ok(b)
    }

    fn u32(&mut self) -> Result<u32> {
        let end = self.at + 4;
        let chunk = self
            .bytes
            .get(self.at..end)
            .ok_or_else(|| Error::input("truncated type encoding"))?;
        self.at = end;
        Ok(u32::from_le_bytes(chunk.try_into().expect("four bytes")))
    }

    fn tree(&mut self, arity: usize, depth: u32) -> Result<TypeTree> {
        let mut equal = vec![vec![false; arity]; arity];
        let mut edge = vec![vec![false; arity]; arity];
        for i in 0..arity {
            for j in i + 1..arity {
                let b = self.byte()?;
                equal[i][j] = b & 1 != 0;
                edge[i][j] = b & 2 != 0;
            }
        }
        let mut colors = Vec::with_capacity(arity);
        for _ in 0..arity {
            let count = self.u32()?;
            colors.push((0..count).map(|_| self.u32()).collect::<Result<Vec<_>>>()?);
        }
        let diagram = Diagram {
            arity,
            equal,
            edge,
            colors,
        };
        let mut children = Vec::new();
        if depth > 0 {
            let count = self.u32()?;
            for _ in 0..count {
                let len = self.u32()? as usize;
                let start = self.at;
                children.push(self.tree(arity + 1, depth - 1)?);
                if self.at - start != len {
                    return Err(Error::input("inconsistent child length in type encoding"));
                }
            }
        }
        Ok(TypeTree { diagram, children })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> ColoredGraph {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        ColoredGraph::build(Vocabulary::empty(), n, &edges, &[]).unwrap()
    }

    #[test]
    fn radius_defaults() {
        assert_eq!(gaifman_radius(0), 0);
        assert_eq!(gaifman_radius(1), 3);
        assert_eq!(gaifman_radius(2), 24);
    }

    #[test]
    fn isolated_vertices_share_type() {
        let g = ColoredGraph::build(Vocabulary::empty(), 2, &[], &[]).unwrap();
        assert_eq!(rank_type(&g, &[0], 1).unwrap(), rank_type(&g, &[1], 1).unwrap());
    }

    #[test]
    fn path_endpoint_differs_from_center() {
        let g = path(3);
        assert_ne!(rank_type(&g, &[0], 1).unwrap(), rank_type(&g, &[1], 1).unwrap());
        assert_eq!(rank_type(&g, &[0], 1).unwrap(), rank_type(&g, &[2], 1).unwrap());
    }

    #[test]
    fn local_types_on_five_path() {
        let g = path(5);
        let lt = |v, q| local_type(&g, &[v], q, 1).unwrap();
        assert_eq!(lt(1, 1), lt(2, 1));
        assert_eq!(lt(1, 2), lt(2, 2));
        // A pointed 2-path and a 3-path pointed at its center agree on every
        // rank-1 sentence: neither has a vertex distinct from and not
        // adjacent to the point. Two distinct neighbors need rank 2.
        assert_eq!(lt(0, 1), lt(1, 1));
        assert_ne!(lt(0, 2), lt(1, 2));
        let two_neighbors = crate::logic::parse_formula(
            "exists z1. exists z2. E(x1,z1) & E(x1,z2) & !(z1 = z2)",
        )
        .unwrap();
        let end = g.induced_subgraph(&[0, 1]).unwrap().graph;
        let mid = g.induced_subgraph(&[0, 1, 2]).unwrap().graph;
        let holds = |h: &ColoredGraph, v| {
            crate::logic::eval(h, &two_neighbors, &crate::logic::Assignment::from_tuple(1, &[v])).unwrap()
        };
        assert!(!holds(&end, 0) && holds(&mid, 1));
    }

    #[test]
    fn rank_zero_sees_only_the_diagram() {
        let g = path(5);
        assert_eq!(local_type(&g, &[0], 0, 7).unwrap(), local_type(&g, &[2], 0, 7).unwrap());
    }

    #[test]
    fn decode_roundtrip_structure() {
        let g = ColoredGraph::build(
            Vocabulary::new(["P", "Q"]).unwrap(),
            4,
            &[(0, 1), (1, 2), (2, 3)],
            &[("P", 1), ("Q", 1), ("Q", 3)],
        )
        .unwrap();
        let t = rank_type(&g, &[1, 1, 2], 2).unwrap();
        let tree = t.decode().unwrap();
        assert_eq!(tree.diagram.arity, 3);
        assert!(tree.diagram.equal[0][1]);
        assert!(tree.diagram.edge[0][2] && tree.diagram.edge[1][2]);
        assert_eq!(tree.diagram.colors[0], vec![0, 1]);
        assert!(tree.diagram.colors[2].is_empty());
        assert!(!tree.children.is_empty());
        assert!(tree.children.iter().all(|c| c.diagram.arity == 4));
    }
}
