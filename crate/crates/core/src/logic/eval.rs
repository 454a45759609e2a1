//! Formula evaluation.
//!
//! Formulas are compiled into a hash-consed arena; quantified nodes are
//! memoized on the values of their free variables, which keeps nested
//! distance formulas polynomial.

use super::{Formula, Var};
use crate::error::{Error, Result};
use crate::graph::ColoredGraph;
use std::collections::HashMap;

/// A partial map from variables to vertices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    entries: Vec<(Var, usize)>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Maps `x1..xk` to the first `k` entries and `y1..` to the rest.
    pub fn from_tuple(k: usize, values: &[usize]) -> Self {
        let mut a = Self::new();
        for (i, &v) in values.iter().enumerate() {
            let var = if i < k {
                Var::Instance(i as u32 + 1)
            } else {
                Var::Param((i - k) as u32 + 1)
            };
            a.set(var, v);
        }
        a
    }

    pub fn with(mut self, var: Var, vertex: usize) -> Self {
        self.set(var, vertex);
        self
    }

    pub fn set(&mut self, var: Var, vertex: usize) {
        match self.entries.iter_mut().find(|(v, _)| *v == var) {
            Some(slot) => slot.1 = vertex,
            None => self.entries.push((var, vertex)),
        }
    }

    pub fn get(&self, var: Var) -> Option<usize> {
        self.entries.iter().find(|(v, _)| *v == var).map(|e| e.1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, usize)> + '_ {
        self.entries.iter().copied()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Node {
    True,
    False,
    Eq(u32, u32),
    Edge(u32, u32),
    Color(u32, u32),
    Not(u32),
    And(Vec<u32>),
    Or(Vec<u32>),
    Exists(u32, u32),
    Forall(u32, u32),
}

/// A formula compiled against one graph, reusable across assignments.
#[derive(Debug)]
pub struct ModelChecker<'g> {
    graph: &'g ColoredGraph,
    nodes: Vec<Node>,
    // free variable slots of each node, sorted
    free: Vec<Vec<u32>>,
    root: u32,
    slots: Vec<Var>,
    free_vars: Vec<Var>,
}

struct Compiler<'a> {
    graph: &'a ColoredGraph,
    nodes: Vec<Node>,
    free: Vec<Vec<u32>>,
    index: HashMap<Node, u32>,
    slots: Vec<Var>,
}

impl Compiler<'_> {
    fn slot(&mut self, var: Var) -> u32 {
        match self.slots.iter().position(|&v| v == var) {
            Some(i) => i as u32,
            None => {
                self.slots.push(var);
                (self.slots.len() - 1) as u32
            }
        }
    }

    fn intern(&mut self, node: Node) -> u32 {
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        let mut free: Vec<u32> = match &node {
            Node::True | Node::False => vec![],
            Node::Eq(a, b) | Node::Edge(a, b) => vec![*a, *b],
            Node::Color(_, a) => vec![*a],
            Node::Not(c) => self.free[*c as usize].clone(),
            Node::And(cs) | Node::Or(cs) => cs
                .iter()
                .flat_map(|c| self.free[*c as usize].iter().copied())
                .collect(),
            Node::Exists(s, c) | Node::Forall(s, c) => self.free[*c as usize]
                .iter()
                .copied()
                .filter(|x| x != s)
                .collect(),
        };
        free.sort_unstable();
        free.dedup();
        let id = self.nodes.len() as u32;
        self.nodes.push(node.clone());
        self.free.push(free);
        self.index.insert(node, id);
        id
    }

    fn flatten(&mut self, f: &Formula, conj: bool, out: &mut Vec<u32>) -> Result<()> {
        match (f, conj) {
            (Formula::And(a, b), true) | (Formula::Or(a, b), false) => {
                self.flatten(a, conj, out)?;
                self.flatten(b, conj, out)
            }
            _ => {
                out.push(self.compile(f)?);
                Ok(())
            }
        }
    }

    fn compile(&mut self, f: &Formula) -> Result<u32> {
        let node = match f {
            Formula::True => Node::True,
            Formula::False => Node::False,
            Formula::Eq(a, b) => Node::Eq(self.slot(*a), self.slot(*b)),
            Formula::Edge(a, b) => Node::Edge(self.slot(*a), self.slot(*b)),
            Formula::Color(c, a) => {
                let color = self
                    .graph
                    .vocabulary()
                    .index_of(c)
                    .ok_or_else(|| Error::UnknownColor(c.clone()))?;
                Node::Color(color as u32, self.slot(*a))
            }
            Formula::Not(a) => Node::Not(self.compile(a)?),
            Formula::And(..) => {
                let mut parts = Vec::new();
                self.flatten(f, true, &mut parts)?;
                Node::And(parts)
            }
            Formula::Or(..) => {
                let mut parts = Vec::new();
                self.flatten(f, false, &mut parts)?;
                Node::Or(parts)
            }
            Formula::Implies(a, b) => {
                let na = self.compile(a)?;
                let not_a = self.intern(Node::Not(na));
                let mut parts = vec![not_a];
                self.flatten(b, false, &mut parts)?;
                Node::Or(parts)
            }
            Formula::Exists(v, body) => {
                let s = self.slot(*v);
                Node::Exists(s, self.compile(body)?)
            }
            Formula::Forall(v, body) => {
                let s = self.slot(*v);
                Node::Forall(s, self.compile(body)?)
            }
        };
        Ok(self.intern(node))
    }
}

const UNSET: usize = usize::MAX;

struct Run<'a, 'g> {
    checker: &'a ModelChecker<'g>,
    env: Vec<usize>,
    memo: HashMap<(u32, Box<[usize]>), bool>,
}

impl Run<'_, '_> {
    fn eval(&mut self, id: u32) -> bool {
        let graph = self.checker.graph;
        match &self.checker.nodes[id as usize] {
            Node::True => true,
            Node::False => false,
            Node::Eq(a, b) => self.env[*a as usize] == self.env[*b as usize],
            Node::Edge(a, b) => graph.has_edge(self.env[*a as usize], self.env[*b as usize]),
            Node::Color(c, a) => graph.has_color(*c as usize, self.env[*a as usize]),
            Node::Not(c) => !self.eval(*c),
            Node::And(cs) => cs.iter().all(|&c| self.eval(c)),
            Node::Or(cs) => cs.iter().any(|&c| self.eval(c)),
            &Node::Exists(s, body) => self.quantify(id, s, body, true),
            &Node::Forall(s, body) => self.quantify(id, s, body, false),
        }
    }

    fn quantify(&mut self, id: u32, slot: u32, body: u32, existential: bool) -> bool {
        let key: Box<[usize]> = self.checker.free[id as usize]
            .iter()
            .map(|&s| self.env[s as usize])
            .collect();
        let key = (id, key);
        if let Some(&known) = self.memo.get(&key) {
            return known;
        }
        let saved = self.env[slot as usize];
        let mut result = !existential;
        for v in 0..self.checker.graph.n() {
            self.env[slot as usize] = v;
            if self.eval(body) == existential {
                result = existential;
                break;
            }
        }
        self.env[slot as usize] = saved;
        self.memo.insert(key, result);
        result
    }
}

impl<'g> ModelChecker<'g> {
    pub fn new(graph: &'g ColoredGraph, formula: &Formula) -> Result<Self> {
        let mut compiler = Compiler {
            graph,
            nodes: Vec::new(),
            free: Vec::new(),
            index: HashMap::new(),
            slots: Vec::new(),
        };
        let root = compiler.compile(formula)?;
        let free_vars = formula.free_vars().into_iter().collect();
        Ok(ModelChecker {
            graph,
            nodes: compiler.nodes,
            free: compiler.free,
            root,
            slots: compiler.slots,
            free_vars,
        })
    }

    /// Free variables of the compiled formula, sorted.
    pub fn free_vars(&self) -> &[Var] {
        &self.free_vars
    }

    /// Number of distinct subformulas after hash-consing.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn eval(&self, assignment: &Assignment) -> Result<bool> {
        let mut env = vec![UNSET; self.slots.len()];
        for &var in &self.free_vars {
            let v = assignment
                .get(var)
                .ok_or_else(|| Error::Unassigned(var.to_string()))?;
            self.graph.check_vertex(v)?;
            env[self.slots.iter().position(|&s| s == var).expect("free var has a slot")] = v;
        }
        let mut run = Run {
            checker: self,
            env,
            memo: HashMap::new(),
        };
        Ok(run.eval(self.root))
    }

    /// Evaluates with `x1..xk` bound to the first `k` entries of `tuple` and
    /// `y1..` to the rest.
    pub fn eval_tuple(&self, k: usize, tuple: &[usize]) -> Result<bool> {
        self.eval(&Assignment::from_tuple(k, tuple))
    }
}

/// Evaluates `formula` in `graph` under `assignment`.
pub fn eval(graph: &ColoredGraph, formula: &Formula, assignment: &Assignment) -> Result<bool> {
    ModelChecker::new(graph, formula)?.eval(assignment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Vocabulary;
    use crate::logic::parse_formula;
    use proptest::prelude::*;

    fn path(n: usize) -> ColoredGraph {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        ColoredGraph::build(Vocabulary::new(["P1"]).unwrap(), n, &edges, &[("P1", 2)]).unwrap()
    }

    #[test]
    fn neighbor_with_color() {
        let g = path(3);
        let f = parse_formula("exists z1. E(x1,z1) & P1(z1)").unwrap();
        let at = |v| eval(&g, &f, &Assignment::new().with(Var::Instance(1), v)).unwrap();
        assert!(at(1));
        assert!(!at(0));
        assert!(!at(2));
    }

    #[test]
    fn errors() {
        let g = path(3);
        let f = parse_formula("E(x1,y1)").unwrap();
        assert!(matches!(
            eval(&g, &f, &Assignment::new().with(Var::Instance(1), 0)),
            Err(Error::Unassigned(_))
        ));
        let f = parse_formula("Q(x1)").unwrap();
        assert!(matches!(
            eval(&g, &f, &Assignment::new().with(Var::Instance(1), 0)),
            Err(Error::UnknownColor(_))
        ));
    }

    #[test]
    fn empty_graph_quantifiers() {
        let g = ColoredGraph::edgeless(Vocabulary::empty(), 0);
        assert!(!eval(&g, &parse_formula("exists z1. true").unwrap(), &Assignment::new()).unwrap());
        assert!(eval(&g, &parse_formula("forall z1. false").unwrap(), &Assignment::new()).unwrap());
    }

    #[test]
    fn shadowing_restores_outer_value() {
        let g = path(4);
        let f = parse_formula("exists z1. E(x1,z1) & (exists z1. P1(z1)) & z1 = x2").unwrap();
        let a = Assignment::from_tuple(2, &[0, 1]);
        assert!(eval(&g, &f, &a).unwrap());
    }

    #[test]
    fn distance_formula_on_long_path() {
        let g = path(40);
        for d in [0u32, 1, 2, 5, 17, 30] {
            let f = Formula::distance_at_most(Var::Instance(1), Var::Instance(2), d, 1);
            let checker = ModelChecker::new(&g, &f).unwrap();
            for (a, b) in [(0usize, 0usize), (3, 9), (10, 27), (0, 39), (5, 4)] {
                let expected = (a as i64 - b as i64).unsigned_abs() <= d as u64;
                assert_eq!(checker.eval_tuple(2, &[a, b]).unwrap(), expected, "d={d} {a} {b}");
            }
        }
    }

    // naive evaluation without compilation or memoization
    fn naive(g: &ColoredGraph, f: &Formula, env: &mut Vec<(Var, usize)>) -> bool {
        let val = |env: &Vec<(Var, usize)>, v: &Var| env.iter().rev().find(|e| e.0 == *v).unwrap().1;
        match f {
            Formula::True => true,
            Formula::False => false,
            Formula::Eq(a, b) => val(env, a) == val(env, b),
            Formula::Edge(a, b) => g.has_edge(val(env, a), val(env, b)),
            Formula::Color(c, a) => g.color_members(c).unwrap().contains(&val(env, a)),
            Formula::Not(a) => !naive(g, a, env),
            Formula::And(a, b) => naive(g, a, env) && naive(g, b, env),
            Formula::Or(a, b) => naive(g, a, env) || naive(g, b, env),
            Formula::Implies(a, b) => !naive(g, a, env) || naive(g, b, env),
            Formula::Exists(v, a) | Formula::Forall(v, a) => {
                let want = matches!(f, Formula::Exists(..));
                let mut out = !want;
                for u in 0..g.n() {
                    env.push((*v, u));
                    let r = naive(g, a, env);
                    env.pop();
                    if r == want {
                        out = want;
                        break;
                    }
                }
                out
            }
        }
    }

    proptest! {
        #[test]
        fn compiled_matches_naive(
            f in crate::logic::parse::tests::arb_formula(),
            edges in proptest::collection::vec((0usize..5, 0usize..5), 0..8),
            a in proptest::collection::vec(0usize..5, 4),
        ) {
            let edges: Vec<_> = edges.into_iter().filter(|(u, v)| u != v).collect();
            let g = ColoredGraph::build(
                Vocabulary::new(["P", "Q_2"]).unwrap(), 5, &edges, &[("P", 1), ("Q_2", 3), ("P", 4)],
            ).unwrap();
            let closed = f
                .free_vars()
                .into_iter()
                .filter(|v| v.is_bound_family())
                .fold(f, |acc, v| Formula::forall(v, acc));
            let assignment = Assignment::from_tuple(2, &a);
            let mut env: Vec<(Var, usize)> = assignment.iter().collect();
            prop_assert_eq!(eval(&g, &closed, &assignment).unwrap(), naive(&g, &closed, &mut env));
        }
    }
}
