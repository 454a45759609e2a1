//! Replacing a free variable by a fixed vertex.
//!
//! A variable `v` pinned to vertex `c` is removed from the formula by adding
//! two colors to the graph: one holding the neighbors of `c` and one holding
//! `c` itself. Atoms mentioning `v` are rewritten against those colors, and
//! color atoms on `v` are decided directly.

use super::{Formula, Var};
use crate::error::{Error, Result};
use crate::graph::ColoredGraph;

/// The expanded graph and the rewritten formula.
#[derive(Clone, Debug)]
pub struct Pinned {
    pub graph: ColoredGraph,
    pub formula: Formula,
    /// Name of the color holding the neighbors of the pinned vertex.
    pub adjacent_color: String,
    /// Name of the color holding only the pinned vertex.
    pub equal_color: String,
}

/// Pins free variable `var` of `formula` to `vertex`.
///
/// For every assignment `a` of the remaining free variables, the result
/// satisfies `graph ⊨ formula[a, var ↦ vertex]` iff
/// `pinned.graph ⊨ pinned.formula[a]`.
pub fn pin_constant(
    graph: &ColoredGraph,
    formula: &Formula,
    var: Var,
    vertex: usize,
) -> Result<Pinned> {
    graph.check_vertex(vertex)?;
    if !formula.free_vars().contains(&var) {
        return Err(Error::input(format!("{var} is not free in {formula}")));
    }
    formula.check(graph.vocabulary())?;
    let vocab = graph.vocabulary();
    let adjacent_color = vocab.fresh_name(&format!("E_{var}"));
    let equal_color = {
        let base = format!("Eq_{var}");
        let mut name = vocab.fresh_name(&base);
        if name == adjacent_color {
            name = format!("{name}_eq");
        }
        name
    };
    let expanded = graph.expand_colors(&[
        (adjacent_color.clone(), graph.neighbors(vertex).to_vec()),
        (equal_color.clone(), vec![vertex]),
    ])?;
    let rewriter = Rewriter {
        graph,
        var,
        vertex,
        adjacent: &adjacent_color,
        equal: &equal_color,
    };
    let formula = rewriter.rewrite(formula);
    Ok(Pinned {
        graph: expanded,
        formula,
        adjacent_color,
        equal_color,
    })
}

struct Rewriter<'a> {
    graph: &'a ColoredGraph,
    var: Var,
    vertex: usize,
    adjacent: &'a str,
    equal: &'a str,
}

impl Rewriter<'_> {
    fn rewrite(&self, f: &Formula) -> Formula {
        let v = self.var;
        match f {
            Formula::True | Formula::False => f.clone(),
            Formula::Eq(a, b) => match (*a == v, *b == v) {
                (true, true) => Formula::True,
                (true, false) => Formula::Color(self.equal.into(), *b),
                (false, true) => Formula::Color(self.equal.into(), *a),
                (false, false) => f.clone(),
            },
            Formula::Edge(a, b) => match (*a == v, *b == v) {
                (true, true) => Formula::False,
                (true, false) => Formula::Color(self.adjacent.into(), *b),
                (false, true) => Formula::Color(self.adjacent.into(), *a),
                (false, false) => f.clone(),
            },
            Formula::Color(c, a) if *a == v => {
                let idx = self.graph.vocabulary().index_of(c).expect("checked vocabulary");
                if self.graph.has_color(idx, self.vertex) {
                    Formula::True
                } else {
                    Formula::False
                }
            }
            Formula::Color(..) => f.clone(),
            Formula::Not(a) => match self.rewrite(a) {
                Formula::True => Formula::False,
                Formula::False => Formula::True,
                other => other.not(),
            },
            Formula::And(a, b) => match (self.rewrite(a), self.rewrite(b)) {
                (Formula::False, _) | (_, Formula::False) => Formula::False,
                (Formula::True, x) | (x, Formula::True) => x,
                (x, y) => x.and(y),
            },
            Formula::Or(a, b) => match (self.rewrite(a), self.rewrite(b)) {
                (Formula::True, _) | (_, Formula::True) => Formula::True,
                (Formula::False, x) | (x, Formula::False) => x,
                (x, y) => x.or(y),
            },
            Formula::Implies(a, b) => match (self.rewrite(a), self.rewrite(b)) {
                (Formula::False, _) | (_, Formula::True) => Formula::True,
                (Formula::True, x) => x,
                (x, Formula::False) => x.not(),
                (x, y) => x.implies(y),
            },
            // The variable is shadowed below a quantifier that rebinds it.
            Formula::Exists(q, _) | Formula::Forall(q, _) if *q == v => f.clone(),
            // The graph contains the pinned vertex, so it is never empty and
            // quantifiers over constant bodies fold.
            Formula::Exists(q, body) => match self.rewrite(body) {
                c @ (Formula::True | Formula::False) => c,
                other => Formula::exists(*q, other),
            },
            Formula::Forall(q, body) => match self.rewrite(body) {
                c @ (Formula::True | Formula::False) => c,
                other => Formula::forall(*q, other),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Vocabulary;
    use crate::logic::{eval, parse_formula, Assignment};

    #[test]
    fn path_example() {
        let g = ColoredGraph::build(Vocabulary::empty(), 3, &[(0, 1), (1, 2)], &[]).unwrap();
        let f = parse_formula("E(x1,x2)").unwrap();
        let pinned = pin_constant(&g, &f, Var::Instance(1), 1).unwrap();
        assert_eq!(pinned.formula.to_string(), format!("{}(x2)", pinned.adjacent_color));
        assert_eq!(pinned.graph.color_members(&pinned.adjacent_color).unwrap(), vec![0, 2]);
        for w in 0..3 {
            let a = Assignment::new().with(Var::Instance(2), w);
            assert_eq!(eval(&pinned.graph, &pinned.formula, &a).unwrap(), w != 1);
        }
    }

    #[test]
    fn sentence_after_pinning_only_variable() {
        let g = ColoredGraph::build(Vocabulary::new(["P"]).unwrap(), 3, &[(0, 1)], &[("P", 0)]).unwrap();
        let f = parse_formula("P(x1) & exists z1. E(x1,z1)").unwrap();
        let pinned = pin_constant(&g, &f, Var::Instance(1), 0).unwrap();
        assert!(pinned.formula.is_sentence());
        assert!(eval(&pinned.graph, &pinned.formula, &Assignment::new()).unwrap());
        let other = pin_constant(&g, &f, Var::Instance(1), 2).unwrap();
        assert_eq!(other.formula, Formula::False);
    }

    #[test]
    fn absent_variable_is_input_error() {
        let g = ColoredGraph::build(Vocabulary::empty(), 2, &[], &[]).unwrap();
        let f = parse_formula("x1 = x1").unwrap();
        assert!(matches!(
            pin_constant(&g, &f, Var::Instance(2), 0),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn fresh_names_avoid_existing_colors() {
        let g = ColoredGraph::build(Vocabulary::new(["E_x1"]).unwrap(), 2, &[(0, 1)], &[]).unwrap();
        let f = parse_formula("E(x1,x2) & E_x1(x2)").unwrap();
        let pinned = pin_constant(&g, &f, Var::Instance(1), 0).unwrap();
        assert_ne!(pinned.adjacent_color, "E_x1");
        let a = Assignment::new().with(Var::Instance(2), 1);
        assert!(!eval(&pinned.graph, &pinned.formula, &a).unwrap());
    }

    #[test]
    fn agrees_with_direct_evaluation() {
        let g = ColoredGraph::build(
            Vocabulary::new(["P"]).unwrap(),
            5,
            &[(0, 1), (1, 2), (2, 3), (1, 4)],
            &[("P", 2), ("P", 4)],
        )
        .unwrap();
        let f = parse_formula(
            "exists z1. (E(x1,z1) & P(z1)) | x1 = x2 | (forall z2. E(x2,z2) -> !(z2 = x1))",
        )
        .unwrap();
        for c in 0..5 {
            let pinned = pin_constant(&g, &f, Var::Instance(1), c).unwrap();
            for w in 0..5 {
                let direct = Assignment::from_tuple(2, &[c, w]);
                let rest = Assignment::new().with(Var::Instance(2), w);
                assert_eq!(
                    eval(&g, &f, &direct).unwrap(),
                    eval(&pinned.graph, &pinned.formula, &rest).unwrap(),
                    "c={c} w={w}"
                );
            }
        }
    }
}
