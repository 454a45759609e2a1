//! Turning sets of local types into formulas.

use super::{TypeContext, TypeId, TypeTree};
use crate::error::{Error, Result};
use crate::logic::{Formula, Var};

/// Upper bound on the quantifier rank of [`realize_formula`] output:
/// `q + ceil(log2 r)` for `q >= 1`, and `0` for `q = 0`.
///
/// Each extension quantifier carries its own relativization guard, and the
/// guard's distance formula sits beside the remaining Hintikka formula
/// rather than above it, so no rank is added beyond the distance encoding.
pub fn realized_rank_bound(q: u32, r: u32) -> u32 {
    if q == 0 {
        0
    } else {
        q + Formula::distance_rank(r.max(1))
    }
}

/// A formula over `x1..xk, y1..yl` that holds for a tuple exactly when the
/// tuple's local type (under `ctx`) lies in `types`.
///
/// The formula is a disjunction of Hintikka formulas whose quantifiers are
/// relativized to the `ctx.r`-ball of the free tuple. The empty set gives
/// `!(x1 = x1)`.
pub fn realize_formula(types: &[TypeId], ctx: &TypeContext, k: usize, l: usize) -> Result<Formula> {
    check_types(types, ctx, k + l)?;
    if types.is_empty() {
        return Ok(Formula::canonical_false());
    }
    let mut sorted = types.to_vec();
    sorted.sort();
    sorted.dedup();
    let tuple = Var::tuple_vars(k, l);
    let disjuncts = sorted
        .iter()
        .map(|t| build(t, ctx, &tuple))
        .collect::<Result<Vec<_>>>()?;
    check_rank(Formula::disjunction(disjuncts), ctx)
}

/// The relativized Hintikka formula of a single local type: true exactly on
/// tuples of that type.
pub fn hintikka_formula(theta: &TypeId, ctx: &TypeContext, k: usize, l: usize) -> Result<Formula> {
    check_types(std::slice::from_ref(theta), ctx, k + l)?;
    check_rank(build(theta, ctx, &Var::tuple_vars(k, l))?, ctx)
}

fn check_types(types: &[TypeId], ctx: &TypeContext, arity: usize) -> Result<()> {
    for t in types {
        if t.arity() != arity {
            return Err(Error::input(format!(
                "type of arity {} in a set for arity {arity}",
                t.arity()
            )));
        }
        if t.q() != ctx.q || t.radius() != Some(ctx.r) {
            return Err(Error::input(format!(
                "type with rank {} and radius {:?} does not match context ({}, {})",
                t.q(),
                t.radius(),
                ctx.q,
                ctx.r
            )));
        }
    }
    Ok(())
}

fn check_rank(formula: Formula, ctx: &TypeContext) -> Result<Formula> {
    let bound = realized_rank_bound(ctx.q, ctx.r);
    if formula.quantifier_rank() > bound {
        return Err(Error::invariant(format!(
            "realized formula has rank {} above the bound {bound}",
            formula.quantifier_rank()
        )));
    }
    Ok(formula)
}

fn build(theta: &TypeId, ctx: &TypeContext, tuple: &[Var]) -> Result<Formula> {
    let tree = theta.decode()?;
    let builder = Builder { ctx, tuple };
    let mut vars = tuple.to_vec();
    builder.hintikka(&tree, &mut vars, ctx.q)
}

struct Builder<'a> {
    ctx: &'a TypeContext,
    tuple: &'a [Var],
}

impl Builder<'_> {
    fn diagram(&self, tree: &TypeTree, vars: &[Var]) -> Result<Vec<Formula>> {
        let d = &tree.diagram;
        let mut lits = Vec::new();
        for i in 0..d.arity {
            for j in i + 1..d.arity {
                let eq = Formula::Eq(vars[i], vars[j]);
                if d.equal[i][j] {
                    lits.push(eq);
                } else {
                    lits.push(eq.not());
                    let edge = Formula::Edge(vars[i], vars[j]);
                    lits.push(if d.edge[i][j] { edge } else { edge.not() });
                }
            }
        }
        let names = self.ctx.vocabulary.names();
        for (i, colors) in d.colors.iter().enumerate() {
            if let Some(&bad) = colors.iter().find(|&&c| c as usize >= names.len()) {
                return Err(Error::input(format!("color index {bad} outside the vocabulary")));
            }
            for (c, name) in names.iter().enumerate() {
                let atom = Formula::Color(name.clone(), vars[i]);
                lits.push(if colors.contains(&(c as u32)) { atom } else { atom.not() });
            }
        }
        Ok(lits)
    }

    // dist(t, z) <= r for some entry t of the free tuple
    fn guard(&self, z: Var) -> Formula {
        let first_free = self.ctx.q + 1;
        Formula::disjunction(
            self.tuple
                .iter()
                .map(|&t| Formula::distance_at_most(t, z, self.ctx.r, first_free)),
        )
    }

    fn hintikka(&self, tree: &TypeTree, vars: &mut Vec<Var>, depth: u32) -> Result<Formula> {
        let mut parts = self.diagram(tree, vars)?;
        if depth > 0 {
            let z = Var::Bound((vars.len() - self.tuple.len()) as u32 + 1);
            let mut children = Vec::with_capacity(tree.children.len());
            vars.push(z);
            for child in &tree.children {
                children.push(self.hintikka(child, vars, depth - 1)?);
            }
            vars.pop();
            for child in &children {
                parts.push(Formula::exists(z, self.guard(z).and(child.clone())));
            }
            parts.push(Formula::forall(
                z,
                self.guard(z).implies(Formula::disjunction(children)),
            ));
        }
        Ok(Formula::conjunction(parts))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{ColoredGraph, Vocabulary};
    use crate::logic::ModelChecker;
    use crate::types::local_type;

    #[test]
    fn empty_set_is_canonical_false() {
        let ctx = TypeContext::new(1, Vocabulary::empty());
        let f = realize_formula(&[], &ctx, 1, 0).unwrap();
        assert_eq!(f.to_string(), "!(x1 = x1)");
        assert_eq!(f.quantifier_rank(), 0);
    }

    #[test]
    fn singleton_on_path_with_color() {
        let g = ColoredGraph::build(
            Vocabulary::new(["P"]).unwrap(),
            6,
            &[(0, 1), (1, 2), (2, 3), (3, 4)],
            &[("P", 2)],
        )
        .unwrap();
        for (q, r) in [(0, 0), (1, 1), (1, 3), (2, 2)] {
            let ctx = TypeContext::with_radius(q, r, g.vocabulary().clone());
            for v in 0..g.n() {
                let theta = local_type(&g, &[v], q, r).unwrap();
                let f = realize_formula(std::slice::from_ref(&theta), &ctx, 1, 0).unwrap();
                assert!(f.quantifier_rank() <= realized_rank_bound(q, r));
                let checker = ModelChecker::new(&g, &f).unwrap();
                for u in 0..g.n() {
                    let same = local_type(&g, &[u], q, r).unwrap() == theta;
                    assert_eq!(checker.eval_tuple(1, &[u]).unwrap(), same, "q={q} r={r} v={v} u={u}");
                }
            }
        }
    }

    #[test]
    fn rejects_mismatched_types() {
        let g = ColoredGraph::build(Vocabulary::empty(), 2, &[(0, 1)], &[]).unwrap();
        let ctx = TypeContext::with_radius(1, 1, Vocabulary::empty());
        let wrong_arity = local_type(&g, &[0, 1], 1, 1).unwrap();
        assert!(realize_formula(&[wrong_arity], &ctx, 1, 0).is_err());
        let wrong_radius = local_type(&g, &[0], 1, 2).unwrap();
        assert!(realize_formula(&[wrong_radius], &ctx, 1, 0).is_err());
    }
}
