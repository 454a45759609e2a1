//! First-order formulas over colored graphs.
//!
//! Atoms are `E(s,t)`, `<Color>(t)` and `s = t`. Variables come in three
//! reserved families: `x1, x2, …` for instance variables, `y1, y2, …` for
//! parameters, and `z1, z2, …` for bound variables.

mod eval;
mod parse;
mod pin;

pub use eval::{eval, Assignment, ModelChecker};
pub use parse::{parse_formula, parse_formula_in};
pub use pin::{pin_constant, Pinned};

use crate::error::{Error, Result};
use crate::graph::Vocabulary;
use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    /// `x<i>`
    Instance(u32),
    /// `y<i>`
    Param(u32),
    /// `z<i>`
    Bound(u32),
}

impl Var {
    /// Parses `x12`, `y3`, `z0`, …; anything else is `None`.
    pub fn parse(text: &str) -> Option<Var> {
        let mut chars = text.chars();
        let family = chars.next()?;
        let digits = chars.as_str();
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let index = digits.parse().ok()?;
        match family {
            'x' => Some(Var::Instance(index)),
            'y' => Some(Var::Param(index)),
            'z' => Some(Var::Bound(index)),
            _ => None,
        }
    }

    pub fn is_bound_family(self) -> bool {
        matches!(self, Var::Bound(_))
    }

    /// `x1..xk` followed by `y1..yl`: the free variables of a hypothesis
    /// formula with `k` instance positions and `l` parameters.
    pub fn tuple_vars(k: usize, l: usize) -> Vec<Var> {
        (1..=k as u32)
            .map(Var::Instance)
            .chain((1..=l as u32).map(Var::Param))
            .collect()
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Instance(i) => write!(f, "x{i}"),
            Var::Param(i) => write!(f, "y{i}"),
            Var::Bound(i) => write!(f, "z{i}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Eq(Var, Var),
    Edge(Var, Var),
    Color(String, Var),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists(Var, Box<Formula>),
    Forall(Var, Box<Formula>),
}

impl Formula {
    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Formula {
        Formula::Not(Box::new(self))
    }

    pub fn and(self, other: Formula) -> Formula {
        Formula::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Formula) -> Formula {
        Formula::Or(Box::new(self), Box::new(other))
    }

    pub fn implies(self, other: Formula) -> Formula {
        Formula::Implies(Box::new(self), Box::new(other))
    }

    pub fn exists(var: Var, body: Formula) -> Formula {
        Formula::Exists(var, Box::new(body))
    }

    pub fn forall(var: Var, body: Formula) -> Formula {
        Formula::Forall(var, Box::new(body))
    }

    /// Left-nested conjunction; `true` when empty.
    pub fn conjunction(parts: impl IntoIterator<Item = Formula>) -> Formula {
        parts
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or(Formula::True)
    }

    /// Left-nested disjunction; `false` when empty.
    pub fn disjunction(parts: impl IntoIterator<Item = Formula>) -> Formula {
        parts
            .into_iter()
            .reduce(Formula::or)
            .unwrap_or(Formula::False)
    }

    /// The canonical unsatisfiable formula `!(x1 = x1)`.
    pub fn canonical_false() -> Formula {
        Formula::Eq(Var::Instance(1), Var::Instance(1)).not()
    }

    /// `dist(u, v) <= d`, encoded by halving the distance at each
    /// quantifier, so the rank is `ceil(log2 d)` for `d >= 1`.
    ///
    /// Intermediate vertices are bound as `z<first_free>`, `z<first_free+1>`,
    /// … by nesting depth; callers pick `first_free` above every bound
    /// variable that `u` or `v` may be.
    pub fn distance_at_most(u: Var, v: Var, d: u32, first_free: u32) -> Formula {
        match d {
            0 => Formula::Eq(u, v),
            1 => Formula::Eq(u, v).or(Formula::Edge(u, v)),
            _ => {
                let mid = Var::Bound(first_free);
                let near = Formula::distance_at_most(u, mid, d.div_ceil(2), first_free + 1);
                let far = Formula::distance_at_most(mid, v, d / 2, first_free + 1);
                Formula::exists(mid, near.and(far))
            }
        }
    }

    /// Quantifier rank of [`Formula::distance_at_most`] for radius `d`.
    pub fn distance_rank(d: u32) -> u32 {
        if d <= 1 {
            0
        } else {
            // ceil(log2 d)
            32 - (d - 1).leading_zeros()
        }
    }

    pub fn quantifier_rank(&self) -> u32 {
        match self {
            Formula::True
            | Formula::False
            | Formula::Eq(..)
            | Formula::Edge(..)
            | Formula::Color(..) => 0,
            Formula::Not(a) => a.quantifier_rank(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.quantifier_rank().max(b.quantifier_rank())
            }
            Formula::Exists(_, body) | Formula::Forall(_, body) => 1 + body.quantifier_rank(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
        let mut note = |v: &Var, bound: &Vec<Var>| {
            if !bound.contains(v) {
                out.insert(*v);
            }
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Eq(a, b) | Formula::Edge(a, b) => {
                note(a, bound);
                note(b, bound);
            }
            Formula::Color(_, a) => note(a, bound),
            Formula::Not(a) => a.collect_free(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                bound.push(*v);
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Color names mentioned anywhere in the formula.
    pub fn colors(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Color(name, _) = f {
                out.insert(name.as_str());
            }
        });
        out
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        let mut count = 0;
        self.visit(&mut |_| count += 1);
        count
    }

    fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        f(self);
        match self {
            Formula::Not(a) | Formula::Exists(_, a) | Formula::Forall(_, a) => a.visit(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            _ => {}
        }
    }

    /// Checks that every color is declared and every free variable belongs to
    /// the instance or parameter family.
    pub fn check(&self, vocab: &Vocabulary) -> Result<()> {
        if let Some(unknown) = self.colors().into_iter().find(|c| !vocab.contains(c)) {
            return Err(Error::UnknownColor(unknown.to_string()));
        }
        if let Some(v) = self.free_vars().into_iter().find(|v| v.is_bound_family()) {
            return Err(Error::input(format!("bound-family variable {v} occurs free")));
        }
        Ok(())
    }

    /// Replaces free occurrences of `from` by `to`. `to` must not be captured
    /// by a quantifier of the formula.
    pub fn rename_free(&self, from: Var, to: Var) -> Formula {
        let r = |v: &Var| if *v == from { to } else { *v };
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Eq(a, b) => Formula::Eq(r(a), r(b)),
            Formula::Edge(a, b) => Formula::Edge(r(a), r(b)),
            Formula::Color(c, a) => Formula::Color(c.clone(), r(a)),
            Formula::Not(a) => a.rename_free(from, to).not(),
            Formula::And(a, b) => a.rename_free(from, to).and(b.rename_free(from, to)),
            Formula::Or(a, b) => a.rename_free(from, to).or(b.rename_free(from, to)),
            Formula::Implies(a, b) => a.rename_free(from, to).implies(b.rename_free(from, to)),
            Formula::Exists(v, _) | Formula::Forall(v, _) if *v == from => self.clone(),
            Formula::Exists(v, body) => Formula::exists(*v, body.rename_free(from, to)),
            Formula::Forall(v, body) => Formula::forall(*v, body.rename_free(from, to)),
        }
    }
}

// Display precedence levels: 0 quantifier / implication, 1 or, 2 and, 3 unary.
impl Formula {
    fn write(&self, f: &mut fmt::Formatter<'_>, level: u8) -> fmt::Result {
        let needs_parens = match self {
            Formula::Exists(..) | Formula::Forall(..) | Formula::Implies(..) => level > 0,
            Formula::Or(..) => level > 1,
            Formula::And(..) => level > 2,
            _ => false,
        };
        if needs_parens {
            write!(f, "(")?;
        }
        match self {
            Formula::True => write!(f, "true")?,
            Formula::False => write!(f, "false")?,
            Formula::Eq(a, b) => write!(f, "{a} = {b}")?,
            Formula::Edge(a, b) => write!(f, "E({a},{b})")?,
            Formula::Color(c, a) => write!(f, "{c}({a})")?,
            Formula::Not(a) => {
                write!(f, "!")?;
                if let Formula::Eq(..) = **a {
                    write!(f, "(")?;
                    a.write(f, 0)?;
                    write!(f, ")")?;
                } else {
                    a.write(f, 3)?;
                }
            }
            Formula::And(a, b) => {
                a.write(f, 2)?;
                write!(f, " & ")?;
                b.write(f, 3)?;
            }
            Formula::Or(a, b) => {
                a.write(f, 1)?;
                write!(f, " | ")?;
                b.write(f, 2)?;
            }
            Formula::Implies(a, b) => {
                a.write(f, 1)?;
                write!(f, " -> ")?;
                b.write(f, 0)?;
            }
            Formula::Exists(v, body) => {
                write!(f, "exists {v}. ")?;
                body.write(f, 0)?;
            }
            Formula::Forall(v, body) => {
                write!(f, "forall {v}. ")?;
                body.write(f, 0)?;
            }
        }
        if needs_parens {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, 0)
    }
}
