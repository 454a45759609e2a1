//! Recursive-descent parser for the formula grammar.
//!
//! ```text
//! form    := ("exists" | "forall") var "." form | implies
//! implies := or ("->" form)?
//! or      := and ("|" and)*
//! and     := unary ("&" unary)*
//! unary   := "!" unary | "(" form ")" | quantified form | atom
//! atom    := "true" | "false" | "E(" var "," var ")" | Color "(" var ")" | var "=" var
//! ```

use super::{Formula, Var};
use crate::error::{Error, Result};
use crate::graph::Vocabulary;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Equals,
    Bang,
    Amp,
    Pipe,
    Arrow,
    End,
}

#[derive(Clone, Copy, Debug)]
struct Pos {
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut column = 1;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, column };
        if c == '\n' {
            chars.next();
            line += 1;
            column = 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            column += 1;
            continue;
        }
        if c.is_ascii_alphanumeric() || c == '_' {
            let mut word = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    word.push(c);
                    chars.next();
                    column += 1;
                } else {
                    break;
                }
            }
            out.push((Tok::Ident(word), pos));
            continue;
        }
        chars.next();
        column += 1;
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            '=' => Tok::Equals,
            '!' => Tok::Bang,
            '&' => Tok::Amp,
            '|' => Tok::Pipe,
            '-' if chars.peek() == Some(&'>') => {
                chars.next();
                column += 1;
                Tok::Arrow
            }
            other => {
                return Err(Error::Parse {
                    line: pos.line,
                    column: pos.column,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        out.push((tok, pos));
    }
    out.push((Tok::End, Pos { line, column }));
    Ok(out)
}

struct Parser {
    tokens: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.at].0
    }

    fn pos(&self) -> Pos {
        self.tokens[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let tok = self.tokens[self.at].0.clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        tok
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        let pos = self.pos();
        Err(Error::Parse {
            line: pos.line,
            column: pos.column,
            message: message.into(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {what}, found {}", describe(self.peek())))
        }
    }

    fn var(&mut self) -> Result<Var> {
        if let Tok::Ident(word) = self.peek() {
            if let Some(v) = Var::parse(word) {
                self.bump();
                return Ok(v);
            }
        }
        self.error(format!("expected a variable, found {}", describe(self.peek())))
    }

    fn form(&mut self) -> Result<Formula> {
        match self.peek() {
            Tok::Ident(w) if w == "exists" || w == "forall" => self.quantified(),
            _ => self.implies(),
        }
    }

    fn quantified(&mut self) -> Result<Formula> {
        let Tok::Ident(keyword) = self.bump() else {
            unreachable!("caller checked for a quantifier keyword")
        };
        let var_pos = self.pos();
        let var = self.var()?;
        if !var.is_bound_family() {
            return Err(Error::Parse {
                line: var_pos.line,
                column: var_pos.column,
                message: format!("only z-variables can be quantified, found {var}"),
            });
        }
        self.expect(Tok::Dot, "`.` after the quantified variable")?;
        let body = self.form()?;
        Ok(if keyword == "exists" {
            Formula::exists(var, body)
        } else {
            Formula::forall(var, body)
        })
    }

    fn implies(&mut self) -> Result<Formula> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.form()?;
            return Ok(lhs.implies(rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula> {
        let mut acc = self.and()?;
        while *self.peek() == Tok::Pipe {
            self.bump();
            acc = acc.or(self.and()?);
        }
        Ok(acc)
    }

    fn and(&mut self) -> Result<Formula> {
        let mut acc = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            acc = acc.and(self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(self.unary()?.not())
            }
            Tok::LParen => {
                self.bump();
                let inner = self.form()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Ident(w) if w == "exists" || w == "forall" => self.quantified(),
            Tok::Ident(w) if w == "true" => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::Ident(w) if w == "false" => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::Ident(w) if Var::parse(&w).is_some() => {
                let a = self.var()?;
                self.expect(Tok::Equals, "`=`")?;
                let b = self.var()?;
                Ok(Formula::Eq(a, b))
            }
            Tok::Ident(w) => {
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                let a = self.var()?;
                if w == "E" {
                    self.expect(Tok::Comma, "`,`")?;
                    let b = self.var()?;
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(Formula::Edge(a, b))
                } else {
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(Formula::Color(w, a))
                }
            }
            other => self.error(format!("expected a formula, found {}", describe(&other))),
        }
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Ident(w) => format!("`{w}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Dot => "`.`".into(),
        Tok::Equals => "`=`".into(),
        Tok::Bang => "`!`".into(),
        Tok::Amp => "`&`".into(),
        Tok::Pipe => "`|`".into(),
        Tok::Arrow => "`->`".into(),
        Tok::End => "end of input".into(),
    }
}

/// Parses a formula. Free variables must be instance (`x*`) or parameter
/// (`y*`) variables.
pub fn parse_formula(text: &str) -> Result<Formula> {
    let mut parser = Parser {
        tokens: lex(text)?,
        at: 0,
    };
    let formula = parser.form()?;
    if *parser.peek() != Tok::End {
        return parser.error(format!("unexpected {}", describe(parser.peek())));
    }
    if let Some(v) = formula.free_vars().into_iter().find(|v| v.is_bound_family()) {
        return Err(Error::Input(format!("unbound variable {v}")));
    }
    Ok(formula)
}

/// Parses a formula and checks its colors against `vocab`.
pub fn parse_formula_in(text: &str, vocab: &Vocabulary) -> Result<Formula> {
    let formula = parse_formula(text)?;
    formula.check(vocab)?;
    Ok(formula)
}
