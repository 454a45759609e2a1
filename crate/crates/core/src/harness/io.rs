//! Text formats for samples, hypotheses and result records.
//!
//! Samples are line based:
//!
//! ```text
//! # optional header fixing the arity
//! k 2
//! + 0 3
//! - 1 4
//! ```
//!
//! Hypotheses are JSON objects `{k, formula, parameters}`; result records
//! are JSON lines.

use super::ResultRecord;
use crate::error::{Error, Result};
use crate::graph::VertexTuple;
use crate::learn::{Hypothesis, Sample};
use crate::logic::parse_formula;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

pub fn parse_sample(text: &str) -> Result<Sample> {
    let mut k: Option<usize> = None;
    let (mut pos, mut neg) = (Vec::new(), Vec::new());
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut words = content
            .split_whitespace()
            .map(|w| (w, w.as_ptr() as usize - raw.as_ptr() as usize + 1));
        let Some((head, col)) = words.next() else {
            continue;
        };
        let mut numbers = Vec::new();
        for (w, c) in words {
            let value: usize = w
                .parse()
                .map_err(|_| parse_error(line_no, c, format!("`{w}` is not a number")))?;
            numbers.push(value);
        }
        match head {
            "k" => {
                if k.is_some() || !pos.is_empty() || !neg.is_empty() {
                    return Err(parse_error(line_no, col, "the arity header must come first"));
                }
                if numbers.len() != 1 || numbers[0] == 0 {
                    return Err(parse_error(line_no, col, "expected one positive arity"));
                }
                k = Some(numbers[0]);
            }
            "+" | "-" => {
                let expected = *k.get_or_insert(numbers.len());
                if numbers.is_empty() || numbers.len() != expected {
                    return Err(parse_error(
                        line_no,
                        col,
                        format!("expected {expected} vertices, found {}", numbers.len()),
                    ));
                }
                let tuple = VertexTuple::new(numbers);
                if head == "+" {
                    pos.push(tuple);
                } else {
                    neg.push(tuple);
                }
            }
            other => return Err(parse_error(line_no, col, format!("unknown line kind `{other}`"))),
        }
    }
    let k = k.ok_or_else(|| Error::input("cannot infer the arity of an empty sample without a `k` header"))?;
    Sample::new(k, pos, neg)
}

/// Writes a sample with an arity header; positives first.
pub fn write_sample(sample: &Sample) -> String {
    let mut out = format!("k {}\n", sample.k());
    for (t, positive) in sample.examples() {
        out.push(if positive { '+' } else { '-' });
        for v in t.iter() {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    out
}

/// Serialized form of a hypothesis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisFile {
    pub k: usize,
    pub formula: String,
    pub parameters: Vec<usize>,
}

pub fn write_hypothesis(h: &Hypothesis) -> Result<String> {
    let file = HypothesisFile {
        k: h.k,
        formula: h.formula.to_string(),
        parameters: h.parameters.clone(),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

/// Reads a hypothesis; the type rule and trace are not stored.
pub fn parse_hypothesis(text: &str) -> Result<Hypothesis> {
    let file: HypothesisFile = serde_json::from_str(text)?;
    let formula = parse_formula(&file.formula)?;
    Ok(Hypothesis::from_formula(file.k, formula, file.parameters))
}

pub fn write_records(records: &[ResultRecord]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

/// Reads JSON lines, skipping blank lines. Errors name the line.
pub fn parse_records(text: &str) -> Result<Vec<ResultRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| parse_error(i + 1, e.column(), e.to_string()))
        })
        .collect()
}
