//! Learning first-order definable concepts over finite colored graphs.
//!
//! The crate is organized bottom-up:
//!
//! - [`graph`]: colored graphs, neighborhoods, the Vitali-style ball cover.
//! - [`logic`]: first-order formulas, parsing, model checking, constant pinning.
//! - [`types`]: canonical rank-q types, local types and their realization as formulas.
//! - [`splitter`]: the splitter game, exact minimax search and the forest strategy.
//! - [`learn`]: training error, brute-force ERM, the exact learners and the
//!   nowhere-dense agnostic learner.
//! - [`hardness`]: model checking through a learning oracle.
//! - [`harness`]: instance generation, experiments and file formats.
//!
//! Data-parallel loops go through [`par`]; with the `parallel` feature
//! disabled they run sequentially with identical results.

pub mod error;
pub mod graph;
pub mod hardness;
pub mod harness;
pub mod learn;
pub mod logic;
pub mod par;
pub mod splitter;
pub mod types;

pub use error::{Error, Result};
pub use graph::{ColoredGraph, VertexTuple, Vocabulary};
pub use learn::{Hypothesis, LearnConfig, LearnOutcome, Sample};
pub use logic::{Formula, Var};
pub use types::{TypeContext, TypeId};
