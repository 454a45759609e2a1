//! Running learners on generated instances and aggregating the results.

use super::{generate_instance, DatasetSpec, Instance};
use crate::error::{Error, Result};
use crate::learn::{
    erm_typeset, learn_const_l, learn_k1, learn_nd_with, training_error, Hypothesis, LearnConfig, LearnOutcome, NdBudget,
    Rate, StageTrace,
};
use crate::par;
use crate::splitter::{ExactStrategy, ForestStrategy, Strategy};
use crate::types::{gaifman_radius, realized_rank_bound};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Erm,
    ConstL,
    K1,
    Nd,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Erm, Algorithm::ConstL, Algorithm::K1, Algorithm::Nd];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Erm => "erm",
            Algorithm::ConstL => "const-l",
            Algorithm::K1 => "k1",
            Algorithm::Nd => "nd",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::input(format!("unknown algorithm `{s}`")))
    }
}

/// Which splitter strategy the nowhere-dense learner uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    Exact,
    Forest,
    /// Forest strategy on forests, exact search otherwise.
    #[default]
    Auto,
}

impl StrategyKind {
    pub fn build(self, graph: &crate::graph::ColoredGraph, radius: u32) -> Result<Box<dyn Strategy>> {
        let forest = match self {
            StrategyKind::Forest => true,
            StrategyKind::Exact => false,
            StrategyKind::Auto => graph.is_forest(),
        };
        if forest {
            Ok(Box::new(ForestStrategy::new(graph)?))
        } else {
            Ok(Box::new(ExactStrategy::new(graph, radius.max(1))?))
        }
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(StrategyKind::Exact),
            "forest" => Ok(StrategyKind::Forest),
            "auto" => Ok(StrategyKind::Auto),
            _ => Err(Error::input(format!("unknown strategy `{s}`"))),
        }
    }
}

/// How to run one learner.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOptions {
    pub algorithm: Algorithm,
    pub epsilon: Rate,
    pub strategy: StrategyKind,
    pub nd_budget: NdBudget,
    /// Whether to compute the ERM error as a reference.
    pub erm_reference: bool,
}

impl ExperimentOptions {
    pub fn new(algorithm: Algorithm, epsilon: Rate) -> Self {
        ExperimentOptions {
            algorithm,
            epsilon,
            strategy: StrategyKind::Auto,
            nd_budget: NdBudget::default(),
            erm_reference: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Learned,
    Reject,
    /// A search budget ran out.
    Budget,
}

/// One trial's configuration and results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub spec: DatasetSpec,
    pub algorithm: Algorithm,
    #[serde(with = "rate_text")]
    pub epsilon: Rate,
    pub outcome: Outcome,
    pub message: Option<String>,
    pub formula: Option<String>,
    pub parameters: Option<Vec<usize>>,
    pub quantifier_rank: Option<u32>,
    pub rank_bound: Option<u32>,
    #[serde(with = "opt_rate_text")]
    pub train_error: Option<Rate>,
    #[serde(with = "opt_rate_text")]
    pub heldout_error: Option<Rate>,
    /// Least training error of any type-set hypothesis with `l` parameters.
    #[serde(with = "opt_rate_text")]
    pub erm_lower_bound: Option<Rate>,
    /// `train_error ≤ erm_lower_bound + ε`, for the nowhere-dense learner.
    pub bound_satisfied: Option<bool>,
    pub strategy: Option<String>,
    pub splitter_depth: Option<usize>,
    /// Parameter tuples or branches examined.
    pub search_size: Option<u64>,
    pub stage_trace: Option<Vec<StageTrace>>,
    pub wall_ms: u64,
    pub seed: u64,
}

impl ResultRecord {
    /// The record with the wall-clock time cleared, for comparisons.
    pub fn without_timing(&self) -> ResultRecord {
        ResultRecord {
            wall_ms: 0,
            ..self.clone()
        }
    }
}

/// Generates the instance, trains, and evaluates.
pub fn run_experiment(spec: &DatasetSpec, options: &ExperimentOptions) -> Result<ResultRecord> {
    let started = Instant::now();
    let inst = generate_instance(spec)?;
    let mut record = ResultRecord {
        spec: spec.clone(),
        algorithm: options.algorithm,
        epsilon: options.epsilon,
        outcome: Outcome::Reject,
        message: None,
        formula: None,
        parameters: None,
        quantifier_rank: None,
        rank_bound: None,
        train_error: None,
        heldout_error: None,
        erm_lower_bound: None,
        bound_satisfied: None,
        strategy: None,
        splitter_depth: None,
        search_size: None,
        stage_trace: None,
        wall_ms: 0,
        seed: spec.seed,
    };
    let trained = train(&inst, spec, options, &mut record);
    match trained {
        Ok(Some(h)) => {
            let train_error = training_error(&inst.graph, &h, &inst.train)?;
            if let Some(claimed) = record.train_error {
                if claimed != train_error {
                    return Err(Error::invariant(format!(
                        "learner reported error {claimed}, recomputed {train_error}"
                    )));
                }
            }
            record.outcome = Outcome::Learned;
            record.train_error = Some(train_error);
            record.heldout_error = Some(heldout_error(&inst, &h)?);
            record.formula = Some(h.formula.to_string());
            record.quantifier_rank = Some(h.quantifier_rank());
            record.parameters = Some(h.parameters.clone());
            if !h.trace.is_empty() {
                record.stage_trace = Some(h.trace.clone());
            }
        }
        Ok(None) => record.outcome = Outcome::Reject,
        Err(e) if e.is_budget() => {
            record.outcome = Outcome::Budget;
            record.message = Some(e.to_string());
        }
        Err(e) => return Err(e),
    }
    if options.erm_reference {
        match erm_typeset(&inst.graph, &inst.train, spec.l, spec.q) {
            Ok(out) => record.erm_lower_bound = Some(out.error),
            Err(e) if e.is_budget() => {}
            Err(e) => return Err(e),
        }
    }
    if options.algorithm == Algorithm::Nd {
        record.bound_satisfied = record
            .train_error
            .zip(record.erm_lower_bound)
            .map(|(train, erm)| train <= erm + options.epsilon);
    }
    record.wall_ms = started.elapsed().as_millis() as u64;
    Ok(record)
}

fn train(
    inst: &Instance,
    spec: &DatasetSpec,
    options: &ExperimentOptions,
    record: &mut ResultRecord,
) -> Result<Option<Hypothesis>> {
    let (graph, sample) = (&inst.graph, &inst.train);
    let type_bound = realized_rank_bound(spec.q, gaifman_radius(spec.q));
    let learned = |outcome: LearnOutcome| match outcome {
        LearnOutcome::Learned(h) => Some(h),
        LearnOutcome::Reject => None,
    };
    match options.algorithm {
        Algorithm::Erm => {
            record.rank_bound = Some(type_bound);
            let out = erm_typeset(graph, sample, spec.l, spec.q)?;
            record.search_size = Some(out.tuples_examined);
            record.train_error = Some(out.error);
            Ok(Some(out.hypothesis))
        }
        Algorithm::ConstL => {
            record.rank_bound = Some(type_bound);
            Ok(learned(learn_const_l(graph, sample, spec.l, spec.q)?))
        }
        Algorithm::K1 => {
            record.rank_bound = Some(type_bound);
            Ok(learned(learn_k1(graph, sample, spec.l, spec.q)?))
        }
        Algorithm::Nd => {
            let cfg = LearnConfig::new(spec.k, spec.l, spec.q, options.epsilon);
            let strategy = options.strategy.build(graph, cfg.game_radius())?;
            record.strategy = Some(strategy.name().to_string());
            record.splitter_depth = Some(strategy.depth());
            record.rank_bound = Some(cfg.rank_bound());
            let out = learn_nd_with(graph, sample, &cfg, strategy.as_ref(), options.nd_budget)?;
            record.search_size = Some(out.leaves);
            record.train_error = Some(out.error);
            Ok(Some(out.hypothesis))
        }
    }
}

fn heldout_error(inst: &Instance, h: &Hypothesis) -> Result<Rate> {
    if inst.test.is_empty() {
        return Ok(Rate::from_integer(0));
    }
    let classifier = h.classifier(&inst.graph)?;
    let mut wrong = 0u64;
    for ex in &inst.test {
        if classifier.classify(&ex.tuple)? != ex.positive {
            wrong += 1;
        }
    }
    Ok(Rate::new(wrong, inst.test.len() as u64))
}

/// A contiguous range of seeds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRange {
    pub start: u64,
    pub count: u64,
}

fn default_epsilon() -> Rate {
    Rate::new(1, 5)
}

/// A dataset spec crossed with algorithms and, optionally, seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub spec: DatasetSpec,
    pub algorithms: Vec<Algorithm>,
    #[serde(with = "rate_text", default = "default_epsilon")]
    pub epsilon: Rate,
    #[serde(default)]
    pub strategy: StrategyKind,
    /// Replaces the spec's seed by each seed of the range.
    #[serde(default)]
    pub seeds: Option<SeedRange>,
}

/// A batch of runs, stored as JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub runs: Vec<RunSpec>,
}

/// A single spec and learner configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct Trial {
    pub spec: DatasetSpec,
    pub options: ExperimentOptions,
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Manifest> {
        Ok(serde_json::from_str(text)?)
    }

    /// All trials, run by run, seed by seed, algorithm by algorithm.
    pub fn trials(&self) -> Vec<Trial> {
        let mut out = Vec::new();
        for run in &self.runs {
            let seeds: Vec<u64> = match run.seeds {
                Some(range) => (range.start..range.start + range.count).collect(),
                None => vec![run.spec.seed],
            };
            for seed in seeds {
                for &algorithm in &run.algorithms {
                    let mut options = ExperimentOptions::new(algorithm, run.epsilon);
                    options.strategy = run.strategy;
                    out.push(Trial {
                        spec: DatasetSpec {
                            seed,
                            ..run.spec.clone()
                        },
                        options,
                    });
                }
            }
        }
        out
    }

    /// Runs every trial, in parallel, returning results in trial order.
    pub fn run(&self) -> Vec<Result<ResultRecord>> {
        let trials = self.trials();
        par::map_slice(&trials, |t| run_experiment(&t.spec, &t.options))
    }
}

/// Per-algorithm aggregates.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub trials: usize,
    pub learned: usize,
    pub rejected: usize,
    pub budget_exceeded: usize,
    pub bound_checked: usize,
    pub bound_satisfied: usize,
    pub mean_train_error: Option<f64>,
    pub mean_heldout_error: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: usize,
    pub algorithms: BTreeMap<String, AlgorithmSummary>,
    /// No checked bound failed.
    pub all_bounds_hold: bool,
}

/// Aggregates records; the result does not depend on their order.
pub fn summarize(records: &[ResultRecord]) -> Summary {
    let mut sums: BTreeMap<String, (AlgorithmSummary, Rate, Rate, usize)> = BTreeMap::new();
    for r in records {
        let entry = sums.entry(r.algorithm.name().to_string()).or_insert_with(|| {
            (AlgorithmSummary::default(), Rate::from_integer(0), Rate::from_integer(0), 0)
        });
        let s = &mut entry.0;
        s.trials += 1;
        match r.outcome {
            Outcome::Learned => s.learned += 1,
            Outcome::Reject => s.rejected += 1,
            Outcome::Budget => s.budget_exceeded += 1,
        }
        if let Some(ok) = r.bound_satisfied {
            s.bound_checked += 1;
            s.bound_satisfied += ok as usize;
        }
        if let (Some(train), Some(held)) = (r.train_error, r.heldout_error) {
            entry.1 += train;
            entry.2 += held;
            entry.3 += 1;
        }
    }
    let to_f64 = |r: Rate| *r.numer() as f64 / *r.denom() as f64;
    let algorithms: BTreeMap<String, AlgorithmSummary> = sums
        .into_iter()
        .map(|(name, (mut s, train, held, count))| {
            if count > 0 {
                s.mean_train_error = Some(to_f64(train / Rate::from_integer(count as u64)));
                s.mean_heldout_error = Some(to_f64(held / Rate::from_integer(count as u64)));
            }
            (name, s)
        })
        .collect();
    Summary {
        trials: records.len(),
        all_bounds_hold: algorithms.values().all(|s| s.bound_checked == s.bound_satisfied),
        algorithms,
    }
}

/// Exact rationals as `"a/b"` strings.
mod rate_text {
    use super::Rate;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(rate: &Rate, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&rate.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rate, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(|_| D::Error::custom(format!("`{text}` is not a rational")))
    }
}

mod opt_rate_text {
    use super::Rate;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(rate: &Option<Rate>, s: S) -> Result<S::Ok, S::Error> {
        match rate {
            Some(r) => s.serialize_some(&r.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rate>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|text| text.parse().map_err(|_| D::Error::custom(format!("`{text}` is not a rational"))))
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::io::{parse_records, write_records};
    use crate::harness::{ColorSpec, GraphFamily};

    fn spec(seed: u64) -> DatasetSpec {
        DatasetSpec {
            family: GraphFamily::Forest {
                max_height: Some(3),
                root_probability: 0.15,
            },
            n: 16,
            colors: vec![ColorSpec {
                name: "Red".into(),
                density: 0.3,
            }],
            target: "exists z1. (E(x1, z1) & Red(z1))".into(),
            target_parameters: None,
            k: 1,
            l: 1,
            q: 1,
            m_train: 12,
            m_test: 20,
            noise: 0.0,
            seed,
        }
    }

    #[test]
    fn nd_run_is_reproducible_and_checked() {
        let opts = ExperimentOptions::new(Algorithm::Nd, Rate::new(1, 5));
        let a = run_experiment(&spec(4), &opts).unwrap();
        let b = run_experiment(&spec(4), &opts).unwrap();
        assert_eq!(a.without_timing(), b.without_timing());
        assert_eq!(a.bound_satisfied, Some(true));
        assert!(a.quantifier_rank.unwrap() <= a.rank_bound.unwrap());
    }

    #[test]
    fn records_roundtrip() {
        let opts = ExperimentOptions::new(Algorithm::Erm, Rate::new(1, 5));
        let rec = run_experiment(&spec(9), &opts).unwrap();
        assert_eq!(rec.train_error, Some(Rate::from_integer(0)));
        let text = write_records(std::slice::from_ref(&rec)).unwrap();
        assert_eq!(parse_records(&text).unwrap(), vec![rec]);
    }

    #[test]
    fn manifest_expands_seeds_and_algorithms() {
        let run = RunSpec {
            spec: spec(0),
            algorithms: vec![Algorithm::Erm, Algorithm::ConstL],
            epsilon: Rate::new(1, 10),
            strategy: StrategyKind::Auto,
            seeds: Some(SeedRange { start: 5, count: 3 }),
        };
        let manifest = Manifest { runs: vec![run] };
        let text = serde_json::to_string(&manifest).unwrap();
        let back = Manifest::parse(&text).unwrap();
        assert_eq!(back, manifest);
        let trials = back.trials();
        assert_eq!(trials.len(), 6);
        assert_eq!(trials[2].spec.seed, 6);
        assert_eq!(trials[3].options.algorithm, Algorithm::ConstL);
    }

    #[test]
    fn summary_is_order_independent() {
        let records: Vec<ResultRecord> = (0..3)
            .map(|seed| run_experiment(&spec(seed), &ExperimentOptions::new(Algorithm::Erm, Rate::new(1, 5))).unwrap())
            .collect();
        let forward = summarize(&records);
        let mut reversed = records.clone();
        reversed.reverse();
        assert_eq!(forward, summarize(&reversed));
        assert_eq!(forward.algorithms["erm"].trials, 3);
        assert!(forward.all_bounds_hold);
    }
}
