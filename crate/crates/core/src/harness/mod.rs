//! Synthetic instances, experiments and the artifact file formats.

mod experiment;
mod io;

pub use experiment::{
    run_experiment, summarize, Algorithm, AlgorithmSummary, ExperimentOptions, Manifest, ResultRecord, RunSpec,
    SeedRange, StrategyKind, Summary, Trial,
};
pub use io::{
    parse_hypothesis, parse_records, parse_sample, write_hypothesis, write_records, write_sample, HypothesisFile,
};

use crate::error::{Error, Result};
use crate::graph::{parse_graph, ColoredGraph, VertexTuple, Vocabulary};
use crate::learn::{Example, Sample};
use crate::logic::{parse_formula, Assignment, Formula, ModelChecker, Var};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

/// Graph families for synthetic instances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GraphFamily {
    /// Random forest; each vertex after the first starts a new tree with
    /// probability `root_probability`, otherwise it attaches to a uniform
    /// earlier vertex of depth below `max_height`.
    Forest {
        max_height: Option<u32>,
        #[serde(default = "default_root_probability")]
        root_probability: f64,
    },
    /// A path of `n / 2` spine vertices with the other vertices attached to
    /// uniform spine vertices.
    Caterpillar,
    /// Up to `edges` uniform random edges, skipping those that would exceed
    /// the degree bound.
    BoundedDegree { max_degree: usize, edges: usize },
    /// A graph file in the text format of [`crate::graph::parse_graph`].
    File { path: PathBuf },
}

fn default_root_probability() -> f64 {
    0.1
}

/// A color assigned to each vertex independently with probability `density`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColorSpec {
    pub name: String,
    pub density: f64,
}

/// A synthetic learning instance: graph, planted concept, sample sizes,
/// label noise and seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub family: GraphFamily,
    /// Number of vertices (ignored for graph files).
    pub n: usize,
    #[serde(default)]
    pub colors: Vec<ColorSpec>,
    /// Target formula over `x1..xk, y1..yl`.
    pub target: String,
    /// Target parameters; drawn uniformly when absent.
    #[serde(default)]
    pub target_parameters: Option<Vec<usize>>,
    pub k: usize,
    pub l: usize,
    pub q: u32,
    pub m_train: usize,
    pub m_test: usize,
    /// Probability of flipping each label.
    #[serde(default)]
    pub noise: f64,
    pub seed: u64,
}

// Independent random streams per consumer, so that adding a consumer never
// changes what the others draw.
const STREAM_GRAPH: u64 = 0;
const STREAM_COLORS: u64 = 1;
const STREAM_PARAMETERS: u64 = 2;
const STREAM_TRAIN: u64 = 3;
const STREAM_TEST: u64 = 4;

pub(crate) fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

impl DatasetSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::input("k must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.noise) {
            return Err(Error::input(format!("noise rate {} is not in [0, 1]", self.noise)));
        }
        if let Some(c) = self.colors.iter().find(|c| !(0.0..=1.0).contains(&c.density)) {
            return Err(Error::input(format!("density of {} is not in [0, 1]", c.name)));
        }
        match &self.family {
            GraphFamily::BoundedDegree { max_degree: 0, .. } => Err(Error::input("degree bound must be at least 1")),
            GraphFamily::Forest { root_probability, .. } if !(0.0..=1.0).contains(root_probability) => {
                Err(Error::input("root probability is not in [0, 1]"))
            }
            _ => Ok(()),
        }
    }

    /// The target formula, checked against the rank bound `q`.
    pub fn target_formula(&self) -> Result<Formula> {
        let phi = parse_formula(&self.target)?;
        if phi.quantifier_rank() > self.q {
            return Err(Error::input(format!(
                "target has quantifier rank {} above q = {}",
                phi.quantifier_rank(),
                self.q
            )));
        }
        Ok(phi)
    }
}

/// A generated instance.
#[derive(Clone, Debug)]
pub struct Instance {
    pub graph: ColoredGraph,
    pub target: Formula,
    pub target_parameters: Vec<usize>,
    pub train: Sample,
    /// Held-out examples drawn independently (with replacement) from the
    /// same distribution.
    pub test: Vec<Example>,
}

/// Generates the graph of a spec; deterministic in the seed.
pub fn generate_graph(spec: &DatasetSpec) -> Result<ColoredGraph> {
    spec.validate()?;
    let mut rng = stream(spec.seed, STREAM_GRAPH);
    let n = spec.n;
    let edges: Vec<(usize, usize)> = match &spec.family {
        GraphFamily::File { path } => {
            let text = std::fs::read_to_string(path)?;
            return parse_graph(&text);
        }
        GraphFamily::Forest {
            max_height,
            root_probability,
        } => {
            let limit = max_height.unwrap_or(u32::MAX);
            let mut depth = vec![0u32; n];
            let mut edges = Vec::new();
            for v in 1..n {
                let open: Vec<usize> = (0..v).filter(|&u| depth[u] < limit).collect();
                if open.is_empty() || rng.gen_bool(*root_probability) {
                    continue;
                }
                let parent = open[rng.gen_range(0..open.len())];
                depth[v] = depth[parent] + 1;
                edges.push((parent, v));
            }
            edges
        }
        GraphFamily::Caterpillar => {
            let spine = n.div_ceil(2);
            let mut edges: Vec<(usize, usize)> = (1..spine).map(|i| (i - 1, i)).collect();
            for v in spine..n {
                edges.push((rng.gen_range(0..spine), v));
            }
            edges
        }
        GraphFamily::BoundedDegree { max_degree, edges: want } => {
            let mut degree = vec![0usize; n];
            let mut edges = std::collections::BTreeSet::new();
            if n >= 2 {
                for _ in 0..want * 4 {
                    if edges.len() >= *want {
                        break;
                    }
                    let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
                    let e = (u.min(v), u.max(v));
                    if u == v || degree[u] >= *max_degree || degree[v] >= *max_degree || edges.contains(&e) {
                        continue;
                    }
                    degree[u] += 1;
                    degree[v] += 1;
                    edges.insert(e);
                }
            }
            edges.into_iter().collect()
        }
    };
    let vocab = Vocabulary::new(spec.colors.iter().map(|c| c.name.clone()))?;
    let mut color_rng = stream(spec.seed, STREAM_COLORS);
    let mut members: Vec<(&str, usize)> = Vec::new();
    for c in &spec.colors {
        for v in 0..n {
            if color_rng.gen_bool(c.density) {
                members.push((&c.name, v));
            }
        }
    }
    ColoredGraph::build(vocab, n, &edges, &members)
}

/// Generates graph, target parameters, training sample and held-out set.
pub fn generate_instance(spec: &DatasetSpec) -> Result<Instance> {
    let graph = generate_graph(spec)?;
    let target = spec.target_formula()?;
    let params = match &spec.target_parameters {
        Some(p) => {
            if p.len() != spec.l {
                return Err(Error::input(format!("{} target parameters given for l = {}", p.len(), spec.l)));
            }
            graph.check_tuple(p)?;
            p.clone()
        }
        None => {
            if graph.n() == 0 && spec.l > 0 {
                return Err(Error::input("cannot draw target parameters in an empty graph"));
            }
            let mut rng = stream(spec.seed, STREAM_PARAMETERS);
            (0..spec.l).map(|_| rng.gen_range(0..graph.n())).collect()
        }
    };
    let train = generate_sample(&graph, &target, &params, spec)?;
    let test = generate_heldout(&graph, &target, &params, spec)?;
    Ok(Instance {
        graph,
        target,
        target_parameters: params,
        train,
        test,
    })
}

fn labeler<'g>(graph: &'g ColoredGraph, target: &Formula, spec: &DatasetSpec) -> Result<ModelChecker<'g>> {
    let allowed = Var::tuple_vars(spec.k, spec.l);
    if let Some(v) = target.free_vars().iter().find(|v| !allowed.contains(v)) {
        return Err(Error::input(format!("target mentions {v}, outside x1..x{} y1..y{}", spec.k, spec.l)));
    }
    ModelChecker::new(graph, target)
}

fn label(checker: &ModelChecker<'_>, k: usize, tuple: &[usize], params: &[usize]) -> Result<bool> {
    checker.eval(&Assignment::from_tuple(k, &[tuple, params].concat()))
}

/// `m_train` distinct uniform `k`-tuples labeled by the target, each label
/// flipped with probability `noise`.
pub fn generate_sample(graph: &ColoredGraph, target: &Formula, params: &[usize], spec: &DatasetSpec) -> Result<Sample> {
    let checker = labeler(graph, target, spec)?;
    let space = (graph.n() as u64)
        .checked_pow(spec.k as u32)
        .filter(|&s| s <= usize::MAX as u64)
        .ok_or_else(|| Error::input("tuple space too large"))? as usize;
    if space < spec.m_train {
        return Err(Error::input(format!(
            "only {space} distinct {}-tuples for {} examples",
            spec.k, spec.m_train
        )));
    }
    let mut rng = stream(spec.seed, STREAM_TRAIN);
    let picks = index::sample(&mut rng, space, spec.m_train);
    let (mut pos, mut neg) = (Vec::new(), Vec::new());
    for i in picks.iter() {
        let tuple = crate::learn::nth_tuple(i as u64, graph.n(), spec.k);
        let mut positive = label(&checker, spec.k, &tuple, params)?;
        if rng.gen_bool(spec.noise) {
            positive = !positive;
        }
        if positive {
            pos.push(VertexTuple::new(tuple));
        } else {
            neg.push(VertexTuple::new(tuple));
        }
    }
    Sample::new(spec.k, pos, neg)
}

fn generate_heldout(graph: &ColoredGraph, target: &Formula, params: &[usize], spec: &DatasetSpec) -> Result<Vec<Example>> {
    if spec.m_test == 0 {
        return Ok(Vec::new());
    }
    if graph.n() == 0 {
        return Err(Error::input("cannot draw test examples in an empty graph"));
    }
    let checker = labeler(graph, target, spec)?;
    let mut rng = stream(spec.seed, STREAM_TEST);
    (0..spec.m_test)
        .map(|_| {
            let tuple: Vec<usize> = (0..spec.k).map(|_| rng.gen_range(0..graph.n())).collect();
            let mut positive = label(&checker, spec.k, &tuple, params)?;
            if rng.gen_bool(spec.noise) {
                positive = !positive;
            }
            Ok(Example { tuple, positive })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn forest_spec(seed: u64) -> DatasetSpec {
        DatasetSpec {
            family: GraphFamily::Forest {
                max_height: Some(4),
                root_probability: 0.1,
            },
            n: 30,
            colors: vec![ColorSpec {
                name: "Red".into(),
                density: 0.3,
            }],
            target: "exists z1. (E(x1, z1) & Red(z1)) | x1 = y1".into(),
            target_parameters: None,
            k: 1,
            l: 1,
            q: 1,
            m_train: 20,
            m_test: 50,
            noise: 0.0,
            seed,
        }
    }

    #[test]
    fn forest_is_deterministic_and_acyclic() {
        let spec = forest_spec(7);
        let a = generate_graph(&spec).unwrap();
        let b = generate_graph(&spec).unwrap();
        assert_eq!(a, b);
        assert!(a.is_forest());
        assert_eq!(a.n(), 30);
        let other = generate_graph(&forest_spec(8)).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn forest_height_bound() {
        let spec = DatasetSpec {
            family: GraphFamily::Forest {
                max_height: Some(2),
                root_probability: 0.0,
            },
            n: 40,
            ..forest_spec(3)
        };
        let g = generate_graph(&spec).unwrap();
        // one tree rooted at 0 of height at most 2
        let dist = crate::graph::bfs_distances(&g, 0);
        assert!(dist.iter().all(|&d| d <= 2));
    }

    #[test]
    fn other_families() {
        let cat = DatasetSpec {
            family: GraphFamily::Caterpillar,
            ..forest_spec(1)
        };
        let g = generate_graph(&cat).unwrap();
        assert!(g.is_forest());
        assert_eq!(g.components().len(), 1);
        let bounded = DatasetSpec {
            family: GraphFamily::BoundedDegree {
                max_degree: 3,
                edges: 40,
            },
            ..forest_spec(1)
        };
        let g = generate_graph(&bounded).unwrap();
        assert!((0..g.n()).all(|v| g.degree(v) <= 3));
        let bad = DatasetSpec {
            family: GraphFamily::BoundedDegree { max_degree: 0, edges: 1 },
            ..forest_spec(1)
        };
        assert!(generate_graph(&bad).is_err());
    }

    #[test]
    fn noiseless_labels_follow_the_target() {
        let spec = forest_spec(11);
        let inst = generate_instance(&spec).unwrap();
        assert_eq!(inst.train.len(), 20);
        for (t, label) in inst.train.examples() {
            let tuple = t.extended(&inst.target_parameters);
            let expect = crate::logic::eval(&inst.graph, &inst.target, &Assignment::from_tuple(1, &tuple)).unwrap();
            assert_eq!(label, expect);
        }
    }

    #[test]
    fn full_noise_flips_every_label() {
        let clean = generate_instance(&forest_spec(5)).unwrap();
        let flipped = generate_instance(&DatasetSpec {
            noise: 1.0,
            ..forest_spec(5)
        })
        .unwrap();
        assert_eq!(clean.train.positives(), flipped.train.negatives());
        assert_eq!(clean.train.negatives(), flipped.train.positives());
    }

    #[test]
    fn sample_size_limits() {
        let spec = DatasetSpec {
            n: 4,
            m_train: 5,
            ..forest_spec(2)
        };
        assert!(generate_instance(&spec).is_err());
        let high_rank = DatasetSpec {
            q: 0,
            ..forest_spec(2)
        };
        assert!(generate_instance(&high_rank).is_err());
    }
}
