//! Brute-force reference implementations for the integration tests.
//!
//! Nothing here calls into the library's type, cover or evaluation code;
//! graphs are only read through adjacency and color queries.

#![allow(dead_code, clippy::needless_range_loop)]

use folearn::graph::{ColoredGraph, Vocabulary};
use folearn::learn::{Rate, Sample};
use folearn::logic::{Formula, Var};
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::{BTreeSet, HashMap, VecDeque};

pub const COLORS: [&str; 2] = ["Red", "Blue"];

/// Breadth-first distances from a set of sources; `None` when unreachable.
pub fn distances(g: &ColoredGraph, sources: &[usize]) -> Vec<Option<u32>> {
    let mut dist = vec![None; g.n()];
    let mut queue = VecDeque::new();
    for &s in sources {
        if dist[s].is_none() {
            dist[s] = Some(0);
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        let d = dist[u].unwrap();
        for v in 0..g.n() {
            if g.has_edge(u, v) && dist[v].is_none() {
                dist[v] = Some(d + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Vertices within distance `r` of some source, ascending.
pub fn ball(g: &ColoredGraph, sources: &[usize], r: u32) -> Vec<usize> {
    let dist = distances(g, sources);
    (0..g.n()).filter(|&v| dist[v].is_some_and(|d| d <= r)).collect()
}

pub fn distance(g: &ColoredGraph, u: usize, v: usize) -> Option<u32> {
    distances(g, &[u])[v]
}

fn vocabulary() -> Vocabulary {
    Vocabulary::new(COLORS).unwrap()
}

fn color_randomly(rng: &mut impl Rng, n: usize, density: f64) -> Vec<(&'static str, usize)> {
    let mut colors = Vec::new();
    for v in 0..n {
        for c in COLORS {
            if rng.gen_bool(density) {
                colors.push((c, v));
            }
        }
    }
    colors
}

/// Erdős–Rényi style graph with colors `Red` and `Blue`.
pub fn random_graph(rng: &mut impl Rng, n: usize, p: f64, density: f64) -> ColoredGraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    let colors = color_randomly(rng, n, density);
    ColoredGraph::build(vocabulary(), n, &edges, &colors).unwrap()
}

/// Random forest: each vertex after the first is a new root with
/// probability `root_p`, otherwise a child of a uniform earlier vertex.
pub fn random_forest(rng: &mut impl Rng, n: usize, root_p: f64, density: f64) -> ColoredGraph {
    let mut edges = Vec::new();
    for v in 1..n {
        if !rng.gen_bool(root_p) {
            edges.push((rng.gen_range(0..v), v));
        }
    }
    let colors = color_randomly(rng, n, density);
    ColoredGraph::build(vocabulary(), n, &edges, &colors).unwrap()
}

/// The same graph with vertex `v` renamed to `perm[v]`.
pub fn permuted(g: &ColoredGraph, perm: &[usize]) -> ColoredGraph {
    let edges: Vec<(usize, usize)> = g.edges().map(|(u, v)| (perm[u], perm[v])).collect();
    let mut colors = Vec::new();
    for v in 0..g.n() {
        for (i, name) in g.vocabulary().names().iter().enumerate() {
            if g.has_color(i, v) {
                colors.push((name.as_str(), perm[v]));
            }
        }
    }
    ColoredGraph::build(g.vocabulary().clone(), g.n(), &edges, &colors).unwrap()
}

pub fn random_permutation(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm
}

/// Colors of each entry, then equality and adjacency of each pair.
fn atomic(g: &ColoredGraph, t: &[usize]) -> Vec<u64> {
    let mut out = Vec::with_capacity(t.len() * (t.len() + 1) / 2);
    for &v in t {
        let mask = (0..g.vocabulary().len()).fold(0u64, |m, c| m | ((g.has_color(c, v) as u64) << c));
        out.push(mask);
    }
    for i in 0..t.len() {
        for j in i + 1..t.len() {
            out.push((t[i] == t[j]) as u64 | (g.has_edge(t[i], t[j]) as u64) << 1);
        }
    }
    out
}

/// Whether Duplicator wins the `q`-round Ehrenfeucht–Fraïssé game between
/// the subgraphs induced on `dom_a` and `dom_b`, pointed at `a` and `b`.
pub fn ef_equivalent(g: &ColoredGraph, dom_a: &[usize], a: &[usize], dom_b: &[usize], b: &[usize], q: u32) -> bool {
    if atomic(g, a) != atomic(g, b) {
        return false;
    }
    if q == 0 {
        return true;
    }
    let extend = |t: &[usize], c: usize| {
        let mut e = t.to_vec();
        e.push(c);
        e
    };
    let forth = dom_a
        .iter()
        .all(|&c| dom_b.iter().any(|&d| ef_equivalent(g, dom_a, &extend(a, c), dom_b, &extend(b, d), q - 1)));
    forth
        && dom_b
            .iter()
            .all(|&d| dom_a.iter().any(|&c| ef_equivalent(g, dom_a, &extend(a, c), dom_b, &extend(b, d), q - 1)))
}

/// A complete invariant of the rank-1 type of `t` over `dom`: its atomic
/// type and the set of atomic types of its one-vertex extensions.
fn rank1_signature(g: &ColoredGraph, dom: &[usize], t: &[usize]) -> (Vec<u64>, BTreeSet<Vec<u64>>) {
    let mut ext = t.to_vec();
    ext.push(0);
    let mut set = BTreeSet::new();
    for &c in dom {
        *ext.last_mut().unwrap() = c;
        set.insert(atomic(g, &ext));
    }
    (atomic(g, t), set)
}

/// Partitions tuples by local (q,r)-type; returns a class index per tuple,
/// numbered by first occurrence.
pub fn local_classes(g: &ColoredGraph, tuples: &[Vec<usize>], q: u32, r: u32) -> Vec<usize> {
    let balls: Vec<Vec<usize>> = tuples.iter().map(|t| ball(g, t, r)).collect();
    let mut class = vec![usize::MAX; tuples.len()];
    let mut next = 0;
    if q <= 1 {
        let mut seen: HashMap<(Vec<u64>, BTreeSet<Vec<u64>>), usize> = HashMap::new();
        for (i, t) in tuples.iter().enumerate() {
            let sig = if q == 0 {
                (atomic(g, t), BTreeSet::new())
            } else {
                rank1_signature(g, &balls[i], t)
            };
            class[i] = *seen.entry(sig).or_insert_with(|| {
                next += 1;
                next - 1
            });
        }
        return class;
    }
    for i in 0..tuples.len() {
        if class[i] != usize::MAX {
            continue;
        }
        class[i] = next;
        for j in i + 1..tuples.len() {
            if class[j] == usize::MAX && ef_equivalent(g, &balls[i], &tuples[i], &balls[j], &tuples[j], q) {
                class[j] = next;
            }
        }
        next += 1;
    }
    class
}

pub fn local_equivalent(g: &ColoredGraph, a: &[usize], b: &[usize], q: u32, r: u32) -> bool {
    let c = local_classes(g, &[a.to_vec(), b.to_vec()], q, r);
    c[0] == c[1]
}

/// Whole-graph rank-q equivalence.
pub fn rank_equivalent(g: &ColoredGraph, a: &[usize], b: &[usize], q: u32) -> bool {
    let all: Vec<usize> = (0..g.n()).collect();
    if q <= 1 {
        let sig = |t: &[usize]| {
            if q == 0 {
                (atomic(g, t), BTreeSet::new())
            } else {
                rank1_signature(g, &all, t)
            }
        };
        return sig(a) == sig(b);
    }
    ef_equivalent(g, &all, a, &all, b, q)
}

/// All `len`-tuples over `0..n` in lexicographic order.
pub fn all_tuples(n: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |v| {
                    let mut e = t.clone();
                    e.push(v);
                    e
                })
            })
            .collect();
    }
    out
}

/// Least training error of a hypothesis classifying `v̄` by the local
/// (q,r)-type of `v̄w̄`, over all `w̄ ∈ V^l`; each type class votes for its
/// majority label.
pub fn erm_oracle(g: &ColoredGraph, sample: &Sample, l: usize, q: u32, r: u32) -> Rate {
    let examples: Vec<(Vec<usize>, bool)> = sample.examples().map(|(t, y)| (t.to_vec(), y)).collect();
    if examples.is_empty() {
        return Rate::from_integer(0);
    }
    let best = all_tuples(g.n(), l)
        .iter()
        .map(|w| {
            let tuples: Vec<Vec<usize>> = examples.iter().map(|(t, _)| [t.as_slice(), w].concat()).collect();
            let class = local_classes(g, &tuples, q, r);
            let mut counts: HashMap<usize, (usize, usize)> = HashMap::new();
            for (i, (_, y)) in examples.iter().enumerate() {
                let e = counts.entry(class[i]).or_default();
                if *y {
                    e.0 += 1;
                } else {
                    e.1 += 1;
                }
            }
            counts.values().map(|&(p, n)| p.min(n)).sum::<usize>()
        })
        .min()
        .unwrap();
    Rate::new(best as u64, examples.len() as u64)
}

/// Direct recursive evaluation.
pub fn naive_eval(g: &ColoredGraph, f: &Formula, env: &mut HashMap<Var, usize>) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Eq(a, b) => env[a] == env[b],
        Formula::Edge(a, b) => g.has_edge(env[a], env[b]),
        Formula::Color(c, a) => {
            let i = g.vocabulary().index_of(c).expect("known color");
            g.has_color(i, env[a])
        }
        Formula::Not(a) => !naive_eval(g, a, env),
        Formula::And(a, b) => naive_eval(g, a, env) && naive_eval(g, b, env),
        Formula::Or(a, b) => naive_eval(g, a, env) || naive_eval(g, b, env),
        Formula::Implies(a, b) => !naive_eval(g, a, env) || naive_eval(g, b, env),
        Formula::Exists(x, body) | Formula::Forall(x, body) => {
            let want = matches!(f, Formula::Exists(..));
            let saved = env.get(x).copied();
            let mut result = !want;
            for v in 0..g.n() {
                env.insert(*x, v);
                if naive_eval(g, body, env) == want {
                    result = want;
                    break;
                }
            }
            match saved {
                Some(v) => env.insert(*x, v),
                None => env.remove(x),
            };
            result
        }
    }
}

/// Evaluates with `x1..xk` bound to `tuple` and `y1..` to `params`.
pub fn naive_eval_tuple(g: &ColoredGraph, f: &Formula, tuple: &[usize], params: &[usize]) -> bool {
    let mut env = HashMap::new();
    for (i, &v) in tuple.iter().enumerate() {
        env.insert(Var::Instance(i as u32 + 1), v);
    }
    for (i, &v) in params.iter().enumerate() {
        env.insert(Var::Param(i as u32 + 1), v);
    }
    naive_eval(g, f, &mut env)
}

/// A random formula of quantifier rank at most `qr` whose free variables
/// are among `scope`. Quantifiers bind `z1, z2, …`, sometimes shadowing.
pub fn random_formula(rng: &mut impl Rng, scope: &[Var], qr: u32, size: u32) -> Formula {
    let mut scope = scope.to_vec();
    gen(rng, &mut scope, qr, size)
}

fn gen(rng: &mut impl Rng, scope: &mut Vec<Var>, qr: u32, size: u32) -> Formula {
    let quantify = qr > 0 && (scope.is_empty() || rng.gen_bool(0.3));
    if !quantify && (size == 0 || rng.gen_bool(0.3)) {
        return atom(rng, scope);
    }
    if quantify {
        let bound = scope.iter().filter(|v| v.is_bound_family()).count() as u32;
        let z = if bound > 0 && rng.gen_bool(0.15) {
            Var::Bound(rng.gen_range(1..=bound))
        } else {
            Var::Bound(bound + 1)
        };
        scope.push(z);
        let body = gen(rng, scope, qr - 1, size.saturating_sub(1));
        scope.pop();
        return if rng.gen_bool(0.5) {
            Formula::exists(z, body)
        } else {
            Formula::forall(z, body)
        };
    }
    let half = size.saturating_sub(1) / 2;
    match rng.gen_range(0..4) {
        0 => gen(rng, scope, qr, size - 1).not(),
        1 => gen(rng, scope, qr, half).and(gen(rng, scope, qr, half)),
        2 => gen(rng, scope, qr, half).or(gen(rng, scope, qr, half)),
        _ => gen(rng, scope, qr, half).implies(gen(rng, scope, qr, half)),
    }
}

fn atom(rng: &mut impl Rng, scope: &[Var]) -> Formula {
    if scope.is_empty() {
        return if rng.gen_bool(0.5) { Formula::True } else { Formula::False };
    }
    let pick = |rng: &mut dyn rand::RngCore| scope[rng.gen_range(0..scope.len())];
    match rng.gen_range(0..3) {
        0 => Formula::Eq(pick(rng), pick(rng)),
        1 => Formula::Edge(pick(rng), pick(rng)),
        _ => Formula::Color(COLORS[rng.gen_range(0..COLORS.len())].to_string(), pick(rng)),
    }
}

/// `m` distinct uniform `k`-tuples (fewer if `n^k < m`).
pub fn distinct_tuples(rng: &mut impl Rng, n: usize, k: usize, m: usize) -> Vec<Vec<usize>> {
    let mut all = all_tuples(n, k);
    all.shuffle(rng);
    all.truncate(m);
    all
}

pub fn sample_from(k: usize, labeled: &[(Vec<usize>, bool)]) -> Sample {
    let pos = labeled.iter().filter(|(_, y)| *y).map(|(t, _)| t.clone().into()).collect();
    let neg = labeled.iter().filter(|(_, y)| !*y).map(|(t, _)| t.clone().into()).collect();
    Sample::new(k, pos, neg).unwrap()
}

/// Seeded generator for one test case.
pub fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}

/// Prints the line for one acceptance criterion.
pub fn report(name: &str, pass: bool, detail: &str) {
    println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
}
