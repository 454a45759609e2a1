//! Command-line front end for the folearn library.
//!
//! Exit codes: 0 on success, 1 when a requested bound or check fails,
//! 2 on errors.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use folearn::graph::{parse_graph, write_graph};
use folearn::hardness::{mc_via_learn_oracle, ConstLOracle, ErmOracle, LearnOracle};
use folearn::harness::{
    generate_instance, parse_records, parse_sample, summarize, write_hypothesis, write_records, write_sample,
    Algorithm, DatasetSpec, Manifest, StrategyKind,
};
use folearn::learn::{
    erm_typeset, learn_const_l, learn_k1, learn_nd, training_error, Hypothesis, LearnConfig, LearnOutcome, Rate,
};
use folearn::logic::{eval, parse_formula, Assignment, Var};
use folearn::splitter::{minimax_depth, verify_winning, ExactStrategy, ForestStrategy, Strategy, Verdict, DEFAULT_STATE_BUDGET};
use folearn::{ColoredGraph, Sample};
use serde_json::{json, Value};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "folearn", version, about = "Learning first-order definable concepts on colored graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph, training sample and test sample from a dataset spec.
    Gen(GenArgs),
    /// Train a learner on a graph and sample.
    Learn(LearnArgs),
    /// Evaluate a formula on a graph.
    Mc(McArgs),
    /// Decide a sentence using only a learning oracle.
    ReduceMc(ReduceArgs),
    /// Solve or check the splitter game on a graph.
    Splitter(SplitterArgs),
    /// Run every trial of a manifest and write JSON-lines results.
    Experiment(ExperimentArgs),
    /// Aggregate a JSON-lines result file.
    Summarize(SummarizeArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Dataset spec as JSON.
    #[arg(long)]
    spec: PathBuf,
    /// Directory for graph.txt, train.txt, test.txt and target.json.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the seed of the spec.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct LearnArgs {
    #[arg(long, value_parser = parse_algorithm)]
    algo: Algorithm,
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    sample: PathBuf,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    l: usize,
    #[arg(long, default_value_t = 1)]
    q: u32,
    /// Accuracy slack for the nd learner, as `a/b` or a decimal.
    #[arg(long, default_value = "1/5", value_parser = parse_rate)]
    epsilon: Rate,
    #[arg(long, value_parser = parse_strategy, default_value = "auto")]
    strategy: StrategyKind,
    /// Echoed in the output; the learners themselves are deterministic.
    #[arg(long)]
    seed: Option<u64>,
    /// Also write the hypothesis file here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct McArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    formula: String,
    /// Values of free variables, as `x1=3`.
    #[arg(long = "assign", value_parser = parse_binding)]
    assign: Vec<(Var, usize)>,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    formula: String,
    #[arg(long, default_value = "const-l")]
    oracle: String,
    /// Also evaluate directly and fail when the verdicts differ.
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct SplitterArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    radius: u32,
    /// Optimal play by exhaustive search (the default).
    #[arg(long, conflicts_with = "forest")]
    exact: bool,
    /// The rooted-forest strategy.
    #[arg(long)]
    forest: bool,
    /// Check that the strategy wins within this many rounds.
    #[arg(long)]
    verify: Option<usize>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// JSON-lines output; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SummarizeArgs {
    results: PathBuf,
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: folearn::Error| e.to_string())
}

fn parse_strategy(s: &str) -> Result<StrategyKind, String> {
    s.parse().map_err(|e: folearn::Error| e.to_string())
}

fn parse_rate(s: &str) -> Result<Rate, String> {
    if let Ok(r) = s.parse::<Rate>() {
        return Ok(r);
    }
    // Decimals are read exactly: "0.25" is 25/100.
    let (int, frac) = s.split_once('.').ok_or_else(|| format!("`{s}` is not a rate"))?;
    let digits = format!("{int}{frac}");
    let numer: u64 = digits.parse().map_err(|_| format!("`{s}` is not a rate"))?;
    let denom = 10u64
        .checked_pow(frac.len() as u32)
        .ok_or_else(|| format!("`{s}` has too many digits"))?;
    Ok(Rate::new(numer, denom))
}

fn parse_binding(s: &str) -> Result<(Var, usize), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected VAR=VERTEX, got `{s}`"))?;
    let var = Var::parse(name.trim()).ok_or_else(|| format!("`{name}` is not a variable"))?;
    let vertex = value.trim().parse().map_err(|_| format!("`{value}` is not a vertex"))?;
    Ok((var, vertex))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_graph(path: &Path) -> Result<ColoredGraph> {
    parse_graph(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_sample(path: &Path) -> Result<Sample> {
    parse_sample(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn print_json(value: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    emit(&format!("{text}\n"))
}

// Writes to standard output; a closed pipe is not an error.
fn emit(text: &str) -> Result<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Gen(a) => gen(a),
        Command::Learn(a) => learn(a),
        Command::Mc(a) => mc(a),
        Command::ReduceMc(a) => reduce_mc(a),
        Command::Splitter(a) => splitter(a),
        Command::Experiment(a) => experiment(a),
        Command::Summarize(a) => summarize_file(a),
    }
}

fn gen(args: GenArgs) -> Result<bool> {
    let mut spec: DatasetSpec = serde_json::from_str(&read(&args.spec)?)?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let inst = generate_instance(&spec)?;
    fs::create_dir_all(&args.out)?;
    fs::write(args.out.join("graph.txt"), write_graph(&inst.graph))?;
    fs::write(args.out.join("train.txt"), write_sample(&inst.train))?;
    // Test examples are drawn with replacement and may repeat, so they are
    // written as a plain list rather than a sample.
    let mut test = format!("k {}\n", spec.k);
    for ex in &inst.test {
        let words: Vec<String> = ex.tuple.iter().map(|v| v.to_string()).collect();
        test.push_str(&format!("{} {}\n", if ex.positive { '+' } else { '-' }, words.join(" ")));
    }
    fs::write(args.out.join("test.txt"), test)?;
    let target = Hypothesis::from_formula(spec.k, inst.target.clone(), inst.target_parameters.clone());
    fs::write(args.out.join("target.json"), write_hypothesis(&target)?)?;
    print_json(&json!({
        "vertices": inst.graph.n(),
        "edges": inst.graph.edge_count(),
        "train": inst.train.len(),
        "test": inst.test.len(),
        "target_parameters": inst.target_parameters,
    }))?;
    Ok(true)
}

fn learn(args: LearnArgs) -> Result<bool> {
    let graph = load_graph(&args.graph)?;
    let sample = load_sample(&args.sample)?;
    if let Some(k) = args.k {
        if k != sample.k() {
            bail!("--k {k} does not match the sample arity {}", sample.k());
        }
    }
    sample.check(&graph)?;
    let (l, q) = (args.l, args.q);
    let outcome = match args.algo {
        Algorithm::Erm => LearnOutcome::Learned(erm_typeset(&graph, &sample, l, q)?.hypothesis),
        Algorithm::ConstL => learn_const_l(&graph, &sample, l, q)?,
        Algorithm::K1 => learn_k1(&graph, &sample, l, q)?,
        Algorithm::Nd => {
            let cfg = LearnConfig::new(sample.k(), l, q, args.epsilon);
            let strategy: Box<dyn Strategy> = args.strategy.build(&graph, cfg.game_radius())?;
            LearnOutcome::Learned(learn_nd(&graph, &sample, &cfg, strategy.as_ref())?)
        }
    };
    let h = match outcome {
        LearnOutcome::Learned(h) => h,
        LearnOutcome::Reject => {
            print_json(&json!({ "verdict": "reject" }))?;
            return Ok(true);
        }
    };
    let train = training_error(&graph, &h, &sample)?;
    let mut out = json!({
        "formula_text": h.formula.to_string(),
        "parameters": h.parameters,
        "quantifier_rank": h.quantifier_rank(),
        "train_error": train.to_string(),
    });
    if args.algo == Algorithm::Nd {
        let erm = erm_typeset(&graph, &sample, l, q)?.error;
        out["erm_lower_bound"] = json!(erm.to_string());
        out["stage_trace"] = serde_json::to_value(&h.trace)?;
    }
    if let Some(seed) = args.seed {
        out["seed"] = json!(seed);
    }
    if let Some(path) = &args.out {
        fs::write(path, write_hypothesis(&h)?)?;
    }
    print_json(&out)?;
    Ok(true)
}

fn mc(args: McArgs) -> Result<bool> {
    let graph = load_graph(&args.graph)?;
    let formula = parse_formula(&args.formula)?;
    let mut assignment = Assignment::new();
    for (var, v) in args.assign {
        assignment.set(var, v);
    }
    emit(&format!("{}\n", eval(&graph, &formula, &assignment)?))?;
    Ok(true)
}

fn reduce_mc(args: ReduceArgs) -> Result<bool> {
    let graph = load_graph(&args.graph)?;
    let sentence = parse_formula(&args.formula)?;
    let oracle: &dyn LearnOracle = match args.oracle.as_str() {
        "const-l" => &ConstLOracle,
        "erm" => &ErmOracle,
        other => bail!("unknown oracle `{other}`"),
    };
    let report = mc_via_learn_oracle(&graph, &sentence, oracle)?;
    let mut out = json!({
        "verdict": report.verdict,
        "oracle": oracle.name(),
        "oracle_calls": report.oracle_calls,
        "levels": report.levels.iter().map(|l| json!({
            "depth": l.depth,
            "vertices": l.vertices,
            "oracle_calls": l.oracle_calls,
            "classes": l.classes.len(),
        })).collect::<Vec<_>>(),
    });
    let mut ok = true;
    if args.check {
        let direct = eval(&graph, &sentence, &Assignment::new())?;
        out["direct"] = json!(direct);
        ok = direct == report.verdict;
    }
    print_json(&out)?;
    Ok(ok)
}

fn splitter(args: SplitterArgs) -> Result<bool> {
    let graph = load_graph(&args.graph)?;
    let strategy: Box<dyn Strategy> = if args.forest {
        Box::new(ForestStrategy::new(&graph)?)
    } else {
        Box::new(ExactStrategy::new(&graph, args.radius)?)
    };
    let mut out = json!({
        "strategy": strategy.name(),
        "radius": args.radius,
        "depth": strategy.depth(),
    });
    if !args.forest {
        out["minimax_depth"] = json!(minimax_depth(&graph, args.radius, DEFAULT_STATE_BUDGET)?);
    }
    let mut ok = true;
    if let Some(s) = args.verify {
        let verdict = verify_winning(&graph, args.radius, s, strategy.as_ref(), DEFAULT_STATE_BUDGET)?;
        out["verify"] = match verdict {
            Verdict::Winning => json!({ "rounds": s, "verdict": "winning" }),
            Verdict::Losing { rounds_needed } => {
                ok = false;
                json!({ "rounds": s, "verdict": "losing", "rounds_needed": rounds_needed })
            }
            Verdict::Indeterminate => {
                ok = false;
                json!({ "rounds": s, "verdict": "indeterminate" })
            }
        };
    }
    print_json(&out)?;
    Ok(ok)
}

fn experiment(args: ExperimentArgs) -> Result<bool> {
    let manifest = Manifest::parse(&read(&args.manifest)?)?;
    let mut records = Vec::new();
    let mut failed = 0;
    for (trial, result) in manifest.trials().iter().zip(manifest.run()) {
        match result {
            Ok(r) => records.push(r),
            Err(e) => {
                failed += 1;
                eprintln!(
                    "trial seed {} algorithm {} failed: {e}",
                    trial.spec.seed, trial.options.algorithm
                );
            }
        }
    }
    let text = write_records(&records)?;
    match &args.out {
        Some(path) => fs::write(path, text)?,
        None => emit(&text)?,
    }
    let summary = summarize(&records);
    eprintln!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(failed == 0 && summary.all_bounds_hold)
}

fn summarize_file(args: SummarizeArgs) -> Result<bool> {
    let records = parse_records(&read(&args.results)?).map_err(|e| anyhow!("in {}: {e}", args.results.display()))?;
    let summary = summarize(&records);
    print_json(&serde_json::to_value(&summary)?)?;
    Ok(summary.all_bounds_hold)
}

