use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ordermill::bdd::{evaluate_order_with_cap, format_order, parse_order, BddError, DEFAULT_NODE_CAP};
use ordermill::features::{FeatureExtractor, FeatureSchema};
use ordermill::harness::{
    aggregate, learning_curve, run_bench, write_aggregate_csv, write_bench_csv, write_curve_csv, Classifiers,
    CurveConfig, HarnessError, SuiteConfig,
};
use ordermill::learning::{deserialize_tree, serialize_tree, train, DecisionTree, LearnError, TrainConfig, TreeFormatError, TreeKind};
use ordermill::model::{build_connectivity_graph, parse_bench, parse_native, Model};
use ordermill::ordering::{order_model, Algorithm, CycleMode, OrderingError};

const EXIT_PARSE: u8 = 2;
const EXIT_RESOURCE: u8 = 3;
const EXIT_SCHEMA: u8 = 4;
const EXIT_ORDER: u8 = 5;
const EXIT_USAGE: u8 = 64;

#[derive(Debug)]
enum Failure {
    Usage(String),
    Parse(String),
    Resource(String),
    Schema(String),
    Order(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Parse(_) => EXIT_PARSE,
            Failure::Resource(_) => EXIT_RESOURCE,
            Failure::Schema(_) => EXIT_SCHEMA,
            Failure::Order(_) => EXIT_ORDER,
            Failure::Io(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m)
            | Failure::Parse(m)
            | Failure::Resource(m)
            | Failure::Schema(m)
            | Failure::Order(m)
            | Failure::Io(m) => m,
        }
    }
}

type Outcome = Result<(), Failure>;

fn write_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

impl From<LearnError> for Failure {
    fn from(e: LearnError) -> Self {
        match e {
            LearnError::RetryExhausted(_) => Failure::Resource(e.to_string()),
            LearnError::Confidence(_) => Failure::Usage(e.to_string()),
            LearnError::LengthMismatch { .. } | LearnError::Feature(_) => Failure::Schema(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<OrderingError> for Failure {
    fn from(e: OrderingError) -> Self {
        match e {
            OrderingError::WrongKind { .. } => Failure::Schema(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<BddError> for Failure {
    fn from(e: BddError) -> Self {
        match e {
            BddError::NodeCap(_) => Failure::Resource(e.to_string()),
            _ => Failure::Order(e.to_string()),
        }
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Budgets | HarnessError::EmptyGroup(_) => Failure::Usage(e.to_string()),
            HarnessError::Learn(e) => e.into(),
            HarnessError::Ordering(e) => e.into(),
            HarnessError::Bdd(e) => e.into(),
            HarnessError::Csv(_) | HarnessError::Io(_) => Failure::Io(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "ordermill", version, about = "Learned static variable ordering for BDD-based model checking")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Master seed for all randomness.
    #[arg(long, global = true, env = "ORDERMILL_SEED", default_value_t = 1)]
    seed: u64,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "ORDERMILL_THREADS")]
    threads: Option<usize>,
    /// Node budget per BDD evaluation.
    #[arg(long, global = true, env = "ORDERMILL_NODE_CAP", default_value_t = DEFAULT_NODE_CAP)]
    node_cap: usize,
    /// Model format; guessed from the file extension when omitted.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Print the effective configuration and progress on stderr.
    #[arg(long, short, global = true)]
    verbose: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Native,
    Bench,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AlgoArg {
    Ppo,
    PpoCpf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    OnDemand,
    Upfront,
}

impl From<ModeArg> for CycleMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::OnDemand => CycleMode::OnDemand,
            ModeArg::Upfront => CycleMode::Upfront,
        }
    }
}

#[derive(Args, Debug)]
struct LearnArgs {
    /// Random orders evaluated per training model.
    #[arg(long, default_value_t = 200)]
    orders: usize,
    /// Two-sided confidence of the tagging t-test.
    #[arg(long, default_value_t = 0.95)]
    confidence: f64,
    /// Orders required on each side of a comparison.
    #[arg(long, default_value_t = 5)]
    min_samples: usize,
}

impl LearnArgs {
    fn config(&self, g: &Global) -> TrainConfig {
        TrainConfig {
            orders: self.orders,
            confidence: self.confidence,
            min_samples: self.min_samples,
            seed: g.seed,
            node_cap: g.node_cap,
            ..TrainConfig::default()
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Learn classifiers from random orders of each training model.
    Train {
        #[arg(long = "model", required = true, value_delimiter = ',')]
        models: Vec<PathBuf>,
        #[command(flatten)]
        learn: LearnArgs,
        /// Also learn a context (triplet) classifier per model.
        #[arg(long)]
        triplets: bool,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Order a model with learned classifiers.
    Order {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, required = true, value_delimiter = ',')]
        classifiers: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        triplet_classifiers: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "ppo")]
        algo: AlgoArg,
        #[arg(long, value_enum, default_value = "on-demand")]
        cycle_resolution: ModeArg,
        #[arg(long)]
        out: PathBuf,
        /// Write kept and dropped constraints to this CSV.
        #[arg(long)]
        explain: Option<PathBuf>,
    },
    /// Print the model BDD node count under an order.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        order: PathBuf,
    },
    /// Run the algorithm suite and write per-run results.
    Bench {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_delimiter = ',')]
        classifiers: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        triplet_classifiers: Vec<PathBuf>,
        #[arg(long, default_value_t = 200)]
        random: usize,
        #[arg(long, default_value_t = 10)]
        runs: usize,
        #[arg(long, value_enum, default_value = "on-demand")]
        cycle_resolution: ModeArg,
        #[arg(long)]
        csv: PathBuf,
        /// Per-algorithm mean/std/min/max CSV.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Record wall time per run (makes the CSV nondeterministic).
        #[arg(long)]
        timing: bool,
    },
    /// Test-model node count as a function of the training budget.
    LearningCurve {
        #[arg(long, required = true, value_delimiter = ',')]
        train: Vec<PathBuf>,
        #[arg(long)]
        test: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0,20,40,60,80,100,120,140,160,180,200")]
        budgets: Vec<usize>,
        /// Independent training repetitions per budget.
        #[arg(long, default_value_t = 1)]
        repeats: usize,
        /// Random orders behind the budget-0 point.
        #[arg(long, default_value_t = 200)]
        random: usize,
        #[arg(long, default_value_t = 0.95)]
        confidence: f64,
        #[arg(long, value_enum, default_value = "on-demand")]
        cycle_resolution: ModeArg,
        #[arg(long)]
        csv: PathBuf,
    },
    /// Dump pair feature vectors for every ordered interacting pair.
    Features {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        csv: PathBuf,
    },
}

fn load_model(path: &Path, format: Option<Format>) -> Result<Model, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
    let format = format.unwrap_or_else(|| match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("bench") => Format::Bench,
        _ => Format::Native,
    });
    let parsed = match format {
        Format::Native => parse_native(&text),
        Format::Bench => parse_bench(&text),
    };
    parsed.map_err(|e| Failure::Parse(format!("{}:{e}", path.display())))
}

fn load_tree(path: &Path, kind: TreeKind) -> Result<DecisionTree, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
    let tree = deserialize_tree(&text).map_err(|e| {
        let msg = format!("{}: {e}", path.display());
        match e {
            TreeFormatError::Malformed(..) => Failure::Parse(msg),
            TreeFormatError::Version(_) | TreeFormatError::Schema(_) => Failure::Schema(msg),
        }
    })?;
    if tree.kind() != kind {
        return Err(Failure::Schema(format!(
            "{}: expected a {} classifier, found a {} classifier",
            path.display(),
            kind.name(),
            tree.kind().name()
        )));
    }
    Ok(tree)
}

fn load_trees(paths: &[PathBuf], kind: TreeKind) -> Result<Vec<DecisionTree>, Failure> {
    paths.iter().map(|p| load_tree(p, kind)).collect()
}

fn create(path: &Path) -> Result<io::BufWriter<fs::File>, Failure> {
    fs::File::create(path)
        .map(io::BufWriter::new)
        .map_err(|e| write_failure(path, e))
}

fn write_file(path: &Path, contents: &str) -> Outcome {
    fs::write(path, contents).map_err(|e| write_failure(path, e))
}

fn banner(g: &Global, command: &Command) {
    if !g.verbose {
        return;
    }
    let threads = g.threads.map_or_else(|| format!("{} (all cores)", rayon::current_num_threads()), |t| t.to_string());
    eprintln!("ordermill {}", env!("CARGO_PKG_VERSION"));
    eprintln!("  seed       {}", g.seed);
    eprintln!("  threads    {threads}");
    eprintln!("  node-cap   {}", g.node_cap);
    eprintln!("  format     {}", g.format.map_or("auto".to_string(), |f| format!("{f:?}").to_lowercase()));
    eprintln!("  command    {command:?}");
}

fn cmd_train(g: &Global, models: &[PathBuf], learn: &LearnArgs, triplets: bool, out_dir: &Path) -> Outcome {
    let cfg = learn.config(g);
    cfg.validate()?;
    let mut stems = BTreeSet::new();
    let mut jobs = Vec::new();
    for path in models {
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| Failure::Usage(format!("{}: cannot derive an output name", path.display())))?
            .to_string();
        if !stems.insert(stem.clone()) {
            return Err(Failure::Usage(format!("two training models share the name `{stem}`")));
        }
        jobs.push((stem, load_model(path, g.format)?));
    }
    fs::create_dir_all(out_dir).map_err(|e| write_failure(out_dir, e))?;
    for (stem, m) in &jobs {
        log::info!("training on {} ({} variables)", m.name(), m.num_vars());
        let t = train(m, &cfg, triplets)?;
        let pair_path = out_dir.join(format!("{stem}.pair.tree"));
        write_file(&pair_path, &serialize_tree(&t.pair))?;
        log::info!("{}: {} pair examples", pair_path.display(), t.pair_examples);
        if let Some(tt) = &t.triplet {
            let path = out_dir.join(format!("{stem}.triplet.tree"));
            write_file(&path, &serialize_tree(tt))?;
            log::info!("{}: {} triplet examples", path.display(), t.triplet_examples);
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_order(
    g: &Global,
    model: &Path,
    classifiers: &[PathBuf],
    triplet_classifiers: &[PathBuf],
    algo: AlgoArg,
    mode: ModeArg,
    out: &Path,
    explain: Option<&Path>,
) -> Outcome {
    let algo = match algo {
        AlgoArg::Ppo => Algorithm::Ppo,
        AlgoArg::PpoCpf => Algorithm::PpoCpf,
    };
    if algo == Algorithm::PpoCpf && triplet_classifiers.is_empty() {
        return Err(Failure::Usage("ppo-cpf needs at least one --triplet-classifiers file".into()));
    }
    let m = load_model(model, g.format)?;
    let pair = load_trees(classifiers, TreeKind::Pair)?;
    let triplet = load_trees(triplet_classifiers, TreeKind::Triplet)?;
    let (outcome, _) = order_model(&m, &pair, &triplet, algo, mode.into())?;
    write_file(out, &format_order(&outcome.order, &m))?;
    if let Some(path) = explain {
        let mut w = create(path)?;
        let name = |v: usize| m.variable(v).name.clone();
        let mut lines = String::from("status,before,after,confidence\n");
        for (status, list) in [("kept", &outcome.kept), ("dropped", &outcome.dropped)] {
            for c in list.iter() {
                lines.push_str(&format!("{status},{},{},{}\n", name(c.before), name(c.after), c.confidence));
            }
        }
        w.write_all(lines.as_bytes()).and_then(|_| w.flush()).map_err(|e| write_failure(path, e))?;
    }
    Ok(())
}

fn cmd_eval(g: &Global, model: &Path, order: &Path) -> Outcome {
    let m = load_model(model, g.format)?;
    let text = fs::read_to_string(order).map_err(|e| Failure::Parse(format!("{}: {e}", order.display())))?;
    let o = parse_order(&text, &m).map_err(|e| Failure::Order(format!("{}: {e}", order.display())))?;
    let e = evaluate_order_with_cap(&m, &o, g.node_cap)?;
    println!("node_count={}", e.node_count);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    g: &Global,
    model: &Path,
    classifiers: &[PathBuf],
    triplet_classifiers: &[PathBuf],
    random: usize,
    runs: usize,
    mode: ModeArg,
    csv: &Path,
    summary: Option<&Path>,
    timing: bool,
) -> Outcome {
    let m = load_model(model, g.format)?;
    let cls = Classifiers {
        pair: load_trees(classifiers, TreeKind::Pair)?,
        triplet: load_trees(triplet_classifiers, TreeKind::Triplet)?,
    };
    let cfg = SuiteConfig {
        random,
        runs,
        seed: g.seed,
        node_cap: g.node_cap,
        mode: mode.into(),
        ..SuiteConfig::default()
    };
    let rows = run_bench(&m, &cfg, &cls);
    for r in rows.iter().filter(|r| r.error.is_some()) {
        log::warn!("{} run {}: {}", r.algorithm, r.run, r.error.as_deref().unwrap_or_default());
    }
    write_bench_csv(create(csv)?, &rows, timing)?;
    let aggs = aggregate(&rows)?;
    if let Some(path) = summary {
        write_aggregate_csv(create(path)?, &aggs)?;
    }
    let stdout = io::stdout();
    write_aggregate_csv(stdout.lock(), &aggs)?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_learning_curve(
    g: &Global,
    train_paths: &[PathBuf],
    test: &Path,
    budgets: &[usize],
    repeats: usize,
    random: usize,
    confidence: f64,
    mode: ModeArg,
    csv: &Path,
) -> Outcome {
    let train_models = train_paths
        .iter()
        .map(|p| load_model(p, g.format))
        .collect::<Result<Vec<_>, _>>()?;
    let test = load_model(test, g.format)?;
    let cfg = CurveConfig {
        budgets: budgets.to_vec(),
        train: TrainConfig {
            confidence,
            seed: g.seed,
            node_cap: g.node_cap,
            ..TrainConfig::default()
        },
        random,
        repeats,
        mode: mode.into(),
    };
    cfg.train.validate()?;
    let points = learning_curve(&train_models, &test, &cfg)?;
    write_curve_csv(create(csv)?, &points)?;
    Ok(())
}

fn cmd_features(g: &Global, model: &Path, csv: &Path) -> Outcome {
    let m = load_model(model, g.format)?;
    let graph = build_connectivity_graph(&m);
    let fx = FeatureExtractor::new(&m, &graph);
    let mut out = FeatureSchema::pair().names().join(",");
    out.push('\n');
    for (a, b) in fx.ordered_interacting_pairs(&m) {
        let row: Vec<String> = fx.pair_features(a, b).iter().map(|x| x.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    write_file(csv, &out)
}

fn run(cli: Cli) -> Outcome {
    let g = &cli.global;
    if let Some(t) = g.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Usage(format!("--threads: {e}")))?;
    }
    banner(g, &cli.command);
    match &cli.command {
        Command::Train {
            models,
            learn,
            triplets,
            out_dir,
        } => cmd_train(g, models, learn, *triplets, out_dir),
        Command::Order {
            model,
            classifiers,
            triplet_classifiers,
            algo,
            cycle_resolution,
            out,
            explain,
        } => cmd_order(
            g,
            model,
            classifiers,
            triplet_classifiers,
            *algo,
            *cycle_resolution,
            out,
            explain.as_deref(),
        ),
        Command::Eval { model, order } => cmd_eval(g, model, order),
        Command::Bench {
            model,
            classifiers,
            triplet_classifiers,
            random,
            runs,
            cycle_resolution,
            csv,
            summary,
            timing,
        } => cmd_bench(
            g,
            model,
            classifiers,
            triplet_classifiers,
            *random,
            *runs,
            *cycle_resolution,
            csv,
            summary.as_deref(),
            *timing,
        ),
        Command::LearningCurve {
            train,
            test,
            budgets,
            repeats,
            random,
            confidence,
            cycle_resolution,
            csv,
        } => cmd_learning_curve(g, train, test, budgets, *repeats, *random, *confidence, *cycle_resolution, csv),
        Command::Features { model, csv } => cmd_features(g, model, csv),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    env_logger::Builder::new()
        .filter_level(if cli.global.verbose {
            log::LevelFilter::Info
        } else {
            log::LevelFilter::Warn
        })
        .parse_env("ORDERMILL_LOG")
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("ordermill: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
