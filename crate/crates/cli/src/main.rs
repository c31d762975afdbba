//! `quatgraph`: generate synthetic digraphs, build their quaternion-valued
//! Laplacians, verify the spectral properties, and train the quaternion
//! spectral GCN.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error, 3 data
//! error. All randomness flows from `--seed` through named substreams, so
//! identical invocations produce byte-identical output files.

use clap::{Args, Parser, Subcommand, ValueEnum};
use quatgraph::graph::{
    degree_features, generate_dsbm, parse_edge_list, parse_labels, write_edge_list, write_labels,
    Digraph, DsbmConfig,
};
use quatgraph::harness::{
    compare_laplacians, default_fractions, parse_experiment_config, run_experiment,
};
use quatgraph::laplacian::{
    build_quaternionic, classical_laplacian, normalize, propagation_matrix,
    sign_magnetic_laplacian, LaplacianKind,
};
use quatgraph::nn::train::TrainTarget;
use quatgraph::nn::{
    evaluate, history_csv, parse_checkpoint, train, write_checkpoint, Checkpoint, ModelConfig,
};
use quatgraph::split::{split_edges, split_nodes, Task};
use quatgraph::textio::{atomic_write, parse_qmatrix, write_cmatrix, write_qmatrix, write_rmatrix};
use quatgraph::verify::{
    regime_corpus, verify_corpus, verify_matrix, Property, Regime, Tolerances,
    VerificationReport,
};
use quatgraph::{Error, QMatrix};
use std::io::BufReader;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "quatgraph",
    version,
    about = "Quaternion-valued graph Laplacians and a quaternion spectral GCN",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic DSBM digraph with controllable digon fraction
    Generate(GenerateArgs),
    /// Build a Laplacian or propagation matrix from an edge list
    Laplacian(LaplacianArgs),
    /// Verify spectral and structural properties over corpora or a matrix file
    Verify(VerifyArgs),
    /// Train the quaternion spectral GCN on a graph
    Train(TrainArgs),
    /// Evaluate a checkpoint on a re-derived split
    Eval(EvalArgs),
    /// Run a cross-validated experiment from a config file
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Total node count (must be divisible by --clusters)
    #[arg(long)]
    nodes: usize,
    /// Number of clusters
    #[arg(long, default_value_t = 5)]
    clusters: usize,
    /// Intra-cluster edge probability
    #[arg(long, default_value_t = 0.1)]
    alpha_in: f64,
    /// Inter-cluster edge probability
    #[arg(long, default_value_t = 0.6)]
    alpha_out: f64,
    /// Probability that an edge follows the cluster cycle direction
    #[arg(long, default_value_t = 0.2)]
    beta: f64,
    /// Probability that a connected pair becomes a digon
    #[arg(long, default_value_t = 0.2)]
    delta: f64,
    /// Smallest integer weight magnitude
    #[arg(long, default_value_t = 2)]
    wmin: i64,
    /// Largest integer weight magnitude
    #[arg(long, default_value_t = 4)]
    wmax: i64,
    /// Negate each weight with probability 1/2
    #[arg(long, default_value_t = false)]
    signed: bool,
    /// Generator seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Edge-list output path
    #[arg(long)]
    edges_out: PathBuf,
    /// Label-file output path
    #[arg(long)]
    labels_out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MatrixKind {
    Quaternionic,
    QuaternionicNorm,
    Propagation,
    Classical,
    SignMagnetic,
}

#[derive(Args)]
struct LaplacianArgs {
    /// Input edge-list path
    #[arg(long)]
    input: PathBuf,
    /// Which matrix to emit
    #[arg(long, value_enum)]
    kind: MatrixKind,
    /// Output matrix path
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// Verify a qmatrix file instead of generated corpora
    #[arg(long)]
    input: Option<PathBuf>,
    /// Comma-separated property list, or `all`
    #[arg(long, default_value = "all")]
    properties: String,
    /// Graphs per regime corpus
    #[arg(long, default_value_t = 100)]
    graphs: usize,
    /// Base seed for the corpora
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Corpus regime to verify, or `all`
    #[arg(long, default_value = "all")]
    regime: String,
}

#[derive(Args)]
struct TrainArgs {
    /// Task: nc, 3cep, 4cep, or 5cep
    #[arg(long)]
    task: String,
    /// Laplacian driving the propagation operator
    #[arg(long, default_value = "quaternionic")]
    laplacian: String,
    /// Input edge-list path
    #[arg(long)]
    edges: PathBuf,
    /// Node label path (required for nc)
    #[arg(long)]
    labels: Option<PathBuf>,
    /// First layer width
    #[arg(long, default_value_t = 16)]
    f1: usize,
    /// Second layer width
    #[arg(long, default_value_t = 16)]
    f2: usize,
    /// Dropout probability before the head
    #[arg(long, default_value_t = 0.5)]
    dropout: f64,
    /// Learning rate (default: 1e-3 for nc/3cep, 1e-2 for 4cep/5cep)
    #[arg(long)]
    learning_rate: Option<f64>,
    /// Adam weight decay
    #[arg(long, default_value_t = 5e-4)]
    weight_decay: f64,
    /// Epoch budget
    #[arg(long, default_value_t = 3000)]
    max_epochs: usize,
    /// Early-stopping patience in epochs
    #[arg(long, default_value_t = 500)]
    patience: usize,
    /// Seed for split, initialization, and dropout substreams
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Training fraction (default per task)
    #[arg(long)]
    train_fraction: Option<f64>,
    /// Validation fraction (default per task)
    #[arg(long)]
    val_fraction: Option<f64>,
    /// Test fraction (default per task)
    #[arg(long)]
    test_fraction: Option<f64>,
    /// Checkpoint output path
    #[arg(long)]
    checkpoint_out: PathBuf,
    /// Training history CSV output path
    #[arg(long)]
    history_out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Checkpoint path written by `train`
    #[arg(long)]
    checkpoint: PathBuf,
    /// Input edge-list path
    #[arg(long)]
    edges: PathBuf,
    /// Node label path (required for nc)
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Split seed (must match the training invocation to reproduce its split)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Which portion to score: train, val, test, or all
    #[arg(long, default_value = "test")]
    split: String,
    /// Training fraction (default per task)
    #[arg(long)]
    train_fraction: Option<f64>,
    /// Validation fraction (default per task)
    #[arg(long)]
    val_fraction: Option<f64>,
    /// Test fraction (default per task)
    #[arg(long)]
    test_fraction: Option<f64>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment config path (key = value with sections)
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated Laplacian kinds to compare on the same data
    #[arg(long)]
    compare: Option<String>,
    /// Result table CSV output path
    #[arg(long)]
    csv_out: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    };
    std::process::exit(code);
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::InvalidConfig(_) | Error::UnknownProperty(_) => 2,
        _ => 3,
    }
}

fn run(cli: Cli) -> Result<i32, Error> {
    match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Laplacian(args) => cmd_laplacian(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Train(args) => cmd_train(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Experiment(args) => cmd_experiment(args),
    }
}

fn load_graph(edges: &Path, labels: Option<&Path>) -> Result<Digraph, Error> {
    let file = std::fs::File::open(edges).map_err(|e| Error::io(edges.display().to_string(), e))?;
    let mut g = parse_edge_list(BufReader::new(file))?;
    if let Some(path) = labels {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let l = parse_labels(BufReader::new(file), g.n())?;
        g.set_labels(Some(l));
    }
    Ok(g)
}

fn cmd_generate(args: GenerateArgs) -> Result<i32, Error> {
    if args.clusters == 0 || args.nodes % args.clusters != 0 {
        return Err(Error::InvalidConfig(format!(
            "--nodes {} must be divisible by --clusters {}",
            args.nodes, args.clusters
        )));
    }
    let cfg = DsbmConfig {
        nodes_per_cluster: args.nodes / args.clusters,
        clusters: args.clusters,
        intra_prob: args.alpha_in,
        inter_prob: args.alpha_out,
        direction_prob: args.beta,
        digon_fraction: args.delta,
        weight_low: args.wmin,
        weight_high: args.wmax,
        signed: args.signed,
        seed: args.seed,
    };
    let g = generate_dsbm(&cfg)?;
    atomic_write(&args.edges_out, &write_edge_list(&g))?;
    atomic_write(&args.labels_out, &write_labels(g.labels().unwrap()))?;
    let (connected, digons) = g.pair_stats();
    let fraction = if connected > 0 {
        digons as f64 / connected as f64
    } else {
        0.0
    };
    println!(
        "n={} directed_edges={} connected_pairs={connected} digons={digons} digon_fraction={fraction:.4}",
        g.n(),
        g.edge_count()
    );
    Ok(0)
}

fn cmd_laplacian(args: LaplacianArgs) -> Result<i32, Error> {
    let g = load_graph(&args.input, None)?;
    let text = match args.kind {
        MatrixKind::Quaternionic => write_qmatrix(&build_quaternionic(&g).lq),
        MatrixKind::QuaternionicNorm => write_qmatrix(&normalize(&build_quaternionic(&g))?),
        MatrixKind::Propagation => write_qmatrix(&propagation_matrix(&g)),
        MatrixKind::Classical => write_rmatrix(&classical_laplacian(&g, false)?),
        MatrixKind::SignMagnetic => write_cmatrix(&sign_magnetic_laplacian(&g).lsigma),
    };
    atomic_write(&args.output, &text)?;
    println!("wrote {} ({} nodes)", args.output.display(), g.n());
    Ok(0)
}

fn parse_properties(spec: &str) -> Result<Vec<Property>, Error> {
    if spec == "all" {
        return Ok(Property::ALL.to_vec());
    }
    spec.split(',').map(|s| s.trim().parse()).collect()
}

fn print_report(report: &VerificationReport) {
    print!("{}", report.render_keyvalue());
    println!("{}", report.render_table());
}

fn cmd_verify(args: VerifyArgs) -> Result<i32, Error> {
    let properties = parse_properties(&args.properties)?;
    let tol = Tolerances::default();

    if let Some(input) = &args.input {
        let text =
            std::fs::read_to_string(input).map_err(|e| Error::io(input.display().to_string(), e))?;
        let q: QMatrix = parse_qmatrix(&text)?;
        let report = verify_matrix(&q, &properties, &tol)?;
        print_report(&report);
        return Ok(if report.all_pass() { 0 } else { 1 });
    }

    let regimes: Vec<Regime> = if args.regime == "all" {
        Regime::ALL.to_vec()
    } else {
        vec![Regime::ALL
            .iter()
            .copied()
            .find(|r| r.name() == args.regime)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown regime {:?}", args.regime)))?]
    };

    let mut all_pass = true;
    for regime in regimes {
        let corpus = regime_corpus(regime, args.graphs, args.seed);
        let report = verify_corpus(&corpus, &properties, &tol, regime.name())?;
        print_report(&report);
        all_pass &= report.all_pass();
    }
    Ok(if all_pass { 0 } else { 1 })
}

fn fractions_from(
    task: Task,
    train: Option<f64>,
    val: Option<f64>,
    test: Option<f64>,
) -> (f64, f64, f64) {
    let d = default_fractions(task);
    (
        train.unwrap_or(d.0),
        val.unwrap_or(d.1),
        test.unwrap_or(d.2),
    )
}

fn cmd_train(args: TrainArgs) -> Result<i32, Error> {
    let task: Task = args.task.parse()?;
    let laplacian: LaplacianKind = args.laplacian.parse()?;
    if matches!(task, Task::NodeClassification) && args.labels.is_none() {
        return Err(Error::InvalidConfig("--labels is required for nc".into()));
    }
    let g = load_graph(&args.edges, args.labels.as_deref())?;
    let fractions = fractions_from(
        task,
        args.train_fraction,
        args.val_fraction,
        args.test_fraction,
    );
    let mut config = ModelConfig::default_for(task);
    config.f1 = args.f1;
    config.f2 = args.f2;
    config.dropout = args.dropout;
    if let Some(lr) = args.learning_rate {
        config.learning_rate = lr;
    }
    config.weight_decay = args.weight_decay;
    config.max_epochs = args.max_epochs;
    config.patience = args.patience;
    config.seed = args.seed;

    let (outcome, classes, in_features, summary) = match task {
        Task::NodeClassification => {
            let labels = g.labels().unwrap().to_vec();
            let classes = g.num_classes().unwrap_or(0);
            let (train_idx, val_idx, test_idx) = split_nodes(&g, fractions, args.seed)?;
            let prop = laplacian.propagation(&g)?;
            let x = degree_features(&g, false);
            let target = TrainTarget::Nodes {
                labels: &labels,
                train: &train_idx,
                val: &val_idx,
            };
            let outcome = train(&config, &prop, &x, &target, classes)?;
            let test_acc = evaluate(&outcome.params, &prop, &x, None, &labels, &test_idx)?;
            let summary = format!(
                "epochs={} best_epoch={} test_accuracy={test_acc:.4}",
                outcome.history.len(),
                outcome
                    .best_epoch
                    .map_or("-".to_string(), |b| b.to_string())
            );
            (outcome, classes, x.cols(), summary)
        }
        Task::Edge(edge_task) => {
            let split = split_edges(&g, edge_task, fractions, args.seed)?;
            let prop = laplacian.propagation(&split.train_graph)?;
            let x = degree_features(&split.train_graph, edge_task.use_abs_features());
            let target = TrainTarget::Edges {
                pairs: &split.pairs,
                labels: &split.labels,
                train: &split.train,
                val: &split.val,
            };
            let outcome = train(&config, &prop, &x, &target, edge_task.num_classes())?;
            let test_acc = evaluate(
                &outcome.params,
                &prop,
                &x,
                Some(&split.pairs),
                &split.labels,
                &split.test,
            )?;
            let summary = format!(
                "epochs={} best_epoch={} test_accuracy={test_acc:.4}",
                outcome.history.len(),
                outcome
                    .best_epoch
                    .map_or("-".to_string(), |b| b.to_string())
            );
            (outcome, edge_task.num_classes(), x.cols(), summary)
        }
    };

    let checkpoint = Checkpoint {
        task,
        laplacian,
        config,
        in_features,
        classes,
        params: outcome.params.clone(),
    };
    atomic_write(&args.checkpoint_out, &write_checkpoint(&checkpoint))?;
    if let Some(path) = &args.history_out {
        atomic_write(path, &history_csv(&outcome.history))?;
    }
    println!("{summary}");
    Ok(0)
}

fn cmd_eval(args: EvalArgs) -> Result<i32, Error> {
    let text = std::fs::read_to_string(&args.checkpoint)
        .map_err(|e| Error::io(args.checkpoint.display().to_string(), e))?;
    let checkpoint = parse_checkpoint(&text)?;
    let task = checkpoint.task;
    if matches!(task, Task::NodeClassification) && args.labels.is_none() {
        return Err(Error::InvalidConfig("--labels is required for nc".into()));
    }
    let g = load_graph(&args.edges, args.labels.as_deref())?;
    let fractions = fractions_from(
        task,
        args.train_fraction,
        args.val_fraction,
        args.test_fraction,
    );

    let select = |train: &[usize], val: &[usize], test: &[usize]| -> Result<Vec<usize>, Error> {
        Ok(match args.split.as_str() {
            "train" => train.to_vec(),
            "val" => val.to_vec(),
            "test" => test.to_vec(),
            "all" => {
                let mut all: Vec<usize> =
                    train.iter().chain(val).chain(test).copied().collect();
                all.sort_unstable();
                all
            }
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown split {other:?} (expected train, val, test, or all)"
                )))
            }
        })
    };

    let accuracy = match task {
        Task::NodeClassification => {
            let labels = g.labels().unwrap().to_vec();
            let (train_idx, val_idx, test_idx) = split_nodes(&g, fractions, args.seed)?;
            let indices = select(&train_idx, &val_idx, &test_idx)?;
            let prop = checkpoint.laplacian.propagation(&g)?;
            let x = degree_features(&g, false);
            evaluate(&checkpoint.params, &prop, &x, None, &labels, &indices)?
        }
        Task::Edge(edge_task) => {
            let split = split_edges(&g, edge_task, fractions, args.seed)?;
            let indices = select(&split.train, &split.val, &split.test)?;
            let prop = checkpoint.laplacian.propagation(&split.train_graph)?;
            let x = degree_features(&split.train_graph, edge_task.use_abs_features());
            evaluate(
                &checkpoint.params,
                &prop,
                &x,
                Some(&split.pairs),
                &split.labels,
                &indices,
            )?
        }
    };
    println!(
        "task={} laplacian={} split={} accuracy={accuracy:.4}",
        task.name(),
        checkpoint.laplacian.name(),
        args.split
    );
    Ok(0)
}

fn cmd_experiment(args: ExperimentArgs) -> Result<i32, Error> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Error::io(args.config.display().to_string(), e))?;
    let spec = parse_experiment_config(&text)?;

    if let Some(compare) = &args.compare {
        let kinds: Vec<LaplacianKind> = compare
            .split(',')
            .map(|s| s.trim().parse())
            .collect::<Result<_, Error>>()?;
        if kinds.len() < 2 {
            return Err(Error::InvalidConfig(
                "--compare needs at least two laplacian kinds".into(),
            ));
        }
        let specs: Vec<_> = kinds
            .into_iter()
            .map(|k| {
                let mut s = spec.clone();
                s.laplacian = k;
                s
            })
            .collect();
        let comparison = compare_laplacians(&specs)?;
        print!("{}", comparison.render_text());
        if let Some(path) = &args.csv_out {
            atomic_write(path, &comparison.render_csv())?;
        }
    } else {
        let table = run_experiment(&spec)?;
        print!("{}", table.render_text());
        if let Some(path) = &args.csv_out {
            atomic_write(path, &table.render_csv())?;
        }
    }
    Ok(0)
}
