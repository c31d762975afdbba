//! End-to-end experiment recipes: bind a data source, a Laplacian kind, and
//! a model configuration into one of the four tasks, run it across
//! cross-validation folds, and tabulate accuracies.
//!
//! "k-fold" here is Monte Carlo cross-validation: each fold re-splits the
//! same graph with seed `seed_base + fold` and retrains from a fresh
//! initialization with the same seed. For the edge tasks every fold builds
//! its propagation matrix from the pruned training graph, so held-out pairs
//! never reach the operator the network propagates over; node features are
//! likewise computed from the pruned graph.

use crate::error::{Error, Result};
use crate::graph::{degree_features, generate_dsbm, parse_edge_list, parse_labels, Digraph, DsbmConfig};
use crate::laplacian::LaplacianKind;
use crate::nn::model::ModelConfig;
use crate::nn::train::{train, TrainTarget};
use crate::nn::{evaluate, TrainOutcome};
use crate::split::{split_edges, split_nodes, EdgeTask, Task};
use std::fmt::Write as _;
use std::io::BufReader;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Clone, Debug, PartialEq)]
pub enum DataSource {
    Generate(DsbmConfig),
    Files {
        edges: PathBuf,
        labels: Option<PathBuf>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub task: Task,
    pub source: DataSource,
    pub laplacian: LaplacianKind,
    pub model: ModelConfig,
    pub folds: usize,
    pub seed_base: u64,
    /// (train, val, test); defaults per task.
    pub fractions: (f64, f64, f64),
}

/// Split fractions the tasks use by default: 60/20/20 for node
/// classification, 80/5/15 (train/val/test) for three-class edge
/// prediction, 80/0/20 for the signed edge tasks.
pub fn default_fractions(task: Task) -> (f64, f64, f64) {
    match task {
        Task::NodeClassification => (0.6, 0.2, 0.2),
        Task::Edge(EdgeTask::ThreeClass) => (0.8, 0.05, 0.15),
        Task::Edge(_) => (0.8, 0.0, 0.2),
    }
}

/// Ten Monte Carlo folds for NC and 3CEP, five for the signed edge tasks.
pub fn default_folds(task: Task) -> usize {
    match task {
        Task::NodeClassification | Task::Edge(EdgeTask::ThreeClass) => 10,
        Task::Edge(_) => 5,
    }
}

impl ExperimentSpec {
    pub fn new(task: Task, source: DataSource, laplacian: LaplacianKind, seed_base: u64) -> Self {
        let mut model = ModelConfig::default_for(task);
        model.seed = seed_base;
        ExperimentSpec {
            task,
            source,
            laplacian,
            model,
            folds: default_folds(task),
            seed_base,
            fractions: default_fractions(task),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.folds == 0 {
            return Err(Error::InvalidConfig("fold count must be >= 1".into()));
        }
        self.model.validate()
    }

    pub fn load_graph(&self) -> Result<Digraph> {
        match &self.source {
            DataSource::Generate(cfg) => generate_dsbm(cfg),
            DataSource::Files { edges, labels } => {
                let file = std::fs::File::open(edges)
                    .map_err(|e| Error::io(edges.display().to_string(), e))?;
                let mut g = parse_edge_list(BufReader::new(file))?;
                if let Some(path) = labels {
                    let file = std::fs::File::open(path)
                        .map_err(|e| Error::io(path.display().to_string(), e))?;
                    let l = parse_labels(BufReader::new(file), g.n())?;
                    g.set_labels(Some(l));
                }
                Ok(g)
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct FoldResult {
    pub fold: usize,
    pub accuracy: f64,
    pub epochs_run: usize,
    pub best_epoch: Option<usize>,
    pub runtime_secs: f64,
}

/// Per-fold accuracies plus the sample statistics over completed folds.
#[derive(Clone, Debug)]
pub struct ResultTable {
    pub label: String,
    pub task: Task,
    pub laplacian: LaplacianKind,
    pub folds: Vec<FoldResult>,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator); 0 for a single fold.
    pub std: f64,
}

impl ResultTable {
    fn from_folds(label: String, task: Task, laplacian: LaplacianKind, folds: Vec<FoldResult>) -> Self {
        let n = folds.len();
        let mean = folds.iter().map(|f| f.accuracy).sum::<f64>() / n as f64;
        let std = if n > 1 {
            let ss = folds
                .iter()
                .map(|f| (f.accuracy - mean).powi(2))
                .sum::<f64>();
            (ss / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        ResultTable {
            label,
            task,
            laplacian,
            folds,
            mean,
            std,
        }
    }

    /// Aligned text rendering, including wall-clock runtimes.
    pub fn render_text(&self) -> String {
        let mut out = format!(
            "task={} laplacian={} folds={} std=sample(n-1)\n",
            self.task.name(),
            self.laplacian.name(),
            self.folds.len()
        );
        out.push_str(&format!(
            "{:<6} {:>10} {:>8} {:>10} {:>11}\n",
            "fold", "accuracy", "epochs", "best", "runtime_s"
        ));
        for f in &self.folds {
            let best = f.best_epoch.map_or("-".to_string(), |b| b.to_string());
            out.push_str(&format!(
                "{:<6} {:>10.4} {:>8} {:>10} {:>11.2}\n",
                f.fold, f.accuracy, f.epochs_run, best, f.runtime_secs
            ));
        }
        out.push_str(&format!("mean   {:>10.4}\n", self.mean));
        out.push_str(&format!("std    {:>10.4}\n", self.std));
        out
    }

    /// CSV rendering. Runtimes are deliberately omitted so identical seeds
    /// produce byte-identical files.
    pub fn render_csv(&self) -> String {
        let mut out = String::from("fold,accuracy\n");
        for f in &self.folds {
            let _ = writeln!(out, "{},{}", f.fold, f.accuracy);
        }
        let _ = writeln!(out, "mean,{}", self.mean);
        let _ = writeln!(out, "std,{}", self.std);
        out
    }
}

/// Train and evaluate one fold; returns the test accuracy and the outcome.
fn run_fold(spec: &ExperimentSpec, g: &Digraph, fold: usize) -> Result<(f64, TrainOutcome)> {
    let seed = spec.seed_base + fold as u64;
    let mut model = spec.model.clone();
    model.seed = seed;
    match spec.task {
        Task::NodeClassification => {
            let labels = g
                .labels()
                .ok_or_else(|| Error::InvalidConfig("node classification needs labels".into()))?;
            let classes = g.num_classes().unwrap_or(0);
            let (train_idx, val_idx, test_idx) = split_nodes(g, spec.fractions, seed)?;
            let prop = spec.laplacian.propagation(g)?;
            let x = degree_features(g, false);
            let target = TrainTarget::Nodes {
                labels,
                train: &train_idx,
                val: &val_idx,
            };
            let outcome = train(&model, &prop, &x, &target, classes)?;
            let acc = evaluate(&outcome.params, &prop, &x, None, labels, &test_idx)?;
            Ok((acc, outcome))
        }
        Task::Edge(task) => {
            let split = split_edges(g, task, spec.fractions, seed)?;
            let prop = spec.laplacian.propagation(&split.train_graph)?;
            let x = degree_features(&split.train_graph, task.use_abs_features());
            let target = TrainTarget::Edges {
                pairs: &split.pairs,
                labels: &split.labels,
                train: &split.train,
                val: &split.val,
            };
            let outcome = train(&model, &prop, &x, &target, task.num_classes())?;
            let acc = evaluate(
                &outcome.params,
                &prop,
                &x,
                Some(&split.pairs),
                &split.labels,
                &split.test,
            )?;
            Ok((acc, outcome))
        }
    }
}

/// Run every fold of the experiment. The graph is realized once; folds
/// differ only in their split and initialization seeds.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ResultTable> {
    spec.validate()?;
    let g = spec.load_graph()?;
    let mut folds = Vec::with_capacity(spec.folds);
    for fold in 0..spec.folds {
        let started = Instant::now();
        let (accuracy, outcome) = run_fold(spec, &g, fold)?;
        folds.push(FoldResult {
            fold,
            accuracy,
            epochs_run: outcome.history.len(),
            best_epoch: outcome.best_epoch,
            runtime_secs: started.elapsed().as_secs_f64(),
        });
    }
    Ok(ResultTable::from_folds(
        spec.laplacian.name().to_string(),
        spec.task,
        spec.laplacian,
        folds,
    ))
}

/// Side-by-side result tables for specs that differ only in their Laplacian.
#[derive(Clone, Debug)]
pub struct Comparison {
    pub tables: Vec<ResultTable>,
}

impl Comparison {
    /// Accuracy difference of table `i` relative to the first table.
    pub fn delta(&self, i: usize) -> f64 {
        self.tables[i].mean - self.tables[0].mean
    }

    pub fn render_text(&self) -> String {
        let mut out = String::from("fold  ");
        for t in &self.tables {
            out.push_str(&format!("{:>14}", t.label));
        }
        out.push('\n');
        let folds = self.tables[0].folds.len();
        for f in 0..folds {
            out.push_str(&format!("{f:<6}"));
            for t in &self.tables {
                out.push_str(&format!("{:>14.4}", t.folds[f].accuracy));
            }
            out.push('\n');
        }
        out.push_str("mean  ");
        for t in &self.tables {
            out.push_str(&format!("{:>14.4}", t.mean));
        }
        out.push_str("\nstd   ");
        for t in &self.tables {
            out.push_str(&format!("{:>14.4}", t.std));
        }
        out.push('\n');
        for i in 1..self.tables.len() {
            out.push_str(&format!(
                "delta({} - {}) = {:+.4}\n",
                self.tables[i].label,
                self.tables[0].label,
                self.delta(i)
            ));
        }
        out
    }

    pub fn render_csv(&self) -> String {
        let mut out = String::from("fold");
        for t in &self.tables {
            let _ = write!(out, ",{}", t.label);
        }
        out.push('\n');
        for f in 0..self.tables[0].folds.len() {
            let _ = write!(out, "{f}");
            for t in &self.tables {
                let _ = write!(out, ",{}", t.folds[f].accuracy);
            }
            out.push('\n');
        }
        let _ = write!(out, "mean");
        for t in &self.tables {
            let _ = write!(out, ",{}", t.mean);
        }
        out.push('\n');
        let _ = write!(out, "std");
        for t in &self.tables {
            let _ = write!(out, ",{}", t.std);
        }
        out.push('\n');
        out
    }
}

/// Run the same experiment under two or more Laplacians.
pub fn compare_laplacians(specs: &[ExperimentSpec]) -> Result<Comparison> {
    if specs.len() < 2 {
        return Err(Error::InvalidConfig(
            "comparison needs at least two specs".into(),
        ));
    }
    let first = &specs[0];
    for s in &specs[1..] {
        let same = s.task == first.task
            && s.source == first.source
            && s.model == first.model
            && s.folds == first.folds
            && s.seed_base == first.seed_base
            && s.fractions == first.fractions;
        if !same {
            return Err(Error::InvalidConfig(
                "comparison specs must differ only in their laplacian".into(),
            ));
        }
    }
    let tables = specs.iter().map(run_experiment).collect::<Result<Vec<_>>>()?;
    Ok(Comparison { tables })
}

/// Parse the line-oriented `key = value` experiment config with
/// `[experiment]`, `[generator]` or `[data]`, and `[model]` sections.
pub fn parse_experiment_config(text: &str) -> Result<ExperimentSpec> {
    let mut task: Option<Task> = None;
    let mut laplacian = LaplacianKind::Quaternionic;
    let mut folds: Option<usize> = None;
    let mut seed: u64 = 0;
    let mut fractions: (Option<f64>, Option<f64>, Option<f64>) = (None, None, None);

    let mut generator = DsbmConfig::di150(0.2, 0);
    let mut saw_generator = false;
    let mut edges: Option<PathBuf> = None;
    let mut labels: Option<PathBuf> = None;

    struct ModelOverrides {
        f1: Option<usize>,
        f2: Option<usize>,
        head: Option<crate::nn::HeadKind>,
        dropout: Option<f64>,
        learning_rate: Option<f64>,
        weight_decay: Option<f64>,
        max_epochs: Option<usize>,
        patience: Option<usize>,
    }
    let mut model = ModelOverrides {
        f1: None,
        f2: None,
        head: None,
        dropout: None,
        learning_rate: None,
        weight_decay: None,
        max_epochs: None,
        patience: None,
    };

    #[derive(PartialEq, Clone, Copy)]
    enum Section {
        None,
        Experiment,
        Generator,
        Data,
        Model,
    }
    let mut section = Section::None;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = match name.trim() {
                "experiment" => Section::Experiment,
                "generator" => {
                    saw_generator = true;
                    Section::Generator
                }
                "data" => Section::Data,
                "model" => Section::Model,
                other => {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("unknown section [{other}]"),
                    })
                }
            };
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: lineno,
            msg: format!("expected `key = value`, found {line:?}"),
        })?;
        let key = key.trim();
        let value = value.trim();
        let bad = |msg: String| Error::Parse { line: lineno, msg };
        let parse_f64 =
            |v: &str| v.parse::<f64>().map_err(|_| bad(format!("bad number {v:?}")));
        let parse_usize =
            |v: &str| v.parse::<usize>().map_err(|_| bad(format!("bad count {v:?}")));
        match (section, key) {
            (Section::Experiment, "task") => task = Some(value.parse()?),
            (Section::Experiment, "laplacian") => laplacian = value.parse()?,
            (Section::Experiment, "folds") => folds = Some(parse_usize(value)?),
            (Section::Experiment, "seed") => {
                seed = value
                    .parse()
                    .map_err(|_| bad(format!("bad seed {value:?}")))?
            }
            (Section::Experiment, "train-fraction") => fractions.0 = Some(parse_f64(value)?),
            (Section::Experiment, "val-fraction") => fractions.1 = Some(parse_f64(value)?),
            (Section::Experiment, "test-fraction") => fractions.2 = Some(parse_f64(value)?),
            (Section::Generator, "nodes-per-cluster") => {
                generator.nodes_per_cluster = parse_usize(value)?
            }
            (Section::Generator, "clusters") => generator.clusters = parse_usize(value)?,
            (Section::Generator, "alpha-intra") => generator.intra_prob = parse_f64(value)?,
            (Section::Generator, "alpha-inter") => generator.inter_prob = parse_f64(value)?,
            (Section::Generator, "beta") => generator.direction_prob = parse_f64(value)?,
            (Section::Generator, "delta") => generator.digon_fraction = parse_f64(value)?,
            (Section::Generator, "weight-low") => {
                generator.weight_low = value
                    .parse()
                    .map_err(|_| bad(format!("bad weight {value:?}")))?
            }
            (Section::Generator, "weight-high") => {
                generator.weight_high = value
                    .parse()
                    .map_err(|_| bad(format!("bad weight {value:?}")))?
            }
            (Section::Generator, "signed") => {
                generator.signed = value
                    .parse()
                    .map_err(|_| bad(format!("bad boolean {value:?}")))?
            }
            (Section::Generator, "seed") => {
                generator.seed = value
                    .parse()
                    .map_err(|_| bad(format!("bad seed {value:?}")))?
            }
            (Section::Data, "edges") => edges = Some(PathBuf::from(value)),
            (Section::Data, "labels") => labels = Some(PathBuf::from(value)),
            (Section::Model, "f1") => model.f1 = Some(parse_usize(value)?),
            (Section::Model, "f2") => model.f2 = Some(parse_usize(value)?),
            (Section::Model, "head") => model.head = Some(value.parse()?),
            (Section::Model, "dropout") => model.dropout = Some(parse_f64(value)?),
            (Section::Model, "learning-rate") => model.learning_rate = Some(parse_f64(value)?),
            (Section::Model, "weight-decay") => model.weight_decay = Some(parse_f64(value)?),
            (Section::Model, "max-epochs") => model.max_epochs = Some(parse_usize(value)?),
            (Section::Model, "patience") => model.patience = Some(parse_usize(value)?),
            (no_section, key) => {
                let where_ = match no_section {
                    Section::None => "outside any section",
                    Section::Experiment => "in [experiment]",
                    Section::Generator => "in [generator]",
                    Section::Data => "in [data]",
                    Section::Model => "in [model]",
                };
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("unknown key {key:?} {where_}"),
                });
            }
        }
    }

    let task = task.ok_or_else(|| Error::InvalidConfig("config must set task".into()))?;
    let source = match (saw_generator, edges) {
        (true, Some(_)) => {
            return Err(Error::InvalidConfig(
                "config has both [generator] and [data]".into(),
            ))
        }
        (true, None) => DataSource::Generate(generator),
        (false, Some(edges)) => DataSource::Files { edges, labels },
        (false, None) => {
            return Err(Error::InvalidConfig(
                "config needs a [generator] or [data] section".into(),
            ))
        }
    };

    let mut spec = ExperimentSpec::new(task, source, laplacian, seed);
    if let Some(f) = folds {
        spec.folds = f;
    }
    let defaults = default_fractions(task);
    spec.fractions = (
        fractions.0.unwrap_or(defaults.0),
        fractions.1.unwrap_or(defaults.1),
        fractions.2.unwrap_or(defaults.2),
    );
    if let Some(v) = model.f1 {
        spec.model.f1 = v;
    }
    if let Some(v) = model.f2 {
        spec.model.f2 = v;
    }
    if let Some(v) = model.head {
        spec.model.head = v;
    }
    if let Some(v) = model.dropout {
        spec.model.dropout = v;
    }
    if let Some(v) = model.learning_rate {
        spec.model.learning_rate = v;
    }
    if let Some(v) = model.weight_decay {
        spec.model.weight_decay = v;
    }
    if let Some(v) = model.max_epochs {
        spec.model.max_epochs = v;
    }
    if let Some(v) = model.patience {
        spec.model.patience = v;
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laplacian::build_quaternionic;

    fn small_nc_spec() -> ExperimentSpec {
        let mut cfg = DsbmConfig::di150(0.0, 7);
        cfg.nodes_per_cluster = 10;
        cfg.clusters = 2;
        cfg.intra_prob = 0.05;
        cfg.inter_prob = 0.8;
        cfg.direction_prob = 0.95;
        let mut spec = ExperimentSpec::new(
            Task::NodeClassification,
            DataSource::Generate(cfg),
            LaplacianKind::Quaternionic,
            3,
        );
        spec.folds = 3;
        spec.model.f1 = 8;
        spec.model.f2 = 8;
        spec.model.max_epochs = 120;
        spec.model.patience = 120;
        spec
    }

    #[test]
    fn nc_experiment_runs_and_tabulates() {
        let spec = small_nc_spec();
        let table = run_experiment(&spec).unwrap();
        assert_eq!(table.folds.len(), 3);
        assert!(table.mean > 0.5, "toy NC mean accuracy {}", table.mean);
        let text = table.render_text();
        assert!(text.contains("mean"));
        let csv = table.render_csv();
        assert!(csv.starts_with("fold,accuracy\n"));
    }

    #[test]
    fn experiment_is_deterministic() {
        let spec = small_nc_spec();
        let a = run_experiment(&spec).unwrap();
        let b = run_experiment(&spec).unwrap();
        assert_eq!(a.render_csv(), b.render_csv());
    }

    #[test]
    fn fold_test_sets_differ_and_partition_within_fold() {
        let spec = small_nc_spec();
        let g = spec.load_graph().unwrap();
        let mut seen = Vec::new();
        for fold in 0..spec.folds {
            let (train, val, test) =
                split_nodes(&g, spec.fractions, spec.seed_base + fold as u64).unwrap();
            let mut all: Vec<usize> = train.iter().chain(&val).chain(&test).copied().collect();
            all.sort_unstable();
            assert_eq!(all, (0..g.n()).collect::<Vec<_>>());
            seen.push(test);
        }
        assert_ne!(seen[0], seen[1], "independent folds re-split");
    }

    #[test]
    fn edge_fold_propagation_excludes_removed_pairs() {
        let cfg = DsbmConfig::di150(0.3, 11);
        let g = generate_dsbm(&cfg).unwrap();
        let split = split_edges(&g, EdgeTask::ThreeClass, (0.8, 0.05, 0.15), 2).unwrap();
        let bundle = build_quaternionic(&split.train_graph);
        for r in &split.removed {
            let q = bundle.hq.get(r.u, r.v);
            assert_eq!(q, crate::quat::Quaternion::ZERO);
        }
    }

    #[test]
    fn comparison_requires_matching_specs() {
        let a = small_nc_spec();
        let mut b = a.clone();
        b.laplacian = LaplacianKind::Classical;
        let mut c = a.clone();
        c.folds = 5;
        assert!(compare_laplacians(&[a.clone()]).is_err());
        assert!(compare_laplacians(&[a.clone(), c]).is_err());
        let cmp = compare_laplacians(&[a, b]).unwrap();
        assert_eq!(cmp.tables.len(), 2);
        let text = cmp.render_text();
        assert!(text.contains("delta"));
    }

    #[test]
    fn identical_specs_have_zero_delta() {
        let a = small_nc_spec();
        let mut b = a.clone();
        b.laplacian = LaplacianKind::Quaternionic; // same kind: delta must be 0
        let cmp = compare_laplacians(&[a, b]).unwrap();
        assert_eq!(cmp.delta(1), 0.0);
    }

    #[test]
    fn config_parsing_roundtrip() {
        let text = "\
[experiment]
task = nc
laplacian = classical
folds = 4
seed = 42

[generator]
nodes-per-cluster = 12
clusters = 5
alpha-intra = 0.1
alpha-inter = 0.6
beta = 0.2
delta = 0.5
weight-low = 2
weight-high = 4
signed = false
seed = 9

[model]
f1 = 24
max-epochs = 77
";
        let spec = parse_experiment_config(text).unwrap();
        assert_eq!(spec.task, Task::NodeClassification);
        assert_eq!(spec.laplacian, LaplacianKind::Classical);
        assert_eq!(spec.folds, 4);
        assert_eq!(spec.seed_base, 42);
        assert_eq!(spec.model.f1, 24);
        assert_eq!(spec.model.f2, 16);
        assert_eq!(spec.model.max_epochs, 77);
        match &spec.source {
            DataSource::Generate(cfg) => {
                assert_eq!(cfg.nodes_per_cluster, 12);
                assert_eq!(cfg.digon_fraction, 0.5);
                assert_eq!(cfg.seed, 9);
            }
            other => panic!("unexpected source {other:?}"),
        }
    }

    #[test]
    fn config_rejects_unknown_keys_and_missing_source() {
        let err = parse_experiment_config("[experiment]\ntask = nc\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));

        let err = parse_experiment_config("[experiment]\ntask = nc\n").unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
    }

    #[test]
    fn three_class_experiment_on_small_graph() {
        let mut cfg = DsbmConfig::di150(0.3, 13);
        cfg.nodes_per_cluster = 8;
        let mut spec = ExperimentSpec::new(
            Task::Edge(EdgeTask::ThreeClass),
            DataSource::Generate(cfg),
            LaplacianKind::Quaternionic,
            1,
        );
        spec.folds = 2;
        spec.model.f1 = 8;
        spec.model.f2 = 8;
        spec.model.max_epochs = 60;
        spec.model.patience = 60;
        let table = run_experiment(&spec).unwrap();
        assert_eq!(table.folds.len(), 2);
        assert!(table.mean > 0.0);
    }
}
