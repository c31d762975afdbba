//! Train/validation/test splits for node and edge prediction tasks.
//!
//! Node splits are stratified by class. Edge splits sample ordered node
//! pairs, label them by edge direction/sign/existence, and remove the
//! validation and test pairs from the adjacency used to build the training
//! Laplacian, skipping any removal that would disconnect the graph.

use crate::error::{Error, Result};
use crate::graph::Digraph;
use crate::rng::{stream, substream};
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::VecDeque;

/// The k-class edge prediction task family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeTask {
    /// Classes: (u,v) in E; (v,u) in E; neither.
    ThreeClass,
    /// Classes: (u,v) positive; (u,v) negative; (v,u) positive; (v,u) negative.
    FourClass,
    /// The four-class labels plus a no-edge class.
    FiveClass,
}

impl EdgeTask {
    pub fn num_classes(self) -> usize {
        match self {
            EdgeTask::ThreeClass => 3,
            EdgeTask::FourClass => 4,
            EdgeTask::FiveClass => 5,
        }
    }

    /// Four- and five-class tasks are defined over signed graphs.
    pub fn needs_signs(self) -> bool {
        !matches!(self, EdgeTask::ThreeClass)
    }

    pub fn has_non_edge_class(self) -> bool {
        !matches!(self, EdgeTask::FourClass)
    }

    /// Degree features use absolute weights on the signed tasks.
    pub fn use_abs_features(self) -> bool {
        self.needs_signs()
    }

    pub fn non_edge_class(self) -> Option<usize> {
        match self {
            EdgeTask::ThreeClass => Some(2),
            EdgeTask::FourClass => None,
            EdgeTask::FiveClass => Some(4),
        }
    }
}

impl std::str::FromStr for EdgeTask {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "3cep" => Ok(EdgeTask::ThreeClass),
            "4cep" => Ok(EdgeTask::FourClass),
            "5cep" => Ok(EdgeTask::FiveClass),
            other => Err(Error::InvalidConfig(format!("unknown edge task {other:?}"))),
        }
    }
}

impl EdgeTask {
    pub fn name(self) -> &'static str {
        match self {
            EdgeTask::ThreeClass => "3cep",
            EdgeTask::FourClass => "4cep",
            EdgeTask::FiveClass => "5cep",
        }
    }
}

/// The four experiment tasks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Task {
    NodeClassification,
    Edge(EdgeTask),
}

impl Task {
    pub const ALL: [Task; 4] = [
        Task::NodeClassification,
        Task::Edge(EdgeTask::ThreeClass),
        Task::Edge(EdgeTask::FourClass),
        Task::Edge(EdgeTask::FiveClass),
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::NodeClassification => "nc",
            Task::Edge(t) => t.name(),
        }
    }
}

impl std::str::FromStr for Task {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("nc") {
            Ok(Task::NodeClassification)
        } else {
            s.parse().map(Task::Edge)
        }
    }
}

/// Class of the ordered pair (a, b) under `task`. A pair with an edge in the
/// queried direction takes that direction's class regardless of the reverse.
pub fn edge_pair_label(g: &Digraph, task: EdgeTask, a: usize, b: usize) -> usize {
    let fwd = g.weight(a, b);
    let bwd = g.weight(b, a);
    match task {
        EdgeTask::ThreeClass => {
            if fwd != 0.0 {
                0
            } else if bwd != 0.0 {
                1
            } else {
                2
            }
        }
        EdgeTask::FourClass | EdgeTask::FiveClass => {
            if fwd != 0.0 {
                if fwd > 0.0 {
                    0
                } else {
                    1
                }
            } else if bwd != 0.0 {
                if bwd > 0.0 {
                    2
                } else {
                    3
                }
            } else {
                4
            }
        }
    }
}

fn check_fractions(fractions: (f64, f64, f64)) -> Result<()> {
    let (a, b, c) = fractions;
    if a < 0.0 || b < 0.0 || c < 0.0 || (a + b + c - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidConfig(format!(
            "split fractions ({a}, {b}, {c}) must be nonnegative and sum to 1"
        )));
    }
    Ok(())
}

/// Stratified node split into (train, val, test) index sets. Deterministic
/// given the seed; the three sets are disjoint and exhaustive, with
/// per-class counts independent of label order.
pub fn split_nodes(
    g: &Digraph,
    fractions: (f64, f64, f64),
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>, Vec<usize>)> {
    check_fractions(fractions)?;
    let labels = g
        .labels()
        .ok_or_else(|| Error::InvalidConfig("node split requires labels".into()))?;
    let num_classes = g.num_classes().unwrap_or(0);

    let mut rng = substream(seed, stream::SPLIT);
    let (mut train, mut val, mut test) = (Vec::new(), Vec::new(), Vec::new());
    for class in 0..num_classes {
        let mut members: Vec<usize> = (0..g.n()).filter(|&u| labels[u] == class).collect();
        let m = members.len();
        if m < 3 {
            return Err(Error::StratifyTooSmall { class, count: m });
        }
        members.shuffle(&mut rng);
        let n_train = (fractions.0 * m as f64).round() as usize;
        let n_val = ((fractions.1 * m as f64).round() as usize).min(m - n_train);
        train.extend(&members[..n_train]);
        val.extend(&members[n_train..n_train + n_val]);
        test.extend(&members[n_train + n_val..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    test.sort_unstable();
    Ok((train, val, test))
}

/// A vertex pair removed from the training adjacency, with both directional
/// weights so the original graph can be reconstructed exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RemovedPair {
    pub u: usize,
    pub v: usize,
    pub w_uv: f64,
    pub w_vu: f64,
}

/// Labeled ordered-pair sets plus the pruned training graph.
#[derive(Clone, Debug)]
pub struct EdgeSplit {
    /// Sampled ordered pairs: connected pairs first, then non-edge pairs.
    pub pairs: Vec<(usize, usize)>,
    pub labels: Vec<usize>,
    /// Indices into `pairs`.
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
    /// The graph with val/test pair edges removed; builds the training Laplacian.
    pub train_graph: Digraph,
    pub removed: Vec<RemovedPair>,
}

/// Undirected support graph with edge deletion, for connectivity checks.
struct Support {
    neighbors: Vec<Vec<usize>>,
}

impl Support {
    fn new(g: &Digraph) -> Self {
        let n = g.n();
        let mut neighbors = vec![Vec::new(); n];
        for u in 0..n {
            for v in (u + 1)..n {
                if g.weight(u, v) != 0.0 || g.weight(v, u) != 0.0 {
                    neighbors[u].push(v);
                    neighbors[v].push(u);
                }
            }
        }
        Support { neighbors }
    }

    fn remove(&mut self, u: usize, v: usize) {
        self.neighbors[u].retain(|&x| x != v);
        self.neighbors[v].retain(|&x| x != u);
    }

    fn insert(&mut self, u: usize, v: usize) {
        self.neighbors[u].push(v);
        self.neighbors[v].push(u);
    }

    /// Breadth-first reachability u -> v.
    fn connected(&self, u: usize, v: usize) -> bool {
        if u == v {
            return true;
        }
        let mut seen = vec![false; self.neighbors.len()];
        let mut queue = VecDeque::from([u]);
        seen[u] = true;
        while let Some(x) = queue.pop_front() {
            for &y in &self.neighbors[x] {
                if y == v {
                    return true;
                }
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        false
    }
}

fn quota(fraction: f64, total: usize) -> usize {
    if fraction <= 0.0 {
        0
    } else {
        ((fraction * total as f64).round() as usize).max(1)
    }
}

/// Build an edge split. Every connected unordered pair is sampled once with
/// a random orientation; non-edge pairs (for the tasks that have that class)
/// are sampled to match the mean edge-class count. Removing a val/test pair
/// never disconnects a weakly-connected component: a removal that would is
/// skipped and the pair trains instead.
pub fn split_edges(
    g: &Digraph,
    task: EdgeTask,
    fractions: (f64, f64, f64),
    seed: u64,
) -> Result<EdgeSplit> {
    check_fractions(fractions)?;
    if task.needs_signs() && !g.has_negative_edges() {
        return Err(Error::NoNegativeEdges);
    }

    let n = g.n();
    let mut rng = substream(seed, stream::SPLIT);

    // Orient every connected pair with a fair coin, in pair order.
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if g.weight(u, v) != 0.0 || g.weight(v, u) != 0.0 {
                let (a, b) = if rng.random_bool(0.5) { (u, v) } else { (v, u) };
                pairs.push((a, b));
            }
        }
    }
    let m = pairs.len();
    let (test_quota, val_quota) = (quota(fractions.2, m), quota(fractions.1, m));
    let train_quota = quota(fractions.0, m).min(1);
    if test_quota + val_quota + train_quota > m {
        return Err(Error::SplitInfeasible(format!(
            "{m} connected pairs cannot fill test={test_quota}, val={val_quota} plus training"
        )));
    }

    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut rng);

    let mut working = g.adjacency().clone();
    let mut support = Support::new(g);
    let mut removed = Vec::new();
    let (mut train, mut val, mut test) = (Vec::new(), Vec::new(), Vec::new());
    for p in order {
        let (a, b) = pairs[p];
        let (u, v) = (a.min(b), a.max(b));
        let want_holdout = test.len() < test_quota || val.len() < val_quota;
        let mut held_out = false;
        if want_holdout {
            support.remove(u, v);
            if support.connected(u, v) {
                removed.push(RemovedPair {
                    u,
                    v,
                    w_uv: working[(u, v)],
                    w_vu: working[(v, u)],
                });
                working[(u, v)] = 0.0;
                working[(v, u)] = 0.0;
                if test.len() < test_quota {
                    test.push(p);
                } else {
                    val.push(p);
                }
                held_out = true;
            } else {
                support.insert(u, v);
            }
        }
        if !held_out {
            train.push(p);
        }
    }
    if test.len() < test_quota || val.len() < val_quota {
        return Err(Error::SplitInfeasible(format!(
            "connectivity allows only {} test and {} val removals of the requested {test_quota}/{val_quota}",
            test.len(),
            val.len()
        )));
    }

    let mut labels: Vec<usize> = pairs
        .iter()
        .map(|&(a, b)| edge_pair_label(g, task, a, b))
        .collect();

    // Non-edge pairs, count-matched to the mean edge-class size.
    if let Some(non_edge_class) = task.non_edge_class() {
        let edge_classes = task.num_classes() - 1;
        let mut counts = vec![0usize; edge_classes];
        for &l in &labels {
            counts[l] += 1;
        }
        let mean = counts.iter().sum::<usize>() as f64 / edge_classes as f64;
        let want = mean.round() as usize;

        let mut candidates: Vec<(usize, usize)> = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                if g.weight(u, v) == 0.0 && g.weight(v, u) == 0.0 {
                    candidates.push((u, v));
                }
            }
        }
        if candidates.len() < want {
            return Err(Error::SplitInfeasible(format!(
                "need {want} non-edge pairs but only {} exist",
                candidates.len()
            )));
        }
        let mut ne_rng = substream(seed, stream::NON_EDGE_SAMPLING);
        candidates.shuffle(&mut ne_rng);
        let chosen = &candidates[..want];

        let ne_test = (fractions.2 * want as f64).round() as usize;
        let ne_val = ((fractions.1 * want as f64).round() as usize).min(want - ne_test);
        for (t, &(u, v)) in chosen.iter().enumerate() {
            let (a, b) = if ne_rng.random_bool(0.5) { (u, v) } else { (v, u) };
            let idx = pairs.len();
            pairs.push((a, b));
            labels.push(non_edge_class);
            if t < ne_test {
                test.push(idx);
            } else if t < ne_test + ne_val {
                val.push(idx);
            } else {
                train.push(idx);
            }
        }
    }

    train.sort_unstable();
    val.sort_unstable();
    test.sort_unstable();
    let train_graph = Digraph::new(working, g.labels().map(|l| l.to_vec()))?;
    Ok(EdgeSplit {
        pairs,
        labels,
        train,
        val,
        test,
        train_graph,
        removed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{four_node_example, generate_dsbm, DsbmConfig};
    use crate::mat::Mat;

    fn balanced_graph(n: usize, classes: usize) -> Digraph {
        let mut adj = Mat::zeros(n, n);
        for u in 0..n - 1 {
            adj[(u, u + 1)] = 1.0;
        }
        let labels = (0..n).map(|u| u % classes).collect();
        Digraph::new(adj, Some(labels)).unwrap()
    }

    #[test]
    fn node_split_counts_and_stratification() {
        let g = balanced_graph(150, 5);
        let (train, val, test) = split_nodes(&g, (0.6, 0.2, 0.2), 3).unwrap();
        assert_eq!((train.len(), val.len(), test.len()), (90, 30, 30));
        let labels = g.labels().unwrap();
        for class in 0..5 {
            let count = |set: &[usize]| set.iter().filter(|&&u| labels[u] == class).count();
            assert_eq!(count(&train), 18);
            assert_eq!(count(&val), 6);
            assert_eq!(count(&test), 6);
        }
        // disjoint and exhaustive
        let mut all: Vec<usize> = train.iter().chain(&val).chain(&test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..150).collect::<Vec<_>>());
    }

    #[test]
    fn node_split_deterministic() {
        let g = balanced_graph(60, 3);
        let a = split_nodes(&g, (0.6, 0.2, 0.2), 9).unwrap();
        let b = split_nodes(&g, (0.6, 0.2, 0.2), 9).unwrap();
        assert_eq!(a, b);
        let c = split_nodes(&g, (0.6, 0.2, 0.2), 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn node_split_counts_invariant_under_label_shuffle() {
        let g = balanced_graph(60, 3);
        let mut relabeled = g.clone();
        let shuffled = g.labels().unwrap().iter().map(|&c| (c + 1) % 3).collect();
        relabeled.set_labels(Some(shuffled));
        let (t1, v1, s1) = split_nodes(&g, (0.6, 0.2, 0.2), 5).unwrap();
        let (t2, v2, s2) = split_nodes(&relabeled, (0.6, 0.2, 0.2), 5).unwrap();
        assert_eq!(
            (t1.len(), v1.len(), s1.len()),
            (t2.len(), v2.len(), s2.len())
        );
    }

    #[test]
    fn node_split_needs_three_per_class() {
        let mut g = balanced_graph(7, 3);
        g.set_labels(Some(vec![0, 0, 0, 1, 1, 1, 2]));
        assert!(matches!(
            split_nodes(&g, (0.6, 0.2, 0.2), 1),
            Err(Error::StratifyTooSmall { class: 2, count: 1 })
        ));
    }

    #[test]
    fn three_class_labels_on_four_node_example() {
        let g = four_node_example();
        // Directed edge 2 -> 0: forward class, reverse class, and a non-edge.
        assert_eq!(edge_pair_label(&g, EdgeTask::ThreeClass, 2, 0), 0);
        assert_eq!(edge_pair_label(&g, EdgeTask::ThreeClass, 0, 2), 1);
        assert_eq!(edge_pair_label(&g, EdgeTask::ThreeClass, 0, 3), 2);
    }

    #[test]
    fn four_class_requires_negative_edges() {
        let g = four_node_example();
        assert!(matches!(
            split_edges(&g, EdgeTask::FourClass, (0.8, 0.0, 0.2), 1),
            Err(Error::NoNegativeEdges)
        ));
    }

    #[test]
    fn two_node_graph_cannot_split() {
        let mut adj = Mat::zeros(2, 2);
        adj[(0, 1)] = 1.0;
        let g = Digraph::new(adj, None).unwrap();
        assert!(matches!(
            split_edges(&g, EdgeTask::ThreeClass, (0.8, 0.05, 0.15), 1),
            Err(Error::SplitInfeasible(_))
        ));
    }

    #[test]
    fn edge_split_reconstructs_original_adjacency() {
        let g = generate_dsbm(&DsbmConfig::di150(0.3, 21)).unwrap();
        let split = split_edges(&g, EdgeTask::ThreeClass, (0.8, 0.05, 0.15), 2).unwrap();
        let mut rebuilt = split.train_graph.adjacency().clone();
        for r in &split.removed {
            assert_eq!(rebuilt[(r.u, r.v)], 0.0);
            assert_eq!(rebuilt[(r.v, r.u)], 0.0);
            rebuilt[(r.u, r.v)] = r.w_uv;
            rebuilt[(r.v, r.u)] = r.w_vu;
        }
        assert_eq!(&rebuilt, g.adjacency());
    }

    #[test]
    fn edge_split_preserves_weak_connectivity() {
        let g = generate_dsbm(&DsbmConfig::di150(0.3, 22)).unwrap();
        let split = split_edges(&g, EdgeTask::ThreeClass, (0.8, 0.05, 0.15), 3).unwrap();
        let sup_before = Support::new(&g);
        let sup_after = Support::new(&split.train_graph);
        for v in 1..g.n() {
            assert_eq!(sup_before.connected(0, v), sup_after.connected(0, v));
        }
    }

    #[test]
    fn edge_split_is_deterministic_and_partitions() {
        let g = generate_dsbm(&DsbmConfig::di150(0.3, 23)).unwrap();
        let a = split_edges(&g, EdgeTask::ThreeClass, (0.8, 0.05, 0.15), 4).unwrap();
        let b = split_edges(&g, EdgeTask::ThreeClass, (0.8, 0.05, 0.15), 4).unwrap();
        assert_eq!(a.pairs, b.pairs);
        assert_eq!(a.test, b.test);
        assert_eq!(a.train_graph.adjacency(), b.train_graph.adjacency());

        let mut all: Vec<usize> = a.train.iter().chain(&a.val).chain(&a.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..a.pairs.len()).collect::<Vec<_>>());
    }

    #[test]
    fn five_class_balances_non_edge_count() {
        let mut cfg = DsbmConfig::di150(0.3, 24);
        cfg.signed = true;
        let g = generate_dsbm(&cfg).unwrap();
        let split = split_edges(&g, EdgeTask::FiveClass, (0.8, 0.0, 0.2), 5).unwrap();
        let mut counts = vec![0usize; 5];
        for &l in &split.labels {
            counts[l] += 1;
        }
        assert!(counts.iter().all(|&c| c > 0), "all five classes present");
        let mean = counts[..4].iter().sum::<usize>() as f64 / 4.0;
        assert!((counts[4] as f64 - mean).abs() <= 1.0);
    }

    #[test]
    fn removed_pairs_absent_from_training_graph() {
        let g = generate_dsbm(&DsbmConfig::di150(0.3, 25)).unwrap();
        let split = split_edges(&g, EdgeTask::ThreeClass, (0.8, 0.05, 0.15), 6).unwrap();
        for &p in split.test.iter().chain(&split.val) {
            let (a, b) = split.pairs[p];
            if split.labels[p] != 2 {
                assert_eq!(split.train_graph.weight(a, b), 0.0);
                assert_eq!(split.train_graph.weight(b, a), 0.0);
            }
        }
    }
}
