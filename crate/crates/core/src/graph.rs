//! Weighted digraphs: representation, edge-list ingestion, degree features,
//! and a seeded stochastic block model generator with a controllable digon
//! fraction.

use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::rng::{pair_index, pair_substream};
use rand::Rng;
use std::io::BufRead;

/// Maximum node count for the dense in-memory representation.
pub const MAX_NODES: usize = 5_000;

/// A weighted directed graph with dense adjacency. `adj[(u, v)]` is the
/// weight of the edge `u -> v`; zero means absent. The diagonal is always
/// zero: self-loops enter only through the renormalization trick, never
/// through stored graphs.
#[derive(Clone, Debug, PartialEq)]
pub struct Digraph {
    adj: Mat,
    labels: Option<Vec<usize>>,
}

impl Digraph {
    pub fn new(adj: Mat, labels: Option<Vec<usize>>) -> Result<Self> {
        if !adj.is_square() {
            return Err(Error::NonSquare {
                op: "Digraph::new",
                rows: adj.rows(),
                cols: adj.cols(),
            });
        }
        let n = adj.rows();
        if n == 0 {
            return Err(Error::InvalidConfig("graph needs at least one node".into()));
        }
        for u in 0..n {
            if adj[(u, u)] != 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "self-loop stored on node {u}"
                )));
            }
        }
        if !adj.is_finite() {
            return Err(Error::InvalidConfig("non-finite edge weight".into()));
        }
        if let Some(ref l) = labels {
            if l.len() != n {
                return Err(Error::InvalidConfig(format!(
                    "{} labels for {} nodes",
                    l.len(),
                    n
                )));
            }
        }
        Ok(Digraph { adj, labels })
    }

    pub fn n(&self) -> usize {
        self.adj.rows()
    }

    pub fn adjacency(&self) -> &Mat {
        &self.adj
    }

    pub fn weight(&self, u: usize, v: usize) -> f64 {
        self.adj[(u, v)]
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn set_labels(&mut self, labels: Option<Vec<usize>>) {
        self.labels = labels;
    }

    pub fn num_classes(&self) -> Option<usize> {
        self.labels
            .as_ref()
            .map(|l| l.iter().copied().max().map_or(0, |m| m + 1))
    }

    /// Directed edges in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n();
        (0..n).flat_map(move |u| {
            (0..n).filter_map(move |v| {
                let w = self.adj[(u, v)];
                (w != 0.0).then_some((u, v, w))
            })
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    pub fn has_negative_edges(&self) -> bool {
        self.edges().any(|(_, _, w)| w < 0.0)
    }

    /// (connected unordered pairs, digon pairs).
    pub fn pair_stats(&self) -> (usize, usize) {
        let n = self.n();
        let mut connected = 0;
        let mut digons = 0;
        for u in 0..n {
            for v in (u + 1)..n {
                let fwd = self.adj[(u, v)] != 0.0;
                let bwd = self.adj[(v, u)] != 0.0;
                if fwd || bwd {
                    connected += 1;
                }
                if fwd && bwd {
                    digons += 1;
                }
            }
        }
        (connected, digons)
    }

    pub fn transpose(&self) -> Digraph {
        Digraph {
            adj: self.adj.transpose(),
            labels: self.labels.clone(),
        }
    }
}

/// Parse the tab-separated edge-list format: lines of `u<TAB>v<TAB>w` with
/// 0-based ids, an optional `# n=<count>` header, and `#` comments. Duplicate
/// `(u, v)` lines sum their weights.
pub fn parse_edge_list(reader: impl BufRead) -> Result<Digraph> {
    let mut header_n: Option<usize> = None;
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let mut max_id: Option<usize> = None;

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            msg: e.to_string(),
        })?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(count) = comment.strip_prefix("n=") {
                let n: usize = count.trim().parse().map_err(|_| Error::Parse {
                    line: lineno,
                    msg: format!("bad node count in header: {comment:?}"),
                })?;
                if header_n.is_none() {
                    header_n = Some(n);
                }
            }
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected `u<TAB>v<TAB>w`, got {} fields", fields.len()),
            });
        }
        let u: usize = fields[0].trim().parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("bad node id {:?}", fields[0]),
        })?;
        let v: usize = fields[1].trim().parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("bad node id {:?}", fields[1]),
        })?;
        let w: f64 = fields[2].trim().parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("bad weight {:?}", fields[2]),
        })?;
        if u == v {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("self-loop {u} -> {v} rejected"),
            });
        }
        if !w.is_finite() {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("non-finite weight {w}"),
            });
        }
        max_id = Some(max_id.map_or(u.max(v), |m| m.max(u).max(v)));
        edges.push((u, v, w));
    }

    let n = match (header_n, max_id) {
        (Some(h), Some(m)) => {
            if h <= m {
                return Err(Error::Parse {
                    line: 0,
                    msg: format!("header n={h} but node id {m} appears"),
                });
            }
            h
        }
        (Some(h), None) => h,
        (None, Some(m)) => m + 1,
        (None, None) => {
            return Err(Error::Parse {
                line: 0,
                msg: "empty edge list and no `# n=` header".into(),
            })
        }
    };
    if n == 0 {
        return Err(Error::Parse {
            line: 0,
            msg: "header declares zero nodes".into(),
        });
    }

    let mut adj = Mat::zeros(n, n);
    for (u, v, w) in edges {
        adj[(u, v)] += w;
    }
    Digraph::new(adj, None)
}

/// Render a graph in the edge-list format, always with the `# n=` header so
/// isolated nodes survive a round-trip.
pub fn write_edge_list(g: &Digraph) -> String {
    let mut out = format!("# n={}\n", g.n());
    for (u, v, w) in g.edges() {
        out.push_str(&format!("{u}\t{v}\t{w}\n"));
    }
    out
}

/// Parse the label file format: one `node_id<TAB>class_id` per line.
/// Every node must be labeled.
pub fn parse_labels(reader: impl BufRead, n: usize) -> Result<Vec<usize>> {
    let mut labels: Vec<Option<usize>> = vec![None; n];
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            msg: e.to_string(),
        })?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected `node<TAB>class`, got {} fields", fields.len()),
            });
        }
        let node: usize = fields[0].trim().parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("bad node id {:?}", fields[0]),
        })?;
        let class: usize = fields[1].trim().parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("bad class id {:?}", fields[1]),
        })?;
        if node >= n {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("node id {node} out of range for {n} nodes"),
            });
        }
        labels[node] = Some(class);
    }
    labels
        .into_iter()
        .enumerate()
        .map(|(u, l)| {
            l.ok_or_else(|| Error::Parse {
                line: 0,
                msg: format!("node {u} has no label"),
            })
        })
        .collect()
}

pub fn write_labels(labels: &[usize]) -> String {
    let mut out = String::new();
    for (u, c) in labels.iter().enumerate() {
        out.push_str(&format!("{u}\t{c}\n"));
    }
    out
}

/// In-degree / out-degree node features: column 0 is the in-degree
/// `sum_v f(A[v][u])`, column 1 the out-degree `sum_v f(A[u][v])`, with
/// `f = abs` when `use_abs` (the convention for tasks over signed graphs).
pub fn degree_features(g: &Digraph, use_abs: bool) -> Mat {
    let n = g.n();
    let a = g.adjacency();
    let mut x = Mat::zeros(n, 2);
    for u in 0..n {
        for v in 0..n {
            let (w_in, w_out) = (a[(v, u)], a[(u, v)]);
            x[(u, 0)] += if use_abs { w_in.abs() } else { w_in };
            x[(u, 1)] += if use_abs { w_out.abs() } else { w_out };
        }
    }
    x
}

/// Configuration of the directed stochastic block model generator.
///
/// For every unordered pair `{u, v}`, `u < v`, an edge is created with
/// probability `intra_prob` (same cluster) or `inter_prob` (different
/// clusters). An existing pair becomes a digon with probability
/// `digon_fraction`, drawing its two directional weights independently;
/// otherwise it is oriented `u -> v` with the direction probability of the
/// ordered cluster pair. Direction probabilities follow a cyclic meta-graph:
/// cluster `c` sends to cluster `c + 1 (mod clusters)` with probability
/// `direction_prob`, receives from it with the complement, and all other
/// cluster pairs (including same-cluster) use 1/2.
#[derive(Clone, Debug, PartialEq)]
pub struct DsbmConfig {
    pub nodes_per_cluster: usize,
    pub clusters: usize,
    pub intra_prob: f64,
    pub inter_prob: f64,
    /// beta: probability that an inter-cluster edge follows the cycle.
    pub direction_prob: f64,
    /// delta: probability that an existing pair is emitted as a digon.
    pub digon_fraction: f64,
    pub weight_low: i64,
    pub weight_high: i64,
    /// Negate each drawn weight with probability 1/2.
    pub signed: bool,
    pub seed: u64,
}

impl DsbmConfig {
    /// The Di150-family defaults: 150 nodes in 5 clusters, sparse within and
    /// dense across clusters, integer weights in 2..=4.
    pub fn di150(digon_fraction: f64, seed: u64) -> Self {
        DsbmConfig {
            nodes_per_cluster: 30,
            clusters: 5,
            intra_prob: 0.1,
            inter_prob: 0.6,
            direction_prob: 0.2,
            digon_fraction,
            weight_low: 2,
            weight_high: 4,
            signed: false,
            seed,
        }
    }

    /// The Di500-family defaults: 500 nodes in 5 clusters, uniformly sparse.
    pub fn di500(digon_fraction: f64, seed: u64) -> Self {
        DsbmConfig {
            nodes_per_cluster: 100,
            clusters: 5,
            inter_prob: 0.1,
            ..DsbmConfig::di150(digon_fraction, seed)
        }
    }

    pub fn n(&self) -> usize {
        self.nodes_per_cluster * self.clusters
    }

    pub fn validate(&self) -> Result<()> {
        let probs = [
            ("intra_prob", self.intra_prob),
            ("inter_prob", self.inter_prob),
            ("direction_prob", self.direction_prob),
            ("digon_fraction", self.digon_fraction),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!("{name} = {p} not in [0, 1]")));
            }
        }
        if self.nodes_per_cluster == 0 || self.clusters == 0 {
            return Err(Error::InvalidConfig(
                "nodes_per_cluster and clusters must be positive".into(),
            ));
        }
        let n = self
            .nodes_per_cluster
            .checked_mul(self.clusters)
            .ok_or_else(|| Error::InvalidConfig("node count overflows".into()))?;
        if n > MAX_NODES {
            return Err(Error::InvalidConfig(format!(
                "{n} nodes exceeds the dense-storage cap of {MAX_NODES}"
            )));
        }
        if self.weight_low < 1 {
            return Err(Error::InvalidConfig(format!(
                "weight_low = {} must be >= 1",
                self.weight_low
            )));
        }
        if self.weight_high < self.weight_low {
            return Err(Error::InvalidConfig(format!(
                "weight_high = {} below weight_low = {}",
                self.weight_high, self.weight_low
            )));
        }
        Ok(())
    }

    /// Probability that an edge between clusters `cu` and `cv` is oriented
    /// from the `cu` side to the `cv` side.
    fn forward_prob(&self, cu: usize, cv: usize) -> f64 {
        let c = self.clusters;
        if cu == cv {
            0.5
        } else if cv == (cu + 1) % c {
            self.direction_prob
        } else if cu == (cv + 1) % c {
            1.0 - self.direction_prob
        } else {
            0.5
        }
    }
}

/// Generate a DSBM digraph. Deterministic given the seed: every unordered
/// pair draws from its own substream, so the output is invariant to
/// evaluation order.
pub fn generate_dsbm(cfg: &DsbmConfig) -> Result<Digraph> {
    cfg.validate()?;
    let n = cfg.n();
    let mut adj = Mat::zeros(n, n);
    for u in 0..n {
        let cu = u / cfg.nodes_per_cluster;
        for v in (u + 1)..n {
            let cv = v / cfg.nodes_per_cluster;
            let mut rng = pair_substream(cfg.seed, pair_index(n, u, v));
            let alpha = if cu == cv {
                cfg.intra_prob
            } else {
                cfg.inter_prob
            };
            if !rng.random_bool(alpha) {
                continue;
            }
            if cfg.digon_fraction > 0.0 && rng.random_bool(cfg.digon_fraction) {
                adj[(u, v)] = draw_weight(cfg, &mut rng);
                adj[(v, u)] = draw_weight(cfg, &mut rng);
            } else if rng.random_bool(cfg.forward_prob(cu, cv)) {
                adj[(u, v)] = draw_weight(cfg, &mut rng);
            } else {
                adj[(v, u)] = draw_weight(cfg, &mut rng);
            }
        }
    }
    let labels = (0..n).map(|u| u / cfg.nodes_per_cluster).collect();
    Digraph::new(adj, Some(labels))
}

fn draw_weight(cfg: &DsbmConfig, rng: &mut impl Rng) -> f64 {
    let w = rng.random_range(cfg.weight_low..=cfg.weight_high) as f64;
    if cfg.signed && rng.random_bool(0.5) {
        -w
    } else {
        w
    }
}

/// The worked four-node example graph used across the test suites: an
/// undirected edge {0,1} of weight 1, a directed edge 2 -> 0 of weight 3,
/// and two asymmetric digons (1,3) and (2,3).
pub fn four_node_example() -> Digraph {
    let adj = Mat::from_rows(&[
        &[0.0, 1.0, 0.0, 0.0],
        &[1.0, 0.0, 0.0, 3.0],
        &[3.0, 0.0, 0.0, 1.0],
        &[0.0, 1.0, 5.0, 0.0],
    ]);
    Digraph::new(adj, None).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    const FOUR_NODE_EDGE_LIST: &str =
        "0\t1\t1\n1\t0\t1\n1\t3\t3\n2\t0\t3\n2\t3\t1\n3\t1\t1\n3\t2\t5\n";

    #[test]
    fn parse_four_node_example() {
        let g = parse_edge_list(Cursor::new(FOUR_NODE_EDGE_LIST)).unwrap();
        assert_eq!(g.adjacency(), four_node_example().adjacency());
    }

    #[test]
    fn parse_header_only() {
        let g = parse_edge_list(Cursor::new("# n=3\n")).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn duplicate_lines_sum() {
        let g = parse_edge_list(Cursor::new("0\t1\t2\n0\t1\t3\n")).unwrap();
        assert_eq!(g.weight(0, 1), 5.0);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_edge_list(Cursor::new("0\t1\t1\nbroken line\n")).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }

        let err = parse_edge_list(Cursor::new("2\t2\t1\n")).unwrap_err();
        match err {
            Error::Parse { line, msg } => {
                assert_eq!(line, 1);
                assert!(msg.contains("self-loop"));
            }
            other => panic!("unexpected error {other:?}"),
        }

        let err = parse_edge_list(Cursor::new("0\t1\tinf\n")).unwrap_err();
        match err {
            Error::Parse { line, msg } => {
                assert_eq!(line, 1);
                assert!(msg.contains("non-finite"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn edge_list_roundtrip() {
        let g = four_node_example();
        let text = write_edge_list(&g);
        let back = parse_edge_list(Cursor::new(text)).unwrap();
        assert_eq!(back.adjacency(), g.adjacency());
    }

    #[test]
    fn labels_roundtrip_and_validation() {
        let labels = vec![0, 1, 1, 0];
        let text = write_labels(&labels);
        assert_eq!(parse_labels(Cursor::new(&text), 4).unwrap(), labels);

        let err = parse_labels(Cursor::new("0\t1\n"), 2).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn degree_features_four_node() {
        // Column sums of A give in-degrees (4, 2, 5, 4); row sums give
        // out-degrees (1, 4, 4, 6).
        let g = four_node_example();
        let x = degree_features(&g, false);
        let expect = Mat::from_rows(&[&[4.0, 1.0], &[2.0, 4.0], &[5.0, 4.0], &[4.0, 6.0]]);
        assert_eq!(x, expect);
    }

    #[test]
    fn degree_features_empty_graph() {
        let g = Digraph::new(Mat::zeros(3, 3), None).unwrap();
        assert_eq!(degree_features(&g, false), Mat::zeros(3, 2));
    }

    #[test]
    fn degree_features_signed_abs() {
        let mut adj = Mat::zeros(2, 2);
        adj[(0, 1)] = -3.0;
        let g = Digraph::new(adj, None).unwrap();
        let x = degree_features(&g, true);
        assert_eq!(x, Mat::from_rows(&[&[0.0, 3.0], &[3.0, 0.0]]));
        let unsigned = degree_features(&g, false);
        assert_eq!(unsigned, Mat::from_rows(&[&[0.0, -3.0], &[-3.0, 0.0]]));
    }

    #[test]
    fn degree_features_of_transpose_swap_columns() {
        let g = generate_dsbm(&DsbmConfig::di150(0.3, 99)).unwrap();
        let x = degree_features(&g, false);
        let xt = degree_features(&g.transpose(), false);
        for u in 0..g.n() {
            assert_eq!(x[(u, 0)], xt[(u, 1)]);
            assert_eq!(x[(u, 1)], xt[(u, 0)]);
        }
    }

    #[test]
    fn dsbm_is_deterministic() {
        let cfg = DsbmConfig::di150(0.2, 7);
        let a = generate_dsbm(&cfg).unwrap();
        let b = generate_dsbm(&cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dsbm_zero_delta_has_no_digons() {
        let g = generate_dsbm(&DsbmConfig::di150(0.0, 3)).unwrap();
        let (connected, digons) = g.pair_stats();
        assert!(connected > 0);
        assert_eq!(digons, 0);
    }

    #[test]
    fn dsbm_digon_fraction_near_delta() {
        let cfg = DsbmConfig::di150(0.2, 42);
        let g = generate_dsbm(&cfg).unwrap();
        assert_eq!(g.n(), 150);
        assert_eq!(g.num_classes(), Some(5));
        let (connected, digons) = g.pair_stats();
        let fraction = digons as f64 / connected as f64;
        assert!(
            (fraction - 0.2).abs() <= 0.05,
            "digon fraction {fraction} too far from 0.2"
        );
    }

    #[test]
    fn dsbm_edge_frequencies_match_probabilities() {
        // Empirical intra/inter pair frequencies over 50 seeds.
        let mut intra = (0usize, 0usize);
        let mut inter = (0usize, 0usize);
        for seed in 0..50 {
            let cfg = DsbmConfig::di150(0.2, seed);
            let g = generate_dsbm(&cfg).unwrap();
            let labels = g.labels().unwrap();
            for u in 0..g.n() {
                for v in (u + 1)..g.n() {
                    let connected = g.weight(u, v) != 0.0 || g.weight(v, u) != 0.0;
                    let counter = if labels[u] == labels[v] {
                        &mut intra
                    } else {
                        &mut inter
                    };
                    counter.1 += 1;
                    counter.0 += connected as usize;
                }
            }
        }
        let f_intra = intra.0 as f64 / intra.1 as f64;
        let f_inter = inter.0 as f64 / inter.1 as f64;
        assert!((f_intra - 0.1).abs() <= 0.03, "intra frequency {f_intra}");
        assert!((f_inter - 0.6).abs() <= 0.03, "inter frequency {f_inter}");
    }

    #[test]
    fn dsbm_signed_weights_cover_both_signs() {
        let mut cfg = DsbmConfig::di150(0.5, 11);
        cfg.signed = true;
        let g = generate_dsbm(&cfg).unwrap();
        assert!(g.edges().any(|(_, _, w)| w > 0.0));
        assert!(g.edges().any(|(_, _, w)| w < 0.0));
        assert!(g.edges().all(|(_, _, w)| (2.0..=4.0).contains(&w.abs())));
    }

    #[test]
    fn dsbm_rejects_bad_config() {
        let mut cfg = DsbmConfig::di150(0.2, 1);
        cfg.weight_low = 0;
        assert!(matches!(
            generate_dsbm(&cfg),
            Err(Error::InvalidConfig(_))
        ));
        let mut cfg = DsbmConfig::di150(1.5, 1);
        cfg.digon_fraction = 1.5;
        assert!(generate_dsbm(&cfg).is_err());
    }
}
