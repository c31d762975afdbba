//! Minimal reverse-mode differentiation over dense real matrices.
//!
//! A [`Tape`] records every operation as it executes; [`Tape::backward`]
//! walks the records in reverse and accumulates gradients. Gradients are
//! only materialized for nodes that (transitively) depend on a leaf created
//! with `param`, so constants like the propagation matrix never cost a
//! backward matmul.

use crate::mat::Mat;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TensorId(usize);

enum Op {
    Leaf,
    MatMul(TensorId, TensorId),
    Add(TensorId, TensorId),
    Sub(TensorId, TensorId),
    Scale(TensorId, f64),
    Relu(TensorId),
    ConcatCols(Vec<TensorId>),
    /// Rows `u` and `v` of the input concatenated per pair.
    GatherPairs(TensorId, Vec<(usize, usize)>),
    /// Elementwise multiplication by a fixed (already scaled) mask.
    Dropout(TensorId, Mat),
    /// Mean softmax cross-entropy over the selected rows; value is 1x1.
    SoftmaxCrossEntropy {
        logits: TensorId,
        rows: Vec<usize>,
        labels: Vec<usize>,
    },
}

struct Node {
    value: Mat,
    grad: Option<Mat>,
    requires_grad: bool,
    op: Op,
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    fn push(&mut self, value: Mat, requires_grad: bool, op: Op) -> TensorId {
        self.nodes.push(Node {
            value,
            grad: None,
            requires_grad,
            op,
        });
        TensorId(self.nodes.len() - 1)
    }

    fn needs(&self, id: TensorId) -> bool {
        self.nodes[id.0].requires_grad
    }

    /// A constant input; no gradient flows into it.
    pub fn constant(&mut self, value: Mat) -> TensorId {
        self.push(value, false, Op::Leaf)
    }

    /// A trainable input.
    pub fn param(&mut self, value: Mat) -> TensorId {
        self.push(value, true, Op::Leaf)
    }

    pub fn value(&self, id: TensorId) -> &Mat {
        &self.nodes[id.0].value
    }

    pub fn grad(&self, id: TensorId) -> Option<&Mat> {
        self.nodes[id.0].grad.as_ref()
    }

    pub fn matmul(&mut self, a: TensorId, b: TensorId) -> TensorId {
        let value = self.nodes[a.0].value.matmul(&self.nodes[b.0].value);
        let rg = self.needs(a) || self.needs(b);
        self.push(value, rg, Op::MatMul(a, b))
    }

    pub fn add(&mut self, a: TensorId, b: TensorId) -> TensorId {
        let value = &self.nodes[a.0].value + &self.nodes[b.0].value;
        let rg = self.needs(a) || self.needs(b);
        self.push(value, rg, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: TensorId, b: TensorId) -> TensorId {
        let value = &self.nodes[a.0].value - &self.nodes[b.0].value;
        let rg = self.needs(a) || self.needs(b);
        self.push(value, rg, Op::Sub(a, b))
    }

    pub fn scale(&mut self, a: TensorId, s: f64) -> TensorId {
        let value = self.nodes[a.0].value.scale(s);
        let rg = self.needs(a);
        self.push(value, rg, Op::Scale(a, s))
    }

    /// ReLU; the subgradient at zero is zero.
    pub fn relu(&mut self, a: TensorId) -> TensorId {
        let value = self.nodes[a.0].value.map(|x| x.max(0.0));
        let rg = self.needs(a);
        self.push(value, rg, Op::Relu(a))
    }

    pub fn concat_cols(&mut self, parts: &[TensorId]) -> TensorId {
        assert!(!parts.is_empty());
        let rows = self.nodes[parts[0].0].value.rows();
        let total: usize = parts.iter().map(|p| self.nodes[p.0].value.cols()).sum();
        let mut value = Mat::zeros(rows, total);
        let mut offset = 0;
        for &p in parts {
            let m = &self.nodes[p.0].value;
            assert_eq!(m.rows(), rows, "concat_cols row mismatch");
            for i in 0..rows {
                value.row_mut(i)[offset..offset + m.cols()].copy_from_slice(m.row(i));
            }
            offset += m.cols();
        }
        let rg = parts.iter().any(|&p| self.needs(p));
        self.push(value, rg, Op::ConcatCols(parts.to_vec()))
    }

    /// Per pair (u, v): the concatenation `[input_row(u) | input_row(v)]`.
    pub fn gather_pairs(&mut self, a: TensorId, pairs: &[(usize, usize)]) -> TensorId {
        let m = &self.nodes[a.0].value;
        let c = m.cols();
        let mut value = Mat::zeros(pairs.len(), 2 * c);
        for (i, &(u, v)) in pairs.iter().enumerate() {
            value.row_mut(i)[..c].copy_from_slice(m.row(u));
            value.row_mut(i)[c..].copy_from_slice(m.row(v));
        }
        let rg = self.needs(a);
        self.push(value, rg, Op::GatherPairs(a, pairs.to_vec()))
    }

    /// Elementwise product with `mask` (inverted-dropout masks are already
    /// scaled by 1/keep).
    pub fn dropout(&mut self, a: TensorId, mask: Mat) -> TensorId {
        let value = self.nodes[a.0].value.hadamard(&mask);
        let rg = self.needs(a);
        self.push(value, rg, Op::Dropout(a, mask))
    }

    /// Mean softmax cross-entropy of `logits` over the selected rows against
    /// the aligned labels. Returns a 1x1 tensor.
    pub fn softmax_cross_entropy(
        &mut self,
        logits: TensorId,
        rows: &[usize],
        labels: &[usize],
    ) -> TensorId {
        assert_eq!(rows.len(), labels.len());
        assert!(!rows.is_empty(), "loss over an empty row set");
        let m = &self.nodes[logits.0].value;
        let mut total = 0.0;
        for (&row, &label) in rows.iter().zip(labels) {
            let r = m.row(row);
            let max = r.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
            let lse = max + r.iter().map(|&x| (x - max).exp()).sum::<f64>().ln();
            total += lse - r[label];
        }
        let value = Mat::from_rows(&[&[total / rows.len() as f64]]);
        let rg = self.needs(logits);
        self.push(
            value,
            rg,
            Op::SoftmaxCrossEntropy {
                logits,
                rows: rows.to_vec(),
                labels: labels.to_vec(),
            },
        )
    }

    fn accumulate(&mut self, id: TensorId, delta: Mat) {
        let node = &mut self.nodes[id.0];
        if !node.requires_grad {
            return;
        }
        match &mut node.grad {
            Some(g) => {
                for (x, y) in g.data_mut().iter_mut().zip(delta.data()) {
                    *x += y;
                }
            }
            None => node.grad = Some(delta),
        }
    }

    /// Reverse sweep from a scalar output. Gradients accumulate on every
    /// node with `requires_grad`, readable via [`Tape::grad`].
    pub fn backward(&mut self, output: TensorId) {
        assert_eq!(
            self.nodes[output.0].value.shape(),
            (1, 1),
            "backward needs a scalar output"
        );
        self.nodes[output.0].grad = Some(Mat::from_rows(&[&[1.0]]));
        for idx in (0..=output.0).rev() {
            if !self.nodes[idx].requires_grad {
                continue;
            }
            let Some(grad) = self.nodes[idx].grad.clone() else {
                continue;
            };
            // Ops are recorded append-only, so inputs always precede idx.
            match &self.nodes[idx].op {
                Op::Leaf => {}
                Op::MatMul(a, b) => {
                    let (a, b) = (*a, *b);
                    if self.needs(a) {
                        let bt = self.nodes[b.0].value.transpose();
                        self.accumulate(a, grad.matmul(&bt));
                    }
                    if self.needs(b) {
                        let at = self.nodes[a.0].value.transpose();
                        self.accumulate(b, at.matmul(&grad));
                    }
                }
                Op::Add(a, b) => {
                    let (a, b) = (*a, *b);
                    self.accumulate(a, grad.clone());
                    self.accumulate(b, grad);
                }
                Op::Sub(a, b) => {
                    let (a, b) = (*a, *b);
                    self.accumulate(a, grad.clone());
                    self.accumulate(b, -&grad);
                }
                Op::Scale(a, s) => {
                    let (a, s) = (*a, *s);
                    self.accumulate(a, grad.scale(s));
                }
                Op::Relu(a) => {
                    let a = *a;
                    let mask = self.nodes[a.0].value.map(|x| if x > 0.0 { 1.0 } else { 0.0 });
                    self.accumulate(a, grad.hadamard(&mask));
                }
                Op::ConcatCols(parts) => {
                    let parts = parts.clone();
                    let mut offset = 0;
                    for p in parts {
                        let cols = self.nodes[p.0].value.cols();
                        let rows = self.nodes[p.0].value.rows();
                        let mut slice = Mat::zeros(rows, cols);
                        for i in 0..rows {
                            slice
                                .row_mut(i)
                                .copy_from_slice(&grad.row(i)[offset..offset + cols]);
                        }
                        self.accumulate(p, slice);
                        offset += cols;
                    }
                }
                Op::GatherPairs(a, pairs) => {
                    let a = *a;
                    let pairs = pairs.clone();
                    let (rows, cols) = self.nodes[a.0].value.shape();
                    let mut acc = Mat::zeros(rows, cols);
                    for (i, (u, v)) in pairs.into_iter().enumerate() {
                        let g = grad.row(i);
                        for (j, &x) in g[..cols].iter().enumerate() {
                            acc[(u, j)] += x;
                        }
                        for (j, &x) in g[cols..].iter().enumerate() {
                            acc[(v, j)] += x;
                        }
                    }
                    self.accumulate(a, acc);
                }
                Op::Dropout(a, mask) => {
                    let a = *a;
                    let mask = mask.clone();
                    self.accumulate(a, grad.hadamard(&mask));
                }
                Op::SoftmaxCrossEntropy {
                    logits,
                    rows,
                    labels,
                } => {
                    let logits = *logits;
                    let rows = rows.clone();
                    let labels = labels.clone();
                    let g = grad[(0, 0)] / rows.len() as f64;
                    let value = &self.nodes[logits.0].value;
                    let mut acc = Mat::zeros(value.rows(), value.cols());
                    for (&row, &label) in rows.iter().zip(&labels) {
                        let r = value.row(row);
                        let max = r.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
                        let denom: f64 = r.iter().map(|&x| (x - max).exp()).sum();
                        for (c, &x) in r.iter().enumerate() {
                            let p = (x - max).exp() / denom;
                            let target = (c == label) as usize as f64;
                            acc[(row, c)] += (p - target) * g;
                        }
                    }
                    self.accumulate(logits, acc);
                }
            }
        }
    }
}
