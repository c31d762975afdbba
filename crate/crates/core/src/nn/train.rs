//! Full-batch training with Adam, dropout, and early stopping on validation
//! accuracy.
//!
//! One training run is single-threaded and fully determined by the model
//! seed: weight initialization and the per-epoch dropout masks come from
//! named substreams, and the propagation matrix is built once by the caller
//! and reused across epochs.

use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::nn::model::{accuracy, forward, init_params, predict, ModelConfig, ModelParams};
use crate::nn::tensor::Tape;
use crate::qmat::QMatrix;
use crate::rng::{stream, substream};
use rand::Rng;

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// What the network trains against.
#[derive(Clone, Copy, Debug)]
pub enum TrainTarget<'a> {
    Nodes {
        labels: &'a [usize],
        train: &'a [usize],
        val: &'a [usize],
    },
    Edges {
        pairs: &'a [(usize, usize)],
        labels: &'a [usize],
        train: &'a [usize],
        val: &'a [usize],
    },
}

impl<'a> TrainTarget<'a> {
    pub fn labels(&self) -> &'a [usize] {
        match self {
            TrainTarget::Nodes { labels, .. } | TrainTarget::Edges { labels, .. } => labels,
        }
    }

    pub fn train(&self) -> &'a [usize] {
        match self {
            TrainTarget::Nodes { train, .. } | TrainTarget::Edges { train, .. } => train,
        }
    }

    pub fn val(&self) -> &'a [usize] {
        match self {
            TrainTarget::Nodes { val, .. } | TrainTarget::Edges { val, .. } => val,
        }
    }

    pub fn pairs(&self) -> Option<&'a [(usize, usize)]> {
        match self {
            TrainTarget::Nodes { .. } => None,
            TrainTarget::Edges { pairs, .. } => Some(pairs),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochStat {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    /// NaN when the run has no validation set.
    pub val_acc: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    /// Best-validation parameters, or the final ones without a validation set.
    pub params: ModelParams,
    pub history: Vec<EpochStat>,
    pub best_epoch: Option<usize>,
}

/// `epoch,train_loss,train_acc,val_acc` rows.
pub fn history_csv(history: &[EpochStat]) -> String {
    let mut out = String::from("epoch,train_loss,train_acc,val_acc\n");
    for s in history {
        out.push_str(&format!(
            "{},{},{},{}\n",
            s.epoch, s.train_loss, s.train_acc, s.val_acc
        ));
    }
    out
}

struct Adam {
    m: Vec<Mat>,
    v: Vec<Mat>,
    t: usize,
}

impl Adam {
    fn new(shapes: &[(usize, usize)]) -> Self {
        Adam {
            m: shapes.iter().map(|&(r, c)| Mat::zeros(r, c)).collect(),
            v: shapes.iter().map(|&(r, c)| Mat::zeros(r, c)).collect(),
            t: 0,
        }
    }

    /// One update; weight decay enters the gradient (L2 style).
    fn step(&mut self, params: Vec<&mut Mat>, grads: &[Mat], lr: f64, wd: f64) {
        self.t += 1;
        let bc1 = 1.0 - ADAM_BETA1.powi(self.t as i32);
        let bc2 = 1.0 - ADAM_BETA2.powi(self.t as i32);
        for ((param, grad), (m, v)) in params
            .into_iter()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            for (((p, &g0), m), v) in param
                .data_mut()
                .iter_mut()
                .zip(grad.data())
                .zip(m.data_mut())
                .zip(v.data_mut())
            {
                let g = g0 + wd * *p;
                *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
                *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
                let mhat = *m / bc1;
                let vhat = *v / bc2;
                *p -= lr * mhat / (vhat.sqrt() + ADAM_EPS);
            }
        }
    }
}

fn param_shapes(params: &ModelParams) -> Vec<(usize, usize)> {
    let mut shapes = Vec::with_capacity(9);
    for t in 0..4 {
        shapes.push(params.theta1.comp(t).shape());
    }
    for t in 0..4 {
        shapes.push(params.theta2.comp(t).shape());
    }
    shapes.push(params.w.shape());
    shapes
}

/// Train the two-layer network. Full-batch cross-entropy over the train
/// indices; early stopping tracks validation accuracy with the configured
/// patience and the best-validation parameters are returned. With
/// `max_epochs = 0` the initialization is returned unchanged.
pub fn train(
    cfg: &ModelConfig,
    prop: &QMatrix,
    features: &Mat,
    target: &TrainTarget,
    num_classes: usize,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let labels = target.labels();
    let train_idx = target.train();
    let val_idx = target.val();
    if train_idx.is_empty() {
        return Err(Error::EmptyIndexSet);
    }
    let rows = target.pairs().map_or(prop.rows(), |p| p.len());
    for &i in train_idx.iter().chain(val_idx) {
        if i >= rows {
            return Err(Error::InvalidConfig(format!(
                "index {i} out of range for {rows} rows"
            )));
        }
        if labels[i] >= num_classes {
            return Err(Error::InvalidConfig(format!(
                "label {} out of range for {num_classes} classes",
                labels[i]
            )));
        }
    }

    let head_inputs = match target.pairs() {
        Some(_) => 8 * cfg.f2,
        None => 4 * cfg.f2,
    };
    let mut params = init_params(
        features.cols(),
        cfg.f1,
        cfg.f2,
        head_inputs,
        num_classes,
        cfg.seed,
    );
    let mut adam = Adam::new(&param_shapes(&params));
    let mut dropout_rng = substream(cfg.seed, stream::DROPOUT);

    let train_labels: Vec<usize> = train_idx.iter().map(|&i| labels[i]).collect();
    let mut history = Vec::new();
    let mut best: Option<(f64, usize, ModelParams)> = None;
    let mut stall = 0usize;

    for epoch in 1..=cfg.max_epochs {
        let mask = if cfg.dropout > 0.0 {
            let keep = 1.0 - cfg.dropout;
            let mut m = Mat::zeros(prop.rows(), 4 * cfg.f2);
            for x in m.data_mut() {
                *x = if dropout_rng.random::<f64>() < cfg.dropout {
                    0.0
                } else {
                    1.0 / keep
                };
            }
            Some(m)
        } else {
            None
        };

        let mut tape = Tape::new();
        let pass = forward(&mut tape, prop, features, &params, target.pairs(), mask)?;
        let loss_id = tape.softmax_cross_entropy(pass.logits, train_idx, &train_labels);
        let train_loss = tape.value(loss_id)[(0, 0)];
        if !train_loss.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        tape.backward(loss_id);

        let mut grads: Vec<Mat> = Vec::with_capacity(9);
        for t in 0..4 {
            grads.push(tape.grad(pass.theta1.comp[t]).expect("filter gradient").clone());
        }
        for t in 0..4 {
            grads.push(tape.grad(pass.theta2.comp[t]).expect("filter gradient").clone());
        }
        grads.push(tape.grad(pass.w).expect("head gradient").clone());
        drop(tape);

        {
            let mut handles: Vec<&mut Mat> = Vec::with_capacity(9);
            let (theta1, theta2, w) = (&mut params.theta1, &mut params.theta2, &mut params.w);
            // Split borrows: channel mats of theta1, then theta2, then w.
            let [a0, a1, a2, a3] = theta1.comps_mut();
            let [b0, b1, b2, b3] = theta2.comps_mut();
            handles.extend([a0, a1, a2, a3, b0, b1, b2, b3]);
            handles.push(w);
            adam.step(handles, &grads, cfg.learning_rate, cfg.weight_decay);
        }

        let logits = predict(prop, features, &params, target.pairs())?;
        let train_acc = accuracy(&logits, labels, train_idx)?;
        let val_acc = if val_idx.is_empty() {
            f64::NAN
        } else {
            accuracy(&logits, labels, val_idx)?
        };
        history.push(EpochStat {
            epoch,
            train_loss,
            train_acc,
            val_acc,
        });

        if !val_idx.is_empty() {
            let improved = best.as_ref().map_or(true, |(acc, _, _)| val_acc > *acc);
            if improved {
                best = Some((val_acc, epoch, params.clone()));
                stall = 0;
            } else {
                stall += 1;
                if stall >= cfg.patience {
                    break;
                }
            }
        }
    }

    let (params, best_epoch) = match best {
        Some((_, epoch, p)) => (p, Some(epoch)),
        None => (params, None),
    };
    Ok(TrainOutcome {
        params,
        history,
        best_epoch,
    })
}

/// Accuracy of a trained model on an index set.
pub fn evaluate(
    params: &ModelParams,
    prop: &QMatrix,
    features: &Mat,
    pairs: Option<&[(usize, usize)]>,
    labels: &[usize],
    indices: &[usize],
) -> Result<f64> {
    let logits = predict(prop, features, params, pairs)?;
    accuracy(&logits, labels, indices)
}

/// Inverted-dropout mask with the given keep probability complement; used by
/// gradient-check tests that need a fixed mask.
pub fn dropout_mask(rows: usize, cols: usize, p: f64, rng: &mut impl Rng) -> Mat {
    let keep = 1.0 - p;
    let mut m = Mat::zeros(rows, cols);
    for x in m.data_mut() {
        *x = if rng.random::<f64>() < p { 0.0 } else { 1.0 / keep };
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{degree_features, generate_dsbm, DsbmConfig};
    use crate::laplacian::LaplacianKind;
    use crate::split::split_nodes;

    fn toy_setup() -> (QMatrix, Mat, Vec<usize>, Vec<usize>, Vec<usize>) {
        // Two-cluster digon-free DSBM, linearly separable by degree features.
        let mut cfg = DsbmConfig::di150(0.0, 5);
        cfg.nodes_per_cluster = 20;
        cfg.clusters = 2;
        cfg.intra_prob = 0.05;
        cfg.inter_prob = 0.8;
        cfg.direction_prob = 0.95;
        let g = generate_dsbm(&cfg).unwrap();
        let prop = LaplacianKind::Quaternionic.propagation(&g).unwrap();
        let x = degree_features(&g, false);
        let (train_idx, val_idx, _test) = split_nodes(&g, (0.6, 0.2, 0.2), 3).unwrap();
        (prop, x, g.labels().unwrap().to_vec(), train_idx, val_idx)
    }

    fn toy_config() -> ModelConfig {
        ModelConfig {
            f1: 8,
            f2: 8,
            max_epochs: 500,
            patience: 500,
            seed: 11,
            ..ModelConfig::default_for(crate::split::Task::NodeClassification)
        }
    }

    #[test]
    fn toy_two_cluster_reaches_full_training_accuracy() {
        let (prop, x, labels, train_idx, val_idx) = toy_setup();
        let target = TrainTarget::Nodes {
            labels: &labels,
            train: &train_idx,
            val: &val_idx,
        };
        let outcome = train(&toy_config(), &prop, &x, &target, 2).unwrap();
        let reached = outcome
            .history
            .iter()
            .any(|s| s.train_acc == 1.0);
        assert!(
            reached,
            "training accuracy never reached 1.0; final {:?}",
            outcome.history.last()
        );
    }

    #[test]
    fn zero_epochs_returns_initialization() {
        let (prop, x, labels, train_idx, val_idx) = toy_setup();
        let target = TrainTarget::Nodes {
            labels: &labels,
            train: &train_idx,
            val: &val_idx,
        };
        let mut cfg = toy_config();
        cfg.max_epochs = 0;
        let outcome = train(&cfg, &prop, &x, &target, 2).unwrap();
        assert!(outcome.history.is_empty());
        let init = init_params(x.cols(), cfg.f1, cfg.f2, 4 * cfg.f2, 2, cfg.seed);
        assert_eq!(outcome.params, init);
    }

    #[test]
    fn identical_seed_identical_trajectory() {
        let (prop, x, labels, train_idx, val_idx) = toy_setup();
        let target = TrainTarget::Nodes {
            labels: &labels,
            train: &train_idx,
            val: &val_idx,
        };
        let mut cfg = toy_config();
        cfg.max_epochs = 40;
        let a = train(&cfg, &prop, &x, &target, 2).unwrap();
        let b = train(&cfg, &prop, &x, &target, 2).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.params, b.params);

        cfg.seed = 12;
        let c = train(&cfg, &prop, &x, &target, 2).unwrap();
        assert_ne!(a.history, c.history);
    }

    #[test]
    fn evaluation_is_deterministic_despite_dropout_config() {
        let (prop, x, labels, train_idx, val_idx) = toy_setup();
        let target = TrainTarget::Nodes {
            labels: &labels,
            train: &train_idx,
            val: &val_idx,
        };
        let mut cfg = toy_config();
        cfg.max_epochs = 20;
        let outcome = train(&cfg, &prop, &x, &target, 2).unwrap();
        let a = evaluate(&outcome.params, &prop, &x, None, &labels, &train_idx).unwrap();
        let b = evaluate(&outcome.params, &prop, &x, None, &labels, &train_idx).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn random_predictor_sits_at_chance_over_five_classes() {
        let mut rng = substream(123, 60);
        let samples = 1000;
        let classes = 5;
        let mut logits = Mat::zeros(samples, classes);
        for x in logits.data_mut() {
            *x = rng.random_range(-1.0..1.0);
        }
        let labels: Vec<usize> = (0..samples).map(|_| rng.random_range(0..classes)).collect();
        let indices: Vec<usize> = (0..samples).collect();
        let acc = accuracy(&logits, &labels, &indices).unwrap();
        assert!(
            (acc - 0.2).abs() <= 0.05,
            "random predictor accuracy {acc} not within 0.2 +- 0.05"
        );
    }

    #[test]
    fn history_csv_format() {
        let history = vec![EpochStat {
            epoch: 1,
            train_loss: 1.5,
            train_acc: 0.25,
            val_acc: 0.5,
        }];
        assert_eq!(
            history_csv(&history),
            "epoch,train_loss,train_acc,val_acc\n1,1.5,0.25,0.5\n"
        );
    }
}
