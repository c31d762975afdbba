// Scratch experiment driver (not part of the library surface).
use quatgraph::graph::{degree_features, generate_dsbm, DsbmConfig};
use quatgraph::laplacian::LaplacianKind;
use quatgraph::nn::train::TrainTarget;
use quatgraph::nn::{evaluate, train, ModelConfig};
use quatgraph::split::{split_nodes, Task};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let scale: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(1.0);
    let f: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(32);
    let lr: f64 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(1e-3);
    let dropout: f64 = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(0.5);
    let max_epochs: usize = args.get(5).map(|s| s.parse().unwrap()).unwrap_or(1500);

    let cfg = DsbmConfig::di150(0.2, 7);
    let g = generate_dsbm(&cfg).unwrap();
    let labels = g.labels().unwrap().to_vec();
    let prop = LaplacianKind::Quaternionic.propagation(&g).unwrap();
    let x = degree_features(&g, false).scale(scale);

    let mut accs = Vec::new();
    let mut final_accs = Vec::new();
    for fold in 0..3u64 {
        let (train_idx, val_idx, test_idx) = split_nodes(&g, (0.6, 0.2, 0.2), fold).unwrap();
        let model = ModelConfig {
            f1: f,
            f2: f,
            dropout,
            learning_rate: lr,
            max_epochs,
            patience: 500,
            seed: fold,
            ..ModelConfig::default_for(Task::NodeClassification)
        };
        let target = TrainTarget::Nodes {
            labels: &labels,
            train: &train_idx,
            val: &val_idx,
        };
        let outcome = train(&model, &prop, &x, &target, 5).unwrap();
        let acc = evaluate(&outcome.params, &prop, &x, None, &labels, &test_idx).unwrap();
        // final-params run: no validation set disables best-val selection
        let target_final = TrainTarget::Nodes {
            labels: &labels,
            train: &train_idx,
            val: &[],
        };
        let outcome_final = train(&model, &prop, &x, &target_final, 5).unwrap();
        let acc_final =
            evaluate(&outcome_final.params, &prop, &x, None, &labels, &test_idx).unwrap();
        println!("  final-params test={acc_final:.4}");
        // also: accuracy of best-val params on val+test combined trajectory
        let best_val = outcome
            .history
            .iter()
            .map(|s| s.val_acc)
            .fold(f64::NEG_INFINITY, f64::max);
        accs.push(acc);
        final_accs.push(best_val);
        println!(
            "fold={fold} epochs={} best_epoch={:?} best_val={best_val:.3} test={acc:.4}",
            outcome.history.len(),
            outcome.best_epoch
        );
    }
    let mean = accs.iter().sum::<f64>() / accs.len() as f64;
    println!("scale={scale} f={f} lr={lr} dropout={dropout} mean_test={mean:.4}");
}
