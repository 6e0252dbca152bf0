//! Train the triplet embedder on a small two-class corpus and watch the
//! validation loss fall.
//!
//! ```sh
//! cargo run --release --example train_embedder
//! ```

use ggm_eval::embed::{train, Architecture, GraphItem, TrainConfig};
use ggm_eval::features::{node_features, FeatureScaling};
use ggm_eval::generators::{gen_ba, gen_er};

fn main() -> ggm_eval::Result<()> {
    let mut train_set = Vec::new();
    let mut val_set = Vec::new();
    for s in 0..25u64 {
        for (class, graph) in [(0usize, gen_er(150, 0.05, s)?), (1, gen_ba(150, 4, s)?)] {
            let item = GraphItem {
                features: node_features(&graph, FeatureScaling::Log1pStandardized),
                graph,
                class,
            };
            if s < 20 {
                train_set.push(item);
            } else {
                val_set.push(item);
            }
        }
    }

    let cfg = TrainConfig {
        max_epochs: 60,
        triplets_per_epoch: 100,
        val_triplets: 80,
        seed: 3,
        ..TrainConfig::default()
    };
    let (params, history) = train(&train_set, &val_set, Architecture::standard(2), &cfg)?;

    println!("epoch  train_loss  val_loss");
    for e in history.iter().step_by(5) {
        println!("{:>5}  {:>10.4}  {:>8.4}", e.epoch, e.train_loss, e.val_loss);
    }
    let last = history.last().unwrap();
    println!("...\n{:>5}  {:>10.4}  {:>8.4}", last.epoch, last.train_loss, last.val_loss);
    println!(
        "\n{} parameters trained for {} epochs; best validation loss {:.4}",
        params.n_params(),
        history.len(),
        history.iter().map(|e| e.val_loss).fold(f64::INFINITY, f64::min)
    );
    Ok(())
}
