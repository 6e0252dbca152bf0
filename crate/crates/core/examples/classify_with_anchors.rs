//! Dynamic-k anchor classification: train a small model, embed the training
//! graphs as anchors, classify held-out probes, and print the confusion
//! matrix.
//!
//! ```sh
//! cargo run --release --example classify_with_anchors
//! ```

use ggm_eval::embed::{embed, train, Architecture, GraphItem, TrainConfig};
use ggm_eval::features::{node_features, FeatureScaling};
use ggm_eval::generators::{gen_ba, gen_er, gen_sbm};
use ggm_eval::graph::Graph;
use ggm_eval::knn::{classify, confusion_matrix, dynamic_k, AnchorIndex};

fn make(class: usize, seed: u64) -> ggm_eval::Result<GraphItem> {
    let graph: Graph = match class {
        0 => gen_ba(150, 4, seed)?,
        1 => gen_er(150, 0.055, seed)?,
        _ => gen_sbm(
            &[50, 50, 50],
            &[
                vec![0.25, 0.01, 0.01],
                vec![0.01, 0.25, 0.01],
                vec![0.01, 0.01, 0.25],
            ],
            seed,
        )?,
    };
    Ok(GraphItem {
        features: node_features(&graph, FeatureScaling::Log1pStandardized),
        graph,
        class,
    })
}

fn main() -> ggm_eval::Result<()> {
    let classes: Vec<String> = ["BA", "ER", "SBM"].iter().map(|s| s.to_string()).collect();
    let mut anchors = Vec::new();
    let mut val = Vec::new();
    let mut probes = Vec::new();
    for class in 0..3 {
        for s in 0..36u64 {
            let item = make(class, 1000 * class as u64 + s)?;
            match s {
                0..=24 => anchors.push(item),
                25..=29 => val.push(item),
                _ => probes.push(item),
            }
        }
    }

    let cfg = TrainConfig {
        max_epochs: 60,
        triplets_per_epoch: 120,
        val_triplets: 60,
        seed: 17,
        ..TrainConfig::default()
    };
    let (params, _) = train(&anchors, &val, Architecture::standard(3), &cfg)?;

    let embeddings: Vec<Vec<f64>> = anchors
        .iter()
        .map(|it| embed(&it.graph, &it.features, &params))
        .collect::<Result<_, _>>()?;
    let labels: Vec<usize> = anchors.iter().map(|it| it.class).collect();
    println!(
        "anchor index: {} anchors, per-class k = {}",
        embeddings.len(),
        dynamic_k(anchors.len() / 3)
    );
    let index = AnchorIndex::build(embeddings, labels, 3)?;

    let mut preds = Vec::new();
    let mut truth = Vec::new();
    for it in &probes {
        let h = embed(&it.graph, &it.features, &params)?;
        preds.push(classify(&h, &index)?.0);
        truth.push(it.class);
    }
    let cm = confusion_matrix(&preds, &truth, &classes)?;
    print!("{}", cm.to_csv());
    Ok(())
}
