//! Generate the five synthetic corpus classes and print their statistics.
//!
//! ```sh
//! cargo run --release --example generate_corpus -- /tmp/corpus
//! ```

use ggm_eval::harness::{corpus_stats, generate_corpus, ExperimentConfig};
use std::path::PathBuf;

fn main() -> ggm_eval::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("ggm-eval-corpus"));

    let cfg = ExperimentConfig {
        n_nodes: 300,
        graphs_per_class: 20,
        master_seed: 7,
        ..ExperimentConfig::default()
    };
    let manifest = generate_corpus(&cfg, &out)?;
    let loaded = manifest.load_graphs(&out)?;

    println!("{:<6} {:>7} {:>9} {:>9} {:>9} {:>9}", "class", "graphs", "min_n", "max_n", "min_m", "max_m");
    for s in corpus_stats(&loaded) {
        println!(
            "{:<6} {:>7} {:>9} {:>9} {:>9} {:>9}",
            s.class, s.count, s.min_nodes, s.max_nodes, s.min_edges, s.max_edges
        );
    }
    println!("\nmanifest: {}", out.join("corpus_manifest.csv").display());
    Ok(())
}
