//! Compute the four per-node topological features for one scale-free graph
//! and print the head of the table.
//!
//! ```sh
//! cargo run --example node_features
//! ```

use ggm_eval::features::{node_features, FeatureScaling};
use ggm_eval::generators::gen_ba;

fn main() -> ggm_eval::Result<()> {
    let g = gen_ba(200, 4, 11)?;
    let raw = node_features(&g, FeatureScaling::Raw);
    let scaled = node_features(&g, FeatureScaling::Log1pStandardized);

    println!("node  degree    chi2  clust  kcore | standardized row");
    for v in 0..10 {
        let r = &raw.rows[v];
        let s = &scaled.rows[v];
        println!(
            "{v:>4}  {:>6} {:>7.2} {:>6.3} {:>6} | {:+.3} {:+.3} {:+.3} {:+.3}",
            r[0] as usize, r[1], r[2], r[3] as usize, s[0], s[1], s[2], s[3]
        );
    }

    // the hub dominates; find it
    let hub = (0..g.node_count()).max_by_key(|&v| g.degree(v)).unwrap();
    println!(
        "\nhub: node {hub} with degree {} (k-core {})",
        g.degree(hub),
        raw.rows[hub][3] as usize
    );
    println!("\nCSV dump (first lines):");
    for line in raw.to_csv().lines().take(4) {
        println!("{line}");
    }
    Ok(())
}
