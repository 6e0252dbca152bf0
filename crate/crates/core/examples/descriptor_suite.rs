//! Compute all five graph descriptors for a single graph: degree histogram,
//! clustering histogram, graphlet orbit counts, normalized-Laplacian
//! spectrum, and NSPDK sparse features.
//!
//! ```sh
//! cargo run --example descriptor_suite
//! ```

use ggm_eval::descriptors::{
    clustering_histogram, degree_histogram, normalized_laplacian_eigenvalues, nspdk_features,
    orbit_counts, spectral_descriptor,
};
use ggm_eval::generators::gen_er;

fn main() -> ggm_eval::Result<()> {
    let g = gen_er(120, 0.06, 3)?;
    println!("graph: {} nodes, {} edges", g.node_count(), g.edge_count());

    let dh = degree_histogram(&g, g.max_degree())?;
    let peak = dh
        .mass
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    println!("degree histogram: mode at degree {} (mass {:.3})", peak.0, peak.1);

    let ch = clustering_histogram(&g, 20)?;
    println!("clustering histogram: mass at zero bin {:.3}", ch.mass[0]);

    let orbits = orbit_counts(&g, 4)?;
    println!("orbit means (orbits 0..7): {:?}",
        orbits.graph_vector[..8]
            .iter()
            .map(|x| (x * 100.0).round() / 100.0)
            .collect::<Vec<_>>());

    let eigs = normalized_laplacian_eigenvalues(&g)?;
    println!(
        "spectrum: lambda_min {:.4}, lambda_2 {:.4}, lambda_max {:.4}",
        eigs[0],
        eigs[1],
        eigs[eigs.len() - 1]
    );
    let sh = spectral_descriptor(&g, 200)?;
    println!("spectral histogram mass sums to {:.12}", sh.total_mass());

    let counts = nspdk_features(&g, 2, 3);
    println!("nspdk: {} distinct features", counts.len());
    Ok(())
}
