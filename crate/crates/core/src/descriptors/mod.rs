//! Graph-level statistical descriptors feeding the MMD suite.
//!
//! Five descriptor kinds: degree histogram, local-clustering histogram,
//! graphlet orbit counts, normalized-Laplacian spectrum histogram, and NSPDK
//! sparse features. All are isomorphism invariant.

mod nspdk;
mod orbits;
mod spectral;

pub use nspdk::{nspdk_features, SparseCounts};
pub use orbits::{orbit_counts, OrbitDescriptor, ORBITS_4, ORBITS_5};
pub use spectral::{normalized_laplacian_eigenvalues, spectral_descriptor, SPECTRAL_RANGE};

use crate::error::{Error, Result};
use crate::graph::Graph;
use serde::{Deserialize, Serialize};

/// What a histogram describes; kernels refuse to mix kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HistogramKind {
    Degree,
    Clustering,
    Spectral,
}

/// Probability-mass histogram over fixed bin edges.
///
/// Mass sums to 1, or is all-zero for an empty sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// Bin edges, length `mass.len() + 1`; bin i covers `[edges[i], edges[i+1])`,
    /// with the last bin closed on the right.
    pub edges: Vec<f64>,
    pub mass: Vec<f64>,
    pub kind: HistogramKind,
}

impl Histogram {
    /// Build from samples over `bins` uniform bins spanning `[lo, hi]`.
    fn uniform(values: &[f64], lo: f64, hi: f64, bins: usize, kind: HistogramKind) -> Histogram {
        let edges: Vec<f64> = (0..=bins)
            .map(|i| lo + (hi - lo) * i as f64 / bins as f64)
            .collect();
        let mut mass = vec![0f64; bins];
        for &x in values {
            let t = ((x - lo) / (hi - lo) * bins as f64).floor();
            let idx = (t.max(0.0) as usize).min(bins - 1);
            mass[idx] += 1.0;
        }
        if !values.is_empty() {
            let inv = 1.0 / values.len() as f64;
            for m in &mut mass {
                *m *= inv;
            }
        }
        Histogram { edges, mass, kind }
    }

    pub fn bin_width(&self) -> f64 {
        if self.edges.len() < 2 {
            0.0
        } else {
            self.edges[1] - self.edges[0]
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }
}

/// Degree histogram with integer bins `0..=max_bin`; larger degrees clip
/// into the last bin.
pub fn degree_histogram(g: &Graph, max_bin: usize) -> Result<Histogram> {
    if max_bin < 1 {
        return Err(Error::Argument("degree_histogram: max_bin must be >= 1".into()));
    }
    let edges: Vec<f64> = (0..=max_bin + 1).map(|i| i as f64).collect();
    let mut mass = vec![0f64; max_bin + 1];
    for v in 0..g.node_count() {
        mass[g.degree(v).min(max_bin)] += 1.0;
    }
    if g.node_count() > 0 {
        let inv = 1.0 / g.node_count() as f64;
        for m in &mut mass {
            *m *= inv;
        }
    }
    Ok(Histogram {
        edges,
        mass,
        kind: HistogramKind::Degree,
    })
}

/// Local clustering coefficients binned uniformly on [0, 1].
pub fn clustering_histogram(g: &Graph, bins: usize) -> Result<Histogram> {
    if bins < 1 {
        return Err(Error::Argument("clustering_histogram: bins must be >= 1".into()));
    }
    let values = crate::features::local_clustering(g);
    Ok(Histogram::uniform(
        &values,
        0.0,
        1.0,
        bins,
        HistogramKind::Clustering,
    ))
}
