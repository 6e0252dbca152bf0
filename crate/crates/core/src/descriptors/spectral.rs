//! Normalized-Laplacian spectrum descriptor.

use super::{Histogram, HistogramKind};
use crate::error::{Error, Result};
use crate::graph::Graph;
use nalgebra::DMatrix;

/// Eigenvalues of the symmetric normalized Laplacian live in [0, 2].
pub const SPECTRAL_RANGE: (f64, f64) = (0.0, 2.0);

/// Dense eigendecomposition budget.
const EIGEN_CUTOFF: usize = 3000;

/// Eigenvalues of `L = I - D^{-1/2} A D^{-1/2}`, ascending.
///
/// Isolated nodes contribute eigenvalue 0 (their Laplacian row is zero).
pub fn normalized_laplacian_eigenvalues(g: &Graph) -> Result<Vec<f64>> {
    let n = g.node_count();
    if n > EIGEN_CUTOFF {
        return Err(Error::Capability(format!(
            "spectral descriptor: dense eigendecomposition is limited to {EIGEN_CUTOFF} nodes \
             (graph has {n})"
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let inv_sqrt_deg: Vec<f64> = (0..n)
        .map(|v| {
            let d = g.degree(v);
            if d == 0 {
                0.0
            } else {
                1.0 / (d as f64).sqrt()
            }
        })
        .collect();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for v in 0..n {
        if g.degree(v) > 0 {
            l[(v, v)] = 1.0;
        }
    }
    for &(u, v) in g.edges() {
        let w = -inv_sqrt_deg[u] * inv_sqrt_deg[v];
        l[(u, v)] = w;
        l[(v, u)] = w;
    }
    let mut eigs: Vec<f64> = l.symmetric_eigen().eigenvalues.iter().copied().collect();
    eigs.sort_by(f64::total_cmp);
    Ok(eigs)
}

/// Spectrum histogram over `bins` uniform bins on [0, 2].
pub fn spectral_descriptor(g: &Graph, bins: usize) -> Result<Histogram> {
    if bins < 1 {
        return Err(Error::Argument("spectral_descriptor: bins must be >= 1".into()));
    }
    let eigs = normalized_laplacian_eigenvalues(g)?;
    Ok(Histogram::uniform(
        &eigs,
        SPECTRAL_RANGE.0,
        SPECTRAL_RANGE.1,
        bins,
        HistogramKind::Spectral,
    ))
}
