//! Per-node topological input features for the graph embedder.
//!
//! Four columns in fixed order: degree, neighborhood chi-square statistic,
//! local clustering coefficient, k-core number. All four are permutation
//! equivariant and cheap to compute on the canonical [`Graph`].

use crate::graph::Graph;
use serde::{Deserialize, Serialize};

/// Number of feature columns.
pub const FEATURE_DIM: usize = 4;

/// Feature scaling mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureScaling {
    /// Raw values: integer degree/k-core, clustering in [0, 1].
    Raw,
    /// `ln(1 + x)` on degree, chi-square, and k-core; clustering untouched.
    ///
    /// Compresses the heavy-tailed columns into a trainable range while
    /// keeping absolute levels comparable across graphs — a graph whose
    /// clustering collapses still looks different after scaling.
    Log1p,
    /// [`FeatureScaling::Log1p`] followed by a per-graph z-score of every
    /// column. Zero-variance columns become all zeros. Note that this
    /// erases graph-level feature scales: only within-graph variation
    /// survives.
    Log1pStandardized,
}

/// Node-feature table: one row per node, [`FEATURE_DIM`] columns ordered
/// (degree, chi_square, local_clustering, k_core).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub rows: Vec<[f64; FEATURE_DIM]>,
    pub scaling: FeatureScaling,
}

impl FeatureMatrix {
    pub fn node_count(&self) -> usize {
        self.rows.len()
    }

    /// CSV dump with the documented header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("node,degree,chi2,clustering,kcore\n");
        for (v, row) in self.rows.iter().enumerate() {
            out.push_str(&format!(
                "{v},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                row[0], row[1], row[2], row[3]
            ));
        }
        out
    }
}

/// k-core numbers by the linear-time bucket peeling algorithm.
///
/// `core(v)` is the largest k such that v survives in the maximal subgraph
/// of minimum degree k.
pub fn k_core_numbers(g: &Graph) -> Vec<usize> {
    let n = g.node_count();
    if n == 0 {
        return Vec::new();
    }
    let mut deg = g.degrees();
    let md = deg.iter().copied().max().unwrap_or(0);

    // counting-sort nodes by degree; bin[d] = start of degree-d block
    let mut bin = vec![0usize; md + 2];
    for &d in &deg {
        bin[d + 1] += 1;
    }
    for d in 1..bin.len() {
        bin[d] += bin[d - 1];
    }
    let mut vert = vec![0usize; n];
    let mut pos = vec![0usize; n];
    {
        let mut next = bin.clone();
        for v in 0..n {
            pos[v] = next[deg[v]];
            vert[pos[v]] = v;
            next[deg[v]] += 1;
        }
    }

    for i in 0..n {
        let v = vert[i];
        for idx in 0..g.neighbors(v).len() {
            let u = g.neighbors(v)[idx];
            if deg[u] > deg[v] {
                // swap u with the first unprocessed node of its degree block
                let du = deg[u];
                let pu = pos[u];
                let pw = bin[du];
                let w = vert[pw];
                if u != w {
                    vert.swap(pu, pw);
                    pos[u] = pw;
                    pos[w] = pu;
                }
                bin[du] += 1;
                deg[u] -= 1;
            }
        }
    }
    // after peeling, deg holds the core numbers
    deg
}

/// Local clustering coefficient: `2 tri(v) / (deg(v) (deg(v) - 1))`,
/// 0 for nodes of degree < 2.
pub fn local_clustering(g: &Graph) -> Vec<f64> {
    let tri = g.triangles_per_node();
    (0..g.node_count())
        .map(|v| {
            let d = g.degree(v);
            if d < 2 {
                0.0
            } else {
                2.0 * tri[v] as f64 / (d as f64 * (d as f64 - 1.0))
            }
        })
        .collect()
}

/// Chi-square statistic of neighbor degrees against their own mean:
/// `sum_u (deg(u) - mean)^2 / mean` over u in N(v). Isolated nodes get 0;
/// a regular neighborhood gives exactly 0.
pub fn chi_square_neighborhood(g: &Graph) -> Vec<f64> {
    (0..g.node_count())
        .map(|v| {
            let nbrs = g.neighbors(v);
            if nbrs.is_empty() {
                return 0.0;
            }
            // sum in sorted-degree order so the value is exactly invariant
            // under node relabeling
            let mut degs: Vec<usize> = nbrs.iter().map(|&u| g.degree(u)).collect();
            degs.sort_unstable();
            let mean = degs.iter().sum::<usize>() as f64 / degs.len() as f64;
            degs.iter()
                .map(|&d| {
                    let diff = d as f64 - mean;
                    diff * diff
                })
                .sum::<f64>()
                / mean
        })
        .collect()
}

/// Assemble the 4-column feature table under the requested scaling.
pub fn node_features(g: &Graph, scaling: FeatureScaling) -> FeatureMatrix {
    let chi = chi_square_neighborhood(g);
    let clus = local_clustering(g);
    let core = k_core_numbers(g);
    let mut rows: Vec<[f64; FEATURE_DIM]> = (0..g.node_count())
        .map(|v| [g.degree(v) as f64, chi[v], clus[v], core[v] as f64])
        .collect();
    if scaling != FeatureScaling::Raw {
        for row in &mut rows {
            row[0] = row[0].ln_1p();
            row[1] = row[1].ln_1p();
            row[3] = row[3].ln_1p();
        }
    }
    if scaling == FeatureScaling::Log1pStandardized {
        standardize_columns(&mut rows);
    }
    FeatureMatrix { rows, scaling }
}

/// Per-column z-score over rows; zero-variance columns become all zeros.
///
/// Reductions run in sorted-value order so the result is exactly invariant
/// under node relabeling.
fn standardize_columns(rows: &mut [[f64; FEATURE_DIM]]) {
    let n = rows.len();
    if n == 0 {
        return;
    }
    for c in 0..FEATURE_DIM {
        let mut sorted: Vec<f64> = rows.iter().map(|r| r[c]).collect();
        sorted.sort_by(f64::total_cmp);
        let mean = sorted.iter().sum::<f64>() / n as f64;
        let var = sorted.iter().map(|&x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        if var > 0.0 {
            let inv = 1.0 / var.sqrt();
            for r in rows.iter_mut() {
                r[c] = (r[c] - mean) * inv;
            }
        } else {
            for r in rows.iter_mut() {
                r[c] = 0.0;
            }
        }
    }
}
