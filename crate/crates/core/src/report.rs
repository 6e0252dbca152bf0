//! Topological-property comparison between reference and generated ensembles.

use crate::error::Result;
use crate::features::{k_core_numbers, local_clustering};
use crate::graph::{bfs_eccentricity_sample, connected_components, Graph};
use crate::seed::fnv1a;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Exact diameter/path-length computation is limited to this component size;
/// larger components are sampled.
const EXACT_DISTANCE_CUTOFF: usize = 5000;

/// Per-graph topological summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopoSummary {
    /// Degree assortativity; `None` when endpoint-degree variance is zero
    /// (e.g. regular graphs).
    pub assortativity: Option<f64>,
    pub density: f64,
    pub avg_clustering: f64,
    pub transitivity: f64,
    /// Diameter of the largest connected component.
    pub diameter: usize,
    /// Average path length over the largest connected component.
    pub apl: f64,
    pub n_components: usize,
    pub lcc_size: usize,
    /// Second-largest component size; 0 when the graph is connected.
    pub slcc_size: usize,
    pub max_kcore: usize,
}

impl TopoSummary {
    /// Property names in report order.
    pub const PROPERTIES: [&'static str; 10] = [
        "assortativity",
        "density",
        "avg_clustering",
        "transitivity",
        "diameter",
        "apl",
        "n_components",
        "lcc_size",
        "slcc_size",
        "max_kcore",
    ];

    /// Value of a named property; `None` only for undefined assortativity.
    pub fn value(&self, property: &str) -> Option<f64> {
        match property {
            "assortativity" => self.assortativity,
            "density" => Some(self.density),
            "avg_clustering" => Some(self.avg_clustering),
            "transitivity" => Some(self.transitivity),
            "diameter" => Some(self.diameter as f64),
            "apl" => Some(self.apl),
            "n_components" => Some(self.n_components as f64),
            "lcc_size" => Some(self.lcc_size as f64),
            "slcc_size" => Some(self.slcc_size as f64),
            "max_kcore" => Some(self.max_kcore as f64),
            _ => None,
        }
    }
}

/// Pearson correlation of endpoint degrees over edges, both orientations.
fn assortativity(g: &Graph) -> Option<f64> {
    if g.edge_count() == 0 {
        return None;
    }
    let deg = g.degrees();
    let m2 = (2 * g.edge_count()) as f64;
    let mut sum_x = 0f64;
    let mut sum_x2 = 0f64;
    let mut sum_xy = 0f64;
    for &(u, v) in g.edges() {
        let (du, dv) = (deg[u] as f64, deg[v] as f64);
        sum_x += du + dv;
        sum_x2 += du * du + dv * dv;
        sum_xy += 2.0 * du * dv;
    }
    let mean = sum_x / m2;
    let var = sum_x2 / m2 - mean * mean;
    if var <= 1e-15 {
        return None;
    }
    Some((sum_xy / m2 - mean * mean) / var)
}

/// Full topological summary of one graph.
///
/// Distances are exact when the largest component has at most 5000 nodes;
/// beyond that they are estimated from `max(100, ceil(sqrt(|LCC|)))` BFS
/// sources chosen by a seed derived from the graph itself, so the summary
/// stays a pure function of the graph.
pub fn topo_summary(g: &Graph) -> TopoSummary {
    let n = g.node_count();
    let parts = connected_components(g);
    let lcc = parts.largest_component();
    let lcc_size = lcc.len();
    let slcc_size = parts.sizes.get(1).copied().unwrap_or(0);

    let (diameter, apl) = if lcc_size <= 1 {
        (0, 0.0)
    } else if lcc_size <= EXACT_DISTANCE_CUTOFF {
        bfs_eccentricity_sample(g, &lcc, true).expect("sources lie in the LCC")
    } else {
        let want = ((lcc_size as f64).sqrt().ceil() as usize).max(100);
        let mut hash_input = Vec::with_capacity(16);
        hash_input.extend_from_slice(&(n as u64).to_le_bytes());
        hash_input.extend_from_slice(&(g.edge_count() as u64).to_le_bytes());
        let mut rng = crate::seed::stage_rng(fnv1a(&hash_input), "topo-distance", 0);
        use rand::Rng;
        let mut sources = Vec::with_capacity(want);
        for _ in 0..want {
            sources.push(lcc[rng.random_range(0..lcc.len())]);
        }
        sources.sort_unstable();
        sources.dedup();
        bfs_eccentricity_sample(g, &sources, true).expect("sources lie in the LCC")
    };

    let clustering = local_clustering(g);
    let avg_clustering = if n == 0 {
        0.0
    } else {
        clustering.iter().sum::<f64>() / n as f64
    };
    let tri = g.triangles_per_node();
    let triangles: usize = tri.iter().sum::<usize>() / 3;
    let triples: usize = (0..n).map(|v| g.degree(v) * g.degree(v).saturating_sub(1) / 2).sum();
    let transitivity = if triples == 0 {
        0.0
    } else {
        3.0 * triangles as f64 / triples as f64
    };
    let density = if n < 2 {
        0.0
    } else {
        2.0 * g.edge_count() as f64 / (n as f64 * (n as f64 - 1.0))
    };

    TopoSummary {
        assortativity: assortativity(g),
        density,
        avg_clustering,
        transitivity,
        diameter,
        apl,
        n_components: parts.sizes.len(),
        lcc_size,
        slcc_size,
        max_kcore: k_core_numbers(g).into_iter().max().unwrap_or(0),
    }
}

/// Mean / median / interquartile range of one property over one ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyStats {
    pub mean: f64,
    pub median: f64,
    pub iqr: f64,
    /// Graphs whose value was undefined and therefore excluded.
    pub excluded: usize,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

fn property_stats(values: &[Option<f64>]) -> PropertyStats {
    let mut defined: Vec<f64> = values.iter().flatten().copied().collect();
    let excluded = values.len() - defined.len();
    defined.sort_by(f64::total_cmp);
    if defined.is_empty() {
        return PropertyStats {
            mean: 0.0,
            median: 0.0,
            iqr: 0.0,
            excluded,
        };
    }
    PropertyStats {
        mean: defined.iter().sum::<f64>() / defined.len() as f64,
        median: quantile(&defined, 0.5),
        iqr: quantile(&defined, 0.75) - quantile(&defined, 0.25),
        excluded,
    }
}

/// One property's comparison between the two ensembles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyComparison {
    pub property: String,
    pub reference: PropertyStats,
    pub generated: PropertyStats,
    /// Absolute difference of ensemble means.
    pub mean_gap: f64,
    /// `mean_gap / max(reference IQR, generated IQR)`; `None` when both
    /// spreads are zero.
    pub gap_over_iqr: Option<f64>,
}

/// Property-by-property comparison of two ensembles, plus the per-graph
/// summaries it was computed from (for long-format output).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<PropertyComparison>,
    pub reference_summaries: Vec<TopoSummary>,
    pub generated_summaries: Vec<TopoSummary>,
}

impl ComparisonTable {
    /// Summary CSV: one row per property.
    pub fn to_summary_csv(&self) -> String {
        let mut out = String::from(
            "property,ref_mean,ref_median,ref_iqr,gen_mean,gen_median,gen_iqr,mean_gap,gap_over_iqr,excluded_ref,excluded_gen\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{}\n",
                r.property,
                r.reference.mean,
                r.reference.median,
                r.reference.iqr,
                r.generated.mean,
                r.generated.median,
                r.generated.iqr,
                r.mean_gap,
                r.gap_over_iqr
                    .map_or("".to_string(), |v| format!("{v:.16e}")),
                r.reference.excluded,
                r.generated.excluded,
            ));
        }
        out
    }

    /// Plot-ready long format: one row per (property, ensemble, graph).
    pub fn to_long_csv(&self, class: &str) -> String {
        let mut out = String::from("class,property,ensemble,graph_index,value\n");
        for property in TopoSummary::PROPERTIES {
            for (ensemble, summaries) in [
                ("reference", &self.reference_summaries),
                ("generated", &self.generated_summaries),
            ] {
                for (i, s) in summaries.iter().enumerate() {
                    if let Some(v) = s.value(property) {
                        out.push_str(&format!("{class},{property},{ensemble},{i},{v:.16e}\n"));
                    }
                }
            }
        }
        out
    }
}

/// Compare two ensembles property by property.
pub fn compare_ensembles(reference: &[Graph], generated: &[Graph]) -> Result<ComparisonTable> {
    let reference_summaries: Vec<TopoSummary> = reference.par_iter().map(topo_summary).collect();
    let generated_summaries: Vec<TopoSummary> = generated.par_iter().map(topo_summary).collect();
    let rows = TopoSummary::PROPERTIES
        .iter()
        .map(|&property| {
            let ref_vals: Vec<Option<f64>> = reference_summaries
                .iter()
                .map(|s| s.value(property))
                .collect();
            let gen_vals: Vec<Option<f64>> = generated_summaries
                .iter()
                .map(|s| s.value(property))
                .collect();
            let reference = property_stats(&ref_vals);
            let generated = property_stats(&gen_vals);
            let mean_gap = (reference.mean - generated.mean).abs();
            let spread = reference.iqr.max(generated.iqr);
            PropertyComparison {
                property: property.to_string(),
                mean_gap,
                gap_over_iqr: (spread > 0.0).then(|| mean_gap / spread),
                reference,
                generated,
            }
        })
        .collect();
    Ok(ComparisonTable {
        rows,
        reference_summaries,
        generated_summaries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_ba, gen_er};
    use crate::graph::Graph;

    fn star(leaves: usize) -> Graph {
        Graph::from_pairs(leaves + 1, (1..=leaves).map(|v| (0, v))).unwrap()
    }

    fn k4() -> Graph {
        Graph::from_edge_list(&[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], None).unwrap()
    }

    #[test]
    fn star_assortativity_minus_one() {
        let s = topo_summary(&star(5));
        let a = s.assortativity.expect("star is not regular");
        assert!((a + 1.0).abs() < 1e-12, "got {a}");
    }

    #[test]
    fn k4_exact_values() {
        let s = topo_summary(&k4());
        assert_eq!(s.transitivity, 1.0);
        assert_eq!(s.avg_clustering, 1.0);
        assert_eq!(s.density, 1.0);
        assert_eq!(s.diameter, 1);
        assert_eq!(s.max_kcore, 3);
        assert_eq!(s.n_components, 1);
        assert_eq!(s.lcc_size, 4);
        assert_eq!(s.slcc_size, 0);
        // K4 is regular: assortativity undefined
        assert!(s.assortativity.is_none());
    }

    #[test]
    fn disconnected_graph_components() {
        let g = Graph::from_edge_list(&[(0, 1), (1, 2), (0, 2), (3, 4)], Some(6)).unwrap();
        let s = topo_summary(&g);
        assert_eq!(s.n_components, 3);
        assert_eq!(s.lcc_size, 3);
        assert_eq!(s.slcc_size, 2);
        // distances measured on the LCC (the triangle)
        assert_eq!(s.diameter, 1);
    }

    /// Brute-force recomputation: triangles by triple enumeration, distances
    /// by full BFS, assortativity from the flat endpoint lists.
    fn oracle(g: &Graph) -> TopoSummary {
        let n = g.node_count();
        let mut triangles = 0usize;
        let mut tri_at = vec![0usize; n];
        for a in 0..n {
            for b in (a + 1)..n {
                for c in (b + 1)..n {
                    if g.has_edge(a, b) && g.has_edge(b, c) && g.has_edge(a, c) {
                        triangles += 1;
                        tri_at[a] += 1;
                        tri_at[b] += 1;
                        tri_at[c] += 1;
                    }
                }
            }
        }
        let mut triples = 0usize;
        let mut avg_c = 0f64;
        for v in 0..n {
            let d = g.degree(v);
            triples += d * d.saturating_sub(1) / 2;
            if d >= 2 {
                avg_c += 2.0 * tri_at[v] as f64 / (d * (d - 1)) as f64;
            }
        }
        avg_c /= n as f64;

        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for &(u, v) in g.edges() {
            xs.push(g.degree(u) as f64);
            ys.push(g.degree(v) as f64);
            xs.push(g.degree(v) as f64);
            ys.push(g.degree(u) as f64);
        }
        let assort = if xs.is_empty() {
            None
        } else {
            let m = xs.len() as f64;
            let mx = xs.iter().sum::<f64>() / m;
            let my = ys.iter().sum::<f64>() / m;
            let cov = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / m;
            let vx = xs.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>() / m;
            let vy = ys.iter().map(|y| (y - my) * (y - my)).sum::<f64>() / m;
            if vx <= 1e-15 || vy <= 1e-15 {
                None
            } else {
                Some(cov / (vx * vy).sqrt())
            }
        };

        let parts = crate::graph::connected_components(g);
        let lcc = parts.largest_component();
        let mut diameter = 0usize;
        let mut total = 0f64;
        let mut pairs = 0usize;
        for &s in &lcc {
            let dist = g.bfs_distances(s);
            for &t in &lcc {
                if t != s && dist[t] != usize::MAX {
                    diameter = diameter.max(dist[t]);
                    total += dist[t] as f64;
                    pairs += 1;
                }
            }
        }
        let apl = if pairs == 0 { 0.0 } else { total / pairs as f64 };

        // independent peeling for the degeneracy
        let mut alive = vec![true; n];
        let mut deg = g.degrees();
        let mut level = 0usize;
        for _ in 0..n {
            let v = (0..n).filter(|&v| alive[v]).min_by_key(|&v| deg[v]).unwrap();
            level = level.max(deg[v]);
            alive[v] = false;
            for &u in g.neighbors(v) {
                if alive[u] {
                    deg[u] -= 1;
                }
            }
        }

        TopoSummary {
            assortativity: assort,
            density: if n < 2 {
                0.0
            } else {
                2.0 * g.edge_count() as f64 / (n as f64 * (n as f64 - 1.0))
            },
            avg_clustering: avg_c,
            transitivity: if triples == 0 {
                0.0
            } else {
                3.0 * triangles as f64 / triples as f64
            },
            diameter,
            apl,
            n_components: parts.sizes.len(),
            lcc_size: lcc.len(),
            slcc_size: parts.sizes.get(1).copied().unwrap_or(0),
            max_kcore: level,
        }
    }

    #[test]
    fn summary_matches_brute_force() {
        for seed in 0..30u64 {
            let g = gen_er(50, 0.1, seed).unwrap();
            let fast = topo_summary(&g);
            let slow = oracle(&g);
            assert_eq!(fast.diameter, slow.diameter, "seed {seed}");
            assert_eq!(fast.n_components, slow.n_components);
            assert_eq!(fast.lcc_size, slow.lcc_size);
            assert_eq!(fast.slcc_size, slow.slcc_size);
            assert_eq!(fast.max_kcore, slow.max_kcore);
            assert!((fast.apl - slow.apl).abs() < 1e-9);
            assert!((fast.avg_clustering - slow.avg_clustering).abs() < 1e-9);
            assert!((fast.transitivity - slow.transitivity).abs() < 1e-9);
            assert!((fast.density - slow.density).abs() < 1e-12);
            match (fast.assortativity, slow.assortativity) {
                (Some(a), Some(b)) => assert!((a - b).abs() < 1e-9, "{a} vs {b}"),
                (a, b) => assert_eq!(a.is_none(), b.is_none()),
            }
        }
    }

    #[test]
    fn identical_ensembles_have_zero_gaps() {
        let graphs: Vec<Graph> = (0..5).map(|s| gen_er(40, 0.1, s).unwrap()).collect();
        let table = compare_ensembles(&graphs, &graphs).unwrap();
        for row in &table.rows {
            assert_eq!(row.mean_gap, 0.0, "{}", row.property);
        }
    }

    #[test]
    fn er_vs_ba_shows_gaps() {
        // equal mean degree: ER p = 10/299, BA m = 5
        let reference: Vec<Graph> = (0..20).map(|s| gen_er(300, 10.0 / 299.0, s).unwrap()).collect();
        let generated: Vec<Graph> = (0..20).map(|s| gen_ba(300, 5, s).unwrap()).collect();
        let table = compare_ensembles(&reference, &generated).unwrap();
        for name in ["assortativity", "max_kcore"] {
            let row = table.rows.iter().find(|r| r.property == name).unwrap();
            // the between-family gap dominates the within-family spread;
            // max_kcore has zero IQR on both sides (BA's degeneracy is
            // exactly m), so the ratio form is checked only where defined
            let spread = row.reference.iqr.max(row.generated.iqr);
            assert!(row.mean_gap > 0.0, "{name} gap");
            assert!(row.mean_gap > spread, "{name}: gap {} vs spread {spread}", row.mean_gap);
            if let Some(ratio) = row.gap_over_iqr {
                assert!(ratio > 1.0, "{name} gap/IQR = {ratio}");
            }
        }
    }

    #[test]
    fn single_graph_ensembles() {
        let a = vec![gen_er(30, 0.2, 1).unwrap()];
        let b = vec![gen_er(30, 0.05, 2).unwrap()];
        let table = compare_ensembles(&a, &b).unwrap();
        let density = table.rows.iter().find(|r| r.property == "density").unwrap();
        assert_eq!(density.reference.iqr, 0.0);
        assert!(density.gap_over_iqr.is_none());
        let expect =
            (topo_summary(&a[0]).density - topo_summary(&b[0]).density).abs();
        assert!((density.mean_gap - expect).abs() < 1e-15);
    }

    #[test]
    fn comparison_is_order_invariant() {
        let mut graphs: Vec<Graph> = (0..6).map(|s| gen_er(30, 0.15, s).unwrap()).collect();
        let other: Vec<Graph> = (10..14).map(|s| gen_er(30, 0.15, s).unwrap()).collect();
        let t1 = compare_ensembles(&graphs, &other).unwrap();
        graphs.reverse();
        let t2 = compare_ensembles(&graphs, &other).unwrap();
        for (a, b) in t1.rows.iter().zip(&t2.rows) {
            assert_eq!(a.reference.mean, b.reference.mean);
            assert_eq!(a.reference.median, b.reference.median);
            assert_eq!(a.mean_gap, b.mean_gap);
        }
    }
}
