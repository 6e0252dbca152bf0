//! Brute-force oracles shared by the integration suites. These are written
//! independently of the library's fast paths: orbit counts come from explicit
//! induced-subgraph enumeration and classification by degree sequence.

use ggm_eval::graph::Graph;

/// Per-node counts of orbits 0..=14 by enumerating every connected induced
/// subgraph on 2..=4 nodes and classifying it by edge count and degrees.
pub fn orbit_oracle(g: &Graph) -> Vec<Vec<u64>> {
    let n = g.node_count();
    let mut counts = vec![vec![0u64; 15]; n];

    // pairs: orbit 0
    for &(u, v) in g.edges() {
        counts[u][0] += 1;
        counts[v][0] += 1;
    }

    // triples
    for a in 0..n {
        for b in (a + 1)..n {
            for c in (b + 1)..n {
                let e = [
                    (a, b, g.has_edge(a, b)),
                    (a, c, g.has_edge(a, c)),
                    (b, c, g.has_edge(b, c)),
                ];
                let m = e.iter().filter(|t| t.2).count();
                if m == 3 {
                    counts[a][3] += 1;
                    counts[b][3] += 1;
                    counts[c][3] += 1;
                } else if m == 2 {
                    // the middle node touches both edges
                    for &v in &[a, b, c] {
                        let deg = e.iter().filter(|&&(x, y, on)| on && (x == v || y == v)).count();
                        counts[v][if deg == 2 { 2 } else { 1 }] += 1;
                    }
                }
            }
        }
    }

    // quadruples
    for a in 0..n {
        for b in (a + 1)..n {
            for c in (b + 1)..n {
                for d in (c + 1)..n {
                    let nodes = [a, b, c, d];
                    let mut deg = [0usize; 4];
                    let mut edges = 0usize;
                    for i in 0..4 {
                        for j in (i + 1)..4 {
                            if g.has_edge(nodes[i], nodes[j]) {
                                deg[i] += 1;
                                deg[j] += 1;
                                edges += 1;
                            }
                        }
                    }
                    if deg.contains(&0) {
                        continue; // disconnected for sure
                    }
                    let mut sorted = deg;
                    sorted.sort_unstable();
                    match (edges, sorted) {
                        (3, [1, 1, 2, 2]) => {
                            // path: ends have degree 1
                            for i in 0..4 {
                                counts[nodes[i]][if deg[i] == 1 { 4 } else { 5 }] += 1;
                            }
                        }
                        (3, [1, 1, 1, 3]) => {
                            for i in 0..4 {
                                counts[nodes[i]][if deg[i] == 1 { 6 } else { 7 }] += 1;
                            }
                        }
                        (4, [2, 2, 2, 2]) => {
                            for &v in &nodes {
                                counts[v][8] += 1;
                            }
                        }
                        (4, [1, 2, 2, 3]) => {
                            for i in 0..4 {
                                let orbit = match deg[i] {
                                    1 => 9,
                                    2 => 10,
                                    _ => 11,
                                };
                                counts[nodes[i]][orbit] += 1;
                            }
                        }
                        (5, [2, 2, 3, 3]) => {
                            for i in 0..4 {
                                counts[nodes[i]][if deg[i] == 2 { 12 } else { 13 }] += 1;
                            }
                        }
                        (6, _) => {
                            for &v in &nodes {
                                counts[v][14] += 1;
                            }
                        }
                        // edges == 3 with a degree-0 node is unreachable here
                        _ => {}
                    }
                }
            }
        }
    }
    counts
}

/// Structured graphs for oracle cross-checks: paths, cycles, cliques, stars.
pub fn structured_graphs() -> Vec<(String, Graph)> {
    let mut out = Vec::new();
    for n in [4usize, 7, 10, 15, 20] {
        out.push((
            format!("path{n}"),
            Graph::from_pairs(n, (0..n - 1).map(|i| (i, i + 1))).unwrap(),
        ));
        out.push((
            format!("cycle{n}"),
            Graph::from_pairs(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap(),
        ));
        out.push((
            format!("star{n}"),
            Graph::from_pairs(n, (1..n).map(|v| (0, v))).unwrap(),
        ));
    }
    for n in [4usize, 5, 6, 7, 8] {
        let mut pairs = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                pairs.push((u, v));
            }
        }
        out.push((format!("clique{n}"), Graph::from_pairs(n, pairs).unwrap()));
    }
    out
}
