//! Neighborhood-subgraph pairwise-distance features.
//!
//! For every node pair (u, v) at shortest-path distance d <= `d_max`
//! (including the d = 0 self-pairs) and every radius r <= `r_max`, a sparse
//! feature identifies the unordered pair of canonical labels of the radius-r
//! neighborhood subgraphs rooted at u and v, together with (r, d). Canonical
//! labels come from degree-seeded Weisfeiler-Lehman color refinement on the
//! induced ball, run for r + 2 rounds, with the root's final color folded in;
//! everything is hashed to 64 bits.

use crate::graph::Graph;
use crate::seed::fnv1a;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, VecDeque};

/// Sparse non-negative feature counts keyed by 64-bit feature hashes.
///
/// Zero counts are never stored; iteration order is deterministic.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SparseCounts {
    counts: BTreeMap<u64, u64>,
}

impl SparseCounts {
    fn bump(&mut self, key: u64) {
        *self.counts.entry(key).or_insert(0) += 1;
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn get(&self, key: u64) -> u64 {
        self.counts.get(&key).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&u64, &u64)> {
        self.counts.iter()
    }

    /// Cosine similarity of two count vectors; 0 when either is empty.
    pub fn cosine(&self, other: &SparseCounts) -> f64 {
        let dot: f64 = self
            .counts
            .iter()
            .filter_map(|(k, &a)| other.counts.get(k).map(|&b| a as f64 * b as f64))
            .sum();
        let na: f64 = self.counts.values().map(|&a| (a as f64).powi(2)).sum();
        let nb: f64 = other.counts.values().map(|&b| (b as f64).powi(2)).sum();
        if na == 0.0 || nb == 0.0 {
            0.0
        } else {
            dot / (na.sqrt() * nb.sqrt())
        }
    }
}

fn hash_u64s(parts: &[u64]) -> u64 {
    let mut bytes = Vec::with_capacity(parts.len() * 8);
    for p in parts {
        bytes.extend_from_slice(&p.to_le_bytes());
    }
    fnv1a(&bytes)
}

/// NSPDK sparse feature counts for one graph.
pub fn nspdk_features(g: &Graph, r_max: usize, d_max: usize) -> SparseCounts {
    let n = g.node_count();
    let mut counts = SparseCounts::default();
    if n == 0 {
        return counts;
    }

    // canonical label of the radius-r ball around every node, r = 0..=r_max
    let labels: Vec<Vec<u64>> = (0..n).map(|v| ball_labels(g, v, r_max)).collect();

    // node pairs at distance <= d_max, each unordered pair once
    let mut dist = vec![usize::MAX; n];
    let mut touched: Vec<usize> = Vec::new();
    for u in 0..n {
        for r in 0..=r_max {
            counts.bump(hash_u64s(&[labels[u][r], labels[u][r], r as u64, 0]));
        }
        if d_max == 0 {
            continue;
        }
        dist[u] = 0;
        touched.push(u);
        let mut queue = VecDeque::from([u]);
        while let Some(x) = queue.pop_front() {
            if dist[x] == d_max {
                continue;
            }
            for &y in g.neighbors(x) {
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    touched.push(y);
                    queue.push_back(y);
                }
            }
        }
        for &v in &touched {
            if v <= u {
                continue;
            }
            let d = dist[v] as u64;
            for r in 0..=r_max {
                let (a, b) = if labels[u][r] <= labels[v][r] {
                    (labels[u][r], labels[v][r])
                } else {
                    (labels[v][r], labels[u][r])
                };
                counts.bump(hash_u64s(&[a, b, r as u64, d]));
            }
        }
        for &v in &touched {
            dist[v] = usize::MAX;
        }
        touched.clear();
    }
    counts
}

/// Canonical labels of the balls of radius 0..=r_max rooted at `root`.
fn ball_labels(g: &Graph, root: usize, r_max: usize) -> Vec<u64> {
    // BFS out to r_max collecting the ball in discovery order
    let mut dist: BTreeMap<usize, usize> = BTreeMap::new();
    dist.insert(root, 0);
    let mut queue = VecDeque::from([root]);
    while let Some(x) = queue.pop_front() {
        let dx = dist[&x];
        if dx == r_max {
            continue;
        }
        for &y in g.neighbors(x) {
            if let std::collections::btree_map::Entry::Vacant(e) = dist.entry(y) {
                e.insert(dx + 1);
                queue.push_back(y);
            }
        }
    }

    (0..=r_max)
        .map(|r| {
            let ball: Vec<usize> = dist
                .iter()
                .filter(|&(_, &d)| d <= r)
                .map(|(&v, _)| v)
                .collect();
            let index: BTreeMap<usize, usize> =
                ball.iter().enumerate().map(|(i, &v)| (v, i)).collect();
            // adjacency restricted to the ball
            let adj: Vec<Vec<usize>> = ball
                .iter()
                .map(|&v| {
                    g.neighbors(v)
                        .iter()
                        .filter_map(|u| index.get(u).copied())
                        .collect()
                })
                .collect();
            // degree-seeded WL refinement, r + 2 rounds
            let mut color: Vec<u64> = adj.iter().map(|a| a.len() as u64).collect();
            for _ in 0..(r + 2) {
                let mut next = Vec::with_capacity(color.len());
                for (i, nbrs) in adj.iter().enumerate() {
                    let mut payload: Vec<u64> = nbrs.iter().map(|&j| color[j]).collect();
                    payload.sort_unstable();
                    payload.insert(0, color[i]);
                    next.push(hash_u64s(&payload));
                }
                color = next;
            }
            let root_color = color[index[&root]];
            color.sort_unstable();
            let mut payload = vec![root_color, r as u64];
            payload.extend_from_slice(&color);
            hash_u64s(&payload)
        })
        .collect()
}
