//! Per-node graphlet orbit counts.
//!
//! Orbits 0..=14 (connected graphlets on up to 4 nodes) follow the standard
//! numbering: 0 edge endpoint, 1/2 path ends/middle, 3 triangle, 4/5 P4
//! ends/middle, 6/7 claw leaves/center, 8 cycle, 9/10/11 paw
//! pendant/triangle/attachment, 12/13 diamond degree-2/degree-3, 14 clique.
//! They are computed by combinatorial reduction: triangles, cliques, diamonds,
//! cycles and paws are enumerated directly, then path and claw orbits follow
//! by inclusion-exclusion from non-induced pattern counts — no 4-subset
//! enumeration.
//!
//! Five-node counting is enumeration-based (ESU) and gated behind a size
//! cutoff. The extra 58 orbits use a deterministic canonical numbering
//! (graphlets ordered by edge count then canonical code, orbits by smallest
//! canonical position), appended after orbit 14.

use crate::error::{Error, Result};
use crate::graph::{sorted_intersection, Graph};
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

/// Orbit count for graphlets up to 4 nodes.
pub const ORBITS_4: usize = 15;
/// Orbit count with 5-node graphlets enabled.
pub const ORBITS_5: usize = 73;

/// Largest graph accepted for 5-node enumeration.
const FIVE_NODE_CUTOFF: usize = 600;

/// Per-node orbit counts plus the per-orbit mean used as a graph-level vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitDescriptor {
    /// `per_node[v][o]` = number of times node v occupies orbit o.
    pub per_node: Vec<Vec<u64>>,
    /// Mean of each orbit column over nodes.
    pub graph_vector: Vec<f64>,
}

impl OrbitDescriptor {
    fn from_counts(per_node: Vec<Vec<u64>>, orbits: usize) -> OrbitDescriptor {
        let n = per_node.len();
        let mut graph_vector = vec![0f64; orbits];
        for row in &per_node {
            for (o, &c) in row.iter().enumerate() {
                graph_vector[o] += c as f64;
            }
        }
        if n > 0 {
            for x in &mut graph_vector {
                *x /= n as f64;
            }
        }
        OrbitDescriptor {
            per_node,
            graph_vector,
        }
    }
}

/// Exact per-node orbit counts for connected graphlets with at most
/// `max_size` (4 or 5) nodes.
pub fn orbit_counts(g: &Graph, max_size: usize) -> Result<OrbitDescriptor> {
    match max_size {
        4 => Ok(OrbitDescriptor::from_counts(count_orbits_4(g), ORBITS_4)),
        5 => {
            if g.node_count() > FIVE_NODE_CUTOFF {
                return Err(Error::Capability(format!(
                    "orbit_counts: 5-node enumeration is limited to {FIVE_NODE_CUTOFF} nodes \
                     (graph has {}); use max_size = 4",
                    g.node_count()
                )));
            }
            let mut counts = count_orbits_4(g);
            for row in &mut counts {
                row.resize(ORBITS_5, 0);
            }
            count_orbits_5(g, &mut counts);
            Ok(OrbitDescriptor::from_counts(counts, ORBITS_5))
        }
        other => Err(Error::Argument(format!(
            "orbit_counts: max_size must be 4 or 5, got {other}"
        ))),
    }
}

fn c2(d: u64) -> u64 {
    d * d.saturating_sub(1) / 2
}

fn c3(d: u64) -> u64 {
    if d < 3 {
        0
    } else {
        d * (d - 1) * (d - 2) / 6
    }
}

fn count_orbits_4(g: &Graph) -> Vec<Vec<u64>> {
    let n = g.node_count();
    let mut o = vec![[0i64; ORBITS_4]; n];
    let tri = g.triangles_per_node();
    let deg: Vec<u64> = g.degrees().iter().map(|&d| d as u64).collect();

    // orbits 0..3 from degree and triangle counts
    for v in 0..n {
        o[v][0] = deg[v] as i64;
        let nbr_deg_sum: u64 = g.neighbors(v).iter().map(|&u| deg[u] - 1).sum();
        o[v][1] = nbr_deg_sum as i64 - 2 * tri[v] as i64;
        o[v][2] = (c2(deg[v]) - tri[v] as u64) as i64;
        o[v][3] = tri[v] as i64;
    }

    // cliques (14) and diamonds (12, 13): common-neighbor pairs of each edge
    for &(u, v) in g.edges() {
        let common = sorted_intersection(g.neighbors(u), g.neighbors(v));
        for i in 0..common.len() {
            for j in (i + 1)..common.len() {
                let (w, z) = (common[i], common[j]);
                if g.has_edge(w, z) {
                    // count each K4 once, via its lexicographically first edge
                    if w > v {
                        o[u][14] += 1;
                        o[v][14] += 1;
                        o[w][14] += 1;
                        o[z][14] += 1;
                    }
                } else {
                    // (u, v) is the unique axis of this diamond
                    o[u][13] += 1;
                    o[v][13] += 1;
                    o[w][12] += 1;
                    o[z][12] += 1;
                }
            }
        }
    }

    // paws (9, 10, 11): pendant scan around every triangle
    for &(u, v) in g.edges() {
        for w in sorted_intersection(g.neighbors(u), g.neighbors(v)) {
            if w <= v {
                continue; // triangle u < v < w visited once
            }
            for (a, b, c) in [(u, v, w), (v, u, w), (w, u, v)] {
                for &z in g.neighbors(a) {
                    if z != b && z != c && !g.has_edge(z, b) && !g.has_edge(z, c) {
                        o[z][9] += 1;
                        o[a][11] += 1;
                        o[b][10] += 1;
                        o[c][10] += 1;
                    }
                }
            }
        }
    }

    // cycles (8): non-adjacent diagonal pairs with a non-adjacent common pair;
    // each C4 is found from both diagonals, so counts are halved afterwards
    let mut seen_at = vec![usize::MAX; n];
    for x in 0..n {
        let mut two_hop: Vec<usize> = Vec::new();
        for &y in g.neighbors(x) {
            for &z in g.neighbors(y) {
                if z > x && seen_at[z] != x && !g.has_edge(x, z) {
                    seen_at[z] = x;
                    two_hop.push(z);
                }
            }
        }
        for &z in &two_hop {
            let common = sorted_intersection(g.neighbors(x), g.neighbors(z));
            for i in 0..common.len() {
                for j in (i + 1)..common.len() {
                    let (y, w) = (common[i], common[j]);
                    if !g.has_edge(y, w) {
                        o[x][8] += 1;
                        o[z][8] += 1;
                        o[y][8] += 1;
                        o[w][8] += 1;
                    }
                }
            }
        }
    }
    for row in o.iter_mut() {
        debug_assert!(row[8] % 2 == 0);
        row[8] /= 2;
    }

    // remaining orbits by subtraction from non-induced pattern counts
    for x in 0..n {
        let dx = deg[x];

        // star patterns centered at x: claw center (7)
        o[x][7] = c3(dx) as i64 - o[x][11] - o[x][13] - o[x][14];

        // sibling patterns (x + center + two co-leaves): claw leaf (6)
        let sib: u64 = g.neighbors(x).iter().map(|&y| c2(deg[y] - 1)).sum();
        o[x][6] =
            sib as i64 - o[x][9] - o[x][10] - 2 * o[x][12] - o[x][13] - 3 * o[x][14];

        // 3-edge vertex sequences starting at x: P4 end (4)
        let mut nip_end = 0i64;
        for &y in g.neighbors(x) {
            for &z in g.neighbors(y) {
                if z == x {
                    continue;
                }
                nip_end += deg[z] as i64 - 1 - i64::from(g.has_edge(x, z));
            }
        }
        o[x][4] =
            nip_end - 2 * o[x][8] - 2 * o[x][9] - o[x][10] - 4 * o[x][12] - 2 * o[x][13]
                - 6 * o[x][14];

        // 3-edge vertex sequences with x second: P4 middle (5)
        let mut nip_mid = 0i64;
        for &z in g.neighbors(x) {
            for &w in g.neighbors(z) {
                if w == x {
                    continue;
                }
                nip_mid += dx as i64 - 1 - i64::from(g.has_edge(w, x));
            }
        }
        o[x][5] = nip_mid
            - 2 * o[x][8]
            - o[x][10]
            - 2 * o[x][11]
            - 2 * o[x][12]
            - 4 * o[x][13]
            - 6 * o[x][14];
    }

    o.into_iter()
        .map(|row| {
            row.iter()
                .map(|&c| {
                    debug_assert!(c >= 0, "negative orbit count");
                    c as u64
                })
                .collect()
        })
        .collect()
}

// ---------------------------------------------------------------------------
// 5-node graphlets
// ---------------------------------------------------------------------------

const PAIRS_5: [(usize, usize); 10] = [
    (0, 1),
    (0, 2),
    (0, 3),
    (0, 4),
    (1, 2),
    (1, 3),
    (1, 4),
    (2, 3),
    (2, 4),
    (3, 4),
];

/// Orbit ids per position for every 10-bit adjacency code of a 5-node graph;
/// `u8::MAX` marks disconnected codes.
struct Atlas5 {
    orbit_of: Vec<[u8; 5]>,
    n_orbits: usize,
}

fn atlas5() -> &'static Atlas5 {
    static ATLAS: OnceLock<Atlas5> = OnceLock::new();
    ATLAS.get_or_init(build_atlas5)
}

fn code_bit(code: u16, i: usize, j: usize) -> bool {
    let idx = PAIRS_5
        .iter()
        .position(|&(a, b)| (a, b) == (i.min(j), i.max(j)))
        .expect("valid pair");
    code >> idx & 1 == 1
}

fn permute_code(code: u16, perm: &[usize; 5]) -> u16 {
    let mut out = 0u16;
    for (idx, &(i, j)) in PAIRS_5.iter().enumerate() {
        if code_bit(code, perm[i], perm[j]) {
            out |= 1 << idx;
        }
    }
    out
}

fn connected5(code: u16) -> bool {
    let mut adj = [0u8; 5]; // bitmask neighbors
    for (idx, &(i, j)) in PAIRS_5.iter().enumerate() {
        if code >> idx & 1 == 1 {
            adj[i] |= 1 << j;
            adj[j] |= 1 << i;
        }
    }
    let mut seen = 1u8;
    let mut frontier = 1u8;
    while frontier != 0 {
        let mut next = 0u8;
        for v in 0..5 {
            if frontier >> v & 1 == 1 {
                next |= adj[v];
            }
        }
        frontier = next & !seen;
        seen |= next;
    }
    seen == 0b11111
}

fn permutations5() -> Vec<[usize; 5]> {
    let mut perms = Vec::with_capacity(120);
    let mut items = [0usize, 1, 2, 3, 4];
    heap_permute(&mut items, 5, &mut perms);
    perms
}

fn heap_permute(items: &mut [usize; 5], k: usize, out: &mut Vec<[usize; 5]>) {
    if k == 1 {
        out.push(*items);
        return;
    }
    for i in 0..k {
        heap_permute(items, k - 1, out);
        if k.is_multiple_of(2) {
            items.swap(i, k - 1);
        } else {
            items.swap(0, k - 1);
        }
    }
}

fn build_atlas5() -> Atlas5 {
    let perms = permutations5();
    let mut canon_of = vec![0u16; 1024];
    let mut canon_perm = vec![[0usize; 5]; 1024];
    let mut canon_codes: Vec<u16> = Vec::new();
    for code in 0..1024u16 {
        if !connected5(code) {
            continue;
        }
        let mut best = 0u16;
        let mut best_perm = perms[0];
        for p in &perms {
            let c = permute_code(code, p);
            if c > best {
                best = c;
                best_perm = *p;
            }
        }
        canon_of[code as usize] = best;
        canon_perm[code as usize] = best_perm;
        if code == best {
            canon_codes.push(code);
        }
    }
    // graphlet order: edge count, then canonical code
    canon_codes.sort_by_key(|&c| (c.count_ones(), c));

    // orbit partition of each canonical graphlet via its automorphisms
    let mut next_orbit = ORBITS_4;
    let mut canon_orbits: std::collections::HashMap<u16, [u8; 5]> =
        std::collections::HashMap::new();
    for &code in &canon_codes {
        let mut class = [usize::MAX; 5];
        for p in &perms {
            if permute_code(code, p) == code {
                // p is an automorphism: position i plays the role of p[i]
                for i in 0..5 {
                    class[i] = class[i].min(p[i]);
                }
            }
        }
        let mut reps: Vec<usize> = class.to_vec();
        reps.sort_unstable();
        reps.dedup();
        let mut local = [0u8; 5];
        for i in 0..5 {
            let rank = reps.iter().position(|&r| r == class[i]).unwrap();
            local[i] = (next_orbit + rank) as u8;
        }
        next_orbit += reps.len();
        canon_orbits.insert(code, local);
    }

    // spread orbit ids to every connected code through its canonicalizing map
    let mut orbit_of = vec![[u8::MAX; 5]; 1024];
    for code in 0..1024u16 {
        if !connected5(code) {
            continue;
        }
        let canon = canon_of[code as usize];
        let p = canon_perm[code as usize];
        let canon_local = canon_orbits[&canon];
        // permuted code places original node p[i] at canonical position i
        for i in 0..5 {
            orbit_of[code as usize][p[i]] = canon_local[i];
        }
    }
    Atlas5 {
        orbit_of,
        n_orbits: next_orbit,
    }
}

/// ESU enumeration of connected induced 5-node subgraphs, each visited once.
fn count_orbits_5(g: &Graph, counts: &mut [Vec<u64>]) {
    let atlas = atlas5();
    debug_assert_eq!(atlas.n_orbits, ORBITS_5);
    let n = g.node_count();
    let mut in_sub = vec![false; n];
    let mut blocked = vec![usize::MAX; n]; // stamp: node already in some extension
    for v in 0..n {
        let mut sub = vec![v];
        in_sub[v] = true;
        let ext: Vec<usize> = g.neighbors(v).iter().copied().filter(|&u| u > v).collect();
        for &u in &ext {
            blocked[u] = v;
        }
        extend_subgraph(g, v, &mut sub, ext, &mut in_sub, &mut blocked, atlas, counts);
        in_sub[v] = false;
    }
}

#[allow(clippy::too_many_arguments)]
fn extend_subgraph(
    g: &Graph,
    root: usize,
    sub: &mut Vec<usize>,
    mut ext: Vec<usize>,
    in_sub: &mut [bool],
    blocked: &mut [usize],
    atlas: &Atlas5,
    counts: &mut [Vec<u64>],
) {
    if sub.len() == 5 {
        let mut code = 0u16;
        for (idx, &(i, j)) in PAIRS_5.iter().enumerate() {
            if g.has_edge(sub[i], sub[j]) {
                code |= 1 << idx;
            }
        }
        let orbits = &atlas.orbit_of[code as usize];
        for (k, &v) in sub.iter().enumerate() {
            counts[v][orbits[k] as usize] += 1;
        }
        return;
    }
    while let Some(w) = ext.pop() {
        // extension candidates: exclusive neighbors of w beyond the root
        let mut ext_next = ext.clone();
        let mut added: Vec<usize> = Vec::new();
        for &u in g.neighbors(w) {
            if u > root && !in_sub[u] && blocked[u] != root {
                blocked[u] = root;
                added.push(u);
                ext_next.push(u);
            }
        }
        sub.push(w);
        in_sub[w] = true;
        extend_subgraph(g, root, sub, ext_next, in_sub, blocked, atlas, counts);
        in_sub[w] = false;
        sub.pop();
        // nodes added for this branch stay blocked for the root, matching
        // ESU's exclusive-neighborhood rule only while w's branch is open;
        // unblock them before trying the next w
        for &u in &added {
            blocked[u] = usize::MAX;
        }
    }
}
