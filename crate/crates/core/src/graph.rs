//! Canonical simple-graph representation, edge-list I/O, and elementary traversals.
//!
//! Every other module works on [`Graph`]: an immutable, undirected, unweighted
//! simple graph over dense node ids `0..n`. Construction canonicalizes the edge
//! set (self-loops dropped, duplicates merged, pairs stored with `u < v`) and
//! derives sorted per-node adjacency lists, so downstream algorithms can rely
//! on binary-searchable neighborhoods.

use crate::error::{Error, Result};
use std::collections::VecDeque;
use std::fmt::Write as _;
use std::path::Path;

/// Immutable simple undirected graph.
///
/// Nodes are `0..n`; edges are stored once as `(u, v)` with `u < v`, sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Build a graph from raw signed pairs, as parsed from external input.
    ///
    /// Self-loops are dropped and duplicate pairs merged. `n` becomes
    /// `max(node id) + 1`, or `n_hint` if larger.
    pub fn from_edge_list(pairs: &[(i64, i64)], n_hint: Option<usize>) -> Result<Graph> {
        let mut canonical = Vec::with_capacity(pairs.len());
        let mut max_id: Option<usize> = None;
        for &(a, b) in pairs {
            if a < 0 || b < 0 {
                return Err(Error::Format(format!("negative node id in pair ({a}, {b})")));
            }
            let (u, v) = (a as usize, b as usize);
            max_id = Some(max_id.map_or(u.max(v), |m| m.max(u).max(v)));
            if u == v {
                continue;
            }
            canonical.push((u.min(v), u.max(v)));
        }
        let implied = max_id.map_or(0, |m| m + 1);
        let n = match n_hint {
            Some(h) if h < implied => {
                return Err(Error::Argument(format!(
                    "n_hint {h} smaller than max node id {}",
                    implied - 1
                )))
            }
            Some(h) => h,
            None => implied,
        };
        Ok(Self::from_canonical(n, canonical))
    }

    /// Build from unsigned pairs with a known node count.
    ///
    /// Same canonicalization as [`Graph::from_edge_list`]; ids must be `< n`.
    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Graph> {
        let mut canonical = Vec::new();
        for (u, v) in pairs {
            if u >= n || v >= n {
                return Err(Error::Argument(format!(
                    "node id {} out of range for n = {n}",
                    u.max(v)
                )));
            }
            if u == v {
                continue;
            }
            canonical.push((u.min(v), u.max(v)));
        }
        Ok(Self::from_canonical(n, canonical))
    }

    fn from_canonical(n: usize, mut canonical: Vec<(usize, usize)>) -> Graph {
        canonical.sort_unstable();
        canonical.dedup();
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &canonical {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Graph {
            n,
            edges: canonical,
            adjacency,
        }
    }

    /// Empty graph on `n` isolated nodes.
    pub fn empty(n: usize) -> Graph {
        Graph {
            n,
            edges: Vec::new(),
            adjacency: vec![Vec::new(); n],
        }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Canonical edge list, sorted, each pair with `u < v`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Edge membership via binary search on the sorted adjacency of `u`.
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        if u >= self.n || v >= self.n || u == v {
            return false;
        }
        let (a, b) = if self.adjacency[u].len() <= self.adjacency[v].len() {
            (u, v)
        } else {
            (v, u)
        };
        self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Number of triangles through each node, by sorted-adjacency intersection.
    ///
    /// A triangle {u, v, w} with u < v < w is visited exactly once, via its
    /// edge (u, v) and common neighbor w > v.
    pub fn triangles_per_node(&self) -> Vec<usize> {
        let mut tri = vec![0usize; self.n];
        for &(u, v) in &self.edges {
            for w in sorted_intersection(&self.adjacency[u], &self.adjacency[v]) {
                if w > v {
                    tri[u] += 1;
                    tri[v] += 1;
                    tri[w] += 1;
                }
            }
        }
        tri
    }

    /// Relabel nodes: old node `v` becomes `perm[v]`. `perm` must be a
    /// permutation of `0..n`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Graph> {
        if perm.len() != self.n {
            return Err(Error::Argument(format!(
                "permutation length {} != n = {}",
                perm.len(),
                self.n
            )));
        }
        let mut seen = vec![false; self.n];
        for &p in perm {
            if p >= self.n || seen[p] {
                return Err(Error::Argument("not a permutation".into()));
            }
            seen[p] = true;
        }
        let pairs = self.edges.iter().map(|&(u, v)| (perm[u], perm[v]));
        Graph::from_pairs(self.n, pairs)
    }

    /// Render in edge-list text format: one `u v` line per canonical edge.
    pub fn to_edge_list_string(&self) -> String {
        let mut out = String::with_capacity(self.edges.len() * 8 + 16);
        let _ = writeln!(out, "# nodes {}", self.n);
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    pub fn write_edge_list(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_edge_list_string())?;
        Ok(())
    }

    /// Parse edge-list text. Lines starting with `#` or `%` and blank lines
    /// are ignored, except a leading `# nodes N` comment which sets the node
    /// count hint (so isolated trailing nodes survive a round trip).
    pub fn parse_edge_list(text: &str) -> Result<Graph> {
        let mut pairs = Vec::new();
        let mut n_hint = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(count) = rest.strip_prefix("nodes") {
                    if let Ok(h) = count.trim().parse::<usize>() {
                        n_hint = Some(h);
                    }
                }
                continue;
            }
            if line.starts_with('%') {
                continue;
            }
            let mut fields = line.split_whitespace();
            let (u, v) = match (fields.next(), fields.next()) {
                (Some(u), Some(v)) => (u, v),
                _ => {
                    return Err(Error::Format(format!(
                        "line {}: expected `u v`, got `{line}`",
                        lineno + 1
                    )))
                }
            };
            let parse = |s: &str| -> Result<i64> {
                s.parse::<i64>()
                    .map_err(|_| Error::Format(format!("line {}: bad node id `{s}`", lineno + 1)))
            };
            pairs.push((parse(u)?, parse(v)?));
        }
        Graph::from_edge_list(&pairs, n_hint)
    }

    pub fn read_edge_list(path: &Path) -> Result<Graph> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Load(format!("{}: {e}", path.display())))?;
        Graph::parse_edge_list(&text)
    }

    /// Parse an edge list whose node names are arbitrary strings.
    ///
    /// Names are relabeled to dense integer ids in first-appearance order;
    /// the returned vector maps each id back to its original name. Numeric
    /// kernels all index by position, so ingestion of labeled files goes
    /// through this relabeling.
    pub fn parse_labeled_edge_list(text: &str) -> Result<(Graph, Vec<String>)> {
        let mut names: Vec<String> = Vec::new();
        let mut ids: std::collections::HashMap<String, usize> = std::collections::HashMap::new();
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with('%') {
                continue;
            }
            let mut fields = line.split_whitespace();
            let (u, v) = match (fields.next(), fields.next()) {
                (Some(u), Some(v)) => (u, v),
                _ => {
                    return Err(Error::Format(format!(
                        "line {}: expected `u v`, got `{line}`",
                        lineno + 1
                    )))
                }
            };
            let mut id_of = |name: &str| -> usize {
                *ids.entry(name.to_string()).or_insert_with(|| {
                    names.push(name.to_string());
                    names.len() - 1
                })
            };
            let (a, b) = (id_of(u), id_of(v));
            pairs.push((a, b));
        }
        let g = Graph::from_pairs(names.len(), pairs)?;
        Ok((g, names))
    }

    /// BFS distances from `source`; `usize::MAX` marks unreachable nodes.
    pub fn bfs_distances(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n];
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for &w in &self.adjacency[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }
}

/// Merge-walk the sorted slices, yielding their common elements.
pub(crate) fn sorted_intersection(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Partition of the nodes into connected components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentPartition {
    /// Component id per node.
    pub labels: Vec<usize>,
    /// Component sizes, sorted descending.
    pub sizes: Vec<usize>,
}

impl ComponentPartition {
    /// Nodes of the largest connected component.
    pub fn largest_component(&self) -> Vec<usize> {
        if self.sizes.is_empty() {
            return Vec::new();
        }
        // component ids are assigned in discovery order; find the id whose
        // size equals sizes[0], preferring the smallest id for determinism
        let mut counts = std::collections::HashMap::new();
        for &l in &self.labels {
            *counts.entry(l).or_insert(0usize) += 1;
        }
        let target = self.sizes[0];
        let lcc_id = (0..)
            .take(counts.len())
            .find(|id| counts.get(id) == Some(&target))
            .expect("component sizes consistent with labels");
        (0..self.labels.len())
            .filter(|&v| self.labels[v] == lcc_id)
            .collect()
    }
}

/// BFS partition into connected components; sizes sorted descending.
pub fn connected_components(g: &Graph) -> ComponentPartition {
    let n = g.node_count();
    let mut labels = vec![usize::MAX; n];
    let mut sizes = Vec::new();
    let mut next = 0usize;
    for start in 0..n {
        if labels[start] != usize::MAX {
            continue;
        }
        let mut size = 0usize;
        let mut queue = VecDeque::from([start]);
        labels[start] = next;
        while let Some(u) = queue.pop_front() {
            size += 1;
            for &w in g.neighbors(u) {
                if labels[w] == usize::MAX {
                    labels[w] = next;
                    queue.push_back(w);
                }
            }
        }
        sizes.push(size);
        next += 1;
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    ComponentPartition { labels, sizes }
}

/// Maximum and mean shortest-path distance over BFS trees rooted at `sources`.
///
/// With `sources` covering the whole largest component this yields the exact
/// diameter and average path length of that component; with a subset it is a
/// sampled estimate. Unreachable pairs are excluded. Distances of a source to
/// itself are not counted.
pub fn bfs_eccentricity_sample(
    g: &Graph,
    sources: &[usize],
    restrict_to_lcc: bool,
) -> Result<(usize, f64)> {
    if sources.is_empty() {
        return Err(Error::Argument("bfs_eccentricity_sample: empty source list".into()));
    }
    for &s in sources {
        if s >= g.node_count() {
            return Err(Error::Argument(format!("source {s} outside graph")));
        }
    }
    let lcc_filter: Option<Vec<bool>> = if restrict_to_lcc {
        let parts = connected_components(g);
        let lcc = parts.largest_component();
        let mut mask = vec![false; g.node_count()];
        for &v in &lcc {
            mask[v] = true;
        }
        for &s in sources {
            if !mask[s] {
                return Err(Error::Argument(format!(
                    "source {s} outside the largest connected component"
                )));
            }
        }
        Some(mask)
    } else {
        None
    };

    let mut max_dist = 0usize;
    let mut sum = 0f64;
    let mut pairs = 0u64;
    for &s in sources {
        let dist = g.bfs_distances(s);
        for (v, &d) in dist.iter().enumerate() {
            if v == s || d == usize::MAX {
                continue;
            }
            if let Some(mask) = &lcc_filter {
                if !mask[v] {
                    continue;
                }
            }
            max_dist = max_dist.max(d);
            sum += d as f64;
            pairs += 1;
        }
    }
    let mean = if pairs == 0 { 0.0 } else { sum / pairs as f64 };
    Ok((max_dist, mean))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k4() -> Graph {
        Graph::from_edge_list(&[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], None).unwrap()
    }

    #[test]
    fn canonicalizes_duplicates_and_self_loops() {
        let g = Graph::from_edge_list(&[(0, 1), (1, 0), (1, 1), (1, 2)], None).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn empty_with_hint() {
        let g = Graph::from_edge_list(&[], Some(5)).unwrap();
        assert_eq!(g.node_count(), 5);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn k4_any_order() {
        let g = Graph::from_edge_list(&[(3, 2), (1, 3), (2, 0), (0, 1), (1, 2), (3, 0)], None)
            .unwrap();
        assert_eq!(g.edge_count(), 6);
        assert!((0..4).all(|v| g.degree(v) == 3));
    }

    #[test]
    fn negative_id_is_format_error() {
        let err = Graph::from_edge_list(&[(-1, 2)], None).unwrap_err();
        assert!(matches!(err, Error::Format(_)));
    }

    #[test]
    fn small_hint_is_argument_error() {
        let err = Graph::from_edge_list(&[(0, 7)], Some(3)).unwrap_err();
        assert!(matches!(err, Error::Argument(_)));
    }

    #[test]
    fn handshake() {
        let g = k4();
        let sum: usize = (0..g.node_count()).map(|v| g.degree(v)).sum();
        assert_eq!(sum, 2 * g.edge_count());
    }

    #[test]
    fn components_two_triangles() {
        let g =
            Graph::from_edge_list(&[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)], None).unwrap();
        let parts = connected_components(&g);
        assert_eq!(parts.sizes, vec![3, 3]);
    }

    #[test]
    fn components_k4() {
        assert_eq!(connected_components(&k4()).sizes, vec![4]);
    }

    #[test]
    fn components_isolated() {
        let parts = connected_components(&Graph::empty(3));
        assert_eq!(parts.sizes, vec![1, 1, 1]);
        assert_eq!(parts.labels, vec![0, 1, 2]);
    }

    #[test]
    fn path_distances() {
        let g = Graph::from_edge_list(&[(0, 1), (1, 2)], None).unwrap();
        let (diam, apl) = bfs_eccentricity_sample(&g, &[0, 1, 2], true).unwrap();
        assert_eq!(diam, 2);
        assert!((apl - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn k4_distances() {
        let (diam, apl) = bfs_eccentricity_sample(&k4(), &[0, 1, 2, 3], true).unwrap();
        assert_eq!(diam, 1);
        assert!((apl - 1.0).abs() < 1e-12);
    }

    #[test]
    fn c6_distances() {
        // 15 unordered pair distances of the 6-cycle enumerate to mean 1.8
        let g = Graph::from_edge_list(&[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)], None)
            .unwrap();
        let all: Vec<usize> = (0..6).collect();
        let (diam, apl) = bfs_eccentricity_sample(&g, &all, true).unwrap();
        assert_eq!(diam, 3);
        assert!((apl - 1.8).abs() < 1e-12);
    }

    #[test]
    fn source_outside_graph() {
        let err = bfs_eccentricity_sample(&k4(), &[9], false).unwrap_err();
        assert!(matches!(err, Error::Argument(_)));
    }

    #[test]
    fn edge_list_round_trip() {
        let g = Graph::from_edge_list(&[(0, 2), (2, 5), (1, 4)], Some(8)).unwrap();
        let text = g.to_edge_list_string();
        let back = Graph::parse_edge_list(&text).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn parse_skips_comments_and_blanks() {
        let g = Graph::parse_edge_list("# header\n\n% also a comment\n0 1\n1 2\n").unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn labeled_edge_list_relabels_in_appearance_order() {
        let (g, names) =
            Graph::parse_labeled_edge_list("alpha beta\nbeta gamma\ngamma alpha\n").unwrap();
        assert_eq!(names, vec!["alpha", "beta", "gamma"]);
        assert_eq!(g.edges(), &[(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn triangles_k4_minus_edge() {
        let g = Graph::from_edge_list(&[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)], None).unwrap();
        // nodes 0,1 sit in both triangles; 2,3 in one each
        assert_eq!(g.triangles_per_node(), vec![2, 2, 1, 1]);
    }
}
