//! Seeded synthetic graph generators.
//!
//! Five corpus families (ER, BA, SBM, LFR, nPSO) plus perturbation
//! pseudo-generators used as evaluation subjects (degree-preserving rewiring
//! and density-matched ER). Every generator is a pure function of its
//! parameters and a 64-bit seed: the same inputs produce a byte-identical
//! edge list on any platform.

use crate::error::{Error, Result};
use crate::graph::Graph;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::f64::consts::PI;

/// Generator family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GeneratorFamily {
    Er,
    Ba,
    Sbm,
    Lfr,
    Npso,
    Rewire,
    ErMatch,
}

impl GeneratorFamily {
    pub fn name(self) -> &'static str {
        match self {
            GeneratorFamily::Er => "ER",
            GeneratorFamily::Ba => "BA",
            GeneratorFamily::Sbm => "SBM",
            GeneratorFamily::Lfr => "LFR",
            GeneratorFamily::Npso => "nPSO",
            GeneratorFamily::Rewire => "REWIRE",
            GeneratorFamily::ErMatch => "ER_MATCH",
        }
    }

    /// The five corpus classes, in the fixed class order used by reports.
    pub const CORPUS: [GeneratorFamily; 5] = [
        GeneratorFamily::Ba,
        GeneratorFamily::Er,
        GeneratorFamily::Lfr,
        GeneratorFamily::Npso,
        GeneratorFamily::Sbm,
    ];
}

impl std::str::FromStr for GeneratorFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "ER" => Ok(GeneratorFamily::Er),
            "BA" => Ok(GeneratorFamily::Ba),
            "SBM" => Ok(GeneratorFamily::Sbm),
            "LFR" => Ok(GeneratorFamily::Lfr),
            "NPSO" => Ok(GeneratorFamily::Npso),
            "REWIRE" => Ok(GeneratorFamily::Rewire),
            "ER_MATCH" => Ok(GeneratorFamily::ErMatch),
            other => Err(Error::Argument(format!("unknown generator family `{other}`"))),
        }
    }
}

/// LFR benchmark parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LfrParams {
    pub n: usize,
    /// Degree power-law exponent (> 1).
    pub tau1: f64,
    /// Community-size power-law exponent (> 1).
    pub tau2: f64,
    /// Mixing parameter: target fraction of inter-community edge endpoints.
    pub mu: f64,
    pub avg_deg: f64,
    pub max_deg: usize,
    pub min_comm: usize,
    pub max_comm: usize,
}

/// nPSO hyperbolic-growth parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NpsoParams {
    pub n: usize,
    /// Links per new node (expected, exact when `temperature` = 0).
    pub m: usize,
    /// Target degree power-law exponent (> 2).
    pub gamma: f64,
    /// Fermi-Dirac temperature (0 = deterministic closest-m attachment).
    pub temperature: f64,
    /// Number of angular mixture components (communities).
    pub communities: usize,
    /// Angular standard deviation of each mixture component.
    pub kappa: f64,
}

/// Family-specific parameter record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GeneratorParams {
    Er { n: usize, p: f64 },
    Ba { n: usize, m: usize },
    Sbm { block_sizes: Vec<usize>, p: Vec<Vec<f64>> },
    Lfr(LfrParams),
    Npso(NpsoParams),
    /// Degree-preserving double-edge-swap randomization of a subject graph.
    Rewire { swaps_per_edge: f64 },
    /// Uniform random graph with the subject's node and edge counts.
    ErMatch,
}

impl GeneratorParams {
    pub fn family(&self) -> GeneratorFamily {
        match self {
            GeneratorParams::Er { .. } => GeneratorFamily::Er,
            GeneratorParams::Ba { .. } => GeneratorFamily::Ba,
            GeneratorParams::Sbm { .. } => GeneratorFamily::Sbm,
            GeneratorParams::Lfr(_) => GeneratorFamily::Lfr,
            GeneratorParams::Npso(_) => GeneratorFamily::Npso,
            GeneratorParams::Rewire { .. } => GeneratorFamily::Rewire,
            GeneratorParams::ErMatch => GeneratorFamily::ErMatch,
        }
    }
}

/// A fully specified generation request: family parameters plus a seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub params: GeneratorParams,
    pub seed: u64,
}

impl GeneratorSpec {
    /// Run the generator. Perturbation families (`Rewire`, `ErMatch`)
    /// require a `base` subject graph.
    pub fn generate(&self, base: Option<&Graph>) -> Result<Graph> {
        match &self.params {
            GeneratorParams::Er { n, p } => gen_er(*n, *p, self.seed),
            GeneratorParams::Ba { n, m } => gen_ba(*n, *m, self.seed),
            GeneratorParams::Sbm { block_sizes, p } => gen_sbm(block_sizes, p, self.seed),
            GeneratorParams::Lfr(lp) => gen_lfr(lp, self.seed),
            GeneratorParams::Npso(np) => gen_npso(np, self.seed),
            GeneratorParams::Rewire { swaps_per_edge } => {
                let g = base.ok_or_else(|| {
                    Error::Argument("REWIRE is a perturbation family and needs a subject graph".into())
                })?;
                Ok(rewire_preserving_degree(g, *swaps_per_edge, self.seed))
            }
            GeneratorParams::ErMatch => {
                let g = base.ok_or_else(|| {
                    Error::Argument("ER_MATCH is a perturbation family and needs a subject graph".into())
                })?;
                Ok(gen_er_match(g, self.seed))
            }
        }
    }
}

fn rng_from(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

/// One standard normal draw via Box-Muller (cosine branch only).
fn sample_normal(rng: &mut ChaCha8Rng, mean: f64, std: f64) -> f64 {
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    mean + std * (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Erdős–Rényi G(n, p): every unordered pair drawn independently, in
/// canonical pair order.
pub fn gen_er(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if n == 0 {
        return Err(Error::Argument("gen_er: n must be >= 1".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Argument(format!("gen_er: p = {p} outside [0, 1]")));
    }
    let mut rng = rng_from(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_pairs(n, edges)
}

/// Barabási–Albert preferential attachment.
///
/// The seed graph is an `m`-node path; nodes `m..n` each attach to `m`
/// distinct existing nodes sampled without replacement with probability
/// proportional to degree. Edge count is exactly `(m - 1) + m * (n - m)`.
pub fn gen_ba(n: usize, m: usize, seed: u64) -> Result<Graph> {
    if m < 1 || m >= n {
        return Err(Error::Argument(format!("gen_ba: need 1 <= m < n, got m = {m}, n = {n}")));
    }
    let mut rng = rng_from(seed);
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(m * n);
    // degree-weighted endpoint multiset: sampling an entry uniformly is a
    // preferential draw
    let mut targets: Vec<usize> = Vec::with_capacity(2 * m * n);
    for i in 0..m.saturating_sub(1) {
        edges.push((i, i + 1));
        targets.push(i);
        targets.push(i + 1);
    }
    let mut chosen: Vec<usize> = Vec::with_capacity(m);
    for t in m..n {
        chosen.clear();
        while chosen.len() < m {
            let cand = if targets.is_empty() {
                rng.random_range(0..t)
            } else {
                targets[rng.random_range(0..targets.len())]
            };
            if !chosen.contains(&cand) {
                chosen.push(cand);
            }
        }
        for &c in &chosen {
            edges.push((c, t));
            targets.push(c);
            targets.push(t);
        }
    }
    Graph::from_pairs(n, edges)
}

/// Stochastic block model with a symmetric block probability matrix.
pub fn gen_sbm(block_sizes: &[usize], p: &[Vec<f64>], seed: u64) -> Result<Graph> {
    let k = block_sizes.len();
    if k == 0 {
        return Err(Error::Argument("gen_sbm: no blocks".into()));
    }
    if p.len() != k || p.iter().any(|row| row.len() != k) {
        return Err(Error::Argument(format!("gen_sbm: P must be {k}x{k}")));
    }
    for i in 0..k {
        for j in 0..k {
            if !(0.0..=1.0).contains(&p[i][j]) {
                return Err(Error::Argument(format!(
                    "gen_sbm: P[{i}][{j}] = {} outside [0, 1]",
                    p[i][j]
                )));
            }
            if p[i][j] != p[j][i] {
                return Err(Error::Argument("gen_sbm: P is not symmetric".into()));
            }
        }
    }
    let n: usize = block_sizes.iter().sum();
    let mut block_of = Vec::with_capacity(n);
    for (b, &size) in block_sizes.iter().enumerate() {
        block_of.extend(std::iter::repeat_n(b, size));
    }
    let mut rng = rng_from(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random::<f64>() < p[block_of[u]][block_of[v]] {
                edges.push((u, v));
            }
        }
    }
    Graph::from_pairs(n, edges)
}

/// Mean of the continuous truncated power law with density ∝ x^(-tau)
/// on [lo, hi].
fn power_law_mean(tau: f64, lo: f64, hi: f64) -> f64 {
    if (tau - 2.0).abs() < 1e-12 {
        // E = ln(hi/lo) / (1/lo - 1/hi)
        (hi / lo).ln() / (1.0 / lo - 1.0 / hi)
    } else if (tau - 1.0).abs() < 1e-12 {
        (hi - lo) / (hi / lo).ln()
    } else {
        let a = 1.0 - tau;
        let b = 2.0 - tau;
        (a / b) * (hi.powf(b) - lo.powf(b)) / (hi.powf(a) - lo.powf(a))
    }
}

/// Inverse-CDF draw from the continuous truncated power law on [lo, hi].
fn sample_power_law(rng: &mut ChaCha8Rng, tau: f64, lo: f64, hi: f64) -> f64 {
    let u: f64 = rng.random();
    let a = 1.0 - tau;
    (lo.powf(a) + u * (hi.powf(a) - lo.powf(a))).powf(1.0 / a)
}

/// LFR benchmark graph; returns the planted community label per node
/// alongside the graph.
pub fn gen_lfr_with_communities(p: &LfrParams, seed: u64) -> Result<(Graph, Vec<usize>)> {
    validate_lfr(p)?;
    let mut rng = rng_from(seed);

    // degree sequence: calibrate the lower cutoff so the truncated power law
    // has mean avg_deg, then sample and round
    let hi = p.max_deg as f64;
    let lo = calibrate_power_law_low(p.tau1, hi, p.avg_deg);
    let mut degrees: Vec<usize> = (0..p.n)
        .map(|_| {
            let x = sample_power_law(&mut rng, p.tau1, lo, hi).round();
            (x as usize).clamp(1, p.max_deg)
        })
        .collect();
    if degrees.iter().sum::<usize>() % 2 == 1 {
        // repair parity with a minimal bump
        let v = rng.random_range(0..p.n);
        if degrees[v] < p.max_deg {
            degrees[v] += 1;
        } else {
            degrees[v] -= 1;
        }
    }

    let comm_sizes = sample_community_sizes(&mut rng, p)?;
    let n_comms = comm_sizes.len();

    // intra-community stub targets; the ceiling systematically overshoots
    // the (1 - mu) fraction, so the overshoot is tallied and paid back later
    // by rewiring an equivalent number of same-community external pairs
    let mut internal: Vec<usize> = Vec::with_capacity(p.n);
    let mut ceil_excess = 0.0f64;
    for &d in &degrees {
        let exact = (1.0 - p.mu) * d as f64;
        let stubs = (exact.ceil() as usize).min(d);
        ceil_excess += stubs as f64 - exact;
        internal.push(stubs);
    }

    let labels = assign_communities(&mut rng, &degrees, &internal, &comm_sizes)?;

    let mut edge_set: HashSet<(usize, usize)> = HashSet::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();

    // internal stub matching, one community at a time
    for c in 0..n_comms {
        let members: Vec<usize> = (0..p.n).filter(|&v| labels[v] == c).collect();
        let mut stub_sum: usize = members.iter().map(|&v| internal[v]).sum();
        if stub_sum % 2 == 1 {
            // move one stub to the external side
            let with_stub: Vec<usize> =
                members.iter().copied().filter(|&v| internal[v] > 0).collect();
            let v = with_stub[rng.random_range(0..with_stub.len())];
            internal[v] -= 1;
            stub_sum -= 1;
        }
        let _ = stub_sum;
        let mut stubs: Vec<usize> = Vec::new();
        for &v in &members {
            stubs.extend(std::iter::repeat_n(v, internal[v]));
        }
        match_stubs(&mut rng, stubs, &mut edges, &mut edge_set, None);
    }

    // external stubs matched globally, then rewired away from same-community
    // pairs where possible
    let mut ext: Vec<usize> = (0..p.n).map(|v| degrees[v] - internal[v]).collect();
    if ext.iter().sum::<usize>() % 2 == 1 {
        let with_stub: Vec<usize> = (0..p.n).filter(|&v| ext[v] > 0).collect();
        if !with_stub.is_empty() {
            let v = with_stub[rng.random_range(0..with_stub.len())];
            ext[v] -= 1;
        }
    }
    let mut stubs: Vec<usize> = Vec::new();
    for v in 0..p.n {
        stubs.extend(std::iter::repeat_n(v, ext[v]));
    }
    let first_external = edges.len();
    match_stubs(&mut rng, stubs, &mut edges, &mut edge_set, Some(&labels));
    // each repaired pair moves one edge (two endpoints) from the internal to
    // the crossing side, so half the stub overshoot is the right budget
    let budget = (ceil_excess / 2.0).round() as usize;
    repair_mixing(&mut rng, &mut edges, &mut edge_set, &labels, first_external, budget);

    let g = Graph::from_pairs(p.n, edges)?;
    Ok((g, labels))
}

/// LFR benchmark graph (planted labels discarded).
pub fn gen_lfr(p: &LfrParams, seed: u64) -> Result<Graph> {
    gen_lfr_with_communities(p, seed).map(|(g, _)| g)
}

fn validate_lfr(p: &LfrParams) -> Result<()> {
    if p.tau1 <= 1.0 || p.tau2 <= 1.0 {
        return Err(Error::Argument("gen_lfr: exponents must be > 1".into()));
    }
    if !(0.0..=1.0).contains(&p.mu) {
        return Err(Error::Argument(format!("gen_lfr: mu = {} outside [0, 1]", p.mu)));
    }
    if p.avg_deg < 1.0 || p.avg_deg > p.max_deg as f64 || p.max_deg >= p.n {
        return Err(Error::Argument(
            "gen_lfr: need 1 <= avg_deg <= max_deg < n".into(),
        ));
    }
    if p.min_comm < 1 || p.min_comm > p.max_comm || p.max_comm > p.n {
        return Err(Error::Argument(
            "gen_lfr: need 1 <= min_comm <= max_comm <= n".into(),
        ));
    }
    Ok(())
}

/// Bisect the power-law lower cutoff so the truncated mean hits `target`.
fn calibrate_power_law_low(tau: f64, hi: f64, target: f64) -> f64 {
    if power_law_mean(tau, 1.0, hi) >= target {
        return 1.0;
    }
    let (mut lo_b, mut hi_b) = (1.0_f64, hi);
    for _ in 0..100 {
        let mid = 0.5 * (lo_b + hi_b);
        if power_law_mean(tau, mid, hi) < target {
            lo_b = mid;
        } else {
            hi_b = mid;
        }
    }
    0.5 * (lo_b + hi_b)
}

fn sample_community_sizes(rng: &mut ChaCha8Rng, p: &LfrParams) -> Result<Vec<usize>> {
    if p.n < p.min_comm {
        return Err(Error::Generation(format!(
            "gen_lfr: n = {} is smaller than min_comm = {}",
            p.n, p.min_comm
        )));
    }
    for _attempt in 0..1000 {
        let mut sizes: Vec<usize> = Vec::new();
        let mut total = 0usize;
        while total < p.n {
            let s = sample_power_law(rng, p.tau2, p.min_comm as f64, p.max_comm as f64).round()
                as usize;
            let s = s.clamp(p.min_comm, p.max_comm);
            sizes.push(s);
            total += s;
        }
        let overshoot = total - p.n;
        if overshoot == 0 {
            return Ok(sizes);
        }
        // shrink the largest community that can absorb the overshoot
        if let Some(idx) = (0..sizes.len())
            .filter(|&i| sizes[i] >= p.min_comm + overshoot)
            .max_by_key(|&i| sizes[i])
        {
            sizes[idx] -= overshoot;
            return Ok(sizes);
        }
    }
    Err(Error::Generation(
        "gen_lfr: could not fit community sizes to n within 1000 attempts".into(),
    ))
}

/// Assign each node a community whose size can host its internal degree.
fn assign_communities(
    rng: &mut ChaCha8Rng,
    degrees: &[usize],
    internal: &[usize],
    comm_sizes: &[usize],
) -> Result<Vec<usize>> {
    let n = degrees.len();
    let max_internal = internal.iter().copied().max().unwrap_or(0);
    let max_size = comm_sizes.iter().copied().max().unwrap_or(0);
    if max_internal + 1 > max_size {
        return Err(Error::Generation(format!(
            "gen_lfr: internal degree {max_internal} cannot fit in any community (largest size {max_size}); \
             raise max_comm or mu, or lower max_deg"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(internal[v]), v));
    'retry: for _attempt in 0..50 {
        let mut free: Vec<usize> = comm_sizes.to_vec();
        let mut labels = vec![usize::MAX; n];
        for &v in &order {
            let feasible: Vec<usize> = (0..comm_sizes.len())
                .filter(|&c| free[c] > 0 && comm_sizes[c] > internal[v])
                .collect();
            if feasible.is_empty() {
                continue 'retry;
            }
            // weight by remaining capacity to keep fills balanced
            let total: usize = feasible.iter().map(|&c| free[c]).sum();
            let mut pick = rng.random_range(0..total);
            let mut chosen = feasible[0];
            for &c in &feasible {
                if pick < free[c] {
                    chosen = c;
                    break;
                }
                pick -= free[c];
            }
            labels[v] = chosen;
            free[chosen] -= 1;
        }
        return Ok(labels);
    }
    Err(Error::Generation(
        "gen_lfr: community assignment failed after 50 attempts; constraints too tight".into(),
    ))
}

/// Shuffle stubs and pair the halves; self-pairs and duplicates are repaired
/// by swapping with already-accepted pairs, and dropped if unrepairable.
fn match_stubs(
    rng: &mut ChaCha8Rng,
    mut stubs: Vec<usize>,
    edges: &mut Vec<(usize, usize)>,
    edge_set: &mut HashSet<(usize, usize)>,
    _labels: Option<&[usize]>,
) {
    shuffle(rng, &mut stubs);
    let first_new = edges.len();
    let half = stubs.len() / 2;
    for i in 0..half {
        let (a, b) = (stubs[i], stubs[half + i]);
        let pair = canonical(a, b);
        if a != b && !edge_set.contains(&pair) {
            edge_set.insert(pair);
            edges.push(pair);
            continue;
        }
        // conflicted pair: swap an endpoint with a random accepted edge
        let mut fixed = false;
        if edges.len() > first_new {
            for _ in 0..200 {
                let j = first_new + rng.random_range(0..(edges.len() - first_new));
                let (c, d) = edges[j];
                let (x, y) = if rng.random::<bool>() { (c, d) } else { (d, c) };
                let p1 = canonical(a, y);
                let p2 = canonical(x, b);
                if a != y
                    && x != b
                    && p1 != p2
                    && !edge_set.contains(&p1)
                    && !edge_set.contains(&p2)
                {
                    edge_set.remove(&(c, d));
                    edges[j] = p1;
                    edge_set.insert(p1);
                    edges.push(p2);
                    edge_set.insert(p2);
                    fixed = true;
                    break;
                }
            }
        }
        if !fixed {
            // drop the stub pair; a handful of lost stubs is acceptable
        }
    }
}

/// Swap up to `budget` same-community external edges against crossing ones.
///
/// External stubs are matched at random, so a fraction of them naturally
/// lands inside a community; that rate is part of the model. The budget only
/// compensates the deterministic overshoot introduced by the internal-stub
/// ceiling, keeping realized mixing centered on the target without forcing
/// anti-community structure at high mu.
fn repair_mixing(
    rng: &mut ChaCha8Rng,
    edges: &mut [(usize, usize)],
    edge_set: &mut HashSet<(usize, usize)>,
    labels: &[usize],
    first_external: usize,
    budget: usize,
) {
    let ext_count = edges.len().saturating_sub(first_external);
    if ext_count < 2 || budget == 0 {
        return;
    }
    let mut bad: Vec<usize> = (first_external..edges.len())
        .filter(|&i| labels[edges[i].0] == labels[edges[i].1])
        .collect();
    shuffle(rng, &mut bad);
    let mut repaired = 0usize;
    for &i in &bad {
        if repaired >= budget {
            break;
        }
        let (a, b) = edges[i];
        if labels[a] != labels[b] {
            continue; // consumed as a partner in an earlier swap
        }
        for _ in 0..50 {
            let j = first_external + rng.random_range(0..ext_count);
            if j == i {
                continue;
            }
            let (c, d) = edges[j];
            let (x, y) = if rng.random::<bool>() { (c, d) } else { (d, c) };
            let p1 = canonical(a, y);
            let p2 = canonical(x, b);
            let crossings_before = usize::from(labels[c] != labels[d]);
            let crossings_after =
                usize::from(labels[a] != labels[y]) + usize::from(labels[x] != labels[b]);
            if a != y
                && x != b
                && p1 != p2
                && crossings_after > crossings_before
                && !edge_set.contains(&p1)
                && !edge_set.contains(&p2)
            {
                edge_set.remove(&(a, b));
                edge_set.remove(&(c, d));
                edges[i] = p1;
                edges[j] = p2;
                edge_set.insert(p1);
                edge_set.insert(p2);
                repaired += 1;
                break;
            }
        }
    }
}

fn canonical(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Fisher-Yates shuffle driven by the generator's own stream.
fn shuffle<T>(rng: &mut ChaCha8Rng, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = rng.random_range(0..=i);
        items.swap(i, j);
    }
}

/// Non-uniform popularity-similarity optimization model on the hyperbolic disk.
///
/// Node `t` (1-based) enters at radius `2 ln t` with an angular coordinate
/// drawn from a Gaussian mixture with `communities` equally spaced means;
/// earlier nodes drift outward as popularity fades. At temperature 0 each new
/// node links to the `m` hyperbolically closest nodes; otherwise every
/// existing node is linked independently with Fermi-Dirac probability, the
/// cutoff radius calibrated by bisection so the expected attachment count
/// is `m`.
pub fn gen_npso(p: &NpsoParams, seed: u64) -> Result<Graph> {
    if p.m < 1 || p.n <= p.m {
        return Err(Error::Argument(format!(
            "gen_npso: need n > m >= 1, got n = {}, m = {}",
            p.n, p.m
        )));
    }
    if p.gamma <= 2.0 {
        return Err(Error::Argument("gen_npso: gamma must be > 2".into()));
    }
    if p.temperature < 0.0 {
        return Err(Error::Argument("gen_npso: temperature must be >= 0".into()));
    }
    if p.communities < 1 || p.communities > p.n {
        return Err(Error::Argument(format!(
            "gen_npso: communities = {} outside [1, n = {}]",
            p.communities, p.n
        )));
    }
    let mut rng = rng_from(seed);
    let beta = 1.0 / (p.gamma - 1.0);
    let c = p.communities;
    let angles: Vec<f64> = (0..p.n)
        .map(|_| {
            let comp = rng.random_range(0..c);
            let mean = 2.0 * PI * (comp as f64) / (c as f64);
            sample_normal(&mut rng, mean, p.kappa).rem_euclid(2.0 * PI)
        })
        .collect();

    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(p.m * p.n);
    let mut dist_buf: Vec<(f64, usize)> = Vec::with_capacity(p.n);
    for t in 2..=p.n {
        let node = t - 1; // 0-based id
        let r_new = 2.0 * (t as f64).ln();
        dist_buf.clear();
        for s in 1..t {
            let existing = s - 1;
            let r_s = beta * 2.0 * (s as f64).ln() + (1.0 - beta) * r_new;
            let d = hyperbolic_distance(r_s, angles[existing], r_new, angles[node]);
            dist_buf.push((d, existing));
        }
        if t - 1 <= p.m {
            for s in 0..(t - 1) {
                edges.push((s, node));
            }
        } else if p.temperature == 0.0 {
            dist_buf.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
            for &(_, s) in dist_buf.iter().take(p.m) {
                edges.push(canonical(s, node));
            }
        } else {
            let radius = calibrate_fermi_radius(&dist_buf, p.m as f64, p.temperature);
            for &(d, s) in dist_buf.iter() {
                let prob = 1.0 / (1.0 + ((d - radius) / (2.0 * p.temperature)).exp());
                if rng.random::<f64>() < prob {
                    edges.push(canonical(s, node));
                }
            }
        }
    }
    Graph::from_pairs(p.n, edges)
}

fn hyperbolic_distance(r1: f64, th1: f64, r2: f64, th2: f64) -> f64 {
    let dth = PI - (PI - (th1 - th2).abs().rem_euclid(2.0 * PI)).abs();
    if dth == 0.0 {
        return (r1 - r2).abs();
    }
    let x = r1.cosh() * r2.cosh() - r1.sinh() * r2.sinh() * dth.cos();
    x.max(1.0).acosh()
}

/// Bisection for the Fermi-Dirac cutoff with expected attachment `target`.
fn calibrate_fermi_radius(dists: &[(f64, usize)], target: f64, temp: f64) -> f64 {
    let expected = |r: f64| -> f64 {
        dists
            .iter()
            .map(|&(d, _)| 1.0 / (1.0 + ((d - r) / (2.0 * temp)).exp()))
            .sum()
    };
    let dmin = dists.iter().map(|&(d, _)| d).fold(f64::INFINITY, f64::min);
    let dmax = dists.iter().map(|&(d, _)| d).fold(f64::NEG_INFINITY, f64::max);
    let (mut lo, mut hi) = (dmin - 80.0 * temp, dmax + 80.0 * temp);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if expected(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Degree-preserving double-edge-swap randomization.
///
/// Attempts `round(swaps_per_edge * |E|)` swaps; a swap replacing
/// (a,b),(c,d) with (a,d),(c,b) is rejected if it would create a self-loop
/// or duplicate edge. The degree multiset is invariant.
pub fn rewire_preserving_degree(g: &Graph, swaps_per_edge: f64, seed: u64) -> Graph {
    let mut edges: Vec<(usize, usize)> = g.edges().to_vec();
    if edges.len() < 2 || swaps_per_edge <= 0.0 {
        return g.clone();
    }
    let mut edge_set: HashSet<(usize, usize)> = edges.iter().copied().collect();
    let mut rng = rng_from(seed);
    let attempts = (swaps_per_edge * edges.len() as f64).round() as usize;
    for _ in 0..attempts {
        let i = rng.random_range(0..edges.len());
        let j = rng.random_range(0..edges.len());
        if i == j {
            continue;
        }
        let (a, b) = edges[i];
        let (c, d) = edges[j];
        let (x, y) = if rng.random::<bool>() { (c, d) } else { (d, c) };
        if a == y || x == b {
            continue;
        }
        let p1 = canonical(a, y);
        let p2 = canonical(x, b);
        if p1 == p2 || edge_set.contains(&p1) || edge_set.contains(&p2) {
            continue;
        }
        edge_set.remove(&(a, b));
        edge_set.remove(&(c, d));
        edges[i] = p1;
        edges[j] = p2;
        edge_set.insert(p1);
        edge_set.insert(p2);
    }
    Graph::from_pairs(g.node_count(), edges).expect("swap preserves validity")
}

/// Uniform random graph with exactly the node and edge counts of `reference`.
pub fn gen_er_match(reference: &Graph, seed: u64) -> Graph {
    let n = reference.node_count();
    let m = reference.edge_count();
    let mut rng = rng_from(seed);
    let mut chosen: HashSet<(usize, usize)> = HashSet::with_capacity(m);
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(m);
    while edges.len() < m {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u == v {
            continue;
        }
        let pair = canonical(u, v);
        if chosen.insert(pair) {
            edges.push(pair);
        }
    }
    Graph::from_pairs(n, edges).expect("pairs validated")
}

/// Newman modularity of a node partition.
pub fn planted_modularity(g: &Graph, labels: &[usize]) -> f64 {
    let m2 = 2.0 * g.edge_count() as f64;
    if m2 == 0.0 {
        return 0.0;
    }
    let n_comms = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut intra = vec![0f64; n_comms];
    let mut deg_sum = vec![0f64; n_comms];
    for &(u, v) in g.edges() {
        if labels[u] == labels[v] {
            intra[labels[u]] += 1.0;
        }
    }
    for v in 0..g.node_count() {
        deg_sum[labels[v]] += g.degree(v) as f64;
    }
    (0..n_comms)
        .map(|c| intra[c] / (m2 / 2.0) - (deg_sum[c] / m2).powi(2))
        .sum()
}

/// Mean over non-isolated nodes of the fraction of incident edges that cross
/// community boundaries.
pub fn realized_mixing(g: &Graph, labels: &[usize]) -> f64 {
    let mut external = vec![0usize; g.node_count()];
    for &(u, v) in g.edges() {
        if labels[u] != labels[v] {
            external[u] += 1;
            external[v] += 1;
        }
    }
    let mut sum = 0f64;
    let mut count = 0usize;
    for v in 0..g.node_count() {
        let d = g.degree(v);
        if d > 0 {
            sum += external[v] as f64 / d as f64;
            count += 1;
        }
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Draw Table-style corpus parameters for one graph of `family`.
///
/// Ranges are expressed through expected degrees so corpora stay comparable
/// across node counts; they are defaults, not ground truth for any external
/// corpus.
pub fn sample_params(family: GeneratorFamily, n: usize, rng: &mut ChaCha8Rng) -> GeneratorParams {
    match family {
        GeneratorFamily::Er => {
            let mean_deg = 16.0 + 4.0 * rng.random::<f64>();
            GeneratorParams::Er {
                n,
                p: (mean_deg / (n as f64 - 1.0)).min(1.0),
            }
        }
        GeneratorFamily::Ba => {
            // same attachment range as nPSO: the two families then share
            // their degree scale and differ in geometry, not density
            let lo = ((0.014 * n as f64).round() as usize).max(2);
            let hi = ((0.017 * n as f64).round() as usize).max(lo + 1);
            GeneratorParams::Ba {
                n,
                m: rng.random_range(lo..=hi).min(n - 1),
            }
        }
        GeneratorFamily::Sbm => {
            let k = rng.random_range(2..=5usize);
            let base = n / k;
            let mut sizes = vec![base; k];
            for s in sizes.iter_mut().take(n - base * k) {
                *s += 1;
            }
            let within = 20.0 + 8.0 * rng.random::<f64>();
            let across = 4.0 + 4.0 * rng.random::<f64>();
            let p_in = (within / base as f64).min(1.0);
            let p_out = (across / (n - base) as f64).min(1.0);
            let p = (0..k)
                .map(|i| (0..k).map(|j| if i == j { p_in } else { p_out }).collect())
                .collect();
            GeneratorParams::Sbm {
                block_sizes: sizes,
                p,
            }
        }
        GeneratorFamily::Lfr => GeneratorParams::Lfr(LfrParams {
            n,
            tau1: 2.2 + 0.8 * rng.random::<f64>(),
            tau2: 1.5,
            mu: 0.1 + 0.4 * rng.random::<f64>(),
            avg_deg: 12.0 + 8.0 * rng.random::<f64>(),
            max_deg: (n / 6).clamp(10, 50),
            min_comm: (n / 15).clamp(5, 20),
            max_comm: (n / 3).clamp(10, 100),
        }),
        GeneratorFamily::Npso => {
            let lo = ((0.014 * n as f64).round() as usize).max(2);
            let hi = ((0.017 * n as f64).round() as usize).max(lo + 1);
            GeneratorParams::Npso(NpsoParams {
                n,
                m: rng.random_range(lo..=hi).min(n - 1),
                gamma: 2.6 + 0.4 * rng.random::<f64>(),
                temperature: 0.1 + 0.4 * rng.random::<f64>(),
                communities: rng.random_range(4..=8usize),
                kappa: 0.1 + 0.15 * rng.random::<f64>(),
            })
        }
        GeneratorFamily::Rewire => GeneratorParams::Rewire {
            swaps_per_edge: 10.0,
        },
        GeneratorFamily::ErMatch => GeneratorParams::ErMatch,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn er_p_one_is_complete() {
        let g = gen_er(4, 1.0, 7).unwrap();
        assert_eq!(g.edge_count(), 6);
    }

    #[test]
    fn er_p_zero_is_empty() {
        let g = gen_er(1000, 0.0, 7).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.node_count(), 1000);
    }

    #[test]
    fn er_p_out_of_range() {
        assert!(matches!(gen_er(10, 1.5, 0), Err(Error::Argument(_))));
        assert!(matches!(gen_er(10, -0.1, 0), Err(Error::Argument(_))));
    }

    #[test]
    fn er_mean_edge_count_within_4_sigma() {
        let (n, p, trials) = (200usize, 0.05f64, 200usize);
        let pairs = (n * (n - 1) / 2) as f64;
        let mean = pairs * p;
        let sigma = (pairs * p * (1.0 - p)).sqrt();
        let total: f64 = (0..trials)
            .map(|s| gen_er(n, p, s as u64).unwrap().edge_count() as f64)
            .sum();
        let empirical = total / trials as f64;
        // standard error of the mean over `trials` draws
        let tolerance = 4.0 * sigma / (trials as f64).sqrt();
        assert!(
            (empirical - mean).abs() < tolerance,
            "empirical {empirical} vs binomial {mean} +- {tolerance}"
        );
    }

    #[test]
    fn ba_m1_is_tree() {
        let g = gen_ba(5, 1, 3).unwrap();
        assert_eq!(g.edge_count(), 4);
        assert_eq!(crate::graph::connected_components(&g).sizes, vec![5]);
    }

    #[test]
    fn ba_edge_count_formula() {
        for &(n, m) in &[(10usize, 3usize), (50, 7), (200, 10), (1000, 10)] {
            let g = gen_ba(n, m, 11).unwrap();
            assert_eq!(g.edge_count(), (m - 1) + m * (n - m), "n={n} m={m}");
        }
    }

    #[test]
    fn ba_rejects_m_ge_n() {
        assert!(matches!(gen_ba(5, 5, 0), Err(Error::Argument(_))));
    }

    #[test]
    fn ba_hubs_emerge() {
        let mut hits = 0;
        for s in 0..20u64 {
            let g = gen_ba(500, 5, s).unwrap();
            let mean = 2.0 * g.edge_count() as f64 / g.node_count() as f64;
            if g.max_degree() as f64 > 5.0 * mean {
                hits += 1;
            }
        }
        assert!(hits >= 18, "hubs in only {hits}/20 runs");
    }

    #[test]
    fn sbm_two_disjoint_triangles() {
        let g = gen_sbm(&[3, 3], &[vec![1.0, 0.0], vec![0.0, 1.0]], 5).unwrap();
        assert_eq!(g.edge_count(), 6);
        assert_eq!(crate::graph::connected_components(&g).sizes, vec![3, 3]);
    }

    #[test]
    fn sbm_rejects_asymmetric() {
        let err = gen_sbm(&[2, 2], &[vec![0.5, 0.1], vec![0.2, 0.5]], 0).unwrap_err();
        assert!(matches!(err, Error::Argument(_)));
    }

    #[test]
    fn sbm_uniform_matches_er_statistics() {
        let q = 0.05;
        let trials = 30u64;
        let n = 400usize;
        let mut total = 0f64;
        for s in 0..trials {
            let g = gen_sbm(&[n / 2, n / 2], &[vec![q, q], vec![q, q]], s).unwrap();
            total += 2.0 * g.edge_count() as f64 / n as f64;
        }
        let mean_deg = total / trials as f64;
        let expect = (n as f64 - 1.0) * q;
        // binomial std of the mean degree across trials
        let sigma = ((n as f64 - 1.0) * q * (1.0 - q) / (n as f64 * trials as f64 / 2.0)).sqrt();
        assert!(
            (mean_deg - expect).abs() < 4.0 * sigma,
            "mean degree {mean_deg} vs {expect}"
        );
    }

    #[test]
    fn sbm_within_block_density() {
        let sizes = vec![250usize; 4];
        let p_in = 0.1;
        let p = (0..4)
            .map(|i| (0..4).map(|j| if i == j { p_in } else { 0.005 }).collect())
            .collect::<Vec<Vec<f64>>>();
        let mut per_block = [0f64; 4];
        let trials = 20u64;
        for s in 0..trials {
            let g = gen_sbm(&sizes, &p, s).unwrap();
            for &(u, v) in g.edges() {
                let (bu, bv) = (u / 250, v / 250);
                if bu == bv {
                    per_block[bu] += 1.0;
                }
            }
        }
        let pairs = (250.0 * 249.0) / 2.0;
        for (b, &count) in per_block.iter().enumerate() {
            let density = count / (pairs * trials as f64);
            assert!(
                (density - p_in).abs() < 0.2 * p_in,
                "block {b}: density {density} vs {p_in}"
            );
        }
    }

    fn small_lfr(mu: f64) -> LfrParams {
        LfrParams {
            n: 400,
            tau1: 2.5,
            tau2: 1.5,
            mu,
            avg_deg: 10.0,
            max_deg: 40,
            min_comm: 20,
            max_comm: 80,
        }
    }

    #[test]
    fn lfr_mu_zero_is_modular() {
        let (g, labels) = gen_lfr_with_communities(&small_lfr(0.0), 9).unwrap();
        assert!(planted_modularity(&g, &labels) > 0.5);
    }

    #[test]
    fn lfr_mu_one_kills_modularity() {
        let mut total = 0f64;
        for s in 0..10u64 {
            let (g, labels) = gen_lfr_with_communities(&small_lfr(1.0), s).unwrap();
            total += planted_modularity(&g, &labels);
        }
        assert!((total / 10.0).abs() < 0.05, "mean |Q| = {}", total / 10.0);
    }

    #[test]
    fn lfr_internal_fraction_tracks_mu() {
        for &mu in &[0.2f64, 0.5] {
            let (g, labels) = gen_lfr_with_communities(&small_lfr(mu), 17).unwrap();
            let mixing = realized_mixing(&g, &labels);
            assert!(
                (mixing - mu).abs() < 0.1,
                "mu = {mu}: realized mixing {mixing}"
            );
        }
    }

    #[test]
    fn lfr_rejects_bad_params() {
        let mut p = small_lfr(0.2);
        p.mu = 1.5;
        assert!(matches!(gen_lfr(&p, 0), Err(Error::Argument(_))));
        let mut p = small_lfr(0.2);
        p.max_deg = 500;
        assert!(matches!(gen_lfr(&p, 0), Err(Error::Argument(_))));
    }

    fn npso(n: usize, m: usize, t: f64) -> NpsoParams {
        NpsoParams {
            n,
            m,
            gamma: 2.5,
            temperature: t,
            communities: 4,
            kappa: 0.15,
        }
    }

    #[test]
    fn npso_zero_temperature_edge_count() {
        let p = npso(200, 4, 0.0);
        let g = gen_npso(&p, 23).unwrap();
        assert_eq!(g.edge_count(), p.m * (p.n - p.m) + p.m * (p.m - 1) / 2);
        // nodes past the initial clique have degree >= m
        for v in (p.m + 1)..p.n {
            assert!(g.degree(v) >= 1);
        }
    }

    #[test]
    fn npso_positive_temperature_edge_count_near_expectation() {
        let p = npso(300, 5, 0.2);
        let expect = (p.m * (p.n - p.m) + p.m * (p.m - 1) / 2) as f64;
        let mut total = 0f64;
        for s in 0..10u64 {
            total += gen_npso(&p, s).unwrap().edge_count() as f64;
        }
        let mean = total / 10.0;
        assert!(
            (mean - expect).abs() < 0.05 * expect,
            "mean edges {mean} vs expected {expect}"
        );
    }

    #[test]
    fn npso_large_scale_edge_range() {
        // at n = 1000 the attachment band m in 15..=17 lands in the
        // default corpus edge range for this family, 14_026..=17_462
        for (s, m) in [(1u64, 15usize), (2, 16), (3, 17)] {
            let p = NpsoParams {
                n: 1000,
                m,
                gamma: 2.8,
                temperature: 0.1,
                communities: 8,
                kappa: 0.15,
            };
            let e = gen_npso(&p, s).unwrap().edge_count();
            assert!(
                (14_026..=17_462).contains(&e),
                "m = {m}: {e} edges outside the documented range"
            );
        }
    }

    #[test]
    fn npso_rejects_too_many_communities() {
        let mut p = npso(20, 3, 0.1);
        p.communities = 30;
        assert!(matches!(gen_npso(&p, 0), Err(Error::Argument(_))));
    }

    #[test]
    fn npso_clusters_more_than_matched_er() {
        let p = npso(300, 5, 0.1);
        let mut wins = 0;
        for s in 0..5u64 {
            let g = gen_npso(&p, s).unwrap();
            let er = gen_er_match(&g, s ^ 0xabcd);
            let mean = |g: &Graph| {
                let c = crate::features::local_clustering(g);
                c.iter().sum::<f64>() / c.len() as f64
            };
            if mean(&g) > 3.0 * mean(&er) {
                wins += 1;
            }
        }
        assert!(wins >= 4, "clustering advantage in only {wins}/5 runs");
    }

    #[test]
    fn rewire_zero_swaps_is_identity() {
        let g = gen_er(50, 0.1, 2).unwrap();
        assert_eq!(rewire_preserving_degree(&g, 0.0, 1), g);
    }

    #[test]
    fn rewire_preserves_degree_multiset() {
        let g = gen_ba(200, 4, 5).unwrap();
        let r = rewire_preserving_degree(&g, 10.0, 6);
        let mut a = g.degrees();
        let mut b = r.degrees();
        a.sort_unstable();
        b.sort_unstable();
        assert_eq!(a, b);
        assert_ne!(g, r, "10 swaps per edge should move something");
    }

    #[test]
    fn er_match_preserves_counts() {
        let g = gen_ba(100, 3, 1).unwrap();
        let e = gen_er_match(&g, 9);
        assert_eq!(e.node_count(), g.node_count());
        assert_eq!(e.edge_count(), g.edge_count());
    }

    #[test]
    fn all_families_are_deterministic() {
        let specs = vec![
            GeneratorParams::Er { n: 80, p: 0.1 },
            GeneratorParams::Ba { n: 80, m: 3 },
            GeneratorParams::Sbm {
                block_sizes: vec![40, 40],
                p: vec![vec![0.2, 0.02], vec![0.02, 0.2]],
            },
            GeneratorParams::Lfr(LfrParams {
                n: 120,
                tau1: 2.5,
                tau2: 1.5,
                mu: 0.3,
                avg_deg: 8.0,
                max_deg: 20,
                min_comm: 10,
                max_comm: 40,
            }),
            GeneratorParams::Npso(NpsoParams {
                n: 80,
                m: 3,
                gamma: 2.5,
                temperature: 0.3,
                communities: 4,
                kappa: 0.2,
            }),
        ];
        for params in specs {
            let spec = GeneratorSpec {
                params,
                seed: 0xfeed,
            };
            let a = spec.generate(None).unwrap();
            let b = spec.generate(None).unwrap();
            assert_eq!(
                a.to_edge_list_string(),
                b.to_edge_list_string(),
                "{:?}",
                spec.params.family()
            );
        }
    }
}
