//! Graph embedder: stacked graph-attention layers, permutation-invariant
//! pooling, and a fully connected head.
//!
//! The forward pass and its reverse-mode gradients are written out by hand at
//! 64-bit precision; the model is small enough that exactness beats autodiff
//! machinery, and the gradient is checked against central finite differences
//! in the test suite.
//!
//! Attention neighborhoods include the node itself, so isolated nodes still
//! produce a defined softmax. Layers 1..L-1 concatenate their attention
//! heads; the last layer averages them. Exponential-linear activations follow
//! each attention layer, the attention logits use a leaky rectifier with
//! slope 0.2, and the fully connected hidden layer uses a plain rectifier.
//! The final linear output is the embedding (no trailing nonlinearity).

mod train;

pub use train::{
    adamw_step, sample_triplets, train, triplet_margin_loss, Checkpoint, EpochStats, GraphItem,
    TrainConfig, TrainState, TripletBatch, TripletIndex,
};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::graph::Graph;
use rand::Rng;
use serde::{Deserialize, Serialize};

const LEAKY_SLOPE: f64 = 0.2;

/// Node-vector pooling mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pooling {
    Mean,
    Sum,
    Max,
}

/// Fixed shape of the embedder.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub input_dim: usize,
    /// Hidden width per attention head.
    pub hidden: usize,
    pub heads: usize,
    pub gat_layers: usize,
    pub fc_hidden: usize,
    /// Embedding length; set to the number of classes.
    pub output_dim: usize,
    pub pooling: Pooling,
}

impl Architecture {
    /// The default shape: 3 attention layers of hidden width 8 with 4 heads,
    /// an 8-wide fully connected hidden layer, and one output per class.
    pub fn standard(n_classes: usize) -> Architecture {
        Architecture {
            input_dim: crate::features::FEATURE_DIM,
            hidden: 8,
            heads: 4,
            gat_layers: 3,
            fc_hidden: 8,
            output_dim: n_classes,
            pooling: Pooling::Mean,
        }
    }

    /// Input width of attention layer `l`.
    fn layer_input(&self, l: usize) -> usize {
        if l == 0 {
            self.input_dim
        } else {
            self.hidden * self.heads
        }
    }

    /// Heads concatenate on every layer except the last, which averages.
    fn layer_concat(&self, l: usize) -> bool {
        l + 1 < self.gat_layers
    }

    fn layer_output(&self, l: usize) -> usize {
        if self.layer_concat(l) {
            self.hidden * self.heads
        } else {
            self.hidden
        }
    }

    /// Width entering the fully connected head.
    fn pool_dim(&self) -> usize {
        self.layer_output(self.gat_layers.saturating_sub(1))
    }
}

#[derive(Debug, Clone, Copy)]
struct HeadRanges {
    w: (usize, usize),
    a_src: (usize, usize),
    a_dst: (usize, usize),
    bias: (usize, usize),
}

#[derive(Debug, Clone)]
struct Layout {
    gat: Vec<Vec<HeadRanges>>,
    fc1_w: (usize, usize),
    fc1_b: (usize, usize),
    fc2_w: (usize, usize),
    fc2_b: (usize, usize),
    total: usize,
}

impl Layout {
    fn new(arch: &Architecture) -> Layout {
        let mut at = 0usize;
        let mut take = |len: usize| {
            let r = (at, at + len);
            at += len;
            r
        };
        let mut gat = Vec::with_capacity(arch.gat_layers);
        for l in 0..arch.gat_layers {
            let input = arch.layer_input(l);
            let mut heads = Vec::with_capacity(arch.heads);
            for _ in 0..arch.heads {
                heads.push(HeadRanges {
                    w: take(input * arch.hidden),
                    a_src: take(arch.hidden),
                    a_dst: take(arch.hidden),
                    bias: take(arch.hidden),
                });
            }
            gat.push(heads);
        }
        let fc1_w = take(arch.pool_dim() * arch.fc_hidden);
        let fc1_b = take(arch.fc_hidden);
        let fc2_w = take(arch.fc_hidden * arch.output_dim);
        let fc2_b = take(arch.output_dim);
        Layout {
            gat,
            fc1_w,
            fc1_b,
            fc2_w,
            fc2_b,
            total: at,
        }
    }
}

/// All trainable weights, stored flat; shapes come from the architecture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedderParams {
    pub arch: Architecture,
    pub data: Vec<f64>,
}

impl EmbedderParams {
    /// Glorot-style uniform initialization, seeded.
    pub fn init(arch: Architecture, seed: u64) -> EmbedderParams {
        let layout = Layout::new(&arch);
        let mut rng = crate::seed::stage_rng(seed, "embedder-init", 0);
        let mut data = vec![0f64; layout.total];
        let fill = |range: (usize, usize), fan_in: usize, fan_out: usize,
                        data: &mut Vec<f64>,
                        rng: &mut rand_chacha::ChaCha8Rng| {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for x in &mut data[range.0..range.1] {
                *x = (rng.random::<f64>() * 2.0 - 1.0) * limit;
            }
        };
        for (l, layer) in layout.gat.iter().enumerate() {
            let input = arch.layer_input(l);
            for head in layer {
                fill(head.w, input, arch.hidden, &mut data, &mut rng);
                fill(head.a_src, arch.hidden, 1, &mut data, &mut rng);
                fill(head.a_dst, arch.hidden, 1, &mut data, &mut rng);
                // biases start at zero
            }
        }
        fill(layout.fc1_w, arch.pool_dim(), arch.fc_hidden, &mut data, &mut rng);
        fill(layout.fc2_w, arch.fc_hidden, arch.output_dim, &mut data, &mut rng);
        EmbedderParams { arch, data }
    }

    pub fn n_params(&self) -> usize {
        self.data.len()
    }

    fn layout(&self) -> Layout {
        Layout::new(&self.arch)
    }

    /// Shape consistency (finite entries, expected length).
    pub fn validate(&self) -> Result<()> {
        let layout = self.layout();
        if self.data.len() != layout.total {
            return Err(Error::Argument(format!(
                "parameter vector length {} does not match architecture ({} expected)",
                self.data.len(),
                layout.total
            )));
        }
        if self.data.iter().any(|x| !x.is_finite()) {
            return Err(Error::Argument("non-finite parameter".into()));
        }
        if self.arch.output_dim < 1 {
            return Err(Error::Argument("output dimension must be >= 1".into()));
        }
        Ok(())
    }
}

fn elu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        x.exp_m1()
    }
}

fn elu_grad(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        x.exp()
    }
}

fn leaky(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        LEAKY_SLOPE * x
    }
}

fn leaky_grad(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        LEAKY_SLOPE
    }
}

/// Bottom-up adjacent pairwise sum; the summation tree depends only on the
/// multiset of values once they are sorted, which keeps pooling exactly
/// invariant under node relabeling and under disjoint self-union.
fn pairwise_sum(values: &mut Vec<f64>) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    while values.len() > 1 {
        let mut next = Vec::with_capacity(values.len().div_ceil(2));
        let mut chunks = values.chunks_exact(2);
        for pair in &mut chunks {
            next.push(pair[0] + pair[1]);
        }
        if let [last] = chunks.remainder() {
            next.push(*last);
        }
        *values = next;
    }
    values[0]
}

struct HeadTape {
    z: Vec<Vec<f64>>,
    /// Softmax weights per node over its closed neighborhood [self, nbrs...].
    alpha: Vec<Vec<f64>>,
    /// Attention logits before the leaky rectifier, same layout as `alpha`.
    pre: Vec<Vec<f64>>,
}

struct LayerTape {
    input: Vec<Vec<f64>>,
    heads: Vec<HeadTape>,
    merged_pre: Vec<Vec<f64>>,
}

struct Tape {
    layers: Vec<LayerTape>,
    pooled: Vec<f64>,
    /// Node index whose value won each max-pool component (max pooling only).
    max_source: Vec<usize>,
    fc1_pre: Vec<f64>,
    fc1_out: Vec<f64>,
}

/// Forward pass producing the embedding; deterministic.
pub fn embed(g: &Graph, features: &FeatureMatrix, params: &EmbedderParams) -> Result<Vec<f64>> {
    forward(g, features, params).map(|(e, _)| e)
}

fn closed_neighborhoods(g: &Graph) -> Vec<Vec<usize>> {
    (0..g.node_count())
        .map(|i| {
            let mut j = Vec::with_capacity(g.degree(i) + 1);
            j.push(i);
            j.extend_from_slice(g.neighbors(i));
            j
        })
        .collect()
}

fn forward(
    g: &Graph,
    features: &FeatureMatrix,
    params: &EmbedderParams,
) -> Result<(Vec<f64>, Tape)> {
    params.validate()?;
    let arch = &params.arch;
    if features.rows.len() != g.node_count() {
        return Err(Error::Argument(format!(
            "feature rows {} != node count {}",
            features.rows.len(),
            g.node_count()
        )));
    }
    if arch.input_dim != crate::features::FEATURE_DIM {
        return Err(Error::Argument(format!(
            "architecture expects input dim {}, features have {}",
            arch.input_dim,
            crate::features::FEATURE_DIM
        )));
    }
    let layout = params.layout();
    let n = g.node_count();
    let hoods = closed_neighborhoods(g);

    let mut x: Vec<Vec<f64>> = features.rows.iter().map(|r| r.to_vec()).collect();
    let mut layers = Vec::with_capacity(arch.gat_layers);

    for l in 0..arch.gat_layers {
        let input_dim = arch.layer_input(l);
        let concat = arch.layer_concat(l);
        let merged_dim = arch.layer_output(l);
        let mut heads = Vec::with_capacity(arch.heads);
        let mut merged_pre = vec![vec![0f64; merged_dim]; n];

        for (h, ranges) in layout.gat[l].iter().enumerate() {
            let w = &params.data[ranges.w.0..ranges.w.1];
            let a_src = &params.data[ranges.a_src.0..ranges.a_src.1];
            let a_dst = &params.data[ranges.a_dst.0..ranges.a_dst.1];
            let bias = &params.data[ranges.bias.0..ranges.bias.1];

            // z = x W (w stored input-major: w[i * hidden + o])
            let mut z = vec![vec![0f64; arch.hidden]; n];
            for (node, xi) in x.iter().enumerate() {
                let zi = &mut z[node];
                for (i, &xv) in xi.iter().enumerate().take(input_dim) {
                    if xv == 0.0 {
                        continue;
                    }
                    let row = &w[i * arch.hidden..(i + 1) * arch.hidden];
                    for (o, &wv) in row.iter().enumerate() {
                        zi[o] += xv * wv;
                    }
                }
            }
            let src: Vec<f64> = z.iter().map(|zi| dot(zi, a_src)).collect();
            let dst: Vec<f64> = z.iter().map(|zi| dot(zi, a_dst)).collect();

            let mut alpha = Vec::with_capacity(n);
            let mut pre = Vec::with_capacity(n);
            for i in 0..n {
                let hood = &hoods[i];
                let pre_i: Vec<f64> = hood.iter().map(|&j| src[i] + dst[j]).collect();
                let logits: Vec<f64> = pre_i.iter().map(|&e| leaky(e)).collect();
                let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let exps: Vec<f64> = logits.iter().map(|&e| (e - max).exp()).collect();
                let total: f64 = exps.iter().sum();
                alpha.push(exps.iter().map(|&e| e / total).collect::<Vec<f64>>());
                pre.push(pre_i);
            }

            for i in 0..n {
                let out_base = if concat { h * arch.hidden } else { 0 };
                let scale = if concat { 1.0 } else { 1.0 / arch.heads as f64 };
                for (slot, &j) in hoods[i].iter().enumerate() {
                    let a = alpha[i][slot] * scale;
                    let zj = &z[j];
                    let row = &mut merged_pre[i][out_base..out_base + arch.hidden];
                    for (o, m) in row.iter_mut().enumerate() {
                        *m += a * zj[o];
                    }
                }
                let row = &mut merged_pre[i][out_base..out_base + arch.hidden];
                for (o, m) in row.iter_mut().enumerate() {
                    *m += scale * bias[o];
                }
            }
            heads.push(HeadTape { z, alpha, pre });
        }

        let y: Vec<Vec<f64>> = merged_pre
            .iter()
            .map(|row| row.iter().map(|&v| elu(v)).collect())
            .collect();
        layers.push(LayerTape {
            input: std::mem::replace(&mut x, y),
            heads,
            merged_pre,
        });
    }

    // permutation-invariant pooling
    let pool_dim = arch.pool_dim();
    let mut pooled = vec![0f64; pool_dim];
    let mut max_source = vec![0usize; pool_dim];
    match arch.pooling {
        Pooling::Mean | Pooling::Sum => {
            for (c, p) in pooled.iter_mut().enumerate() {
                let mut column: Vec<f64> = x.iter().map(|row| row[c]).collect();
                column.sort_by(f64::total_cmp);
                let s = pairwise_sum(&mut column);
                *p = if arch.pooling == Pooling::Mean && n > 0 {
                    s / n as f64
                } else {
                    s
                };
            }
        }
        Pooling::Max => {
            for (c, p) in pooled.iter_mut().enumerate() {
                let (best, value) = x
                    .iter()
                    .enumerate()
                    .map(|(i, row)| (i, row[c]))
                    .max_by(|a, b| a.1.total_cmp(&b.1))
                    .unwrap_or((0, 0.0));
                *p = value;
                max_source[c] = best;
            }
        }
    }

    // fully connected head
    let fc1_w = &params.data[layout.fc1_w.0..layout.fc1_w.1];
    let fc1_b = &params.data[layout.fc1_b.0..layout.fc1_b.1];
    let fc2_w = &params.data[layout.fc2_w.0..layout.fc2_w.1];
    let fc2_b = &params.data[layout.fc2_b.0..layout.fc2_b.1];

    let mut fc1_pre = fc1_b.to_vec();
    for (i, &xv) in pooled.iter().enumerate() {
        let row = &fc1_w[i * arch.fc_hidden..(i + 1) * arch.fc_hidden];
        for (o, &wv) in row.iter().enumerate() {
            fc1_pre[o] += xv * wv;
        }
    }
    let fc1_out: Vec<f64> = fc1_pre.iter().map(|&v| v.max(0.0)).collect();
    let mut output = fc2_b.to_vec();
    for (i, &xv) in fc1_out.iter().enumerate() {
        let row = &fc2_w[i * arch.output_dim..(i + 1) * arch.output_dim];
        for (o, &wv) in row.iter().enumerate() {
            output[o] += xv * wv;
        }
    }

    Ok((
        output,
        Tape {
            layers,
            pooled,
            max_source,
            fc1_pre,
            fc1_out,
        },
    ))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Reverse pass: gradient of `d_embedding . embedding` with respect to every
/// parameter, accumulated into `grad` (same layout as `params.data`).
fn backward(
    g: &Graph,
    params: &EmbedderParams,
    tape: &Tape,
    d_embedding: &[f64],
    grad: &mut [f64],
) {
    let arch = &params.arch;
    let layout = params.layout();
    let n = g.node_count();
    let hoods = closed_neighborhoods(g);

    let fc1_w = &params.data[layout.fc1_w.0..layout.fc1_w.1];
    let fc2_w = &params.data[layout.fc2_w.0..layout.fc2_w.1];

    // fc2
    let mut d_fc1_out = vec![0f64; arch.fc_hidden];
    for (i, &xv) in tape.fc1_out.iter().enumerate() {
        let row = &fc2_w[i * arch.output_dim..(i + 1) * arch.output_dim];
        for (o, &dv) in d_embedding.iter().enumerate() {
            grad[layout.fc2_w.0 + i * arch.output_dim + o] += xv * dv;
            d_fc1_out[i] += row[o] * dv;
        }
    }
    for (o, &dv) in d_embedding.iter().enumerate() {
        grad[layout.fc2_b.0 + o] += dv;
    }

    // fc1 with rectifier
    let mut d_pooled = vec![0f64; arch.pool_dim()];
    for (o, d) in d_fc1_out.iter_mut().enumerate() {
        if tape.fc1_pre[o] <= 0.0 {
            *d = 0.0;
        }
    }
    for (i, &xv) in tape.pooled.iter().enumerate() {
        let row = &fc1_w[i * arch.fc_hidden..(i + 1) * arch.fc_hidden];
        for (o, &dv) in d_fc1_out.iter().enumerate() {
            grad[layout.fc1_w.0 + i * arch.fc_hidden + o] += xv * dv;
            d_pooled[i] += row[o] * dv;
        }
    }
    for (o, &dv) in d_fc1_out.iter().enumerate() {
        grad[layout.fc1_b.0 + o] += dv;
    }

    // pooling
    let mut d_nodes = vec![vec![0f64; arch.pool_dim()]; n];
    match arch.pooling {
        Pooling::Mean => {
            let inv = if n > 0 { 1.0 / n as f64 } else { 0.0 };
            for row in &mut d_nodes {
                for (c, d) in row.iter_mut().enumerate() {
                    *d = d_pooled[c] * inv;
                }
            }
        }
        Pooling::Sum => {
            for row in &mut d_nodes {
                row.copy_from_slice(&d_pooled);
            }
        }
        Pooling::Max => {
            for (c, &src) in tape.max_source.iter().enumerate() {
                d_nodes[src][c] += d_pooled[c];
            }
        }
    }

    // attention layers, last to first
    for l in (0..arch.gat_layers).rev() {
        let tape_l = &tape.layers[l];
        let input_dim = arch.layer_input(l);
        let concat = arch.layer_concat(l);
        let scale = if concat { 1.0 } else { 1.0 / arch.heads as f64 };

        // activation backward
        let mut d_merged = d_nodes;
        for (i, row) in d_merged.iter_mut().enumerate() {
            for (c, d) in row.iter_mut().enumerate() {
                *d *= elu_grad(tape_l.merged_pre[i][c]);
            }
        }

        let mut d_input = vec![vec![0f64; input_dim]; n];
        for (h, ranges) in layout.gat[l].iter().enumerate() {
            let head = &tape_l.heads[h];
            let w = &params.data[ranges.w.0..ranges.w.1];
            let a_src = &params.data[ranges.a_src.0..ranges.a_src.1];
            let a_dst = &params.data[ranges.a_dst.0..ranges.a_dst.1];

            let out_base = if concat { h * arch.hidden } else { 0 };
            let mut d_z = vec![vec![0f64; arch.hidden]; n];
            let mut d_src = vec![0f64; n];
            let mut d_dst = vec![0f64; n];

            for i in 0..n {
                let d_out = &d_merged[i][out_base..out_base + arch.hidden];
                // bias
                for (o, &dv) in d_out.iter().enumerate() {
                    grad[ranges.bias.0 + o] += scale * dv;
                }
                // attention weights and aggregated values
                let hood = &hoods[i];
                let alpha = &head.alpha[i];
                let mut d_alpha = vec![0f64; hood.len()];
                for (slot, &j) in hood.iter().enumerate() {
                    let zj = &head.z[j];
                    let mut da = 0.0;
                    for (o, &dv) in d_out.iter().enumerate() {
                        da += dv * zj[o];
                        d_z[j][o] += scale * alpha[slot] * dv;
                    }
                    d_alpha[slot] = scale * da;
                }
                // softmax
                let s: f64 = alpha.iter().zip(&d_alpha).map(|(a, da)| a * da).sum();
                for (slot, &j) in hood.iter().enumerate() {
                    let de = alpha[slot] * (d_alpha[slot] - s);
                    let dpre = de * leaky_grad(head.pre[i][slot]);
                    d_src[i] += dpre;
                    d_dst[j] += dpre;
                }
            }

            // attention vectors and their path into z
            for i in 0..n {
                let zi = &head.z[i];
                for o in 0..arch.hidden {
                    grad[ranges.a_src.0 + o] += d_src[i] * zi[o];
                    grad[ranges.a_dst.0 + o] += d_dst[i] * zi[o];
                    d_z[i][o] += d_src[i] * a_src[o] + d_dst[i] * a_dst[o];
                }
            }

            // z = x W
            for (node, xi) in tape_l.input.iter().enumerate() {
                let dz = &d_z[node];
                for (i, &xv) in xi.iter().enumerate().take(input_dim) {
                    let wrow = &w[i * arch.hidden..(i + 1) * arch.hidden];
                    let mut acc = 0.0;
                    for (o, &dzo) in dz.iter().enumerate() {
                        grad[ranges.w.0 + i * arch.hidden + o] += xv * dzo;
                        acc += wrow[o] * dzo;
                    }
                    d_input[node][i] += acc;
                }
            }
        }
        d_nodes = d_input;
    }
}

/// Gradient of the mean triplet margin loss over a batch, with respect to
/// every parameter. Returns (gradient, mean loss).
pub fn grad_batch(
    items: &[(&Graph, &FeatureMatrix)],
    triplets: &[(usize, usize, usize)],
    params: &EmbedderParams,
    margin: f64,
) -> Result<(Vec<f64>, f64)> {
    use rayon::prelude::*;
    if triplets.is_empty() {
        return Err(Error::Argument("grad_batch: empty batch".into()));
    }
    let per_triplet: Result<Vec<(Vec<f64>, f64)>> = triplets
        .par_iter()
        .map(|&(a, p, ng)| {
            let mut grad = vec![0f64; params.n_params()];
            let (ga, fa) = items[a];
            let (gp, fp) = items[p];
            let (gn, fe) = items[ng];
            let (ha, ta) = forward(ga, fa, params)?;
            let (hp, tp) = forward(gp, fp, params)?;
            let (hn, tn) = forward(gn, fe, params)?;
            let d_ap = euclidean(&ha, &hp);
            let d_an = euclidean(&ha, &hn);
            let loss = (d_ap - d_an + margin).max(0.0);
            if loss > 0.0 {
                // d loss / d h: unit vectors along the two difference directions
                let mut dha = vec![0f64; ha.len()];
                let mut dhp = vec![0f64; ha.len()];
                let mut dhn = vec![0f64; ha.len()];
                if d_ap > 0.0 {
                    for k in 0..ha.len() {
                        let u = (ha[k] - hp[k]) / d_ap;
                        dha[k] += u;
                        dhp[k] -= u;
                    }
                }
                if d_an > 0.0 {
                    for k in 0..ha.len() {
                        let u = (ha[k] - hn[k]) / d_an;
                        dha[k] -= u;
                        dhn[k] += u;
                    }
                }
                backward(ga, params, &ta, &dha, &mut grad);
                backward(gp, params, &tp, &dhp, &mut grad);
                backward(gn, params, &tn, &dhn, &mut grad);
            }
            Ok((grad, loss))
        })
        .collect();
    let per_triplet = per_triplet?;
    let mut total = vec![0f64; params.n_params()];
    let mut loss_sum = 0.0;
    let inv = 1.0 / triplets.len() as f64;
    for (g, l) in &per_triplet {
        for (t, &gi) in total.iter_mut().zip(g) {
            *t += gi;
        }
        loss_sum += l;
    }
    for t in &mut total {
        *t *= inv;
    }
    Ok((total, loss_sum * inv))
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
