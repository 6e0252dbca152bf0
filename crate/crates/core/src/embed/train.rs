//! Triplet-loss training for the embedder: class-balanced triplet sampling,
//! decoupled-weight-decay Adam, early stopping on a fixed validation triplet
//! set, and checkpoint I/O.

use super::{embed, euclidean, grad_batch, Architecture, EmbedderParams};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::graph::Graph;
use crate::seed::derive_seed;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// One labeled dataset entry: graph, its precomputed features, and a class
/// index into the experiment's class list.
#[derive(Debug, Clone)]
pub struct GraphItem {
    pub graph: Graph,
    pub features: FeatureMatrix,
    pub class: usize,
}

/// Indices into a dataset: anchor and positive share a class, the negative
/// comes from a different one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TripletIndex {
    pub anchor: usize,
    pub positive: usize,
    pub negative: usize,
}

/// A sampled batch of triplets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripletBatch {
    pub triplets: Vec<TripletIndex>,
}

/// Hinge on the distance gap: `max(0, d(a,p) - d(a,n) + margin)` with
/// Euclidean distance.
pub fn triplet_margin_loss(h_a: &[f64], h_p: &[f64], h_n: &[f64], margin: f64) -> f64 {
    (euclidean(h_a, h_p) - euclidean(h_a, h_n) + margin).max(0.0)
}

/// Class-balanced triplet sampling.
///
/// The anchor class is uniform over classes regardless of class sizes;
/// anchor and positive are drawn without replacement within it; the negative
/// class is uniform over the remaining classes.
pub fn sample_triplets(
    dataset: &[GraphItem],
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<TripletBatch> {
    let n_classes = dataset.iter().map(|it| it.class + 1).max().unwrap_or(0);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, item) in dataset.iter().enumerate() {
        by_class[item.class].push(i);
    }
    let present: Vec<usize> = (0..n_classes).filter(|&c| !by_class[c].is_empty()).collect();
    if present.len() < 2 {
        return Err(Error::Sampling(
            "triplet sampling needs at least 2 classes".into(),
        ));
    }
    for &c in &present {
        if by_class[c].len() < 2 {
            return Err(Error::Sampling(format!(
                "class {c} has {} graph(s); triplet sampling needs at least 2",
                by_class[c].len()
            )));
        }
    }
    let mut triplets = Vec::with_capacity(count);
    for _ in 0..count {
        let ac = present[rng.random_range(0..present.len())];
        let members = &by_class[ac];
        let a = members[rng.random_range(0..members.len())];
        let p = loop {
            let p = members[rng.random_range(0..members.len())];
            if p != a {
                break p;
            }
        };
        let nc = loop {
            let c = present[rng.random_range(0..present.len())];
            if c != ac {
                break c;
            }
        };
        let negatives = &by_class[nc];
        let n = negatives[rng.random_range(0..negatives.len())];
        triplets.push(TripletIndex {
            anchor: a,
            positive: p,
            negative: n,
        });
    }
    Ok(TripletBatch { triplets })
}

/// Optimizer and early-stopping state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainState {
    pub params: EmbedderParams,
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub step: u64,
    pub best_val: f64,
    pub epochs_since_improvement: usize,
    pub seed: u64,
}

impl TrainState {
    pub fn new(params: EmbedderParams, seed: u64) -> TrainState {
        let n = params.n_params();
        TrainState {
            params,
            first_moment: vec![0.0; n],
            second_moment: vec![0.0; n],
            step: 0,
            best_val: f64::INFINITY,
            epochs_since_improvement: 0,
            seed,
        }
    }
}

/// Training hyperparameters. Defaults follow the standard recipe: AdamW at
/// learning rate 3e-3 with weight decay 5e-3, margin 1.0, early stopping
/// with patience 20 on a fixed validation triplet set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub margin: f64,
    pub lr: f64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub min_delta: f64,
    pub triplets_per_epoch: usize,
    pub batch_size: usize,
    pub val_triplets: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            margin: 1.0,
            lr: 0.003,
            weight_decay: 5e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            max_epochs: 200,
            patience: 20,
            min_delta: 1e-4,
            triplets_per_epoch: 200,
            batch_size: 25,
            val_triplets: 200,
            seed: 0,
        }
    }
}

/// One decoupled-weight-decay Adam step: bias-corrected moment update, then
/// weight decay applied directly to the weights (scaled by the learning
/// rate), never folded into the gradient.
pub fn adamw_step(state: &mut TrainState, grads: &[f64], cfg: &TrainConfig) -> Result<()> {
    if grads.len() != state.params.n_params() {
        return Err(Error::Argument(format!(
            "gradient length {} != parameter count {}",
            grads.len(),
            state.params.n_params()
        )));
    }
    state.step += 1;
    let t = state.step as i32;
    let bc1 = 1.0 - cfg.beta1.powi(t);
    let bc2 = 1.0 - cfg.beta2.powi(t);
    for k in 0..grads.len() {
        let g = grads[k];
        state.first_moment[k] = cfg.beta1 * state.first_moment[k] + (1.0 - cfg.beta1) * g;
        state.second_moment[k] = cfg.beta2 * state.second_moment[k] + (1.0 - cfg.beta2) * g * g;
        let m_hat = state.first_moment[k] / bc1;
        let v_hat = state.second_moment[k] / bc2;
        let w = &mut state.params.data[k];
        *w -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
        // decoupled decay: a direct rescale of the weight
        *w *= 1.0 - cfg.lr * cfg.weight_decay;
    }
    Ok(())
}

/// Per-epoch loss record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

fn mean_triplet_loss(
    items: &[(&Graph, &FeatureMatrix)],
    triplets: &[TripletIndex],
    params: &EmbedderParams,
    margin: f64,
) -> Result<f64> {
    use rayon::prelude::*;
    let losses: Result<Vec<f64>> = triplets
        .par_iter()
        .map(|t| {
            let ha = embed(items[t.anchor].0, items[t.anchor].1, params)?;
            let hp = embed(items[t.positive].0, items[t.positive].1, params)?;
            let hn = embed(items[t.negative].0, items[t.negative].1, params)?;
            Ok(triplet_margin_loss(&ha, &hp, &hn, margin))
        })
        .collect();
    let losses = losses?;
    Ok(losses.iter().sum::<f64>() / losses.len().max(1) as f64)
}

/// Train the embedder on `train_set`, early-stopping on the mean triplet
/// loss over a validation triplet set that is sampled once up front (so the
/// curve is comparable across epochs). Returns the parameters of the best
/// validation epoch and the loss history.
pub fn train(
    train_set: &[GraphItem],
    val_set: &[GraphItem],
    arch: Architecture,
    cfg: &TrainConfig,
) -> Result<(EmbedderParams, Vec<EpochStats>)> {
    if train_set.is_empty() || val_set.is_empty() {
        return Err(Error::Training("train and validation sets must be non-empty".into()));
    }
    let params = EmbedderParams::init(arch, derive_seed(cfg.seed, "embedder-init", 0));
    if cfg.max_epochs == 0 {
        return Ok((params, Vec::new()));
    }

    let train_refs: Vec<(&Graph, &FeatureMatrix)> =
        train_set.iter().map(|it| (&it.graph, &it.features)).collect();
    let val_refs: Vec<(&Graph, &FeatureMatrix)> =
        val_set.iter().map(|it| (&it.graph, &it.features)).collect();

    let mut val_rng = crate::seed::stage_rng(cfg.seed, "val-triplets", 0);
    let val_batch = sample_triplets(val_set, cfg.val_triplets, &mut val_rng)?;

    let mut sample_rng = crate::seed::stage_rng(cfg.seed, "train-triplets", 0);
    let mut state = TrainState::new(params, cfg.seed);
    let mut best_params = state.params.clone();
    let mut history = Vec::new();

    for epoch in 0..cfg.max_epochs {
        let batch = sample_triplets(train_set, cfg.triplets_per_epoch, &mut sample_rng)?;
        let mut train_loss_sum = 0.0;
        let mut batches = 0usize;
        for chunk in batch.triplets.chunks(cfg.batch_size.max(1)) {
            let idx: Vec<(usize, usize, usize)> = chunk
                .iter()
                .map(|t| (t.anchor, t.positive, t.negative))
                .collect();
            let (grads, loss) = grad_batch(&train_refs, &idx, &state.params, cfg.margin)?;
            if !loss.is_finite() {
                return Err(Error::Training(format!("loss diverged at epoch {epoch}")));
            }
            adamw_step(&mut state, &grads, cfg)?;
            train_loss_sum += loss;
            batches += 1;
        }
        let train_loss = train_loss_sum / batches.max(1) as f64;
        let val_loss =
            mean_triplet_loss(&val_refs, &val_batch.triplets, &state.params, cfg.margin)?;
        if !val_loss.is_finite() {
            return Err(Error::Training(format!(
                "validation loss diverged at epoch {epoch}"
            )));
        }
        history.push(EpochStats {
            epoch,
            train_loss,
            val_loss,
        });
        if state.best_val - val_loss > cfg.min_delta {
            state.best_val = val_loss;
            state.epochs_since_improvement = 0;
            best_params = state.params.clone();
        } else {
            state.epochs_since_improvement += 1;
            if state.epochs_since_improvement >= cfg.patience {
                break;
            }
        }
    }
    Ok((best_params, history))
}

/// Versioned model checkpoint; JSON with full-precision weights, so a
/// save/load cycle reproduces the parameters exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub arch: Architecture,
    /// Class names in class-index order.
    pub classes: Vec<String>,
    pub weights: Vec<f64>,
    pub config: TrainConfig,
}

impl Checkpoint {
    pub const VERSION: u32 = 1;

    pub fn new(params: &EmbedderParams, classes: Vec<String>, config: TrainConfig) -> Checkpoint {
        Checkpoint {
            version: Self::VERSION,
            arch: params.arch.clone(),
            classes,
            weights: params.data.clone(),
            config,
        }
    }

    pub fn params(&self) -> EmbedderParams {
        EmbedderParams {
            arch: self.arch.clone(),
            data: self.weights.clone(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Checkpoint> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Load(format!("{}: {e}", path.display())))?;
        let ckpt: Checkpoint = serde_json::from_str(&text)?;
        if ckpt.version != Self::VERSION {
            return Err(Error::Load(format!(
                "checkpoint version {} unsupported (expected {})",
                ckpt.version,
                Self::VERSION
            )));
        }
        ckpt.params().validate()?;
        Ok(ckpt)
    }
}
