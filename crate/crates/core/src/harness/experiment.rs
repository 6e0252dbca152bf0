//! End-to-end experiment pipeline: corpus generation, features, training,
//! anchor classification, pseudo-generator subjects, MMD suites, and the
//! topological report — all reproducible from a flat key-value config and a
//! master seed.

use super::{corpus_stats, split, Manifest, SplitSpec};
use crate::embed::{
    embed, train, Architecture, Checkpoint, GraphItem, Pooling, TrainConfig,
};
use crate::error::{Error, Result};
use crate::features::{node_features, FeatureScaling};
use crate::generators::{GeneratorFamily, GeneratorParams, GeneratorSpec};
use crate::graph::Graph;
use crate::knn::{classify, confusion_matrix, AnchorIndex, ConfusionMatrix};
use crate::mmd::{mmd_suite, KernelKind, KernelSpec, MmdConfig, MmdReport, MMD_METRICS};
use crate::report::compare_ensembles;
use crate::seed::{derive_seed, fnv1a};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Everything a full run needs; parsed from flat `key = value` text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    pub n_nodes: usize,
    pub graphs_per_class: usize,
    /// Generator families forming the corpus classes.
    pub classes: Vec<GeneratorFamily>,
    /// Optional existing corpus; empty means generate.
    pub corpus_manifest: Option<PathBuf>,
    pub feature_scaling: FeatureScaling,
    pub train_frac: f64,
    pub val_frac: f64,
    pub test_frac: f64,
    pub margin: f64,
    pub lr: f64,
    pub weight_decay: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub min_delta: f64,
    pub triplets_per_epoch: usize,
    pub batch_size: usize,
    pub val_triplets: usize,
    pub pooling: Pooling,
    pub clustering_bins: usize,
    pub spectral_bins: usize,
    pub orbit_max_size: usize,
    pub nspdk_r_max: usize,
    pub nspdk_d_max: usize,
    pub sigma_degree: f64,
    pub sigma_clustering: f64,
    pub sigma_spectral: f64,
    pub sigma_orbits: f64,
    /// Pseudo-generator subjects evaluated against each class's test split.
    pub subjects: Vec<GeneratorFamily>,
    pub rewire_swaps_per_edge: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            master_seed: 42,
            n_nodes: 300,
            graphs_per_class: 100,
            classes: GeneratorFamily::CORPUS.to_vec(),
            corpus_manifest: None,
            feature_scaling: FeatureScaling::Log1p,
            train_frac: 0.64,
            val_frac: 0.16,
            test_frac: 0.20,
            margin: 1.0,
            lr: 0.003,
            weight_decay: 5e-3,
            max_epochs: 200,
            patience: 20,
            min_delta: 1e-4,
            triplets_per_epoch: 200,
            batch_size: 25,
            val_triplets: 200,
            pooling: Pooling::Mean,
            clustering_bins: 100,
            spectral_bins: 200,
            orbit_max_size: 4,
            nspdk_r_max: 2,
            nspdk_d_max: 3,
            sigma_degree: 1.0,
            sigma_clustering: 1.0,
            sigma_spectral: 1.0,
            sigma_orbits: 1.0,
            subjects: Vec::new(),
            rewire_swaps_per_edge: 10.0,
        }
    }
}

impl ExperimentConfig {
    /// Parse flat `key = value` lines; `#` starts a comment. Unknown keys
    /// are load errors so typos never silently fall back to defaults.
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Load(format!("config line {}: expected `key = value`", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad = |what: &str| {
                Error::Load(format!("config line {}: bad {what} `{value}`", lineno + 1))
            };
            match key {
                "master_seed" => cfg.master_seed = value.parse().map_err(|_| bad("integer"))?,
                "n_nodes" => cfg.n_nodes = value.parse().map_err(|_| bad("integer"))?,
                "graphs_per_class" => {
                    cfg.graphs_per_class = value.parse().map_err(|_| bad("integer"))?
                }
                "classes" => {
                    cfg.classes = value
                        .split(',')
                        .map(|s| s.trim().parse())
                        .collect::<Result<Vec<GeneratorFamily>>>()?
                }
                "corpus_manifest" => {
                    cfg.corpus_manifest =
                        (!value.is_empty()).then(|| PathBuf::from(value))
                }
                "feature_scaling" => {
                    cfg.feature_scaling = match value {
                        "raw" => FeatureScaling::Raw,
                        "log1p" => FeatureScaling::Log1p,
                        "log1p_standardized" => FeatureScaling::Log1pStandardized,
                        _ => return Err(bad("feature scaling")),
                    }
                }
                "train_frac" => cfg.train_frac = value.parse().map_err(|_| bad("number"))?,
                "val_frac" => cfg.val_frac = value.parse().map_err(|_| bad("number"))?,
                "test_frac" => cfg.test_frac = value.parse().map_err(|_| bad("number"))?,
                "margin" => cfg.margin = value.parse().map_err(|_| bad("number"))?,
                "lr" => cfg.lr = value.parse().map_err(|_| bad("number"))?,
                "weight_decay" => cfg.weight_decay = value.parse().map_err(|_| bad("number"))?,
                "max_epochs" => cfg.max_epochs = value.parse().map_err(|_| bad("integer"))?,
                "patience" => cfg.patience = value.parse().map_err(|_| bad("integer"))?,
                "min_delta" => cfg.min_delta = value.parse().map_err(|_| bad("number"))?,
                "triplets_per_epoch" => {
                    cfg.triplets_per_epoch = value.parse().map_err(|_| bad("integer"))?
                }
                "batch_size" => cfg.batch_size = value.parse().map_err(|_| bad("integer"))?,
                "val_triplets" => cfg.val_triplets = value.parse().map_err(|_| bad("integer"))?,
                "pooling" => {
                    cfg.pooling = match value {
                        "mean" => Pooling::Mean,
                        "sum" => Pooling::Sum,
                        "max" => Pooling::Max,
                        _ => return Err(bad("pooling mode")),
                    }
                }
                "clustering_bins" => {
                    cfg.clustering_bins = value.parse().map_err(|_| bad("integer"))?
                }
                "spectral_bins" => cfg.spectral_bins = value.parse().map_err(|_| bad("integer"))?,
                "orbit_max_size" => {
                    cfg.orbit_max_size = value.parse().map_err(|_| bad("integer"))?
                }
                "nspdk_r_max" => cfg.nspdk_r_max = value.parse().map_err(|_| bad("integer"))?,
                "nspdk_d_max" => cfg.nspdk_d_max = value.parse().map_err(|_| bad("integer"))?,
                "sigma_degree" => cfg.sigma_degree = value.parse().map_err(|_| bad("number"))?,
                "sigma_clustering" => {
                    cfg.sigma_clustering = value.parse().map_err(|_| bad("number"))?
                }
                "sigma_spectral" => {
                    cfg.sigma_spectral = value.parse().map_err(|_| bad("number"))?
                }
                "sigma_orbits" => cfg.sigma_orbits = value.parse().map_err(|_| bad("number"))?,
                "subjects" => {
                    cfg.subjects = if value.is_empty() {
                        Vec::new()
                    } else {
                        value
                            .split(',')
                            .map(|s| s.trim().parse())
                            .collect::<Result<Vec<GeneratorFamily>>>()?
                    }
                }
                "rewire_swaps_per_edge" => {
                    cfg.rewire_swaps_per_edge = value.parse().map_err(|_| bad("number"))?
                }
                other => {
                    return Err(Error::Load(format!(
                        "config line {}: unknown key `{other}`",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Load(format!("{}: {e}", path.display())))?;
        ExperimentConfig::parse(&text)
    }

    /// Canonical flat rendering; hashing this pins the effective config.
    pub fn canonical_text(&self) -> String {
        let classes = self
            .classes
            .iter()
            .map(|f| f.name())
            .collect::<Vec<_>>()
            .join(",");
        let subjects = self
            .subjects
            .iter()
            .map(|f| f.name())
            .collect::<Vec<_>>()
            .join(",");
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("batch_size", self.batch_size.to_string());
        kv("classes", classes);
        kv("clustering_bins", self.clustering_bins.to_string());
        kv(
            "corpus_manifest",
            self.corpus_manifest
                .as_ref()
                .map(|p| p.to_string_lossy().into_owned())
                .unwrap_or_default(),
        );
        kv(
            "feature_scaling",
            match self.feature_scaling {
                FeatureScaling::Raw => "raw".into(),
                FeatureScaling::Log1p => "log1p".into(),
                FeatureScaling::Log1pStandardized => "log1p_standardized".into(),
            },
        );
        kv("graphs_per_class", self.graphs_per_class.to_string());
        kv("lr", format!("{:e}", self.lr));
        kv("margin", format!("{:e}", self.margin));
        kv("master_seed", self.master_seed.to_string());
        kv("max_epochs", self.max_epochs.to_string());
        kv("min_delta", format!("{:e}", self.min_delta));
        kv("n_nodes", self.n_nodes.to_string());
        kv("nspdk_d_max", self.nspdk_d_max.to_string());
        kv("nspdk_r_max", self.nspdk_r_max.to_string());
        kv("orbit_max_size", self.orbit_max_size.to_string());
        kv("patience", self.patience.to_string());
        kv(
            "pooling",
            match self.pooling {
                Pooling::Mean => "mean".into(),
                Pooling::Sum => "sum".into(),
                Pooling::Max => "max".into(),
            },
        );
        kv("rewire_swaps_per_edge", format!("{:e}", self.rewire_swaps_per_edge));
        kv("sigma_clustering", format!("{:e}", self.sigma_clustering));
        kv("sigma_degree", format!("{:e}", self.sigma_degree));
        kv("sigma_orbits", format!("{:e}", self.sigma_orbits));
        kv("sigma_spectral", format!("{:e}", self.sigma_spectral));
        kv("spectral_bins", self.spectral_bins.to_string());
        kv("subjects", subjects);
        kv("test_frac", format!("{:e}", self.test_frac));
        kv("train_frac", format!("{:e}", self.train_frac));
        kv("triplets_per_epoch", self.triplets_per_epoch.to_string());
        kv("val_frac", format!("{:e}", self.val_frac));
        kv("val_triplets", self.val_triplets.to_string());
        kv("weight_decay", format!("{:e}", self.weight_decay));
        out
    }

    pub fn config_hash(&self) -> u64 {
        fnv1a(self.canonical_text().as_bytes())
    }

    pub fn mmd_config(&self) -> MmdConfig {
        MmdConfig {
            degree_kernel: KernelSpec::gaussian_tv(self.sigma_degree),
            clustering_kernel: KernelSpec::gaussian_tv(self.sigma_clustering),
            spectral_kernel: KernelSpec::gaussian_tv(self.sigma_spectral),
            orbits_kernel: KernelSpec {
                kind: KernelKind::GaussianRbf,
                sigma: self.sigma_orbits,
            },
            clustering_bins: self.clustering_bins,
            spectral_bins: self.spectral_bins,
            orbit_max_size: self.orbit_max_size,
            nspdk_r_max: self.nspdk_r_max,
            nspdk_d_max: self.nspdk_d_max,
        }
    }

    fn train_config(&self) -> TrainConfig {
        TrainConfig {
            margin: self.margin,
            lr: self.lr,
            weight_decay: self.weight_decay,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            max_epochs: self.max_epochs,
            patience: self.patience,
            min_delta: self.min_delta,
            triplets_per_epoch: self.triplets_per_epoch,
            batch_size: self.batch_size,
            val_triplets: self.val_triplets,
            seed: derive_seed(self.master_seed, "train", 0),
        }
    }
}

/// Key results of a run, also written to `run_log.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub classes: Vec<String>,
    pub test_confusion: ConfusionMatrix,
    pub test_diagonal: Vec<f64>,
    /// Per subject: the subject's confusion matrix over true classes.
    pub subject_confusions: BTreeMap<String, ConfusionMatrix>,
    /// Per subject, per class: the five-metric MMD report.
    pub subject_mmd: BTreeMap<String, BTreeMap<String, MmdReport>>,
    pub epochs_run: usize,
    pub config_hash: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RunLog {
    config_hash: String,
    config_text: String,
    crate_version: String,
    stage_seeds: BTreeMap<String, u64>,
    /// Output file -> FNV-1a content hash.
    outputs: BTreeMap<String, String>,
    summary: RunSummary,
}

fn write_output(
    outputs: &mut BTreeMap<String, String>,
    out_dir: &Path,
    rel: &str,
    contents: &str,
) -> Result<()> {
    let path = out_dir.join(rel);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(&path, contents)?;
    outputs.insert(rel.to_string(), format!("{:016x}", fnv1a(contents.as_bytes())));
    Ok(())
}

/// Generate the synthetic corpus onto disk and return its manifest.
pub fn generate_corpus(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Manifest> {
    let mut manifest = Manifest::default();
    std::fs::create_dir_all(out_dir)?;
    for (ci, &family) in cfg.classes.iter().enumerate() {
        let class_dir = out_dir.join("corpus").join(family.name());
        std::fs::create_dir_all(&class_dir)?;
        // parameters and generation randomness draw from separate streams
        let graphs: Result<Vec<(GeneratorSpec, Graph)>> = (0..cfg.graphs_per_class)
            .into_par_iter()
            .map(|i| {
                let idx = (ci * cfg.graphs_per_class + i) as u64;
                let mut param_rng = crate::seed::stage_rng(cfg.master_seed, "params", idx);
                let params =
                    crate::generators::sample_params(family, cfg.n_nodes, &mut param_rng);
                let spec = GeneratorSpec {
                    params,
                    seed: derive_seed(cfg.master_seed, "generate", idx),
                };
                let g = spec.generate(None)?;
                Ok((spec, g))
            })
            .collect();
        for (i, (spec, g)) in graphs?.into_iter().enumerate() {
            let rel = PathBuf::from("corpus")
                .join(family.name())
                .join(format!("g{i:04}.edgelist"));
            g.write_edge_list(&out_dir.join(&rel))?;
            let meta = serde_json::to_string(&spec)?;
            manifest.push(rel, family.name(), Some(meta));
        }
    }
    manifest.save(&out_dir.join("corpus_manifest.csv"))?;
    Ok(manifest)
}

/// Attach features and class indices to a loaded corpus.
pub fn prepare_items(
    loaded: &[(Graph, String)],
    classes: &[String],
    scaling: FeatureScaling,
) -> Vec<GraphItem> {
    loaded
        .par_iter()
        .map(|(g, class)| GraphItem {
            features: node_features(g, scaling),
            graph: g.clone(),
            class: classes.iter().position(|c| c == class).expect("known class"),
        })
        .collect()
}

/// Group a loaded corpus by class label.
pub fn per_class_graphs(loaded: &[(Graph, String)]) -> BTreeMap<String, Vec<Graph>> {
    let mut map: BTreeMap<String, Vec<Graph>> = BTreeMap::new();
    for (g, class) in loaded {
        map.entry(class.clone()).or_default().push(g.clone());
    }
    map
}

fn predictions_csv(
    paths: &[String],
    truths: &[usize],
    predictions: &[usize],
    scores: &[Vec<f64>],
    classes: &[String],
) -> String {
    let mut out = String::from("path,true_class,pred_class");
    for c in classes {
        out.push_str(&format!(",score_{c}"));
    }
    out.push('\n');
    for i in 0..paths.len() {
        out.push_str(&format!(
            "{},{},{}",
            paths[i], classes[truths[i]], classes[predictions[i]]
        ));
        for s in &scores[i] {
            out.push_str(&format!(",{s:.16e}"));
        }
        out.push('\n');
    }
    out
}

fn mmd_table_csv(per_class: &BTreeMap<String, MmdReport>) -> String {
    let mut out = String::from("class");
    for m in MMD_METRICS {
        out.push_str(&format!(",{m}"));
    }
    out.push('\n');
    for (class, report) in per_class {
        out.push_str(class);
        for m in MMD_METRICS {
            out.push_str(&format!(",{:.16e}", report.values[m]));
        }
        out.push('\n');
    }
    out
}

/// Run the full pipeline into `out_dir`. On failure a `FAILED` marker naming
/// the stage is left next to whatever partial artifacts were produced.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunSummary> {
    match run_experiment_inner(cfg, out_dir) {
        Ok(summary) => Ok(summary),
        Err(e) => {
            let stage = e.stage().unwrap_or("unknown");
            let _ = std::fs::create_dir_all(out_dir);
            let _ = std::fs::write(
                out_dir.join("FAILED"),
                format!("stage: {stage}\nerror: {e}\n"),
            );
            Err(e)
        }
    }
}

fn run_experiment_inner(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunSummary> {
    std::fs::create_dir_all(out_dir)?;
    let _ = std::fs::remove_file(out_dir.join("FAILED"));
    let mut outputs = BTreeMap::new();
    let mut stage_seeds = BTreeMap::new();

    // stage 1: corpus
    let manifest = if let Some(existing) = &cfg.corpus_manifest {
        Manifest::load(existing).map_err(|e| e.in_stage("generate"))?
    } else {
        stage_seeds.insert("generate".to_string(), derive_seed(cfg.master_seed, "generate", 0));
        generate_corpus(cfg, out_dir).map_err(|e| e.in_stage("generate"))?
    };
    let manifest_base = cfg
        .corpus_manifest
        .as_ref()
        .and_then(|p| p.parent().map(Path::to_path_buf))
        .unwrap_or_else(|| out_dir.to_path_buf());
    let loaded = manifest
        .load_graphs(&manifest_base)
        .map_err(|e| e.in_stage("generate"))?;
    let classes = manifest.class_names();
    {
        let stats = corpus_stats(&loaded);
        let mut csv = String::from("class,count,min_nodes,max_nodes,min_edges,max_edges\n");
        for s in &stats {
            csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                s.class, s.count, s.min_nodes, s.max_nodes, s.min_edges, s.max_edges
            ));
        }
        write_output(&mut outputs, out_dir, "corpus_stats.csv", &csv)?;
    }

    // stage 2: features
    let items = prepare_items(&loaded, &classes, cfg.feature_scaling);

    // stage 3: split
    let split_seed = derive_seed(cfg.master_seed, "split", 0);
    stage_seeds.insert("split".to_string(), split_seed);
    let spec = SplitSpec {
        train_frac: cfg.train_frac,
        val_frac: cfg.val_frac,
        test_frac: cfg.test_frac,
        stratified: true,
        seed: split_seed,
    };
    let parts = split(&manifest, &spec).map_err(|e| e.in_stage("split"))?;
    {
        let mut csv = String::from("path,class,part\n");
        for (part, indices) in [
            ("train", &parts.train),
            ("val", &parts.val),
            ("test", &parts.test),
        ] {
            for &i in indices {
                csv.push_str(&format!(
                    "{},{},{part}\n",
                    manifest.records[i].path.display(),
                    manifest.records[i].class
                ));
            }
        }
        write_output(&mut outputs, out_dir, "splits.csv", &csv)?;
    }
    let pick = |idx: &[usize]| -> Vec<GraphItem> { idx.iter().map(|&i| items[i].clone()).collect() };
    let train_items = pick(&parts.train);
    let val_items = pick(&parts.val);
    let test_items = pick(&parts.test);

    // stage 4: train
    let train_cfg = cfg.train_config();
    stage_seeds.insert("train".to_string(), train_cfg.seed);
    let arch = Architecture {
        pooling: cfg.pooling,
        ..Architecture::standard(classes.len())
    };
    let (params, history) =
        train(&train_items, &val_items, arch, &train_cfg).map_err(|e| e.in_stage("train"))?;
    {
        let mut csv = String::from("epoch,train_loss,val_loss\n");
        for e in &history {
            csv.push_str(&format!("{},{:.16e},{:.16e}\n", e.epoch, e.train_loss, e.val_loss));
        }
        write_output(&mut outputs, out_dir, "history.csv", &csv)?;
        let ckpt = Checkpoint::new(&params, classes.clone(), train_cfg.clone());
        let json = serde_json::to_string_pretty(&ckpt)?;
        write_output(&mut outputs, out_dir, "checkpoint.json", &json)?;
    }

    // stage 5: embed anchors and test probes, classify
    let embed_all = |items: &[GraphItem]| -> Result<Vec<Vec<f64>>> {
        items
            .par_iter()
            .map(|it| embed(&it.graph, &it.features, &params))
            .collect()
    };
    let anchor_embeddings = embed_all(&train_items).map_err(|e| e.in_stage("classify"))?;
    let anchor_labels: Vec<usize> = train_items.iter().map(|it| it.class).collect();
    let index = AnchorIndex::build(anchor_embeddings, anchor_labels, classes.len())
        .map_err(|e| e.in_stage("classify"))?;
    let test_embeddings = embed_all(&test_items).map_err(|e| e.in_stage("classify"))?;
    let mut test_preds = Vec::with_capacity(test_items.len());
    let mut test_scores = Vec::with_capacity(test_items.len());
    for h in &test_embeddings {
        let (pred, scores) = classify(h, &index).map_err(|e| e.in_stage("classify"))?;
        test_preds.push(pred);
        test_scores.push(scores);
    }
    let test_truth: Vec<usize> = test_items.iter().map(|it| it.class).collect();
    let test_paths: Vec<String> = parts
        .test
        .iter()
        .map(|&i| manifest.records[i].path.display().to_string())
        .collect();
    let test_cm = confusion_matrix(&test_preds, &test_truth, &classes)
        .map_err(|e| e.in_stage("classify"))?;
    write_output(
        &mut outputs,
        out_dir,
        "predictions_test.csv",
        &predictions_csv(&test_paths, &test_truth, &test_preds, &test_scores, &classes),
    )?;
    write_output(&mut outputs, out_dir, "confusion_test.csv", &test_cm.to_csv())?;

    // stage 6+7: subjects — perturbation ensembles per class, then MMD and
    // the topological comparison against the class's test graphs
    let mut subject_confusions = BTreeMap::new();
    let mut subject_mmd = BTreeMap::new();
    for &subject in &cfg.subjects {
        let subject_name = subject.name().to_string();
        let mut per_class_mmd: BTreeMap<String, MmdReport> = BTreeMap::new();
        let mut all_preds: Vec<usize> = Vec::new();
        let mut all_truth: Vec<usize> = Vec::new();
        let mut paths: Vec<String> = Vec::new();
        let mut scores_rows: Vec<Vec<f64>> = Vec::new();

        for (class_idx, class) in classes.iter().enumerate() {
            let refs: Vec<&GraphItem> =
                test_items.iter().filter(|it| it.class == class_idx).collect();
            if refs.is_empty() {
                continue;
            }
            let ref_graphs: Vec<Graph> = refs.iter().map(|it| it.graph.clone()).collect();
            let subject_graphs: Result<Vec<Graph>> = ref_graphs
                .par_iter()
                .enumerate()
                .map(|(i, g)| {
                    let idx = (class_idx * ref_graphs.len() + i) as u64;
                    let spec = GeneratorSpec {
                        params: match subject {
                            GeneratorFamily::Rewire => GeneratorParams::Rewire {
                                swaps_per_edge: cfg.rewire_swaps_per_edge,
                            },
                            GeneratorFamily::ErMatch => GeneratorParams::ErMatch,
                            other => {
                                return Err(Error::Argument(format!(
                                    "subject family {} is not a perturbation",
                                    other.name()
                                )))
                            }
                        },
                        seed: derive_seed(cfg.master_seed, "subject", idx),
                    };
                    spec.generate(Some(g))
                })
                .collect();
            let subject_graphs = subject_graphs.map_err(|e| e.in_stage("subjects"))?;

            for (i, g) in subject_graphs.iter().enumerate() {
                let rel = format!(
                    "subjects/{subject_name}/{class}/g{i:04}.edgelist"
                );
                let full = out_dir.join(&rel);
                if let Some(parent) = full.parent() {
                    std::fs::create_dir_all(parent)?;
                }
                g.write_edge_list(&full)?;
                paths.push(rel);
            }

            let report = mmd_suite(&ref_graphs, &subject_graphs, &cfg.mmd_config())
                .map_err(|e| e.in_stage("mmd"))?;
            per_class_mmd.insert(class.clone(), report);

            let table = compare_ensembles(&ref_graphs, &subject_graphs)
                .map_err(|e| e.in_stage("report"))?;
            write_output(
                &mut outputs,
                out_dir,
                &format!("subjects/{subject_name}/topo_{class}.csv"),
                &table.to_summary_csv(),
            )?;
            write_output(
                &mut outputs,
                out_dir,
                &format!("subjects/{subject_name}/topo_long_{class}.csv"),
                &table.to_long_csv(class),
            )?;

            // classify the subject graphs against the trained anchors
            let subject_items: Vec<GraphItem> = subject_graphs
                .par_iter()
                .map(|g| GraphItem {
                    features: node_features(g, cfg.feature_scaling),
                    graph: g.clone(),
                    class: class_idx,
                })
                .collect();
            for it in &subject_items {
                let h = embed(&it.graph, &it.features, &params)
                    .map_err(|e| e.in_stage("classify"))?;
                let (pred, scores) = classify(&h, &index).map_err(|e| e.in_stage("classify"))?;
                all_preds.push(pred);
                all_truth.push(class_idx);
                scores_rows.push(scores);
            }
        }
        let cm = confusion_matrix(&all_preds, &all_truth, &classes)
            .map_err(|e| e.in_stage("classify"))?;
        write_output(
            &mut outputs,
            out_dir,
            &format!("subjects/{subject_name}/confusion.csv"),
            &cm.to_csv(),
        )?;
        write_output(
            &mut outputs,
            out_dir,
            &format!("subjects/{subject_name}/predictions.csv"),
            &predictions_csv(&paths, &all_truth, &all_preds, &scores_rows, &classes),
        )?;
        write_output(
            &mut outputs,
            out_dir,
            &format!("subjects/{subject_name}/mmd.csv"),
            &mmd_table_csv(&per_class_mmd),
        )?;
        write_output(
            &mut outputs,
            out_dir,
            &format!("subjects/{subject_name}/mmd.json"),
            &serde_json::to_string_pretty(&per_class_mmd)?,
        )?;
        subject_confusions.insert(subject_name.clone(), cm);
        subject_mmd.insert(subject_name, per_class_mmd);
    }

    let summary = RunSummary {
        classes: classes.clone(),
        test_diagonal: test_cm.diagonal(),
        test_confusion: test_cm,
        subject_confusions,
        subject_mmd,
        epochs_run: history.len(),
        config_hash: format!("{:016x}", cfg.config_hash()),
    };
    let log = RunLog {
        config_hash: summary.config_hash.clone(),
        config_text: cfg.canonical_text(),
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        stage_seeds,
        outputs,
        summary: summary.clone(),
    };
    std::fs::write(
        out_dir.join("run_log.json"),
        serde_json::to_string_pretty(&log)?,
    )?;
    Ok(summary)
}
