//! Command-line surface for the evaluation toolkit. Thin: every subcommand
//! parses arguments, loads files, and delegates to the library.

use clap::{Parser, Subcommand};
use ggm_eval::embed::{embed, Checkpoint};
use ggm_eval::error::{Error, Result};
use ggm_eval::features::{node_features, FeatureScaling};
use ggm_eval::graph::Graph;
use ggm_eval::harness::{
    corpus_stats, generate_corpus, per_class_graphs, prepare_items, run_experiment, split,
    ExperimentConfig, Manifest, SplitSpec,
};
use ggm_eval::knn::{classify, confusion_matrix, AnchorIndex};
use ggm_eval::mmd::{mmd_suite, MmdReport, MMD_METRICS};
use ggm_eval::report::compare_ensembles;
use ggm_eval::seed::derive_seed;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "ggm-eval", version, about = "Evaluate graph-generation processes")]
struct Cli {
    /// Experiment config file (flat key = value lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the config's master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic corpus and write its manifest.
    Generate,
    /// Compute node-feature CSV dumps for every graph in a manifest.
    Featurize {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value = "log1p")]
        scaling: String,
    },
    /// Train the embedder on a manifest (stratified 64/16/20 split).
    Train {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Classify probe graphs against anchor graphs with a trained model.
    Classify {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        anchors: PathBuf,
        #[arg(long)]
        probes: PathBuf,
    },
    /// Five-metric MMD suite between two manifests, per shared class.
    Mmd {
        #[arg(long = "ref", value_name = "MANIFEST")]
        reference: PathBuf,
        #[arg(long = "gen", value_name = "MANIFEST")]
        generated: PathBuf,
        /// Also write descriptors.jsonl: one JSON record per graph and
        /// descriptor kind.
        #[arg(long)]
        dump_descriptors: bool,
    },
    /// Topological-property comparison between two manifests.
    Report {
        #[arg(long = "ref", value_name = "MANIFEST")]
        reference: PathBuf,
        #[arg(long = "gen", value_name = "MANIFEST")]
        generated: PathBuf,
    },
    /// Full pipeline: generate, featurize, train, classify, subjects, MMD,
    /// topological report.
    Run,
}

fn main() {
    let cli = Cli::parse();
    if cli.threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match dispatch(&cli) {
        Ok(()) => {}
        Err(e) => {
            let stage = e.stage().unwrap_or("cli");
            eprintln!("error in stage `{stage}`: {e}");
            std::process::exit(1);
        }
    }
}

/// One JSON line per descriptor kind for a single graph.
fn descriptor_records(
    g: &Graph,
    class: &str,
    path: &str,
    cfg: &ExperimentConfig,
) -> Result<String> {
    use ggm_eval::descriptors as d;
    let mut out = String::new();
    let mut push = |kind: &str, payload: serde_json::Value| {
        out.push_str(
            &serde_json::json!({
                "class": class,
                "path": path,
                "kind": kind,
                "payload": payload,
            })
            .to_string(),
        );
        out.push('\n');
    };
    let degree = d::degree_histogram(g, g.max_degree().max(1))?;
    push("degree", serde_json::to_value(&degree)?);
    let clustering = d::clustering_histogram(g, cfg.clustering_bins)?;
    push("clustering", serde_json::to_value(&clustering)?);
    let orbits = d::orbit_counts(g, cfg.orbit_max_size)?;
    push("orbits", serde_json::to_value(&orbits.graph_vector)?);
    let spectral = d::spectral_descriptor(g, cfg.spectral_bins)?;
    push("spectral", serde_json::to_value(&spectral)?);
    let nspdk = d::nspdk_features(g, cfg.nspdk_r_max, cfg.nspdk_d_max);
    push("nspdk", serde_json::to_value(&nspdk)?);
    Ok(out)
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    Ok(cfg)
}

fn load_corpus(path: &Path) -> Result<(Manifest, Vec<(Graph, String)>)> {
    let manifest = Manifest::load(path)?;
    let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let loaded = manifest.load_graphs(&base)?;
    Ok((manifest, loaded))
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Generate => {
            let cfg = load_config(cli)?;
            let manifest = generate_corpus(&cfg, &cli.out).map_err(|e| e.in_stage("generate"))?;
            let loaded = manifest.load_graphs(&cli.out)?;
            for s in corpus_stats(&loaded) {
                println!(
                    "{}: {} graphs, nodes {}..{}, edges {}..{}",
                    s.class, s.count, s.min_nodes, s.max_nodes, s.min_edges, s.max_edges
                );
            }
            println!("manifest: {}", cli.out.join("corpus_manifest.csv").display());
            Ok(())
        }
        Command::Featurize { manifest, scaling } => {
            let scaling = match scaling.as_str() {
                "raw" => FeatureScaling::Raw,
                "log1p" => FeatureScaling::Log1p,
                "log1p_standardized" => FeatureScaling::Log1pStandardized,
                other => {
                    return Err(Error::Argument(format!("unknown scaling `{other}`")))
                }
            };
            let (manifest, loaded) = load_corpus(manifest)?;
            std::fs::create_dir_all(&cli.out)?;
            for (record, (g, _)) in manifest.records.iter().zip(&loaded) {
                let f = node_features(g, scaling);
                let name = record
                    .path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "graph".into());
                let class_dir = cli.out.join(&record.class);
                std::fs::create_dir_all(&class_dir)?;
                std::fs::write(class_dir.join(format!("{name}.features.csv")), f.to_csv())?;
            }
            println!("wrote {} feature files under {}", loaded.len(), cli.out.display());
            Ok(())
        }
        Command::Train { manifest } => {
            let cfg = load_config(cli)?;
            let (manifest, loaded) = load_corpus(manifest)?;
            let classes = manifest.class_names();
            let items = prepare_items(&loaded, &classes, cfg.feature_scaling);
            let split_seed = derive_seed(cfg.master_seed, "split", 0);
            let parts = split(
                &manifest,
                &SplitSpec {
                    train_frac: cfg.train_frac,
                    val_frac: cfg.val_frac,
                    test_frac: cfg.test_frac,
                    stratified: true,
                    seed: split_seed,
                },
            )
            .map_err(|e| e.in_stage("split"))?;
            let pick = |idx: &[usize]| idx.iter().map(|&i| items[i].clone()).collect::<Vec<_>>();
            let arch = ggm_eval::embed::Architecture {
                pooling: cfg.pooling,
                ..ggm_eval::embed::Architecture::standard(classes.len())
            };
            let train_cfg = ggm_eval::embed::TrainConfig {
                margin: cfg.margin,
                lr: cfg.lr,
                weight_decay: cfg.weight_decay,
                max_epochs: cfg.max_epochs,
                patience: cfg.patience,
                min_delta: cfg.min_delta,
                triplets_per_epoch: cfg.triplets_per_epoch,
                batch_size: cfg.batch_size,
                val_triplets: cfg.val_triplets,
                seed: derive_seed(cfg.master_seed, "train", 0),
                ..ggm_eval::embed::TrainConfig::default()
            };
            let (params, history) =
                ggm_eval::embed::train(&pick(&parts.train), &pick(&parts.val), arch, &train_cfg)
                    .map_err(|e| e.in_stage("train"))?;
            std::fs::create_dir_all(&cli.out)?;
            Checkpoint::new(&params, classes, train_cfg)
                .save(&cli.out.join("checkpoint.json"))?;
            let mut csv = String::from("epoch,train_loss,val_loss\n");
            for e in &history {
                csv.push_str(&format!("{},{:.16e},{:.16e}\n", e.epoch, e.train_loss, e.val_loss));
            }
            std::fs::write(cli.out.join("history.csv"), csv)?;
            println!(
                "trained {} epochs; checkpoint: {}",
                history.len(),
                cli.out.join("checkpoint.json").display()
            );
            Ok(())
        }
        Command::Classify {
            checkpoint,
            anchors,
            probes,
        } => {
            let ckpt = Checkpoint::load(checkpoint)?;
            let params = ckpt.params();
            let classes = ckpt.classes.clone();
            let scaling = FeatureScaling::Log1p;
            let (_, anchor_loaded) = load_corpus(anchors)?;
            let (probe_manifest, probe_loaded) = load_corpus(probes)?;
            let class_index = |name: &str| -> Result<usize> {
                classes
                    .iter()
                    .position(|c| c == name)
                    .ok_or_else(|| Error::Argument(format!("class `{name}` not in checkpoint")))
            };
            let mut anchor_embeddings = Vec::new();
            let mut anchor_labels = Vec::new();
            for (g, class) in &anchor_loaded {
                anchor_embeddings.push(embed(g, &node_features(g, scaling), &params)?);
                anchor_labels.push(class_index(class)?);
            }
            let index = AnchorIndex::build(anchor_embeddings, anchor_labels, classes.len())?;
            std::fs::create_dir_all(&cli.out)?;
            let mut predictions = Vec::new();
            let mut truths = Vec::new();
            let mut csv = String::from("path,true_class,pred_class");
            for c in &classes {
                csv.push_str(&format!(",score_{c}"));
            }
            csv.push('\n');
            for (record, (g, class)) in probe_manifest.records.iter().zip(&probe_loaded) {
                let h = embed(g, &node_features(g, scaling), &params)?;
                let (pred, scores) = classify(&h, &index)?;
                predictions.push(pred);
                truths.push(class_index(class)?);
                csv.push_str(&format!(
                    "{},{},{}",
                    record.path.display(),
                    class,
                    classes[pred]
                ));
                for s in &scores {
                    csv.push_str(&format!(",{s:.16e}"));
                }
                csv.push('\n');
            }
            std::fs::write(cli.out.join("predictions.csv"), csv)?;
            let cm = confusion_matrix(&predictions, &truths, &classes)?;
            std::fs::write(cli.out.join("confusion.csv"), cm.to_csv())?;
            println!("classified {} probes; diagonal: {:?}", probe_loaded.len(), cm.diagonal());
            Ok(())
        }
        Command::Mmd {
            reference,
            generated,
            dump_descriptors,
        } => {
            let cfg = load_config(cli)?;
            let (ref_manifest, ref_loaded) = load_corpus(reference)?;
            let (gen_manifest, gen_loaded) = load_corpus(generated)?;
            let ref_classes = per_class_graphs(&ref_loaded);
            let gen_classes = per_class_graphs(&gen_loaded);
            let shared: Vec<&String> = ref_classes
                .keys()
                .filter(|c| gen_classes.contains_key(*c))
                .collect();
            let mut reports: BTreeMap<String, MmdReport> = BTreeMap::new();
            if shared.is_empty() {
                let all_ref: Vec<Graph> = ref_loaded.iter().map(|(g, _)| g.clone()).collect();
                let all_gen: Vec<Graph> = gen_loaded.iter().map(|(g, _)| g.clone()).collect();
                reports.insert(
                    "all".into(),
                    mmd_suite(&all_ref, &all_gen, &cfg.mmd_config())?,
                );
            } else {
                for class in shared {
                    reports.insert(
                        class.clone(),
                        mmd_suite(&ref_classes[class], &gen_classes[class], &cfg.mmd_config())?,
                    );
                }
            }
            std::fs::create_dir_all(&cli.out)?;
            std::fs::write(
                cli.out.join("mmd.json"),
                serde_json::to_string_pretty(&reports)?,
            )?;
            let mut csv = String::from("class");
            for m in MMD_METRICS {
                csv.push_str(&format!(",{m}"));
            }
            csv.push('\n');
            for (class, report) in &reports {
                csv.push_str(class);
                for m in MMD_METRICS {
                    csv.push_str(&format!(",{:.16e}", report.values[m]));
                }
                csv.push('\n');
            }
            std::fs::write(cli.out.join("mmd.csv"), &csv)?;
            if *dump_descriptors {
                let mut records = String::new();
                for (manifest, loaded) in [(&ref_manifest, &ref_loaded), (&gen_manifest, &gen_loaded)] {
                    for (record, (g, class)) in manifest.records.iter().zip(loaded) {
                        records.push_str(&descriptor_records(
                            g,
                            class,
                            &record.path.display().to_string(),
                            &cfg,
                        )?);
                    }
                }
                std::fs::write(cli.out.join("descriptors.jsonl"), records)?;
            }
            print!("{csv}");
            Ok(())
        }
        Command::Report {
            reference,
            generated,
        } => {
            let (_, ref_loaded) = load_corpus(reference)?;
            let (_, gen_loaded) = load_corpus(generated)?;
            let ref_classes = per_class_graphs(&ref_loaded);
            let gen_classes = per_class_graphs(&gen_loaded);
            std::fs::create_dir_all(&cli.out)?;
            let mut compared = 0usize;
            for (class, refs) in &ref_classes {
                if let Some(gens) = gen_classes.get(class) {
                    let table = compare_ensembles(refs, gens)?;
                    std::fs::write(
                        cli.out.join(format!("topo_{class}.csv")),
                        table.to_summary_csv(),
                    )?;
                    std::fs::write(
                        cli.out.join(format!("topo_long_{class}.csv")),
                        table.to_long_csv(class),
                    )?;
                    compared += 1;
                }
            }
            if compared == 0 {
                let all_ref: Vec<Graph> = ref_loaded.iter().map(|(g, _)| g.clone()).collect();
                let all_gen: Vec<Graph> = gen_loaded.iter().map(|(g, _)| g.clone()).collect();
                let table = compare_ensembles(&all_ref, &all_gen)?;
                std::fs::write(cli.out.join("topo_all.csv"), table.to_summary_csv())?;
                std::fs::write(cli.out.join("topo_long_all.csv"), table.to_long_csv("all"))?;
            }
            println!("report written under {}", cli.out.display());
            Ok(())
        }
        Command::Run => {
            let cfg = load_config(cli)?;
            let summary = run_experiment(&cfg, &cli.out)?;
            println!("classes: {}", summary.classes.join(", "));
            println!(
                "test confusion diagonal: {}",
                summary
                    .test_diagonal
                    .iter()
                    .map(|v| format!("{v:.1}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            );
            for (subject, mmd) in &summary.subject_mmd {
                for (class, report) in mmd {
                    println!(
                        "subject {subject} / {class}: degree={:.2e} clustering={:.2e}",
                        report.values["degree"], report.values["clustering"]
                    );
                }
            }
            println!("artifacts under {}", cli.out.display());
            Ok(())
        }
    }
}
