//! End-to-end checks of the command-line surface: the documented
//! subcommands, file formats, and exit behavior.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ggm-eval"))
}

fn write_config(dir: &Path) -> PathBuf {
    let path = dir.join("cfg.txt");
    std::fs::write(
        &path,
        "master_seed = 5\n\
         n_nodes = 50\n\
         graphs_per_class = 12\n\
         classes = ER,BA\n\
         max_epochs = 2\n\
         triplets_per_epoch = 16\n\
         val_triplets = 10\n\
         clustering_bins = 10\n\
         spectral_bins = 20\n",
    )
    .unwrap();
    path
}

#[test]
fn generate_train_classify_mmd_report_chain() {
    let dir = std::env::temp_dir().join("ggm-eval-cli-chain");
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = write_config(&dir);
    let corpus = dir.join("corpus");

    let out = bin()
        .args(["generate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&corpus)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = corpus.join("corpus_manifest.csv");
    assert!(manifest.exists());

    let trained = dir.join("trained");
    let out = bin()
        .args(["train", "--config"])
        .arg(&cfg)
        .arg("--manifest")
        .arg(&manifest)
        .arg("--out")
        .arg(&trained)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(trained.join("checkpoint.json").exists());
    assert!(trained.join("history.csv").exists());

    let cls = dir.join("cls");
    let out = bin()
        .args(["classify", "--checkpoint"])
        .arg(trained.join("checkpoint.json"))
        .arg("--anchors")
        .arg(&manifest)
        .arg("--probes")
        .arg(&manifest)
        .arg("--out")
        .arg(&cls)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let confusion = std::fs::read_to_string(cls.join("confusion.csv")).unwrap();
    assert!(confusion.starts_with("true\\pred,BA,ER"));
    let predictions = std::fs::read_to_string(cls.join("predictions.csv")).unwrap();
    assert!(predictions.starts_with("path,true_class,pred_class,score_BA,score_ER"));

    let mmd_out = dir.join("mmd");
    let out = bin()
        .args(["mmd", "--dump-descriptors", "--config"])
        .arg(&cfg)
        .arg("--ref")
        .arg(&manifest)
        .arg("--gen")
        .arg(&manifest)
        .arg("--out")
        .arg(&mmd_out)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(mmd_out.join("mmd.csv")).unwrap();
    assert!(csv.starts_with("class,degree,clustering,orbits,spectral,nspdk"));
    // same manifest on both sides: all five metrics are zero
    for line in csv.lines().skip(1) {
        for cell in line.split(',').skip(1) {
            let v: f64 = cell.parse().unwrap();
            assert!(v.abs() < 1e-12, "{line}");
        }
    }
    assert!(mmd_out.join("mmd.json").exists());
    // descriptor dump: one JSON record per graph and kind
    let dump = std::fs::read_to_string(mmd_out.join("descriptors.jsonl")).unwrap();
    let records: Vec<serde_json::Value> = dump
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(records.len(), 2 * 24 * 5); // both manifests x graphs x kinds
    for r in &records {
        for key in ["class", "path", "kind", "payload"] {
            assert!(r.get(key).is_some(), "missing {key}");
        }
    }

    let rep = dir.join("report");
    let out = bin()
        .args(["report", "--ref"])
        .arg(&manifest)
        .arg("--gen")
        .arg(&manifest)
        .arg("--out")
        .arg(&rep)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let topo = std::fs::read_to_string(rep.join("topo_ER.csv")).unwrap();
    assert!(topo.starts_with("property,ref_mean"));
    assert!(rep.join("topo_long_BA.csv").exists());

    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn featurize_writes_documented_header() {
    let dir = std::env::temp_dir().join("ggm-eval-cli-featurize");
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = write_config(&dir);
    let corpus = dir.join("corpus");
    assert!(bin()
        .args(["generate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&corpus)
        .status()
        .unwrap()
        .success());
    let feats = dir.join("feats");
    assert!(bin()
        .args(["featurize", "--scaling", "raw", "--manifest"])
        .arg(corpus.join("corpus_manifest.csv"))
        .arg("--out")
        .arg(&feats)
        .status()
        .unwrap()
        .success());
    let one = std::fs::read_to_string(feats.join("ER/g0000.features.csv")).unwrap();
    assert!(one.starts_with("node,degree,chi2,clustering,kcore\n"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn missing_manifest_fails_with_stage() {
    let out = bin()
        .args(["train", "--manifest", "/nonexistent/m.csv", "--out", "/tmp/x"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("error in stage"), "{err}");
}

#[test]
fn unknown_config_key_fails() {
    let dir = std::env::temp_dir().join("ggm-eval-cli-badcfg");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("bad.txt");
    std::fs::write(&cfg, "definitely_not_a_key = 1\n").unwrap();
    let out = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("unknown key"), "{err}");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn edge_list_format_accepts_comments() {
    let dir = std::env::temp_dir().join("ggm-eval-cli-edgelist");
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(
        dir.join("g.edgelist"),
        "# a comment\n% another comment\n\n0 1\n1 2\n2 0\n",
    )
    .unwrap();
    std::fs::write(dir.join("m.csv"), "path,class\ng.edgelist,tri\n").unwrap();
    let feats = dir.join("feats");
    assert!(bin()
        .args(["featurize", "--manifest"])
        .arg(dir.join("m.csv"))
        .arg("--out")
        .arg(&feats)
        .status()
        .unwrap()
        .success());
    assert!(feats.join("tri/g.features.csv").exists());
    let _ = std::fs::remove_dir_all(&dir);
}
