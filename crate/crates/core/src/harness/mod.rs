//! Dataset manifests, stratified splits, and experiment configuration.

mod experiment;

pub use experiment::{
    generate_corpus, per_class_graphs, prepare_items, run_experiment, ExperimentConfig, RunSummary,
};

use crate::error::{Error, Result};
use crate::graph::Graph;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// One manifest row: an edge-list file, its class label, and optional
/// provenance metadata (generator params, seed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub path: PathBuf,
    pub class: String,
    pub meta: Option<String>,
}

/// A labeled graph corpus on disk.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Manifest {
    pub records: Vec<ManifestRecord>,
}

impl Manifest {
    pub fn push(&mut self, path: PathBuf, class: &str, meta: Option<String>) {
        self.records.push(ManifestRecord {
            path,
            class: class.to_string(),
            meta,
        });
    }

    /// Distinct class labels, sorted.
    pub fn class_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.records.iter().map(|r| r.class.clone()).collect();
        names.sort();
        names.dedup();
        names
    }

    /// Load a manifest CSV with header `path,class[,meta]`.
    pub fn load(path: &Path) -> Result<Manifest> {
        let mut reader = csv::ReaderBuilder::new()
            .flexible(true)
            .from_path(path)
            .map_err(|e| Error::Load(format!("{}: {e}", path.display())))?;
        let headers = reader
            .headers()
            .map_err(|e| Error::Load(format!("{}: {e}", path.display())))?
            .clone();
        if headers.len() < 2 || &headers[0] != "path" || &headers[1] != "class" {
            return Err(Error::Load(format!(
                "{}: expected header `path,class[,meta]`, got `{}`",
                path.display(),
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut records = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for (i, row) in reader.records().enumerate() {
            let rownum = i + 2; // header is line 1
            let row = row.map_err(|e| Error::Load(format!("row {rownum}: {e}")))?;
            let file = row
                .get(0)
                .ok_or_else(|| Error::Load(format!("row {rownum}: missing path")))?;
            let class = row
                .get(1)
                .ok_or_else(|| Error::Load(format!("row {rownum}: missing class")))?;
            if class.is_empty() {
                return Err(Error::Load(format!("row {rownum}: empty class label")));
            }
            if !seen.insert(file.to_string()) {
                return Err(Error::Load(format!("row {rownum}: duplicate path `{file}`")));
            }
            records.push(ManifestRecord {
                path: PathBuf::from(file),
                class: class.to_string(),
                meta: row.get(2).filter(|m| !m.is_empty()).map(str::to_string),
            });
        }
        Ok(Manifest { records })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)?;
        writer.write_record(["path", "class", "meta"])?;
        for r in &self.records {
            writer.write_record([
                r.path.to_string_lossy().as_ref(),
                r.class.as_str(),
                r.meta.as_deref().unwrap_or(""),
            ])?;
        }
        writer.flush()?;
        Ok(())
    }

    /// Load and canonicalize every graph. Relative paths resolve against
    /// `base` (usually the manifest's directory). Errors carry the row.
    pub fn load_graphs(&self, base: &Path) -> Result<Vec<(Graph, String)>> {
        let mut out = Vec::with_capacity(self.records.len());
        for (i, r) in self.records.iter().enumerate() {
            let file = if r.path.is_absolute() {
                r.path.clone()
            } else {
                base.join(&r.path)
            };
            let g = Graph::read_edge_list(&file)
                .map_err(|e| Error::Load(format!("row {}: {e}", i + 2)))?;
            out.push((g, r.class.clone()));
        }
        Ok(out)
    }
}

/// Per-class corpus statistics (count plus node/edge ranges).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub class: String,
    pub count: usize,
    pub min_nodes: usize,
    pub max_nodes: usize,
    pub min_edges: usize,
    pub max_edges: usize,
}

/// Summarize a loaded corpus per class, ordered by class name.
pub fn corpus_stats(loaded: &[(Graph, String)]) -> Vec<ClassStats> {
    let mut by_class: BTreeMap<&str, Vec<&Graph>> = BTreeMap::new();
    for (g, class) in loaded {
        by_class.entry(class).or_default().push(g);
    }
    by_class
        .into_iter()
        .map(|(class, graphs)| ClassStats {
            class: class.to_string(),
            count: graphs.len(),
            min_nodes: graphs.iter().map(|g| g.node_count()).min().unwrap_or(0),
            max_nodes: graphs.iter().map(|g| g.node_count()).max().unwrap_or(0),
            min_edges: graphs.iter().map(|g| g.edge_count()).min().unwrap_or(0),
            max_edges: graphs.iter().map(|g| g.edge_count()).max().unwrap_or(0),
        })
        .collect()
}

/// Split fractions; defaults 64/16/20.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_frac: f64,
    pub val_frac: f64,
    pub test_frac: f64,
    pub stratified: bool,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_frac: 0.64,
            val_frac: 0.16,
            test_frac: 0.20,
            stratified: true,
            seed: 0,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let fracs = [self.train_frac, self.val_frac, self.test_frac];
        if fracs.iter().any(|&f| f <= 0.0) {
            return Err(Error::Split("split fractions must be positive".into()));
        }
        let sum: f64 = fracs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Split(format!("split fractions sum to {sum}, expected 1")));
        }
        Ok(())
    }
}

/// Record indices for the three split parts; disjoint and exhaustive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitResult {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

fn shuffle(rng: &mut rand_chacha::ChaCha8Rng, items: &mut [usize]) {
    use rand::Rng;
    for i in (1..items.len()).rev() {
        let j = rng.random_range(0..=i);
        items.swap(i, j);
    }
}

fn split_counts(c: usize, spec: &SplitSpec) -> (usize, usize) {
    let mut n_train = (c as f64 * spec.train_frac).round() as usize;
    let mut n_val = (c as f64 * spec.val_frac).round() as usize;
    // keep the test part non-empty; rounding stays within +-1 of the target
    while n_train + n_val >= c && n_val > 0 {
        n_val -= 1;
    }
    while n_train + n_val >= c && n_train > 1 {
        n_train -= 1;
    }
    (n_train, n_val)
}

/// Stratified (or global) shuffle split into train/val/test.
pub fn split(manifest: &Manifest, spec: &SplitSpec) -> Result<SplitResult> {
    spec.validate()?;
    let mut result = SplitResult {
        train: Vec::new(),
        val: Vec::new(),
        test: Vec::new(),
    };
    if spec.stratified {
        let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, r) in manifest.records.iter().enumerate() {
            by_class.entry(&r.class).or_default().push(i);
        }
        for (class, mut indices) in by_class {
            if indices.len() < 3 {
                return Err(Error::Split(format!(
                    "class `{class}` has {} graph(s); stratified split needs at least 3",
                    indices.len()
                )));
            }
            let mut rng = crate::seed::stage_rng(
                spec.seed,
                "split",
                crate::seed::fnv1a(class.as_bytes()),
            );
            shuffle(&mut rng, &mut indices);
            let (n_train, n_val) = split_counts(indices.len(), spec);
            result.train.extend(&indices[..n_train]);
            result.val.extend(&indices[n_train..n_train + n_val]);
            result.test.extend(&indices[n_train + n_val..]);
        }
    } else {
        let mut indices: Vec<usize> = (0..manifest.records.len()).collect();
        if indices.len() < 3 {
            return Err(Error::Split("need at least 3 graphs to split".into()));
        }
        let mut rng = crate::seed::stage_rng(spec.seed, "split", 0);
        shuffle(&mut rng, &mut indices);
        let (n_train, n_val) = split_counts(indices.len(), spec);
        result.train.extend(&indices[..n_train]);
        result.val.extend(&indices[n_train..n_train + n_val]);
        result.test.extend(&indices[n_train + n_val..]);
    }
    result.train.sort_unstable();
    result.val.sort_unstable();
    result.test.sort_unstable();
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::gen_er;

    fn synthetic_manifest(per_class: &[(&str, usize)]) -> Manifest {
        let mut m = Manifest::default();
        for (class, count) in per_class {
            for i in 0..*count {
                m.push(PathBuf::from(format!("{class}/{i}.edgelist")), class, None);
            }
        }
        m
    }

    #[test]
    fn split_single_class_64_16_20() {
        let m = synthetic_manifest(&[("a", 100)]);
        let s = split(&m, &SplitSpec::default()).unwrap();
        assert_eq!(s.train.len(), 64);
        assert_eq!(s.val.len(), 16);
        assert_eq!(s.test.len(), 20);
    }

    #[test]
    fn split_is_deterministic() {
        let m = synthetic_manifest(&[("a", 50), ("b", 30)]);
        let spec = SplitSpec {
            seed: 7,
            ..SplitSpec::default()
        };
        assert_eq!(split(&m, &spec).unwrap(), split(&m, &spec).unwrap());
    }

    #[test]
    fn split_300_per_class() {
        let m = synthetic_manifest(&[("a", 300), ("b", 300)]);
        let s = split(&m, &SplitSpec::default()).unwrap();
        assert_eq!(s.train.len(), 2 * 192);
        assert_eq!(s.val.len(), 2 * 48);
        assert_eq!(s.test.len(), 2 * 60);
        // per class
        for class_start in [0usize, 300] {
            let range = class_start..class_start + 300;
            assert_eq!(s.train.iter().filter(|&&i| range.contains(&i)).count(), 192);
            assert_eq!(s.val.iter().filter(|&&i| range.contains(&i)).count(), 48);
            assert_eq!(s.test.iter().filter(|&&i| range.contains(&i)).count(), 60);
        }
    }

    #[test]
    fn split_disjoint_exhaustive_random_manifests() {
        use rand::Rng;
        let mut rng = crate::seed::stage_rng(13, "split-test", 0);
        for trial in 0..1000 {
            let n_classes = rng.random_range(1..5usize);
            let classes: Vec<(String, usize)> = (0..n_classes)
                .map(|c| (format!("c{c}"), rng.random_range(3..40usize)))
                .collect();
            let spec_list: Vec<(&str, usize)> =
                classes.iter().map(|(n, c)| (n.as_str(), *c)).collect();
            let m = synthetic_manifest(&spec_list);
            let spec = SplitSpec {
                seed: trial,
                stratified: trial % 2 == 0,
                ..SplitSpec::default()
            };
            let s = split(&m, &spec).unwrap();
            let mut all: Vec<usize> = s
                .train
                .iter()
                .chain(&s.val)
                .chain(&s.test)
                .copied()
                .collect();
            all.sort_unstable();
            let expect: Vec<usize> = (0..m.records.len()).collect();
            assert_eq!(all, expect, "trial {trial}");
        }
    }

    #[test]
    fn split_rejects_tiny_class() {
        let m = synthetic_manifest(&[("a", 10), ("tiny", 2)]);
        let err = split(&m, &SplitSpec::default()).unwrap_err();
        match err {
            Error::Split(msg) => assert!(msg.contains("tiny"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn split_rejects_bad_fractions() {
        let m = synthetic_manifest(&[("a", 10)]);
        let spec = SplitSpec {
            train_frac: 0.9,
            val_frac: 0.2,
            test_frac: 0.2,
            ..SplitSpec::default()
        };
        assert!(matches!(split(&m, &spec), Err(Error::Split(_))));
    }

    #[test]
    fn manifest_round_trip_with_meta() {
        let dir = std::env::temp_dir().join("ggm-eval-manifest-test");
        std::fs::create_dir_all(&dir).unwrap();
        let mut m = Manifest::default();
        m.push(PathBuf::from("a/0.edgelist"), "ER", Some("{\"p\":0.1,\"seed\":3}".into()));
        m.push(PathBuf::from("b/1.edgelist"), "BA", None);
        let path = dir.join("manifest.csv");
        m.save(&path).unwrap();
        let back = Manifest::load(&path).unwrap();
        assert_eq!(m, back);
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn manifest_loads_graphs_and_reports_stats() {
        let dir = std::env::temp_dir().join("ggm-eval-load-test");
        std::fs::create_dir_all(&dir).unwrap();
        let mut m = Manifest::default();
        for (i, seed) in [1u64, 2].iter().enumerate() {
            let g = gen_er(20, 0.2, *seed).unwrap();
            let file = dir.join(format!("g{i}.edgelist"));
            g.write_edge_list(&file).unwrap();
            m.push(PathBuf::from(format!("g{i}.edgelist")), "ER", None);
        }
        let loaded = m.load_graphs(&dir).unwrap();
        assert_eq!(loaded.len(), 2);
        assert!(loaded.iter().all(|(g, c)| g.node_count() == 20 && c == "ER"));
        let stats = corpus_stats(&loaded);
        assert_eq!(stats.len(), 1);
        assert_eq!(stats[0].count, 2);
        assert_eq!(stats[0].min_nodes, 20);
        assert_eq!(stats[0].max_nodes, 20);
        for f in std::fs::read_dir(&dir).unwrap() {
            std::fs::remove_file(f.unwrap().path()).ok();
        }
    }

    #[test]
    fn manifest_missing_file_names_row() {
        let dir = std::env::temp_dir().join("ggm-eval-missing-test");
        std::fs::create_dir_all(&dir).unwrap();
        let mut m = Manifest::default();
        m.push(PathBuf::from("nope.edgelist"), "ER", None);
        let err = m.load_graphs(&dir).unwrap_err();
        match err {
            Error::Load(msg) => assert!(msg.contains("row 2"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn manifest_rejects_duplicate_paths() {
        let dir = std::env::temp_dir().join("ggm-eval-dup-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("dup.csv");
        std::fs::write(&path, "path,class\nx.edgelist,ER\nx.edgelist,BA\n").unwrap();
        assert!(matches!(Manifest::load(&path), Err(Error::Load(_))));
        std::fs::remove_file(&path).ok();
    }
}
