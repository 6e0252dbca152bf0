//! Anchor-based classification with per-class dynamic k, and confusion-matrix
//! construction.
//!
//! Each class contributes its own k = round(sqrt(anchor count)) nearest
//! anchors; the probe takes the class with the smallest mean distance over
//! those k. Ties break on the single nearest anchor distance, then on class
//! order, so predictions are a pure function of the inputs.

use crate::embed::euclidean;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Labeled embedding store for k-NN classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorIndex {
    embeddings: Vec<Vec<f64>>,
    labels: Vec<usize>,
    class_counts: Vec<usize>,
    dim: usize,
}

impl AnchorIndex {
    /// Build from parallel embedding/label lists. Every class in
    /// `0..n_classes` must have at least one anchor.
    pub fn build(embeddings: Vec<Vec<f64>>, labels: Vec<usize>, n_classes: usize) -> Result<AnchorIndex> {
        if embeddings.len() != labels.len() {
            return Err(Error::Argument(format!(
                "{} embeddings vs {} labels",
                embeddings.len(),
                labels.len()
            )));
        }
        if embeddings.is_empty() {
            return Err(Error::Argument("anchor index needs at least one anchor".into()));
        }
        let dim = embeddings[0].len();
        if embeddings.iter().any(|e| e.len() != dim) {
            return Err(Error::Argument("anchor embeddings have mixed dimensions".into()));
        }
        let mut class_counts = vec![0usize; n_classes];
        for &l in &labels {
            if l >= n_classes {
                return Err(Error::Argument(format!("label {l} outside 0..{n_classes}")));
            }
            class_counts[l] += 1;
        }
        if let Some(empty) = class_counts.iter().position(|&c| c == 0) {
            return Err(Error::Argument(format!("class {empty} has no anchors")));
        }
        Ok(AnchorIndex {
            embeddings,
            labels,
            class_counts,
            dim,
        })
    }

    pub fn n_classes(&self) -> usize {
        self.class_counts.len()
    }

    pub fn class_counts(&self) -> &[usize] {
        &self.class_counts
    }

    pub fn len(&self) -> usize {
        self.embeddings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.embeddings.is_empty()
    }
}

/// Dynamic per-class neighbor count: round(sqrt(count)) with ties to even,
/// floored at 1 and capped at the count itself.
pub fn dynamic_k(count: usize) -> usize {
    assert!(count >= 1, "dynamic_k needs a positive anchor count");
    let k = (count as f64).sqrt().round_ties_even() as usize;
    k.clamp(1, count)
}

/// Classify an embedding: per-class mean distance over that class's k
/// nearest anchors, argmin wins. Returns the class and the per-class scores.
pub fn classify(h: &[f64], index: &AnchorIndex) -> Result<(usize, Vec<f64>)> {
    if h.len() != index.dim {
        return Err(Error::Argument(format!(
            "probe dimension {} != anchor dimension {}",
            h.len(),
            index.dim
        )));
    }
    let n_classes = index.n_classes();
    let mut per_class: Vec<Vec<f64>> = vec![Vec::new(); n_classes];
    for (e, &l) in index.embeddings.iter().zip(&index.labels) {
        per_class[l].push(euclidean(h, e));
    }
    let mut scores = vec![f64::INFINITY; n_classes];
    let mut nearest = vec![f64::INFINITY; n_classes];
    for c in 0..n_classes {
        let dists = &mut per_class[c];
        dists.sort_by(f64::total_cmp);
        let k = dynamic_k(dists.len());
        scores[c] = dists[..k].iter().sum::<f64>() / k as f64;
        nearest[c] = dists[0];
    }
    let mut best = 0usize;
    for c in 1..n_classes {
        if scores[c] < scores[best]
            || (scores[c] == scores[best] && nearest[c] < nearest[best])
        {
            best = c;
        }
    }
    Ok((best, scores))
}

/// Row-normalized confusion matrix in percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    /// `rows[t][p]` = percentage of true-class-t samples predicted as p.
    pub rows: Vec<Vec<f64>>,
}

impl ConfusionMatrix {
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.classes.len()).map(|c| self.rows[c][c]).collect()
    }

    /// CSV shaped like the usual confusion tables: header row of predicted
    /// classes, one row per true class.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("true\\pred");
        for c in &self.classes {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (t, row) in self.rows.iter().enumerate() {
            out.push_str(&self.classes[t]);
            for v in row {
                out.push_str(&format!(",{v:.1}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Build the confusion matrix from parallel prediction/truth lists.
pub fn confusion_matrix(
    predictions: &[usize],
    truth: &[usize],
    classes: &[String],
) -> Result<ConfusionMatrix> {
    if predictions.len() != truth.len() {
        return Err(Error::Argument(format!(
            "{} predictions vs {} truths",
            predictions.len(),
            truth.len()
        )));
    }
    let k = classes.len();
    let mut counts = vec![vec![0usize; k]; k];
    for (&p, &t) in predictions.iter().zip(truth) {
        if p >= k || t >= k {
            return Err(Error::Argument(format!("label {} outside class list", p.max(t))));
        }
        counts[t][p] += 1;
    }
    let rows = counts
        .into_iter()
        .map(|row| {
            let total: usize = row.iter().sum();
            if total == 0 {
                vec![0.0; k]
            } else {
                row.into_iter()
                    .map(|c| 100.0 * c as f64 / total as f64)
                    .collect()
            }
        })
        .collect();
    Ok(ConfusionMatrix {
        classes: classes.to_vec(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn dynamic_k_examples() {
        assert_eq!(dynamic_k(100), 10);
        assert_eq!(dynamic_k(1), 1);
        assert_eq!(dynamic_k(10), 3); // round(3.162...) = 3
        assert_eq!(dynamic_k(2), 1); // round(1.414) = 1
        assert_eq!(dynamic_k(64), 8);
    }

    fn cluster_index() -> AnchorIndex {
        // three classes around separated centers
        let mut rng = crate::seed::stage_rng(3, "knn-test", 0);
        let centers = [[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]];
        let mut embeddings = Vec::new();
        let mut labels = Vec::new();
        for (c, center) in centers.iter().enumerate() {
            for _ in 0..9 {
                embeddings.push(vec![
                    center[0] + 0.1 * (rng.random::<f64>() - 0.5),
                    center[1] + 0.1 * (rng.random::<f64>() - 0.5),
                ]);
                labels.push(c);
            }
        }
        AnchorIndex::build(embeddings, labels, 3).unwrap()
    }

    #[test]
    fn probe_on_anchor_wins() {
        let idx = cluster_index();
        let (class, scores) = classify(&[0.0, 0.0], &idx).unwrap();
        assert_eq!(class, 0);
        assert!(scores[0] < scores[1] && scores[0] < scores[2]);
    }

    #[test]
    fn separated_clusters_classify_perfectly() {
        let idx = cluster_index();
        let mut rng = crate::seed::stage_rng(4, "knn-probe", 0);
        let centers = [[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]];
        for _ in 0..300 {
            let c = rng.random_range(0..3usize);
            let probe = vec![
                centers[c][0] + 0.1 * (rng.random::<f64>() - 0.5),
                centers[c][1] + 0.1 * (rng.random::<f64>() - 0.5),
            ];
            let (pred, _) = classify(&probe, &idx).unwrap();
            assert_eq!(pred, c);
        }
    }

    #[test]
    fn mirrored_tie_breaks_by_class_order() {
        // two classes mirrored through the y-axis; probe on the axis
        let embeddings = vec![vec![-1.0, 0.0], vec![-2.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]];
        let labels = vec![0, 0, 1, 1];
        let idx = AnchorIndex::build(embeddings, labels, 2).unwrap();
        let (pred, scores) = classify(&[0.0, 0.0], &idx).unwrap();
        assert_eq!(scores[0], scores[1]);
        assert_eq!(pred, 0);
    }

    #[test]
    fn dimension_mismatch() {
        let idx = cluster_index();
        assert!(matches!(
            classify(&[0.0, 0.0, 0.0], &idx),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn isometry_invariance() {
        let idx = cluster_index();
        // rotation by angle t plus translation
        let t = 0.83f64;
        let (c, s) = (t.cos(), t.sin());
        let map = |v: &[f64]| vec![c * v[0] - s * v[1] + 5.0, s * v[0] + c * v[1] - 2.0];
        let moved = AnchorIndex::build(
            idx.embeddings.iter().map(|e| map(e)).collect(),
            idx.labels.clone(),
            3,
        )
        .unwrap();
        let mut rng = crate::seed::stage_rng(9, "iso", 0);
        for _ in 0..50 {
            let probe = vec![rng.random::<f64>() * 12.0 - 1.0, rng.random::<f64>() * 12.0 - 1.0];
            let (a, _) = classify(&probe, &idx).unwrap();
            let (b, _) = classify(&map(&probe), &moved).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn classification_is_pure() {
        let idx = cluster_index();
        let probe = vec![3.0, 3.0];
        let first = classify(&probe, &idx).unwrap();
        for _ in 0..5 {
            assert_eq!(classify(&probe, &idx).unwrap(), first);
        }
    }

    #[test]
    fn confusion_identity() {
        let classes: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let truth = vec![0, 1, 2, 0, 1, 2];
        let cm = confusion_matrix(&truth, &truth, &classes).unwrap();
        for t in 0..3 {
            assert_eq!(cm.rows[t][t], 100.0);
        }
    }

    #[test]
    fn confusion_all_into_one_column() {
        let classes: Vec<String> = ["a", "b"].iter().map(|s| s.to_string()).collect();
        let truth = vec![0, 0, 1, 1];
        let pred = vec![1, 1, 1, 1];
        let cm = confusion_matrix(&pred, &truth, &classes).unwrap();
        assert_eq!(cm.rows[0][1], 100.0);
        assert_eq!(cm.rows[1][1], 100.0);
    }

    #[test]
    fn confusion_half_split() {
        let classes: Vec<String> = ["a", "b"].iter().map(|s| s.to_string()).collect();
        let truth = vec![0; 100];
        let mut pred = vec![0; 50];
        pred.extend(vec![1; 50]);
        let cm = confusion_matrix(&pred, &truth, &classes).unwrap();
        assert_eq!(cm.rows[0][0], 50.0);
        assert_eq!(cm.rows[0][1], 50.0);
    }

    #[test]
    fn confusion_rows_sum_to_100() {
        let mut rng = crate::seed::stage_rng(6, "cm", 0);
        let classes: Vec<String> = (0..5).map(|c| format!("c{c}")).collect();
        for _ in 0..50 {
            let truth: Vec<usize> = (0..200).map(|_| rng.random_range(0..5)).collect();
            let pred: Vec<usize> = (0..200).map(|_| rng.random_range(0..5)).collect();
            let cm = confusion_matrix(&pred, &truth, &classes).unwrap();
            for row in &cm.rows {
                let sum: f64 = row.iter().sum();
                assert!((sum - 100.0).abs() < 0.1, "row sum {sum}");
            }
        }
    }

    #[test]
    fn unknown_label_is_error() {
        let classes: Vec<String> = vec!["a".into()];
        assert!(matches!(
            confusion_matrix(&[1], &[0], &classes),
            Err(Error::Argument(_))
        ));
    }
}
