//! Kernels and the biased squared-MMD estimator, plus the five-metric suite.
//!
//! The estimator is the three-term biased form including diagonal terms:
//! mean within-X kernel + mean within-Y kernel - 2 * mean cross kernel.
//! Kernel values are accumulated in sorted order, which makes the estimate
//! exactly symmetric in (X, Y), exactly invariant to graph order within each
//! ensemble, and reproducible across runs regardless of parallelism.

use crate::descriptors::{
    clustering_histogram, degree_histogram, nspdk_features, orbit_counts, spectral_descriptor,
    Histogram, SparseCounts,
};
use crate::error::{Error, Result};
use crate::graph::Graph;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Kernel function choice.
///
/// `GaussianRbf` (a Gaussian over Euclidean distance between dense vectors)
/// backs the orbits metric; the other three follow the usual suite kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelKind {
    GaussianTv,
    GaussianEmd,
    GaussianRbf,
    NspdkDot,
}

/// Kernel plus bandwidth; `sigma` is ignored by `NspdkDot`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub sigma: f64,
}

impl KernelSpec {
    pub fn new(kind: KernelKind, sigma: f64) -> Result<KernelSpec> {
        if kind != KernelKind::NspdkDot && sigma <= 0.0 {
            return Err(Error::Argument(format!("kernel sigma must be > 0, got {sigma}")));
        }
        Ok(KernelSpec { kind, sigma })
    }

    pub fn gaussian_tv(sigma: f64) -> KernelSpec {
        KernelSpec {
            kind: KernelKind::GaussianTv,
            sigma,
        }
    }

    pub fn nspdk_dot() -> KernelSpec {
        KernelSpec {
            kind: KernelKind::NspdkDot,
            sigma: 1.0,
        }
    }
}

/// A per-graph descriptor ready for kernel evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DescriptorValue {
    Histogram(Histogram),
    /// Dense vector (orbit means, already normalized by the suite).
    Vector(Vec<f64>),
    Sparse(SparseCounts),
}

/// Evaluate the kernel between two descriptors of matching kind.
pub fn kernel_eval(a: &DescriptorValue, b: &DescriptorValue, spec: &KernelSpec) -> Result<f64> {
    match (a, b, spec.kind) {
        (DescriptorValue::Histogram(ha), DescriptorValue::Histogram(hb), KernelKind::GaussianTv) => {
            check_bins(ha, hb)?;
            let tv = 0.5
                * ha.mass
                    .iter()
                    .zip(&hb.mass)
                    .map(|(x, y)| (x - y).abs())
                    .sum::<f64>();
            Ok((-tv * tv / (2.0 * spec.sigma * spec.sigma)).exp())
        }
        (DescriptorValue::Histogram(ha), DescriptorValue::Histogram(hb), KernelKind::GaussianEmd) => {
            check_bins(ha, hb)?;
            let width = ha.bin_width();
            let mut cum = 0.0;
            let mut w1 = 0.0;
            for (x, y) in ha.mass.iter().zip(&hb.mass) {
                cum += x - y;
                w1 += cum.abs() * width;
            }
            Ok((-w1 * w1 / (2.0 * spec.sigma * spec.sigma)).exp())
        }
        (DescriptorValue::Vector(va), DescriptorValue::Vector(vb), KernelKind::GaussianRbf) => {
            if va.len() != vb.len() {
                return Err(Error::Argument(format!(
                    "vector descriptors of different lengths: {} vs {}",
                    va.len(),
                    vb.len()
                )));
            }
            let d2: f64 = va.iter().zip(vb).map(|(x, y)| (x - y) * (x - y)).sum();
            Ok((-d2 / (2.0 * spec.sigma * spec.sigma)).exp())
        }
        (DescriptorValue::Sparse(sa), DescriptorValue::Sparse(sb), KernelKind::NspdkDot) => {
            Ok(sa.cosine(sb))
        }
        _ => Err(Error::Argument(
            "descriptor kinds do not match the kernel".into(),
        )),
    }
}

fn check_bins(a: &Histogram, b: &Histogram) -> Result<()> {
    if a.kind != b.kind || a.edges != b.edges {
        return Err(Error::Argument(
            "histograms must share kind and bin edges".into(),
        ));
    }
    Ok(())
}

/// Sum in ascending order; canonical regardless of input order.
fn sorted_sum(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum()
}

/// Biased squared-MMD estimate between descriptor sets X and Y.
///
/// Exactly the three-term estimator with diagonal terms included. Values in
/// (-1e-12, 0) are clamped to 0.
pub fn mmd_squared(
    x: &[DescriptorValue],
    y: &[DescriptorValue],
    spec: &KernelSpec,
) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::Argument("mmd_squared: empty descriptor set".into()));
    }
    let n = x.len() as f64;
    let m = y.len() as f64;
    let mut xx = Vec::with_capacity(x.len() * x.len());
    for a in x {
        for b in x {
            xx.push(kernel_eval(a, b, spec)?);
        }
    }
    let mut yy = Vec::with_capacity(y.len() * y.len());
    for a in y {
        for b in y {
            yy.push(kernel_eval(a, b, spec)?);
        }
    }
    let mut xy = Vec::with_capacity(x.len() * y.len());
    for a in x {
        for b in y {
            xy.push(kernel_eval(a, b, spec)?);
        }
    }
    let value = sorted_sum(xx) / (n * n) + sorted_sum(yy) / (m * m)
        - 2.0 / (n * m) * sorted_sum(xy);
    if value < 0.0 && value > -1e-12 {
        Ok(0.0)
    } else {
        Ok(value)
    }
}

/// The five metric names, in report order.
pub const MMD_METRICS: [&str; 5] = ["degree", "clustering", "orbits", "spectral", "nspdk"];

/// Suite configuration: kernels and descriptor parameters per metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmdConfig {
    pub degree_kernel: KernelSpec,
    pub clustering_kernel: KernelSpec,
    pub spectral_kernel: KernelSpec,
    pub orbits_kernel: KernelSpec,
    pub clustering_bins: usize,
    pub spectral_bins: usize,
    /// 4 or 5; 5 is enumeration-based and size-limited.
    pub orbit_max_size: usize,
    pub nspdk_r_max: usize,
    pub nspdk_d_max: usize,
}

impl Default for MmdConfig {
    fn default() -> Self {
        MmdConfig {
            degree_kernel: KernelSpec::gaussian_tv(1.0),
            clustering_kernel: KernelSpec::gaussian_tv(1.0),
            spectral_kernel: KernelSpec::gaussian_tv(1.0),
            orbits_kernel: KernelSpec {
                kind: KernelKind::GaussianRbf,
                sigma: 1.0,
            },
            clustering_bins: 100,
            spectral_bins: 200,
            orbit_max_size: 4,
            nspdk_r_max: 2,
            nspdk_d_max: 3,
        }
    }
}

/// Metric values plus enough metadata to reproduce them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmdReport {
    /// metric name -> squared-MMD value
    pub values: BTreeMap<String, f64>,
    pub n_ref: usize,
    pub n_gen: usize,
    pub config: MmdConfig,
}

/// Compute the five-descriptor MMD suite between two graph ensembles.
///
/// Histogram metrics share bin edges across both ensembles (the degree
/// histogram spans the joint maximum degree). Orbit vectors are scaled by
/// `1 / (1 + norm)` before the RBF kernel.
pub fn mmd_suite(reference: &[Graph], generated: &[Graph], config: &MmdConfig) -> Result<MmdReport> {
    if reference.is_empty() || generated.is_empty() {
        return Err(Error::Argument("mmd_suite: ensembles must be non-empty".into()));
    }
    let mut values = BTreeMap::new();

    let max_deg = reference
        .iter()
        .chain(generated)
        .map(Graph::max_degree)
        .max()
        .unwrap_or(0)
        .max(1);

    let degree = |g: &Graph| degree_histogram(g, max_deg).map(DescriptorValue::Histogram);
    values.insert(
        "degree".to_string(),
        metric_mmd(reference, generated, &config.degree_kernel, degree).map_err(|e| e.in_stage("degree"))?,
    );

    let clustering =
        |g: &Graph| clustering_histogram(g, config.clustering_bins).map(DescriptorValue::Histogram);
    values.insert(
        "clustering".to_string(),
        metric_mmd(reference, generated, &config.clustering_kernel, clustering)
            .map_err(|e| e.in_stage("clustering"))?,
    );

    let orbits = |g: &Graph| {
        orbit_counts(g, config.orbit_max_size).map(|d| {
            let norm = d.graph_vector.iter().map(|x| x * x).sum::<f64>().sqrt();
            let scale = 1.0 / (1.0 + norm);
            DescriptorValue::Vector(d.graph_vector.iter().map(|x| x * scale).collect())
        })
    };
    values.insert(
        "orbits".to_string(),
        metric_mmd(reference, generated, &config.orbits_kernel, orbits)
            .map_err(|e| e.in_stage("orbits"))?,
    );

    let spectral =
        |g: &Graph| spectral_descriptor(g, config.spectral_bins).map(DescriptorValue::Histogram);
    values.insert(
        "spectral".to_string(),
        metric_mmd(reference, generated, &config.spectral_kernel, spectral)
            .map_err(|e| e.in_stage("spectral"))?,
    );

    let nspdk =
        |g: &Graph| Ok(DescriptorValue::Sparse(nspdk_features(g, config.nspdk_r_max, config.nspdk_d_max)));
    values.insert(
        "nspdk".to_string(),
        metric_mmd(reference, generated, &KernelSpec::nspdk_dot(), nspdk)
            .map_err(|e| e.in_stage("nspdk"))?,
    );

    Ok(MmdReport {
        values,
        n_ref: reference.len(),
        n_gen: generated.len(),
        config: config.clone(),
    })
}

fn metric_mmd<F>(
    reference: &[Graph],
    generated: &[Graph],
    kernel: &KernelSpec,
    descriptor: F,
) -> Result<f64>
where
    F: Fn(&Graph) -> Result<DescriptorValue> + Sync,
{
    let x: Result<Vec<DescriptorValue>> = reference.par_iter().map(&descriptor).collect();
    let y: Result<Vec<DescriptorValue>> = generated.par_iter().map(&descriptor).collect();
    mmd_squared(&x?, &y?, kernel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptors::HistogramKind;
    use crate::generators::{gen_ba, gen_er};

    fn point_mass(at: usize, bins: usize) -> DescriptorValue {
        let mut mass = vec![0.0; bins];
        mass[at] = 1.0;
        DescriptorValue::Histogram(Histogram {
            edges: (0..=bins).map(|i| i as f64).collect(),
            mass,
            kind: HistogramKind::Degree,
        })
    }

    #[test]
    fn kernel_self_is_one() {
        let h = point_mass(0, 4);
        let v = DescriptorValue::Vector(vec![0.3, 0.4]);
        let s = DescriptorValue::Sparse(crate::descriptors::nspdk_features(
            &gen_er(10, 0.3, 1).unwrap(),
            1,
            2,
        ));
        assert_eq!(kernel_eval(&h, &h, &KernelSpec::gaussian_tv(1.0)).unwrap(), 1.0);
        assert_eq!(
            kernel_eval(
                &h,
                &h,
                &KernelSpec {
                    kind: KernelKind::GaussianEmd,
                    sigma: 1.0
                }
            )
            .unwrap(),
            1.0
        );
        assert_eq!(
            kernel_eval(
                &v,
                &v,
                &KernelSpec {
                    kind: KernelKind::GaussianRbf,
                    sigma: 1.0
                }
            )
            .unwrap(),
            1.0
        );
        assert!((kernel_eval(&s, &s, &KernelSpec::nspdk_dot()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_tv_disjoint_masses() {
        let a = point_mass(0, 2);
        let b = point_mass(1, 2);
        let k = kernel_eval(&a, &b, &KernelSpec::gaussian_tv(1.0)).unwrap();
        assert!((k - (-0.5f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn mismatched_bins_error() {
        let a = point_mass(0, 2);
        let b = point_mass(0, 3);
        assert!(matches!(
            kernel_eval(&a, &b, &KernelSpec::gaussian_tv(1.0)),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn mmd_of_identical_sets_is_zero() {
        let x = vec![point_mass(0, 4), point_mass(1, 4), point_mass(3, 4)];
        let v = mmd_squared(&x, &x, &KernelSpec::gaussian_tv(1.0)).unwrap();
        assert!(v.abs() < 1e-12, "got {v}");
    }

    #[test]
    fn mmd_symmetry_exact() {
        let x = vec![point_mass(0, 4), point_mass(1, 4)];
        let y = vec![point_mass(2, 4), point_mass(3, 4), point_mass(0, 4)];
        let spec = KernelSpec::gaussian_tv(0.7);
        let a = mmd_squared(&x, &y, &spec).unwrap();
        let b = mmd_squared(&y, &x, &spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mmd_two_vs_one_hand_computed() {
        // X = {h1, h1}, Y = {h2}, TV(h1, h2) = 1, sigma = 1:
        // 1 + 1 - 2 exp(-1/2)
        let x = vec![point_mass(0, 2), point_mass(0, 2)];
        let y = vec![point_mass(1, 2)];
        let v = mmd_squared(&x, &y, &KernelSpec::gaussian_tv(1.0)).unwrap();
        let expect = 2.0 - 2.0 * (-0.5f64).exp();
        assert!((v - expect).abs() < 1e-12, "{v} vs {expect}");
    }

    #[test]
    fn mmd_order_invariance() {
        let x = vec![point_mass(0, 4), point_mass(1, 4), point_mass(2, 4)];
        let mut x_perm = x.clone();
        x_perm.swap(0, 2);
        let y = vec![point_mass(3, 4)];
        let spec = KernelSpec::gaussian_tv(1.0);
        assert_eq!(
            mmd_squared(&x, &y, &spec).unwrap(),
            mmd_squared(&x_perm, &y, &spec).unwrap()
        );
    }

    #[test]
    fn growing_y_with_x_members_never_increases_mmd() {
        let h = |at: usize| point_mass(at, 4);
        let x = vec![h(0), h(1), h(2)];
        let spec = KernelSpec::gaussian_tv(1.0);
        // growing Y from one X member toward X's own multiset walks the
        // estimate monotonically down to zero
        let mut y = vec![h(0)];
        let mut prev = mmd_squared(&x, &y, &spec).unwrap();
        for next in [h(1), h(2)] {
            y.push(next);
            let now = mmd_squared(&x, &y, &spec).unwrap();
            assert!(now <= prev + 1e-12, "{now} > {prev}");
            prev = now;
        }
        assert!(prev.abs() <= 1e-12, "Y = X should reach zero, got {prev}");
    }

    #[test]
    fn empty_set_is_error() {
        let x = vec![point_mass(0, 2)];
        assert!(matches!(
            mmd_squared(&x, &[], &KernelSpec::gaussian_tv(1.0)),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn suite_same_ensemble_is_zero() {
        let graphs: Vec<_> = (0..4).map(|s| gen_er(30, 0.2, s).unwrap()).collect();
        let report = mmd_suite(&graphs, &graphs, &MmdConfig::default()).unwrap();
        for (metric, &v) in &report.values {
            assert!(v.abs() < 1e-12, "{metric}: {v}");
        }
        assert_eq!(report.values.len(), 5);
    }

    #[test]
    fn suite_same_family_scores_lower_than_cross_family() {
        let reference: Vec<_> = (0..20).map(|s| gen_er(300, 0.02, s).unwrap()).collect();
        let same: Vec<_> = (100..120).map(|s| gen_er(300, 0.02, s).unwrap()).collect();
        let cross: Vec<_> = (0..20).map(|s| gen_ba(300, 3, s).unwrap()).collect();
        let cfg = MmdConfig::default();
        let near = mmd_suite(&reference, &same, &cfg).unwrap();
        let far = mmd_suite(&reference, &cross, &cfg).unwrap();
        for metric in MMD_METRICS {
            assert!(
                near.values[metric] < far.values[metric],
                "{metric}: same-family {} !< cross-family {}",
                near.values[metric],
                far.values[metric]
            );
        }
    }

    /// The biased estimator is non-negative for positive definite kernels
    /// (the Gaussian-over-TV kernel of the histogram metrics is famously not
    /// PD, so it is only covered by the clamping contract).
    #[test]
    fn non_negativity_over_random_sets_pd_kernels() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let rbf = KernelSpec {
            kind: KernelKind::GaussianRbf,
            sigma: 0.8,
        };
        for _ in 0..100 {
            let dim = rng.random_range(2..6usize);
            let make = |rng: &mut rand_chacha::ChaCha8Rng| {
                DescriptorValue::Vector((0..dim).map(|_| rng.random::<f64>()).collect())
            };
            let x: Vec<_> = (0..rng.random_range(1..5usize)).map(|_| make(&mut rng)).collect();
            let y: Vec<_> = (0..rng.random_range(1..5usize)).map(|_| make(&mut rng)).collect();
            let v = mmd_squared(&x, &y, &rbf).unwrap();
            assert!(v >= -1e-12, "negative mmd {v}");
        }
        // cosine of sparse counts is an inner product, hence PD as well
        for seed in 0..20u64 {
            let make = |s: u64| {
                DescriptorValue::Sparse(crate::descriptors::nspdk_features(
                    &gen_er(12, 0.3, s).unwrap(),
                    1,
                    2,
                ))
            };
            let x: Vec<_> = (0..3).map(|i| make(seed * 10 + i)).collect();
            let y: Vec<_> = (0..2).map(|i| make(seed * 10 + 5 + i)).collect();
            let v = mmd_squared(&x, &y, &KernelSpec::nspdk_dot()).unwrap();
            assert!(v >= -1e-12, "negative nspdk mmd {v}");
        }
    }
}
