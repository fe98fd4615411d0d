use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::image::{ensure_same_dims, BinaryMask, GrayImage};
use crate::preprocess::quantile;

use super::BaselineError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KMeansConfig {
    pub k: usize,
    pub max_iters: usize,
    /// Stop when no centroid moves more than this.
    pub tol: f64,
    /// Used only to replace coinciding quantile seeds.
    pub seed: u64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self { k: 2, max_iters: 100, tol: 1e-6, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    /// Final centroids, ascending.
    pub centroids: Vec<f64>,
    /// Cluster index of each input value, into `centroids`.
    pub assignments: Vec<usize>,
    /// Within-cluster sum of squares after every assignment + update round.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

#[inline]
fn nearest(centroids: &[f64], v: f64) -> usize {
    let mut best = 0;
    let mut best_d = (v - centroids[0]).abs();
    for (j, &c) in centroids.iter().enumerate().skip(1) {
        let d = (v - c).abs();
        if d < best_d {
            best = j;
            best_d = d;
        }
    }
    best
}

fn objective(values: &[f64], centroids: &[f64], assignments: &[usize]) -> f64 {
    values.iter().zip(assignments).map(|(&v, &a)| (v - centroids[a]).powi(2)).sum()
}

/// One-dimensional Lloyd iteration seeded at the `(i + 0.5) / k` quantiles.
pub fn kmeans_fit(values: &[f64], cfg: &KMeansConfig) -> Result<KMeansFit, BaselineError> {
    if cfg.k < 2 {
        return Err(BaselineError::Config("k must be at least 2".to_owned()));
    }
    if cfg.max_iters == 0 {
        return Err(BaselineError::Config("max_iters must be at least 1".to_owned()));
    }
    let mut distinct = values.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < cfg.k {
        return Err(BaselineError::TooFewDistinct { k: cfg.k, found: distinct.len() });
    }

    let mut centroids: Vec<f64> =
        (0..cfg.k).map(|i| quantile(values, (i as f64 + 0.5) / cfg.k as f64).expect("nonempty")).collect();
    // skewed data can put several quantile seeds on one value
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for i in 1..cfg.k {
        while centroids[..i].contains(&centroids[i]) {
            centroids[i] = *distinct.choose(&mut rng).expect("nonempty");
        }
    }
    centroids.sort_by(f64::total_cmp);

    let mut assignments = vec![0usize; values.len()];
    let mut objective_trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        iterations += 1;
        for (a, &v) in assignments.iter_mut().zip(values) {
            *a = nearest(&centroids, v);
        }
        let mut sums = vec![0.0; cfg.k];
        let mut counts = vec![0usize; cfg.k];
        for (&a, &v) in assignments.iter().zip(values) {
            sums[a] += v;
            counts[a] += 1;
        }
        let mut shift: f64 = 0.0;
        for j in 0..cfg.k {
            // an emptied cluster keeps its centroid
            if counts[j] > 0 {
                let c = sums[j] / counts[j] as f64;
                shift = shift.max((c - centroids[j]).abs());
                centroids[j] = c;
            }
        }
        objective_trace.push(objective(values, &centroids, &assignments));
        if shift <= cfg.tol {
            converged = true;
            break;
        }
    }

    // present clusters in ascending centroid order
    let mut order: Vec<usize> = (0..cfg.k).collect();
    order.sort_by(|&a, &b| centroids[a].total_cmp(&centroids[b]));
    let mut rank = vec![0; cfg.k];
    for (r, &j) in order.iter().enumerate() {
        rank[j] = r;
    }
    let centroids = order.iter().map(|&j| centroids[j]).collect();
    let assignments = assignments.iter().map(|&a| rank[a]).collect();

    Ok(KMeansFit { centroids, assignments, objective_trace, iterations, converged })
}

/// K-means on region intensities; the mask marks region pixels in the
/// cluster with the lowest centroid.
pub fn kmeans_segment(
    img: &GrayImage,
    cfg: &KMeansConfig,
    roi: Option<&BinaryMask>,
) -> Result<BinaryMask, BaselineError> {
    if let Some(r) = roi {
        ensure_same_dims(img.dims(), r.dims())?;
    }
    let values = img.masked_values(roi)?;
    let fit = kmeans_fit(&values, cfg)?;
    let mut dark = fit.assignments.iter().map(|&a| a == 0);
    let data =
        (0..img.len()).map(|i| roi.is_none_or(|r| r.data()[i]) && dark.next().expect("one per region pixel")).collect();
    Ok(BinaryMask::new(img.width(), img.height(), data)?)
}
