//! Lloyd-iteration K-means baseline with deterministic tie-breaking.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{euclidean, select_initial_medoids, ClusterConfig, ClusterError, DistanceCache};
use crate::dataset::NumericDataset;

/// How the initial means are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum KMeansInit {
    /// Seed with the rows the medoid-score initialization would pick, so
    /// the two methods start from the same points.
    MedoidScore,
    /// Uniform random distinct rows.
    Random { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansResult {
    /// Cluster means, c x d.
    pub centroids: Vec<Vec<f64>>,
    pub assignment: Vec<usize>,
    /// Sum of squared distances from every row to its centroid.
    pub objective: f64,
    pub iterations: usize,
}

/// Componentwise arithmetic mean of a non-empty member set.
pub fn cluster_mean(members: &[&[f64]]) -> Result<Vec<f64>, ClusterError> {
    let first = members.first().ok_or(ClusterError::EmptyClusterEncountered { cluster: 0 })?;
    let d = first.len();
    let mut mean = vec![0.0f64; d];
    for m in members {
        if m.len() != d {
            return Err(ClusterError::DimensionMismatch { a: d, b: m.len() });
        }
        for (acc, v) in mean.iter_mut().zip(*m) {
            *acc += v;
        }
    }
    let n = members.len() as f64;
    for acc in &mut mean {
        *acc /= n;
    }
    Ok(mean)
}

fn nearest_centroid(row: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = 0usize;
    let mut best_d = sq_dist(row, &centroids[0]);
    for (k, c) in centroids.iter().enumerate().skip(1) {
        let d = sq_dist(row, c);
        if d < best_d {
            best = k;
            best_d = d;
        }
    }
    (best, best_d)
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd iteration: assign to the closest mean (ties to the lowest cluster
/// index), recompute means, stop when assignments no longer change or the
/// iteration cap is hit. An empty cluster is re-seeded with the row
/// farthest from its stale centroid.
pub fn kmeans_cluster(
    dataset: &NumericDataset,
    c: usize,
    config: &ClusterConfig,
) -> Result<KMeansResult, ClusterError> {
    let n = dataset.n_rows();
    if c < 1 || c > n {
        return Err(ClusterError::InvalidClusterCount { c, n });
    }
    if !dataset.is_finite() {
        return Err(ClusterError::NonFiniteData);
    }
    let seeds: Vec<usize> = match config.kmeans_init {
        KMeansInit::MedoidScore => {
            let cache = DistanceCache::new(dataset, config.cache_cap);
            select_initial_medoids(&cache, c)?
        }
        KMeansInit::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut all: Vec<usize> = (0..n).collect();
            all.shuffle(&mut rng);
            all.truncate(c);
            all
        }
    };
    let mut centroids: Vec<Vec<f64>> = seeds.iter().map(|&i| dataset.row(i).to_vec()).collect();
    let mut prev_assignment: Option<Vec<usize>> = None;
    let mut iterations = 0usize;
    let mut assignment = vec![0usize; n];
    while iterations < config.max_iterations {
        iterations += 1;
        for i in 0..n {
            assignment[i] = nearest_centroid(dataset.row(i), &centroids).0;
        }
        reseed_empty(dataset, &mut centroids, &mut assignment);
        if prev_assignment.as_deref() == Some(&assignment[..]) {
            break;
        }
        prev_assignment = Some(assignment.clone());
        let mut members: Vec<Vec<&[f64]>> = vec![Vec::new(); c];
        for (i, &k) in assignment.iter().enumerate() {
            members[k].push(dataset.row(i));
        }
        for (k, m) in members.iter().enumerate() {
            if !m.is_empty() {
                centroids[k] = cluster_mean(m)?;
            }
        }
    }
    let objective = (0..n)
        .map(|i| sq_dist(dataset.row(i), &centroids[assignment[i]]))
        .sum();
    Ok(KMeansResult {
        centroids,
        assignment,
        objective,
        iterations,
    })
}

/// Give each empty cluster the unclaimed row farthest from the cluster's
/// current (stale) centroid, then fold re-assignments in.
fn reseed_empty(dataset: &NumericDataset, centroids: &mut [Vec<f64>], assignment: &mut [usize]) {
    let c = centroids.len();
    loop {
        let mut sizes = vec![0usize; c];
        for &k in assignment.iter() {
            sizes[k] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return;
        };
        // farthest row from the stale centroid, excluding rows that are the
        // sole member of their cluster; ties to the lowest index
        let mut best: Option<usize> = None;
        let mut best_d = -1.0;
        for i in 0..dataset.n_rows() {
            if sizes[assignment[i]] <= 1 {
                continue;
            }
            let d = euclidean(dataset.row(i), &centroids[empty]).unwrap();
            if d > best_d {
                best = Some(i);
                best_d = d;
            }
        }
        let Some(pick) = best else {
            return;
        };
        centroids[empty] = dataset.row(pick).to_vec();
        assignment[pick] = empty;
    }
}
