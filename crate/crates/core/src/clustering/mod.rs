//! Medoid clustering with score-based initialization, plus the K-means
//! baseline in [`kmeans`].
//!
//! The main loop alternates two steps until the objective (sum of distances
//! from every row to its cluster's medoid) stops changing: swap each
//! cluster's medoid for the member minimizing total intra-cluster distance,
//! then reassign every row to its nearest medoid. Initial medoids are the
//! `c` rows with the smallest normalized-distance score
//! `v_j = sum_i dist_ij / sum_k dist_ik`.
//!
//! Every tie breaks to the lowest index, so results are fully deterministic.
//! Empty clusters (possible when duplicate rows tie toward an earlier
//! medoid) are deleted as soon as they appear, mid-loop and at termination.

mod kmeans;

pub use kmeans::{cluster_mean, kmeans_cluster, KMeansInit, KMeansResult};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::NumericDataset;

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("dimension mismatch: {a} vs {b}")]
    DimensionMismatch { a: usize, b: usize },
    #[error("invalid cluster count {c} for {n} rows (need 1 <= c <= n)")]
    InvalidClusterCount { c: usize, n: usize },
    #[error("dataset contains non-finite values")]
    NonFiniteData,
    #[error("cluster {cluster} has no members")]
    EmptyClusterEncountered { cluster: usize },
}

/// Euclidean distance between two equal-length vectors.
pub fn euclidean(a: &[f64], b: &[f64]) -> Result<f64, ClusterError> {
    if a.len() != b.len() {
        return Err(ClusterError::DimensionMismatch {
            a: a.len(),
            b: b.len(),
        });
    }
    Ok(euclidean_unchecked(a, b))
}

#[inline]
fn euclidean_unchecked(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Pairwise-distance access over a dataset. Precomputes the full symmetric
/// n x n matrix when n is at or below the cap; falls back to on-demand
/// evaluation above it, since quadratic memory is the binding constraint at
/// KDD scale.
pub struct DistanceCache<'a> {
    data: &'a NumericDataset,
    full: Option<Vec<f64>>,
}

impl<'a> DistanceCache<'a> {
    pub fn new(data: &'a NumericDataset, full_matrix_cap: usize) -> DistanceCache<'a> {
        let n = data.n_rows();
        let full = (n <= full_matrix_cap).then(|| {
            let mut m = vec![0.0f64; n * n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let d = euclidean_unchecked(data.row(i), data.row(j));
                    m[i * n + j] = d;
                    m[j * n + i] = d;
                }
            }
            m
        });
        DistanceCache { data, full }
    }

    pub fn len(&self) -> usize {
        self.data.n_rows()
    }

    pub fn is_empty(&self) -> bool {
        self.data.n_rows() == 0
    }

    pub fn is_full_matrix(&self) -> bool {
        self.full.is_some()
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        match &self.full {
            Some(m) => m[i * self.data.n_rows() + j],
            None => euclidean_unchecked(self.data.row(i), self.data.row(j)),
        }
    }
}

/// Knobs for [`cluster`] and [`kmeans_cluster`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterConfig {
    pub max_iterations: usize,
    /// Absolute objective tolerance for convergence; 0 means exact equality.
    pub tolerance: f64,
    /// Largest n for which the full distance matrix is precomputed.
    pub cache_cap: usize,
    /// Caller's assertion that the dataset has been standardized.
    pub assume_standardized: bool,
    pub kmeans_init: KMeansInit,
}

impl Default for ClusterConfig {
    fn default() -> ClusterConfig {
        ClusterConfig {
            max_iterations: 100,
            tolerance: 0.0,
            cache_cap: 8192,
            assume_standardized: true,
            kmeans_init: KMeansInit::MedoidScore,
        }
    }
}

/// Outcome of the medoid clustering loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringResult {
    /// Row index of each surviving cluster's medoid.
    pub medoids: Vec<usize>,
    /// Surviving-cluster index per row.
    pub assignment: Vec<usize>,
    /// Sum of distances from every row to its cluster's medoid.
    pub objective: f64,
    /// Objective after the initial assignment and after each iteration.
    pub objective_trace: Vec<f64>,
    pub cluster_sizes: Vec<usize>,
    pub iterations: usize,
    /// Number of empty clusters deleted along the way.
    pub removed_empty: usize,
}

impl ClusteringResult {
    pub fn n_clusters(&self) -> usize {
        self.medoids.len()
    }
}

/// Score-based initialization: rank rows by `v_j = sum_i dist_ij / sum_k
/// dist_ik` and take the `c` smallest, ties to the lowest index. Rows in an
/// all-identical dataset contribute nothing (their normalizer is 0).
pub fn select_initial_medoids(cache: &DistanceCache, c: usize) -> Result<Vec<usize>, ClusterError> {
    let n = cache.len();
    if c < 1 || c > n {
        return Err(ClusterError::InvalidClusterCount { c, n });
    }
    let mut scores = vec![0.0f64; n];
    for i in 0..n {
        let row_sum: f64 = (0..n).map(|k| cache.dist(i, k)).sum();
        if row_sum == 0.0 {
            continue;
        }
        for (j, s) in scores.iter_mut().enumerate() {
            *s += cache.dist(i, j) / row_sum;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap().then(a.cmp(&b)));
    order.truncate(c);
    Ok(order)
}

/// Assign every row to its nearest medoid (ties to the earliest medoid in
/// the sequence) and return the assignment with the summed distance.
pub fn assign(cache: &DistanceCache, medoids: &[usize]) -> (Vec<usize>, f64) {
    debug_assert!(!medoids.is_empty());
    let n = cache.len();
    let mut assignment = Vec::with_capacity(n);
    let mut objective = 0.0;
    for i in 0..n {
        let mut best = 0usize;
        let mut best_d = cache.dist(i, medoids[0]);
        for (k, &m) in medoids.iter().enumerate().skip(1) {
            let d = cache.dist(i, m);
            if d < best_d {
                best = k;
                best_d = d;
            }
        }
        assignment.push(best);
        objective += best_d;
    }
    (assignment, objective)
}

/// For each cluster, pick the member minimizing total distance to the other
/// members, ties to the lowest row index.
pub fn update_medoids(
    cache: &DistanceCache,
    assignment: &[usize],
    n_clusters: usize,
) -> Result<Vec<usize>, ClusterError> {
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_clusters];
    for (i, &k) in assignment.iter().enumerate() {
        members[k].push(i);
    }
    let mut medoids = Vec::with_capacity(n_clusters);
    for (k, cluster) in members.iter().enumerate() {
        if cluster.is_empty() {
            return Err(ClusterError::EmptyClusterEncountered { cluster: k });
        }
        let mut best = cluster[0];
        let mut best_total = f64::INFINITY;
        for &cand in cluster {
            let total: f64 = cluster.iter().map(|&p| cache.dist(cand, p)).sum();
            if total < best_total {
                best = cand;
                best_total = total;
            }
        }
        medoids.push(best);
    }
    Ok(medoids)
}

/// Drop clusters with no members, renumbering the survivors in order.
/// Returns the number removed.
fn drop_empty(medoids: &mut Vec<usize>, assignment: &mut [usize]) -> usize {
    let c = medoids.len();
    let mut sizes = vec![0usize; c];
    for &k in assignment.iter() {
        sizes[k] += 1;
    }
    if sizes.iter().all(|&s| s > 0) {
        return 0;
    }
    let mut remap = vec![usize::MAX; c];
    let mut kept = 0usize;
    let mut new_medoids = Vec::with_capacity(c);
    for k in 0..c {
        if sizes[k] > 0 {
            remap[k] = kept;
            new_medoids.push(medoids[k]);
            kept += 1;
        }
    }
    for a in assignment.iter_mut() {
        *a = remap[*a];
    }
    let removed = c - kept;
    *medoids = new_medoids;
    removed
}

fn cluster_sizes(assignment: &[usize], n_clusters: usize) -> Vec<usize> {
    let mut sizes = vec![0usize; n_clusters];
    for &k in assignment {
        sizes[k] += 1;
    }
    sizes
}

/// Run the full medoid clustering loop on an (already standardized) dataset.
pub fn cluster(
    dataset: &NumericDataset,
    c: usize,
    config: &ClusterConfig,
) -> Result<ClusteringResult, ClusterError> {
    let n = dataset.n_rows();
    if c < 1 || c > n {
        return Err(ClusterError::InvalidClusterCount { c, n });
    }
    if !dataset.is_finite() {
        return Err(ClusterError::NonFiniteData);
    }
    let cache = DistanceCache::new(dataset, config.cache_cap);
    let mut medoids = select_initial_medoids(&cache, c)?;
    let (mut assignment, mut objective) = assign(&cache, &medoids);
    let mut removed_empty = drop_empty(&mut medoids, &mut assignment);
    let mut trace = vec![objective];
    let mut iterations = 0usize;
    while iterations < config.max_iterations {
        iterations += 1;
        let mut new_medoids = update_medoids(&cache, &assignment, medoids.len())?;
        let (mut new_assignment, new_objective) = assign(&cache, &new_medoids);
        removed_empty += drop_empty(&mut new_medoids, &mut new_assignment);
        trace.push(new_objective);
        let converged = (objective - new_objective).abs() <= config.tolerance;
        medoids = new_medoids;
        assignment = new_assignment;
        objective = new_objective;
        if converged {
            break;
        }
    }
    let sizes = cluster_sizes(&assignment, medoids.len());
    debug_assert!(sizes.iter().all(|&s| s > 0));
    Ok(ClusteringResult {
        cluster_sizes: sizes,
        medoids,
        assignment,
        objective,
        objective_trace: trace,
        iterations,
        removed_empty,
    })
}
