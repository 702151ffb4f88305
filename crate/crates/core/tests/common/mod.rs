//! Shared helpers for the integration suites: random dataset generation,
//! the exhaustive k-medoids oracle, and the synthetic blob fixture.
#![allow(dead_code)] // each test target uses a different subset

use kmids::clustering::{assign, DistanceCache};
use kmids::dataset::{Category, ClassLabel, NumericDataset};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random dataset with entries uniform in [-range, range].
pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, d: usize, range: f64) -> NumericDataset {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.gen_range(-range..range)).collect())
        .collect();
    NumericDataset::from_rows(&rows)
}

/// Exhaustive k-medoids optimum: the best objective over every c-subset of
/// rows taken as medoids. Independent of the iterative implementation; only
/// reuses `assign`, which is itself checked against hand enumeration.
pub fn exhaustive_best_objective(cache: &DistanceCache, c: usize) -> f64 {
    let n = cache.len();
    let mut best = f64::INFINITY;
    let mut subset: Vec<usize> = (0..c).collect();
    loop {
        let mut objective = 0.0;
        for i in 0..n {
            let d = subset
                .iter()
                .map(|&m| cache.dist(i, m))
                .fold(f64::INFINITY, f64::min);
            objective += d;
        }
        if objective < best {
            best = objective;
        }
        // next combination in lexicographic order
        let mut k = c;
        loop {
            if k == 0 {
                return best;
            }
            k -= 1;
            if subset[k] != k + n - c {
                break;
            }
            if k == 0 {
                return best;
            }
        }
        subset[k] += 1;
        for j in (k + 1)..c {
            subset[j] = subset[j - 1] + 1;
        }
    }
}

/// Objective of the initial (pre-swap) assignment for the score-based
/// initialization.
pub fn initial_assignment_objective(cache: &DistanceCache, c: usize) -> f64 {
    let medoids = kmids::clustering::select_initial_medoids(cache, c).unwrap();
    assign(cache, &medoids).1
}

/// The synthetic detection fixture: two Gaussian blobs of `per_blob` normal
/// points each (stdev 0.5 per axis, centers 10 apart along the diagonal of
/// 5-D space) plus `outliers` points uniform in a central box. Outlier rows
/// are labeled as attacks for ground-truth scoring.
pub fn blob_fixture(seed: u64, per_blob: usize, outliers: usize) -> NumericDataset {
    let mut rng = rng(seed);
    let d = 5;
    // centers at +/- (10 / (2 sqrt(5))) per axis: exactly 10 apart, and every
    // feature shares one distribution so standardization rescales isotropically
    let offset = 10.0 / (2.0 * (d as f64).sqrt());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<ClassLabel> = Vec::new();
    for blob_sign in [-1.0, 1.0] {
        for _ in 0..per_blob {
            rows.push((0..d).map(|_| blob_sign * offset + gauss(&mut rng) * 0.5).collect());
            labels.push(ClassLabel {
                category: Category::Normal,
                raw_name: "normal".into(),
            });
        }
    }
    for _ in 0..outliers {
        rows.push((0..d).map(|_| rng.gen_range(-0.5..0.5)).collect());
        labels.push(ClassLabel {
            category: Category::Dos,
            raw_name: "synthetic_outlier".into(),
        });
    }
    let mut dataset = NumericDataset::from_rows(&rows);
    dataset.labels = Some(labels);
    dataset
}

/// True when the score-based run on `data` hits a tie (or an fp-level
/// near-tie) in a swap-total or at the initialization cutoff. Index
/// tie-breaking makes such instances legitimately order-sensitive, so
/// permutation-style properties must skip them: e.g. both members of a
/// two-point cluster always have the same swap total, and either may win
/// depending on row numbering. Mirrors the main loop of `cluster` (no
/// empty-cluster handling: on distinct points every medoid sits in its own
/// cluster, so none occur).
pub fn has_order_sensitive_ties(data: &NumericDataset, c: usize) -> bool {
    let n = data.n_rows();
    let cache = DistanceCache::new(data, usize::MAX);
    let near = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0);

    let row_sums: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|k| cache.dist(i, k)).sum())
        .collect();
    let scores: Vec<f64> = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| if row_sums[i] == 0.0 { 0.0 } else { cache.dist(i, j) / row_sums[i] })
                .sum()
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());
    if c < n && near(scores[order[c - 1]], scores[order[c]]) {
        return true;
    }

    let mut medoids: Vec<usize> = order[..c].to_vec();
    let (mut assignment, mut objective) = assign(&cache, &medoids);
    for _ in 0..100 {
        for k in 0..medoids.len() {
            let members: Vec<usize> = (0..n).filter(|&i| assignment[i] == k).collect();
            let mut totals: Vec<f64> = members
                .iter()
                .map(|&m| members.iter().map(|&j| cache.dist(m, j)).sum())
                .collect();
            let best_pos = totals
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map(|(i, _)| i)
                .unwrap();
            medoids[k] = members[best_pos];
            totals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if totals.len() > 1 && near(totals[0], totals[1]) {
                return true;
            }
        }
        let (new_assignment, new_objective) = assign(&cache, &medoids);
        assignment = new_assignment;
        if new_objective == objective {
            return false;
        }
        objective = new_objective;
    }
    false
}

/// Box-Muller standard normal.
pub fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}
