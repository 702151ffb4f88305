//! Cluster-to-verdict labeling.
//!
//! The operational rule is unsupervised: clusters smaller than `alpha * n`
//! are anomalous, on the premise that intrusions are a minority and land in
//! small clusters. A majority-label mode exists only for supervised
//! evaluation; it reads ground truth and is never part of the detection
//! path.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clustering::ClusteringResult;
use crate::dataset::ClassLabel;

#[derive(Debug, Error)]
pub enum LabelingError {
    #[error("alpha must lie in (0,1), got {0}")]
    InvalidAlpha(f64),
    #[error("majority labeling needs {expected} labels, got {got}")]
    MissingLabels { expected: usize, got: usize },
    #[error("verdicts cover {verdicts} clusters but the result has {clusters}")]
    ClusterMismatch { verdicts: usize, clusters: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Normal,
    Anomalous,
}

impl Verdict {
    pub fn is_anomalous(&self) -> bool {
        *self == Verdict::Anomalous
    }
}

/// Which rule produced a cluster's verdict, with the numbers it used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "rule")]
pub enum VerdictRationale {
    SmallCluster {
        size: usize,
        threshold: f64,
        alpha: f64,
    },
    MajorityLabel {
        attack_members: usize,
        size: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterVerdict {
    pub verdict: Verdict,
    pub size: usize,
    pub rationale: VerdictRationale,
}

/// One verdict per surviving cluster, in cluster order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterVerdicts {
    pub clusters: Vec<ClusterVerdict>,
}

/// Per-row predictions, parallel to the clustering's row order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceVerdicts {
    pub verdicts: Vec<Verdict>,
}

impl InstanceVerdicts {
    pub fn anomalous_count(&self) -> usize {
        self.verdicts.iter().filter(|v| v.is_anomalous()).count()
    }
}

/// Small-cluster rule: anomalous iff `size < alpha * n`. Reads nothing but
/// cluster sizes.
pub fn label_clusters_unsupervised(
    result: &ClusteringResult,
    alpha: f64,
) -> Result<ClusterVerdicts, LabelingError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(LabelingError::InvalidAlpha(alpha));
    }
    let n: usize = result.cluster_sizes.iter().sum();
    let threshold = alpha * n as f64;
    let clusters = result
        .cluster_sizes
        .iter()
        .map(|&size| ClusterVerdict {
            verdict: if (size as f64) < threshold {
                Verdict::Anomalous
            } else {
                Verdict::Normal
            },
            size,
            rationale: VerdictRationale::SmallCluster {
                size,
                threshold,
                alpha,
            },
        })
        .collect();
    Ok(ClusterVerdicts { clusters })
}

/// Supervised convenience: a cluster is anomalous iff at least half its
/// members carry an attack category (exact half counts as anomalous).
pub fn label_clusters_majority(
    result: &ClusteringResult,
    labels: &[ClassLabel],
) -> Result<ClusterVerdicts, LabelingError> {
    if labels.len() != result.assignment.len() {
        return Err(LabelingError::MissingLabels {
            expected: result.assignment.len(),
            got: labels.len(),
        });
    }
    let c = result.n_clusters();
    let mut attack_members = vec![0usize; c];
    for (&k, label) in result.assignment.iter().zip(labels) {
        if label.category.is_attack() {
            attack_members[k] += 1;
        }
    }
    let clusters = result
        .cluster_sizes
        .iter()
        .zip(&attack_members)
        .map(|(&size, &attacks)| ClusterVerdict {
            verdict: if 2 * attacks >= size {
                Verdict::Anomalous
            } else {
                Verdict::Normal
            },
            size,
            rationale: VerdictRationale::MajorityLabel {
                attack_members: attacks,
                size,
            },
        })
        .collect();
    Ok(ClusterVerdicts { clusters })
}

/// Propagate each cluster's verdict to its member rows.
pub fn classify_instances(
    verdicts: &ClusterVerdicts,
    result: &ClusteringResult,
) -> Result<InstanceVerdicts, LabelingError> {
    if verdicts.clusters.len() != result.n_clusters() {
        return Err(LabelingError::ClusterMismatch {
            verdicts: verdicts.clusters.len(),
            clusters: result.n_clusters(),
        });
    }
    Ok(InstanceVerdicts {
        verdicts: result
            .assignment
            .iter()
            .map(|&k| verdicts.clusters[k].verdict)
            .collect(),
    })
}
