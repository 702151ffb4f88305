//! Confusion-matrix construction and detection metrics.
//!
//! The positive class is "intrusion". Detection rate is TP/(TP+FN),
//! accuracy (TP+TN)/total, false alarm rate FP/(FP+TN). Zero-denominator
//! rates are `None` ("undefined") rather than 0, so a report never
//! fabricates a number for a class that was not present.
//!
//! The published comparison numbers for K-means, FCM, Y-means and the
//! medoid method ship in [`reference`] as static rows; they are rendered
//! beside measured results and never recomputed.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Category, ClassLabel};
use crate::labeling::InstanceVerdicts;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("predictions cover {predictions} rows, truth covers {truth}")]
    RowMismatch { predictions: usize, truth: usize },
    #[error("cannot compute accuracy of an empty evaluation")]
    EmptyEvaluation,
}

/// A rate in [0,1], or `None` when its denominator was zero.
pub type Rate = Option<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    /// Attack predicted anomalous.
    pub tp: u64,
    /// Normal predicted normal.
    pub tn: u64,
    /// Normal predicted anomalous.
    pub fp: u64,
    /// Attack predicted normal.
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }
}

/// Tally predictions against ground truth.
pub fn confusion(
    predictions: &InstanceVerdicts,
    truth: &[ClassLabel],
) -> Result<ConfusionMatrix, EvalError> {
    if predictions.verdicts.len() != truth.len() {
        return Err(EvalError::RowMismatch {
            predictions: predictions.verdicts.len(),
            truth: truth.len(),
        });
    }
    let mut cm = ConfusionMatrix::default();
    for (verdict, label) in predictions.verdicts.iter().zip(truth) {
        match (verdict.is_anomalous(), label.category.is_attack()) {
            (true, true) => cm.tp += 1,
            (false, false) => cm.tn += 1,
            (true, false) => cm.fp += 1,
            (false, true) => cm.fn_ += 1,
        }
    }
    Ok(cm)
}

/// TP / (TP + FN); undefined when no intrusions are present.
pub fn detection_rate(cm: &ConfusionMatrix) -> Rate {
    let positives = cm.tp + cm.fn_;
    (positives > 0).then(|| cm.tp as f64 / positives as f64)
}

/// (TP + TN) / total.
pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64, EvalError> {
    let total = cm.total();
    if total == 0 {
        return Err(EvalError::EmptyEvaluation);
    }
    Ok((cm.tp + cm.tn) as f64 / total as f64)
}

/// FP / (FP + TN); undefined when no normal instances are present.
pub fn false_alarm_rate(cm: &ConfusionMatrix) -> Rate {
    let negatives = cm.fp + cm.tn;
    (negatives > 0).then(|| cm.fp as f64 / negatives as f64)
}

/// Detection rate split by attack category; a category absent from the
/// truth is undefined.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PerCategoryRates {
    pub dos: Rate,
    pub probe: Rate,
    pub r2l: Rate,
    pub u2r: Rate,
}

impl PerCategoryRates {
    pub fn get(&self, category: Category) -> Rate {
        match category {
            Category::Dos => self.dos,
            Category::Probe => self.probe,
            Category::R2l => self.r2l,
            Category::U2r => self.u2r,
            Category::Normal => None,
        }
    }
}

pub fn per_category_rates(
    predictions: &InstanceVerdicts,
    truth: &[ClassLabel],
) -> Result<PerCategoryRates, EvalError> {
    if predictions.verdicts.len() != truth.len() {
        return Err(EvalError::RowMismatch {
            predictions: predictions.verdicts.len(),
            truth: truth.len(),
        });
    }
    let mut rates = PerCategoryRates::default();
    for category in Category::ATTACKS {
        let mut present = 0u64;
        let mut caught = 0u64;
        for (verdict, label) in predictions.verdicts.iter().zip(truth) {
            if label.category == category {
                present += 1;
                if verdict.is_anomalous() {
                    caught += 1;
                }
            }
        }
        let rate = (present > 0).then(|| caught as f64 / present as f64);
        match category {
            Category::Dos => rates.dos = rate,
            Category::Probe => rates.probe = rate,
            Category::R2l => rates.r2l = rate,
            Category::U2r => rates.u2r = rate,
            Category::Normal => unreachable!(),
        }
    }
    Ok(rates)
}

/// All metrics for one method, plus the static reference rows for context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub method: String,
    pub confusion: ConfusionMatrix,
    pub detection_rate: Rate,
    pub accuracy: f64,
    pub false_alarm_rate: Rate,
    pub per_category: PerCategoryRates,
    pub reference: reference::ReferenceTables,
}

impl MetricsReport {
    pub fn compute(
        method: &str,
        predictions: &InstanceVerdicts,
        truth: &[ClassLabel],
    ) -> Result<MetricsReport, EvalError> {
        let cm = confusion(predictions, truth)?;
        Ok(MetricsReport {
            method: method.to_string(),
            confusion: cm,
            detection_rate: detection_rate(&cm),
            accuracy: accuracy(&cm)?,
            false_alarm_rate: false_alarm_rate(&cm),
            per_category: per_category_rates(predictions, truth)?,
            reference: reference::ReferenceTables::published(),
        })
    }
}

pub mod reference {
    //! The published comparison tables, embedded as static data. Values are
    //! percentages, reproduced verbatim; measured results are reported next
    //! to them, never in place of them.

    use std::borrow::Cow;

    use serde::{Deserialize, Serialize};

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct OverallRow {
        pub method: Cow<'static, str>,
        pub detection_rate_pct: f64,
        pub accuracy_pct: f64,
        pub false_alarm_rate_pct: f64,
    }

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct CategoryRow {
        pub method: Cow<'static, str>,
        pub dos_pct: f64,
        pub r2l_pct: f64,
        pub u2r_pct: f64,
        pub probe_pct: f64,
    }

    /// Overall detection rate / accuracy / false alarm rate per method.
    pub const OVERALL: [OverallRow; 4] = [
        OverallRow {
            method: Cow::Borrowed("k-means"),
            detection_rate_pct: 82.3,
            accuracy_pct: 77.25,
            false_alarm_rate_pct: 5.2,
        },
        OverallRow {
            method: Cow::Borrowed("fcm"),
            detection_rate_pct: 84.6,
            accuracy_pct: 82.13,
            false_alarm_rate_pct: 4.2,
        },
        OverallRow {
            method: Cow::Borrowed("y-means"),
            detection_rate_pct: 86.3,
            accuracy_pct: 87.15,
            false_alarm_rate_pct: 3.9,
        },
        OverallRow {
            method: Cow::Borrowed("new-medoid"),
            detection_rate_pct: 91.2,
            accuracy_pct: 96.38,
            false_alarm_rate_pct: 3.2,
        },
    ];

    /// Per-attack-category detection rates per method.
    pub const PER_CATEGORY: [CategoryRow; 4] = [
        CategoryRow {
            method: Cow::Borrowed("k-means"),
            dos_pct: 79.83,
            r2l_pct: 78.12,
            u2r_pct: 52.10,
            probe_pct: 62.45,
        },
        CategoryRow {
            method: Cow::Borrowed("fcm"),
            dos_pct: 83.12,
            r2l_pct: 82.45,
            u2r_pct: 60.10,
            probe_pct: 65.25,
        },
        CategoryRow {
            method: Cow::Borrowed("y-means"),
            dos_pct: 89.15,
            r2l_pct: 85.10,
            u2r_pct: 65.12,
            probe_pct: 68.12,
        },
        CategoryRow {
            method: Cow::Borrowed("new-medoid"),
            dos_pct: 96.12,
            r2l_pct: 90.10,
            u2r_pct: 70.51,
            probe_pct: 70.13,
        },
    ];

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct ReferenceTables {
        pub overall: Vec<OverallRow>,
        pub per_category: Vec<CategoryRow>,
    }

    impl ReferenceTables {
        pub fn published() -> ReferenceTables {
            ReferenceTables {
                overall: OVERALL.to_vec(),
                per_category: PER_CATEGORY.to_vec(),
            }
        }
    }
}
