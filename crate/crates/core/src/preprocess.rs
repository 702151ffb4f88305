//! Per-feature standardization: location is the arithmetic mean, scale is
//! the mean absolute deviation about that mean. Fit on one dataset, apply
//! to any dataset of the same width.
//!
//! Constant features (scale 0) standardize to 0 everywhere instead of
//! erroring; they carry no distance information.
//!
//! Summation order is fixed: naive accumulation in ascending row index.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::NumericDataset;

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("cannot fit standardizer on an empty dataset")]
    EmptyDataset,
    #[error("dataset has {got} features, params were fit on {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Fitted location/scale per feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationParams {
    pub feature_names: Vec<String>,
    pub mean: Vec<f64>,
    /// Mean absolute deviation about the mean; 0 for constant features.
    pub scale: Vec<f64>,
    pub fit_rows: usize,
}

impl StandardizationParams {
    pub fn n_features(&self) -> usize {
        self.mean.len()
    }

    pub fn save(&self, path: &Path) -> Result<(), PreprocessError> {
        let json = serde_json::to_string_pretty(self)?;
        crate::pipeline::write_atomic(path, json.as_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<StandardizationParams, PreprocessError> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// Compute per-feature mean and mean absolute deviation.
pub fn fit_standardizer(dataset: &NumericDataset) -> Result<StandardizationParams, PreprocessError> {
    let n = dataset.n_rows();
    let d = dataset.n_cols();
    if n == 0 {
        return Err(PreprocessError::EmptyDataset);
    }
    let mut mean = vec![0.0f64; d];
    for row in dataset.rows_iter() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut scale = vec![0.0f64; d];
    for row in dataset.rows_iter() {
        for ((s, m), v) in scale.iter_mut().zip(&mean).zip(row) {
            *s += (v - m).abs();
        }
    }
    for s in &mut scale {
        *s /= n as f64;
    }
    // pin exactly-constant features: summing then dividing can round the mean
    // off the common value, leaving a spurious epsilon-sized scale
    for f in 0..d {
        let first = dataset.row(0)[f];
        if dataset.rows_iter().all(|row| row[f] == first) {
            mean[f] = first;
            scale[f] = 0.0;
        }
    }
    Ok(StandardizationParams {
        feature_names: dataset.column_names.clone(),
        mean,
        scale,
        fit_rows: n,
    })
}

/// Apply fitted params: `(value - mean) / scale`, with constant features
/// mapped to 0.
pub fn apply_standardizer(
    params: &StandardizationParams,
    dataset: &NumericDataset,
) -> Result<NumericDataset, PreprocessError> {
    if dataset.n_cols() != params.n_features() {
        return Err(PreprocessError::DimensionMismatch {
            expected: params.n_features(),
            got: dataset.n_cols(),
        });
    }
    let d = dataset.n_cols();
    let mut out = dataset.clone();
    for (i, v) in out.values_mut().iter_mut().enumerate() {
        let f = i % d;
        *v = if params.scale[f] > 0.0 {
            (*v - params.mean[f]) / params.scale[f]
        } else {
            0.0
        };
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(values: &[f64]) -> NumericDataset {
        NumericDataset::from_rows(&values.iter().map(|&v| vec![v]).collect::<Vec<_>>())
    }

    #[test]
    fn fit_matches_hand_computation() {
        let params = fit_standardizer(&col(&[2.0, 4.0, 6.0])).unwrap();
        assert_eq!(params.mean, vec![4.0]);
        assert_eq!(params.scale, vec![4.0 / 3.0]);
    }

    #[test]
    fn constant_feature_has_zero_scale() {
        let params = fit_standardizer(&col(&[5.0, 5.0, 5.0])).unwrap();
        assert_eq!(params.mean, vec![5.0]);
        assert_eq!(params.scale, vec![0.0]);
    }

    #[test]
    fn single_row_fit() {
        let params = fit_standardizer(&col(&[3.5])).unwrap();
        assert_eq!(params.mean, vec![3.5]);
        assert_eq!(params.scale, vec![0.0]);
    }

    #[test]
    fn empty_dataset_is_rejected() {
        let ds = NumericDataset::from_rows(&[]);
        assert!(matches!(fit_standardizer(&ds), Err(PreprocessError::EmptyDataset)));
    }

    #[test]
    fn apply_matches_hand_computation() {
        let ds = col(&[2.0, 4.0, 6.0]);
        let params = fit_standardizer(&ds).unwrap();
        let out = apply_standardizer(&params, &ds).unwrap();
        let got: Vec<f64> = out.values().to_vec();
        assert_eq!(got, vec![-1.5, 0.0, 1.5]);
    }

    #[test]
    fn constant_feature_maps_to_zero() {
        let ds = col(&[5.0, 5.0, 5.0]);
        let params = fit_standardizer(&ds).unwrap();
        let out = apply_standardizer(&params, &ds).unwrap();
        assert!(out.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn value_at_mean_maps_to_zero() {
        let ds = col(&[1.0, 4.0, 7.0]);
        let params = fit_standardizer(&ds).unwrap();
        let out = apply_standardizer(&params, &ds).unwrap();
        assert_eq!(out.row(1)[0], 0.0);
    }

    #[test]
    fn width_mismatch_is_rejected() {
        let params = fit_standardizer(&col(&[1.0, 2.0])).unwrap();
        let two_wide = NumericDataset::from_rows(&[vec![1.0, 2.0]]);
        assert!(matches!(
            apply_standardizer(&params, &two_wide),
            Err(PreprocessError::DimensionMismatch { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn params_json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let params = fit_standardizer(&col(&[2.0, 4.0, 6.0])).unwrap();
        let path = dir.path().join("params.json");
        params.save(&path).unwrap();
        assert_eq!(StandardizationParams::load(&path).unwrap(), params);
    }
}
