//! Medoid-based clustering toolkit for anomaly network intrusion detection.
//!
//! The pipeline runs in five stages: KDD-Cup-99 ingestion and one-hot
//! encoding ([`dataset`]), mean/mean-absolute-deviation standardization
//! ([`preprocess`]), medoid clustering with a K-means baseline
//! ([`clustering`]), small-cluster anomaly labeling ([`labeling`]), and
//! detection-rate / false-alarm evaluation ([`eval`]). [`pipeline`] wires the
//! stages together behind a JSON experiment config; the `kmids` binary
//! exposes them as subcommands.
//!
//! Everything is deterministic: sampling takes an explicit seed and all
//! tie-breaking is lowest-index, so identical inputs produce byte-identical
//! outputs.

pub mod clustering;
pub mod dataset;
pub mod eval;
pub mod labeling;
pub mod pipeline;
pub mod preprocess;
