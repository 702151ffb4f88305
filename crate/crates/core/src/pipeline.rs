//! Experiment runner: ingest -> encode -> standardize -> cluster -> label ->
//! evaluate, driven by a JSON config, with a run manifest for bit-identical
//! re-runs.
//!
//! Stage outputs are plain files in the output directory, written
//! atomically (temp file then rename):
//!
//! * `encoded.csv` / `encoded.json` — encoded dataset plus sidecar
//! * `standardization.json` — fitted location/scale parameters
//! * `clustering.json` — medoids, assignment, objective trace
//! * `verdicts.csv` — row_id, cluster, verdict
//! * `metrics.json` / `metrics_plot.csv` — measured metrics beside the
//!   published reference rows
//! * `manifest.json` — config echo, input hashes, version, wall time
//!
//! Everything except the manifest (which records wall time) is
//! byte-identical across runs of the same config and inputs.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::clustering::{self, ClusterConfig, ClusteringResult};
use crate::dataset::{
    self, encode_features, read_kdd_file, sample_dataset, DatasetProvenance, FeatureSchema,
    NumericDataset, SampleStrategy, Taxonomy,
};
use crate::eval::{self, MetricsReport};
use crate::labeling::{self, ClusterVerdicts, InstanceVerdicts};
use crate::preprocess::{apply_standardizer, fit_standardizer, StandardizationParams};

/// Process exit codes: 0 success, 2 config error, 3 data error, 4 internal
/// invariant violation.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::Data(_) => 3,
            PipelineError::Internal(_) => 4,
        }
    }
}

impl From<dataset::DatasetError> for PipelineError {
    fn from(e: dataset::DatasetError) -> PipelineError {
        PipelineError::Data(e.to_string())
    }
}

impl From<crate::preprocess::PreprocessError> for PipelineError {
    fn from(e: crate::preprocess::PreprocessError) -> PipelineError {
        PipelineError::Data(e.to_string())
    }
}

impl From<clustering::ClusterError> for PipelineError {
    fn from(e: clustering::ClusterError) -> PipelineError {
        PipelineError::Data(e.to_string())
    }
}

impl From<labeling::LabelingError> for PipelineError {
    fn from(e: labeling::LabelingError) -> PipelineError {
        PipelineError::Internal(e.to_string())
    }
}

impl From<eval::EvalError> for PipelineError {
    fn from(e: eval::EvalError) -> PipelineError {
        PipelineError::Internal(e.to_string())
    }
}

impl From<std::io::Error> for PipelineError {
    fn from(e: std::io::Error) -> PipelineError {
        PipelineError::Data(e.to_string())
    }
}

impl From<serde_json::Error> for PipelineError {
    fn from(e: serde_json::Error) -> PipelineError {
        PipelineError::Data(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    NewMedoid,
    Kmeans,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::NewMedoid, Method::Kmeans];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::NewMedoid => "new-medoid",
            Method::Kmeans => "k-means",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Method, String> {
        match s {
            "new-medoid" | "medoid" => Ok(Method::NewMedoid),
            "kmeans" | "k-means" => Ok(Method::Kmeans),
            other => Err(format!("unknown method {other:?} (expected new-medoid or kmeans)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub strategy: SampleStrategy,
    pub count: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum LabelingMode {
    Unsupervised { alpha: f64 },
    Majority,
}

impl Default for LabelingMode {
    fn default() -> LabelingMode {
        LabelingMode::Unsupervised { alpha: 0.05 }
    }
}

/// The experiment config, one JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// KDD99-format CSV, plain or gzipped.
    pub dataset: PathBuf,
    /// Attack taxonomy file; bundled KDD99 mapping when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub taxonomy: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample: Option<SampleSpec>,
    pub cluster_count: usize,
    #[serde(default)]
    pub labeling: LabelingMode,
    #[serde(default)]
    pub clustering: ClusterConfig,
    pub out_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<ExperimentConfig, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("cannot read {}: {e}", path.display())))?;
        // a manifest embeds the config under "config"; accept either form
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        let config_value = match value.get("config") {
            Some(inner) if value.get("input_sha256").is_some() => inner.clone(),
            _ => value,
        };
        serde_json::from_value(config_value)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.cluster_count < 1 {
            return Err(PipelineError::Config(
                "cluster count must be at least 1".into(),
            ));
        }
        if let LabelingMode::Unsupervised { alpha } = self.labeling {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(PipelineError::Config(format!(
                    "labeling alpha must lie in (0,1), got {alpha}"
                )));
            }
        }
        if let Some(sample) = &self.sample {
            if sample.count == 0 {
                return Err(PipelineError::Config("sample count must be positive".into()));
            }
        }
        if self.clustering.max_iterations == 0 {
            return Err(PipelineError::Config("max_iterations must be positive".into()));
        }
        if !self.dataset.exists() {
            return Err(PipelineError::Data(format!(
                "dataset file not found: {}",
                self.dataset.display()
            )));
        }
        if let Some(tax) = &self.taxonomy {
            if !tax.exists() {
                return Err(PipelineError::Data(format!(
                    "taxonomy file not found: {}",
                    tax.display()
                )));
            }
        }
        Ok(())
    }

    fn load_taxonomy(&self) -> Result<Taxonomy, PipelineError> {
        Ok(match &self.taxonomy {
            Some(path) => Taxonomy::load(path)?,
            None => Taxonomy::default_kdd99(),
        })
    }
}

/// Clustering stage output, serialized as `clustering.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringReport {
    pub method: Method,
    pub cluster_count_requested: usize,
    pub clustering_config: ClusterConfig,
    /// SHA-256 of the input dataset file.
    pub dataset_sha256: String,
    pub row_ids: Vec<String>,
    pub medoid_row_ids: Vec<String>,
    pub result: ClusteringResult,
}

/// Everything `run` produces, with the file paths it wrote.
#[derive(Debug)]
pub struct RunOutputs {
    pub clustering_path: PathBuf,
    pub verdicts_path: PathBuf,
    pub metrics_path: PathBuf,
    pub plot_path: PathBuf,
    pub manifest_path: PathBuf,
    pub metrics: MetricsReport,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config: ExperimentConfig,
    pub input_sha256: String,
    pub taxonomy_sha256: String,
    pub wall_time_ms: u128,
}

/// Ingest stage: parse, encode, optionally sample. Returns the encoded
/// dataset and the input file's hash.
pub fn ingest(config: &ExperimentConfig) -> Result<(NumericDataset, String), PipelineError> {
    let taxonomy = config.load_taxonomy()?;
    let mut schema = FeatureSchema::kdd99();
    let records = read_kdd_file(&config.dataset, &schema)?;
    if records.is_empty() {
        return Err(PipelineError::Data(format!(
            "dataset {} contains no records",
            config.dataset.display()
        )));
    }
    schema.fit_vocabularies(&records);
    let encoded = encode_features(&records, &schema, Some(&taxonomy))?;
    let dataset = match &config.sample {
        Some(spec) => sample_dataset(&encoded, spec.strategy, spec.count, spec.seed)?,
        None => encoded,
    };
    let fingerprint = sha256_file(&config.dataset)?;
    Ok((dataset, fingerprint))
}

/// Ingest and write `encoded.csv`/`encoded.json` to the output directory.
pub fn ingest_to_files(config: &ExperimentConfig) -> Result<PathBuf, PipelineError> {
    config.validate()?;
    let (dataset, _) = ingest(config)?;
    std::fs::create_dir_all(&config.out_dir)?;
    let stem = config.out_dir.join("encoded");
    dataset::write_dataset(
        &dataset,
        &stem,
        DatasetProvenance {
            source: Some(config.dataset.display().to_string()),
            sample_seed: config.sample.as_ref().map(|s| s.seed),
            sample_strategy: config.sample.as_ref().map(|s| s.strategy),
        },
    )?;
    Ok(stem)
}

/// Load the ingest stage's files if present, otherwise ingest from the raw
/// dataset. Lets `cluster` and `evaluate` resume from serialized stages.
pub fn load_or_ingest(config: &ExperimentConfig) -> Result<(NumericDataset, String), PipelineError> {
    let stem = config.out_dir.join("encoded");
    if stem.with_extension("csv").exists() && stem.with_extension("json").exists() {
        let dataset = dataset::read_dataset(&stem)?;
        let fingerprint = sha256_file(&stem.with_extension("csv"))?;
        Ok((dataset, fingerprint))
    } else {
        ingest(config)
    }
}

/// Standardize with params fit on the same dataset.
pub fn standardize(
    dataset: &NumericDataset,
) -> Result<(NumericDataset, StandardizationParams), PipelineError> {
    let params = fit_standardizer(dataset)?;
    let standardized = apply_standardizer(&params, dataset)?;
    Ok((standardized, params))
}

/// Run one clustering method on an already standardized dataset, reducing
/// both methods to the same partition shape for labeling and evaluation.
pub fn run_method(
    method: Method,
    standardized: &NumericDataset,
    config: &ExperimentConfig,
) -> Result<ClusteringResult, PipelineError> {
    let c = config.cluster_count.min(standardized.n_rows());
    if config.cluster_count > standardized.n_rows() {
        return Err(PipelineError::Config(format!(
            "cluster count {} exceeds dataset size {}",
            config.cluster_count,
            standardized.n_rows()
        )));
    }
    match method {
        Method::NewMedoid => Ok(clustering::cluster(standardized, c, &config.clustering)?),
        Method::Kmeans => {
            let km = clustering::kmeans_cluster(standardized, c, &config.clustering)?;
            Ok(partition_from_kmeans(standardized, &km))
        }
    }
}

/// Represent a K-means partition in medoid form: each cluster's
/// representative is its member closest to the centroid (ties to the
/// lowest row index), so labeling and reporting share one shape.
fn partition_from_kmeans(
    dataset: &NumericDataset,
    km: &clustering::KMeansResult,
) -> ClusteringResult {
    let c = km.centroids.len();
    let mut medoids = vec![usize::MAX; c];
    let mut best = vec![f64::INFINITY; c];
    for (i, &k) in km.assignment.iter().enumerate() {
        let d = clustering::euclidean(dataset.row(i), &km.centroids[k]).expect("widths match");
        if d < best[k] {
            best[k] = d;
            medoids[k] = i;
        }
    }
    // drop clusters that ended empty (possible only if reseeding ran out)
    let keep: Vec<usize> = (0..c).filter(|&k| medoids[k] != usize::MAX).collect();
    let mut remap = vec![usize::MAX; c];
    for (new_k, &old_k) in keep.iter().enumerate() {
        remap[old_k] = new_k;
    }
    let assignment: Vec<usize> = km.assignment.iter().map(|&k| remap[k]).collect();
    let medoids: Vec<usize> = keep.iter().map(|&k| medoids[k]).collect();
    let mut sizes = vec![0usize; medoids.len()];
    for &k in &assignment {
        sizes[k] += 1;
    }
    let objective: f64 = assignment
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            clustering::euclidean(dataset.row(i), dataset.row(medoids[k])).expect("widths match")
        })
        .sum();
    ClusteringResult {
        medoids,
        assignment,
        objective,
        objective_trace: vec![objective],
        cluster_sizes: sizes,
        iterations: km.iterations,
        removed_empty: c - keep.len(),
    }
}

/// Apply the configured labeling mode.
pub fn label_partition(
    result: &ClusteringResult,
    dataset: &NumericDataset,
    mode: &LabelingMode,
) -> Result<(ClusterVerdicts, InstanceVerdicts), PipelineError> {
    let cluster_verdicts = match mode {
        LabelingMode::Unsupervised { alpha } => {
            labeling::label_clusters_unsupervised(result, *alpha)?
        }
        LabelingMode::Majority => {
            let labels = dataset.labels.as_ref().ok_or_else(|| {
                PipelineError::Data("majority labeling requires ground-truth labels".into())
            })?;
            labeling::label_clusters_majority(result, labels)?
        }
    };
    let instance_verdicts = labeling::classify_instances(&cluster_verdicts, result)?;
    Ok((cluster_verdicts, instance_verdicts))
}

/// The full pipeline: ingest, standardize, cluster, label, evaluate, and
/// write all report files.
pub fn run_pipeline(config: &ExperimentConfig) -> Result<RunOutputs, PipelineError> {
    let started = Instant::now();
    config.validate()?;
    let stem = config.out_dir.join("encoded");
    if !stem.with_extension("csv").exists() || !stem.with_extension("json").exists() {
        ingest_to_files(config)?;
    }
    let (dataset, fingerprint) = load_or_ingest(config)?;
    let (standardized, params) = standardize(&dataset)?;
    let result = run_method(Method::NewMedoid, &standardized, config)?;
    let (cluster_verdicts, instance_verdicts) =
        label_partition(&result, &dataset, &config.labeling)?;
    let labels = dataset
        .labels
        .as_ref()
        .ok_or_else(|| PipelineError::Data("evaluation requires ground-truth labels".into()))?;
    let metrics = MetricsReport::compute(Method::NewMedoid.as_str(), &instance_verdicts, labels)?;

    std::fs::create_dir_all(&config.out_dir)?;
    params.save(&config.out_dir.join("standardization.json"))?;

    let report = ClusteringReport {
        method: Method::NewMedoid,
        cluster_count_requested: config.cluster_count,
        clustering_config: config.clustering.clone(),
        dataset_sha256: fingerprint.clone(),
        medoid_row_ids: result
            .medoids
            .iter()
            .map(|&i| dataset.row_ids[i].clone())
            .collect(),
        row_ids: dataset.row_ids.clone(),
        result,
    };
    let clustering_path = config.out_dir.join("clustering.json");
    write_json(&clustering_path, &report)?;

    let verdicts_path = config.out_dir.join("verdicts.csv");
    write_verdicts_csv(&verdicts_path, &report, &instance_verdicts)?;

    let metrics_path = config.out_dir.join("metrics.json");
    write_json(
        &metrics_path,
        &serde_json::json!({
            "metrics": metrics,
            "cluster_verdicts": cluster_verdicts,
            "labeling": config.labeling,
        }),
    )?;

    let plot_path = config.out_dir.join("metrics_plot.csv");
    write_atomic(&plot_path, plot_csv(std::slice::from_ref(&metrics)).as_bytes())?;

    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        input_sha256: fingerprint,
        taxonomy_sha256: match &config.taxonomy {
            Some(path) => sha256_file(path)?,
            None => sha256_hex(dataset::DEFAULT_TAXONOMY.as_bytes()),
        },
        wall_time_ms: started.elapsed().as_millis(),
    };
    let manifest_path = config.out_dir.join("manifest.json");
    write_json(&manifest_path, &manifest)?;

    Ok(RunOutputs {
        clustering_path,
        verdicts_path,
        metrics_path,
        plot_path,
        manifest_path,
        metrics,
    })
}

/// Side-by-side comparison of the selected methods on one standardized
/// dataset, next to the published reference rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub measured: Vec<MetricsReport>,
    pub reference: eval::reference::ReferenceTables,
}

pub fn compare_methods(
    config: &ExperimentConfig,
    methods: &[Method],
) -> Result<ComparisonReport, PipelineError> {
    if methods.is_empty() {
        return Err(PipelineError::Config("select at least one method".into()));
    }
    config.validate()?;
    let (dataset, _) = load_or_ingest(config)?;
    let (standardized, _) = standardize(&dataset)?;
    let labels = dataset
        .labels
        .as_ref()
        .ok_or_else(|| PipelineError::Data("evaluation requires ground-truth labels".into()))?;
    let mut measured = Vec::with_capacity(methods.len());
    for &method in methods {
        let result = run_method(method, &standardized, config)?;
        let (_, instance_verdicts) = label_partition(&result, &dataset, &config.labeling)?;
        measured.push(MetricsReport::compute(
            method.as_str(),
            &instance_verdicts,
            labels,
        )?);
    }
    let report = ComparisonReport {
        measured,
        reference: eval::reference::ReferenceTables::published(),
    };
    std::fs::create_dir_all(&config.out_dir)?;
    write_json(&config.out_dir.join("comparison.json"), &report)?;
    write_atomic(
        &config.out_dir.join("comparison_plot.csv"),
        plot_csv(&report.measured).as_bytes(),
    )?;
    Ok(report)
}

/// Long-format CSV with one row per method/metric, measured and reference.
pub fn plot_csv(measured: &[MetricsReport]) -> String {
    fn pct(rate: eval::Rate) -> String {
        match rate {
            Some(v) => dataset::format_float(v * 100.0),
            None => "undefined".to_string(),
        }
    }
    let mut out = String::from("source,method,metric,value_pct\n");
    for m in measured {
        let rows = [
            ("detection_rate", pct(m.detection_rate)),
            ("accuracy", pct(Some(m.accuracy))),
            ("false_alarm_rate", pct(m.false_alarm_rate)),
            ("dos_detection", pct(m.per_category.dos)),
            ("r2l_detection", pct(m.per_category.r2l)),
            ("u2r_detection", pct(m.per_category.u2r)),
            ("probe_detection", pct(m.per_category.probe)),
        ];
        for (metric, value) in rows {
            out.push_str(&format!("measured,{},{metric},{value}\n", m.method));
        }
    }
    for r in &eval::reference::OVERALL {
        out.push_str(&format!(
            "reference,{},detection_rate,{}\n",
            r.method,
            dataset::format_float(r.detection_rate_pct)
        ));
        out.push_str(&format!(
            "reference,{},accuracy,{}\n",
            r.method,
            dataset::format_float(r.accuracy_pct)
        ));
        out.push_str(&format!(
            "reference,{},false_alarm_rate,{}\n",
            r.method,
            dataset::format_float(r.false_alarm_rate_pct)
        ));
    }
    for r in &eval::reference::PER_CATEGORY {
        for (metric, v) in [
            ("dos_detection", r.dos_pct),
            ("r2l_detection", r.r2l_pct),
            ("u2r_detection", r.u2r_pct),
            ("probe_detection", r.probe_pct),
        ] {
            out.push_str(&format!(
                "reference,{},{metric},{}\n",
                r.method,
                dataset::format_float(v)
            ));
        }
    }
    out
}

/// Render a comparison as a plain text table.
pub fn render_comparison_table(report: &ComparisonReport) -> String {
    fn cell(rate: eval::Rate) -> String {
        match rate {
            Some(v) => format!("{:.2}", v * 100.0),
            None => "n/a".to_string(),
        }
    }
    let mut out = String::new();
    out.push_str(&format!(
        "{:<24} {:>10} {:>10} {:>10}\n",
        "method", "DR%", "Acc%", "FAR%"
    ));
    for m in &report.measured {
        out.push_str(&format!(
            "{:<24} {:>10} {:>10} {:>10}\n",
            format!("{} (measured)", m.method),
            cell(m.detection_rate),
            cell(Some(m.accuracy)),
            cell(m.false_alarm_rate),
        ));
    }
    for r in &report.reference.overall {
        out.push_str(&format!(
            "{:<24} {:>10.2} {:>10.2} {:>10.2}\n",
            format!("{} (reference)", r.method),
            r.detection_rate_pct,
            r.accuracy_pct,
            r.false_alarm_rate_pct,
        ));
    }
    out
}

fn write_verdicts_csv(
    path: &Path,
    report: &ClusteringReport,
    verdicts: &InstanceVerdicts,
) -> Result<(), PipelineError> {
    let mut csv = String::from("row_id,cluster,verdict\n");
    for (i, row_id) in report.row_ids.iter().enumerate() {
        let cluster = report.result.assignment[i];
        let verdict = if verdicts.verdicts[i].is_anomalous() {
            "anomalous"
        } else {
            "normal"
        };
        csv.push_str(&format!("{row_id},{cluster},{verdict}\n"));
    }
    write_atomic(path, csv.as_bytes())?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let mut json = serde_json::to_string_pretty(value)?;
    json.push('\n');
    write_atomic(path, json.as_bytes())?;
    Ok(())
}

/// Write via a temp file in the same directory, then rename into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "out".into())
    ));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)
}

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    Ok(sha256_hex(&std::fs::read(path)?))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
