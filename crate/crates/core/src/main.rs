//! `kmids` — experiment runner for medoid-based intrusion detection.
//!
//! Subcommands mirror the pipeline stages: `ingest`, `cluster`, `evaluate`,
//! `run` (the whole pipeline), `compare` (side by side with K-means).
//! Exit codes: 0 success, 2 config error, 3 data error, 4 internal error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use kmids::dataset::read_dataset;
use kmids::pipeline::{
    self, ClusteringReport, ExperimentConfig, Method, PipelineError,
};

#[derive(Parser)]
#[command(name = "kmids", version, about = "Medoid clustering for anomaly intrusion detection")]
struct Cli {
    /// Experiment config (JSON); a run manifest is accepted too.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the sampling seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the output directory from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, encode and sample the dataset; write encoded.csv/encoded.json.
    Ingest,
    /// Standardize and cluster; write standardization.json and clustering.json.
    Cluster {
        /// Clustering method.
        #[arg(long, default_value = "new-medoid")]
        method: Method,
    },
    /// Label an existing clustering and score it; write verdicts and metrics.
    Evaluate,
    /// Full pipeline: ingest, cluster, label, evaluate, manifest.
    Run,
    /// Run several methods on the identical dataset and tabulate results.
    Compare {
        /// Methods to run (repeatable); both when omitted.
        #[arg(long = "method")]
        methods: Vec<Method>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kmids: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, PipelineError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| PipelineError::Config("--config is required".into()))?;
    let mut config = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        match &mut config.sample {
            Some(sample) => sample.seed = seed,
            None => {
                return Err(PipelineError::Config(
                    "--seed given but the config has no sample block".into(),
                ))
            }
        }
    }
    if let Some(out) = &cli.out {
        config.out_dir = out.clone();
    }
    Ok(config)
}

fn execute(cli: &Cli) -> Result<(), PipelineError> {
    let config = load_config(cli)?;
    match &cli.command {
        Command::Ingest => {
            config.validate()?;
            let stem = pipeline::ingest_to_files(&config)?;
            if !cli.quiet {
                let ds = read_dataset(&stem)?;
                println!(
                    "encoded {} rows x {} columns -> {}.csv",
                    ds.n_rows(),
                    ds.n_cols(),
                    stem.display()
                );
            }
        }
        Command::Cluster { method } => {
            config.validate()?;
            let (dataset, fingerprint) = pipeline::load_or_ingest(&config)?;
            let (standardized, params) = pipeline::standardize(&dataset)?;
            let result = pipeline::run_method(*method, &standardized, &config)?;
            std::fs::create_dir_all(&config.out_dir)?;
            params.save(&config.out_dir.join("standardization.json"))?;
            let report = ClusteringReport {
                method: *method,
                cluster_count_requested: config.cluster_count,
                clustering_config: config.clustering.clone(),
                dataset_sha256: fingerprint,
                medoid_row_ids: result
                    .medoids
                    .iter()
                    .map(|&i| dataset.row_ids[i].clone())
                    .collect(),
                row_ids: dataset.row_ids.clone(),
                result,
            };
            pipeline::write_json(&config.out_dir.join("clustering.json"), &report)?;
            if !cli.quiet {
                println!(
                    "{}: {} clusters, objective {:.6}, {} iterations ({} empty removed)",
                    method,
                    report.result.n_clusters(),
                    report.result.objective,
                    report.result.iterations,
                    report.result.removed_empty
                );
            }
        }
        Command::Evaluate => {
            config.validate()?;
            let clustering_path = config.out_dir.join("clustering.json");
            let report: ClusteringReport = serde_json::from_str(
                &std::fs::read_to_string(&clustering_path).map_err(|e| {
                    PipelineError::Data(format!(
                        "cannot read {} (run `kmids cluster` first): {e}",
                        clustering_path.display()
                    ))
                })?,
            )?;
            let (dataset, _) = pipeline::load_or_ingest(&config)?;
            if dataset.row_ids != report.row_ids {
                return Err(PipelineError::Data(
                    "clustering.json does not match the current dataset rows".into(),
                ));
            }
            let (cluster_verdicts, instance_verdicts) =
                pipeline::label_partition(&report.result, &dataset, &config.labeling)?;
            let labels = dataset.labels.as_ref().ok_or_else(|| {
                PipelineError::Data("evaluation requires ground-truth labels".into())
            })?;
            let metrics = kmids::eval::MetricsReport::compute(
                report.method.as_str(),
                &instance_verdicts,
                labels,
            )?;
            let mut verdict_lines = String::from("row_id,cluster,verdict\n");
            for (i, row_id) in report.row_ids.iter().enumerate() {
                verdict_lines.push_str(&format!(
                    "{row_id},{},{}\n",
                    report.result.assignment[i],
                    if instance_verdicts.verdicts[i].is_anomalous() {
                        "anomalous"
                    } else {
                        "normal"
                    }
                ));
            }
            pipeline::write_atomic(&config.out_dir.join("verdicts.csv"), verdict_lines.as_bytes())?;
            pipeline::write_json(
                &config.out_dir.join("metrics.json"),
                &serde_json::json!({
                    "metrics": metrics,
                    "cluster_verdicts": cluster_verdicts,
                    "labeling": config.labeling,
                }),
            )?;
            pipeline::write_atomic(
                &config.out_dir.join("metrics_plot.csv"),
                pipeline::plot_csv(std::slice::from_ref(&metrics)).as_bytes(),
            )?;
            if !cli.quiet {
                print_metrics(&metrics);
            }
        }
        Command::Run => {
            let outputs = pipeline::run_pipeline(&config)?;
            if !cli.quiet {
                print_metrics(&outputs.metrics);
                println!("reports written to {}", config.out_dir.display());
            }
        }
        Command::Compare { methods } => {
            let methods: &[Method] = if methods.is_empty() { &Method::ALL } else { methods };
            let report = pipeline::compare_methods(&config, methods)?;
            if !cli.quiet {
                print!("{}", pipeline::render_comparison_table(&report));
            }
        }
    }
    Ok(())
}

fn print_metrics(metrics: &kmids::eval::MetricsReport) {
    fn pct(rate: Option<f64>) -> String {
        match rate {
            Some(v) => format!("{:.2}%", v * 100.0),
            None => "undefined".to_string(),
        }
    }
    println!(
        "{}: DR {} | accuracy {:.2}% | FAR {}",
        metrics.method,
        pct(metrics.detection_rate),
        metrics.accuracy * 100.0,
        pct(metrics.false_alarm_rate)
    );
    println!(
        "  per category: dos {} | probe {} | r2l {} | u2r {}",
        pct(metrics.per_category.dos),
        pct(metrics.per_category.probe),
        pct(metrics.per_category.r2l),
        pct(metrics.per_category.u2r)
    );
}
