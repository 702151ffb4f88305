//! KDD-Cup-99 ingestion: record parsing, attack-category taxonomy, one-hot
//! feature encoding and deterministic sampling.
//!
//! A raw record is 41 comma-separated feature values plus a label terminated
//! by a period. Three columns (`protocol_type`, `service`, `flag`) are
//! categorical and expand to one indicator column per observed token; the
//! remaining 38 are numeric and pass through unchanged. Labels are carried
//! beside the feature matrix for evaluation only and are never visible to
//! the clustering stage.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use flate2::read::GzDecoder;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of feature fields in a KDD99 record (label excluded).
pub const KDD_FEATURE_COUNT: usize = 41;

/// Canonical KDD99 feature names, in wire order.
pub const KDD_FEATURE_NAMES: [&str; KDD_FEATURE_COUNT] = [
    "duration",
    "protocol_type",
    "service",
    "flag",
    "src_bytes",
    "dst_bytes",
    "land",
    "wrong_fragment",
    "urgent",
    "hot",
    "num_failed_logins",
    "logged_in",
    "num_compromised",
    "root_shell",
    "su_attempted",
    "num_root",
    "num_file_creations",
    "num_shells",
    "num_access_files",
    "num_outbound_cmds",
    "is_host_login",
    "is_guest_login",
    "count",
    "srv_count",
    "serror_rate",
    "srv_serror_rate",
    "rerror_rate",
    "srv_rerror_rate",
    "same_srv_rate",
    "diff_srv_rate",
    "srv_diff_host_rate",
    "dst_host_count",
    "dst_host_srv_count",
    "dst_host_same_srv_rate",
    "dst_host_diff_srv_rate",
    "dst_host_same_src_port_rate",
    "dst_host_srv_diff_host_rate",
    "dst_host_serror_rate",
    "dst_host_srv_serror_rate",
    "dst_host_rerror_rate",
    "dst_host_srv_rerror_rate",
];

/// Zero-indexed positions of the categorical columns.
pub const KDD_CATEGORICAL_COLUMNS: [usize; 3] = [1, 2, 3];

/// Default attack-token -> category mapping, bundled from the published
/// KDD99 attack lists. Editable copies ship as `data/kdd99_taxonomy.txt`.
pub const DEFAULT_TAXONOMY: &str = include_str!("../../../data/kdd99_taxonomy.txt");

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("expected {expected} comma-separated fields, found {found}")]
    FieldCountMismatch { expected: usize, found: usize },
    #[error("column {column} ({name}): cannot parse {token:?} as a number")]
    NumericParse {
        column: usize,
        name: String,
        token: String,
    },
    #[error("empty label")]
    EmptyLabel,
    #[error("unknown attack label {token:?} (not in taxonomy)")]
    UnknownLabel { token: String },
    #[error("column {column}: category {token:?} not in vocabulary")]
    UnknownCategory { column: usize, token: String },
    #[error("taxonomy line {line}: expected \"token category\", got {text:?}")]
    TaxonomyFormat { line: usize, text: String },
    #[error("taxonomy line {line}: unknown category {token:?}")]
    TaxonomyCategory { line: usize, token: String },
    #[error("sample count {count} exceeds population {population}")]
    CountExceedsPopulation { count: usize, population: usize },
    #[error("stratified sampling requires labels")]
    MissingLabels,
    #[error("sample count must be positive")]
    ZeroCount,
    #[error("{path}:{line}: {source}")]
    AtLine {
        path: String,
        line: usize,
        #[source]
        source: Box<DatasetError>,
    },
    #[error("dataset header mismatch: {0}")]
    HeaderMismatch(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// The four standard KDD99 attack categories plus normal traffic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Normal,
    Dos,
    Probe,
    R2l,
    U2r,
}

impl Category {
    pub const ATTACKS: [Category; 4] = [Category::Dos, Category::Probe, Category::R2l, Category::U2r];

    pub fn as_str(&self) -> &'static str {
        match self {
            Category::Normal => "normal",
            Category::Dos => "dos",
            Category::Probe => "probe",
            Category::R2l => "r2l",
            Category::U2r => "u2r",
        }
    }

    pub fn parse(token: &str) -> Option<Category> {
        match token.to_ascii_lowercase().as_str() {
            "normal" => Some(Category::Normal),
            "dos" => Some(Category::Dos),
            "probe" => Some(Category::Probe),
            "r2l" => Some(Category::R2l),
            "u2r" => Some(Category::U2r),
            _ => None,
        }
    }

    pub fn is_attack(&self) -> bool {
        *self != Category::Normal
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A record's ground-truth class: the coarse category plus the original token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassLabel {
    pub category: Category,
    pub raw_name: String,
}

/// One parsed KDD99 line: 41 raw feature tokens plus the label with its
/// trailing period stripped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRecord {
    pub features: Vec<String>,
    pub label: String,
}

impl RawRecord {
    /// Render back to KDD99 wire format (label gets its period back).
    pub fn to_csv_line(&self) -> String {
        let mut line = self.features.join(",");
        line.push(',');
        line.push_str(&self.label);
        line.push('.');
        line
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
    /// Observed tokens in first-appearance order; empty for numeric columns.
    pub vocabulary: Vec<String>,
}

/// Pre-encoding description of the 41 input columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub columns: Vec<Column>,
}

impl FeatureSchema {
    /// The standard KDD99 schema with empty categorical vocabularies.
    /// Call [`FeatureSchema::fit_vocabularies`] before encoding.
    pub fn kdd99() -> FeatureSchema {
        let columns = KDD_FEATURE_NAMES
            .iter()
            .enumerate()
            .map(|(i, name)| Column {
                name: (*name).to_string(),
                kind: if KDD_CATEGORICAL_COLUMNS.contains(&i) {
                    ColumnKind::Categorical
                } else {
                    ColumnKind::Numeric
                },
                vocabulary: Vec::new(),
            })
            .collect();
        FeatureSchema { columns }
    }

    /// Extend each categorical vocabulary with tokens observed in `records`,
    /// keeping first-appearance order.
    pub fn fit_vocabularies(&mut self, records: &[RawRecord]) {
        for (i, col) in self.columns.iter_mut().enumerate() {
            if col.kind != ColumnKind::Categorical {
                continue;
            }
            for rec in records {
                let token = &rec.features[i];
                if !col.vocabulary.iter().any(|v| v == token) {
                    col.vocabulary.push(token.clone());
                }
            }
        }
    }

    /// Width of the encoded feature matrix.
    pub fn encoded_width(&self) -> usize {
        self.columns
            .iter()
            .map(|c| match c.kind {
                ColumnKind::Numeric => 1,
                ColumnKind::Categorical => c.vocabulary.len(),
            })
            .sum()
    }

    /// Post-encoding column names, schema order then vocabulary order.
    pub fn encoded_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.encoded_width());
        for col in &self.columns {
            match col.kind {
                ColumnKind::Numeric => names.push(col.name.clone()),
                ColumnKind::Categorical => {
                    for token in &col.vocabulary {
                        names.push(format!("{}={}", col.name, token));
                    }
                }
            }
        }
        names
    }
}

/// Encoded n x d feature matrix with stable row identifiers and optional
/// ground-truth labels.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericDataset {
    values: Vec<f64>,
    n: usize,
    d: usize,
    pub row_ids: Vec<String>,
    pub labels: Option<Vec<ClassLabel>>,
    pub column_names: Vec<String>,
}

impl NumericDataset {
    pub fn new(
        values: Vec<f64>,
        n: usize,
        d: usize,
        row_ids: Vec<String>,
        labels: Option<Vec<ClassLabel>>,
        column_names: Vec<String>,
    ) -> NumericDataset {
        assert_eq!(values.len(), n * d, "value buffer must be n*d");
        assert_eq!(row_ids.len(), n, "one row id per row");
        if let Some(l) = &labels {
            assert_eq!(l.len(), n, "one label per row");
        }
        assert_eq!(column_names.len(), d, "one name per column");
        NumericDataset {
            values,
            n,
            d,
            row_ids,
            labels,
            column_names,
        }
    }

    /// Build from explicit rows; ids default to `r000000`-style indices.
    pub fn from_rows(rows: &[Vec<f64>]) -> NumericDataset {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(n * d);
        for row in rows {
            assert_eq!(row.len(), d, "ragged rows");
            values.extend_from_slice(row);
        }
        NumericDataset::new(
            values,
            n,
            d,
            (0..n).map(|i| format!("r{i:06}")).collect(),
            None,
            (0..d).map(|j| format!("f{j}")).collect(),
        )
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn n_cols(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn rows_iter(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.d.max(1))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// New dataset keeping the given row indices, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> NumericDataset {
        let mut values = Vec::with_capacity(indices.len() * self.d);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        NumericDataset {
            values,
            n: indices.len(),
            d: self.d,
            row_ids: indices.iter().map(|&i| self.row_ids[i].clone()).collect(),
            labels: self
                .labels
                .as_ref()
                .map(|l| indices.iter().map(|&i| l[i].clone()).collect()),
            column_names: self.column_names.clone(),
        }
    }
}

/// Attack-token -> category lookup, loaded from a whitespace-separated
/// mapping file. Lookup is case-insensitive; `normal` is built in.
#[derive(Debug, Clone)]
pub struct Taxonomy {
    map: HashMap<String, Category>,
}

impl Taxonomy {
    pub fn parse(text: &str) -> Result<Taxonomy, DatasetError> {
        let mut map = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (token, cat) = match (parts.next(), parts.next(), parts.next()) {
                (Some(t), Some(c), None) => (t, c),
                _ => {
                    return Err(DatasetError::TaxonomyFormat {
                        line: idx + 1,
                        text: raw.to_string(),
                    })
                }
            };
            let category = Category::parse(cat).ok_or(DatasetError::TaxonomyCategory {
                line: idx + 1,
                token: cat.to_string(),
            })?;
            map.insert(token.to_ascii_lowercase(), category);
        }
        Ok(Taxonomy { map })
    }

    pub fn load(path: &Path) -> Result<Taxonomy, DatasetError> {
        Taxonomy::parse(&std::fs::read_to_string(path)?)
    }

    /// The bundled KDD99 mapping.
    pub fn default_kdd99() -> Taxonomy {
        Taxonomy::parse(DEFAULT_TAXONOMY).expect("bundled taxonomy is well-formed")
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.map.keys().map(String::as_str)
    }

    /// Map a raw label token to its class.
    pub fn map_label(&self, raw_name: &str) -> Result<ClassLabel, DatasetError> {
        let lower = raw_name.to_ascii_lowercase();
        let category = if lower == "normal" {
            Category::Normal
        } else {
            *self
                .map
                .get(&lower)
                .ok_or_else(|| DatasetError::UnknownLabel {
                    token: raw_name.to_string(),
                })?
        };
        Ok(ClassLabel {
            category,
            raw_name: lower,
        })
    }
}

/// Parse one KDD99 line: 42 comma-separated fields, numeric columns
/// validated, label's trailing period stripped.
pub fn parse_kdd_record(line: &str, schema: &FeatureSchema) -> Result<RawRecord, DatasetError> {
    let fields: Vec<&str> = line.trim_end_matches(['\r', '\n']).split(',').collect();
    let expected = schema.columns.len() + 1;
    if fields.len() != expected {
        return Err(DatasetError::FieldCountMismatch {
            expected,
            found: fields.len(),
        });
    }
    for (i, col) in schema.columns.iter().enumerate() {
        if col.kind == ColumnKind::Numeric && fields[i].trim().parse::<f64>().is_err() {
            return Err(DatasetError::NumericParse {
                column: i,
                name: col.name.clone(),
                token: fields[i].to_string(),
            });
        }
    }
    let label = fields[expected - 1].trim().trim_end_matches('.').to_string();
    if label.is_empty() {
        return Err(DatasetError::EmptyLabel);
    }
    Ok(RawRecord {
        features: fields[..expected - 1].iter().map(|s| s.to_string()).collect(),
        label,
    })
}

/// Read every record from a KDD99 CSV file, transparently decompressing
/// gzip (detected from the magic bytes). Errors are tagged with path and
/// line number.
pub fn read_kdd_file(path: &Path, schema: &FeatureSchema) -> Result<Vec<RawRecord>, DatasetError> {
    let file = File::open(path)?;
    let mut head = [0u8; 2];
    let n_head = {
        let mut reader = BufReader::new(&file);
        let n = reader.read(&mut head)?;
        n
    };
    let file = File::open(path)?;
    let reader: Box<dyn BufRead> = if n_head == 2 && head == [0x1f, 0x8b] {
        Box::new(BufReader::new(GzDecoder::new(file)))
    } else {
        Box::new(BufReader::new(file))
    };
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = parse_kdd_record(&line, schema).map_err(|e| DatasetError::AtLine {
            path: path.display().to_string(),
            line: idx + 1,
            source: Box::new(e),
        })?;
        records.push(record);
    }
    Ok(records)
}

/// One-hot encode raw records against a fitted schema.
///
/// Numeric columns copy through; each categorical column expands to one
/// indicator per vocabulary token (exactly one indicator is 1 per row).
/// When a taxonomy is supplied, labels are mapped and carried alongside.
pub fn encode_features(
    records: &[RawRecord],
    schema: &FeatureSchema,
    taxonomy: Option<&Taxonomy>,
) -> Result<NumericDataset, DatasetError> {
    let d = schema.encoded_width();
    let n = records.len();
    let mut values = Vec::with_capacity(n * d);
    for rec in records {
        for (i, col) in schema.columns.iter().enumerate() {
            let token = &rec.features[i];
            match col.kind {
                ColumnKind::Numeric => {
                    // validated by parse_kdd_record when the record came
                    // through the parser; re-checked here for direct callers
                    let v = token
                        .trim()
                        .parse::<f64>()
                        .map_err(|_| DatasetError::NumericParse {
                            column: i,
                            name: col.name.clone(),
                            token: token.clone(),
                        })?;
                    values.push(v);
                }
                ColumnKind::Categorical => {
                    let pos = col.vocabulary.iter().position(|v| v == token).ok_or_else(|| {
                        DatasetError::UnknownCategory {
                            column: i,
                            token: token.clone(),
                        }
                    })?;
                    for j in 0..col.vocabulary.len() {
                        values.push(if j == pos { 1.0 } else { 0.0 });
                    }
                }
            }
        }
    }
    let labels = match taxonomy {
        Some(tax) => Some(
            records
                .iter()
                .map(|r| tax.map_label(&r.label))
                .collect::<Result<Vec<_>, _>>()?,
        ),
        None => None,
    };
    Ok(NumericDataset::new(
        values,
        n,
        d,
        (0..n).map(|i| format!("r{i:06}")).collect(),
        labels,
        schema.encoded_names(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleStrategy {
    Uniform,
    StratifiedByCategory,
}

/// Draw `count` rows without replacement, deterministically for a given
/// seed. Output keeps the original row order. Stratified mode preserves
/// category proportions to within one record per category.
pub fn sample_dataset(
    dataset: &NumericDataset,
    strategy: SampleStrategy,
    count: usize,
    seed: u64,
) -> Result<NumericDataset, DatasetError> {
    let n = dataset.n_rows();
    if count == 0 {
        return Err(DatasetError::ZeroCount);
    }
    if count > n {
        return Err(DatasetError::CountExceedsPopulation {
            count,
            population: n,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> = match strategy {
        SampleStrategy::Uniform => sample_without_replacement(&mut rng, n, count),
        SampleStrategy::StratifiedByCategory => {
            let labels = dataset.labels.as_ref().ok_or(DatasetError::MissingLabels)?;
            let mut groups: Vec<(Category, Vec<usize>)> = Vec::new();
            for (i, label) in labels.iter().enumerate() {
                match groups.iter_mut().find(|(c, _)| *c == label.category) {
                    Some((_, idxs)) => idxs.push(i),
                    None => groups.push((label.category, vec![i])),
                }
            }
            groups.sort_by_key(|(c, _)| *c);
            let allocations = largest_remainder(&groups, count, n);
            let mut picked = Vec::with_capacity(count);
            for ((_, idxs), take) in groups.iter().zip(allocations) {
                for local in sample_without_replacement(&mut rng, idxs.len(), take) {
                    picked.push(idxs[local]);
                }
            }
            picked
        }
    };
    picked.sort_unstable();
    Ok(dataset.select_rows(&picked))
}

/// Allocate `count` slots across groups proportionally to group size,
/// distributing the remainder by largest fractional part (ties by group
/// order). Each allocation differs from the exact proportion by < 1.
fn largest_remainder(groups: &[(Category, Vec<usize>)], count: usize, n: usize) -> Vec<usize> {
    let mut alloc: Vec<usize> = Vec::with_capacity(groups.len());
    let mut fractions: Vec<(usize, f64)> = Vec::with_capacity(groups.len());
    let mut assigned = 0usize;
    for (gi, (_, idxs)) in groups.iter().enumerate() {
        let exact = count as f64 * idxs.len() as f64 / n as f64;
        let floor = exact.floor() as usize;
        alloc.push(floor);
        assigned += floor;
        fractions.push((gi, exact - floor as f64));
    }
    fractions.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    for (gi, _) in fractions.into_iter().take(count - assigned) {
        alloc[gi] += 1;
    }
    alloc
}

/// Partial Fisher-Yates: `count` distinct draws from `0..n`.
fn sample_without_replacement(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<usize> {
    use rand::Rng;
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..count {
        let j = rng.gen_range(i..n);
        pool.swap(i, j);
    }
    pool.truncate(count);
    pool
}

/// JSON sidecar written beside the encoded-dataset CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub columns: Vec<String>,
    pub row_count: usize,
    pub has_labels: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_strategy: Option<SampleStrategy>,
}

/// Write the encoded dataset as `<stem>.csv` plus `<stem>.json` sidecar.
/// Values use shortest round-trip float formatting, so re-reading is exact.
pub fn write_dataset(
    dataset: &NumericDataset,
    stem: &Path,
    header_extra: DatasetProvenance,
) -> Result<(), DatasetError> {
    let header = DatasetHeader {
        columns: dataset.column_names.clone(),
        row_count: dataset.n_rows(),
        has_labels: dataset.labels.is_some(),
        source: header_extra.source,
        sample_seed: header_extra.sample_seed,
        sample_strategy: header_extra.sample_strategy,
    };
    let mut csv = String::new();
    csv.push_str("row_id,raw_label,category");
    for name in &dataset.column_names {
        csv.push(',');
        csv.push_str(name);
    }
    csv.push('\n');
    for i in 0..dataset.n_rows() {
        csv.push_str(&dataset.row_ids[i]);
        match dataset.labels.as_ref().map(|l| &l[i]) {
            Some(label) => {
                csv.push(',');
                csv.push_str(&label.raw_name);
                csv.push(',');
                csv.push_str(label.category.as_str());
            }
            None => csv.push_str(",,"),
        }
        for v in dataset.row(i) {
            csv.push(',');
            csv.push_str(&format_float(*v));
        }
        csv.push('\n');
    }
    crate::pipeline::write_atomic(&stem.with_extension("csv"), csv.as_bytes())?;
    let json = serde_json::to_string_pretty(&header)?;
    crate::pipeline::write_atomic(&stem.with_extension("json"), json.as_bytes())?;
    Ok(())
}

/// Provenance fields recorded in the dataset sidecar.
#[derive(Debug, Clone, Default)]
pub struct DatasetProvenance {
    pub source: Option<String>,
    pub sample_seed: Option<u64>,
    pub sample_strategy: Option<SampleStrategy>,
}

/// Read back a dataset written by [`write_dataset`].
pub fn read_dataset(stem: &Path) -> Result<NumericDataset, DatasetError> {
    let header: DatasetHeader =
        serde_json::from_str(&std::fs::read_to_string(stem.with_extension("json"))?)?;
    let csv = std::fs::read_to_string(stem.with_extension("csv"))?;
    let mut lines = csv.lines();
    let first = lines
        .next()
        .ok_or_else(|| DatasetError::HeaderMismatch("empty csv".into()))?;
    let d = header.columns.len();
    let got_cols = first.split(',').count();
    if got_cols != d + 3 {
        return Err(DatasetError::HeaderMismatch(format!(
            "csv has {got_cols} columns, sidecar describes {}",
            d + 3
        )));
    }
    let mut values = Vec::with_capacity(header.row_count * d);
    let mut row_ids = Vec::with_capacity(header.row_count);
    let mut labels: Vec<ClassLabel> = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != d + 3 {
            return Err(DatasetError::HeaderMismatch(format!(
                "row {}: {} fields, expected {}",
                idx + 2,
                fields.len(),
                d + 3
            )));
        }
        row_ids.push(fields[0].to_string());
        if header.has_labels {
            let category = Category::parse(fields[2]).ok_or_else(|| {
                DatasetError::HeaderMismatch(format!("row {}: bad category {:?}", idx + 2, fields[2]))
            })?;
            labels.push(ClassLabel {
                category,
                raw_name: fields[1].to_string(),
            });
        }
        for (j, tok) in fields[3..].iter().enumerate() {
            let v = tok.parse::<f64>().map_err(|_| DatasetError::NumericParse {
                column: j,
                name: header.columns[j].clone(),
                token: tok.to_string(),
            })?;
            values.push(v);
        }
    }
    let n = row_ids.len();
    if n != header.row_count {
        return Err(DatasetError::HeaderMismatch(format!(
            "csv has {n} rows, sidecar says {}",
            header.row_count
        )));
    }
    Ok(NumericDataset::new(
        values,
        n,
        d,
        row_ids,
        header.has_labels.then_some(labels),
        header.columns,
    ))
}

/// Shortest representation that parses back to the same f64.
pub fn format_float(v: f64) -> String {
    let mut buf = ryu_like(v);
    if buf.ends_with(".0") {
        buf.truncate(buf.len() - 2);
    }
    buf
}

fn ryu_like(v: f64) -> String {
    // {:?} on f64 is the shortest round-trip form
    format!("{v:?}")
}
