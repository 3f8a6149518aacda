//! Datasets, CSV ingestion, train/test splitting and the synthetic
//! generators used by the benchmark studies.

use std::borrow::Cow;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Formats a real with the shortest decimal text that parses back to the
/// same value. Integral values print without a fractional part.
pub fn format_real(value: f64) -> String {
    format!("{value}")
}

/// Feature matrix plus integer class labels.
///
/// Features are stored row-major. Labels are dense class indices; the
/// number of classes is `max(label) + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    n_features: usize,
    labels: Vec<usize>,
    attribute_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset from row vectors, naming attributes `X1..Xm`.
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<usize>) -> Result<Self> {
        let n_features = rows.first().map(Vec::len).unwrap_or(0);
        let mut features = Vec::with_capacity(rows.len() * n_features);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_features {
                return Err(Error::RaggedRow {
                    row: i,
                    expected: n_features,
                    found: row.len(),
                });
            }
            features.extend_from_slice(row);
        }
        Self::from_flat(features, n_features, labels, None)
    }

    /// Builds a dataset from a row-major feature buffer.
    pub fn from_flat(
        features: Vec<f64>,
        n_features: usize,
        labels: Vec<usize>,
        attribute_names: Option<Vec<String>>,
    ) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if n_features == 0 {
            return Err(Error::InvalidDataset("no feature columns".into()));
        }
        if features.len() != labels.len() * n_features {
            return Err(Error::LabelCountMismatch {
                rows: features.len() / n_features,
                labels: labels.len(),
            });
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / n_features,
                column: pos % n_features,
                value: features[pos].to_string(),
            });
        }
        let attribute_names = match attribute_names {
            Some(names) if names.len() != n_features => {
                return Err(Error::InvalidDataset(format!(
                    "{} attribute names for {} features",
                    names.len(),
                    n_features
                )))
            }
            Some(names) => names,
            None => (1..=n_features).map(|j| format!("X{j}")).collect(),
        };
        Ok(Dataset {
            features,
            n_features,
            labels,
            attribute_names,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// Number of classes, `G + 1` where `G` is the largest label.
    pub fn n_classes(&self) -> usize {
        self.labels.iter().copied().max().map_or(0, |g| g + 1)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn value(&self, row: usize, feature: usize) -> f64 {
        self.features[row * self.n_features + feature]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn attribute_names(&self) -> &[String] {
        &self.attribute_names
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.features.chunks_exact(self.n_features)
    }

    /// View over every row.
    pub fn all(&self) -> DataSubset<'_> {
        DataSubset {
            dataset: self,
            rows: Cow::Owned((0..self.n_rows()).collect()),
        }
    }

    /// Copies the given rows into a new dataset, keeping attribute names.
    pub fn select(&self, rows: &[usize]) -> Result<Dataset> {
        let mut features = Vec::with_capacity(rows.len() * self.n_features);
        let mut labels = Vec::with_capacity(rows.len());
        for &r in rows {
            if r >= self.n_rows() {
                return Err(Error::RowOutOfRange {
                    index: r,
                    rows: self.n_rows(),
                });
            }
            features.extend_from_slice(self.row(r));
            labels.push(self.labels[r]);
        }
        Dataset::from_flat(
            features,
            self.n_features,
            labels,
            Some(self.attribute_names.clone()),
        )
    }

    /// Canonical text of the given rows: one line per row, features in
    /// shortest round-trip form, then the label.
    pub fn encode_rows(&self, rows: impl IntoIterator<Item = usize>) -> Vec<u8> {
        let mut out = String::new();
        for r in rows {
            for v in self.row(r) {
                // writing to a String cannot fail
                let _ = write!(out, "{v},");
            }
            let _ = writeln!(out, "{}", self.labels[r]);
        }
        out.into_bytes()
    }

    pub fn encode(&self) -> Vec<u8> {
        self.encode_rows(0..self.n_rows())
    }

    /// CSV text with a header of attribute names followed by `label`.
    pub fn to_csv_string(&self) -> String {
        let mut out = self.attribute_names.join(",");
        out.push_str(",label\n");
        out.push_str(std::str::from_utf8(&self.encode()).expect("ascii"));
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(self.to_csv_string().as_bytes())
            .map_err(|e| Error::io(path, e))
    }
}

/// A set of row indices into a parent dataset.
#[derive(Debug, Clone)]
pub struct DataSubset<'a> {
    dataset: &'a Dataset,
    rows: Cow<'a, [usize]>,
}

impl<'a> DataSubset<'a> {
    /// Checked constructor: indices must be unique and in range.
    pub fn new(dataset: &'a Dataset, rows: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; dataset.n_rows()];
        for &r in &rows {
            if r >= dataset.n_rows() {
                return Err(Error::RowOutOfRange {
                    index: r,
                    rows: dataset.n_rows(),
                });
            }
            if std::mem::replace(&mut seen[r], true) {
                return Err(Error::DuplicateRow(r));
            }
        }
        Ok(DataSubset {
            dataset,
            rows: Cow::Owned(rows),
        })
    }

    pub(crate) fn borrowed(dataset: &'a Dataset, rows: &'a [usize]) -> Self {
        DataSubset {
            dataset,
            rows: Cow::Borrowed(rows),
        }
    }

    pub(crate) fn owned(dataset: &'a Dataset, rows: Vec<usize>) -> Self {
        DataSubset {
            dataset,
            rows: Cow::Owned(rows),
        }
    }

    pub fn dataset(&self) -> &'a Dataset {
        self.dataset
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    /// Diameter: the number of rows in the subset.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.iter().map(|&r| self.dataset.label(r))
    }

    /// Per-class row counts, indexed by label.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.dataset.n_classes()];
        for label in self.labels() {
            counts[label] += 1;
        }
        counts
    }

    pub fn into_rows(self) -> Vec<usize> {
        self.rows.into_owned()
    }
}

/// Which CSV column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Index(usize),
    /// Matched against header names; falls back to a numeric index when no
    /// header matches.
    Name(String),
}

impl From<&str> for LabelColumn {
    fn from(s: &str) -> Self {
        LabelColumn::Name(s.to_string())
    }
}

impl From<usize> for LabelColumn {
    fn from(i: usize) -> Self {
        LabelColumn::Index(i)
    }
}

impl LabelColumn {
    fn resolve(&self, header: Option<&[String]>, width: usize) -> Result<usize> {
        let index = match self {
            LabelColumn::Index(i) => Some(*i),
            LabelColumn::Name(name) => header
                .and_then(|h| h.iter().position(|c| c == name))
                .or_else(|| name.parse().ok()),
        };
        match index {
            Some(i) if i < width => Ok(i),
            _ => Err(Error::UnknownColumn(match self {
                LabelColumn::Index(i) => i.to_string(),
                LabelColumn::Name(n) => n.clone(),
            })),
        }
    }
}

struct CsvTable {
    header: Option<Vec<String>>,
    records: Vec<Vec<String>>,
    width: usize,
    first_line: usize,
}

impl CsvTable {
    fn read(path: &Path, has_header: bool) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(has_header)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(file);
        let header = if has_header {
            Some(
                reader
                    .headers()?
                    .iter()
                    .map(str::to_string)
                    .collect::<Vec<_>>(),
            )
        } else {
            None
        };
        let mut records = Vec::new();
        for record in reader.records() {
            let record = record?;
            if record.iter().all(str::is_empty) {
                continue;
            }
            records.push(record.iter().map(str::to_string).collect::<Vec<_>>());
        }
        let width = header
            .as_ref()
            .map(Vec::len)
            .or_else(|| records.first().map(Vec::len))
            .unwrap_or(0);
        let first_line = if has_header { 2 } else { 1 };
        for (i, rec) in records.iter().enumerate() {
            if rec.len() != width {
                return Err(Error::RaggedRow {
                    row: i + first_line,
                    expected: width,
                    found: rec.len(),
                });
            }
        }
        if records.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Ok(CsvTable {
            header,
            records,
            width,
            first_line,
        })
    }

    /// Parses every column except `skip` as finite reals.
    fn features(&self, skip: Option<usize>) -> Result<(Vec<f64>, usize)> {
        let n_features = self.width - usize::from(skip.is_some());
        let mut features = Vec::with_capacity(self.records.len() * n_features);
        for (i, rec) in self.records.iter().enumerate() {
            for (j, cell) in rec.iter().enumerate() {
                if Some(j) == skip {
                    continue;
                }
                let value: f64 = cell.parse().map_err(|_| Error::Parse {
                    row: i + self.first_line,
                    column: j + 1,
                    value: cell.clone(),
                })?;
                if !value.is_finite() {
                    return Err(Error::NonFinite {
                        row: i + self.first_line,
                        column: j + 1,
                        value: cell.clone(),
                    });
                }
                features.push(value);
            }
        }
        Ok((features, n_features))
    }

    fn names(&self, skip: Option<usize>) -> Option<Vec<String>> {
        self.header.as_ref().map(|h| {
            h.iter()
                .enumerate()
                .filter(|(j, _)| Some(*j) != skip)
                .map(|(_, n)| n.clone())
                .collect()
        })
    }
}

/// Maps label cells to dense class indices. Cells that all parse as
/// non-negative integers are used verbatim; otherwise distinct strings are
/// numbered in order of first appearance.
fn encode_labels(cells: &[&str]) -> Vec<usize> {
    let numeric: Option<Vec<usize>> = cells.iter().map(|c| c.parse().ok()).collect();
    if let Some(labels) = numeric {
        return labels;
    }
    let mut index: HashMap<&str, usize> = HashMap::new();
    cells
        .iter()
        .map(|c| {
            let next = index.len();
            *index.entry(c).or_insert(next)
        })
        .collect()
}

/// Loads a labeled dataset from a comma-separated file.
pub fn load_csv(path: impl AsRef<Path>, label: &LabelColumn, has_header: bool) -> Result<Dataset> {
    let table = CsvTable::read(path.as_ref(), has_header)?;
    let label_col = label.resolve(table.header.as_deref(), table.width)?;
    if table.width < 2 {
        return Err(Error::InvalidDataset("no feature columns".into()));
    }
    let (features, n_features) = table.features(Some(label_col))?;
    let cells: Vec<&str> = table
        .records
        .iter()
        .map(|r| r[label_col].as_str())
        .collect();
    let labels = encode_labels(&cells);
    Dataset::from_flat(features, n_features, labels, table.names(Some(label_col)))
}

/// Loads an unlabeled feature matrix, optionally dropping one column.
/// Returns the row-major values and the number of columns kept.
pub fn load_features_csv(
    path: impl AsRef<Path>,
    drop: Option<&LabelColumn>,
    has_header: bool,
) -> Result<(Vec<f64>, usize)> {
    let table = CsvTable::read(path.as_ref(), has_header)?;
    let skip = drop
        .map(|c| c.resolve(table.header.as_deref(), table.width))
        .transpose()?;
    table.features(skip)
}

/// Fraction of rows assigned to training, plus the shuffle seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitRatio {
    train_fraction: f64,
    pub seed: u64,
}

impl SplitRatio {
    pub fn new(train_fraction: f64, seed: u64) -> Result<Self> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "train fraction {train_fraction} must lie strictly between 0 and 1"
            )));
        }
        Ok(SplitRatio {
            train_fraction,
            seed,
        })
    }

    pub fn train_fraction(&self) -> f64 {
        self.train_fraction
    }

    pub fn with_seed(self, seed: u64) -> Self {
        SplitRatio { seed, ..self }
    }
}

/// Seeded random partition into train and test parts.
///
/// The train part gets `round(fraction * n)` rows, clamped to `[1, n - 1]`
/// so neither part is empty. Rows keep their original order within a part.
pub fn train_test_split(data: &Dataset, ratio: SplitRatio) -> Result<(Dataset, Dataset)> {
    let n = data.n_rows();
    if n < 2 {
        return Err(Error::InvalidDataset(format!(
            "need at least 2 rows to split, got {n}"
        )));
    }
    let n_train = ((ratio.train_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(ratio.seed));
    let (train, test) = order.split_at_mut(n_train);
    train.sort_unstable();
    test.sort_unstable();
    Ok((data.select(train)?, data.select(test)?))
}

/// 100 uniform points on `[0, 100]^2` labeled `0` when `X1 < 50` and `1`
/// otherwise, plus one label-`1` point placed in `[0, 45] x [0, 100]`.
/// The injected point is the last row.
pub fn make_error_point_dataset(seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(202);
    let mut labels = Vec::with_capacity(101);
    for _ in 0..100 {
        let x1: f64 = rng.random_range(0.0..=100.0);
        let x2: f64 = rng.random_range(0.0..=100.0);
        features.extend([x1, x2]);
        labels.push(usize::from(x1 >= 50.0));
    }
    features.push(rng.random_range(0.0..=45.0));
    features.push(rng.random_range(0.0..=100.0));
    labels.push(1);
    Dataset::from_flat(features, 2, labels, None).expect("generator output is valid")
}

/// Centers of the two blobs produced by [`make_blobs`].
pub const BLOB_CENTERS: [[f64; 2]; 2] = [[0.0, 0.0], [10.0, 10.0]];

/// Two isotropic 2-D Gaussian clusters, `points_per_blob` each, labeled by
/// cluster. Rows alternate between the clusters.
pub fn make_blobs(std_dev: f64, points_per_blob: usize, seed: u64) -> Result<Dataset> {
    if !(std_dev > 0.0 && std_dev.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "blob standard deviation must be positive, got {std_dev}"
        )));
    }
    if points_per_blob == 0 {
        return Err(Error::InvalidConfig(
            "points per blob must be positive".into(),
        ));
    }
    let normal = Normal::new(0.0, std_dev).expect("positive std");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(4 * points_per_blob);
    let mut labels = Vec::with_capacity(2 * points_per_blob);
    for _ in 0..points_per_blob {
        for (label, center) in BLOB_CENTERS.iter().enumerate() {
            features.push(center[0] + normal.sample(&mut rng));
            features.push(center[1] + normal.sample(&mut rng));
            labels.push(label);
        }
    }
    Dataset::from_flat(features, 2, labels, None)
}
