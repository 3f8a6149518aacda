//! Python bindings: datasets, MSI and greedy trees, costs and studies.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use msi_tree::bench::{self, BlobSweepConfig};
use msi_tree::{
    CombinerKind, CompressorKind, Error, GreedyConfig, LabelColumn, Model, MsiConfig, SplitRatio,
};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn msi_config(compressor: &str, combiner: &str) -> PyResult<MsiConfig> {
    Ok(MsiConfig {
        compressor: compressor.parse::<CompressorKind>().map_err(py_err)?,
        combiner: combiner.parse::<CombinerKind>().map_err(py_err)?,
    })
}

/// Feature matrix with integer class labels.
#[pyclass(frozen, skip_from_py_object, module = "pymsi")]
#[derive(Clone)]
struct Dataset {
    inner: msi_tree::Dataset,
}

#[pymethods]
impl Dataset {
    #[new]
    fn new(rows: Vec<Vec<f64>>, labels: Vec<usize>) -> PyResult<Self> {
        Ok(Dataset {
            inner: msi_tree::Dataset::new(rows, labels).map_err(py_err)?,
        })
    }

    /// Loads a CSV; `label` is a header name or a 0-based column index.
    #[staticmethod]
    #[pyo3(signature = (path, label, has_header = true))]
    fn from_csv(path: &str, label: &str, has_header: bool) -> PyResult<Self> {
        Ok(Dataset {
            inner: msi_tree::load_csv(path, &LabelColumn::from(label), has_header)
                .map_err(py_err)?,
        })
    }

    fn to_csv(&self, path: &str) -> PyResult<()> {
        self.inner.write_csv(path).map_err(py_err)
    }

    #[getter]
    fn n_rows(&self) -> usize {
        self.inner.n_rows()
    }

    #[getter]
    fn n_features(&self) -> usize {
        self.inner.n_features()
    }

    #[getter]
    fn n_classes(&self) -> usize {
        self.inner.n_classes()
    }

    #[getter]
    fn attribute_names(&self) -> Vec<String> {
        self.inner.attribute_names().to_vec()
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        self.inner.rows().map(<[f64]>::to_vec).collect()
    }

    fn labels(&self) -> Vec<usize> {
        self.inner.labels().to_vec()
    }

    /// Splits into (train, test) with a seeded shuffle.
    #[pyo3(signature = (train_fraction = 0.7, seed = 0))]
    fn split(&self, train_fraction: f64, seed: u64) -> PyResult<(Dataset, Dataset)> {
        let ratio = SplitRatio::new(train_fraction, seed).map_err(py_err)?;
        let (a, b) = msi_tree::train_test_split(&self.inner, ratio).map_err(py_err)?;
        Ok((Dataset { inner: a }, Dataset { inner: b }))
    }

    fn __len__(&self) -> usize {
        self.inner.n_rows()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(n_rows={}, n_features={}, n_classes={})",
            self.inner.n_rows(),
            self.inner.n_features(),
            self.inner.n_classes()
        )
    }
}

/// Binary decision tree.
#[pyclass(frozen, skip_from_py_object, module = "pymsi")]
#[derive(Clone)]
struct Tree {
    inner: msi_tree::Tree,
}

#[pymethods]
impl Tree {
    /// Parses the text written by `to_text` or `serialize`.
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(Tree {
            inner: Model::parse(text).map_err(py_err)?.tree,
        })
    }

    fn predict(&self, x: Vec<f64>) -> PyResult<usize> {
        self.inner.predict(&x).map_err(py_err)
    }

    fn predict_all(&self, data: &Dataset) -> PyResult<Vec<usize>> {
        self.inner.predict_all(&data.inner).map_err(py_err)
    }

    fn accuracy(&self, data: &Dataset) -> PyResult<f64> {
        self.inner.accuracy(&data.inner).map_err(py_err)
    }

    /// Indices of the rows the tree gets wrong.
    fn misclassified(&self, data: &Dataset) -> PyResult<Vec<usize>> {
        Ok(self
            .inner
            .misclassified(&data.inner)
            .map_err(py_err)?
            .into_rows())
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.inner.node_count()
    }

    #[getter]
    fn internal_count(&self) -> usize {
        self.inner.internal_count()
    }

    #[getter]
    fn max_depth(&self) -> usize {
        self.inner.max_depth()
    }

    fn serialize(&self) -> String {
        self.inner.serialize()
    }

    /// Model file text: a header line with attribute count and labels, then
    /// the tree.
    fn to_text(&self, n_classes: usize) -> String {
        Model::new(self.inner.clone(), n_classes).to_text()
    }

    fn __repr__(&self) -> String {
        format!(
            "Tree(nodes={}, depth={})",
            self.inner.node_count(),
            self.inner.max_depth()
        )
    }

    fn __str__(&self) -> String {
        self.inner.serialize()
    }
}

/// (inaccuracy, surfeit, combined) of a tree on a dataset.
#[pyfunction]
#[pyo3(signature = (tree, data, compressor = "bz2", combiner = "harmonic"))]
fn cost(
    tree: &Tree,
    data: &Dataset,
    compressor: &str,
    combiner: &str,
) -> PyResult<(f64, f64, f64)> {
    let cfg = msi_config(compressor, combiner)?;
    let c = msi_tree::cost_of(&tree.inner, &data.inner, cfg).map_err(py_err)?;
    Ok((c.inaccuracy, c.surfeit, c.combined))
}

/// (leaf, feature, threshold, cost_before, cost_after)
type TraceRow = (usize, usize, f64, f64, f64);

/// Grows an MSI tree. Returns the tree and its growth trace as a list of
/// (leaf, feature, threshold, cost_before, cost_after).
#[pyfunction]
#[pyo3(signature = (data, compressor = "bz2", combiner = "harmonic"))]
fn build_tree(
    py: Python<'_>,
    data: &Dataset,
    compressor: &str,
    combiner: &str,
) -> PyResult<(Tree, Vec<TraceRow>)> {
    let cfg = msi_config(compressor, combiner)?;
    let (tree, trace) = py
        .detach(|| msi_tree::build_tree(&data.inner, cfg))
        .map_err(py_err)?;
    let steps = trace
        .steps
        .iter()
        .map(|s| {
            (
                s.leaf.index(),
                s.split.feature,
                s.split.threshold,
                s.before.combined,
                s.after.combined,
            )
        })
        .collect();
    Ok((Tree { inner: tree }, steps))
}

#[pyfunction]
#[pyo3(signature = (data, min_samples_split = 5, min_samples_leaf = 1, max_depth = None))]
fn build_greedy_tree(
    data: &Dataset,
    min_samples_split: usize,
    min_samples_leaf: usize,
    max_depth: Option<usize>,
) -> PyResult<Tree> {
    let cfg = GreedyConfig {
        min_samples_split,
        min_samples_leaf,
        max_depth,
    };
    Ok(Tree {
        inner: msi_tree::build_greedy_tree(&data.inner, cfg).map_err(py_err)?,
    })
}

/// Lowest weighted-entropy split as (feature, threshold), or None.
#[pyfunction]
fn best_split(data: &Dataset) -> Option<(usize, f64)> {
    msi_tree::best_split(&data.inner.all()).map(|s| (s.feature, s.threshold))
}

#[pyfunction]
fn compressed_length(compressor: &str, data: &[u8]) -> PyResult<usize> {
    let kind = compressor.parse::<CompressorKind>().map_err(py_err)?;
    msi_tree::compressed_length(kind, data).map_err(py_err)
}

#[pyfunction]
fn combine(combiner: &str, inaccuracy: f64, surfeit: f64) -> PyResult<f64> {
    let kind = combiner.parse::<CombinerKind>().map_err(py_err)?;
    Ok(msi_tree::combine(kind, inaccuracy, surfeit))
}

#[pyfunction]
#[pyo3(signature = (std_dev, points_per_blob = 50, seed = 0))]
fn make_blobs(std_dev: f64, points_per_blob: usize, seed: u64) -> PyResult<Dataset> {
    Ok(Dataset {
        inner: msi_tree::make_blobs(std_dev, points_per_blob, seed).map_err(py_err)?,
    })
}

#[pyfunction]
#[pyo3(signature = (seed = 0))]
fn make_error_point_dataset(seed: u64) -> Dataset {
    Dataset {
        inner: msi_tree::make_error_point_dataset(seed),
    }
}

/// Blob sweep comparing MSI with greedy. Returns the pooled aggregate rows
/// as dicts.
#[pyfunction]
#[pyo3(signature = (std_start = 2.5, std_end = 4.5, std_step = 0.25, trials_per_std = 20, points_per_blob = 50, seed = 0, min_samples_leaf = 1))]
#[allow(clippy::too_many_arguments)]
fn blob_sweep(
    py: Python<'_>,
    std_start: f64,
    std_end: f64,
    std_step: f64,
    trials_per_std: usize,
    points_per_blob: usize,
    seed: u64,
    min_samples_leaf: usize,
) -> PyResult<Vec<Py<pyo3::types::PyDict>>> {
    let cfg = BlobSweepConfig {
        std_start,
        std_end,
        std_step,
        trials_per_std,
        points_per_blob,
        base_seed: seed,
    };
    let greedy = GreedyConfig::default().with_min_samples_leaf(min_samples_leaf);
    let report = py
        .detach(|| bench::run_blob_sweep(&cfg, MsiConfig::default(), greedy))
        .map_err(py_err)?;
    report
        .overall_rows()
        .map(|r| {
            let d = pyo3::types::PyDict::new(py);
            d.set_item("algorithm", &r.algorithm)?;
            d.set_item("variant", &r.variant)?;
            d.set_item("trials", r.trials)?;
            d.set_item("mean_accuracy", r.mean_accuracy)?;
            d.set_item("mean_nodes", r.mean_nodes)?;
            d.set_item("std_nodes", r.std_nodes)?;
            d.set_item("mean_depth", r.mean_depth)?;
            Ok(d.unbind())
        })
        .collect()
}

#[pymodule]
fn pymsi(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Dataset>()?;
    m.add_class::<Tree>()?;
    m.add_function(wrap_pyfunction!(build_tree, m)?)?;
    m.add_function(wrap_pyfunction!(build_greedy_tree, m)?)?;
    m.add_function(wrap_pyfunction!(cost, m)?)?;
    m.add_function(wrap_pyfunction!(best_split, m)?)?;
    m.add_function(wrap_pyfunction!(compressed_length, m)?)?;
    m.add_function(wrap_pyfunction!(combine, m)?)?;
    m.add_function(wrap_pyfunction!(make_blobs, m)?)?;
    m.add_function(wrap_pyfunction!(make_error_point_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(blob_sweep, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
