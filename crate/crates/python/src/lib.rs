//! Python bindings: contingency tables, dependence measures, data loading and
//! the three selectors.

use std::path::PathBuf;

use llds_core::dataio::{self, DatasetSchema, TableReport};
use llds_core::search::subset_table;
use llds_core::{
    metrics, Column, Error, FeatureSubset, Mode, QuantileSpec, SearchConfig, SearchOutcome, Window,
};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn json_loads<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

/// Counts of a feature tuple crossed with a target.
#[pyclass(name = "JointTable", module = "llds", frozen)]
struct PyJointTable {
    inner: llds_core::JointTable,
}

#[pymethods]
impl PyJointTable {
    #[new]
    #[pyo3(signature = (counts, x_labels=None, y_labels=None))]
    fn new(counts: Vec<Vec<u64>>, x_labels: Option<Vec<String>>, y_labels: Option<Vec<String>>) -> PyResult<Self> {
        let nx = counts.len();
        let ny = counts.first().map_or(0, Vec::len);
        let x_labels = x_labels.unwrap_or_else(|| (1..=nx).map(|i| i.to_string()).collect());
        let y_labels = y_labels.unwrap_or_else(|| (1..=ny).map(|i| i.to_string()).collect());
        let inner = llds_core::JointTable::from_counts(x_labels, y_labels, &counts).map_err(to_py)?;
        Ok(PyJointTable { inner })
    }

    #[getter]
    fn x_labels(&self) -> Vec<String> {
        self.inner.x_labels().to_vec()
    }

    #[getter]
    fn y_labels(&self) -> Vec<String> {
        self.inner.y_labels().to_vec()
    }

    #[getter]
    fn counts(&self) -> Vec<Vec<u64>> {
        self.inner.count_matrix()
    }

    #[getter]
    fn total(&self) -> u64 {
        self.inner.total()
    }

    fn lift(&self) -> PyResult<Vec<Vec<f64>>> {
        let l = metrics::lift(&self.inner).map_err(to_py)?;
        Ok((0..self.inner.n_x()).map(|x| l.row(x).to_vec()).collect())
    }

    fn mutual_information(&self) -> PyResult<f64> {
        metrics::mutual_information(&self.inner).map_err(to_py)
    }

    fn conditional_entropy(&self) -> PyResult<f64> {
        metrics::conditional_entropy(&self.inner).map_err(to_py)
    }

    fn eta_global(&self) -> PyResult<f64> {
        metrics::eta_global(&self.inner).map_err(to_py)
    }

    /// η restricted to the rows whose indices are in `members`.
    fn eta_window(&self, members: Vec<usize>) -> PyResult<f64> {
        let w = Window::new(members).map_err(to_py)?;
        metrics::eta_window(&self.inner, &w).map_err(to_py)
    }

    fn render(&self) -> PyResult<String> {
        let l = metrics::lift(&self.inner).map_err(to_py)?;
        Ok(dataio::render_lift_table(&l))
    }

    fn __repr__(&self) -> String {
        format!(
            "JointTable({} x {}, total={})",
            self.inner.n_x(),
            self.inner.n_y(),
            self.inner.total()
        )
    }
}

/// A loaded row set with one categorical target.
#[pyclass(name = "Dataset", module = "llds", frozen)]
struct PyDataset {
    inner: llds_core::Dataset,
}

impl PyDataset {
    fn features(&self, names: Option<Vec<String>>) -> PyResult<Vec<usize>> {
        let data = &self.inner;
        match names {
            Some(names) => names
                .iter()
                .map(|n| {
                    data.column_index(n)
                        .filter(|&c| c != data.target())
                        .ok_or_else(|| PyValueError::new_err(format!("'{n}' is not a feature column")))
                })
                .collect(),
            None => {
                let all = data.feature_columns();
                let continuous: Vec<usize> = all
                    .iter()
                    .copied()
                    .filter(|&c| matches!(data.column(c), Column::Continuous(_)))
                    .collect();
                Ok(if continuous.is_empty() { all } else { continuous })
            }
        }
    }

    fn mode(&self, features: &[usize], quantiles: Option<Vec<f64>>) -> PyResult<Mode> {
        let continuous = features
            .iter()
            .any(|&c| matches!(self.inner.column(c), Column::Continuous(_)));
        if !continuous {
            return Ok(Mode::Categorical);
        }
        let quantiles = match quantiles {
            Some(p) => QuantileSpec::new(p).map_err(to_py)?,
            None => QuantileSpec::tertiles(),
        };
        Ok(Mode::JointDiscretized { quantiles })
    }

    #[allow(clippy::too_many_arguments)]
    fn search<'py>(
        &self,
        py: Python<'py>,
        target_value: Option<String>,
        window: bool,
        features: Option<Vec<String>>,
        max_k: Option<usize>,
        min_support: f64,
        max_window_cells: Option<usize>,
        top_n: usize,
        workers: usize,
        quantiles: Option<Vec<f64>>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let features = self.features(features)?;
        let config = SearchConfig {
            max_k: max_k.unwrap_or(features.len()).min(features.len()),
            min_support,
            max_window_cells,
            mode: self.mode(&features, quantiles)?,
            top_n,
            workers,
        };
        let data = &self.inner;
        let outcome: SearchOutcome = py
            .detach(|| match &target_value {
                Some(y) => llds_core::select_profile(data, &features, y, &config),
                None if window => llds_core::select_window(data, &features, &config),
                None => llds_core::select_global(data, &features, &config),
            })
            .map_err(to_py)?;
        let text = serde_json::to_string(&outcome).map_err(|e| PyValueError::new_err(e.to_string()))?;
        json_loads(py, &text)
    }
}

#[pymethods]
impl PyDataset {
    #[getter]
    fn names(&self) -> Vec<String> {
        self.inner.names().to_vec()
    }

    #[getter]
    fn n_rows(&self) -> usize {
        self.inner.n_rows()
    }

    #[getter]
    fn rejected_rows(&self) -> usize {
        self.inner.rejected_rows()
    }

    #[getter]
    fn target(&self) -> String {
        self.inner.name(self.inner.target()).to_string()
    }

    /// Joint table of `features` against the target over complete cases;
    /// continuous features are jointly discretized.
    #[pyo3(signature = (features, quantiles=None))]
    fn table(&self, features: Vec<String>, quantiles: Option<Vec<f64>>) -> PyResult<PyJointTable> {
        let columns = self.features(Some(features))?;
        let config = SearchConfig {
            mode: self.mode(&columns, quantiles)?,
            ..SearchConfig::default()
        };
        let subset = FeatureSubset::new(columns).map_err(to_py)?;
        let (inner, _) = subset_table(&self.inner, &subset, &config).map_err(to_py)?;
        Ok(PyJointTable { inner })
    }

    /// Subsets ranked by global η. Returns a dict with `candidates`,
    /// `skipped` and `subsets_evaluated`.
    #[pyo3(signature = (features=None, max_k=None, min_support=0.0, top_n=10, workers=1, quantiles=None))]
    #[allow(clippy::too_many_arguments)]
    fn select_global<'py>(
        &self,
        py: Python<'py>,
        features: Option<Vec<String>>,
        max_k: Option<usize>,
        min_support: f64,
        top_n: usize,
        workers: usize,
        quantiles: Option<Vec<f64>>,
    ) -> PyResult<Bound<'py, PyAny>> {
        self.search(py, None, false, features, max_k, min_support, None, top_n, workers, quantiles)
    }

    #[pyo3(signature = (features=None, max_k=None, min_support=0.0, max_window_cells=None, top_n=10, workers=1, quantiles=None))]
    #[allow(clippy::too_many_arguments)]
    fn select_window<'py>(
        &self,
        py: Python<'py>,
        features: Option<Vec<String>>,
        max_k: Option<usize>,
        min_support: f64,
        max_window_cells: Option<usize>,
        top_n: usize,
        workers: usize,
        quantiles: Option<Vec<f64>>,
    ) -> PyResult<Bound<'py, PyAny>> {
        self.search(py, None, true, features, max_k, min_support, max_window_cells, top_n, workers, quantiles)
    }

    #[pyo3(signature = (target_value, features=None, max_k=None, min_support=0.0, top_n=10, workers=1, quantiles=None))]
    #[allow(clippy::too_many_arguments)]
    fn select_profile<'py>(
        &self,
        py: Python<'py>,
        target_value: String,
        features: Option<Vec<String>>,
        max_k: Option<usize>,
        min_support: f64,
        top_n: usize,
        workers: usize,
        quantiles: Option<Vec<f64>>,
    ) -> PyResult<Bound<'py, PyAny>> {
        self.search(py, Some(target_value), false, features, max_k, min_support, None, top_n, workers, quantiles)
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset({} rows, {} columns, target={:?})",
            self.inner.n_rows(),
            self.inner.names().len(),
            self.target()
        )
    }
}

#[pyfunction]
#[pyo3(signature = (path, target, names=None, header=true, continuous=Vec::new(), groups=Vec::new(), ignore=Vec::new(), missing="?".to_string(), delimiter=','))]
#[allow(clippy::too_many_arguments)]
fn load_csv(
    path: PathBuf,
    target: String,
    names: Option<Vec<String>>,
    header: bool,
    continuous: Vec<String>,
    groups: Vec<String>,
    ignore: Vec<String>,
    missing: String,
    delimiter: char,
) -> PyResult<PyDataset> {
    let schema = DatasetSchema {
        names,
        target,
        continuous,
        groups,
        ignore,
        missing,
        delimiter,
        header,
    };
    let inner = dataio::load_csv(&path, &schema).map_err(to_py)?;
    Ok(PyDataset { inner })
}

/// Shannon entropy in nats.
#[pyfunction]
fn entropy(p: Vec<f64>) -> PyResult<f64> {
    metrics::entropy(&p).map_err(to_py)
}

/// Lift table report (counts, lifts, marginals and rendered text) as a dict.
#[pyfunction]
fn table_report<'py>(py: Python<'py>, table: &PyJointTable) -> PyResult<Bound<'py, PyAny>> {
    let report = TableReport::new(table.inner.x_labels().to_vec(), &table.inner).map_err(to_py)?;
    let text = serde_json::to_string(&report).map_err(|e| PyValueError::new_err(e.to_string()))?;
    json_loads(py, &text)
}

#[pymodule(name = "llds")]
fn llds_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", dataio::TOOL_VERSION)?;
    m.add_class::<PyJointTable>()?;
    m.add_class::<PyDataset>()?;
    m.add_function(wrap_pyfunction!(load_csv, m)?)?;
    m.add_function(wrap_pyfunction!(entropy, m)?)?;
    m.add_function(wrap_pyfunction!(table_report, m)?)?;
    Ok(())
}
