//! Python module `vnsclust_py`.

use std::time::Duration;

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use vnsclust::harness::{generate_gaussian_mixture, MixtureSpec};
use vnsclust::{BigVnsParams, CentroidSet, DataMatrix, Error, LloydParams};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Usage(_) | Error::SpecFormat { .. } | Error::InvalidSolution { .. } => PyValueError::new_err(e.to_string()),
        Error::Ingestion { .. } | Error::Io(_) | Error::Csv(_) => PyIOError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<DataMatrix> {
    DataMatrix::from_rows(&rows).map_err(to_py)
}

fn rows_of(x: &DataMatrix) -> Vec<Vec<f64>> {
    x.iter_rows().map(<[f64]>::to_vec).collect()
}

/// Outcome of a clustering call.
#[pyclass(name = "ClusteringResult", frozen)]
struct PyClusteringResult {
    #[pyo3(get)]
    centroids: Vec<Vec<f64>>,
    #[pyo3(get)]
    labels: Vec<usize>,
    #[pyo3(get)]
    objective: f64,
    #[pyo3(get)]
    iterations: usize,
    #[pyo3(get)]
    elapsed: f64,
    /// Shaking power used at each iteration.
    #[pyo3(get)]
    p_trace: Vec<usize>,
    /// Best sample objective after each iteration.
    #[pyo3(get)]
    best_trace: Vec<f64>,
}

#[pymethods]
impl PyClusteringResult {
    fn __repr__(&self) -> String {
        format!(
            "ClusteringResult(k={}, objective={}, iterations={})",
            self.centroids.len(),
            self.objective,
            self.iterations
        )
    }
}

impl From<vnsclust::ClusteringResult> for PyClusteringResult {
    fn from(r: vnsclust::ClusteringResult) -> Self {
        Self {
            centroids: r.centroids.points().map(|(_, c)| c.to_vec()).collect(),
            labels: r.labels.into_labels(),
            objective: r.objective.value(),
            iterations: r.iterations,
            elapsed: r.elapsed.as_secs_f64(),
            p_trace: r.trace.iter().map(|t| t.p).collect(),
            best_trace: r.trace.iter().map(|t| t.best_sample_objective).collect(),
        }
    }
}

/// Sum of squared distances from each point to its nearest centroid.
#[pyfunction]
fn objective(data: Vec<Vec<f64>>, centroids: Vec<Vec<f64>>) -> PyResult<f64> {
    let x = matrix(data)?;
    vnsclust::objective(&x, &CentroidSet::from_points(centroids))
        .map(|f| f.value())
        .map_err(to_py)
}

/// Nearest-centroid labels and the objective.
#[pyfunction]
fn assign_points(data: Vec<Vec<f64>>, centroids: Vec<Vec<f64>>) -> PyResult<(Vec<usize>, f64)> {
    let x = matrix(data)?;
    let (labels, f) = vnsclust::assign_points(&x, &CentroidSet::from_points(centroids)).map_err(to_py)?;
    Ok((labels.into_labels(), f.value()))
}

/// Sampled VNS clustering; `baseline=True` gives Big-means.
#[pyfunction]
#[pyo3(signature = (data, k, sample_size, p_max=None, time_limit=1.0, max_iterations=None, seed=0, baseline=false))]
#[allow(clippy::too_many_arguments)]
fn big_vns_clust(
    py: Python<'_>,
    data: Vec<Vec<f64>>,
    k: usize,
    sample_size: usize,
    p_max: Option<usize>,
    time_limit: f64,
    max_iterations: Option<usize>,
    seed: u64,
    baseline: bool,
) -> PyResult<PyClusteringResult> {
    let x = matrix(data)?;
    let mut params = BigVnsParams::new(k, sample_size);
    if let Some(p) = p_max {
        params.p_max = p;
    }
    params.time_limit = Duration::try_from_secs_f64(time_limit)
        .map_err(|_| PyValueError::new_err(format!("bad time limit {time_limit}")))?;
    params.max_iterations = max_iterations;
    params.seed = seed;
    params.baseline_mode = baseline;
    py.allow_threads(|| vnsclust::big_vns_clust(&x, &params))
        .map(Into::into)
        .map_err(to_py)
}

/// K-means++ seeding (or `init`) followed by Lloyd on the full data.
#[pyfunction]
#[pyo3(signature = (data, k, seed=0, init=None))]
fn kmeans(py: Python<'_>, data: Vec<Vec<f64>>, k: usize, seed: u64, init: Option<Vec<Vec<f64>>>) -> PyResult<PyClusteringResult> {
    let x = matrix(data)?;
    let params = LloydParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    py.allow_threads(|| match init {
        Some(c) if c.len() != k => Err(Error::Usage(format!("init has {} centroids, k={k}", c.len()))),
        Some(c) => vnsclust::kmeans_full_from(&x, &CentroidSet::from_points(c), &params, &mut rng),
        None => vnsclust::kmeans_full(&x, k, &params, &mut rng),
    })
    .map(Into::into)
    .map_err(to_py)
}

/// Gaussian-mixture dataset from a built-in name or a mixture spec file.
#[pyfunction]
#[pyo3(signature = (spec="x1", seed=0))]
fn generate_mixture(spec: &str, seed: u64) -> PyResult<Vec<Vec<f64>>> {
    let spec = MixtureSpec::resolve(spec).map_err(to_py)?;
    generate_gaussian_mixture(&spec, seed).map(|x| rows_of(&x)).map_err(to_py)
}

/// `100 · (f − f*) / f*`.
#[pyfunction]
fn relative_error(f: f64, f_star: f64) -> PyResult<f64> {
    vnsclust::harness::relative_error(f, f_star).map_err(to_py)
}

#[pymodule]
fn vnsclust_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyClusteringResult>()?;
    m.add_function(wrap_pyfunction!(objective, m)?)?;
    m.add_function(wrap_pyfunction!(assign_points, m)?)?;
    m.add_function(wrap_pyfunction!(big_vns_clust, m)?)?;
    m.add_function(wrap_pyfunction!(kmeans, m)?)?;
    m.add_function(wrap_pyfunction!(generate_mixture, m)?)?;
    m.add_function(wrap_pyfunction!(relative_error, m)?)?;
    Ok(())
}
