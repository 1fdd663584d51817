//! Python bindings: `import firewall_percolation`.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use ::firewall_percolation as core;
use core::harness::{self, ExperimentConfig};
use core::{EpidemicParams, FirewallPolicy, PolicyKind, SpanningRule, TorusRegion};

fn to_py(err: core::Error) -> PyErr {
    match err {
        core::Error::Io { .. } => PyIOError::new_err(err.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn json_err(err: serde_json::Error) -> PyErr {
    PyValueError::new_err(err.to_string())
}

/// Converts any serializable value into plain Python objects via `json`.
fn to_python<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(json_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn config_from(py: Python<'_>, config: Option<&Bound<'_, PyAny>>) -> PyResult<ExperimentConfig> {
    match config {
        None => Ok(ExperimentConfig::default()),
        Some(obj) => {
            let text: String = py.import("json")?.call_method1("dumps", (obj,))?.extract()?;
            ExperimentConfig::from_json_str(&text).map_err(to_py)
        }
    }
}

fn check_mask(mask: &[bool], n: usize) -> PyResult<()> {
    if mask.len() != n {
        return Err(PyValueError::new_err(format!(
            "mask has {} entries but the graph has {n} devices",
            mask.len()
        )));
    }
    Ok(())
}

/// Device locations on a wrap-around square.
#[pyclass(name = "DeviceSet", module = "firewall_percolation", frozen, from_py_object)]
#[derive(Clone)]
struct PyDeviceSet {
    inner: core::DeviceSet,
}

#[pymethods]
impl PyDeviceSet {
    #[staticmethod]
    fn from_positions(side_length: f64, positions: Vec<(f64, f64)>) -> PyResult<Self> {
        let region = TorusRegion::new(side_length).map_err(to_py)?;
        let inner = core::DeviceSet::from_positions(region, positions.into_iter().map(|(x, y)| core::Point::new(x, y)))
            .map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn side_length(&self) -> f64 {
        self.inner.region().side_length()
    }

    #[getter]
    fn count(&self) -> usize {
        self.inner.count()
    }

    #[getter]
    fn positions(&self) -> Vec<(f64, f64)> {
        self.inner.positions().iter().map(|p| (p.x, p.y)).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.count()
    }

    fn __repr__(&self) -> String {
        format!(
            "DeviceSet(count={}, side_length={})",
            self.inner.count(),
            self.inner.region().side_length()
        )
    }
}

/// Range-based geometric graph over a device set.
#[pyclass(name = "Graph", module = "firewall_percolation", frozen)]
struct PyGraph {
    inner: core::AdjacencyGraph,
}

#[pymethods]
impl PyGraph {
    #[getter]
    fn vertex_count(&self) -> usize {
        self.inner.vertex_count()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    #[getter]
    fn range(&self) -> f64 {
        self.inner.range()
    }

    #[getter]
    fn devices(&self) -> PyDeviceSet {
        PyDeviceSet {
            inner: self.inner.devices().clone(),
        }
    }

    fn neighbors(&self, v: usize) -> PyResult<Vec<usize>> {
        if v >= self.inner.vertex_count() {
            return Err(to_py(core::Error::DeviceOutOfRange(v)));
        }
        Ok(self.inner.neighbors(v).to_vec())
    }

    fn degrees(&self) -> Vec<usize> {
        self.inner.degrees()
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(vertices={}, edges={}, range={})",
            self.inner.vertex_count(),
            self.inner.edge_count(),
            self.inner.range()
        )
    }
}

#[pyfunction]
fn sample_ppp(side_length: f64, intensity: f64, seed: u64) -> PyResult<PyDeviceSet> {
    let region = TorusRegion::new(side_length).map_err(to_py)?;
    let inner = core::sample_ppp(region, intensity, seed).map_err(to_py)?;
    Ok(PyDeviceSet { inner })
}

#[pyfunction]
fn torus_distance(p: (f64, f64), q: (f64, f64), side_length: f64) -> PyResult<f64> {
    let region = TorusRegion::new(side_length).map_err(to_py)?;
    let p = region.normalize(core::Point::new(p.0, p.1));
    let q = region.normalize(core::Point::new(q.0, q.1));
    Ok(core::torus_distance(p, q, &region))
}

#[pyfunction]
fn build_rgg(devices: &PyDeviceSet, range: f64) -> PyResult<PyGraph> {
    let inner = core::build_rgg(&devices.inner, range).map_err(to_py)?;
    Ok(PyGraph { inner })
}

#[pyfunction]
fn connected_components<'py>(py: Python<'py>, graph: &PyGraph, mask: Vec<bool>) -> PyResult<Bound<'py, PyAny>> {
    check_mask(&mask, graph.inner.vertex_count())?;
    to_python(py, &core::connected_components(&graph.inner, &mask))
}

/// Returns `(firewall_ids, dc_relaxed)`.
#[pyfunction]
#[pyo3(signature = (graph, policy, fraction, seed, min_distance=None))]
fn select_firewalls(
    graph: &PyGraph,
    policy: &str,
    fraction: f64,
    seed: u64,
    min_distance: Option<f64>,
) -> PyResult<(Vec<usize>, bool)> {
    let kind: PolicyKind = policy.parse().map_err(to_py)?;
    let policy = FirewallPolicy::new(kind, min_distance.unwrap_or(400.0)).map_err(to_py)?;
    let sel = core::select_firewalls(&graph.inner, &policy, fraction, seed).map_err(to_py)?;
    Ok((sel.ids, sel.dc_relaxed))
}

#[pyfunction]
fn apply_secured_zones<'py>(
    py: Python<'py>,
    devices: &PyDeviceSet,
    firewall_ids: Vec<usize>,
    zone_radius: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let layout = core::apply_secured_zones(&devices.inner, &firewall_ids, zone_radius).map_err(to_py)?;
    to_python(py, &layout)
}

#[pyfunction]
#[pyo3(signature = (graph, susceptible, rule="both"))]
fn detect_spanning<'py>(
    py: Python<'py>,
    graph: &PyGraph,
    susceptible: Vec<bool>,
    rule: &str,
) -> PyResult<Bound<'py, PyAny>> {
    check_mask(&susceptible, graph.inner.vertex_count())?;
    let rule: SpanningRule = rule.parse().map_err(to_py)?;
    to_python(py, &core::detect_spanning(&graph.inner, &susceptible, rule))
}

#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (graph, susceptible, seed_device, beta, delta, rng_seed, t_max=f64::INFINITY))]
fn simulate_sir<'py>(
    py: Python<'py>,
    graph: &PyGraph,
    susceptible: Vec<bool>,
    seed_device: usize,
    beta: f64,
    delta: f64,
    rng_seed: u64,
    t_max: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let params = EpidemicParams::new(beta, delta, t_max).map_err(to_py)?;
    let trace = core::simulate_sir(&graph.inner, &susceptible, seed_device, &params, rng_seed).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("seed_device", trace.seed_device)?;
    out.set_item("ever_infected", trace.ever_infected.clone())?;
    let events = PyList::empty(py);
    for e in &trace.events {
        events.append((e.time, e.device, e.transition.as_str()))?;
    }
    out.set_item("events", events)?;
    let counts: Vec<(f64, usize, usize, usize)> = trace
        .counts_over_time
        .iter()
        .map(|&(t, c)| (t, c.s, c.i, c.r))
        .collect();
    out.set_item("counts", counts)?;
    Ok(out.into_any())
}

/// Returns a list of `(t, S, I, R)` tuples.
#[pyfunction]
fn solve_mean_field_sir(
    population: u64,
    contact_rate: f64,
    delta: f64,
    initial_infected: u64,
    t_max: f64,
    dt: f64,
) -> PyResult<Vec<(f64, f64, f64, f64)>> {
    let traj = core::solve_mean_field_sir(population, contact_rate, delta, initial_infected, t_max, dt)
        .map_err(to_py)?;
    Ok(traj.into_iter().map(|p| (p.t, p.s, p.i, p.r)).collect())
}

/// One realization with the given (or default) experiment parameters.
#[pyfunction]
#[pyo3(signature = (policy, fraction, seed, config=None))]
fn run_single<'py>(
    py: Python<'py>,
    policy: &str,
    fraction: f64,
    seed: u64,
    config: Option<&Bound<'py, PyAny>>,
) -> PyResult<Bound<'py, PyAny>> {
    let config = config_from(py, config)?;
    let kind: PolicyKind = policy.parse().map_err(to_py)?;
    let policy = FirewallPolicy::new(kind, config.default_min_distance()).map_err(to_py)?;
    let params = config.run_params().map_err(to_py)?;
    let (outcome, layout) = py
        .detach(|| harness::run_single(&params, &policy, fraction, seed))
        .map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("percolates", outcome.percolates)?;
    out.set_item("wraps_x", outcome.wraps_x)?;
    out.set_item("wraps_y", outcome.wraps_y)?;
    out.set_item("num_clusters", outcome.cluster_report.num_clusters)?;
    out.set_item("max_cluster_size", outcome.cluster_report.max_cluster_size)?;
    out.set_item("layout", to_python(py, &layout)?)?;
    Ok(out.into_any())
}

/// Full sweep; `config` is a dict with `ExperimentConfig` field names.
#[pyfunction]
#[pyo3(signature = (config=None, workers=1))]
fn run_sweep<'py>(py: Python<'py>, config: Option<&Bound<'py, PyAny>>, workers: usize) -> PyResult<Bound<'py, PyAny>> {
    let config = config_from(py, config)?;
    let result = py.detach(|| harness::run_sweep(&config, workers)).map_err(to_py)?;
    to_python(py, &result)
}

/// Critical fraction from parallel lists; returns `(fraction, interpolated)`,
/// `None` where the threshold is never reached.
#[pyfunction]
fn estimate_critical_percentage(
    fractions: Vec<f64>,
    probabilities: Vec<f64>,
    threshold: f64,
) -> PyResult<(Option<f64>, Option<f64>)> {
    if fractions.len() != probabilities.len() {
        return Err(PyValueError::new_err("fractions and probabilities differ in length"));
    }
    let rows: Vec<harness::SweepRow> = fractions
        .iter()
        .zip(&probabilities)
        .map(|(&fraction, &p)| harness::SweepRow {
            policy: String::new(),
            fraction,
            runs: 0,
            outbreaks: 0,
            outbreak_probability: p,
            ci95_halfwidth: 0.0,
            mean_num_clusters: 0.0,
            mean_max_cluster_size: 0.0,
            mean_susceptible_count: 0.0,
            dc_relaxed_rate: 0.0,
        })
        .collect();
    let est = harness::estimate_critical_percentage(&rows, threshold).map_err(to_py)?;
    Ok((est.fraction, est.interpolated))
}

#[pymodule]
fn firewall_percolation(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDeviceSet>()?;
    m.add_class::<PyGraph>()?;
    m.add_function(wrap_pyfunction!(sample_ppp, m)?)?;
    m.add_function(wrap_pyfunction!(torus_distance, m)?)?;
    m.add_function(wrap_pyfunction!(build_rgg, m)?)?;
    m.add_function(wrap_pyfunction!(connected_components, m)?)?;
    m.add_function(wrap_pyfunction!(select_firewalls, m)?)?;
    m.add_function(wrap_pyfunction!(apply_secured_zones, m)?)?;
    m.add_function(wrap_pyfunction!(detect_spanning, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_sir, m)?)?;
    m.add_function(wrap_pyfunction!(solve_mean_field_sir, m)?)?;
    m.add_function(wrap_pyfunction!(run_single, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_critical_percentage, m)?)?;
    m.add("CSV_HEADER", harness::CSV_HEADER)?;
    m.add("__version__", harness::VERSION)?;
    Ok(())
}
