use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use hetlink_core::budget::{rate_report as core_rate_report, LinkStages};
use hetlink_core::qm_node::{self, CombParams, SpectralModel};
use hetlink_core::qstate::{CMatrix, DensityMatrix};
use hetlink_core::scenario::{run, ExperimentConfig, Scenario};
use hetlink_core::tomography;
use hetlink_core::Error;

fn to_py(e: Error) -> PyErr {
    match e.exit_code() {
        2 => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Parse JSON text into Python objects.
fn loads<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

/// Fraction of the double-Lorentzian photon spectrum inside the memory band.
#[pyfunction]
#[pyo3(signature = (gamma_natural=19.6, zeeman_split=11.22, qm_bandwidth=48.2, detuning=0.0))]
fn bandwidth_match(
    gamma_natural: f64,
    zeeman_split: f64,
    qm_bandwidth: f64,
    detuning: f64,
) -> PyResult<f64> {
    let m = SpectralModel {
        gamma_natural,
        zeeman_split,
        qm_bandwidth,
        detuning_df: detuning,
    };
    qm_node::bandwidth_match(&m).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (t_storage_ns, d=10.5, finesse=7.7, gamma_comb_khz=259.8))]
fn afc_efficiency(t_storage_ns: f64, d: f64, finesse: f64, gamma_comb_khz: f64) -> PyResult<f64> {
    let comb = CombParams {
        d,
        finesse,
        gamma_comb_khz,
        ..CombParams::default()
    };
    qm_node::afc_efficiency(&comb, t_storage_ns).map_err(to_py)
}

/// Count rates and efficiencies of the reference link as a dict.
#[pyfunction]
fn rate_report(py: Python<'_>) -> PyResult<Bound<'_, PyAny>> {
    let r = core_rate_report(&LinkStages::default()).map_err(to_py)?;
    loads(py, &serde_json::to_string(&r).map_err(json_err)?)
}

#[pyfunction]
fn default_config(py: Python<'_>) -> PyResult<Bound<'_, PyAny>> {
    loads(
        py,
        &serde_json::to_string(&ExperimentConfig::defaults()).map_err(json_err)?,
    )
}

/// Run a scenario and return its report. `config` is JSON text with the
/// same layout as `default_config()`; the built-in config is used without it.
#[pyfunction]
#[pyo3(signature = (scenario, seed=None, config=None))]
fn run_scenario<'py>(
    py: Python<'py>,
    scenario: &str,
    seed: Option<u64>,
    config: Option<&str>,
) -> PyResult<Bound<'py, PyAny>> {
    let mut cfg = match config {
        Some(text) => ExperimentConfig::from_json(text).map_err(to_py)?,
        None => ExperimentConfig::defaults(),
    };
    cfg.scenario = Some(scenario.parse::<Scenario>().map_err(to_py)?);
    if seed.is_some() {
        cfg.master_seed = seed;
    }
    let report = py.detach(|| run(&cfg)).map_err(to_py)?;
    loads(py, &report.to_json().map_err(to_py)?)
}

fn density(rows: Vec<Vec<Complex64>>) -> PyResult<DensityMatrix> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("density matrix must be square"));
    }
    DensityMatrix::new(CMatrix::from_fn(n, n, |i, j| rows[i][j])).map_err(to_py)
}

/// Largest CHSH value reachable with local spin measurements.
#[pyfunction]
fn chsh_optimal(rho: Vec<Vec<Complex64>>) -> PyResult<f64> {
    tomography::chsh_optimal(&density(rho)?).map_err(to_py)
}

#[pymodule]
fn hetlink(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(bandwidth_match, m)?)?;
    m.add_function(wrap_pyfunction!(afc_efficiency, m)?)?;
    m.add_function(wrap_pyfunction!(rate_report, m)?)?;
    m.add_function(wrap_pyfunction!(default_config, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(chsh_optimal, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
