//! Python bindings: finite-N and hard-edge distributions, the Tricomi
//! function, Pfaffians and the Monte Carlo sampler.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use wishart_edge::finite_n::{FiniteN, GapMethod, SpectralParams};
use wishart_edge::montecarlo::{sample_smallest as mc_sample, CorrelationSpec, MCConfig};
use wishart_edge::pfaffian::SkewKernelMatrix;
use wishart_edge::specfun::TricomiArgs;
use wishart_edge::{hard_edge, Error};

fn to_py(e: Error) -> PyErr {
    if e.is_parameter_error() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn model(n: usize, nu: usize, method: &str) -> PyResult<FiniteN> {
    let method = match method {
        "auto" => GapMethod::Auto,
        "pfaffian" => GapMethod::Pfaffian,
        other => return Err(PyValueError::new_err(format!("unknown method '{other}'"))),
    };
    FiniteN::with_method(SpectralParams::new(n, nu).map_err(to_py)?, method).map_err(to_py)
}

/// Gap probability E(t) for an N x (N+nu) real Gaussian matrix.
#[pyfunction]
#[pyo3(signature = (n, nu, t, method = "auto"))]
fn gap_probability(n: usize, nu: usize, t: Vec<f64>, method: &str) -> PyResult<Vec<f64>> {
    let m = model(n, nu, method)?;
    t.iter().map(|&x| m.gap(x).map_err(to_py)).collect()
}

/// Density of the smallest eigenvalue, -dE/dt.
#[pyfunction]
#[pyo3(signature = (n, nu, t, method = "auto"))]
fn smallest_pdf(n: usize, nu: usize, t: Vec<f64>, method: &str) -> PyResult<Vec<f64>> {
    let m = model(n, nu, method)?;
    t.iter().map(|&x| m.pdf(x).map_err(to_py)).collect()
}

/// Hard-edge gap probability on the microscopic scale u = 4Nt.
#[pyfunction]
fn limit_gap(nu: usize, u: Vec<f64>) -> PyResult<Vec<f64>> {
    u.iter().map(|&x| hard_edge::limit_gap(nu, x).map_err(to_py)).collect()
}

/// Hard-edge smallest-eigenvalue density.
#[pyfunction]
fn limit_pdf(nu: usize, u: Vec<f64>) -> PyResult<Vec<f64>> {
    u.iter().map(|&x| hard_edge::limit_pdf(nu, x).map_err(to_py)).collect()
}

/// Microscopic spectral density.
#[pyfunction]
fn micro_density(nu: usize, u: Vec<f64>) -> PyResult<Vec<f64>> {
    u.iter().map(|&x| hard_edge::micro_density(nu, x).map_err(to_py)).collect()
}

/// Tricomi U(a, b, z) as (mantissa, base-2 exponent) to survive overflow.
#[pyfunction]
fn tricomi_u(a: f64, b: f64, z: f64) -> PyResult<(f64, i64)> {
    let v = wishart_edge::specfun::tricomi_u(TricomiArgs::new(a, b, z).map_err(to_py)?).map_err(to_py)?;
    Ok((v.mantissa(), v.exponent()))
}

/// Pfaffian of a skew-symmetric matrix given as a list of rows.
#[pyfunction]
fn pfaffian(rows: Vec<Vec<f64>>) -> PyResult<f64> {
    let n = rows.len();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(PyValueError::new_err("matrix must be square"));
        }
        for j in 0..n {
            if (row[j] + rows[j][i]).abs() > 1e-12 * row[j].abs().max(1.0) {
                return Err(PyValueError::new_err(format!("matrix is not skew-symmetric at ({i}, {j})")));
            }
        }
    }
    let m = SkewKernelMatrix::from_upper_f64(&rows);
    Ok(wishart_edge::pfaffian::pfaffian(&m).map_err(to_py)?.to_f64())
}

/// Smallest eigenvalue of W Wᵀ for `samples` independent draws.
#[pyfunction]
#[pyo3(signature = (n, nu, samples, seed, corr = "identity", workers = 1))]
fn sample_smallest(
    py: Python<'_>,
    n: usize,
    nu: usize,
    samples: usize,
    seed: u64,
    corr: &str,
    workers: usize,
) -> PyResult<Vec<f64>> {
    let cfg = MCConfig {
        workers,
        correlation: CorrelationSpec::parse(corr, n).map_err(to_py)?,
        ..MCConfig::new(SpectralParams::new(n, nu).map_err(to_py)?, samples, seed)
    };
    let spec = py.detach(|| mc_sample(&cfg)).map_err(to_py)?;
    Ok(spec.smallest)
}

#[pymodule]
fn pywishart(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(gap_probability, m)?)?;
    m.add_function(wrap_pyfunction!(smallest_pdf, m)?)?;
    m.add_function(wrap_pyfunction!(limit_gap, m)?)?;
    m.add_function(wrap_pyfunction!(limit_pdf, m)?)?;
    m.add_function(wrap_pyfunction!(micro_density, m)?)?;
    m.add_function(wrap_pyfunction!(tricomi_u, m)?)?;
    m.add_function(wrap_pyfunction!(pfaffian, m)?)?;
    m.add_function(wrap_pyfunction!(sample_smallest, m)?)?;
    Ok(())
}
