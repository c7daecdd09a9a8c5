//! Python bindings. Matrices cross the boundary as nested lists of complex
//! numbers (row major, square); phases come back as plain floats in
//! (-pi, pi]. Every validation error from the core library surfaces as a
//! `ValueError` carrying the original message.

use mixphase::dynamics as dyn_;
use mixphase::holonomy;
use mixphase::models;
use mixphase::state;
use mixphase::{C64, CMat};
use ndarray::Array1;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_matrix(rows: Vec<Vec<C64>>) -> PyResult<CMat> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square and non-empty"));
    }
    Ok(CMat::from_shape_fn((n, n), |(i, j)| rows[i][j]))
}

fn from_matrix(m: &CMat) -> Vec<Vec<C64>> {
    (0..m.nrows()).map(|i| m.row(i).to_vec()).collect()
}

fn to_density(rows: Vec<Vec<C64>>) -> PyResult<state::DensityMatrix> {
    state::DensityMatrix::new(to_matrix(rows)?).map_err(value_err)
}

/// Hamiltonian path that holds the provided samples, one per step cell.
fn sampled_path(hams: Vec<Vec<Vec<C64>>>, tau: f64) -> PyResult<(dyn_::HamiltonianPath, usize)> {
    let n = hams.len();
    if n == 0 {
        return Err(PyValueError::new_err("need at least one Hamiltonian sample"));
    }
    let mats: Vec<CMat> = hams.into_iter().map(to_matrix).collect::<PyResult<_>>()?;
    let path = dyn_::HamiltonianPath::new(tau, move |t| {
        let j = ((t / tau * n as f64).floor() as usize).min(n - 1);
        mats[j].clone()
    })
    .map_err(value_err)?;
    Ok((path, n))
}

/// Group phase of the one-dimensional wire model; returns (phase, branch).
#[pyfunction]
fn kitaev_theta_d(m: f64, c: f64, mm_tau: f64, beta_m: f64) -> PyResult<(f64, String)> {
    let (ph, br) = models::kitaev_theta_d(m, c, mm_tau, beta_m).map_err(value_err)?;
    Ok((ph.angle(), br.label().to_string()))
}

/// Group phase of the dimerized chain; returns (phase, branch).
#[pyfunction]
fn ssh_theta_d(j1_tau: f64, beta_j1: f64, j2_over_j1: f64) -> PyResult<(f64, String)> {
    let (ph, br) = models::ssh_theta_d(j1_tau, beta_j1, j2_over_j1).map_err(value_err)?;
    Ok((ph.angle(), br.label().to_string()))
}

/// Thermal oscillator phase from the closed form; returns (phase, branch).
#[pyfunction]
fn oscillator_theta_d(omega_tau: f64, beta_hw: f64) -> PyResult<(f64, String)> {
    let spec = models::OscillatorSpec::new(omega_tau, beta_hw, 1).map_err(value_err)?;
    let (ph, br) = models::oscillator_theta_d(&spec).map_err(value_err)?;
    Ok((ph.angle(), br.label().to_string()))
}

/// Thermal oscillator phase from the truncated trace sum. `n_max` defaults
/// to a cutoff with relative tail below 1e-8.
#[pyfunction]
#[pyo3(signature = (omega_tau, beta_hw, n_max = None))]
fn oscillator_theta_d_numeric(omega_tau: f64, beta_hw: f64, n_max: Option<usize>) -> PyResult<f64> {
    let n_max = n_max.unwrap_or_else(|| models::oscillator_auto_n_max(beta_hw));
    let spec = models::OscillatorSpec::new(omega_tau, beta_hw, n_max).map_err(value_err)?;
    Ok(models::oscillator_theta_d_numeric(&spec).map_err(value_err)?.angle())
}

/// Continuum limit -arctan(tau / beta*hbar) as a function of that ratio.
#[pyfunction]
fn continuum_theta_d(tau_over_beta_h: f64) -> PyResult<f64> {
    Ok(models::continuum_theta_d(tau_over_beta_h).map_err(value_err)?.angle())
}

/// Two-band lattice model over the Brillouin circle.
#[pyclass(skip_from_py_object)]
#[derive(Clone, Copy)]
struct TwoBandModel {
    spec: models::TwoBandSpec,
}

#[pymethods]
impl TwoBandModel {
    /// Wire model with mass `m`, velocity `c`, and energy scale `big_m`.
    #[staticmethod]
    fn kitaev(m: f64, c: f64, big_m: f64) -> PyResult<Self> {
        Ok(Self { spec: models::TwoBandSpec::kitaev(m, c, big_m).map_err(value_err)? })
    }

    /// Dimerized chain with hopping amplitudes `j1` and `j2`.
    #[staticmethod]
    fn ssh(j1: f64, j2: f64) -> PyResult<Self> {
        Ok(Self { spec: models::TwoBandSpec::ssh(j1, j2).map_err(value_err)? })
    }

    /// Band gap 2|d(k)| at crystal momentum `k`.
    fn gap(&self, k: f64) -> f64 {
        self.spec.gap(k)
    }

    /// Minimum of the gap over the Brillouin circle.
    fn min_gap(&self) -> f64 {
        self.spec.min_gap()
    }

    /// Bloch Hamiltonian at `k` as a 2x2 nested list; rejects gap closure.
    fn hamiltonian(&self, k: f64) -> PyResult<Vec<Vec<C64>>> {
        Ok(from_matrix(&self.spec.hamiltonian(k).map_err(value_err)?))
    }

    /// Group phase from midpoint quadrature of the Hamiltonian around the
    /// Brillouin circle at inverse temperature `beta`.
    #[pyo3(signature = (tau, beta, n_samples = 4096))]
    fn theta_d_numeric(&self, tau: f64, beta: f64, n_samples: usize) -> PyResult<f64> {
        Ok(models::two_band_theta_d_numeric(&self.spec, tau, beta, n_samples)
            .map_err(value_err)?
            .angle())
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.spec)
    }
}

/// Gibbs state exp(-beta H)/Z for a Hermitian matrix `h`.
#[pyfunction]
fn thermal_state(h: Vec<Vec<C64>>, beta: f64) -> PyResult<Vec<Vec<C64>>> {
    let h = to_matrix(h)?;
    let spec = state::ThermalSpec::new(beta).map_err(value_err)?;
    Ok(from_matrix(state::thermal_state(&h, &spec).map_err(value_err)?.matrix()))
}

/// Uhlmann fidelity of two density matrices.
#[pyfunction]
fn fidelity(rho1: Vec<Vec<C64>>, rho2: Vec<Vec<C64>>) -> PyResult<f64> {
    state::fidelity(&to_density(rho1)?, &to_density(rho2)?).map_err(value_err)
}

/// Geometric phase of a closed discrete loop of normalized state vectors,
/// from the overlap product.
#[pyfunction]
fn berry_phase(states: Vec<Vec<C64>>) -> PyResult<f64> {
    let states: Vec<Array1<C64>> = states.into_iter().map(Array1::from_vec).collect();
    Ok(holonomy::berry_phase_discrete(&states).map_err(value_err)?.angle())
}

/// Mixed-state holonomy phase of a closed loop of density matrices sampled
/// uniformly over a loop of duration `tau`.
#[pyfunction]
#[pyo3(signature = (rhos, tau = 1.0))]
fn uhlmann_phase(rhos: Vec<Vec<Vec<C64>>>, tau: f64) -> PyResult<f64> {
    let n = rhos.len();
    if n < 3 {
        return Err(PyValueError::new_err("need at least three samples around the loop"));
    }
    let lp = holonomy::ParamLoop::uniform(tau, n - 1).map_err(value_err)?;
    let rhos: Vec<state::DensityMatrix> = rhos.into_iter().map(to_density).collect::<PyResult<_>>()?;
    Ok(holonomy::uhlmann_phase(&lp, &rhos).map_err(value_err)?.angle())
}

/// Diagnostics for mixing anti-commutator flow into unitary dynamics:
/// dict with anticommutator_norm, max_abs_re_eigenvalue, and trace_drift.
#[pyfunction]
fn incompatibility_witness<'py>(
    py: Python<'py>,
    rho: Vec<Vec<C64>>,
    h_tilde: Vec<Vec<C64>>,
) -> PyResult<Bound<'py, PyDict>> {
    let rep = dyn_::incompatibility_witness(&to_density(rho)?, &to_matrix(h_tilde)?)
        .map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item("anticommutator_norm", rep.anticommutator_norm)?;
    d.set_item("max_abs_re_eigenvalue", rep.max_abs_re_eigenvalue)?;
    d.set_item("trace_drift", rep.trace_drift)?;
    Ok(d)
}

/// Group phase arg Tr[rho0 exp(-i integral H dt)] for a Hamiltonian given
/// as uniform samples over [0, tau], one per quadrature cell.
#[pyfunction]
fn dynamic_phase_quasistatic(
    rho0: Vec<Vec<C64>>,
    hams: Vec<Vec<Vec<C64>>>,
    tau: f64,
) -> PyResult<f64> {
    let rho0 = to_density(rho0)?;
    let (path, steps) = sampled_path(hams, tau)?;
    Ok(dyn_::dynamic_phase_quasistatic(&rho0, &path, steps).map_err(value_err)?.angle())
}

/// Unitary evolution of `rho0` under piecewise-constant Hamiltonian samples
/// over [0, tau]; returns the final density matrix.
#[pyfunction]
fn von_neumann_evolve(
    rho0: Vec<Vec<C64>>,
    hams: Vec<Vec<Vec<C64>>>,
    tau: f64,
) -> PyResult<Vec<Vec<C64>>> {
    let rho0 = to_density(rho0)?;
    let (path, steps) = sampled_path(hams, tau)?;
    Ok(from_matrix(dyn_::von_neumann_evolve(&rho0, &path, steps).map_err(value_err)?.matrix()))
}

#[pymodule]
fn mixphase_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<TwoBandModel>()?;
    m.add_function(wrap_pyfunction!(kitaev_theta_d, m)?)?;
    m.add_function(wrap_pyfunction!(ssh_theta_d, m)?)?;
    m.add_function(wrap_pyfunction!(oscillator_theta_d, m)?)?;
    m.add_function(wrap_pyfunction!(oscillator_theta_d_numeric, m)?)?;
    m.add_function(wrap_pyfunction!(continuum_theta_d, m)?)?;
    m.add_function(wrap_pyfunction!(thermal_state, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(berry_phase, m)?)?;
    m.add_function(wrap_pyfunction!(uhlmann_phase, m)?)?;
    m.add_function(wrap_pyfunction!(incompatibility_witness, m)?)?;
    m.add_function(wrap_pyfunction!(dynamic_phase_quasistatic, m)?)?;
    m.add_function(wrap_pyfunction!(von_neumann_evolve, m)?)?;
    Ok(())
}
