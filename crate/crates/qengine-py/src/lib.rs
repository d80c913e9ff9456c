//! Python bindings for the heat-engine library.
//!
//! Exposes the parameter type plus the main analysis entry points: steady
//! states (closed-form and numeric), first-order observables, counting
//! cumulants through all three routes, Fano decomposition, and the
//! classical/quantum uncertainty diagnostics. Complex matrices cross the
//! boundary as nested lists of Python complex numbers.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use qengine_core::bounds;
use qengine_core::engine::{occupations, EngineKind, EngineParams};
use qengine_core::fcs::{self, CountedObservable};
use qengine_core::steady::{self, DensityMatrix};

// ---------------------------------------------------------------------------
// Parameter type
// ---------------------------------------------------------------------------

fn parse_kind(kind: &str) -> PyResult<EngineKind> {
    match kind {
        "coherent" => Ok(EngineKind::Coherent),
        "incoherent" => Ok(EngineKind::Incoherent),
        other => Err(PyValueError::new_err(format!(
            "unknown kind `{other}` (expected `coherent` or `incoherent`)"
        ))),
    }
}

fn kind_label(kind: EngineKind) -> &'static str {
    match kind {
        EngineKind::Coherent => "coherent",
        EngineKind::Incoherent => "incoherent",
    }
}

fn parse_observable(name: &str) -> PyResult<CountedObservable> {
    CountedObservable::ALL
        .into_iter()
        .find(|o| o.label() == name)
        .ok_or_else(|| {
            PyValueError::new_err(format!(
                "unknown observable `{name}` (expected power, hot_current, cold_current, \
                 or photon_flux)"
            ))
        })
}

fn value_error<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Validated engine parameters: bath coupling, transition frequencies,
/// inverse temperatures, drive amplitude, and the engine kind.
#[pyclass(name = "EngineParams", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyEngineParams {
    inner: EngineParams,
}

#[pymethods]
impl PyEngineParams {
    #[new]
    fn new(
        kind: &str,
        gamma0: f64,
        omega_h: f64,
        omega_c: f64,
        beta_h: f64,
        beta_c: f64,
        alpha: f64,
    ) -> PyResult<Self> {
        let inner =
            EngineParams::new(parse_kind(kind)?, gamma0, omega_h, omega_c, beta_h, beta_c, alpha)
                .map_err(value_error)?;
        Ok(PyEngineParams { inner })
    }

    /// Builds parameters from target bath occupations instead of inverse
    /// temperatures (n = 0 encodes a zero-temperature bath).
    #[staticmethod]
    fn from_occupations(
        kind: &str,
        gamma0: f64,
        omega_h: f64,
        omega_c: f64,
        n_h: f64,
        n_c: f64,
        alpha: f64,
    ) -> PyResult<Self> {
        let inner = EngineParams::from_occupations(
            parse_kind(kind)?,
            gamma0,
            omega_h,
            omega_c,
            n_h,
            n_c,
            alpha,
        )
        .map_err(value_error)?;
        Ok(PyEngineParams { inner })
    }

    #[getter]
    fn kind(&self) -> &'static str {
        kind_label(self.inner.kind)
    }

    #[getter]
    fn gamma0(&self) -> f64 {
        self.inner.gamma0
    }

    #[getter]
    fn omega_h(&self) -> f64 {
        self.inner.omega_h
    }

    #[getter]
    fn omega_c(&self) -> f64 {
        self.inner.omega_c
    }

    #[getter]
    fn beta_h(&self) -> f64 {
        self.inner.beta_h
    }

    #[getter]
    fn beta_c(&self) -> f64 {
        self.inner.beta_c
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    /// True when the hot thermal exponent lies below the cold one, i.e. the
    /// point operates as an engine.
    fn engine_valid(&self) -> bool {
        self.inner.engine_valid()
    }

    /// Bath occupations (n_h, n_c) at the transition frequencies.
    fn occupations(&self) -> (f64, f64) {
        let occ = occupations(&self.inner);
        (occ.n_h, occ.n_c)
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "EngineParams(kind='{}', gamma0={}, omega_h={}, omega_c={}, beta_h={}, \
             beta_c={}, alpha={})",
            kind_label(p.kind),
            p.gamma0,
            p.omega_h,
            p.omega_c,
            p.beta_h,
            p.beta_c,
            p.alpha
        )
    }
}

// ---------------------------------------------------------------------------
// Report types
// ---------------------------------------------------------------------------

/// First-order steady-state observables.
#[pyclass(name = "Observables", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyObservables {
    #[pyo3(get)]
    power: f64,
    #[pyo3(get)]
    j_hot: f64,
    #[pyo3(get)]
    j_cold: f64,
    #[pyo3(get)]
    efficiency: f64,
    #[pyo3(get)]
    photon_flux: f64,
    #[pyo3(get)]
    entropy_rate: f64,
    #[pyo3(get)]
    coherence: f64,
    #[pyo3(get)]
    entropy_infinite: bool,
}

#[pymethods]
impl PyObservables {
    fn __repr__(&self) -> String {
        format!(
            "Observables(power={}, j_hot={}, j_cold={}, efficiency={}, photon_flux={}, \
             entropy_rate={}, coherence={})",
            self.power,
            self.j_hot,
            self.j_cold,
            self.efficiency,
            self.photon_flux,
            self.entropy_rate,
            self.coherence
        )
    }
}

/// Scaled cumulants of a counted observable: mean rate, variance rate, and
/// their noise-to-signal ratio variance/mean^2.
#[pyclass(name = "Cumulants", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyCumulants {
    #[pyo3(get)]
    mean: f64,
    #[pyo3(get)]
    variance: f64,
    #[pyo3(get)]
    nsr: f64,
}

#[pymethods]
impl PyCumulants {
    fn __repr__(&self) -> String {
        format!("Cumulants(mean={}, variance={}, nsr={})", self.mean, self.variance, self.nsr)
    }
}

/// Fano factor of the photon flux split into its population part and the
/// coherence-induced correction: f_total = f_pop - coherent_correction.
#[pyclass(name = "FanoReport", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyFanoReport {
    #[pyo3(get)]
    f_total: f64,
    #[pyo3(get)]
    f_pop: f64,
    #[pyo3(get)]
    coherent_correction: f64,
}

#[pymethods]
impl PyFanoReport {
    fn __repr__(&self) -> String {
        format!(
            "FanoReport(f_total={}, f_pop={}, coherent_correction={})",
            self.f_total, self.f_pop, self.coherent_correction
        )
    }
}

/// Classical and quantum uncertainty diagnostics at one parameter point.
#[pyclass(name = "TURReport", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyTURReport {
    #[pyo3(get)]
    q_value: f64,
    #[pyo3(get)]
    nsr: f64,
    #[pyo3(get)]
    entropy_rate: f64,
    #[pyo3(get)]
    upsilon: f64,
    #[pyo3(get)]
    psi: f64,
    #[pyo3(get)]
    f_bound: f64,
    #[pyo3(get)]
    slack: f64,
    #[pyo3(get)]
    ctur_violated: bool,
    #[pyo3(get)]
    qtur_ok: bool,
    #[pyo3(get)]
    infinite_entropy: bool,
}

#[pymethods]
impl PyTURReport {
    fn __repr__(&self) -> String {
        format!(
            "TURReport(q_value={}, nsr={}, entropy_rate={}, upsilon={}, psi={}, \
             f_bound={}, slack={}, ctur_violated={}, qtur_ok={})",
            self.q_value,
            self.nsr,
            self.entropy_rate,
            self.upsilon,
            self.psi,
            self.f_bound,
            self.slack,
            self.ctur_violated,
            self.qtur_ok
        )
    }
}

// ---------------------------------------------------------------------------
// Module functions
// ---------------------------------------------------------------------------

fn matrix_rows(rho: &DensityMatrix) -> Vec<Vec<Complex64>> {
    let d = rho.dim();
    (0..d).map(|i| (0..d).map(|j| rho.entry(i, j)).collect()).collect()
}

/// Steady state from the closed-form expressions, as nested lists of
/// complex entries.
#[pyfunction]
fn steady_state_closed(params: &PyEngineParams) -> PyResult<Vec<Vec<Complex64>>> {
    Ok(matrix_rows(&steady::steady_closed(&params.inner).map_err(value_error)?))
}

/// Steady state from the numeric kernel solve of the vectorized generator.
#[pyfunction]
fn steady_state_numeric(params: &PyEngineParams) -> PyResult<Vec<Vec<Complex64>>> {
    Ok(matrix_rows(&steady::steady_numeric_for(&params.inner).map_err(value_error)?))
}

/// l1 coherence (sum of off-diagonal magnitudes) of the steady state.
#[pyfunction]
fn coherence(params: &PyEngineParams) -> PyResult<f64> {
    Ok(steady::coherence_l1(&steady::steady_closed(&params.inner).map_err(value_error)?))
}

/// First-order observables: power, bath currents, efficiency, photon flux,
/// entropy production rate, and steady-state coherence.
#[pyfunction]
fn observables(params: &PyEngineParams) -> PyResult<PyObservables> {
    let o = steady::observables(&params.inner).map_err(value_error)?;
    Ok(PyObservables {
        power: o.power,
        j_hot: o.j_hot,
        j_cold: o.j_cold,
        efficiency: o.efficiency,
        photon_flux: o.photon_flux,
        entropy_rate: o.entropy_rate,
        coherence: o.coherence,
        entropy_infinite: o.entropy_infinite,
    })
}

/// Long-time cumulants of a counted observable (`power`, `hot_current`,
/// `cold_current`, `photon_flux`) through one of three routes:
/// `closed` (analytic), `finite_difference` (characteristic-polynomial
/// derivatives), or `branch` (tracked eigenvalue of the dressed generator).
#[pyfunction]
#[pyo3(signature = (params, observable, method = "closed"))]
fn cumulants(params: &PyEngineParams, observable: &str, method: &str) -> PyResult<PyCumulants> {
    let obs = parse_observable(observable)?;
    let (mean, variance, nsr) = match method {
        "closed" => {
            let r = fcs::cumulants_closed(&params.inner, obs).map_err(value_error)?;
            (r.mean, r.variance, r.nsr)
        }
        "finite_difference" => {
            let r = fcs::cumulants(&params.inner, obs).map_err(value_error)?;
            (r.mean, r.variance, r.nsr)
        }
        "branch" => {
            let (mean, variance) = fcs::lambda_cumulants(&params.inner, obs).map_err(value_error)?;
            (mean, variance, variance / (mean * mean))
        }
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown method `{other}` (expected closed, finite_difference, or branch)"
            )))
        }
    };
    Ok(PyCumulants { mean, variance, nsr })
}

/// Fano-factor decomposition of the photon flux.
#[pyfunction]
fn fano(params: &PyEngineParams) -> PyResult<PyFanoReport> {
    let r = bounds::fano(&params.inner).map_err(value_error)?;
    Ok(PyFanoReport {
        f_total: r.f_total,
        f_pop: r.f_pop,
        coherent_correction: r.coherent_correction,
    })
}

/// Classical uncertainty value through its two algebraic groupings (Q, D);
/// the library asserts their agreement.
#[pyfunction]
fn ctur(params: &PyEngineParams) -> PyResult<(f64, f64)> {
    bounds::ctur(&params.inner).map_err(value_error)
}

/// Quantum bound components (Upsilon, Psi, f) through the numeric
/// Drazin-inverse route.
#[pyfunction]
fn qtur_bound(params: &PyEngineParams) -> PyResult<(f64, f64, f64)> {
    bounds::qtur_bound(&params.inner).map_err(value_error)
}

/// Quantum bound f in closed form.
#[pyfunction]
fn qtur_bound_closed(params: &PyEngineParams) -> PyResult<f64> {
    bounds::qtur_bound_closed(&params.inner).map_err(value_error)
}

/// Full uncertainty diagnostics through the closed-form route.
#[pyfunction]
fn tur_report(params: &PyEngineParams) -> PyResult<PyTURReport> {
    let r = bounds::tur_report(&params.inner).map_err(value_error)?;
    Ok(PyTURReport {
        q_value: r.q_value,
        nsr: r.nsr,
        entropy_rate: r.entropy_rate,
        upsilon: r.upsilon,
        psi: r.psi,
        f_bound: r.f_bound,
        slack: r.slack,
        ctur_violated: r.ctur_violated,
        qtur_ok: r.qtur_ok,
        infinite_entropy: r.infinite_entropy,
    })
}

/// Drive amplitude at which the two engine kinds hold equal steady-state
/// coherence (0 when the cold bath is at zero temperature).
#[pyfunction]
fn critical_alpha(params: &PyEngineParams) -> PyResult<f64> {
    steady::critical_alpha(&params.inner).map_err(value_error)
}

#[pymodule]
fn qengine(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyEngineParams>()?;
    m.add_class::<PyObservables>()?;
    m.add_class::<PyCumulants>()?;
    m.add_class::<PyFanoReport>()?;
    m.add_class::<PyTURReport>()?;
    m.add_function(wrap_pyfunction!(steady_state_closed, m)?)?;
    m.add_function(wrap_pyfunction!(steady_state_numeric, m)?)?;
    m.add_function(wrap_pyfunction!(coherence, m)?)?;
    m.add_function(wrap_pyfunction!(observables, m)?)?;
    m.add_function(wrap_pyfunction!(cumulants, m)?)?;
    m.add_function(wrap_pyfunction!(fano, m)?)?;
    m.add_function(wrap_pyfunction!(ctur, m)?)?;
    m.add_function(wrap_pyfunction!(qtur_bound, m)?)?;
    m.add_function(wrap_pyfunction!(qtur_bound_closed, m)?)?;
    m.add_function(wrap_pyfunction!(tur_report, m)?)?;
    m.add_function(wrap_pyfunction!(critical_alpha, m)?)?;
    Ok(())
}
