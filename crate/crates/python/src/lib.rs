//! Python bindings: grids, spectral fields, states of either system,
//! time integration and the diagnostic suites.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use gaugewave::analysis::{self, Lemma28Draw};
use gaugewave::config::RunConfig;
use gaugewave::evolve::{self as ev, Formulation, IntegratorConfig, RunRow, RunStatus, Scheme, System};
use gaugewave::gauge::{coulomb_fix, make_admissible_mcsh, make_admissible_mkg, GaugeFunction, PhysParams};
use gaugewave::mcsh::McshState;
use gaugewave::mkg::MkgState;
use gaugewave::random::{random_field, seeded_rng, SpectrumProfile};
use gaugewave::{Complex64, Error, Reality, SpectralField};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyIOError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = String>>(s: &str) -> PyResult<T> {
    s.parse::<T>().map_err(PyValueError::new_err)
}

/// Periodic box `[0, L)^dim` with `n` points per axis.
#[pyclass(name = "Grid", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyGrid {
    inner: gaugewave::Grid,
}

#[pymethods]
impl PyGrid {
    #[new]
    fn new(dim: usize, n: usize, box_length: f64) -> PyResult<Self> {
        gaugewave::Grid::new(dim, n, box_length)
            .map(|inner| PyGrid { inner })
            .map_err(py_err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn box_length(&self) -> f64 {
        self.inner.box_length()
    }

    #[getter]
    fn nyquist_wavenumber(&self) -> f64 {
        self.inner.nyquist_wavenumber()
    }

    fn __repr__(&self) -> String {
        format!(
            "Grid(dim={}, n={}, box_length={})",
            self.inner.dim(),
            self.inner.n(),
            self.inner.box_length()
        )
    }
}

/// Band-limited scalar field stored as Fourier coefficients.
#[pyclass(name = "Field", frozen, from_py_object)]
#[derive(Clone)]
struct PyField {
    inner: SpectralField,
}

#[pymethods]
impl PyField {
    #[staticmethod]
    #[pyo3(signature = (grid, real = false))]
    fn zeros(grid: &PyGrid, real: bool) -> Self {
        let r = if real { Reality::Real } else { Reality::Complex };
        PyField {
            inner: SpectralField::zeros(grid.inner, r),
        }
    }

    /// `amplitude * exp(i k . x)` for an integer wave index `k`.
    #[staticmethod]
    fn plane_wave(grid: &PyGrid, k: Vec<i64>, amplitude: Complex64) -> PyResult<Self> {
        let mut idx = [0i64; 3];
        if k.len() != grid.inner.dim() {
            return Err(PyValueError::new_err(format!("k needs {} entries", grid.inner.dim())));
        }
        idx[..k.len()].copy_from_slice(&k);
        SpectralField::plane_wave(grid.inner, idx, amplitude)
            .map(|inner| PyField { inner })
            .map_err(py_err)
    }

    /// Seeded Gaussian-envelope field with the given RMS amplitude.
    #[staticmethod]
    #[pyo3(signature = (grid, seed, xi0, amplitude, real = false))]
    fn random(grid: &PyGrid, seed: u64, xi0: f64, amplitude: f64, real: bool) -> Self {
        let r = if real { Reality::Real } else { Reality::Complex };
        let mut rng = seeded_rng(seed);
        PyField {
            inner: random_field(&grid.inner, &mut rng, &SpectrumProfile::new(xi0), r, amplitude),
        }
    }

    #[getter]
    fn grid(&self) -> PyGrid {
        PyGrid {
            inner: *self.inner.grid(),
        }
    }

    #[getter]
    fn is_real(&self) -> bool {
        self.inner.is_real()
    }

    fn coeffs(&self) -> Vec<Complex64> {
        self.inner.coeffs().to_vec()
    }

    /// Values on an `m`-point lattice per axis (the grid itself by default).
    #[pyo3(signature = (m = None))]
    fn to_physical(&self, m: Option<usize>) -> PyResult<Vec<Complex64>> {
        let m = m.unwrap_or(self.inner.grid().n());
        if m < self.inner.grid().n() {
            return Err(PyValueError::new_err("lattice smaller than the grid"));
        }
        Ok(self.inner.to_physical(m))
    }

    fn l2_norm(&self) -> f64 {
        self.inner.l2_norm()
    }

    fn h1dot(&self) -> f64 {
        analysis::h1dot(&self.inner)
    }

    fn sobolev_norm(&self, s: f64) -> f64 {
        analysis::sobolev_norm(&self.inner, s)
    }

    /// `{"l2", "h1dot", "hs": [{"s", "value"}]}`
    fn norm_report<'py>(&self, py: Python<'py>, s: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
        to_python(py, &analysis::norm_report(&self.inner, &s))
    }

    fn __repr__(&self) -> String {
        format!(
            "Field(n={}, dim={}, real={}, l2={:.6e})",
            self.inner.grid().n(),
            self.inner.grid().dim(),
            self.inner.is_real(),
            self.inner.l2_norm()
        )
    }
}

/// Converts any serializable value through JSON into Python objects.
fn to_python<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// A Maxwell-Klein-Gordon (3D) or Maxwell-Chern-Simons-Higgs (2D) state.
#[pyclass(name = "State", frozen, from_py_object)]
#[derive(Clone)]
struct PyState {
    inner: System,
}

#[pymethods]
impl PyState {
    /// Seeded admissible Maxwell-Klein-Gordon data in the Coulomb gauge.
    #[staticmethod]
    fn mkg_random(grid: &PyGrid, seed: u64, xi0: f64, amplitude: f64) -> PyResult<Self> {
        if grid.inner.dim() != 3 {
            return Err(PyValueError::new_err("Maxwell-Klein-Gordon needs a 3D grid"));
        }
        Ok(PyState {
            inner: System::Mkg(make_admissible_mkg(grid.inner, seed, &SpectrumProfile::new(xi0), amplitude)),
        })
    }

    /// Seeded admissible Maxwell-Chern-Simons-Higgs data.
    #[staticmethod]
    fn mcsh_random(grid: &PyGrid, seed: u64, xi0: f64, amplitude: f64, e: f64, kappa: f64, v: f64) -> PyResult<Self> {
        if grid.inner.dim() != 2 {
            return Err(PyValueError::new_err("Maxwell-Chern-Simons-Higgs needs a 2D grid"));
        }
        let p = PhysParams::new(e, kappa, v).map_err(py_err)?;
        let s = make_admissible_mcsh(grid.inner, seed, &SpectrumProfile::new(xi0), amplitude, &p);
        Ok(PyState {
            inner: System::Mcsh(s, p),
        })
    }

    /// Reads a snapshot file; pass `e`, `kappa`, `v` for a 2D state.
    #[staticmethod]
    #[pyo3(signature = (path, params = None))]
    fn load(path: PathBuf, params: Option<(f64, f64, f64)>) -> PyResult<Self> {
        let inner = match params {
            None => System::Mkg(MkgState::load(&path).map_err(py_err)?),
            Some((e, kappa, v)) => {
                let p = PhysParams::new(e, kappa, v).map_err(py_err)?;
                System::Mcsh(McshState::load(&path).map_err(py_err)?, p)
            }
        };
        Ok(PyState { inner })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        match &self.inner {
            System::Mkg(s) => s.save(path),
            System::Mcsh(s, _) => s.save(path),
        }
        .map_err(py_err)
    }

    #[getter]
    fn system(&self) -> &'static str {
        match self.inner {
            System::Mkg(_) => "mkg",
            System::Mcsh(..) => "mcsh",
        }
    }

    #[getter]
    fn grid(&self) -> PyGrid {
        PyGrid {
            inner: *self.inner.grid(),
        }
    }

    #[getter]
    fn time(&self) -> f64 {
        self.inner.time()
    }

    fn energy(&self) -> f64 {
        self.inner.energy()
    }

    /// `L^2` norm of the Gauss-law residual.
    fn gauss_residual(&self) -> f64 {
        self.inner.gauss_residual().l2_norm()
    }

    fn phi(&self) -> PyField {
        PyField {
            inner: self.inner.phi().clone(),
        }
    }

    fn potential(&self) -> Vec<PyField> {
        self.inner
            .potential()
            .components()
            .iter()
            .map(|c| PyField { inner: c.clone() })
            .collect()
    }

    fn electric(&self) -> Vec<PyField> {
        self.inner
            .electric()
            .components()
            .iter()
            .map(|c| PyField { inner: c.clone() })
            .collect()
    }

    /// Applies the time-independent gauge function `chi` (a real field).
    fn gauge_transform(&self, chi: &PyField) -> PyResult<Self> {
        let g = GaugeFunction::new(chi.inner.clone()).map_err(py_err)?;
        self.inner
            .gauge_transform(&g)
            .map(|inner| PyState { inner })
            .map_err(py_err)
    }

    /// The same state in the Coulomb gauge.
    fn coulomb_gauge(&self) -> PyResult<Self> {
        let (_, chi) = coulomb_fix(self.inner.potential()).map_err(py_err)?;
        self.gauge_transform(&PyField { inner: chi.chi().clone() })
    }

    fn distance(&self, other: &PyState) -> PyResult<f64> {
        self.inner.distance(&other.inner).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "State(system={}, n={}, t={}, energy={:.6e})",
            self.system(),
            self.inner.grid().n(),
            self.inner.time(),
            self.inner.energy()
        )
    }
}

fn row_dict<'py>(py: Python<'py>, r: &RunRow) -> PyResult<Bound<'py, PyAny>> {
    to_python(py, r)
}

/// Evolves `state` to `t_final` and returns
/// `{"rows": [...], "status": "completed" | "blowup", "final": State, ...}`.
#[pyfunction]
#[pyo3(signature = (state, dt, t_final, scheme = "leapfrog", formulation = "raw", snapshot_every = 1, regauge_every = None))]
fn evolve<'py>(
    py: Python<'py>,
    state: &PyState,
    dt: f64,
    t_final: f64,
    scheme: &str,
    formulation: &str,
    snapshot_every: usize,
    regauge_every: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let mut cfg = IntegratorConfig::new(parse::<Scheme>(scheme)?, dt, t_final)
        .with_formulation(parse::<Formulation>(formulation)?)
        .with_snapshot_every(snapshot_every);
    cfg.regauge_every = regauge_every;
    let sys = state.inner.clone();
    let rec = py.detach(move || ev::run(&sys, &cfg)).map_err(py_err)?;
    let out = PyDict::new(py);
    let rows = rec
        .rows
        .iter()
        .map(|r| row_dict(py, r))
        .collect::<PyResult<Vec<_>>>()?;
    out.set_item("rows", rows)?;
    match &rec.status {
        RunStatus::Completed => out.set_item("status", "completed")?,
        RunStatus::BlowUp { time, reason } => {
            out.set_item("status", "blowup")?;
            out.set_item("blowup_time", *time)?;
            out.set_item("reason", reason.clone())?;
        }
    }
    out.set_item("regauge_defect", rec.regauge_defect)?;
    out.set_item("final", PyState { inner: rec.final_state })?;
    Ok(out)
}

/// Observable defect between the raw and decomposed formulations.
#[pyfunction]
#[pyo3(signature = (state, dt, t_final, scheme = "leapfrog"))]
fn cross_validate<'py>(
    py: Python<'py>,
    state: &PyState,
    dt: f64,
    t_final: f64,
    scheme: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = IntegratorConfig::new(parse::<Scheme>(scheme)?, dt, t_final);
    let sys = state.inner.clone();
    let cv = py.detach(move || ev::cross_validate(&sys, &cfg)).map_err(py_err)?;
    to_python(py, &cv.defect)
}

/// Pointwise check of the space-time weight inequalities on a lattice.
#[pyfunction]
fn weight_inequality_check<'py>(
    py: Python<'py>,
    s: f64,
    b: f64,
    grid: &PyGrid,
    n_t: usize,
) -> PyResult<Bound<'py, PyAny>> {
    to_python(py, &analysis::weight_inequality_check(s, b, &grid.inner, n_t))
}

/// Empirical constant of the covariant gradient bound over seeded draws.
#[pyfunction]
#[pyo3(signature = (grid, seeds, xi0, psi = 1.0, theta = 4.0, noise = 0.05))]
fn lemma28_sweep<'py>(
    py: Python<'py>,
    grid: &PyGrid,
    seeds: u64,
    xi0: f64,
    psi: f64,
    theta: f64,
    noise: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let draw = Lemma28Draw { psi, theta, noise };
    let r = analysis::lemma28_sweep(grid.inner, 0..seeds, &SpectrumProfile::new(xi0), draw).map_err(py_err)?;
    to_python(py, &r)
}

/// Runs a named suite (`identities`, `gauge`, `bounds`, `weights`,
/// `crossval`) on a configuration file and returns its report.
#[pyfunction]
fn check<'py>(py: Python<'py>, suite: &str, config: PathBuf) -> PyResult<Bound<'py, PyAny>> {
    let cfg = RunConfig::load(&config).map_err(py_err)?;
    let suite = suite.to_string();
    let report = py.detach(move || gaugewave::cli::run_suite(&suite, &cfg)).map_err(py_err)?;
    to_python(py, &report)
}

#[pymodule]
fn gaugewave_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyField>()?;
    m.add_class::<PyState>()?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(cross_validate, m)?)?;
    m.add_function(wrap_pyfunction!(weight_inequality_check, m)?)?;
    m.add_function(wrap_pyfunction!(lemma28_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    Ok(())
}
