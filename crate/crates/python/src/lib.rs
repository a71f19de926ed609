//! Python bindings. Study results come back as plain dicts and lists.

use cparticle::clock::{self, PatternSample, SlitGeometry};
use cparticle::kinematics::{self, Event, HingedWorldline, Segment};
use cparticle::lattice::{self, Stepping};
use cparticle::reference;
use cparticle::spectral::{self, Branch};
use cparticle::studies;
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

fn err(e: cparticle::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    Ok(pythonize::pythonize(py, value)?)
}

fn units_or_default(units: Option<&Units>) -> cparticle::UnitsConfig {
    units.map(|u| u.0).unwrap_or_default()
}

fn stepping(stroboscopic: bool) -> Stepping {
    if stroboscopic {
        Stepping::Stroboscopic
    } else {
        Stepping::Raw
    }
}

fn samples(s: Vec<PatternSample>) -> Vec<(f64, i8, bool)> {
    s.into_iter().map(|p| (p.x, p.value, p.in_cone)).collect()
}

#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct Units(cparticle::UnitsConfig);

#[pymethods]
impl Units {
    #[new]
    #[pyo3(signature = (compton_period = 4.0))]
    fn new(compton_period: f64) -> PyResult<Self> {
        cparticle::UnitsConfig::new(compton_period).map(Self).map_err(err)
    }

    #[getter]
    fn compton_period(&self) -> f64 {
        self.0.compton_period()
    }

    #[getter]
    fn mass(&self) -> f64 {
        self.0.mass()
    }

    #[getter]
    fn diffusion_constant(&self) -> f64 {
        self.0.diffusion_constant()
    }

    fn __repr__(&self) -> String {
        format!("Units(compton_period={})", self.0.compton_period())
    }
}

#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct Lattice(cparticle::LatticeParams);

#[pymethods]
impl Lattice {
    #[new]
    fn new(delta: f64, epsilon: f64, alpha: f64, sites: usize) -> PyResult<Self> {
        cparticle::LatticeParams::new(delta, epsilon, alpha, sites).map(Self).map_err(err)
    }

    /// Lattice with `epsilon = delta² / (2 D)`.
    #[staticmethod]
    fn diffusive(delta: f64, diffusion_constant: f64, alpha: f64, sites: usize) -> PyResult<Self> {
        cparticle::LatticeParams::diffusive(delta, diffusion_constant, alpha, sites)
            .map(Self)
            .map_err(err)
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.0.delta()
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.0.epsilon()
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha()
    }

    #[getter]
    fn sites(&self) -> usize {
        self.0.sites()
    }

    #[getter]
    fn diffusion_constant(&self) -> f64 {
        self.0.diffusion_constant()
    }

    fn positions(&self) -> Vec<f64> {
        (0..self.0.sites()).map(|i| self.0.position(i)).collect()
    }
}

#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct DecomposedField(lattice::DecomposedField);

#[pymethods]
impl DecomposedField {
    #[new]
    fn new(z: Vec<[f64; 2]>, phi: Vec<[f64; 2]>) -> PyResult<Self> {
        if z.len() != phi.len() {
            return Err(PyValueError::new_err("z and phi must have the same length"));
        }
        Ok(Self(lattice::DecomposedField { z, phi, step: 0 }))
    }

    #[staticmethod]
    #[pyo3(signature = (lattice, m0 = 0))]
    fn paper_delta(lattice: &Lattice, m0: i64) -> Self {
        Self(lattice::DecomposedField::paper_delta(&lattice.0, m0))
    }

    #[staticmethod]
    #[pyo3(signature = (lattice, m0 = 0))]
    fn diffusion_delta(lattice: &Lattice, m0: i64) -> Self {
        Self(lattice::DecomposedField::diffusion_delta(&lattice.0, m0))
    }

    #[getter]
    fn z(&self) -> Vec<[f64; 2]> {
        self.0.z.clone()
    }

    #[getter]
    fn phi(&self) -> Vec<[f64; 2]> {
        self.0.phi.clone()
    }

    #[getter]
    fn step(&self) -> usize {
        self.0.step
    }

    #[pyo3(signature = (lattice, steps, stroboscopic = true))]
    fn evolve(&self, lattice: &Lattice, steps: usize, stroboscopic: bool) -> PyResult<Self> {
        lattice::evolve(&self.0, &lattice.0, steps, stepping(stroboscopic))
            .map(Self)
            .map_err(err)
    }

    /// `(mass, mean, variance)` of the z density.
    fn z_moments(&self, lattice: &Lattice) -> (f64, f64, f64) {
        let m = self.0.z_moments(&lattice.0);
        (m.mass, m.mean, m.variance)
    }

    fn compose(&self) -> FourStateField {
        FourStateField(lattice::compose(&self.0))
    }

    /// `φ` after `steps` applications of the transfer matrix, computed in
    /// momentum space.
    fn spectral_propagate(&self, lattice: &Lattice, steps: u64) -> PyResult<Vec<[Complex64; 2]>> {
        let field = spectral::to_spectral(&self.0.phi, &lattice.0).map_err(err)?;
        spectral::from_spectral(&field.propagate(lattice.0.alpha(), steps), &lattice.0).map_err(err)
    }
}

#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct FourStateField(lattice::FourStateField);

#[pymethods]
impl FourStateField {
    #[staticmethod]
    #[pyo3(signature = (lattice, state, m0 = 0))]
    fn unit_state(lattice: &Lattice, state: usize, m0: i64) -> PyResult<Self> {
        lattice::FourStateField::unit_state(&lattice.0, state, m0)
            .map(Self)
            .map_err(err)
    }

    #[getter]
    fn p(&self) -> Vec<[f64; 4]> {
        self.0.p.clone()
    }

    #[getter]
    fn step(&self) -> usize {
        self.0.step
    }

    fn total_mass(&self) -> f64 {
        self.0.total_mass()
    }

    #[pyo3(signature = (lattice, steps, stroboscopic = false))]
    fn evolve(&self, lattice: &Lattice, steps: usize, stroboscopic: bool) -> PyResult<Self> {
        lattice::evolve(&self.0, &lattice.0, steps, stepping(stroboscopic))
            .map(Self)
            .map_err(err)
    }

    fn decompose(&self) -> DecomposedField {
        DecomposedField(lattice::decompose(&self.0))
    }
}

#[pyfunction]
fn interval_proper_time(x0: f64, t0: f64, x1: f64, t1: f64) -> PyResult<f64> {
    kinematics::interval_proper_time(Event::new(x0, t0), Event::new(x1, t1)).map_err(err)
}

/// Proper time and endpoint of a path of `(velocity, duration)` legs.
#[pyfunction]
#[pyo3(signature = (legs, x0 = 0.0, t0 = 0.0))]
fn worldline_proper_time(legs: Vec<(f64, f64)>, x0: f64, t0: f64) -> PyResult<(f64, (f64, f64))> {
    let segments = legs
        .into_iter()
        .map(|(v, dt)| Segment::new(v, dt))
        .collect::<cparticle::Result<Vec<_>>>()
        .map_err(err)?;
    let w = HingedWorldline::new(Event::new(x0, t0), segments).map_err(err)?;
    let end = w.endpoint();
    Ok((w.proper_time(), (end.x, end.t)))
}

#[pyfunction]
#[pyo3(signature = (proper_time, units = None))]
fn parity(proper_time: f64, units: Option<&Units>) -> PyResult<i8> {
    clock::parity_of_proper_time(proper_time, &units_or_default(units))
        .map(|p| p.value())
        .map_err(err)
}

/// `(x, parity, in_cone)` for each screen position.
#[pyfunction]
#[pyo3(signature = (t, xs, units = None))]
fn plane_pattern(t: f64, xs: Vec<f64>, units: Option<&Units>) -> PyResult<Vec<(f64, i8, bool)>> {
    clock::plane_pattern(t, &xs, &units_or_default(units))
        .map(samples)
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (t, units = None))]
fn plane_pattern_crossings(t: f64, units: Option<&Units>) -> Vec<f64> {
    clock::plane_pattern_crossings(t, &units_or_default(units))
}

/// `(x, filter value, in_cone)` on the screen behind two slits at `±a`.
#[pyfunction]
#[pyo3(signature = (a, t1, t2, xs, units = None))]
fn double_slit(a: f64, t1: f64, t2: f64, xs: Vec<f64>, units: Option<&Units>) -> PyResult<Vec<(f64, i8, bool)>> {
    let g = SlitGeometry::new(a, t1, t2, xs).map_err(err)?;
    clock::double_slit_phi(&g, &units_or_default(units))
        .map(samples)
        .map_err(err)
}

#[pyfunction]
fn transfer_matrix(p: f64, delta: f64, alpha: f64) -> [[Complex64; 2]; 2] {
    spectral::transfer_matrix(p, delta, alpha).matrix.0
}

#[pyfunction]
fn eigenvalues(p: f64, delta: f64, alpha: f64) -> (Complex64, Complex64) {
    spectral::eigenvalues(&spectral::transfer_matrix(p, delta, alpha))
}

#[pyfunction]
fn eigenvalue_expansion(p: f64, delta: f64, alpha: f64) -> Complex64 {
    spectral::eigenvalue_expansion(p, delta, alpha)
}

/// `(ψ₊, ψ₋)` from `(φ₁, φ₂)`.
#[pyfunction]
fn assemble_psi(phi1: Complex64, phi2: Complex64) -> (Complex64, Complex64) {
    spectral::assemble_psi(phi1, phi2)
}

#[pyfunction]
#[pyo3(signature = (x, t, units = None))]
fn feynman_free(x: f64, t: f64, units: Option<&Units>) -> PyResult<Complex64> {
    reference::feynman_free(x, t, &units_or_default(units)).map_err(err)
}

#[pyfunction]
fn diffusion_green(x: f64, t: f64, diffusion_constant: f64) -> PyResult<f64> {
    reference::diffusion_green(x, t, diffusion_constant).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (x, t, diffusion_constant, branch = "+"))]
fn fresnel_kernel(x: f64, t: f64, diffusion_constant: f64, branch: &str) -> PyResult<Complex64> {
    let branch = match branch {
        "+" => Branch::Plus,
        "-" => Branch::Minus,
        other => return Err(PyValueError::new_err(format!("branch must be '+' or '-', got {other:?}"))),
    };
    spectral::fresnel_kernel(x, t, diffusion_constant, branch).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (lattice, steps, paths, seed, initial_state = 1, initial_site = 0))]
fn monte_carlo<'py>(
    py: Python<'py>,
    lattice: &Lattice,
    steps: usize,
    paths: u64,
    seed: u64,
    initial_state: usize,
    initial_site: i64,
) -> PyResult<Bound<'py, PyAny>> {
    let est = py
        .detach(|| lattice::monte_carlo_estimate(&lattice.0, steps, paths, seed, initial_state, initial_site))
        .map_err(err)?;
    to_py(py, &est)
}

#[pyfunction]
#[pyo3(signature = (points = 1024, delta = 0.05, alpha = std::f64::consts::SQRT_2))]
fn spectral_identities<'py>(py: Python<'py>, points: usize, delta: f64, alpha: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &studies::spectral_identities(points, delta, alpha).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (p, deltas, alpha = std::f64::consts::SQRT_2))]
fn expansion_order<'py>(py: Python<'py>, p: f64, deltas: Vec<f64>, alpha: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &studies::expansion_order(p, &deltas, alpha).map_err(err)?)
}

#[pyfunction]
fn diffusion_study<'py>(py: Python<'py>, diffusion_constant: f64, t: f64, deltas: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
    let s = py
        .detach(|| studies::diffusion_study(diffusion_constant, t, &deltas))
        .map_err(err)?;
    to_py(py, &s)
}

#[pyfunction]
#[pyo3(signature = (diffusion_constant, t, deltas, x_window = 3.0, p_window = 2.0))]
fn schrodinger_study<'py>(
    py: Python<'py>,
    diffusion_constant: f64,
    t: f64,
    deltas: Vec<f64>,
    x_window: f64,
    p_window: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let s = py
        .detach(|| studies::schrodinger_study(diffusion_constant, t, &deltas, x_window, p_window))
        .map_err(err)?;
    to_py(py, &s)
}

#[pyfunction]
#[pyo3(signature = (t = 20.0, window = 4.0, spacing = 0.01, units = None))]
fn propagator_compare<'py>(
    py: Python<'py>,
    t: f64,
    window: f64,
    spacing: f64,
    units: Option<&Units>,
) -> PyResult<Bound<'py, PyAny>> {
    let s = studies::propagator_compare(t, window, spacing, &units_or_default(units)).map_err(err)?;
    to_py(py, &s)
}

#[pymodule]
fn cparticle_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Units>()?;
    m.add_class::<Lattice>()?;
    m.add_class::<DecomposedField>()?;
    m.add_class::<FourStateField>()?;
    m.add_function(wrap_pyfunction!(interval_proper_time, m)?)?;
    m.add_function(wrap_pyfunction!(worldline_proper_time, m)?)?;
    m.add_function(wrap_pyfunction!(parity, m)?)?;
    m.add_function(wrap_pyfunction!(plane_pattern, m)?)?;
    m.add_function(wrap_pyfunction!(plane_pattern_crossings, m)?)?;
    m.add_function(wrap_pyfunction!(double_slit, m)?)?;
    m.add_function(wrap_pyfunction!(transfer_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(eigenvalue_expansion, m)?)?;
    m.add_function(wrap_pyfunction!(assemble_psi, m)?)?;
    m.add_function(wrap_pyfunction!(feynman_free, m)?)?;
    m.add_function(wrap_pyfunction!(diffusion_green, m)?)?;
    m.add_function(wrap_pyfunction!(fresnel_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(monte_carlo, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_identities, m)?)?;
    m.add_function(wrap_pyfunction!(expansion_order, m)?)?;
    m.add_function(wrap_pyfunction!(diffusion_study, m)?)?;
    m.add_function(wrap_pyfunction!(schrodinger_study, m)?)?;
    m.add_function(wrap_pyfunction!(propagator_compare, m)?)?;
    Ok(())
}
