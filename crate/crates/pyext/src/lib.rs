//! Python bindings for the solenoid attractor numerics.
//!
//! Exposes the circle-function type and the main operations: boundary
//! solves, topology classification, cohomological solves and scans, the
//! canonical decomposition, periodic-orbit witnesses, attractor sampling,
//! and the fat-hole builder.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use solenoid_core::affine;
use solenoid_core::circle::{CircleFunction, TrigPoly, TrigTerm};
use solenoid_core::cohomology;
use solenoid_core::families;
use solenoid_core::orbits;
use solenoid_core::tau_spec::TauSpec;
use solenoid_core::topology;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

/// A sampled Lipschitz function on the circle.
#[pyclass(name = "CircleFunction", frozen, from_py_object)]
#[derive(Clone)]
struct PyCircleFunction {
    inner: CircleFunction,
}

#[pymethods]
impl PyCircleFunction {
    /// Build from a trig polynomial: terms are (k, cos, sin) triples.
    #[staticmethod]
    #[pyo3(signature = (terms, constant=0.0, n_samples=4096))]
    fn trig_poly(terms: Vec<(u32, f64, f64)>, constant: f64, n_samples: usize) -> PyResult<Self> {
        let poly = TrigPoly::new(
            constant,
            terms
                .into_iter()
                .map(|(k, cos, sin)| TrigTerm { k, cos, sin })
                .collect(),
        );
        Ok(PyCircleFunction {
            inner: CircleFunction::from_trig_poly(poly, n_samples).map_err(value_err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (values, lip_bound=None))]
    fn samples(values: Vec<f64>, lip_bound: Option<f64>) -> PyResult<Self> {
        let inner = match lip_bound {
            Some(l) => CircleFunction::from_samples(values, l),
            None => CircleFunction::from_samples_auto(values),
        }
        .map_err(value_err)?;
        Ok(PyCircleFunction { inner })
    }

    /// The fat-hole construction at the given contraction.
    #[staticmethod]
    #[pyo3(signature = (lambda_, n_samples=None))]
    fn fat_hole(lambda_: f64, n_samples: Option<usize>) -> PyResult<Self> {
        let spec = TauSpec::FatHole { lambda: lambda_ };
        Ok(PyCircleFunction { inner: spec.build(n_samples).map_err(value_err)? })
    }

    /// Parse a JSON spec (trigpoly / samples / fat_hole).
    #[staticmethod]
    #[pyo3(signature = (json, grid=None))]
    fn from_spec(json: &str, grid: Option<usize>) -> PyResult<Self> {
        let spec = TauSpec::from_json(json).map_err(value_err)?;
        Ok(PyCircleFunction { inner: spec.build(grid).map_err(value_err)? })
    }

    fn evaluate(&self, theta: f64) -> f64 {
        self.inner.evaluate(theta)
    }

    fn extrema(&self) -> (f64, f64, f64) {
        self.inner.extrema()
    }

    fn mean(&self) -> f64 {
        self.inner.mean()
    }

    #[getter]
    fn n_samples(&self) -> usize {
        self.inner.n_samples()
    }

    #[getter]
    fn lip_bound(&self) -> f64 {
        self.inner.lip_bound()
    }

    fn values(&self) -> Vec<f64> {
        self.inner.samples().to_vec()
    }

    /// Fourier coefficients as a list of (k, re, im) for |k| <= k_max.
    fn fourier(&self, k_max: u32) -> PyResult<Vec<(i64, f64, f64)>> {
        let s = self.inner.fourier(k_max).map_err(value_err)?;
        Ok((-(k_max as i64)..=k_max as i64)
            .map(|k| {
                let c = s.coeff(k);
                (k, c.re, c.im)
            })
            .collect())
    }

    fn spec_json(&self) -> PyResult<String> {
        serde_json::to_string(&TauSpec::describe(&self.inner)).map_err(runtime_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "CircleFunction(n_samples={}, lip_bound={:.6})",
            self.inner.n_samples(),
            self.inner.lip_bound()
        )
    }
}

fn build_skew(ell: u32, lambda: f64, tau: &PyCircleFunction) -> PyResult<affine::SkewParams> {
    affine::SkewParams::new(ell, lambda, tau.inner.clone()).map_err(value_err)
}

/// Upper/lower boundary solve; returns a dict with the grid, both
/// boundaries, the residual and the iteration count.
#[pyfunction]
#[pyo3(signature = (ell, lambda_, tau, grid=4096, tol=1e-6))]
fn boundaries<'py>(
    py: Python<'py>,
    ell: u32,
    lambda_: f64,
    tau: &PyCircleFunction,
    grid: usize,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let p = build_skew(ell, lambda_, tau)?;
    let b = affine::boundary_fixed_point(&p, grid, tol).map_err(runtime_err)?;
    let d = PyDict::new(py);
    let thetas: Vec<f64> = (0..grid).map(|i| i as f64 / grid as f64).collect();
    d.set_item("theta", thetas)?;
    d.set_item("rho_plus", b.rho_plus.samples().to_vec())?;
    d.set_item("rho_minus", b.rho_minus.samples().to_vec())?;
    d.set_item("residual", b.residual)?;
    d.set_item("iterations", b.iterations)?;
    Ok(d)
}

/// Topology verdict and its margins.
#[pyfunction]
#[pyo3(signature = (ell, lambda_, tau, grid=4096, tol=1e-6))]
fn classify<'py>(
    py: Python<'py>,
    ell: u32,
    lambda_: f64,
    tau: &PyCircleFunction,
    grid: usize,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let p = build_skew(ell, lambda_, tau)?;
    let b = affine::boundary_fixed_point(&p, grid, tol).map_err(runtime_err)?;
    let c = topology::classify(&p, &b, 10.0 * tol, 10.0 * tol).map_err(runtime_err)?;
    let d = PyDict::new(py);
    d.set_item("verdict", format!("{:?}", c.verdict))?;
    d.set_item("jordan_gap", c.jordan_gap)?;
    d.set_item("annulus_margin", c.annulus_margin)?;
    d.set_item("union_defect", c.union_defect)?;
    Ok(d)
}

/// Apply the cohomological operator L_lambda.
#[pyfunction]
fn apply_l(ell: u32, lambda_: f64, mu: &PyCircleFunction) -> PyCircleFunction {
    PyCircleFunction { inner: cohomology::apply_l(ell, lambda_, &mu.inner) }
}

/// Solve L_lambda mu = tau; returns (mu, residual) or raises RuntimeError.
#[pyfunction]
#[pyo3(signature = (ell, lambda_, tau, k_max=64, tol=1e-6))]
fn solve_l(
    ell: u32,
    lambda_: f64,
    tau: &PyCircleFunction,
    k_max: u32,
    tol: f64,
) -> PyResult<(PyCircleFunction, f64)> {
    match cohomology::solve_l(&tau.inner, ell, lambda_, k_max, tol).map_err(value_err)? {
        cohomology::SolveOutcome::Solved { mu, residual } if residual < tol => {
            Ok((PyCircleFunction { inner: mu }, residual))
        }
        cohomology::SolveOutcome::Solved { residual, .. } => Err(runtime_err(format!(
            "no solution within tolerance: residual {residual:.3e}"
        ))),
        cohomology::SolveOutcome::NotSolvable { reason } => Err(runtime_err(reason)),
    }
}

/// D_k functional value and truncation error.
#[pyfunction]
#[pyo3(signature = (ell, lambda_, tau, k, k_max=128))]
fn dk(ell: u32, lambda_: f64, tau: &PyCircleFunction, k: u32, k_max: u32) -> PyResult<(f64, f64)> {
    let band = k_max.min((tau.inner.n_samples() / 2).saturating_sub(1) as u32);
    let spectrum = tau.inner.fourier(band).map_err(value_err)?;
    let d = cohomology::dk_functional(&tau.inner, ell, lambda_, k, &spectrum).map_err(value_err)?;
    Ok((d.value, d.truncation_error))
}

/// Jordan-parameter scan over (0, 1]; list of (lambda, multiplicity) pairs.
#[pyfunction]
#[pyo3(signature = (ell, tau, tol=1e-6))]
fn scan_jordan(ell: u32, tau: &PyCircleFunction, tol: f64) -> PyResult<Vec<(f64, u32)>> {
    let grid = cohomology::LambdaGrid::default_scan();
    let found = cohomology::scan_jordan(&tau.inner, ell, &grid, tol).map_err(value_err)?;
    Ok(found.into_iter().map(|j| (j.lambda, j.multiplicity)).collect())
}

/// Canonical decomposition; dict with factors, residual and irreducibility.
#[pyfunction]
#[pyo3(signature = (ell, tau, tol=1e-6))]
fn decompose<'py>(
    py: Python<'py>,
    ell: u32,
    tau: &PyCircleFunction,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let grid = cohomology::LambdaGrid::default_scan();
    let d = cohomology::decompose(&tau.inner, ell, &grid, tol).map_err(value_err)?;
    let out = PyDict::new(py);
    out.set_item("factors", d.factors)?;
    out.set_item("residual", PyCircleFunction { inner: d.residual })?;
    out.set_item("residual_irreducible", d.residual_irreducible)?;
    Ok(out)
}

/// Periodic orbits with their Birkhoff data.
#[pyfunction]
#[pyo3(signature = (ell, p_max, tau=None))]
fn periodic_orbits<'py>(
    py: Python<'py>,
    ell: u32,
    p_max: u32,
    tau: Option<&PyCircleFunction>,
) -> PyResult<Bound<'py, PyList>> {
    let mut orbits = orbits::periodic_orbits(ell, p_max).map_err(value_err)?;
    let list = PyList::empty(py);
    for o in &mut orbits {
        if let Some(t) = tau {
            o.bind(&t.inner);
        }
        let d = PyDict::new(py);
        d.set_item("period", o.period)?;
        d.set_item("numerator", o.numerator)?;
        d.set_item("denominator", o.denominator)?;
        d.set_item("points", o.points.clone())?;
        d.set_item("birkhoff_sum", o.birkhoff_sum)?;
        list.append(d)?;
    }
    Ok(list)
}

/// Signed-sum coboundary test; dict with the verdict and any witnesses.
#[pyfunction]
fn coboundary_witness<'py>(
    py: Python<'py>,
    ell: u32,
    tau: &PyCircleFunction,
    p_max: u32,
) -> PyResult<Bound<'py, PyDict>> {
    let v = orbits::coboundary_witness(&tau.inner, ell, p_max).map_err(value_err)?;
    let d = PyDict::new(py);
    match v {
        orbits::CoboundaryVerdict::NotCoboundary { positive, negative, mean_subtracted } => {
            d.set_item("verdict", "NotCoboundary")?;
            d.set_item("positive", (positive.theta0(), positive.birkhoff_sum))?;
            d.set_item("negative", (negative.theta0(), negative.birkhoff_sum))?;
            d.set_item("mean_subtracted", mean_subtracted)?;
        }
        orbits::CoboundaryVerdict::Inconclusive { mean_subtracted } => {
            d.set_item("verdict", "Inconclusive")?;
            d.set_item("mean_subtracted", mean_subtracted)?;
        }
    }
    Ok(d)
}

/// Contact set of the upper boundary and the estimate of its maximal
/// invariant subset, as grid indices.
#[pyfunction]
#[pyo3(signature = (ell, lambda_, tau, grid=4096, tol=1e-4, horizon=64))]
fn contact_set(
    ell: u32,
    lambda_: f64,
    tau: &PyCircleFunction,
    grid: usize,
    tol: f64,
    horizon: usize,
) -> PyResult<(Vec<usize>, Vec<usize>)> {
    let p = build_skew(ell, lambda_, tau)?;
    let b = affine::boundary_fixed_point(&p, grid, tol.min(1e-6)).map_err(runtime_err)?;
    Ok(topology::contact_set(&p, &b, tol, horizon))
}

/// Attractor point cloud through the solenoid semiconjugacy.
#[pyfunction]
#[pyo3(signature = (ell, lambda_, tau, n_points=10000, depth=96, seed=0))]
fn sample_attractor(
    ell: u32,
    lambda_: f64,
    tau: &PyCircleFunction,
    n_points: usize,
    depth: usize,
    seed: u64,
) -> PyResult<Vec<(f64, f64)>> {
    let p = build_skew(ell, lambda_, tau)?;
    Ok(affine::sample_attractor(&p, n_points, depth, seed))
}

/// Fat-hole parameters as a dict (exact cycle, widths, thresholds).
#[pyfunction]
fn fat_hole_params<'py>(py: Python<'py>, lambda_: f64) -> PyResult<Bound<'py, PyDict>> {
    let p = families::fat_hole_params(lambda_).map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item("lambda", p.lambda)?;
    d.set_item("p", p.p)?;
    d.set_item("eta", p.eta)?;
    d.set_item(
        "theta_cycle",
        p.theta_cycle.iter().map(|f| (f.num, f.den)).collect::<Vec<_>>(),
    )?;
    d.set_item("delta", p.delta)?;
    d.set_item("t0", p.t0)?;
    d.set_item("t1", p.t1)?;
    d.set_item("n_cap", p.n_cap)?;
    d.set_item("epsilons", p.epsilons.clone())?;
    d.set_item("lambda_prime", p.lambda_prime)?;
    d.set_item("violated_constraints", p.violated_constraints())?;
    Ok(d)
}

#[pymodule]
fn solenoid_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCircleFunction>()?;
    m.add_function(wrap_pyfunction!(boundaries, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(apply_l, m)?)?;
    m.add_function(wrap_pyfunction!(solve_l, m)?)?;
    m.add_function(wrap_pyfunction!(dk, m)?)?;
    m.add_function(wrap_pyfunction!(scan_jordan, m)?)?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(periodic_orbits, m)?)?;
    m.add_function(wrap_pyfunction!(coboundary_witness, m)?)?;
    m.add_function(wrap_pyfunction!(contact_set, m)?)?;
    m.add_function(wrap_pyfunction!(sample_attractor, m)?)?;
    m.add_function(wrap_pyfunction!(fat_hole_params, m)?)?;
    Ok(())
}
