//! Python bindings. Matrices cross the boundary as nested lists of
//! `complex`, row-major.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use diracpoint::extensions::{self, classify, from_unitary, random_admissible, random_unitary};
use diracpoint::scattering::{s_matrix, t0, Branch, ContinuumPoint};
use diracpoint::spectrum::eigenvalues_closed_form;
use diracpoint::topology::{levinson_verdict, winding};
use diracpoint::waveop::{bound_state_trace, isometry_defect, GridFunction, GridSpec};
use diracpoint::weyl_green::{green_free, green_perturbed};
use diracpoint::{cli, tol, Error, Mat2C};

type PyMat = Vec<Vec<Complex64>>;

fn err(e: Error) -> PyErr {
    match e {
        Error::Parse { .. }
        | Error::InvalidInput(_)
        | Error::NotAdmissible
        | Error::NotUnitary { .. }
        | Error::OnSpectrum(_)
        | Error::AtThreshold(_)
        | Error::PoleAtMinusM
        | Error::InGap(_)
        | Error::OriginEvaluation
        | Error::DiagonalPoint
        | Error::OriginOrThreshold => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_mat(m: &PyMat) -> PyResult<Mat2C> {
    if m.len() != 2 || m.iter().any(|r| r.len() != 2) {
        return Err(PyValueError::new_err("expected a 2x2 nested list"));
    }
    Ok(Mat2C::new(m[0][0], m[0][1], m[1][0], m[1][1]))
}

fn from_mat(m: &Mat2C) -> PyMat {
    vec![vec![m.a11, m.a12], vec![m.a21, m.a22]]
}

fn branch_of(name: &str) -> PyResult<Branch> {
    match name {
        "neg" | "-" => Ok(Branch::Neg),
        "pos" | "+" => Ok(Branch::Pos),
        _ => Err(PyValueError::new_err(format!(
            "branch must be 'neg' or 'pos', got {name:?}"
        ))),
    }
}

/// Admissible boundary pair `(C, D)` with mass `m`.
#[pyclass(name = "BoundaryPair", frozen)]
struct PyPair {
    inner: diracpoint::BoundaryPair,
}

#[pymethods]
impl PyPair {
    #[new]
    #[pyo3(signature = (c, d, mass = 1.0))]
    fn new(c: PyMat, d: PyMat, mass: f64) -> PyResult<Self> {
        let inner = diracpoint::BoundaryPair::new(to_mat(&c)?, to_mat(&d)?, mass).map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (mass = 1.0))]
    fn free(mass: f64) -> Self {
        Self {
            inner: diracpoint::BoundaryPair::free(mass),
        }
    }

    #[staticmethod]
    #[pyo3(signature = (u, mass = 1.0))]
    fn from_unitary(u: PyMat, mass: f64) -> PyResult<Self> {
        Ok(Self {
            inner: from_unitary(&to_mat(&u)?, mass).map_err(err)?,
        })
    }

    /// Pair built from the Haar unitary with the given seed.
    #[staticmethod]
    #[pyo3(signature = (seed, mass = 1.0))]
    fn random(seed: u64, mass: f64) -> PyResult<Self> {
        Ok(Self {
            inner: random_admissible(seed, mass).map_err(err)?,
        })
    }

    #[getter]
    fn c(&self) -> PyMat {
        from_mat(&self.inner.c)
    }

    #[getter]
    fn d(&self) -> PyMat {
        from_mat(&self.inner.d)
    }

    #[getter]
    fn mass(&self) -> f64 {
        self.inner.mass
    }

    fn classify(&self) -> PyResult<&'static str> {
        Ok(classify(&self.inner, tol::CLASS).map_err(err)?.name())
    }

    fn equivalent(&self, other: &PyPair) -> bool {
        extensions::equivalent(&self.inner, &other.inner, 1e-9)
    }

    /// `[(lambda, multiplicity), ...]` sorted by energy.
    fn eigenvalues(&self) -> PyResult<Vec<(f64, usize)>> {
        let rep = eigenvalues_closed_form(&self.inner).map_err(err)?;
        Ok(rep
            .eigenvalues
            .iter()
            .map(|e| (e.lambda, e.multiplicity))
            .collect())
    }

    /// `T0` at compact coordinate `s ∈ [0, 1]` on a branch.
    fn t0(&self, branch: &str, s: f64) -> PyResult<PyMat> {
        let p = ContinuumPoint::new(branch_of(branch)?, s).map_err(err)?;
        Ok(from_mat(&t0(p, &self.inner).map_err(err)?))
    }

    /// Scattering matrix at energy `lambda`, `|lambda| >= m` (may be infinite).
    fn s_matrix(&self, lambda: f64) -> PyResult<PyMat> {
        let p = ContinuumPoint::from_lambda(lambda, self.inner.mass).map_err(err)?;
        Ok(from_mat(&s_matrix(p, &self.inner).map_err(err)?))
    }

    #[pyo3(signature = (refine_tol = std::f64::consts::FRAC_PI_2))]
    fn winding(&self, refine_tol: f64) -> PyResult<i64> {
        Ok(winding(&self.inner, refine_tol).map_err(err)?.winding)
    }

    fn levinson<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let v = levinson_verdict(&self.inner).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("winding", v.report.winding)?;
        d.set_item("eigen_count", v.report.eigen_count)?;
        d.set_item("holds", v.report.holds)?;
        d.set_item("closure_residual", v.closure_residual)?;
        d.set_item("samples_used", v.samples_used)?;
        Ok(d)
    }

    fn green(&self, x: f64, y: f64, z: Complex64) -> PyResult<PyMat> {
        Ok(from_mat(
            &green_perturbed(x, y, z, &self.inner).map_err(err)?,
        ))
    }

    /// Isometry defect of the wave operator on the standard Gaussian probe.
    #[pyo3(signature = (half_width = 40.0, points = 4096))]
    fn waveop_defect(&self, half_width: f64, points: usize) -> PyResult<f64> {
        let g = GridSpec::new(half_width, points).map_err(err)?;
        let f = GridFunction::gaussian_probe(&g);
        isometry_defect(&self.inner, &f, &g).map_err(err)
    }

    /// Exploratory `trace(1 - W W†)`; needs `points <= 1024`.
    #[pyo3(signature = (half_width = 60.0, points = 1024))]
    fn bound_state_trace(&self, half_width: f64, points: usize) -> PyResult<f64> {
        let g = GridSpec::new(half_width, points).map_err(err)?;
        Ok(bound_state_trace(&self.inner, &g).map_err(err)?.trace)
    }

    fn __repr__(&self) -> String {
        format!(
            "BoundaryPair(C={:?}, D={:?}, mass={})",
            self.c(),
            self.d(),
            self.inner.mass
        )
    }
}

#[pyfunction]
fn haar_unitary(seed: u64) -> PyMat {
    from_mat(&random_unitary(seed))
}

#[pyfunction]
fn free_green(x: f64, y: f64, z: Complex64, mass: f64) -> PyResult<PyMat> {
    Ok(from_mat(&green_free(x, y, z, mass).map_err(err)?))
}

/// Levinson sweep; returns `{total, holds, degenerate_skipped, failures}`.
#[pyfunction]
#[pyo3(signature = (count = 500, seed = 7, mass = 1.0))]
fn sweep<'py>(py: Python<'py>, count: usize, seed: u64, mass: f64) -> PyResult<Bound<'py, PyDict>> {
    let rep = cli::run_sweep(count, seed, mass, tol::LOOP_CLOSURE, false);
    let d = PyDict::new(py);
    d.set_item("total", rep.total)?;
    d.set_item("holds", rep.holds)?;
    d.set_item("degenerate_skipped", rep.degenerate_skipped)?;
    let failures: Vec<usize> = rep.failures.iter().map(|f| f.index).collect();
    d.set_item("failures", failures)?;
    Ok(d)
}

#[pymodule]
fn pydiracpoint(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPair>()?;
    m.add_function(wrap_pyfunction!(haar_unitary, m)?)?;
    m.add_function(wrap_pyfunction!(free_green, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    Ok(())
}
