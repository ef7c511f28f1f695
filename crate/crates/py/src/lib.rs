//! Python bindings: forms, genus enumeration, spinor genera, masses, the
//! discriminant and the equidistribution harness.

use genuslab_core as core;
use num_bigint::BigInt;
use pyo3::exceptions::{PyNotImplementedError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py_err(e: core::Error) -> PyErr {
    let msg = e.to_string();
    match e {
        core::Error::Unsupported(_) => PyNotImplementedError::new_err(msg),
        core::Error::Parse(_)
        | core::Error::NotSquare
        | core::Error::NotSymmetric
        | core::Error::NotPositiveDefinite
        | core::Error::DimensionOutOfRange(..)
        | core::Error::EntryTooLarge(_)
        | core::Error::InvalidArgument(_)
        | core::Error::BadPrime(..)
        | core::Error::OracleOutOfRange(_) => PyValueError::new_err(msg),
        _ => PyRuntimeError::new_err(msg),
    }
}

fn fraction<'py>(py: Python<'py>, q: &num_rational::Ratio<BigInt>) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((q.numer().clone(), q.denom().clone()))
}

/// Positive-definite integral quadratic form given by its Gram matrix.
#[pyclass(name = "QuadraticForm", module = "genuslab", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
pub struct PyQuadraticForm {
    inner: core::QuadraticForm,
}

#[pymethods]
impl PyQuadraticForm {
    #[new]
    fn new(gram: Vec<Vec<i64>>) -> PyResult<Self> {
        core::QuadraticForm::new(gram).map(|inner| Self { inner }).map_err(to_py_err)
    }

    /// Parses the text format or a JSON Gram matrix.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        core::QuadraticForm::parse(text).map(|inner| Self { inner }).map_err(to_py_err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn det(&self) -> BigInt {
        self.inner.det().clone()
    }

    fn gram(&self) -> Vec<Vec<i64>> {
        self.inner.rows()
    }

    fn eval(&self, v: Vec<i64>) -> PyResult<i128> {
        if v.len() != self.inner.dim() {
            return Err(PyValueError::new_err("vector length differs from the dimension"));
        }
        Ok(self.inner.eval(&v))
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    /// Canonical representative of the class (dimension at most 6).
    fn canonical(&self) -> PyResult<Self> {
        core::canonical_form(&self.inner).map(|c| Self { inner: c.canonical }).map_err(to_py_err)
    }

    fn lll(&self) -> Self {
        Self { inner: core::lll_reduce(&self.inner).canonical }
    }

    fn is_isometric(&self, other: &Self) -> bool {
        core::is_isometric(&self.inner, &other.inner).is_some()
    }

    fn same_genus(&self, other: &Self) -> bool {
        core::same_genus(&self.inner, &other.inner)
    }

    fn automorphism_order(&self) -> u64 {
        core::automorphism_order(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!("QuadraticForm({})", self.inner)
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __hash__(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.inner.gram().hash(&mut h);
        h.finish()
    }
}

/// Classes of a genus found by the neighbour search.
#[pyclass(name = "GenusEnumeration", module = "genuslab", frozen)]
pub struct PyGenusEnumeration {
    inner: core::GenusEnumeration,
}

#[pymethods]
impl PyGenusEnumeration {
    #[getter]
    fn classes(&self) -> Vec<PyQuadraticForm> {
        self.inner.classes.iter().map(|q| PyQuadraticForm { inner: q.clone() }).collect()
    }

    #[getter]
    fn aut_orders(&self) -> Vec<u64> {
        self.inner.aut_orders.clone()
    }

    #[getter]
    fn primes_used(&self) -> Vec<u64> {
        self.inner.primes_used.clone()
    }

    #[getter]
    fn closed(&self) -> bool {
        self.inner.is_closed()
    }

    #[getter]
    fn seed_index(&self) -> usize {
        self.inner.seed_index
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("GenusEnumeration(classes={}, closed={})", self.inner.len(), self.inner.is_closed())
    }
}

fn selection(name: &str) -> PyResult<core::PrimeSelection> {
    match name {
        "spinor-minimal" => Ok(core::PrimeSelection::SpinorMinimal),
        "all" => Ok(core::PrimeSelection::All),
        _ => Err(PyValueError::new_err(format!("unknown prime selection `{name}`"))),
    }
}

/// Enumerates the genus of `form`. A search that hits the class budget
/// returns the partial enumeration with `closed == False`.
#[pyfunction]
#[pyo3(signature = (form, p_max = 50, class_budget = 20000, prime_selection = "spinor-minimal"))]
fn genus_enumerate(
    py: Python<'_>,
    form: &PyQuadraticForm,
    p_max: u64,
    class_budget: usize,
    prime_selection: &str,
) -> PyResult<PyGenusEnumeration> {
    let policy = core::GenusPolicy { p_max, class_budget, selection: selection(prime_selection)?, ..Default::default() };
    let q = form.inner.clone();
    match py.detach(move || core::genus_enumerate(&q, &policy)) {
        Ok(inner) => Ok(PyGenusEnumeration { inner }),
        Err(core::Error::BudgetExhausted(partial)) => Ok(PyGenusEnumeration { inner: *partial }),
        Err(e) => Err(to_py_err(e)),
    }
}

/// Spinor-genus label of every class.
#[pyfunction]
fn spin_genus_partition(genus: &PyGenusEnumeration) -> PyResult<Vec<u64>> {
    core::spin_genus_partition(&genus.inner).map(|p| p.labels).map_err(to_py_err)
}

/// Mass as a `Fraction`, or a dict of per-spinor masses.
#[pyfunction]
#[pyo3(signature = (genus, per_spinor = false))]
fn genus_mass<'py>(py: Python<'py>, genus: &PyGenusEnumeration, per_spinor: bool) -> PyResult<Bound<'py, PyAny>> {
    if !per_spinor {
        let m = core::genus_mass(&genus.inner, core::MassWeighting::Full).map_err(to_py_err)?;
        return fraction(py, &m.total);
    }
    let m = core::genus_mass(&genus.inner, core::MassWeighting::PerSpinor).map_err(to_py_err)?;
    let d = PyDict::new(py);
    for (label, mass) in &m.per_spinor {
        d.set_item(label, fraction(py, mass)?)?;
    }
    Ok(d.into_any())
}

#[pyfunction]
fn disc<'py>(py: Python<'py>, form: &PyQuadraticForm) -> PyResult<Bound<'py, PyDict>> {
    let r = core::disc_homogeneous(&form.inner).map_err(to_py_err)?;
    let d = PyDict::new(py);
    d.set_item("n", r.n)?;
    d.set_item("norm_sq", fraction(py, &r.norm_sq)?)?;
    d.set_item("coord_norm_sq", r.coord_norm_sq.clone())?;
    d.set_item("disc", r.disc)?;
    d.set_item("log2_disc", r.log2_disc)?;
    let pluecker: Option<Vec<(Vec<usize>, BigInt)>> = r.pluecker.clone();
    d.set_item("pluecker", pluecker)?;
    Ok(d)
}

/// `(prime, ratio, log2_disc)` of the smallest good prime at least `floor`.
#[pyfunction]
#[pyo3(signature = (form, floor = 3))]
fn good_place(form: &PyQuadraticForm, floor: u64) -> PyResult<(u64, f64, f64)> {
    core::good_place(&form.inner, floor).map(|g| (g.prime, g.ratio, g.log2_disc)).map_err(to_py_err)
}

#[pyfunction]
fn killing_unit_check(form: &PyQuadraticForm, p: u64) -> PyResult<bool> {
    core::killing_unit_check(&form.inner, p).map_err(to_py_err)
}

#[pyfunction]
fn p_neighbors(form: &PyQuadraticForm, p: u64) -> PyResult<Vec<PyQuadraticForm>> {
    core::p_neighbors(&form.inner, p)
        .map(|v| v.into_iter().map(|inner| PyQuadraticForm { inner }).collect())
        .map_err(to_py_err)
}

/// Weighted mean ball counts over the genus against the ball volume.
#[pyfunction]
#[pyo3(signature = (genus, radii, weighting = "mass"))]
fn equid_experiment<'py>(
    py: Python<'py>,
    genus: &PyGenusEnumeration,
    radii: Vec<f64>,
    weighting: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let w = match weighting {
        "mass" => core::Weighting::Mass,
        "uniform" => core::Weighting::Uniform,
        _ => return Err(PyValueError::new_err(format!("unknown weighting `{weighting}`"))),
    };
    let r = core::equid_experiment(&genus.inner, &radii, w).map_err(to_py_err)?;
    let d = PyDict::new(py);
    d.set_item("radii", r.radii)?;
    d.set_item("empirical", r.empirical)?;
    d.set_item("expected", r.expected)?;
    d.set_item("discrepancy", r.discrepancy)?;
    d.set_item("sup_discrepancy", r.sup_discrepancy)?;
    d.set_item("class_count", r.class_count)?;
    Ok(d)
}

#[pymodule]
fn genuslab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyQuadraticForm>()?;
    m.add_class::<PyGenusEnumeration>()?;
    m.add_function(wrap_pyfunction!(genus_enumerate, m)?)?;
    m.add_function(wrap_pyfunction!(spin_genus_partition, m)?)?;
    m.add_function(wrap_pyfunction!(genus_mass, m)?)?;
    m.add_function(wrap_pyfunction!(disc, m)?)?;
    m.add_function(wrap_pyfunction!(good_place, m)?)?;
    m.add_function(wrap_pyfunction!(killing_unit_check, m)?)?;
    m.add_function(wrap_pyfunction!(p_neighbors, m)?)?;
    m.add_function(wrap_pyfunction!(equid_experiment, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_selection_names() {
        assert_eq!(selection("all").unwrap(), core::PrimeSelection::All);
        assert_eq!(selection("spinor-minimal").unwrap(), core::PrimeSelection::SpinorMinimal);
        assert!(selection("some").is_err());
    }
}
