//! Python bindings. Rational values cross the boundary as `fractions.Fraction`
//! and reports as plain dicts.

use polyface::angles::{self, SamplingConfig, DEFAULT_SAMPLES, DEFAULT_SIGMA};
use polyface::bounds;
use polyface::corpus::{self, CorpusOptions};
use polyface::exact::parse_scalar;
use polyface::generators::{generate, Family, FamilySpec};
use polyface::projection::{self, Direction, GeneralPosition};
use polyface::{face_lattice, hull_from_points, IndexSet, PolyError, Scalar, Vector};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyList;

fn err(e: PolyError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn fraction<'py>(py: Python<'py>, s: &Scalar) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((s.to_string(),))
}

fn from_json<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.getattr("loads")?.call1((text,))
}

fn face_set(face: Vec<usize>) -> IndexSet {
    face.into_iter().collect()
}

#[pyclass(name = "Polytope", module = "polyface", frozen)]
struct PyPolytope {
    inner: polyface::Polytope,
}

#[pymethods]
impl PyPolytope {
    /// Convex hull of points given as ints, Fractions or decimal strings.
    #[staticmethod]
    fn from_points(points: &Bound<'_, PyAny>) -> PyResult<Self> {
        let mut rows = Vec::new();
        for row in points.try_iter()? {
            let mut coords = Vec::new();
            for x in row?.try_iter()? {
                coords.push(parse_scalar(&x?.str()?.to_cow()?).map_err(err)?);
            }
            rows.push(Vector::new(coords));
        }
        Ok(PyPolytope { inner: hull_from_points(&rows).map_err(err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (family, dim, n=None, seed=0))]
    fn generate(family: &str, dim: usize, n: Option<usize>, seed: u64) -> PyResult<Self> {
        let family: Family = family.parse().map_err(err)?;
        let mut spec = FamilySpec::new(family, dim).with_seed(seed);
        if let Some(n) = n {
            spec = spec.with_n(n);
        }
        Ok(PyPolytope { inner: generate(&spec).map_err(err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyPolytope { inner: polyface::Polytope::from_json(text).map_err(err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim
    }

    #[getter]
    fn vertex_count(&self) -> usize {
        self.inner.vertex_count()
    }

    /// Vertices in ambient coordinates.
    fn vertices<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyList>> {
        let rows = self
            .inner
            .ambient_vertices()
            .iter()
            .map(|v| {
                let coords = v.coords().iter().map(|c| fraction(py, c)).collect::<PyResult<Vec<_>>>()?;
                PyList::new(py, coords)
            })
            .collect::<PyResult<Vec<_>>>()?;
        PyList::new(py, rows)
    }

    /// Vertex index lists, one per facet.
    fn facets(&self) -> Vec<Vec<usize>> {
        self.inner.facets.iter().map(|f| f.vertex_set.to_vec()).collect()
    }

    /// Vertex index lists of the k-faces, in lattice order.
    fn faces(&self, k: i64) -> PyResult<Vec<Vec<usize>>> {
        let lattice = face_lattice(&self.inner).map_err(err)?;
        Ok(lattice.faces_of_dim(k).map(|f| f.vertex_set.to_vec()).collect())
    }

    fn f_vector(&self) -> PyResult<Vec<u64>> {
        Ok(face_lattice(&self.inner).and_then(|l| l.f_vector()).map_err(err)?.counts)
    }

    fn is_simple(&self) -> bool {
        self.inner.is_simple()
    }

    fn is_simplicial(&self) -> bool {
        self.inner.is_simplicial()
    }

    fn __repr__(&self) -> String {
        format!("Polytope(dim={}, vertices={})", self.inner.dim, self.inner.vertex_count())
    }
}

#[pyfunction]
fn rho(py: Python<'_>, d: i64, k: i64) -> PyResult<Bound<'_, PyAny>> {
    fraction(py, &bounds::rho(d, k).map_err(err)?)
}

/// Both face-number bound families plus the Bárány, Xue and Björner checks.
#[pyfunction]
fn verify_bounds<'py>(py: Python<'py>, p: &PyPolytope) -> PyResult<Bound<'py, PyAny>> {
    let p = &p.inner;
    let fv = face_lattice(p).and_then(|l| l.f_vector()).map_err(err)?;
    let (simple, simplicial) = (p.is_simple(), p.is_simplicial());
    let report = serde_json::json!({
        "bounds": bounds::bound_report(&fv, simple, simplicial).map_err(err)?,
        "barany": bounds::barany_check(&fv),
        "xue": bounds::xue_check(&fv).map_err(err)?,
        "bjorner": bounds::bjorner_check(&fv, simple, simplicial),
    });
    from_json(py, &report)
}

/// `(mean, stderr)` of the solid angle of `p` at the face with these vertices.
#[pyfunction]
#[pyo3(signature = (p, face, samples=DEFAULT_SAMPLES, seed=0))]
fn solid_angle(py: Python<'_>, p: &PyPolytope, face: Vec<usize>, samples: u64, seed: u64) -> PyResult<(f64, f64)> {
    let g = face_set(face);
    let est = py.detach(|| angles::solid_angle(&p.inner, &g, samples, seed)).map_err(err)?;
    Ok((est.mean, est.stderr))
}

#[pyfunction]
#[pyo3(signature = (p, k, samples=DEFAULT_SAMPLES, seed=0))]
fn angle_sum<'py>(py: Python<'py>, p: &PyPolytope, k: i64, samples: u64, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let cfg = SamplingConfig::new(samples, seed);
    let r = py.detach(|| angles::angle_sum(&p.inner, k, &cfg)).map_err(err)?;
    from_json(py, &r)
}

#[pyfunction]
#[pyo3(signature = (p, face, samples=DEFAULT_SAMPLES, seed=0, sigma=DEFAULT_SIGMA))]
fn curvature_check<'py>(
    py: Python<'py>,
    p: &PyPolytope,
    face: Vec<usize>,
    samples: u64,
    seed: u64,
    sigma: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = SamplingConfig { samples, seed, sigma };
    let g = face_set(face);
    let r = py.detach(|| angles::curvature_check(&p.inner, &g, &cfg)).map_err(err)?;
    from_json(py, &r)
}

/// Verified general-position integer directions.
#[pyfunction]
#[pyo3(signature = (p, count, seed=0))]
fn sample_directions(py: Python<'_>, p: &PyPolytope, count: usize, seed: u64) -> PyResult<Vec<Vec<String>>> {
    let dirs = py.detach(|| projection::sample_directions(&p.inner, count, seed)).map_err(err)?;
    Ok(dirs.iter().map(|d| d.v.coords().iter().map(Scalar::to_string).collect()).collect())
}

/// Shadow, upper/lower complexes, diagram vertices and gap checks along an
/// integer direction, or along a sampled one when `direction` is omitted.
#[pyfunction]
#[pyo3(signature = (p, direction=None, seed=0))]
fn project<'py>(py: Python<'py>, p: &PyPolytope, direction: Option<Vec<i64>>, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let q = &p.inner;
    let report = py
        .detach(|| {
            let dir = match direction {
                Some(v) => {
                    let d = GeneralPosition::new(q)?.check(Vector::from_ints(&v));
                    if !d.verified {
                        return Err(PolyError::NotGeneralPosition);
                    }
                    d
                }
                None => projection::sample_direction(q, seed, projection::DEFAULT_RETRIES)?,
            };
            analyze_report(q, &dir)
        })
        .map_err(err)?;
    from_json(py, &report)
}

fn analyze_report(q: &polyface::Polytope, dir: &Direction) -> polyface::Result<projection::ProjectionReport> {
    let lattice = face_lattice(q)?;
    let fv = lattice.f_vector()?;
    projection::analyze(q, &lattice, dir)?.report(&fv)
}

/// Corpus CSV for the given families and inclusive dimension range.
#[pyfunction]
#[pyo3(signature = (families=None, min_dim=2, max_dim=6, directions=20, samples=0, seed=0))]
fn run_corpus(
    py: Python<'_>,
    families: Option<Vec<String>>,
    min_dim: usize,
    max_dim: usize,
    directions: usize,
    samples: u64,
    seed: u64,
) -> PyResult<String> {
    let families: Vec<Family> = match families {
        Some(names) => names.iter().map(|s| s.parse()).collect::<Result<_, _>>().map_err(err)?,
        None => Family::ALL.to_vec(),
    };
    let opts = CorpusOptions { directions, samples, seed, ..Default::default() };
    let out = py.detach(|| corpus::run_corpus(&corpus::family_corpus(&families, min_dim..=max_dim), &opts));
    if let Some(e) = out.errors.first() {
        return Err(PyValueError::new_err(e.clone()));
    }
    Ok(corpus::to_csv(&out.rows))
}

#[pymodule]
#[pyo3(name = "polyface")]
fn polyface_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPolytope>()?;
    m.add_function(wrap_pyfunction!(rho, m)?)?;
    m.add_function(wrap_pyfunction!(verify_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(solid_angle, m)?)?;
    m.add_function(wrap_pyfunction!(angle_sum, m)?)?;
    m.add_function(wrap_pyfunction!(curvature_check, m)?)?;
    m.add_function(wrap_pyfunction!(sample_directions, m)?)?;
    m.add_function(wrap_pyfunction!(project, m)?)?;
    m.add_function(wrap_pyfunction!(run_corpus, m)?)?;
    Ok(())
}
