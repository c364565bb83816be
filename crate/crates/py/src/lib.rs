//! Python bindings: GF(2) matrices, banded-matrix experiments, schedules,
//! coding trials, and the closed-form bounds, seeded the same way as the
//! Rust API.

use occsim_core::banded;
use occsim_core::bounds;
use occsim_core::codes;
use occsim_core::gf2;
use occsim_core::network;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn parse_kind(kind: &str) -> PyResult<network::ScheduleKind> {
    match kind {
        "one-in-one-out" => Ok(network::ScheduleKind::OneInOneOut),
        "all-in-all-out" => Ok(network::ScheduleKind::AllInAllOut),
        _ => Err(err(format!(
            "kind must be one-in-one-out | all-in-all-out, got {kind:?}"
        ))),
    }
}

fn parse_delivery(delivery: &str) -> PyResult<network::DeliveryOrder> {
    match delivery {
        "inorder" => Ok(network::DeliveryOrder::InOrder),
        "permuted" => Ok(network::DeliveryOrder::RandomPermutation),
        _ => Err(err(format!(
            "delivery must be inorder | permuted, got {delivery:?}"
        ))),
    }
}

#[pyclass(name = "BitMatrix", skip_from_py_object)]
#[derive(Clone)]
struct PyBitMatrix {
    inner: gf2::BitMatrix,
}

#[pymethods]
impl PyBitMatrix {
    /// Build from a list of 0/1 rows.
    #[new]
    fn new(rows: Vec<Vec<u8>>) -> PyResult<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(err("rows have unequal lengths"));
        }
        let flat: Vec<u8> = rows.into_iter().flatten().collect();
        Ok(PyBitMatrix {
            inner: gf2::BitMatrix::from_entries(n_rows, n_cols, &flat),
        })
    }

    #[staticmethod]
    fn random(n_rows: usize, n_cols: usize, seed: u64) -> Self {
        PyBitMatrix {
            inner: gf2::BitMatrix::random(n_rows, n_cols, &mut rng(seed)),
        }
    }

    #[getter]
    fn n_rows(&self) -> usize {
        self.inner.n_rows()
    }

    #[getter]
    fn n_cols(&self) -> usize {
        self.inner.n_cols()
    }

    fn rank(&self) -> usize {
        self.inner.rank()
    }

    /// Canonical reduced row echelon form (zero rows dropped).
    fn rref(&self) -> Self {
        PyBitMatrix {
            inner: gf2::rref(&self.inner).matrix,
        }
    }

    /// Column indices j with e_j in the row space.
    fn recoverable_columns(&self) -> Vec<usize> {
        gf2::recoverable_columns(&self.inner)
    }

    fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.inner.n_rows())
            .map(|r| {
                (0..self.inner.n_cols())
                    .map(|c| u8::from(self.inner.get(r, c)))
                    .collect()
            })
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("BitMatrix({}x{})", self.inner.n_rows(), self.inner.n_cols())
    }
}

#[pyclass(name = "BandedSpec", skip_from_py_object)]
#[derive(Clone)]
struct PyBandedSpec {
    inner: banded::BandedSpec,
}

#[pymethods]
impl PyBandedSpec {
    #[new]
    #[pyo3(signature = (n_rows, k, alpha, gamma, regularity="irregular", symmetry="symmetric"))]
    fn new(
        n_rows: usize,
        k: usize,
        alpha: usize,
        gamma: usize,
        regularity: &str,
        symmetry: &str,
    ) -> PyResult<Self> {
        let regularity = match regularity {
            "regular" => banded::Regularity::Regular,
            "irregular" => banded::Regularity::Irregular,
            _ => return Err(err("regularity must be regular | irregular")),
        };
        let symmetry = match symmetry {
            "symmetric" => banded::Symmetry::Symmetric,
            "asymmetric" => banded::Symmetry::Asymmetric,
            _ => return Err(err("symmetry must be symmetric | asymmetric")),
        };
        Ok(PyBandedSpec {
            inner: banded::BandedSpec::new(n_rows, k, alpha, gamma, regularity, symmetry)
                .map_err(err)?,
        })
    }

    #[getter]
    fn chi(&self) -> usize {
        self.inner.chi()
    }

    fn apertures(&self) -> Vec<Vec<usize>> {
        banded::apertures(&self.inner)
    }

    fn sample(&self, seed: u64) -> PyBitMatrix {
        PyBitMatrix {
            inner: banded::sample_banded(&self.inner, &mut rng(seed)),
        }
    }

    /// Monte-Carlo full-rank frequency with a 95% Wilson interval.
    fn full_rank_frequency<'py>(
        &self,
        py: Python<'py>,
        trials: u64,
        seed: u64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let est = banded::full_rank_frequency(&self.inner, trials, seed).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("trials", est.trials)?;
        d.set_item("full_rank", est.full_rank)?;
        d.set_item("freq", est.freq)?;
        d.set_item("ci_lo", est.ci_lo)?;
        d.set_item("ci_hi", est.ci_hi)?;
        Ok(d)
    }
}

#[pyclass(name = "Schedule", skip_from_py_object)]
#[derive(Clone)]
struct PySchedule {
    inner: network::Schedule,
}

#[pymethods]
impl PySchedule {
    #[getter]
    fn l(&self) -> usize {
        self.inner.l
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    /// Globally ordered (link, slot, arrival_rank) triples.
    fn events(&self) -> Vec<(usize, usize, usize)> {
        self.inner
            .events
            .iter()
            .map(|e| (e.link, e.slot, e.arrival_rank))
            .collect()
    }

    #[pyo3(signature = (assignment=None))]
    fn to_text(&self, assignment: Option<Vec<usize>>) -> String {
        self.inner.to_text(assignment.as_deref())
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<(PySchedule, Option<Vec<usize>>)> {
        let (schedule, assignment) = network::Schedule::from_text(text).map_err(err)?;
        Ok((PySchedule { inner: schedule }, assignment))
    }

    /// Max-flow capacity of the ω-schedule under a per-event chunk map.
    fn omega_capacity(&self, assignment: Vec<usize>, omega: usize) -> PyResult<usize> {
        network::omega_capacity(&self.inner, &assignment, omega).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Schedule(l={}, n={})", self.inner.l, self.inner.n)
    }
}

#[pyfunction]
#[pyo3(signature = (kind, l, n, delivery="inorder", seed=0))]
fn generate_schedule(kind: &str, l: usize, n: usize, delivery: &str, seed: u64) -> PyResult<PySchedule> {
    Ok(PySchedule {
        inner: network::generate_schedule(
            parse_kind(kind)?,
            l,
            n,
            parse_delivery(delivery)?,
            &mut rng(seed),
        ),
    })
}

#[pyfunction]
fn sample_transfer_matrix(n: usize, d: usize, kind: &str, seed: u64) -> PyResult<PyBitMatrix> {
    Ok(PyBitMatrix {
        inner: network::sample_transfer_matrix(n, d, parse_kind(kind)?, &mut rng(seed))
            .map_err(err)?,
    })
}

#[pyclass(name = "ChunkScheme", skip_from_py_object)]
#[derive(Clone)]
struct PyChunkScheme {
    inner: codes::ChunkScheme,
}

#[pymethods]
impl PyChunkScheme {
    #[staticmethod]
    fn dense(k: usize) -> PyResult<Self> {
        Ok(PyChunkScheme {
            inner: codes::ChunkScheme::dense(k).map_err(err)?,
        })
    }

    #[staticmethod]
    fn cc(k: usize, alpha: usize) -> PyResult<Self> {
        Ok(PyChunkScheme {
            inner: codes::ChunkScheme::cc(k, alpha).map_err(err)?,
        })
    }

    #[staticmethod]
    fn occ(k: usize, alpha: usize, tau: usize) -> PyResult<Self> {
        Ok(PyChunkScheme {
            inner: codes::ChunkScheme::occ(k, alpha, tau).map_err(err)?,
        })
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k
    }

    #[getter]
    fn q(&self) -> usize {
        self.inner.q
    }

    #[getter]
    fn alpha(&self) -> usize {
        self.inner.alpha
    }

    #[getter]
    fn gamma(&self) -> usize {
        self.inner.gamma
    }

    #[getter]
    fn tau(&self) -> usize {
        self.inner.tau
    }

    fn apertures(&self) -> Vec<Vec<usize>> {
        self.inner.apertures().to_vec()
    }

    fn __repr__(&self) -> String {
        format!(
            "ChunkScheme({}, k={}, q={}, alpha={}, gamma={})",
            self.inner.kind.label(),
            self.inner.k,
            self.inner.q,
            self.inner.alpha,
            self.inner.gamma
        )
    }
}

/// One full transmission over the schedule; returns the outcome as a dict.
#[pyfunction]
#[pyo3(signature = (schedule, scheme, seed, payload_len=None, allow_empty_chunk=false))]
fn run_trial<'py>(
    py: Python<'py>,
    schedule: &PySchedule,
    scheme: &PyChunkScheme,
    seed: u64,
    payload_len: Option<usize>,
    allow_empty_chunk: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let outcome = codes::run_trial(
        &schedule.inner,
        &scheme.inner,
        codes::TrialOptions {
            payload_len,
            allow_empty_chunk,
        },
        &mut rng(seed),
    );
    let d = PyDict::new(py);
    d.set_item("success", outcome.success)?;
    d.set_item("chunk_ranks", outcome.chunk_ranks)?;
    d.set_item("recovered", outcome.recovered)?;
    d.set_item("n_received", outcome.n_received)?;
    d.set_item("payload_verified", outcome.payload_verified)?;
    d.set_item("wasted", outcome.wasted)?;
    Ok(d)
}

#[pyfunction]
fn exact_full_rank_prob(n: usize, k: usize) -> PyResult<f64> {
    banded::exact_full_rank_prob(n, k).map_err(err)
}

#[pyfunction]
fn cooper_rank_pmf(n: usize, d: usize, gamma: usize) -> PyResult<f64> {
    banded::cooper_rank_pmf(n, d, gamma).map_err(err)
}

#[pyfunction]
fn conjecture2_threshold(k: usize, tau: usize, symmetry: &str) -> PyResult<usize> {
    let symmetry = match symmetry {
        "symmetric" => banded::Symmetry::Symmetric,
        "asymmetric" => banded::Symmetry::Asymmetric,
        _ => return Err(err("symmetry must be symmetric | asymmetric")),
    };
    banded::conjecture2_threshold(k, tau, symmetry).map_err(err)
}

#[pyfunction]
fn dense_kmax(n: usize, l: usize, epsilon: f64, kind: &str) -> PyResult<f64> {
    bounds::dense_kmax(n, l, epsilon, parse_kind(kind)?).map_err(err)
}

#[pyfunction]
fn erasure_kmax(n: usize, epsilon: f64) -> PyResult<f64> {
    bounds::erasure_kmax(n, epsilon).map_err(err)
}

/// Returns (value, vacuous).
#[pyfunction]
fn cc_capacity_bound(n: usize, q: usize, l: usize, epsilon: f64, kind: &str) -> PyResult<(f64, bool)> {
    let b = bounds::cc_capacity_bound(n, q, l, epsilon, parse_kind(kind)?).map_err(err)?;
    Ok((b.value, b.vacuous))
}

/// Returns (value, vacuous).
#[pyfunction]
fn cc_kmax(n: usize, q: usize, l: usize, epsilon: f64, kind: &str) -> PyResult<(f64, bool)> {
    let b = bounds::cc_kmax(n, q, l, epsilon, parse_kind(kind)?).map_err(err)?;
    Ok((b.value, b.vacuous))
}

#[pyfunction]
fn rank_tail_bounds<'py>(
    py: Python<'py>,
    d: usize,
    gamma: usize,
    k: usize,
    n: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let b = bounds::rank_tail_bounds(d, gamma, k, n).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("lemma3", b.lemma3)?;
    out.set_item("lemma6", b.lemma6)?;
    out.set_item("lemma7", b.lemma7)?;
    Ok(out)
}

#[pyfunction]
fn density_loss_bound(n: usize, l: usize, epsilon: f64, kind: &str) -> PyResult<f64> {
    bounds::density_loss_bound(n, l, epsilon, parse_kind(kind)?).map_err(err)
}

#[pymodule]
fn occsim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBitMatrix>()?;
    m.add_class::<PyBandedSpec>()?;
    m.add_class::<PySchedule>()?;
    m.add_class::<PyChunkScheme>()?;
    m.add_function(wrap_pyfunction!(generate_schedule, m)?)?;
    m.add_function(wrap_pyfunction!(sample_transfer_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(run_trial, m)?)?;
    m.add_function(wrap_pyfunction!(exact_full_rank_prob, m)?)?;
    m.add_function(wrap_pyfunction!(cooper_rank_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(conjecture2_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(dense_kmax, m)?)?;
    m.add_function(wrap_pyfunction!(erasure_kmax, m)?)?;
    m.add_function(wrap_pyfunction!(cc_capacity_bound, m)?)?;
    m.add_function(wrap_pyfunction!(cc_kmax, m)?)?;
    m.add_function(wrap_pyfunction!(rank_tail_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(density_loss_bound, m)?)?;
    Ok(())
}
