//! Python bindings: points and tangents on G(n,1), shape-gain codebooks,
//! the predictive codec, trace generation and the closed-form bounds.

use grasspc_core::analysis;
use grasspc_core::codebook::{random_packing, uniform_magnitude};
use grasspc_core::codec::{self, decode_stream, encode_trace, initialize, CodewordIndex};
use grasspc_core::experiments::{self, CodebookSpec, DirectionSpec, MagnitudeSpec, TraceModel};
use grasspc_core::grassmann;
use grasspc_core::rng::{purpose, stream_rng, substream};
use grasspc_core::{GrassmannPoint, InitMode, ShapeGainCodebook, TangentVector, C64};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn init_mode(name: &str) -> PyResult<InitMode> {
    match name {
        "exact" => Ok(InitMode::Exact),
        "memoryless" => Ok(InitMode::Memoryless),
        other => Err(PyValueError::new_err(format!("init must be \"exact\" or \"memoryless\", got {other:?}"))),
    }
}

/// A complex line in C^n, stored as a unit-norm representative.
#[pyclass(name = "GrassmannPoint", module = "grasspc", frozen, skip_from_py_object)]
#[derive(Clone)]
struct Point(GrassmannPoint);

#[pymethods]
impl Point {
    /// Normalises `coords`; rejects zero, non-finite or one-dimensional input.
    #[new]
    fn new(coords: Vec<C64>) -> PyResult<Self> {
        GrassmannPoint::normalize(coords).map(Point).map_err(value_err)
    }

    #[staticmethod]
    fn random(n: usize, seed: u64) -> PyResult<Self> {
        if n < 2 {
            return Err(PyValueError::new_err("n must be at least 2"));
        }
        Ok(Point(GrassmannPoint::random(&mut stream_rng(seed, substream(purpose::INPUT, 0, 0)), n)))
    }

    #[getter]
    fn coords(&self) -> Vec<C64> {
        self.0.coords().to_vec()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn distance(&self, other: PyRef<'_, Point>) -> PyResult<f64> {
        grassmann::chordal_distance(&self.0, &other.0).map_err(value_err)
    }

    fn __repr__(&self) -> String {
        format!("GrassmannPoint({:?})", self.0.coords())
    }
}

/// Tangent vector at a base point: magnitude times a unit direction.
#[pyclass(name = "TangentVector", module = "grasspc", frozen, skip_from_py_object)]
#[derive(Clone)]
struct Tangent(TangentVector);

#[pymethods]
impl Tangent {
    #[getter]
    fn base(&self) -> Point {
        Point(self.0.base().clone())
    }

    #[getter]
    fn magnitude(&self) -> f64 {
        self.0.magnitude()
    }

    #[getter]
    fn vector(&self) -> Vec<C64> {
        self.0.to_vector()
    }

    fn __repr__(&self) -> String {
        format!("TangentVector(magnitude={})", self.0.magnitude())
    }
}

#[pyfunction]
fn chordal_distance(x: PyRef<'_, Point>, y: PyRef<'_, Point>) -> PyResult<f64> {
    grassmann::chordal_distance(&x.0, &y.0).map_err(value_err)
}

#[pyfunction]
fn log_map(base: PyRef<'_, Point>, target: PyRef<'_, Point>) -> PyResult<Tangent> {
    grassmann::log_map(&base.0, &target.0).map(Tangent).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (base, tangent, t = 1.0))]
fn exp_map(base: PyRef<'_, Point>, tangent: PyRef<'_, Tangent>, t: f64) -> PyResult<Point> {
    grassmann::exp_map(&base.0, &tangent.0, t).map(Point).map_err(value_err)
}

#[pyfunction]
fn parallel_transport(x1: PyRef<'_, Point>, x2: PyRef<'_, Point>) -> PyResult<Tangent> {
    grassmann::parallel_transport(&x1.0, &x2.0).map(Tangent).map_err(value_err)
}

#[pyfunction]
fn predict_one_step(x_prev: PyRef<'_, Point>, x_curr: PyRef<'_, Point>) -> PyResult<Point> {
    grassmann::predict_one_step(&x_prev.0, &x_curr.0).map(Point).map_err(value_err)
}

/// Shape-gain codebook: unit directions on G(n,1) times scalar magnitudes.
#[pyclass(name = "Codebook", module = "grasspc", frozen, skip_from_py_object)]
#[derive(Clone)]
struct Codebook(ShapeGainCodebook);

#[pymethods]
impl Codebook {
    /// Best-of-`candidates` random packing with a uniform magnitude grid.
    #[staticmethod]
    #[pyo3(signature = (n, direction_bits, magnitude_bits, magnitude_hi, seed, magnitude_lo = 0.0, candidates = 100))]
    fn packed(n: usize, direction_bits: u32, magnitude_bits: u32, magnitude_hi: f64, seed: u64, magnitude_lo: f64, candidates: usize) -> PyResult<Self> {
        if direction_bits > 16 || magnitude_bits > 16 {
            return Err(PyValueError::new_err("codebook bits must be at most 16"));
        }
        let d = random_packing(n, 1 << direction_bits, candidates, seed).map_err(value_err)?;
        let m = uniform_magnitude(1 << magnitude_bits, magnitude_lo, magnitude_hi).map_err(value_err)?;
        ShapeGainCodebook::new(d, m).map(Codebook).map_err(value_err)
    }

    /// Lloyd-trained codebook (open loop then closed loop) on AR(1) traces.
    #[staticmethod]
    #[pyo3(signature = (n, beta, direction_bits, magnitude_bits, seed, max_iters = 50, train_traces = 4, train_steps = 2500))]
    #[allow(clippy::too_many_arguments)]
    fn train_ar1(
        py: Python<'_>,
        n: usize,
        beta: f64,
        direction_bits: u32,
        magnitude_bits: u32,
        seed: u64,
        max_iters: usize,
        train_traces: usize,
        train_steps: usize,
    ) -> PyResult<Self> {
        if direction_bits > 16 || magnitude_bits > 16 {
            return Err(PyValueError::new_err("codebook bits must be at most 16"));
        }
        let spec = CodebookSpec {
            max_iters,
            train_traces,
            train_steps,
            ..CodebookSpec::fixed(DirectionSpec::Lloyd { bits: direction_bits }, MagnitudeSpec::Lloyd { bits: magnitude_bits })
        };
        let model = TraceModel::Ar1 { n, beta };
        py.detach(|| experiments::build_codebook(&spec, &model, seed)).map(Codebook).map_err(value_err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        ShapeGainCodebook::load(path).map(Codebook).map_err(|e| PyIOError::new_err(e.to_string()))
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.0.save(path).map_err(|e| PyIOError::new_err(e.to_string()))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn bits(&self) -> u32 {
        self.0.bits()
    }

    #[getter]
    fn directions(&self) -> Vec<Vec<C64>> {
        self.0.directions.entries().iter().map(|p| p.coords().to_vec()).collect()
    }

    #[getter]
    fn magnitudes(&self) -> Vec<f64> {
        self.0.magnitudes.entries().to_vec()
    }

    /// Nearest direction codeword to `x`: `(index, codeword)`.
    fn memoryless_quantize(&self, x: PyRef<'_, Point>) -> PyResult<(usize, Point)> {
        codec::memoryless_quantize(&x.0, &self.0.directions).map(|(i, p)| (i, Point(p))).map_err(value_err)
    }

    fn __repr__(&self) -> String {
        format!("Codebook(n={}, N_d={}, N_m={})", self.0.dim(), self.0.directions.len(), self.0.magnitudes.len())
    }
}

/// Result of running the encoder over a trace.
#[pyclass(name = "EncodedTrace", module = "grasspc", frozen, get_all, skip_from_py_object)]
struct Encoded {
    /// Serial codeword indices `direction·N_m + magnitude`, one per coded step.
    indices: Vec<u64>,
    /// Trace step of each index.
    steps: Vec<usize>,
    estimates: Vec<Point>,
    /// Chordal distance between estimate and true point at each coded step.
    errors: Vec<f64>,
    /// Steps at which tracking was lost and both sides re-initialized.
    resets: Vec<usize>,
}

/// Encodes `trace[2..]` after initializing on the first two points.
#[pyfunction]
#[pyo3(signature = (trace, codebook, init = "exact"))]
fn encode(trace: Vec<PyRef<'_, Point>>, codebook: PyRef<'_, Codebook>, init: &str) -> PyResult<Encoded> {
    let mode = init_mode(init)?;
    let points: Vec<GrassmannPoint> = trace.iter().map(|p| p.0.clone()).collect();
    let cb = &codebook.0;
    let run = encode_trace(&points, cb, &cb.directions, mode).map_err(value_err)?;
    let n_m = cb.magnitudes.len();
    Ok(Encoded {
        indices: run.symbols.iter().map(|s| s.serial(n_m)).collect(),
        steps: run.steps,
        estimates: run.estimates.into_iter().map(Point).collect(),
        errors: run.estimation_errors,
        resets: run.resets,
    })
}

/// Replays an index stream from the state both sides build out of
/// `(x0, x1)`. Valid for streams encoded without resets.
#[pyfunction]
#[pyo3(signature = (x0, x1, indices, codebook, init = "exact"))]
fn decode(x0: PyRef<'_, Point>, x1: PyRef<'_, Point>, indices: Vec<u64>, codebook: PyRef<'_, Codebook>, init: &str) -> PyResult<Vec<Point>> {
    let cb = &codebook.0;
    if let Some(bad) = indices.iter().find(|&&i| i >= cb.len() as u64) {
        return Err(PyValueError::new_err(format!("index {bad} out of range for a codebook of size {}", cb.len())));
    }
    let state = initialize(&x0.0, &x1.0, &cb.directions, init_mode(init)?).map_err(value_err)?;
    let symbols: Vec<CodewordIndex> = indices.iter().map(|&s| CodewordIndex::from_serial(s, cb.magnitudes.len())).collect();
    let (est, _) = decode_stream(&state, &symbols, cb).map_err(value_err)?;
    Ok(est.into_iter().map(Point).collect())
}

/// Normalised AR(1) (Gauss-Markov) channel directions on G(n,1).
#[pyfunction]
#[pyo3(signature = (n, beta, steps, seed, trial = 0))]
fn ar1_trace(n: usize, beta: f64, steps: usize, seed: u64, trial: u64) -> PyResult<Vec<Point>> {
    let t = TraceModel::Ar1 { n, beta }.generate(steps, seed, substream(purpose::CHANNEL, trial, 0)).map_err(value_err)?;
    Ok(t.normalized.into_iter().map(Point).collect())
}

/// Normalised AR(2) channel directions on G(n,1).
#[pyfunction]
#[pyo3(signature = (n, a1, a2, noise_std, steps, seed, trial = 0))]
fn ar2_trace(n: usize, a1: f64, a2: f64, noise_std: f64, steps: usize, seed: u64, trial: u64) -> PyResult<Vec<Point>> {
    let t = TraceModel::Ar2 { n, a1, a2, noise_std }.generate(steps, seed, substream(purpose::CHANNEL, trial, 0)).map_err(value_err)?;
    Ok(t.normalized.into_iter().map(Point).collect())
}

#[pyfunction]
fn memoryless_lower_bound(n: usize, codebook_size: usize) -> PyResult<f64> {
    analysis::memoryless_lower_bound(n, codebook_size).map_err(value_err)
}

/// `(D_lower, D_upper)` for a codebook.
#[pyfunction]
fn distortion_bounds(codebook: PyRef<'_, Codebook>) -> PyResult<(f64, f64)> {
    let b = analysis::gpc_distortion_bounds(codebook.0.dim(), &codebook.0).map_err(value_err)?;
    Ok((b.lower, b.upper))
}

#[pymodule]
fn grasspc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Point>()?;
    m.add_class::<Tangent>()?;
    m.add_class::<Codebook>()?;
    m.add_class::<Encoded>()?;
    m.add_function(wrap_pyfunction!(chordal_distance, m)?)?;
    m.add_function(wrap_pyfunction!(log_map, m)?)?;
    m.add_function(wrap_pyfunction!(exp_map, m)?)?;
    m.add_function(wrap_pyfunction!(parallel_transport, m)?)?;
    m.add_function(wrap_pyfunction!(predict_one_step, m)?)?;
    m.add_function(wrap_pyfunction!(encode, m)?)?;
    m.add_function(wrap_pyfunction!(decode, m)?)?;
    m.add_function(wrap_pyfunction!(ar1_trace, m)?)?;
    m.add_function(wrap_pyfunction!(ar2_trace, m)?)?;
    m.add_function(wrap_pyfunction!(memoryless_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(distortion_bounds, m)?)?;
    Ok(())
}
