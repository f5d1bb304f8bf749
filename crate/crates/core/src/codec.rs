//! Predictive encoder/decoder on G(n,1).
//!
//! Both sides hold a [`GpcState`]; the encoder sends one symbol per step and
//! the decoder rebuilds the same estimate from it. The quantizer is pluggable
//! through [`TangentQuantizer`] so that the shape-gain codebook, its
//! direction-only variant and an infinite-resolution stub share one loop.

use std::io::{BufRead, Write};

use thiserror::Error;

use crate::codebook::{DirectionCodebook, ShapeGainCodebook};
use crate::cvec::{self, C64};
use crate::grassmann::{
    chordal_distance, exp_map, log_map, predict_one_step, GeometryError, GrassmannPoint, TangentVector,
    ZERO_TANGENT_EPS,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CodecError {
    #[error("tracking lost at step {step}: {source}")]
    TrackingLost { step: u64, source: GeometryError },
    #[error("initialization failed: {0}")]
    Init(GeometryError),
    #[error("index {index} out of range for a codebook of {size} codewords")]
    IndexOutOfRange { index: u64, size: u64 },
    #[error("codebook dimension {codebook} does not match signal dimension {signal}")]
    DimensionMismatch { codebook: usize, signal: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

pub type Result<T> = std::result::Result<T, CodecError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CodewordIndex {
    pub direction: usize,
    pub magnitude: usize,
}

impl CodewordIndex {
    pub fn new(direction: usize, magnitude: usize) -> Self {
        Self { direction, magnitude }
    }

    pub fn serial(self, n_m: usize) -> u64 {
        (self.direction * n_m + self.magnitude) as u64
    }

    pub fn from_serial(serial: u64, n_m: usize) -> Self {
        let s = serial as usize;
        Self { direction: s / n_m, magnitude: s % n_m }
    }
}

/// Encoder/decoder memory: the two latest estimates and the prediction for
/// the next step. Only constructible through [`initialize`] or
/// [`GpcState::from_estimates`], so it is never half-initialized.
#[derive(Debug, Clone, PartialEq)]
pub struct GpcState {
    est_prev: GrassmannPoint,
    est_curr: GrassmannPoint,
    predicted: GrassmannPoint,
    time: u64,
}

impl GpcState {
    pub fn from_estimates(est_prev: GrassmannPoint, est_curr: GrassmannPoint, time: u64) -> std::result::Result<Self, GeometryError> {
        let predicted = predict_one_step(&est_prev, &est_curr)?;
        Ok(Self { est_prev, est_curr, predicted, time })
    }

    pub fn est_prev(&self) -> &GrassmannPoint {
        &self.est_prev
    }

    pub fn est_curr(&self) -> &GrassmannPoint {
        &self.est_curr
    }

    pub fn predicted(&self) -> &GrassmannPoint {
        &self.predicted
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    fn advance(&self, estimate: GrassmannPoint) -> Result<Self> {
        let predicted = predict_one_step(&self.est_curr, &estimate)
            .map_err(|source| CodecError::TrackingLost { step: self.time + 1, source })?;
        Ok(Self { est_prev: self.est_curr.clone(), est_curr: estimate, predicted, time: self.time + 1 })
    }
}

/// Maps an observation (relative to a prediction) to a symbol and back.
/// `reconstruct` must be a pure function of its arguments: the decoder
/// depends on it reproducing the encoder's tangent bit for bit.
pub trait TangentQuantizer {
    type Symbol: Clone + std::fmt::Debug + PartialEq;

    fn dim(&self) -> usize;

    fn quantize(&self, predicted: &GrassmannPoint, observed: &GrassmannPoint, error: &TangentVector) -> Result<Self::Symbol>;

    fn reconstruct(&self, symbol: &Self::Symbol, predicted: &GrassmannPoint) -> Result<TangentVector>;
}

impl TangentQuantizer for ShapeGainCodebook {
    type Symbol = CodewordIndex;

    fn dim(&self) -> usize {
        ShapeGainCodebook::dim(self)
    }

    fn quantize(&self, predicted: &GrassmannPoint, observed: &GrassmannPoint, _: &TangentVector) -> Result<CodewordIndex> {
        quantize_tangent(predicted, observed, self)
    }

    fn reconstruct(&self, symbol: &CodewordIndex, predicted: &GrassmannPoint) -> Result<TangentVector> {
        reconstruct_codeword(*symbol, predicted, self)
    }
}

/// Direction-then-magnitude search: picks the direction best aligned with
/// the error tangent, then the nearest magnitude. Cheaper than the joint
/// search but not always optimal.
#[derive(Debug, Clone, Copy)]
pub struct SequentialSearch<'a>(pub &'a ShapeGainCodebook);

impl TangentQuantizer for SequentialSearch<'_> {
    type Symbol = CodewordIndex;

    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn quantize(&self, predicted: &GrassmannPoint, _: &GrassmannPoint, error: &TangentVector) -> Result<CodewordIndex> {
        let cb = self.0;
        if error.is_zero() {
            return Ok(CodewordIndex::new(0, 0));
        }
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for (d, c) in cb.directions.entries().iter().enumerate() {
            let p = cvec::reject(c.coords(), predicted.coords());
            let nrm = cvec::norm(&p);
            if nrm < ZERO_TANGENT_EPS {
                continue;
            }
            let score = cvec::inner(error.direction(), &p).re / nrm;
            if score > best_score {
                best = d;
                best_score = score;
            }
        }
        Ok(CodewordIndex::new(best, cb.magnitudes.nearest(error.magnitude())))
    }

    fn reconstruct(&self, symbol: &CodewordIndex, predicted: &GrassmannPoint) -> Result<TangentVector> {
        reconstruct_codeword(*symbol, predicted, self.0)
    }
}

/// Quantized direction, full-precision magnitude.
#[derive(Debug, Clone, Copy)]
pub struct UnquantizedMagnitude<'a>(pub &'a DirectionCodebook);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionSymbol {
    pub direction: usize,
    pub magnitude: f64,
}

impl TangentQuantizer for UnquantizedMagnitude<'_> {
    type Symbol = DirectionSymbol;

    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn quantize(&self, predicted: &GrassmannPoint, observed: &GrassmannPoint, _: &TangentVector) -> Result<DirectionSymbol> {
        // With the magnitude free, the best point along each projected
        // direction is the closest point of a great circle: maximise
        // |a cos m + b sin m| over m ∈ [0, π/2].
        let a = cvec::inner(observed.coords(), predicted.coords());
        let mut best = DirectionSymbol { direction: 0, magnitude: 0.0 };
        let mut best_score = a.norm_sqr();
        for (d, c) in self.0.entries().iter().enumerate() {
            let Some(p) = projected_unit(c, predicted) else { continue };
            let b = cvec::inner(observed.coords(), &p);
            let (m, score) = best_on_arc(a, b);
            if score > best_score {
                best_score = score;
                best = DirectionSymbol { direction: d, magnitude: m };
            }
        }
        Ok(best)
    }

    fn reconstruct(&self, symbol: &DirectionSymbol, predicted: &GrassmannPoint) -> Result<TangentVector> {
        let c = self.0.get(symbol.direction).ok_or(CodecError::IndexOutOfRange {
            index: symbol.direction as u64,
            size: self.0.len() as u64,
        })?;
        Ok(TangentVector::from_projection(predicted.clone(), symbol.magnitude, c.coords())?)
    }
}

/// Maximises `|a cos m + b sin m|²` for `m ∈ [0, π/2]`.
fn best_on_arc(a: C64, b: C64) -> (f64, f64) {
    let f = |m: f64| (a * m.cos() + b * m.sin()).norm_sqr();
    // f(m) = A cos²m + B sin²m + 2C sin m cos m, extremal where
    // tan 2m = 2C / (A − B).
    let (aa, bb, cc) = (a.norm_sqr(), b.norm_sqr(), (a.conj() * b).re);
    let mut cands = vec![0.0, std::f64::consts::FRAC_PI_2];
    let m0 = 0.5 * (2.0 * cc).atan2(aa - bb);
    for m in [m0, m0 + std::f64::consts::FRAC_PI_2, m0 - std::f64::consts::FRAC_PI_2] {
        if (0.0..=std::f64::consts::FRAC_PI_2).contains(&m) {
            cands.push(m);
        }
    }
    cands
        .into_iter()
        .map(|m| (m, f(m)))
        .fold((0.0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best })
}

/// Infinite-resolution stub: transmits the error tangent itself.
#[derive(Debug, Clone, Copy)]
pub struct Unquantized {
    pub n: usize,
}

impl TangentQuantizer for Unquantized {
    type Symbol = TangentVector;

    fn dim(&self) -> usize {
        self.n
    }

    fn quantize(&self, _: &GrassmannPoint, _: &GrassmannPoint, error: &TangentVector) -> Result<TangentVector> {
        Ok(error.clone())
    }

    fn reconstruct(&self, symbol: &TangentVector, predicted: &GrassmannPoint) -> Result<TangentVector> {
        if symbol.base() != predicted {
            return Err(GeometryError::BaseMismatch { distance: chordal_distance(symbol.base(), predicted)? }.into());
        }
        Ok(symbol.clone())
    }
}

fn projected_unit(c: &GrassmannPoint, base: &GrassmannPoint) -> Option<Vec<C64>> {
    let p = cvec::reject(c.coords(), base.coords());
    let nrm = cvec::norm(&p);
    (nrm >= ZERO_TANGENT_EPS).then(|| cvec::scale_real(&p, 1.0 / nrm))
}

/// Joint exhaustive search over all `N_d·N_m` reconstructed codewords for
/// the one whose geodesic endpoint is closest to `observed`.
///
/// Each candidate endpoint is `x̃ cos m + p_d sin m` with `p_d` the unit
/// projection of direction `d`, so its overlap with `observed` is
/// `a cos m + b_d sin m`; maximising that overlap is the same as minimising
/// chordal distance. Ties go to the lowest serialized index.
pub fn quantize_tangent(predicted: &GrassmannPoint, observed: &GrassmannPoint, codebook: &ShapeGainCodebook) -> Result<CodewordIndex> {
    check_dims(codebook.dim(), predicted)?;
    check_dims(codebook.dim(), observed)?;
    let a = cvec::inner(observed.coords(), predicted.coords());
    let trig: Vec<(f64, f64)> = codebook
        .magnitudes
        .entries()
        .iter()
        .map(|&m| if m > 0.0 { (m.cos(), m.sin()) } else { (1.0, 0.0) })
        .collect();
    let mut best = CodewordIndex::new(0, 0);
    let mut best_score = f64::NEG_INFINITY;
    for (d, c) in codebook.directions.entries().iter().enumerate() {
        let b = projected_unit(c, predicted).map(|p| cvec::inner(observed.coords(), &p));
        for (m, &(cm, sm)) in trig.iter().enumerate() {
            let score = match b {
                Some(b) => (a * cm + b * sm).norm_sqr(),
                None => a.norm_sqr(),
            };
            if score > best_score {
                best_score = score;
                best = CodewordIndex::new(d, m);
            }
        }
    }
    Ok(best)
}

/// Shape-gain recomposition at base `predicted`; the stored direction is
/// projected onto the tangent space there and renormalised.
pub fn reconstruct_codeword(index: CodewordIndex, predicted: &GrassmannPoint, codebook: &ShapeGainCodebook) -> Result<TangentVector> {
    let size = codebook.len() as u64;
    let serial = index.serial(codebook.magnitudes.len());
    let (Some(c), Some(&m)) = (codebook.directions.get(index.direction), codebook.magnitudes.entries().get(index.magnitude))
    else {
        return Err(CodecError::IndexOutOfRange { index: serial, size });
    };
    check_dims(codebook.dim(), predicted)?;
    Ok(TangentVector::from_projection(predicted.clone(), m, c.coords())?)
}

/// Nearest direction codeword by chordal distance, lowest index on ties.
pub fn memoryless_quantize(observed: &GrassmannPoint, directions: &DirectionCodebook) -> Result<(usize, GrassmannPoint)> {
    check_dims(directions.dim(), observed)?;
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (i, c) in directions.entries().iter().enumerate() {
        let score = cvec::inner(c.coords(), observed.coords()).norm_sqr();
        if score > best_score {
            best = i;
            best_score = score;
        }
    }
    Ok((best, directions.entries()[best].clone()))
}

fn check_dims(codebook: usize, x: &GrassmannPoint) -> Result<()> {
    if codebook != x.dim() {
        return Err(CodecError::DimensionMismatch { codebook, signal: x.dim() });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMode {
    /// Both sides start from the true first two points.
    Exact,
    /// Both sides start from memoryless quantizations of them.
    Memoryless,
}

pub fn initialize(x0: &GrassmannPoint, x1: &GrassmannPoint, directions: &DirectionCodebook, mode: InitMode) -> Result<GpcState> {
    let (e0, e1) = match mode {
        InitMode::Exact => (x0.clone(), x1.clone()),
        InitMode::Memoryless => (memoryless_quantize(x0, directions)?.1, memoryless_quantize(x1, directions)?.1),
    };
    GpcState::from_estimates(e0, e1, 2).map_err(CodecError::Init)
}

#[derive(Debug, Clone)]
pub struct EncodeStep<S> {
    pub symbol: S,
    pub state: GpcState,
    pub estimate: GrassmannPoint,
    /// Unquantized error tangent `log_map(x̃[k], x[k])`.
    pub error: TangentVector,
}

pub fn encode_step<Q: TangentQuantizer + ?Sized>(state: &GpcState, observed: &GrassmannPoint, q: &Q) -> Result<EncodeStep<Q::Symbol>> {
    check_dims(q.dim(), observed)?;
    let lost = |source| CodecError::TrackingLost { step: state.time, source };
    let error = log_map(&state.predicted, observed).map_err(lost)?;
    let symbol = q.quantize(&state.predicted, observed, &error)?;
    let tangent = q.reconstruct(&symbol, &state.predicted)?;
    let estimate = exp_map(&state.predicted, &tangent, 1.0).map_err(lost)?;
    let next = state.advance(estimate.clone())?;
    Ok(EncodeStep { symbol, state: next, estimate, error })
}

pub fn decode_step<Q: TangentQuantizer + ?Sized>(state: &GpcState, symbol: &Q::Symbol, q: &Q) -> Result<(GrassmannPoint, GpcState)> {
    let tangent = q.reconstruct(symbol, &state.predicted)?;
    let estimate = exp_map(&state.predicted, &tangent, 1.0)
        .map_err(|source| CodecError::TrackingLost { step: state.time, source })?;
    let next = state.advance(estimate.clone())?;
    Ok((estimate, next))
}

/// Decodes a whole symbol stream, returning the estimates and final state.
pub fn decode_stream<Q: TangentQuantizer + ?Sized>(state: &GpcState, symbols: &[Q::Symbol], q: &Q) -> Result<(Vec<GrassmannPoint>, GpcState)> {
    let mut st = state.clone();
    let mut out = Vec::with_capacity(symbols.len());
    for s in symbols {
        let (est, next) = decode_step(&st, s, q)?;
        out.push(est);
        st = next;
    }
    Ok((out, st))
}

/// Per-step record of a full encoder run over a trace.
#[derive(Debug, Clone, Default)]
pub struct TraceRun<S> {
    /// Step index `k` of each record (the first encoded step is 2).
    pub steps: Vec<usize>,
    pub symbols: Vec<S>,
    pub estimates: Vec<GrassmannPoint>,
    /// `d(x̃[k], x[k])`.
    pub prediction_errors: Vec<f64>,
    /// `d(x̂[k], x[k])`.
    pub estimation_errors: Vec<f64>,
    pub error_tangents: Vec<TangentVector>,
    /// Steps at which tracking was lost and the codec was re-initialized.
    pub resets: Vec<usize>,
}

/// Runs the encoder over `trace[2..]` after initializing on the first two
/// points. On tracking loss at step `k` both sides re-initialize from
/// `(x[k−1], x[k])` in the same mode and resume at `k+1`.
pub fn encode_trace<Q: TangentQuantizer + ?Sized>(
    trace: &[GrassmannPoint],
    q: &Q,
    directions: &DirectionCodebook,
    mode: InitMode,
) -> Result<TraceRun<Q::Symbol>> {
    let mut run = TraceRun {
        steps: Vec::new(),
        symbols: Vec::new(),
        estimates: Vec::new(),
        prediction_errors: Vec::new(),
        estimation_errors: Vec::new(),
        error_tangents: Vec::new(),
        resets: Vec::new(),
    };
    if trace.len() < 3 {
        return Ok(run);
    }
    let mut state = init_at(trace, 1, q, directions, mode)?;
    let mut k = 2;
    while k < trace.len() {
        let x = &trace[k];
        match encode_step(&state, x, q) {
            Ok(step) => {
                run.steps.push(k);
                run.prediction_errors.push(chordal_distance(&state.predicted, x)?);
                run.estimation_errors.push(chordal_distance(&step.estimate, x)?);
                run.symbols.push(step.symbol);
                run.estimates.push(step.estimate);
                run.error_tangents.push(step.error);
                state = step.state;
                k += 1;
            }
            Err(CodecError::TrackingLost { .. }) => {
                run.resets.push(k);
                state = init_at(trace, k, q, directions, mode)?;
                k += 1;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(run)
}

/// State after observing `trace[k−1]` and `trace[k]`, with its clock set
/// to `k+1`. Falls back to exact side information when the memoryless
/// pair is unusable.
fn init_at<Q: TangentQuantizer + ?Sized>(
    trace: &[GrassmannPoint],
    k: usize,
    q: &Q,
    directions: &DirectionCodebook,
    mode: InitMode,
) -> Result<GpcState> {
    check_dims(q.dim(), &trace[k])?;
    let state = match initialize(&trace[k - 1], &trace[k], directions, mode) {
        Ok(s) => s,
        Err(CodecError::Init(_)) if mode == InitMode::Memoryless => {
            initialize(&trace[k - 1], &trace[k], directions, InitMode::Exact)?
        }
        Err(e) => return Err(e),
    };
    Ok(GpcState { time: k as u64 + 1, ..state })
}

pub fn write_index_stream<W: Write>(mut w: W, serials: &[u64]) -> std::io::Result<()> {
    for s in serials {
        writeln!(w, "{s}")?;
    }
    Ok(())
}

pub fn read_index_stream<R: BufRead>(r: R) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| CodecError::Parse { line: i + 1, msg: e.to_string() })?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        out.push(t.parse().map_err(|_| CodecError::Parse { line: i + 1, msg: format!("not an index: `{t}`") })?);
    }
    Ok(out)
}
