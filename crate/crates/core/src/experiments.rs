//! Monte-Carlo pipelines behind each CLI command.
//!
//! Every trial draws its trace from its own RNG substream and trials are
//! reduced in index order, so results do not depend on the thread count.

use rayon::prelude::*;
use thiserror::Error;

use crate::analysis::{self, AnalysisError};
use crate::channel::{gen_ar1, gen_ar2, Ar1Params, Ar2Params, ChannelError, ChannelTrace};
use crate::codebook::train::{
    harvest_closed_loop, harvest_open_loop, lloyd_direction, lloyd_magnitude, TrainingSet,
};
use crate::codebook::{
    random_packing, uniform_magnitude, CodebookError, DirectionCodebook, MagnitudeCodebook, ShapeGainCodebook,
};
use crate::codec::{encode_trace, memoryless_quantize, CodecError, InitMode, TangentQuantizer, UnquantizedMagnitude};
use crate::grassmann::{chordal_distance, GeometryError, GrassmannPoint};
use crate::mumimo::{self, MimoError, Scheme, SumRateConfig, SumRateRow};
use crate::rng::{purpose, substream};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Codebook(#[from] CodebookError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Mimo(#[from] MimoError),
}

impl ExperimentError {
    /// True for errors caused by the configuration rather than the numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            ExperimentError::Config(_)
                | ExperimentError::Channel(ChannelError::InvalidParams(_))
                | ExperimentError::Mimo(MimoError::Config(_))
                | ExperimentError::Codebook(
                    CodebookError::NotPowerOfTwo(_)
                        | CodebookError::InvalidRange { .. }
                        | CodebookError::Empty
                        | CodebookError::Io(_)
                        | CodebookError::Parse { .. }
                        | CodebookError::NotUnitRow { .. }
                        | CodebookError::DimensionMismatch { .. }
                )
        )
    }
}

pub type Result<T> = std::result::Result<T, ExperimentError>;

fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(ExperimentError::Config(msg.into()))
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceModel {
    Ar1 { n: usize, beta: f64 },
    Ar2 { n: usize, a1: f64, a2: f64, noise_std: f64 },
}

impl TraceModel {
    pub fn dim(&self) -> usize {
        match *self {
            TraceModel::Ar1 { n, .. } | TraceModel::Ar2 { n, .. } => n,
        }
    }

    pub fn with_beta(&self, beta: f64) -> Self {
        match *self {
            TraceModel::Ar1 { n, .. } => TraceModel::Ar1 { n, beta },
            ref other => other.clone(),
        }
    }

    pub fn generate(&self, steps: usize, seed: u64, stream: u64) -> Result<ChannelTrace> {
        Ok(match *self {
            TraceModel::Ar1 { n, beta } => gen_ar1(&Ar1Params::new(n, beta, steps, seed).with_stream(stream))?,
            TraceModel::Ar2 { n, a1, a2, noise_std } => gen_ar2(&Ar2Params {
                n,
                a1,
                a2,
                noise_std,
                steps,
                seed,
                stream,
            })?,
        })
    }
}

/// Normalised traces for trials `0..count`, tagged with `tag` so that
/// evaluation, training and held-out sets never share a stream.
pub fn trial_traces(model: &TraceModel, steps: usize, count: usize, seed: u64, tag: u8) -> Result<Vec<Vec<GrassmannPoint>>> {
    (0..count)
        .into_par_iter()
        .map(|t| Ok(model.generate(steps, seed, substream(tag, t as u64, 0))?.normalized))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum DirectionSpec {
    /// Best-of-`candidates` random Grassmannian packing.
    Packing { bits: u32, candidates: usize },
    /// Open-loop then closed-loop Lloyd on harvested tangents.
    Lloyd { bits: u32 },
    /// A codebook supplied by the caller, for example loaded from a file.
    Given(DirectionCodebook),
}

impl DirectionSpec {
    pub fn bits(&self) -> u32 {
        match self {
            DirectionSpec::Packing { bits, .. } | DirectionSpec::Lloyd { bits } => *bits,
            DirectionSpec::Given(d) => d.bits(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MagnitudeSpec {
    Uniform { bits: u32, lo: f64, hi: f64 },
    Lloyd { bits: u32 },
    Given(MagnitudeCodebook),
}

impl MagnitudeSpec {
    pub fn bits(&self) -> u32 {
        match self {
            MagnitudeSpec::Uniform { bits, .. } | MagnitudeSpec::Lloyd { bits } => *bits,
            MagnitudeSpec::Given(m) => m.bits(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodebookSpec {
    pub directions: DirectionSpec,
    pub magnitudes: MagnitudeSpec,
    pub max_iters: usize,
    /// Training traces used when either half is trained.
    pub train_traces: usize,
    pub train_steps: usize,
    /// Packing candidates for the fallback direction codebook when
    /// training data has too few nonzero tangents.
    pub fallback_candidates: usize,
}

impl CodebookSpec {
    pub fn fixed(directions: DirectionSpec, magnitudes: MagnitudeSpec) -> Self {
        Self { directions, magnitudes, max_iters: 100, train_traces: 4, train_steps: 2_500, fallback_candidates: 100 }
    }

    /// Spec that reproduces `codebook` without training.
    pub fn given(codebook: ShapeGainCodebook) -> Self {
        Self::fixed(DirectionSpec::Given(codebook.directions), MagnitudeSpec::Given(codebook.magnitudes))
    }

    pub fn needs_training(&self) -> bool {
        matches!(self.directions, DirectionSpec::Lloyd { .. }) || matches!(self.magnitudes, MagnitudeSpec::Lloyd { .. })
    }

    pub fn bits(&self) -> u32 {
        self.directions.bits() + self.magnitudes.bits()
    }
}

#[derive(Debug, Clone)]
pub struct StageReport {
    pub codebook: ShapeGainCodebook,
    pub direction_history: Vec<f64>,
    pub magnitude_history: Vec<f64>,
    pub samples: usize,
    pub skipped: usize,
    /// Operational MSE of this codebook over the training traces.
    pub training_mse: f64,
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub open_loop: StageReport,
    pub closed_loop: StageReport,
    pub warnings: Vec<String>,
}

fn fixed_directions(spec: &DirectionSpec, n: usize, seed: u64) -> Result<Option<DirectionCodebook>> {
    Ok(match spec {
        DirectionSpec::Packing { bits, candidates } => Some(random_packing(n, 1 << bits, *candidates, seed)?),
        DirectionSpec::Lloyd { .. } => None,
        DirectionSpec::Given(d) if d.dim() != n => {
            return config_err(format!("direction codebook has dimension {} but the traces have n = {n}", d.dim()))
        }
        DirectionSpec::Given(d) => Some(d.clone()),
    })
}

fn fixed_magnitudes(spec: &MagnitudeSpec) -> Result<Option<MagnitudeCodebook>> {
    Ok(match spec {
        MagnitudeSpec::Uniform { bits, lo, hi } => Some(uniform_magnitude(1 << bits, *lo, *hi)?),
        MagnitudeSpec::Lloyd { .. } => None,
        MagnitudeSpec::Given(m) => Some(m.clone()),
    })
}

/// Open-loop stage followed by one closed-loop refinement. Halves of the
/// codebook given as fixed specs are kept as they are.
pub fn train_codebook(traces: &[Vec<GrassmannPoint>], spec: &CodebookSpec, seed: u64) -> Result<TrainReport> {
    let n = traces.first().map(|t| t.first().map_or(0, |p| p.dim())).unwrap_or(0);
    if n < 2 {
        return config_err("training needs at least one non-empty trace");
    }
    let fixed_d = fixed_directions(&spec.directions, n, seed)?;
    let fixed_m = fixed_magnitudes(&spec.magnitudes)?;
    let mut warnings = Vec::new();

    let mut open = TrainingSet::default();
    for t in traces {
        open.extend(harvest_open_loop(t)?);
    }
    let stage1 = fit_stage(&open, spec, fixed_d.as_ref(), fixed_m.as_ref(), n, seed, &mut warnings)?;
    let stage1 = finish_stage(stage1, &open, traces)?;

    let mut closed = TrainingSet::default();
    for t in traces {
        closed.extend(harvest_closed_loop(t, &stage1.codebook, &stage1.codebook.directions)?);
    }
    let stage2 = fit_stage(&closed, spec, fixed_d.as_ref(), fixed_m.as_ref(), n, seed.wrapping_add(1), &mut warnings)?;
    let stage2 = finish_stage(stage2, &closed, traces)?;
    Ok(TrainReport { open_loop: stage1, closed_loop: stage2, warnings })
}

struct Fitted {
    codebook: ShapeGainCodebook,
    direction_history: Vec<f64>,
    magnitude_history: Vec<f64>,
}

fn fit_stage(
    set: &TrainingSet,
    spec: &CodebookSpec,
    fixed_d: Option<&DirectionCodebook>,
    fixed_m: Option<&MagnitudeCodebook>,
    n: usize,
    seed: u64,
    warnings: &mut Vec<String>,
) -> Result<Fitted> {
    let (directions, direction_history) = match fixed_d {
        Some(d) => (d.clone(), Vec::new()),
        None => {
            let n_d = 1usize << spec.directions.bits();
            match lloyd_direction(set, n_d, spec.max_iters, seed) {
                Ok(out) => (out.codebook, out.history),
                Err(CodebookError::InsufficientSamples { need, have } | CodebookError::Duplicate { first: need, second: have }) => {
                    warnings.push(format!(
                        "too few distinct nonzero error tangents for {n_d} direction codewords ({need}/{have}); using a random packing"
                    ));
                    (random_packing(n, n_d, spec.fallback_candidates, seed)?, Vec::new())
                }
                Err(e) => return Err(e.into()),
            }
        }
    };
    let (magnitudes, magnitude_history) = match fixed_m {
        Some(m) => (m.clone(), Vec::new()),
        None => {
            let mags = set.magnitudes();
            let out = lloyd_magnitude(&mags, 1 << spec.magnitudes.bits(), spec.max_iters)?;
            if out.codebook.entries().iter().all(|&m| m == 0.0) {
                warnings.push("all error tangents are zero; magnitude codebook is degenerate".into());
            }
            (out.codebook, out.history)
        }
    };
    Ok(Fitted { codebook: ShapeGainCodebook::new(directions, magnitudes)?, direction_history, magnitude_history })
}

fn finish_stage(f: Fitted, set: &TrainingSet, traces: &[Vec<GrassmannPoint>]) -> Result<StageReport> {
    let stats = evaluate_gpc(traces, &f.codebook, &f.codebook.directions, InitMode::Exact, 0)?;
    Ok(StageReport {
        codebook: f.codebook,
        direction_history: f.direction_history,
        magnitude_history: f.magnitude_history,
        samples: set.len(),
        skipped: set.skipped,
        training_mse: stats.mse,
    })
}

/// Builds a codebook from `spec`, training on traces of `model` when needed.
pub fn build_codebook(spec: &CodebookSpec, model: &TraceModel, seed: u64) -> Result<ShapeGainCodebook> {
    if !spec.needs_training() {
        let n = model.dim();
        let d = fixed_directions(&spec.directions, n, seed)?.expect("fixed");
        let m = fixed_magnitudes(&spec.magnitudes)?.expect("fixed");
        return Ok(ShapeGainCodebook::new(d, m)?);
    }
    let traces = trial_traces(model, spec.train_steps, spec.train_traces, seed, purpose::TRAINING_TRACE)?;
    Ok(train_codebook(&traces, spec, seed)?.closed_loop.codebook)
}

/// Aggregate codec behaviour over a set of traces.
#[derive(Debug, Clone, PartialEq)]
pub struct GpcStats {
    /// Mean of `d²(x̂[k], x[k])` over kept steps.
    pub mse: f64,
    /// Standard error of the per-trace MSE.
    pub mse_stderr: f64,
    /// Mean of `d²(x̃[k], x[k])` over kept steps.
    pub prediction_mse: f64,
    /// Standard error of the per-trace prediction MSE.
    pub prediction_mse_stderr: f64,
    pub steps: usize,
    pub resets: usize,
}

/// Runs the codec over every trace and pools steps `k ≥ transient`.
pub fn evaluate_gpc<Q>(traces: &[Vec<GrassmannPoint>], q: &Q, directions: &DirectionCodebook, mode: InitMode, transient: usize) -> Result<GpcStats>
where
    Q: TangentQuantizer + Sync + ?Sized,
{
    let per: Vec<(f64, f64, usize, usize)> = traces
        .par_iter()
        .map(|t| {
            let run = encode_trace(t, q, directions, mode)?;
            let (mut se, mut sp, mut c) = (0.0, 0.0, 0usize);
            for (i, &k) in run.steps.iter().enumerate() {
                if k >= transient {
                    se += run.estimation_errors[i].powi(2);
                    sp += run.prediction_errors[i].powi(2);
                    c += 1;
                }
            }
            Ok((se, sp, c, run.resets.len()))
        })
        .collect::<Result<_>>()?;
    let steps: usize = per.iter().map(|p| p.2).sum();
    if steps == 0 {
        return config_err("no steps left after the transient");
    }
    let mse = per.iter().map(|p| p.0).sum::<f64>() / steps as f64;
    let prediction_mse = per.iter().map(|p| p.1).sum::<f64>() / steps as f64;
    let kept: Vec<_> = per.iter().filter(|p| p.2 > 0).collect();
    let (_, mse_stderr) = analysis::mean_stderr(&kept.iter().map(|p| p.0 / p.2 as f64).collect::<Vec<_>>());
    let (_, prediction_mse_stderr) = analysis::mean_stderr(&kept.iter().map(|p| p.1 / p.2 as f64).collect::<Vec<_>>());
    Ok(GpcStats { mse, mse_stderr, prediction_mse, prediction_mse_stderr, steps, resets: per.iter().map(|p| p.3).sum() })
}

/// Mean squared chordal error of memoryless quantization over every point.
pub fn evaluate_memoryless(traces: &[Vec<GrassmannPoint>], directions: &DirectionCodebook) -> Result<(f64, f64)> {
    let per: Vec<f64> = traces
        .par_iter()
        .map(|t| {
            let mut s = 0.0;
            for x in t {
                let (_, q) = memoryless_quantize(x, directions)?;
                s += chordal_distance(&q, x)?.powi(2);
            }
            Ok(s / t.len() as f64)
        })
        .collect::<Result<_>>()?;
    Ok(analysis::mean_stderr(&per))
}

// ---------------------------------------------------------------- MSE

#[derive(Debug, Clone)]
pub struct MseConfig {
    pub n: usize,
    pub betas: Vec<f64>,
    pub steps: usize,
    pub trials: usize,
    pub transient: usize,
    pub init: InitMode,
    pub seed: u64,
    pub gpc: CodebookSpec,
    pub memoryless_bits: Vec<u32>,
    pub packing_candidates: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MseRow {
    pub scheme: &'static str,
    pub bits: u32,
    pub beta: f64,
    pub mse: f64,
    pub mse_stderr: f64,
    pub mse_db: f64,
}

pub fn run_mse(cfg: &MseConfig) -> Result<Vec<MseRow>> {
    if cfg.betas.is_empty() || cfg.trials == 0 {
        return config_err("mse needs a nonempty beta grid and trials > 0");
    }
    let memoryless: Vec<(u32, DirectionCodebook)> = cfg
        .memoryless_bits
        .iter()
        .map(|&b| Ok((b, random_packing(cfg.n, 1 << b, cfg.packing_candidates, cfg.seed)?)))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for &beta in &cfg.betas {
        let model = TraceModel::Ar1 { n: cfg.n, beta };
        let traces = trial_traces(&model, cfg.steps, cfg.trials, cfg.seed, purpose::CHANNEL)?;
        let cb = build_codebook(&cfg.gpc, &model, cfg.seed)?;
        let s = evaluate_gpc(&traces, &cb, &cb.directions, cfg.init, cfg.transient)?;
        rows.push(MseRow { scheme: "gpc", bits: cb.bits(), beta, mse: s.mse, mse_stderr: s.mse_stderr, mse_db: analysis::to_db(s.mse) });
        for (b, dirs) in &memoryless {
            let (mse, se) = evaluate_memoryless(&traces, dirs)?;
            rows.push(MseRow { scheme: "memoryless", bits: *b, beta, mse, mse_stderr: se, mse_db: analysis::to_db(mse) });
        }
    }
    Ok(rows)
}

// ---------------------------------------------------------------- distortion

#[derive(Debug, Clone)]
pub struct DistortionConfig {
    pub model: TraceModel,
    pub steps: usize,
    pub trials: usize,
    pub transient: usize,
    pub init: InitMode,
    pub seed: u64,
    pub directions: DirectionSpec,
    pub magnitude_bits: Vec<u32>,
    /// Uniform magnitude range; `None` trains the magnitudes with Lloyd.
    pub magnitude_range: Option<(f64, f64)>,
    pub max_iters: usize,
    pub train_traces: usize,
    pub train_steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistortionRow {
    pub n_d: usize,
    pub n_m: usize,
    pub total_bits: u32,
    pub operational: f64,
    pub operational_stderr: f64,
    pub d_lower: f64,
    pub d_upper: f64,
    pub gamma_lower: f64,
    pub lambda_upper: f64,
    pub memoryless_bound: f64,
}

pub fn run_distortion(cfg: &DistortionConfig) -> Result<Vec<DistortionRow>> {
    if cfg.magnitude_bits.is_empty() || cfg.trials == 0 {
        return config_err("distortion needs magnitude_bits and trials > 0");
    }
    let n = cfg.model.dim();
    let traces = trial_traces(&cfg.model, cfg.steps, cfg.trials, cfg.seed, purpose::CHANNEL)?;
    let mut rows = Vec::new();
    for &bm in &cfg.magnitude_bits {
        let magnitudes = match cfg.magnitude_range {
            Some((lo, hi)) => MagnitudeSpec::Uniform { bits: bm, lo, hi },
            None => MagnitudeSpec::Lloyd { bits: bm },
        };
        let spec = CodebookSpec {
            directions: cfg.directions.clone(),
            magnitudes,
            max_iters: cfg.max_iters,
            train_traces: cfg.train_traces,
            train_steps: cfg.train_steps,
            fallback_candidates: 100,
        };
        let cb = build_codebook(&spec, &cfg.model, cfg.seed)?;
        let s = evaluate_gpc(&traces, &cb, &cb.directions, cfg.init, cfg.transient)?;
        let b = analysis::gpc_distortion_bounds(n, &cb)?;
        rows.push(DistortionRow {
            n_d: cb.directions.len(),
            n_m: cb.magnitudes.len(),
            total_bits: cb.bits(),
            operational: s.mse,
            operational_stderr: s.mse_stderr,
            d_lower: b.lower,
            d_upper: b.upper,
            gamma_lower: b.gamma_lower,
            lambda_upper: b.lambda_upper,
            memoryless_bound: analysis::memoryless_lower_bound(n, cb.len())?,
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------- gains

#[derive(Debug, Clone)]
pub struct GainsConfig {
    pub n: usize,
    pub betas: Vec<f64>,
    pub steps: usize,
    pub trials: usize,
    pub transient: usize,
    pub init: InitMode,
    pub seed: u64,
    pub directions: DirectionSpec,
    pub magnitude_bits: Vec<u32>,
    pub magnitude_lo: f64,
    pub magnitude_hi: f64,
    pub unquantized: bool,
    pub max_iters: usize,
    pub train_traces: usize,
    pub train_steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainsRow {
    /// `None` for the unquantized-magnitude curve.
    pub magnitude_bits: Option<u32>,
    pub beta: f64,
    pub g_clp: f64,
    pub g_clp_db: f64,
    /// Delta-method standard error of `g_clp_db` across traces.
    pub g_clp_db_stderr: f64,
}

pub fn run_gains(cfg: &GainsConfig) -> Result<Vec<GainsRow>> {
    if cfg.betas.is_empty() || cfg.trials == 0 {
        return config_err("gains needs a nonempty beta grid and trials > 0");
    }
    let mut rows = Vec::new();
    for &beta in &cfg.betas {
        let model = TraceModel::Ar1 { n: cfg.n, beta };
        let traces = trial_traces(&model, cfg.steps, cfg.trials, cfg.seed, purpose::CHANNEL)?;
        let mut directions: Option<DirectionCodebook> = None;
        for &bm in &cfg.magnitude_bits {
            let spec = CodebookSpec {
                directions: cfg.directions.clone(),
                magnitudes: MagnitudeSpec::Uniform { bits: bm, lo: cfg.magnitude_lo, hi: cfg.magnitude_hi },
                max_iters: cfg.max_iters,
                train_traces: cfg.train_traces,
                train_steps: cfg.train_steps,
                fallback_candidates: 100,
            };
            let cb = build_codebook(&spec, &model, cfg.seed)?;
            let s = evaluate_gpc(&traces, &cb, &cb.directions, cfg.init, cfg.transient)?;
            rows.push(gains_row(Some(bm), beta, &s));
            directions.get_or_insert(cb.directions);
        }
        if cfg.unquantized {
            let dirs = match directions {
                Some(d) => d,
                None => fixed_directions(&cfg.directions, cfg.n, cfg.seed)?
                    .ok_or_else(|| ExperimentError::Config("unquantized-only gains needs packed directions".into()))?,
            };
            let q = UnquantizedMagnitude(&dirs);
            let s = evaluate_gpc(&traces, &q, &dirs, cfg.init, cfg.transient)?;
            rows.push(gains_row(None, beta, &s));
        }
    }
    Ok(rows)
}

fn gains_row(magnitude_bits: Option<u32>, beta: f64, s: &GpcStats) -> GainsRow {
    let g_clp = if s.prediction_mse > 0.0 { 1.0 / s.prediction_mse } else { f64::INFINITY };
    let g_clp_db_stderr = 10.0 / std::f64::consts::LN_10 * s.prediction_mse_stderr / s.prediction_mse;
    GainsRow { magnitude_bits, beta, g_clp, g_clp_db: analysis::to_db(g_clp), g_clp_db_stderr }
}

// ---------------------------------------------------------------- sum rate

#[derive(Debug, Clone)]
pub struct SumRateExperiment {
    pub schemes: Vec<Scheme>,
    pub nt: usize,
    pub users: usize,
    pub snr_db: Vec<f64>,
    pub fdts: Vec<f64>,
    pub bits: u32,
    pub trials: usize,
    pub steps: usize,
    pub transient: usize,
    pub init: InitMode,
    pub seed: u64,
    pub gpc: CodebookSpec,
}

pub fn run_sumrate(cfg: &SumRateExperiment) -> Result<Vec<SumRateRow>> {
    let codebooks = if cfg.schemes.contains(&Scheme::Gpc) {
        if cfg.gpc.bits() != cfg.bits {
            return config_err(format!("gpc codebook has {} bits but bits = {}", cfg.gpc.bits(), cfg.bits));
        }
        if cfg.gpc.needs_training() {
            cfg.fdts
                .iter()
                .map(|&b| build_codebook(&cfg.gpc, &TraceModel::Ar1 { n: cfg.nt, beta: b }, cfg.seed))
                .collect::<Result<_>>()?
        } else {
            vec![build_codebook(&cfg.gpc, &TraceModel::Ar1 { n: cfg.nt, beta: 0.0 }, cfg.seed)?]
        }
    } else {
        Vec::new()
    };
    let mc = SumRateConfig {
        schemes: cfg.schemes.clone(),
        nt: cfg.nt,
        users: cfg.users,
        snr_db: cfg.snr_db.clone(),
        fdts: cfg.fdts.clone(),
        bits: cfg.bits,
        trials: cfg.trials,
        steps: cfg.steps,
        transient: cfg.transient,
        init: cfg.init,
        seed: cfg.seed,
        codebooks,
    };
    Ok(mumimo::run_sumrate_experiment(&mc)?)
}
