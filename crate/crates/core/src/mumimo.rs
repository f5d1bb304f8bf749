//! Zero-forcing multiuser MIMO with limited feedback.

use nalgebra::DMatrix;
use rayon::prelude::*;
use thiserror::Error;

use crate::channel::{gen_ar1, Ar1Params, ChannelError};
use crate::codebook::{random_codebook, CodebookError, ShapeGainCodebook};
use crate::codec::{encode_trace, memoryless_quantize, CodecError, InitMode};
use crate::cvec::{self, C64};
use crate::grassmann::GrassmannPoint;
use crate::rng::{purpose, stream_rng, substream};

/// Smallest singular value below which the composite channel is treated as
/// rank deficient.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum MimoError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("composite channel is rank deficient (smallest singular value {0:e})")]
    RankDeficient(f64),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Codebook(#[from] CodebookError),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

pub type Result<T> = std::result::Result<T, MimoError>;

/// Per-user channel vectors `h_u`, each of length `N_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeChannel {
    rows: Vec<Vec<C64>>,
    nt: usize,
}

impl CompositeChannel {
    pub fn new(rows: Vec<Vec<C64>>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(MimoError::Config("at least one user is required".into()));
        };
        let nt = first.len();
        if rows.iter().any(|r| r.len() != nt) {
            return Err(MimoError::Config("all channel vectors must have the same length".into()));
        }
        if rows.len() > nt {
            return Err(MimoError::Config(format!("{} users exceed {nt} transmit antennas", rows.len())));
        }
        Ok(Self { rows, nt })
    }

    pub fn from_points(points: &[GrassmannPoint]) -> Result<Self> {
        Self::new(points.iter().map(|p| p.coords().to_vec()).collect())
    }

    pub fn users(&self) -> usize {
        self.rows.len()
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn rows(&self) -> &[Vec<C64>] {
        &self.rows
    }

    /// `U × N_t` matrix whose rows are `h_u*`.
    fn matrix(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.users(), self.nt, |u, j| self.rows[u][j].conj())
    }
}

/// Unit-norm transmit vectors, one per user.
#[derive(Debug, Clone, PartialEq)]
pub struct Beamformers {
    pub columns: Vec<Vec<C64>>,
}

/// Normalised columns of the pseudo-inverse of the composite channel.
pub fn zf_beamformers(channels: &CompositeChannel) -> Result<Beamformers> {
    let h = channels.matrix();
    let svd = h.svd(true, true);
    let smin = svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
    let full_rank = smin > RANK_TOL;
    if !full_rank {
        return Err(MimoError::RankDeficient(smin));
    }
    let pinv = svd.pseudo_inverse(0.0).map_err(|e| MimoError::Config(e.to_string()))?;
    let columns = (0..channels.users())
        .map(|u| {
            let col: Vec<C64> = pinv.column(u).iter().copied().collect();
            let nrm = cvec::norm(&col);
            cvec::scale_real(&col, 1.0 / nrm)
        })
        .collect();
    Ok(Beamformers { columns })
}

/// Linear SINR of every user with equal power `P/U` per user, unit noise
/// variance and `P = 10^(snr_db/10)`. `channels` are the true channels.
pub fn per_user_sinr(channels: &CompositeChannel, beamformers: &Beamformers, snr_db: f64) -> Vec<f64> {
    let u_count = channels.users();
    let p_user = 10f64.powf(snr_db / 10.0) / u_count as f64;
    channels
        .rows()
        .iter()
        .enumerate()
        .map(|(u, h)| {
            let mut signal = 0.0;
            let mut interference = 0.0;
            for (n, v) in beamformers.columns.iter().enumerate() {
                let g = cvec::inner(h, v).norm_sqr();
                if n == u {
                    signal = g;
                } else {
                    interference += g;
                }
            }
            p_user * signal / (1.0 + p_user * interference)
        })
        .collect()
}

pub fn sum_rate(sinrs: &[f64]) -> f64 {
    sinrs.iter().map(|s| (1.0 + s).log2()).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SumRateResult {
    pub per_user_sinr: Vec<f64>,
    pub per_user_rate: Vec<f64>,
    pub sum_rate: f64,
    pub snr_db: f64,
}

impl SumRateResult {
    pub fn evaluate(channels: &CompositeChannel, beamformers: &Beamformers, snr_db: f64) -> Self {
        let per_user_sinr = per_user_sinr(channels, beamformers, snr_db);
        let per_user_rate: Vec<f64> = per_user_sinr.iter().map(|s| (1.0 + s).log2()).collect();
        let sum_rate = per_user_rate.iter().sum();
        Self { per_user_sinr, per_user_rate, sum_rate, snr_db }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    PerfectCsi,
    MemorylessRandom,
    Gpc,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::PerfectCsi => "perfect_csi",
            Scheme::MemorylessRandom => "memoryless_random",
            Scheme::Gpc => "gpc",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "perfect_csi" => Some(Scheme::PerfectCsi),
            "memoryless_random" => Some(Scheme::MemorylessRandom),
            "gpc" => Some(Scheme::Gpc),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SumRateConfig {
    pub schemes: Vec<Scheme>,
    pub nt: usize,
    pub users: usize,
    pub snr_db: Vec<f64>,
    /// Normalised Doppler grid for the GPC scheme.
    pub fdts: Vec<f64>,
    /// Feedback bits per user for the random-codebook scheme.
    pub bits: u32,
    pub trials: usize,
    /// Trace length per GPC trial, including the discarded transient.
    pub steps: usize,
    pub transient: usize,
    pub init: InitMode,
    pub seed: u64,
    /// GPC codebooks shared by all users: either one for every fdts value
    /// or one per entry of `fdts`.
    pub codebooks: Vec<ShapeGainCodebook>,
}

impl SumRateConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(MimoError::Config(m));
        if self.users == 0 || self.users > self.nt {
            return bad(format!("users = {} must be in 1..={}", self.users, self.nt));
        }
        if self.trials == 0 {
            return bad("trials must be positive".into());
        }
        if self.snr_db.is_empty() {
            return bad("snr_db grid is empty".into());
        }
        if self.schemes.contains(&Scheme::Gpc) {
            if self.codebooks.is_empty() {
                return bad("gpc scheme needs a codebook".into());
            }
            if self.codebooks.len() != 1 && self.codebooks.len() != self.fdts.len() {
                return bad(format!("{} codebooks for {} fdts values", self.codebooks.len(), self.fdts.len()));
            }
            if let Some(cb) = self.codebooks.iter().find(|cb| cb.dim() != self.nt) {
                return bad(format!("codebook dimension {} differs from nt = {}", cb.dim(), self.nt));
            }
            if self.fdts.is_empty() {
                return bad("fdts grid is empty".into());
            }
            if self.steps < self.transient + 3 {
                return bad(format!("steps = {} leaves nothing after the {}-step transient", self.steps, self.transient));
            }
        }
        if self.bits > 20 {
            return bad(format!("bits = {} is too large for an exhaustive random codebook", self.bits));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SumRateRow {
    pub scheme: Scheme,
    pub snr_db: f64,
    /// `None` for the i.i.d. schemes.
    pub fdts: Option<f64>,
    pub bits: u32,
    pub trial_count: usize,
    pub sum_rate_mean: f64,
    pub sum_rate_stderr: f64,
}

/// Runs every configured scheme; rows come out in scheme, fdts, SNR order.
pub fn run_sumrate_experiment(cfg: &SumRateConfig) -> Result<Vec<SumRateRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &scheme in &cfg.schemes {
        match scheme {
            Scheme::PerfectCsi | Scheme::MemorylessRandom => {
                let per_trial: Vec<Vec<f64>> = (0..cfg.trials)
                    .into_par_iter()
                    .map(|t| iid_trial(cfg, scheme, t as u64))
                    .collect::<Result<_>>()?;
                let bits = if scheme == Scheme::PerfectCsi { 0 } else { cfg.bits };
                push_rows(&mut rows, cfg, scheme, None, bits, &per_trial);
            }
            Scheme::Gpc => {
                for (i, &beta) in cfg.fdts.iter().enumerate() {
                    let cb = &cfg.codebooks[i.min(cfg.codebooks.len() - 1)];
                    let per_trial: Vec<Vec<f64>> = (0..cfg.trials)
                        .into_par_iter()
                        .map(|t| gpc_trial(cfg, cb, beta, t as u64))
                        .collect::<Result<_>>()?;
                    push_rows(&mut rows, cfg, scheme, Some(beta), cb.bits(), &per_trial);
                }
            }
        }
    }
    Ok(rows)
}

fn push_rows(rows: &mut Vec<SumRateRow>, cfg: &SumRateConfig, scheme: Scheme, fdts: Option<f64>, bits: u32, per_trial: &[Vec<f64>]) {
    for (i, &snr_db) in cfg.snr_db.iter().enumerate() {
        let xs: Vec<f64> = per_trial.iter().map(|t| t[i]).collect();
        let (mean, stderr) = crate::analysis::mean_stderr(&xs);
        rows.push(SumRateRow { scheme, snr_db, fdts, bits, trial_count: xs.len(), sum_rate_mean: mean, sum_rate_stderr: stderr });
    }
}

/// One i.i.d. channel draw; returns the sum rate at every SNR point.
fn iid_trial(cfg: &SumRateConfig, scheme: Scheme, trial: u64) -> Result<Vec<f64>> {
    let mut rng = stream_rng(cfg.seed, substream(purpose::CHANNEL, trial, 0xffff));
    let h: Vec<Vec<C64>> = (0..cfg.users).map(|_| cvec::complex_gaussian_vec(&mut rng, cfg.nt)).collect();
    let channels = CompositeChannel::new(h)?;
    let feedback = match scheme {
        Scheme::PerfectCsi => channels.clone(),
        _ => {
            let mut cb_rng = stream_rng(cfg.seed, substream(purpose::CODEBOOK, trial, 0));
            let q: Vec<GrassmannPoint> = channels
                .rows()
                .iter()
                .map(|h| {
                    let cb = random_codebook(&mut cb_rng, cfg.nt, 1 << cfg.bits)?;
                    let g = GrassmannPoint::normalize(h.clone()).map_err(CodebookError::from)?;
                    Ok(memoryless_quantize(&g, &cb)?.1)
                })
                .collect::<Result<_>>()?;
            CompositeChannel::from_points(&q)?
        }
    };
    let bf = zf_beamformers(&feedback)?;
    Ok(cfg.snr_db.iter().map(|&s| sum_rate(&per_user_sinr(&channels, &bf, s))).collect())
}

/// One GPC trial: every user tracks an independent AR(1) trace with the
/// shared codebook; the transmitter zero-forces on the decoded estimates at
/// every step. Returns the steady-state mean sum rate per SNR point.
fn gpc_trial(cfg: &SumRateConfig, cb: &ShapeGainCodebook, beta: f64, trial: u64) -> Result<Vec<f64>> {
    let mut traces = Vec::with_capacity(cfg.users);
    let mut runs = Vec::with_capacity(cfg.users);
    for u in 0..cfg.users {
        let params = Ar1Params::new(cfg.nt, beta, cfg.steps, cfg.seed).with_stream(substream(purpose::CHANNEL, trial, u as u64));
        let trace = gen_ar1(&params)?;
        let run = encode_trace(&trace.normalized, cb, &cb.directions, cfg.init)?;
        traces.push(trace);
        runs.push(run);
    }
    let mut acc = vec![0.0; cfg.snr_db.len()];
    let mut count = 0usize;
    for k in cfg.transient.max(2)..cfg.steps {
        // Tracking loss resets shift a user's records; look steps up by index.
        let mut est = Vec::with_capacity(cfg.users);
        for run in &runs {
            match run.steps.binary_search(&k) {
                Ok(i) => est.push(run.estimates[i].clone()),
                Err(_) => break,
            }
        }
        if est.len() != cfg.users {
            continue;
        }
        let channels = CompositeChannel::new(traces.iter().map(|t| t.raw[k].clone()).collect())?;
        let Ok(bf) = zf_beamformers(&CompositeChannel::from_points(&est)?) else { continue };
        for (a, &s) in acc.iter_mut().zip(&cfg.snr_db) {
            *a += sum_rate(&per_user_sinr(&channels, &bf, s));
        }
        count += 1;
    }
    if count == 0 {
        return Err(MimoError::Config("no steady-state steps were usable".into()));
    }
    Ok(acc.into_iter().map(|a| a / count as f64).collect())
}
