//! Temporally correlated Rayleigh channel traces.
//!
//! Two generators are provided:
//!
//! * first-order Gauss-Markov, `h[k] = a h[k-1] + sqrt(1 - a^2) z[k]` with
//!   `a = J0(2 pi fD Ts)`;
//! * two-tap autoregression, `h[k] = a1 h[k-1] + a2 h[k-2] + s z[k]`, where
//!   the noise scale `s` is a free parameter.
//!
//! `z[k]` is i.i.d. circular complex Gaussian with unit variance per entry.

use crate::cvec::{self, C64};
use crate::grassmann::{GeometryError, GrassmannPoint};
use crate::rng::stream_rng;
use std::f64::consts::{FRAC_PI_4, PI};
use std::io::{self, Write};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("invalid channel parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Zeroth-order Bessel function of the first kind.
///
/// Power series up to |x| = 13, Hankel asymptotic expansion beyond; absolute
/// error stays below 1e-11 on [0, 20].
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= 13.0 {
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..200 {
            term *= -q / ((k * k) as f64);
            sum += term;
            if term.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        sum
    } else {
        // a_k = a_{k-1} * -(2k-1)^2 / (8k); t_k = a_k / x^k.
        // P = t0 - t2 + t4 - ..., Q = t1 - t3 + t5 - ...
        let mut p = 1.0;
        let mut q = 0.0;
        let mut term = 1.0;
        let mut prev_abs = f64::INFINITY;
        for k in 1..100usize {
            let odd = (2 * k - 1) as f64;
            term *= -odd * odd / (8.0 * k as f64 * x);
            let abs = term.abs();
            if abs > prev_abs || abs < 1e-18 {
                break;
            }
            prev_abs = abs;
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            if k % 2 == 0 {
                p += sign * term;
            } else {
                q += sign * term;
            }
        }
        let chi = x - FRAC_PI_4;
        (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
    }
}

/// Gauss-Markov correlation coefficient `J0(2 pi beta)` for normalised
/// Doppler `beta = fD Ts`.
pub fn ar1_coefficient(beta: f64) -> f64 {
    bessel_j0(2.0 * PI * beta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ar1Params {
    pub n: usize,
    /// Normalised Doppler `fD Ts`.
    pub beta: f64,
    pub steps: usize,
    pub seed: u64,
    /// Substream id; independent users use distinct streams under one seed.
    pub stream: u64,
}

impl Ar1Params {
    pub fn new(n: usize, beta: f64, steps: usize, seed: u64) -> Self {
        Self {
            n,
            beta,
            steps,
            seed,
            stream: 0,
        }
    }

    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }

    pub fn alpha(&self) -> f64 {
        ar1_coefficient(self.beta)
    }

    fn validate(&self) -> Result<(), ChannelError> {
        if self.n < 2 {
            return Err(ChannelError::InvalidParams(format!("n must be >= 2, got {}", self.n)));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(ChannelError::InvalidParams(format!("beta must be >= 0, got {}", self.beta)));
        }
        if self.steps < 3 {
            return Err(ChannelError::InvalidParams(format!("steps must be >= 3, got {}", self.steps)));
        }
        let alpha = self.alpha();
        if !(alpha > -1.0 && alpha <= 1.0) {
            return Err(ChannelError::InvalidParams(format!("J0(2 pi beta) = {alpha} outside (-1, 1]")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ar2Params {
    pub n: usize,
    pub a1: f64,
    pub a2: f64,
    /// Standard deviation of the complex innovation (total over re and im).
    pub noise_std: f64,
    pub steps: usize,
    pub seed: u64,
    pub stream: u64,
}

impl Ar2Params {
    fn validate(&self) -> Result<(), ChannelError> {
        if self.n < 2 {
            return Err(ChannelError::InvalidParams(format!("n must be >= 2, got {}", self.n)));
        }
        if self.steps < 3 {
            return Err(ChannelError::InvalidParams(format!("steps must be >= 3, got {}", self.steps)));
        }
        if !(self.a1.is_finite() && self.a2.is_finite() && self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(ChannelError::InvalidParams("a1, a2 and noise_std must be finite, noise_std >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelModel {
    Ar1,
    Ar2,
}

impl ChannelModel {
    pub fn name(self) -> &'static str {
        match self {
            ChannelModel::Ar1 => "ar1",
            ChannelModel::Ar2 => "ar2",
        }
    }
}

/// Raw channel samples together with their directions on G(n,1).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTrace {
    pub model: ChannelModel,
    pub seed: u64,
    pub raw: Vec<Vec<C64>>,
    pub normalized: Vec<GrassmannPoint>,
    /// Number of exact power-of-two rescalings applied to keep an explosive
    /// recursion inside the floating-point range (always 0 for AR(1)).
    pub rescales: usize,
}

impl ChannelTrace {
    fn from_raw(model: ChannelModel, seed: u64, raw: Vec<Vec<C64>>, rescales: usize) -> Result<Self, ChannelError> {
        let normalized = raw
            .iter()
            .map(|h| GrassmannPoint::normalize(h.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            model,
            seed,
            raw,
            normalized,
            rescales,
        })
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.raw.first().map_or(0, Vec::len)
    }

    /// Channel gains `||h[k]||`.
    pub fn gains(&self) -> Vec<f64> {
        self.raw.iter().map(|h| cvec::norm(h)).collect()
    }

    /// CSV export: a `#` header line followed by one row per step with the
    /// raw samples as interleaved `re,im` columns.
    pub fn write_csv<W: Write>(&self, mut w: W, header_extra: &str) -> io::Result<()> {
        writeln!(
            w,
            "# n={} model={} seed={} steps={}{}{}",
            self.dim(),
            self.model.name(),
            self.seed,
            self.len(),
            if header_extra.is_empty() { "" } else { " " },
            header_extra
        )?;
        for h in &self.raw {
            let row: Vec<String> = h.iter().flat_map(|z| [format!("{:.17e}", z.re), format!("{:.17e}", z.im)]).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

pub fn gen_ar1(params: &Ar1Params) -> Result<ChannelTrace, ChannelError> {
    params.validate()?;
    let mut rng = stream_rng(params.seed, params.stream);
    let alpha = params.alpha();
    let innovation = (1.0 - alpha * alpha).max(0.0).sqrt();
    let mut raw = Vec::with_capacity(params.steps);
    raw.push(cvec::complex_gaussian_vec(&mut rng, params.n));
    for k in 1..params.steps {
        let z = cvec::complex_gaussian_vec(&mut rng, params.n);
        let next = cvec::lin_comb(C64::new(alpha, 0.0), &raw[k - 1], C64::new(innovation, 0.0), &z);
        raw.push(next);
    }
    ChannelTrace::from_raw(ChannelModel::Ar1, params.seed, raw, 0)
}

const RESCALE_HI: f64 = 1.3407807929942597e154; // 2^512
const RESCALE_LO: f64 = 7.458340731200207e-155; // 2^-512

/// Two-tap recursion with `h[-1] = h[0]`.
///
/// Coefficients with a root outside the unit circle (e.g. `a1 + a2 > 1`)
/// grow geometrically. The direction sequence is scale-invariant, so the
/// state and the noise scale are multiplied together by an exact power of two
/// whenever the norm leaves `[2^-512, 2^512]`; the normalised trace is then
/// identical to the unscaled recursion.
pub fn gen_ar2(params: &Ar2Params) -> Result<ChannelTrace, ChannelError> {
    params.validate()?;
    let mut rng = stream_rng(params.seed, params.stream);
    let mut noise_scale = params.noise_std;
    let mut rescales = 0;
    let mut raw: Vec<Vec<C64>> = Vec::with_capacity(params.steps);
    raw.push(cvec::complex_gaussian_vec(&mut rng, params.n));
    let mut prev2 = raw[0].clone();
    for k in 1..params.steps {
        let z = cvec::complex_gaussian_vec(&mut rng, params.n);
        let mut next: Vec<C64> = raw[k - 1]
            .iter()
            .zip(&prev2)
            .zip(&z)
            .map(|((h1, h2), zi)| params.a1 * h1 + params.a2 * h2 + noise_scale * zi)
            .collect();
        let nrm = cvec::norm(&next);
        let factor = if nrm > RESCALE_HI {
            RESCALE_LO
        } else if nrm > 0.0 && nrm < RESCALE_LO {
            RESCALE_HI
        } else {
            1.0
        };
        prev2 = raw[k - 1].clone();
        if factor != 1.0 {
            rescales += 1;
            next = cvec::scale_real(&next, factor);
            prev2 = cvec::scale_real(&prev2, factor);
            noise_scale *= factor;
        }
        if !next.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            return Err(ChannelError::InvalidParams(format!("recursion diverged at step {k}")));
        }
        raw.push(next);
    }
    ChannelTrace::from_raw(ChannelModel::Ar2, params.seed, raw, rescales)
}
