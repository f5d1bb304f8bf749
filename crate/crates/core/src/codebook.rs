//! Shape-gain tangent codebooks: storage, file format, packings.
//!
//! Training lives in [`train`].

pub mod train;

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use rand::Rng;
use thiserror::Error;

use crate::cvec::C64;
use crate::grassmann::{chordal_distance, GeometryError, GrassmannPoint};
use crate::rng::{purpose, stream_rng, substream};

/// Two direction codewords closer than this are treated as the same line.
pub const DISTINCT_TOL: f64 = 1e-12;

pub const MAX_MAGNITUDE: f64 = std::f64::consts::FRAC_PI_2;

/// Phase increment between stored representatives of trained direction codewords.
pub const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;

#[derive(Debug, Error)]
pub enum CodebookError {
    #[error("codebook is empty")]
    Empty,
    #[error("codebook size {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("direction codeword {row} has dimension {got}, expected {expected}")]
    DimensionMismatch { row: usize, expected: usize, got: usize },
    #[error("direction codewords {first} and {second} describe the same line")]
    Duplicate { first: usize, second: usize },
    #[error("magnitude codeword {index} = {value} outside [0, pi/2]")]
    MagnitudeOutOfRange { index: usize, value: f64 },
    #[error("magnitude codewords are not sorted at index {0}")]
    Unsorted(usize),
    #[error("invalid range [{lo}, {hi}]")]
    InvalidRange { lo: f64, hi: f64 },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("direction row {row}: norm {norm} is not unit")]
    NotUnitRow { row: usize, norm: f64 },
    #[error("need at least {need} usable samples, have {have}")]
    InsufficientSamples { need: usize, have: usize },
    #[error("trace too short: {0} points")]
    TraceTooShort(usize),
    #[error("Lloyd distortion increased at iteration {iter}: {before} -> {after}")]
    NonMonotone { iter: usize, before: f64, after: f64 },
    #[error("eigen-solve failed for cluster {0}")]
    Eigen(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Codec(#[from] crate::codec::CodecError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CodebookError>;

fn check_power_of_two(n: usize) -> Result<()> {
    if n == 0 {
        return Err(CodebookError::Empty);
    }
    if !n.is_power_of_two() {
        return Err(CodebookError::NotPowerOfTwo(n));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionCodebook {
    n: usize,
    entries: Vec<GrassmannPoint>,
}

impl DirectionCodebook {
    pub fn new(entries: Vec<GrassmannPoint>) -> Result<Self> {
        check_power_of_two(entries.len())?;
        let n = entries[0].dim();
        for (row, e) in entries.iter().enumerate() {
            if e.dim() != n {
                return Err(CodebookError::DimensionMismatch { row, expected: n, got: e.dim() });
            }
        }
        for i in 0..entries.len() {
            for j in i + 1..entries.len() {
                if chordal_distance(&entries[i], &entries[j])? <= DISTINCT_TOL {
                    return Err(CodebookError::Duplicate { first: i, second: j });
                }
            }
        }
        Ok(Self { n, entries })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn bits(&self) -> u32 {
        self.entries.len().trailing_zeros()
    }

    pub fn entries(&self) -> &[GrassmannPoint] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> Option<&GrassmannPoint> {
        self.entries.get(i)
    }

    /// Smallest pairwise chordal distance; 1 for a single codeword.
    pub fn min_distance(&self) -> f64 {
        min_pairwise(&self.entries, 0.0).unwrap_or(1.0)
    }
}

/// Sorted magnitudes in [0, π/2]. Repeated values are allowed so that a
/// trained codebook on degenerate data stays representable.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnitudeCodebook {
    entries: Vec<f64>,
}

impl MagnitudeCodebook {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        check_power_of_two(entries.len())?;
        for (index, &value) in entries.iter().enumerate() {
            if !(0.0..=MAX_MAGNITUDE).contains(&value) {
                return Err(CodebookError::MagnitudeOutOfRange { index, value });
            }
            if index > 0 && value < entries[index - 1] {
                return Err(CodebookError::Unsorted(index));
            }
        }
        Ok(Self { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn bits(&self) -> u32 {
        self.entries.len().trailing_zeros()
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Index of the nearest codeword, lowest index on ties.
    pub fn nearest(&self, value: f64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, &c) in self.entries.iter().enumerate() {
            let d = (c - value).abs();
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }
}

/// Bin midpoints of the uniform partition of `[lo, hi]` into `n_m` cells.
pub fn uniform_magnitude(n_m: usize, lo: f64, hi: f64) -> Result<MagnitudeCodebook> {
    if !(lo >= 0.0 && lo < hi && hi <= MAX_MAGNITUDE) {
        return Err(CodebookError::InvalidRange { lo, hi });
    }
    check_power_of_two(n_m)?;
    let width = (hi - lo) / n_m as f64;
    MagnitudeCodebook::new((0..n_m).map(|i| lo + (i as f64 + 0.5) * width).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeGainCodebook {
    pub directions: DirectionCodebook,
    pub magnitudes: MagnitudeCodebook,
}

impl ShapeGainCodebook {
    pub fn new(directions: DirectionCodebook, magnitudes: MagnitudeCodebook) -> Result<Self> {
        Ok(Self { directions, magnitudes })
    }

    pub fn dim(&self) -> usize {
        self.directions.dim()
    }

    /// Number of joint codewords, `N_d·N_m`.
    pub fn len(&self) -> usize {
        self.directions.len() * self.magnitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn bits(&self) -> u32 {
        self.directions.bits() + self.magnitudes.bits()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(f))
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {} {}", self.dim(), self.directions.len(), self.magnitudes.len())?;
        let mut line = String::new();
        for e in self.directions.entries() {
            line.clear();
            for (k, z) in e.coords().iter().enumerate() {
                if k > 0 {
                    line.push(' ');
                }
                let _ = write!(line, "{:.16e} {:.16e}", z.re, z.im);
            }
            writeln!(w, "{line}")?;
        }
        for m in self.magnitudes.entries() {
            writeln!(w, "{m:.16e}")?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| l.as_ref().map(|s| !s.trim().is_empty() && !s.trim_start().starts_with('#')).unwrap_or(true));

        let (hline, header) = lines.next().ok_or(CodebookError::Parse { line: 1, msg: "missing header".into() })?;
        let header = header?;
        let dims = parse_floats_as::<usize>(&header, hline)?;
        let [n, n_d, n_m] = dims[..] else {
            return Err(CodebookError::Parse { line: hline, msg: "header must be `n N_d N_m`".into() });
        };

        let mut directions = Vec::with_capacity(n_d);
        for row in 0..n_d {
            let (ln, text) = lines.next().ok_or_else(|| CodebookError::Parse {
                line: hline + row + 1,
                msg: format!("expected {n_d} direction rows, found {row}"),
            })?;
            let vals = parse_floats_as::<f64>(&text?, ln)?;
            if vals.len() != 2 * n {
                return Err(CodebookError::Parse {
                    line: ln,
                    msg: format!("direction row {row} has {} values, expected {}", vals.len(), 2 * n),
                });
            }
            let coords: Vec<C64> = vals.chunks(2).map(|p| C64::new(p[0], p[1])).collect();
            let point = GrassmannPoint::from_unit(coords).map_err(|e| match e {
                GeometryError::NotUnitNorm { norm } => CodebookError::NotUnitRow { row, norm },
                other => CodebookError::Geometry(other),
            })?;
            directions.push(point);
        }

        let mut magnitudes = Vec::with_capacity(n_m);
        for row in 0..n_m {
            let (ln, text) = lines.next().ok_or_else(|| CodebookError::Parse {
                line: hline + n_d + row + 1,
                msg: format!("expected {n_m} magnitude rows, found {row}"),
            })?;
            let vals = parse_floats_as::<f64>(&text?, ln)?;
            let [m] = vals[..] else {
                return Err(CodebookError::Parse { line: ln, msg: "magnitude row must hold one value".into() });
            };
            magnitudes.push(m);
        }
        if let Some((ln, _)) = lines.next() {
            return Err(CodebookError::Parse { line: ln, msg: "trailing rows after codebook".into() });
        }

        Self::new(DirectionCodebook::new(directions)?, MagnitudeCodebook::new(magnitudes)?)
    }
}

fn parse_floats_as<T: std::str::FromStr>(line: &str, ln: usize) -> Result<Vec<T>> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<T>()
                .map_err(|_| CodebookError::Parse { line: ln, msg: format!("cannot parse `{tok}`") })
        })
        .collect()
}

/// Minimum pairwise chordal distance, bailing out with `None` as soon as it
/// drops to `floor` or below.
fn min_pairwise(points: &[GrassmannPoint], floor: f64) -> Option<f64> {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in 0..i {
            let d = chordal_distance(&points[i], &points[j]).ok()?;
            if d <= floor {
                return None;
            }
            best = best.min(d);
        }
    }
    best.is_finite().then_some(best)
}

/// Best-of-`candidates` random Grassmannian packing: draws isotropic
/// codebooks and keeps the one with the largest minimum chordal distance.
pub fn random_packing(n: usize, size: usize, candidates: usize, seed: u64) -> Result<DirectionCodebook> {
    check_power_of_two(size)?;
    if n < 2 {
        return Err(GeometryError::DimensionTooSmall(n).into());
    }
    let mut rng = stream_rng(seed, substream(purpose::PACKING, size as u64, n as u64));
    let mut best: Option<(f64, Vec<GrassmannPoint>)> = None;
    for _ in 0..candidates.max(1) {
        let floor = best.as_ref().map_or(-1.0, |b| b.0);
        let mut pts: Vec<GrassmannPoint> = Vec::with_capacity(size);
        let mut current = f64::INFINITY;
        let mut ok = true;
        for _ in 0..size {
            let p = GrassmannPoint::random(&mut rng, n);
            for q in &pts {
                let d = chordal_distance(&p, q)?;
                current = current.min(d);
            }
            pts.push(p);
            if current <= floor {
                ok = false;
                break;
            }
        }
        if ok {
            let d = if size == 1 { 1.0 } else { current };
            best = Some((d, pts));
        }
    }
    let (_, pts) = best.expect("at least one candidate is accepted");
    DirectionCodebook::new(pts)
}

/// Independent isotropic codebook: one draw, no selection.
pub fn random_codebook<R: Rng + ?Sized>(rng: &mut R, n: usize, size: usize) -> Result<DirectionCodebook> {
    check_power_of_two(size)?;
    DirectionCodebook::new((0..size).map(|_| GrassmannPoint::random(rng, n)).collect())
}
