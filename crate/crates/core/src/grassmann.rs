//! Geometry of the complex Grassmann manifold G(n,1).
//!
//! A point is a line through the origin of C^n, stored as a unit-norm
//! representative. No canonical phase is imposed on representatives, so every
//! comparison in this module goes through the phase-invariant chordal
//! distance `sqrt(1 - |x*y|^2)`.
//!
//! The primitives are closed forms specialised to p = 1, so none of them
//! needs an SVD:
//!
//! ```text
//! log:    e  = atan(d/|rho|) * (y/rho - x) / ||y/rho - x||      rho = x*y
//! exp:    G(x, e, t) = x cos(|e| t) + e_dir sin(|e| t)
//! transp: e' = atan(d/|rho|) * (y rho^* - x) / d                 (based at y)
//! pred:   x~ = |rho| y + rho^* y - x
//! ```
//!
//! Pairs with `|rho| <= RHO_MIN` are treated as lying on the cut locus and
//! rejected with [`GeometryError::CutLocus`].

use crate::cvec::{self, C64};
use thiserror::Error;

/// Below this `|x*y|` the log map direction is undefined.
pub const RHO_MIN: f64 = 1e-9;
/// Chordal distances below this collapse to the zero tangent.
pub const ZERO_TANGENT_EPS: f64 = 1e-12;
/// Tolerance for [`exp_map`] to accept a base point that differs from the
/// tangent's own base by a phase.
pub const BASE_MATCH_TOL: f64 = 1e-10;
/// Accepted deviation from unit norm for caller-supplied representatives.
pub const UNIT_NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("points are on the cut locus (|rho| = {rho:e} <= {RHO_MIN:e})")]
    CutLocus { rho: f64 },
    #[error("tangent is based at a different point (chordal distance {distance:e})")]
    BaseMismatch { distance: f64 },
    #[error("vector norm {norm} is not 1")]
    NotUnitNorm { norm: f64 },
    #[error("G(n,1) needs n >= 2, got n = {0}")]
    DimensionTooSmall(usize),
    #[error("cannot normalise a zero or non-finite vector")]
    Degenerate,
    #[error("sequences do not overlap at lag {lag}")]
    EmptyOverlap { lag: usize },
}

pub type Result<T> = std::result::Result<T, GeometryError>;

/// A line in C^n, represented by a unit-norm vector.
#[derive(Debug, Clone, PartialEq)]
pub struct GrassmannPoint {
    coords: Vec<C64>,
}

impl GrassmannPoint {
    /// Normalises `coords` onto the unit sphere.
    pub fn normalize(coords: Vec<C64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(GeometryError::DimensionTooSmall(coords.len()));
        }
        let nrm = cvec::norm(&coords);
        if !(nrm.is_finite() && nrm > 0.0) {
            return Err(GeometryError::Degenerate);
        }
        Ok(Self {
            coords: cvec::scale_real(&coords, 1.0 / nrm),
        })
    }

    /// Accepts an already-unit vector (within [`UNIT_NORM_TOL`]). Vectors
    /// within 1e-12 of unit norm are stored bit-for-bit, anything further
    /// off is renormalised.
    pub fn from_unit(coords: Vec<C64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(GeometryError::DimensionTooSmall(coords.len()));
        }
        let nrm = cvec::norm(&coords);
        let near_unit = (nrm - 1.0).abs() <= UNIT_NORM_TOL;
        if !near_unit {
            return Err(GeometryError::NotUnitNorm { norm: nrm });
        }
        if (nrm - 1.0).abs() <= 1e-12 {
            return Ok(Self { coords });
        }
        Self::normalize(coords)
    }

    /// Standard basis vector `e_i` in C^n.
    pub fn basis(n: usize, i: usize) -> Result<Self> {
        let mut v = vec![C64::new(0.0, 0.0); n];
        if i < n {
            v[i] = C64::new(1.0, 0.0);
        }
        Self::normalize(v)
    }

    /// Isotropically distributed point (normalised complex Gaussian vector).
    pub fn random<R: rand::Rng + ?Sized>(rng: &mut R, n: usize) -> Self {
        loop {
            if let Ok(p) = Self::normalize(cvec::complex_gaussian_vec(rng, n)) {
                return p;
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[C64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<C64> {
        self.coords
    }

    /// Same line, different representative.
    pub fn with_phase(&self, phase: f64) -> Self {
        Self {
            coords: cvec::scale(&self.coords, C64::from_polar(1.0, phase)),
        }
    }

    /// `self* · other`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        check_dims(self.dim(), other.dim())?;
        Ok(cvec::inner(&self.coords, &other.coords))
    }

    /// Phase-invariant equality within `tol` chordal distance.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        chordal_distance(self, other).is_ok_and(|d| d < tol)
    }
}

/// A tangent vector at `base`, split into arc length and unit direction.
///
/// A zero tangent has magnitude 0 and an all-zero direction.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: GrassmannPoint,
    magnitude: f64,
    direction: Vec<C64>,
}

impl TangentVector {
    pub fn zero(base: GrassmannPoint) -> Self {
        let n = base.dim();
        Self {
            base,
            magnitude: 0.0,
            direction: vec![C64::new(0.0, 0.0); n],
        }
    }

    /// Builds a tangent from an arbitrary direction by projecting it onto the
    /// tangent space at `base`. Falls back to the zero tangent when the
    /// projection vanishes or `magnitude` is zero.
    pub fn from_projection(base: GrassmannPoint, magnitude: f64, direction: &[C64]) -> Result<Self> {
        check_dims(base.dim(), direction.len())?;
        let projected = cvec::reject(direction, base.coords());
        let nrm = cvec::norm(&projected);
        if nrm < ZERO_TANGENT_EPS || magnitude <= 0.0 {
            return Ok(Self::zero(base));
        }
        Ok(Self {
            base,
            magnitude,
            direction: cvec::scale_real(&projected, 1.0 / nrm),
        })
    }

    pub fn base(&self) -> &GrassmannPoint {
        &self.base
    }

    pub fn magnitude(&self) -> f64 {
        self.magnitude
    }

    pub fn direction(&self) -> &[C64] {
        &self.direction
    }

    pub fn is_zero(&self) -> bool {
        self.magnitude == 0.0
    }

    /// Same tangent with a different magnitude.
    pub fn with_magnitude(&self, magnitude: f64) -> Self {
        if self.is_zero() || magnitude <= 0.0 {
            return Self::zero(self.base.clone());
        }
        Self {
            base: self.base.clone(),
            magnitude,
            direction: self.direction.clone(),
        }
    }

    /// Full tangent `magnitude * direction` as an ambient vector.
    pub fn to_vector(&self) -> Vec<C64> {
        cvec::scale_real(&self.direction, self.magnitude)
    }
}

/// `rho = base* target`, the chord `d = sqrt(1-|rho|^2)` and the subspace
/// angle `theta = acos|rho|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerProductDecomposition {
    pub rho: C64,
    pub chord: f64,
    pub angle: f64,
}

pub fn decompose(x: &GrassmannPoint, y: &GrassmannPoint) -> Result<InnerProductDecomposition> {
    let rho = x.inner(y)?;
    let chord = chord(x.coords(), y.coords());
    Ok(InnerProductDecomposition {
        rho,
        chord,
        angle: chord.atan2(rho.norm()),
    })
}

fn check_dims(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(GeometryError::DimensionMismatch { left, right });
    }
    Ok(())
}

fn cut_locus_guard(rho: C64) -> Result<f64> {
    let abs = rho.norm();
    if abs <= RHO_MIN {
        return Err(GeometryError::CutLocus { rho: abs });
    }
    Ok(abs)
}

/// `sqrt(1 - |x* y|^2)`, in [0, 1].
pub fn chordal_distance(x: &GrassmannPoint, y: &GrassmannPoint) -> Result<f64> {
    check_dims(x.dim(), y.dim())?;
    Ok(chord(x.coords(), y.coords()))
}

// For nearly parallel lines 1 - |rho|^2 cancels catastrophically, so the
// chord is taken as the norm of the component of y orthogonal to x instead.
fn chord(x: &[C64], y: &[C64]) -> f64 {
    let rho_sqr = cvec::inner(x, y).norm_sqr();
    if rho_sqr < 0.5 {
        (1.0 - rho_sqr).max(0.0).sqrt()
    } else {
        cvec::norm(&cvec::reject(y, x)).min(1.0)
    }
}

/// Tangent at `base` pointing along the geodesic to `target`, with magnitude
/// equal to the arc length `acos|rho|`.
pub fn log_map(base: &GrassmannPoint, target: &GrassmannPoint) -> Result<TangentVector> {
    let rho = base.inner(target)?;
    let abs_rho = cut_locus_guard(rho)?;
    // target - rho*base has norm d exactly, and computing it this way keeps
    // full relative precision for nearby points.
    let residual = cvec::reject(target.coords(), base.coords());
    let chord = cvec::norm(&residual);
    if chord < ZERO_TANGENT_EPS {
        return Ok(TangentVector::zero(base.clone()));
    }
    // (target/rho - base) / (d/|rho|) == residual * (|rho|/rho) / d
    let phase = rho.conj() / abs_rho;
    let direction = cvec::scale(&residual, phase / chord);
    Ok(TangentVector {
        base: base.clone(),
        magnitude: chord.atan2(abs_rho),
        direction,
    })
}

/// Point reached after following `tangent` from `base` for time `t`.
///
/// `base` may be any representative of the tangent's own base point. Values
/// of `t` outside [0, 1] extrapolate along the same geodesic.
pub fn exp_map(base: &GrassmannPoint, tangent: &TangentVector, t: f64) -> Result<GrassmannPoint> {
    check_dims(base.dim(), tangent.base.dim())?;
    let overlap = tangent.base.inner(base)?;
    let distance = chord(tangent.base.coords(), base.coords());
    if distance >= BASE_MATCH_TOL {
        return Err(GeometryError::BaseMismatch { distance });
    }
    if tangent.is_zero() {
        return Ok(base.clone());
    }
    // base = phase * tangent.base, so the direction has to pick up the same
    // phase for the result to be the tangent's geodesic point.
    let phase = overlap / overlap.norm();
    let angle = tangent.magnitude * t;
    let coords = cvec::lin_comb(
        C64::new(angle.cos(), 0.0),
        base.coords(),
        phase * angle.sin(),
        &tangent.direction,
    );
    GrassmannPoint::normalize(coords)
}

/// Transports the tangent from `x1` to `x2` along their connecting geodesic;
/// the result is based at `x2` and keeps the arc length.
///
/// `x1` is first rephased so that its overlap with `x2` is real and
/// positive; only then does `(x2·ρ* − x1)/d` point along the geodesic.
pub fn parallel_transport(x1: &GrassmannPoint, x2: &GrassmannPoint) -> Result<TangentVector> {
    let rho = x1.inner(x2)?;
    let abs_rho = cut_locus_guard(rho)?;
    let align = rho / abs_rho;
    // x2 |rho| - align x1 == -(align x1 - (x2* align x1) x2)
    let residual = cvec::reject(&cvec::scale(x1.coords(), align), x2.coords());
    let chord = cvec::norm(&residual);
    if chord < ZERO_TANGENT_EPS {
        return Ok(TangentVector::zero(x2.clone()));
    }
    Ok(TangentVector {
        base: x2.clone(),
        magnitude: chord.atan2(abs_rho),
        direction: cvec::scale_real(&residual, -1.0 / chord),
    })
}

/// Continues the geodesic through `x_prev` and `x_curr` by one more step of
/// the same length: `2|ρ|·x_curr − (ρ/|ρ|)·x_prev` with `ρ = x_prev*·x_curr`,
/// i.e. `|ρ|·x_curr + ρ*·x_curr − x_prev` evaluated on the representative
/// of `x_prev` whose overlap with `x_curr` is real.
pub fn predict_one_step(x_prev: &GrassmannPoint, x_curr: &GrassmannPoint) -> Result<GrassmannPoint> {
    let rho = x_prev.inner(x_curr)?;
    let abs_rho = cut_locus_guard(rho)?;
    let coords = cvec::lin_comb(
        C64::new(2.0 * abs_rho, 0.0),
        x_curr.coords(),
        -rho / abs_rho,
        x_prev.coords(),
    );
    GrassmannPoint::normalize(coords)
}

/// Mean chordal distance between `xs[k]` and `ys[k + lag]` over every `k`
/// where both exist.
pub fn sequence_correlation(xs: &[GrassmannPoint], ys: &[GrassmannPoint], lag: usize) -> Result<f64> {
    let count = xs.len().min(ys.len().saturating_sub(lag));
    if count == 0 {
        return Err(GeometryError::EmptyOverlap { lag });
    }
    let mut total = 0.0;
    for k in 0..count {
        total += chordal_distance(&xs[k], &ys[k + lag])?;
    }
    Ok(total / count as f64)
}
