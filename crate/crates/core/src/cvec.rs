//! Small dense complex-vector helpers.
//!
//! Everything in this crate works on short vectors (n ≤ 16 in practice), so
//! plain slices beat pulling a matrix type through the hot paths.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;

/// Hermitian inner product `a* · b` (conjugates the left argument).
#[inline]
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[inline]
pub fn norm_sqr(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

#[inline]
pub fn norm(a: &[C64]) -> f64 {
    norm_sqr(a).sqrt()
}

pub fn scale(a: &[C64], s: C64) -> Vec<C64> {
    a.iter().map(|x| x * s).collect()
}

pub fn scale_real(a: &[C64], s: f64) -> Vec<C64> {
    a.iter().map(|x| x * s).collect()
}

/// `a·x + b·y`, elementwise.
pub fn lin_comb(a: C64, x: &[C64], b: C64, y: &[C64]) -> Vec<C64> {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(xi, yi)| a * xi + b * yi).collect()
}

/// Removes the component of `v` along the unit vector `unit`.
pub fn reject(v: &[C64], unit: &[C64]) -> Vec<C64> {
    let c = inner(unit, v);
    v.iter().zip(unit).map(|(vi, ui)| vi - c * ui).collect()
}

/// Circularly-symmetric complex Gaussian with unit variance: real and
/// imaginary parts each have variance 1/2.
#[inline]
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn complex_gaussian_vec<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<C64> {
    (0..n).map(|_| complex_gaussian(rng)).collect()
}

/// Multiplies `v` by the unit-modulus scalar that makes its first
/// non-negligible coordinate real and positive.
pub fn canonical_phase(v: &[C64]) -> Vec<C64> {
    match v.iter().find(|x| x.norm() > 1e-12) {
        Some(first) => {
            let phase = first.conj() / first.norm();
            scale(v, phase)
        }
        None => v.to_vec(),
    }
}
