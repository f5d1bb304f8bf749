//! Distortion bounds and performance metrics.
//!
//! All bounds are closed forms over metric balls of G(n,1), where a chordal
//! ball of radius `delta` has normalised volume `delta^(2(n-1))` and mean
//! squared distance `(2(n-1)/2n) gamma^2` inside a ball of radius `gamma`.

use crate::codebook::ShapeGainCodebook;
use crate::grassmann::{chordal_distance, GrassmannPoint};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("{0} codebook needs at least two entries")]
    Singleton(&'static str),
    #[error("no samples")]
    Empty,
}

pub type Result<T> = std::result::Result<T, AnalysisError>;

/// `2(n-1) / 2n`, the factor shared by every bound below.
pub fn dimension_factor(n: usize) -> f64 {
    (2.0 * (n as f64 - 1.0)) / (2.0 * n as f64)
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(AnalysisError::Domain(format!("n must be >= 2, got {n}")));
    }
    Ok(())
}

fn check_unit_radius(name: &str, r: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&r) {
        return Err(AnalysisError::Domain(format!("{name} must lie in [0, 1], got {r}")));
    }
    Ok(())
}

/// Normalised volume of a chordal ball of radius `delta`: `delta^(2(n-1))`.
pub fn ball_volume(n: usize, delta: f64) -> Result<f64> {
    check_n(n)?;
    check_unit_radius("delta", delta)?;
    Ok(delta.powi(2 * (n as i32 - 1)))
}

/// Mean squared chordal distance to the centre of a ball of radius `gamma`.
pub fn ball_normalized_distortion(n: usize, gamma: f64) -> Result<f64> {
    check_n(n)?;
    check_unit_radius("gamma", gamma)?;
    Ok(dimension_factor(n) * gamma * gamma)
}

/// Minimum and maximum pairwise spacings of a shape-gain codebook.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodebookSpacings {
    /// Minimum chordal distance between direction codewords.
    pub gamma_d: f64,
    /// Minimum gap between magnitude codewords.
    pub gamma_m: f64,
    /// Maximum chordal distance between direction codewords.
    pub lambda_d: f64,
    /// Maximum gap between magnitude codewords.
    pub lambda_m: f64,
}

pub fn codebook_spacings(codebook: &ShapeGainCodebook) -> Result<CodebookSpacings> {
    spacings(codebook.directions.entries(), codebook.magnitudes.entries())
}

/// Spacings of arbitrary direction and magnitude sets (any size ≥ 2, any
/// order).
pub fn spacings(dirs: &[GrassmannPoint], mags: &[f64]) -> Result<CodebookSpacings> {
    if dirs.len() < 2 {
        return Err(AnalysisError::Singleton("direction"));
    }
    if mags.len() < 2 {
        return Err(AnalysisError::Singleton("magnitude"));
    }
    let mut gamma_d = f64::INFINITY;
    let mut lambda_d: f64 = 0.0;
    for i in 0..dirs.len() {
        for j in i + 1..dirs.len() {
            let d = chordal_distance(&dirs[i], &dirs[j]).expect("codebook entries share a dimension");
            gamma_d = gamma_d.min(d);
            lambda_d = lambda_d.max(d);
        }
    }
    let mut mags = mags.to_vec();
    mags.sort_by(f64::total_cmp);
    // Sorted, so the extreme gaps are between neighbours and the endpoints.
    let gamma_m = mags.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let lambda_m = mags[mags.len() - 1] - mags[0];
    Ok(CodebookSpacings {
        gamma_d,
        gamma_m,
        lambda_d,
        lambda_m,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistortionBounds {
    pub lower: f64,
    pub upper: f64,
    pub gamma_lower: f64,
    pub lambda_upper: f64,
}

/// Lower and upper distortion bounds of predictive coding with the given
/// shape-gain codebook: `(2(n-1)/2n) (r/2)^2` with `r = min(gamma_d,
/// gamma_m)` and `r = max(lambda_d, lambda_m)` respectively.
pub fn gpc_distortion_bounds(n: usize, codebook: &ShapeGainCodebook) -> Result<DistortionBounds> {
    check_n(n)?;
    let s = codebook_spacings(codebook)?;
    Ok(bounds_from_spacings(n, s.gamma_d.min(s.gamma_m), s.lambda_d.max(s.lambda_m)))
}

pub fn bounds_from_spacings(n: usize, gamma_lower: f64, lambda_upper: f64) -> DistortionBounds {
    let f = dimension_factor(n);
    DistortionBounds {
        lower: f * (gamma_lower / 2.0).powi(2),
        upper: f * (lambda_upper / 2.0).powi(2),
        gamma_lower,
        lambda_upper,
    }
}

/// Distortion lower bound of any N-point memoryless quantizer on G(n,1):
/// `(2(n-1)/2n) N^(-1/(n-1))`.
pub fn memoryless_lower_bound(n: usize, codebook_size: usize) -> Result<f64> {
    check_n(n)?;
    if codebook_size == 0 {
        return Err(AnalysisError::Domain("codebook size must be >= 1".into()));
    }
    Ok(dimension_factor(n) * (codebook_size as f64).powf(-1.0 / (n as f64 - 1.0)))
}

/// Predictive-coding lower bound when the direction codebook is a Grassmannian
/// packing that dominates the spacing: `1/4 (2(n-1)/2n) D_G(N_d)`.
pub fn gpc_bound_reduction(n: usize, direction_codebook_size: usize) -> Result<f64> {
    Ok(0.25 * dimension_factor(n) * memoryless_lower_bound(n, direction_codebook_size)?)
}

/// Closed-loop prediction gain `1 / E[d^2]` over chordal prediction errors.
/// Returns `+inf` when every error is zero.
pub fn closed_loop_gain(prediction_errors: &[f64]) -> Result<f64> {
    let msd = mean_square(prediction_errors)?;
    Ok(if msd == 0.0 { f64::INFINITY } else { 1.0 / msd })
}

pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// `10 log10(E[d^2])`.
pub fn mse_db(errors: &[f64]) -> Result<f64> {
    Ok(to_db(mean_square(errors)?))
}

pub fn mean_square(xs: &[f64]) -> Result<f64> {
    if xs.is_empty() {
        return Err(AnalysisError::Empty);
    }
    Ok(xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64)
}

/// Mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::{DirectionCodebook, MagnitudeCodebook};
    use crate::cvec::C64;
    use crate::grassmann::GrassmannPoint;
    use crate::rng::stream_rng;
    use rand::Rng;

    fn shape_gain(dirs: Vec<GrassmannPoint>, mags: Vec<f64>) -> ShapeGainCodebook {
        ShapeGainCodebook::new(
            DirectionCodebook::new(dirs).unwrap(),
            MagnitudeCodebook::new(mags).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn ball_volume_values() {
        assert_eq!(ball_volume(4, 1.0).unwrap(), 1.0);
        assert!((ball_volume(3, 0.5).unwrap() - 0.0625).abs() < 1e-15);
        assert_eq!(ball_volume(5, 0.0).unwrap(), 0.0);
        assert!(ball_volume(1, 0.5).is_err());
        assert!(ball_volume(3, 1.5).is_err());
    }

    #[test]
    fn ball_distortion_values() {
        assert!((ball_normalized_distortion(4, 0.2).unwrap() - 0.03).abs() < 1e-15);
        assert_eq!(ball_normalized_distortion(6, 0.0).unwrap(), 0.0);
        assert!(ball_normalized_distortion(4, -0.1).is_err());
    }

    // Rejection sampling inside B_gamma(z) on G(3,1): isotropic points are
    // uniform under the Haar measure, so the accepted ones are uniform in the
    // ball.
    #[test]
    fn ball_distortion_matches_rejection_sampling() {
        let n = 3;
        let gamma: f64 = 0.3;
        let mut rng = stream_rng(12, 0);
        let z = GrassmannPoint::basis(n, 0).unwrap();
        let (mut sum, mut count) = (0.0, 0usize);
        while count < 20_000 {
            let p = GrassmannPoint::random(&mut rng, n);
            let d = chordal_distance(&p, &z).unwrap();
            if d <= gamma {
                sum += d * d;
                count += 1;
            }
        }
        let mc = sum / count as f64;
        let formula = ball_normalized_distortion(n, gamma).unwrap();
        assert!((mc / formula - 1.0).abs() < 0.02, "mc {mc} vs {formula}");
    }

    #[test]
    fn spacings_examples() {
        let e = |i| GrassmannPoint::basis(3, i).unwrap();
        let s = spacings(&[e(0), e(1)], &[0.1, 0.3, 0.9]).unwrap();
        assert!((s.gamma_d - 1.0).abs() < 1e-15 && (s.lambda_d - 1.0).abs() < 1e-15);
        assert!((s.gamma_m - 0.2).abs() < 1e-15);
        assert!((s.lambda_m - 0.8).abs() < 1e-15);
    }

    #[test]
    fn spacings_match_brute_force() {
        let mut rng = stream_rng(3, 0);
        for _ in 0..5 {
            let dirs: Vec<_> = (0..9).map(|_| GrassmannPoint::random(&mut rng, 4)).collect();
            let mags: Vec<f64> = (0..6).map(|_| rng.random_range(0.0..1.5)).collect();
            let s = spacings(&dirs, &mags).unwrap();
            let (mut gd, mut ld, mut gm, mut lm) = (f64::INFINITY, 0.0f64, f64::INFINITY, 0.0f64);
            for i in 0..dirs.len() {
                for j in 0..dirs.len() {
                    if i != j {
                        let rho: C64 = dirs[i].inner(&dirs[j]).unwrap();
                        let d = (1.0 - rho.norm_sqr()).sqrt();
                        gd = gd.min(d);
                        ld = ld.max(d);
                    }
                }
            }
            for i in 0..mags.len() {
                for j in 0..mags.len() {
                    if i != j {
                        gm = gm.min((mags[i] - mags[j]).abs());
                        lm = lm.max((mags[i] - mags[j]).abs());
                    }
                }
            }
            assert!((s.gamma_d - gd).abs() < 1e-9 && (s.lambda_d - ld).abs() < 1e-9);
            assert!((s.gamma_m - gm).abs() < 1e-15 && (s.lambda_m - lm).abs() < 1e-15);
        }
    }

    #[test]
    fn singleton_codebooks_are_rejected() {
        let e = |i| GrassmannPoint::basis(3, i).unwrap();
        let cb = shape_gain(vec![e(0)], vec![0.1, 0.2]);
        assert_eq!(codebook_spacings(&cb).unwrap_err(), AnalysisError::Singleton("direction"));
    }

    #[test]
    fn bound_formulas() {
        let b = bounds_from_spacings(4, 0.2, 0.2);
        assert!((b.lower - 0.0075).abs() < 1e-15);
        assert_eq!(b.lower, b.upper);
        assert!((memoryless_lower_bound(4, 512).unwrap() - 0.09375).abs() < 1e-15);
        assert!((memoryless_lower_bound(2, 37).unwrap() - 0.5 / 37.0).abs() < 1e-15);
        assert!((memoryless_lower_bound(7, 1).unwrap() - 6.0 / 7.0).abs() < 1e-15);
        for nd in [4usize, 16, 64, 512] {
            let ratio = gpc_bound_reduction(4, nd).unwrap() / memoryless_lower_bound(4, nd).unwrap();
            assert!((ratio - 0.1875).abs() < 1e-12);
            let ratio2 = gpc_bound_reduction(2, nd).unwrap() / memoryless_lower_bound(2, nd).unwrap();
            assert!((ratio2 - 0.125).abs() < 1e-12);
        }
    }

    #[test]
    fn bound_reduction_below_memoryless() {
        for n in 2..10 {
            for bits in 0..12 {
                let nn = 1usize << bits;
                assert!(gpc_bound_reduction(n, nn).unwrap() < memoryless_lower_bound(n, nn).unwrap());
            }
        }
    }

    #[test]
    fn gain_and_mse() {
        let errs = vec![0.1; 10];
        assert!((closed_loop_gain(&errs).unwrap() - 100.0).abs() < 1e-9);
        assert!((to_db(closed_loop_gain(&errs).unwrap()) - 20.0).abs() < 1e-9);
        assert!((mse_db(&errs).unwrap() + 20.0).abs() < 1e-9);
        assert_eq!(closed_loop_gain(&[0.0, 0.0]).unwrap(), f64::INFINITY);
        assert_eq!(mse_db(&[]).unwrap_err(), AnalysisError::Empty);
    }
}
