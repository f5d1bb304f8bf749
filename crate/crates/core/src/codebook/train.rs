//! Harvesting error tangents from traces and Lloyd training.

use nalgebra::DMatrix;
use rand::seq::index;

use super::{CodebookError, DirectionCodebook, MagnitudeCodebook, Result, MAX_MAGNITUDE};
use crate::codec::{encode_trace, InitMode, TangentQuantizer};
use crate::cvec::{self, C64};
use crate::grassmann::{log_map, predict_one_step, GrassmannPoint, TangentVector};
use crate::rng::{purpose, stream_rng, substream};

/// Lloyd stops once an iteration improves distortion by less than this.
pub const LLOYD_TOL: f64 = 1e-8;

/// Slack for rounding when asserting monotone distortion.
const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingSet {
    pub tangents: Vec<TangentVector>,
    /// Steps dropped because the log map was undefined there.
    pub skipped: usize,
}

impl TrainingSet {
    pub fn len(&self) -> usize {
        self.tangents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tangents.is_empty()
    }

    pub fn extend(&mut self, other: TrainingSet) {
        self.tangents.extend(other.tangents);
        self.skipped += other.skipped;
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.tangents.iter().map(|t| t.magnitude()).collect()
    }

    /// Phase-canonical unit directions of the nonzero tangents.
    pub fn directions(&self) -> Vec<Vec<C64>> {
        self.tangents
            .iter()
            .filter(|t| !t.is_zero())
            .map(|t| cvec::canonical_phase(t.direction()))
            .collect()
    }

    pub fn mean_magnitude(&self) -> f64 {
        if self.tangents.is_empty() {
            return 0.0;
        }
        self.tangents.iter().map(|t| t.magnitude()).sum::<f64>() / self.tangents.len() as f64
    }
}

/// Prediction residuals computed on the raw trace:
/// `log_map(P(x[k−1], x[k]), x[k+1])` for every interior `k`.
pub fn harvest_open_loop(trace: &[GrassmannPoint]) -> Result<TrainingSet> {
    if trace.len() < 3 {
        return Err(CodebookError::TraceTooShort(trace.len()));
    }
    let mut set = TrainingSet::default();
    for w in trace.windows(3) {
        match predict_one_step(&w[0], &w[1]).and_then(|p| log_map(&p, &w[2])) {
            Ok(t) => set.tangents.push(t),
            Err(_) => set.skipped += 1,
        }
    }
    Ok(set)
}

/// Unquantized error tangents seen by the running encoder (exact
/// initialization). Steps lost to tracking failure are counted as skipped.
pub fn harvest_closed_loop<Q: TangentQuantizer + ?Sized>(
    trace: &[GrassmannPoint],
    quantizer: &Q,
    directions: &DirectionCodebook,
) -> Result<TrainingSet> {
    if trace.len() < 3 {
        return Err(CodebookError::TraceTooShort(trace.len()));
    }
    let run = encode_trace(trace, quantizer, directions, InitMode::Exact)?;
    Ok(TrainingSet { tangents: run.error_tangents, skipped: run.resets.len() })
}

#[derive(Debug, Clone)]
pub struct LloydOutput<C> {
    pub codebook: C,
    /// Mean distortion of the initial codebook followed by one entry per
    /// completed iteration.
    pub history: Vec<f64>,
}

fn check_step(iter: usize, before: f64, after: f64) -> Result<()> {
    if after > before + MONOTONE_SLACK * before.max(1.0) {
        return Err(CodebookError::NonMonotone { iter, before, after });
    }
    Ok(())
}

pub fn lloyd_direction(samples: &TrainingSet, n_d: usize, max_iters: usize, seed: u64) -> Result<LloydOutput<DirectionCodebook>> {
    lloyd_direction_points(&samples.directions(), n_d, max_iters, seed)
}

/// Generalised Lloyd on unit vectors under chordal distance. Centroids are
/// principal eigenvectors of each cluster's scatter matrix.
///
/// Codeword `j` is stored as its canonical-phase representative rotated by
/// `j·GOLDEN_ANGLE`.
pub fn lloyd_direction_points(points: &[Vec<C64>], n_d: usize, max_iters: usize, seed: u64) -> Result<LloydOutput<DirectionCodebook>> {
    super::check_power_of_two(n_d)?;
    if points.len() < n_d {
        return Err(CodebookError::InsufficientSamples { need: n_d, have: points.len() });
    }
    let n = points[0].len();
    let mut rng = stream_rng(seed, substream(purpose::TRAINING, n_d as u64, 0));
    let mut centroids: Vec<Vec<C64>> = index::sample(&mut rng, points.len(), n_d).into_iter().map(|i| points[i].clone()).collect();

    let (mut assign, mut dist) = assign_chordal(points, &centroids);
    let mut history = vec![mean(&dist)];
    for iter in 1..=max_iters {
        let mut scatter = vec![DMatrix::<C64>::zeros(n, n); n_d];
        let mut counts = vec![0usize; n_d];
        for (x, &a) in points.iter().zip(&assign) {
            let v = nalgebra::DVector::from_column_slice(x);
            scatter[a] += &v * v.adjoint();
            counts[a] += 1;
        }
        let mut empty = Vec::new();
        for (j, s) in scatter.into_iter().enumerate() {
            if counts[j] == 0 {
                empty.push(j);
                continue;
            }
            centroids[j] = principal_eigenvector(s).ok_or(CodebookError::Eigen(j))?;
        }
        repair_empty(&mut centroids, &empty, points, &dist);

        let (a2, d2) = assign_chordal(points, &centroids);
        let before = *history.last().unwrap();
        let after = mean(&d2);
        check_step(iter, before, after)?;
        history.push(after);
        assign = a2;
        dist = d2;
        if before - after < LLOYD_TOL {
            break;
        }
    }
    let entries = centroids
        .into_iter()
        .enumerate()
        .map(|(j, c)| Ok(GrassmannPoint::normalize(c)?.with_phase(j as f64 * super::GOLDEN_ANGLE)))
        .collect::<Result<Vec<_>>>()?;
    Ok(LloydOutput { codebook: DirectionCodebook::new(entries)?, history })
}

/// Puts each empty cell's codeword on the sample that is currently worst
/// served, taking samples in decreasing distortion order.
fn repair_empty<T: Clone>(codewords: &mut [T], empty: &[usize], samples: &[T], dist: &[f64]) {
    if empty.is_empty() {
        return;
    }
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_by(|&a, &b| dist[b].total_cmp(&dist[a]).then(a.cmp(&b)));
    for (&j, &s) in empty.iter().zip(&order) {
        codewords[j] = samples[s].clone();
    }
}

/// Nearest centroid (lowest index on ties) and squared chordal distance.
fn assign_chordal(points: &[Vec<C64>], centroids: &[Vec<C64>]) -> (Vec<usize>, Vec<f64>) {
    points
        .iter()
        .map(|x| {
            let mut best = 0;
            let mut best_overlap = f64::NEG_INFINITY;
            for (j, c) in centroids.iter().enumerate() {
                let o = cvec::inner(c, x).norm_sqr();
                if o > best_overlap {
                    best = j;
                    best_overlap = o;
                }
            }
            (best, (1.0 - best_overlap / (cvec::norm_sqr(x) * cvec::norm_sqr(&centroids[best]))).max(0.0))
        })
        .unzip()
}

fn principal_eigenvector(scatter: DMatrix<C64>) -> Option<Vec<C64>> {
    let eig = scatter.symmetric_eigen();
    let (k, _) = eig.eigenvalues.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    let v: Vec<C64> = eig.eigenvectors.column(k).iter().copied().collect();
    let nrm = cvec::norm(&v);
    (nrm.is_finite() && nrm > 0.0).then(|| cvec::canonical_phase(&cvec::scale_real(&v, 1.0 / nrm)))
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Scalar Lloyd-Max, initialised at sample quantiles.
pub fn lloyd_magnitude(samples: &[f64], n_m: usize, max_iters: usize) -> Result<LloydOutput<MagnitudeCodebook>> {
    super::check_power_of_two(n_m)?;
    if samples.len() < n_m {
        return Err(CodebookError::InsufficientSamples { need: n_m, have: samples.len() });
    }
    let mut sorted: Vec<f64> = samples.iter().map(|&m| m.clamp(0.0, MAX_MAGNITUDE)).collect();
    sorted.sort_by(f64::total_cmp);
    let len = sorted.len();
    let mut codewords: Vec<f64> = (0..n_m).map(|i| sorted[((2 * i + 1) * len) / (2 * n_m)]).collect();

    let (mut assign, mut dist) = assign_scalar(&sorted, &codewords);
    let mut history = vec![mean(&dist)];
    for iter in 1..=max_iters {
        let mut sums = vec![0.0; n_m];
        let mut counts = vec![0usize; n_m];
        for (&x, &a) in sorted.iter().zip(&assign) {
            sums[a] += x;
            counts[a] += 1;
        }
        let mut empty = Vec::new();
        for j in 0..n_m {
            if counts[j] == 0 {
                empty.push(j);
            } else {
                codewords[j] = sums[j] / counts[j] as f64;
            }
        }
        repair_empty(&mut codewords, &empty, &sorted, &dist);
        codewords.sort_by(f64::total_cmp);

        let (a2, d2) = assign_scalar(&sorted, &codewords);
        let before = *history.last().unwrap();
        let after = mean(&d2);
        check_step(iter, before, after)?;
        history.push(after);
        assign = a2;
        dist = d2;
        if before - after < LLOYD_TOL {
            break;
        }
    }
    Ok(LloydOutput { codebook: MagnitudeCodebook::new(codewords)?, history })
}

fn assign_scalar(samples: &[f64], codewords: &[f64]) -> (Vec<usize>, Vec<f64>) {
    samples
        .iter()
        .map(|&x| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (j, &c) in codewords.iter().enumerate() {
                let d = (x - c) * (x - c);
                if d < best_d {
                    best = j;
                    best_d = d;
                }
            }
            (best, best_d)
        })
        .unzip()
}

/// Mean squared error of `codebook` on `samples` (nearest-codeword rule).
pub fn magnitude_distortion(samples: &[f64], codebook: &MagnitudeCodebook) -> f64 {
    mean(&assign_scalar(samples, codebook.entries()).1)
}

/// Mean squared chordal distance from `points` to their nearest codeword.
pub fn direction_distortion(points: &[Vec<C64>], codebook: &DirectionCodebook) -> f64 {
    let cs: Vec<Vec<C64>> = codebook.entries().iter().map(|c| c.coords().to_vec()).collect();
    mean(&assign_chordal(points, &cs).1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{gen_ar1, Ar1Params};
    use crate::codebook::{random_packing, uniform_magnitude, ShapeGainCodebook};
    use crate::codec::Unquantized;
    use crate::grassmann::exp_map;

    fn geodesic_trace(n: usize, len: usize, step: f64) -> Vec<GrassmannPoint> {
        let x0 = GrassmannPoint::basis(n, 0).unwrap();
        let dir = GrassmannPoint::basis(n, 1).unwrap();
        let t = TangentVector::from_projection(x0.clone(), 1.0, dir.coords()).unwrap();
        (0..len).map(|k| exp_map(&x0, &t, step * k as f64).unwrap()).collect()
    }

    #[test]
    fn constant_motion_is_predicted_perfectly() {
        let set = harvest_open_loop(&geodesic_trace(3, 20, 0.05)).unwrap();
        assert_eq!(set.len(), 18);
        assert!(set.tangents.iter().all(|t| t.magnitude() < 1e-7));
        let still = vec![GrassmannPoint::basis(3, 2).unwrap(); 10];
        assert!(harvest_open_loop(&still).unwrap().tangents.iter().all(|t| t.is_zero()));
        assert!(matches!(harvest_open_loop(&still[..2]), Err(CodebookError::TraceTooShort(2))));
    }

    #[test]
    fn perfect_stub_closed_loop_equals_open_loop() {
        let trace = gen_ar1(&Ar1Params::new(4, 0.01, 300, 5)).unwrap().normalized;
        let dirs = random_packing(4, 4, 5, 1).unwrap();
        let open = harvest_open_loop(&trace).unwrap();
        let closed = harvest_closed_loop(&trace, &Unquantized { n: 4 }, &dirs).unwrap();
        assert_eq!(open.len(), closed.len());
        for (a, b) in open.tangents.iter().zip(&closed.tangents) {
            assert!((a.magnitude() - b.magnitude()).abs() < 1e-9, "{} {}", a.magnitude(), b.magnitude());
        }
    }

    #[test]
    fn lloyd_direction_recovers_separated_points() {
        let targets: Vec<Vec<C64>> = (0..4).map(|i| GrassmannPoint::basis(4, i).unwrap().into_coords()).collect();
        let pts: Vec<Vec<C64>> = (0..40).map(|i| targets[i % 4].clone()).collect();
        let out = lloyd_direction_points(&pts, 4, 50, 3).unwrap();
        assert!(out.history.last().unwrap().abs() < 1e-15);
        for t in &targets {
            let tp = GrassmannPoint::normalize(t.clone()).unwrap();
            assert!(out.codebook.entries().iter().any(|c| c.approx_eq(&tp, 1e-9)));
        }
    }

    #[test]
    fn lloyd_direction_single_centroid_is_principal_axis() {
        let mut rng = stream_rng(2, 0);
        let pts: Vec<Vec<C64>> = (0..10)
            .map(|_| GrassmannPoint::random(&mut rng, 3).into_coords())
            .collect();
        let out = lloyd_direction_points(&pts, 1, 10, 0).unwrap();
        // Power iteration on the scatter matrix as the oracle.
        let mut v = vec![C64::new(1.0, 0.0), C64::new(0.3, -0.2), C64::new(0.1, 0.4)];
        for _ in 0..2000 {
            let mut w = vec![C64::new(0.0, 0.0); 3];
            for x in &pts {
                let c = cvec::inner(x, &v);
                for k in 0..3 {
                    w[k] += x[k] * c;
                }
            }
            let nrm = cvec::norm(&w);
            v = cvec::scale_real(&w, 1.0 / nrm);
        }
        let oracle = GrassmannPoint::normalize(v).unwrap();
        assert!(out.codebook.entries()[0].approx_eq(&oracle, 1e-9));
    }

    #[test]
    fn lloyd_direction_is_monotone_on_random_data() {
        let mut rng = stream_rng(3, 0);
        let pts: Vec<Vec<C64>> = (0..2000).map(|_| GrassmannPoint::random(&mut rng, 4).into_coords()).collect();
        let out = lloyd_direction_points(&pts, 16, 100, 1).unwrap();
        assert!(out.history.windows(2).all(|w| w[1] <= w[0]));
        assert!(out.codebook.entries().iter().all(|c| (cvec::norm(c.coords()) - 1.0).abs() < 1e-12));
        assert!(lloyd_direction_points(&pts[..3], 4, 10, 0).is_err());
    }

    #[test]
    fn lloyd_magnitude_examples() {
        let out = lloyd_magnitude(&[0.1, 0.1, 0.3, 0.3], 2, 50).unwrap();
        assert_eq!(out.codebook.entries(), &[0.1, 0.3]);
        let out = lloyd_magnitude(&[0.2; 16], 4, 50).unwrap();
        assert!(out.codebook.entries().iter().all(|&c| (c - 0.2).abs() < 1e-15));
        assert!(*out.history.last().unwrap() < 1e-30);
    }

    #[test]
    fn lloyd_magnitude_beats_uniform() {
        let mut rng = stream_rng(4, 0);
        let xs: Vec<f64> = (0..5000).map(|_| {
            let z = cvec::complex_gaussian(&mut rng);
            (z.norm() * 0.05).min(1.0)
        }).collect();
        let trained = lloyd_magnitude(&xs, 8, 200).unwrap();
        assert!(trained.history.windows(2).all(|w| w[1] <= w[0]));
        let uni = uniform_magnitude(8, 0.0, 0.2).unwrap();
        assert!(magnitude_distortion(&xs, &trained.codebook) <= magnitude_distortion(&xs, &uni));
    }

    #[test]
    fn closed_loop_harvest_is_deterministic() {
        let trace = gen_ar1(&Ar1Params::new(3, 0.01, 200, 8)).unwrap().normalized;
        let cb = ShapeGainCodebook::new(random_packing(3, 8, 10, 4).unwrap(), uniform_magnitude(4, 0.0, 0.2).unwrap()).unwrap();
        let a = harvest_closed_loop(&trace, &cb, &cb.directions).unwrap();
        let b = harvest_closed_loop(&trace, &cb, &cb.directions).unwrap();
        assert_eq!(a, b);
    }
}
