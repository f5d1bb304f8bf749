#![allow(dead_code)]

use grasspc_core::cvec;
use grasspc_core::rng::{stream_rng, SimRng};
use grasspc_core::{GrassmannPoint, C64};

pub fn rng(seed: u64) -> SimRng {
    stream_rng(seed, 0xface)
}

/// A pair whose overlap magnitude is at least `min_rho`. `spread` in (0, 1]
/// controls how far apart the two points are.
pub fn correlated_pair(rng: &mut SimRng, n: usize, spread: f64, min_rho: f64) -> (GrassmannPoint, GrassmannPoint) {
    loop {
        let x = GrassmannPoint::random(rng, n);
        let z = cvec::complex_gaussian_vec(rng, n);
        let y = cvec::lin_comb(C64::new(1.0, 0.0), x.coords(), C64::new(spread, 0.0), &z);
        let y = GrassmannPoint::normalize(y).unwrap();
        if x.inner(&y).unwrap().norm() > min_rho {
            let phase: f64 = rand::Rng::random_range(rng, 0.0..std::f64::consts::TAU);
            return (x, y.with_phase(phase));
        }
    }
}

pub fn unit_norm_error(p: &GrassmannPoint) -> f64 {
    (cvec::norm(p.coords()) - 1.0).abs()
}
