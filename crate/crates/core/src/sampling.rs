//! Seeded sampling of fiber points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::metric::{random_direction, ChartDomain, FiberPoint};
use crate::scalar::Real;

/// Deterministic stream of random fiber points over a chart.
///
/// Base points are uniform on each axis' sampling interval; fiber vectors are
/// uniform directions with lengths in `[0.5, 2]`.
pub struct Sampler<'a, T> {
    domain: &'a ChartDomain<T>,
    rng: ChaCha8Rng,
}

impl<'a, T: Real> Sampler<'a, T> {
    pub fn new(domain: &'a ChartDomain<T>, seed: u64) -> Self {
        Sampler { domain, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn base_point(&mut self) -> Vec<T> {
        (0..self.domain.dim())
            .map(|k| {
                let (lo, hi) = self.domain.sample_interval(k);
                let u: f64 = self.rng.gen();
                lo + (hi - lo) * T::lit(u)
            })
            .collect()
    }

    pub fn fiber_point(&mut self) -> FiberPoint<T> {
        let x = self.base_point();
        let dir: Vec<T> = random_direction(&mut self.rng, self.domain.dim());
        let len = T::lit(self.rng.gen_range(0.5..2.0));
        FiberPoint { x, y: dir.into_iter().map(|v| v * len).collect() }
    }
}

/// `count` seeded fiber points.
pub fn sample_fiber_points<T: Real>(domain: &ChartDomain<T>, count: usize, seed: u64) -> Vec<FiberPoint<T>> {
    let mut s = Sampler::new(domain, seed);
    (0..count).map(|_| s.fiber_point()).collect()
}
