//! Seeded random streams.
//!
//! Every generated pattern draws from its own ChaCha8 stream selected by
//! `(master_seed, stream_id)`, so results do not depend on the order in which
//! patterns are produced or on how many workers produce them.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub type AugRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    /// The stream for this `(master_seed, stream_id)` pair. The master seed
    /// keys the generator and the stream id selects one of its 2^64
    /// independent streams.
    pub fn rng(&self) -> AugRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// One draw from `Normal(mean, sigma^2)`; `sigma == 0` returns `mean` exactly.
pub fn gaussian<R: Rng + ?Sized>(rng: &mut R, mean: f64, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return mean;
    }
    Normal::new(mean, sigma)
        .expect("sigma must be finite and non-negative")
        .sample(rng)
}

/// `count` i.i.d. draws from `Normal(mean, sigma^2)` on the stream named by `seed`.
pub fn draw_gaussian(seed: SeedSpec, mean: f64, sigma: f64, count: usize) -> Vec<f64> {
    assert!(sigma >= 0.0, "sigma must be non-negative");
    let mut rng = seed.rng();
    gaussian_vec(&mut rng, mean, sigma, count)
}

pub(crate) fn gaussian_vec<R: Rng + ?Sized>(
    rng: &mut R,
    mean: f64,
    sigma: f64,
    count: usize,
) -> Vec<f64> {
    if sigma == 0.0 {
        return vec![mean; count];
    }
    let normal = Normal::new(mean, sigma).expect("sigma must be finite and non-negative");
    (0..count).map(|_| normal.sample(rng)).collect()
}
