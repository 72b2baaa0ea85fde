//! Seeded Gaussian directions for the smoothing measure.
//!
//! Draws have density proportional to `exp(−‖u‖²/2)` with `‖u‖² = ⟨Bu, u⟩`,
//! i.e. `u ~ N(0, B⁻¹)`. They are generated as `u = L⁻ᵀ z` with
//! `z ~ N(0, I)` and `B = L Lᵀ`, so `‖u‖ = ‖z‖₂` exactly.
//!
//! The generator is ChaCha8 keyed by the seed, with independent streams
//! selected through ChaCha's 64-bit stream id.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::space::NormSpace;

#[derive(Clone, Debug)]
pub struct GaussianSampler {
    space: NormSpace,
    seed: u64,
    stream: u64,
    drawn: u64,
    rng: ChaCha8Rng,
}

impl GaussianSampler {
    pub fn new(space: NormSpace, seed: u64) -> Self {
        Self::with_stream(space, seed, 0)
    }

    pub fn with_stream(space: NormSpace, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { space, seed, stream, drawn: 0, rng }
    }

    /// An independent sampler over the same space and seed.
    pub fn split(&self, stream: u64) -> Self {
        Self::with_stream(self.space.clone(), self.seed, stream)
    }

    pub fn space(&self) -> &NormSpace {
        &self.space
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Number of directions drawn so far.
    pub fn stream_index(&self) -> u64 {
        self.drawn
    }

    pub fn sample_u(&mut self) -> Vec<f64> {
        let mut u = vec![0.0; self.space.dim()];
        self.fill(&mut u);
        u
    }

    /// Draws the next direction into `u` (length `n`).
    pub fn fill(&mut self, u: &mut [f64]) {
        debug_assert_eq!(u.len(), self.space.dim());
        for v in u.iter_mut() {
            *v = self.rng.sample(StandardNormal);
        }
        self.space.solve_upper_transposed(u);
        self.drawn += 1;
    }
}
