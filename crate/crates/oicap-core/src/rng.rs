//! Seedable, counter-based random streams.
//!
//! Every stochastic routine in the crate draws from a [`StreamRng`]: ChaCha12
//! keyed by a master seed, with the 64-bit stream id selecting an independent
//! substream. Workers never share a state; a block of work owns the stream id
//! derived from its block index, so aggregate results are identical for any
//! worker count or execution order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// One independent random substream of a seeded master generator.
#[derive(Debug, Clone)]
pub struct StreamRng(ChaCha12Rng);

impl StreamRng {
    /// Stream `stream` of the generator keyed by `seed`.
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self(rng)
    }
}

impl rand_core::RngCore for StreamRng {
    fn next_u32(&mut self) -> u32 {
        rand_core::RngCore::next_u32(&mut self.0)
    }
    fn next_u64(&mut self) -> u64 {
        rand_core::RngCore::next_u64(&mut self.0)
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        rand_core::RngCore::fill_bytes(&mut self.0, dest)
    }
}
