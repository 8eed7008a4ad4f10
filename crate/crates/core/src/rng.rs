//! Seeded, splittable random streams.
//!
//! Every stochastic component takes a `&mut SeededRng` owned by the caller.
//! Streams are ChaCha8 keyed by a 64-bit seed plus a 64-bit stream id, so an
//! episode's stream is a pure function of `(master seed, episode index)` and
//! parallel workers never share state.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finaliser, used to derive child keys.
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Debug)]
pub struct SeededRng {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        SeededRng {
            seed,
            stream,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Independent child stream `k`.
    ///
    /// Depends only on `(seed, stream, k)`, never on how many values have
    /// already been drawn from `self`.
    pub fn substream(&self, k: u64) -> SeededRng {
        SeededRng::with_stream(mix64(self.seed ^ mix64(self.stream)), k)
    }

    /// Child stream keyed by the next draw of `self`. Used where the number
    /// of children is data dependent (recursive solvers).
    pub fn fork(&mut self) -> SeededRng {
        let key = self.inner.next_u64();
        SeededRng::with_stream(mix64(key), 0)
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Seed of episode `k` under a master seed.
pub fn episode_seed(master: u64, k: u64) -> u64 {
    SeededRng::with_stream(master, k).next_u64()
}
