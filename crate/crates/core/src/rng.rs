//! Counter-based deterministic random streams.
//!
//! Every draw is a pure function of `(seed, lane, counter)`. This makes
//! simulation results independent of iteration order and thread scheduling:
//! node `i`'s draw in slot `t` is the same no matter when it is computed.

/// SplitMix64 finalizer; full-avalanche 64-bit mixer.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// 64 uniform bits for `(seed, lane, counter)`.
#[inline]
pub fn bits(seed: u64, lane: u64, counter: u64) -> u64 {
    let mut h = mix(seed ^ 0xa076_1d64_78bd_642f);
    h = mix(h ^ lane.wrapping_mul(0xe703_7ed1_a0b4_28db));
    mix(h ^ counter.wrapping_mul(0x8ebc_6af0_9c88_c6e3))
}

/// Uniform f64 in `[0, 1)` with 53 random bits.
#[inline]
pub fn uniform(seed: u64, lane: u64, counter: u64) -> f64 {
    (bits(seed, lane, counter) >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
}

/// A convenience sequential view over one `(seed, lane)` stream.
#[derive(Debug, Clone)]
pub struct Stream {
    seed: u64,
    lane: u64,
    counter: u64,
}

impl Stream {
    pub fn new(seed: u64, lane: u64) -> Self {
        Stream { seed, lane, counter: 0 }
    }

    pub fn next_u64(&mut self) -> u64 {
        let v = bits(self.seed, self.lane, self.counter);
        self.counter += 1;
        v
    }

    pub fn next_f64(&mut self) -> f64 {
        let v = uniform(self.seed, self.lane, self.counter);
        self.counter += 1;
        v
    }

    /// Uniform integer in `[0, bound)` by rejection-free multiply-shift.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        ((self.next_u64() as u128 * bound as u128) >> 64) as u64
    }
}
