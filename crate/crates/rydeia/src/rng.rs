//! Small deterministic RNG for synthetic-noise channels.
//!
//! Noise must be reproducible bit-for-bit from a seed and independent of the
//! order in which grid points are evaluated, so each grid point gets its own
//! stream derived from (seed, point index). SplitMix64 is used as the mixer
//! and generator; it is tiny, has no global state, and produces identical
//! sequences on every platform.

/// SplitMix64 generator (Steele, Lea, Flood 2014).
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Stream for one grid point: the seed and index are mixed through one
    /// scrambling round each so that neighbouring indices decorrelate.
    pub fn for_point(seed: u64, index: u64) -> Self {
        let mut s = Self::new(seed ^ 0x9e37_79b9_7f4a_7c15);
        let a = s.next_u64();
        let mut t = Self::new(index.wrapping_mul(0xbf58_476d_1ce4_e5b9) ^ a);
        let b = t.next_u64();
        Self::new(b)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1) with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Pair of independent standard normal deviates (Box–Muller).
    pub fn next_normal_pair(&mut self) -> (f64, f64) {
        // u1 in (0, 1] so the log is finite.
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        (r * theta.cos(), r * theta.sin())
    }

    pub fn next_normal(&mut self) -> f64 {
        self.next_normal_pair().0
    }

    /// Uniform in [lo, hi).
    pub fn next_in_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Log-uniform in [lo, hi), lo > 0.
    pub fn next_log_uniform(&mut self, lo: f64, hi: f64) -> f64 {
        (self.next_in_range(lo.ln(), hi.ln())).exp()
    }
}
