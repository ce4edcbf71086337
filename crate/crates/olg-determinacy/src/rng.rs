//! Deterministic random numbers for Monte-Carlo probes.
//!
//! A 64-bit linear congruential generator with fixed, documented constants
//! so that any other implementation can reproduce the exact stream:
//!
//! ```text
//! state <- state * 6364136223846793005 + 1442695040888963407   (mod 2^64)
//! ```
//!
//! Doubles take the top 53 bits of the updated state, giving uniform values
//! in `[0, 1)`. Per-sample substreams are derived as
//! `seed XOR (index + 1) * 0x9E3779B97F4A7C15`, which keeps parallel and
//! sequential evaluation byte-identical.

#[derive(Debug, Clone)]
pub struct Lcg64 {
    state: u64,
}

impl Lcg64 {
    pub const MULTIPLIER: u64 = 6364136223846793005;
    pub const INCREMENT: u64 = 1442695040888963407;
    pub const STREAM_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

    pub fn new(seed: u64) -> Self {
        Lcg64 { state: seed }
    }

    /// Substream for sample `index` under a common `seed`.
    pub fn stream(seed: u64, index: u64) -> Self {
        Lcg64 {
            state: seed ^ index.wrapping_add(1).wrapping_mul(Self::STREAM_STRIDE),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self
            .state
            .wrapping_mul(Self::MULTIPLIER)
            .wrapping_add(Self::INCREMENT);
        self.state
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Log-uniform in `[lo, hi)`, `lo > 0`.
    pub fn log_uniform(&mut self, lo: f64, hi: f64) -> f64 {
        (self.uniform(lo.ln(), hi.ln())).exp()
    }
}
