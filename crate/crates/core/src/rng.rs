//! SplitMix64 (Steele, Lea & Flood 2014), the generator behind every seeded
//! matrix in this crate.
//!
//! State update: `s += 0x9E3779B97F4A7C15`; output:
//! `z = s; z = (z ^ z>>30) * 0xBF58476D1CE4E5B9; z = (z ^ z>>27) * 0x94D049BB133111EB; z ^ z>>31`.
//! A uniform double in `[0, 1)` is `(next >> 11) * 2^-53`; a uniform binary128
//! value uses two draws (see [`SplitMix64::next_quad`]). The sequence is
//! trivially reproducible in any language with 64-bit wrapping arithmetic.

use crate::quadfp::QuadFloat;

#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub const fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[0, 1)` on the binary128 grid: 113 random bits (all 64
    /// of one draw, then the top 49 of the next) scaled by `2^-113`.
    pub fn next_quad(&mut self) -> QuadFloat {
        let hi = self.next_u64() as u128;
        let lo = (self.next_u64() >> 15) as u128;
        QuadFloat::from_scaled_int(false, hi << 49 | lo, -113)
    }

    /// Uniform in `0..n` (modulo bias is irrelevant for test data).
    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }
}
