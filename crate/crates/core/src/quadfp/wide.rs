//! 256-bit unsigned integer, just wide enough for exact 113x113-bit products
//! and their alignment against a third operand.

use core::cmp::Ordering;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub(crate) struct U256 {
    pub hi: u128,
    pub lo: u128,
}

impl U256 {
    pub const ZERO: U256 = U256 { hi: 0, lo: 0 };

    #[inline]
    pub fn from_u128(lo: u128) -> Self {
        U256 { hi: 0, lo }
    }

    /// Full 256-bit product of two 128-bit values.
    #[inline]
    pub fn mul(a: u128, b: u128) -> Self {
        const M: u128 = u64::MAX as u128;
        let (a1, a0) = (a >> 64, a & M);
        let (b1, b0) = (b >> 64, b & M);
        let p00 = a0 * b0;
        let p01 = a0 * b1;
        let p10 = a1 * b0;
        let p11 = a1 * b1;
        let mid = (p00 >> 64) + (p01 & M) + (p10 & M);
        let lo = (p00 & M) | (mid << 64);
        let hi = p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64);
        U256 { hi, lo }
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.hi == 0 && self.lo == 0
    }

    #[inline]
    pub fn bits(&self) -> u32 {
        if self.hi != 0 {
            256 - self.hi.leading_zeros()
        } else {
            128 - self.lo.leading_zeros()
        }
    }

    #[inline]
    pub fn shl(self, n: u32) -> Self {
        match n {
            0 => self,
            1..=127 => U256 { hi: (self.hi << n) | (self.lo >> (128 - n)), lo: self.lo << n },
            128..=255 => U256 { hi: self.lo << (n - 128), lo: 0 },
            _ => U256::ZERO,
        }
    }

    /// Right shift, also reporting whether any 1 bits were shifted out.
    #[inline]
    pub fn shr_sticky(self, n: u32) -> (Self, bool) {
        match n {
            0 => (self, false),
            1..=127 => {
                let lost = self.lo & ((1u128 << n) - 1) != 0;
                let out = U256 { hi: self.hi >> n, lo: (self.lo >> n) | (self.hi << (128 - n)) };
                (out, lost)
            }
            128 => (U256::from_u128(self.hi), self.lo != 0),
            129..=255 => {
                let k = n - 128;
                let lost = self.lo != 0 || self.hi & ((1u128 << k) - 1) != 0;
                (U256::from_u128(self.hi >> k), lost)
            }
            _ => (U256::ZERO, !self.is_zero()),
        }
    }

    #[inline]
    pub fn wrapping_add(self, o: Self) -> Self {
        let (lo, c) = self.lo.overflowing_add(o.lo);
        U256 { hi: self.hi.wrapping_add(o.hi).wrapping_add(c as u128), lo }
    }

    #[inline]
    pub fn wrapping_sub(self, o: Self) -> Self {
        let (lo, b) = self.lo.overflowing_sub(o.lo);
        U256 { hi: self.hi.wrapping_sub(o.hi).wrapping_sub(b as u128), lo }
    }
}

impl PartialOrd for U256 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for U256 {
    fn cmp(&self, other: &Self) -> Ordering {
        self.hi.cmp(&other.hi).then(self.lo.cmp(&other.lo))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mul_matches_schoolbook() {
        let a = u128::MAX;
        let p = U256::mul(a, a);
        // (2^128 - 1)^2 = 2^256 - 2^129 + 1
        assert_eq!(p.lo, 1);
        assert_eq!(p.hi, u128::MAX - 1);
        assert_eq!(U256::mul(1 << 100, 1 << 100), U256 { hi: 1 << 72, lo: 0 });
    }

    #[test]
    fn shifts() {
        let x = U256 { hi: 1, lo: 1 };
        assert_eq!(x.shl(127), U256 { hi: 1 << 127, lo: 1 << 127 }.wrapping_add(U256::ZERO));
        assert_eq!(x.shr_sticky(1), (U256 { hi: 0, lo: 1 << 127 }, true));
        assert_eq!(x.shr_sticky(128), (U256::from_u128(1), true));
        assert_eq!(x.shr_sticky(300), (U256::ZERO, true));
        assert_eq!(x.bits(), 129);
    }
}
