//! Round-to-nearest-even packing shared by every arithmetic path.

use super::wide::U256;

/// Parameters of a binary interchange format.
pub(crate) struct Format {
    /// Significand bits including the hidden bit.
    pub precision: u32,
    /// Exponent of the least significant bit of the smallest subnormal.
    pub emin_lsb: i32,
    /// All-ones exponent field (Inf/NaN).
    pub max_field: u32,
}

pub(crate) const BINARY128: Format = Format { precision: 113, emin_lsb: -16494, max_field: 0x7FFF };
pub(crate) const BINARY64: Format = Format { precision: 53, emin_lsb: -1074, max_field: 0x7FF };

/// Rounds `sig * 2^exp` to `fmt` and returns the unsigned bit pattern
/// (the infinity pattern on overflow).
///
/// `sig` must be nonzero. Its lowest bit may be a jammed sticky bit: if the
/// true value is not exactly `sig * 2^exp`, then `sig` must be odd, the true
/// value must lie strictly within one unit of `sig`, and `sig` must carry at
/// least two bits below the rounding position.
#[inline]
pub(crate) fn round_pack(exp: i32, sig: u128, fmt: &Format) -> u128 {
    debug_assert!(sig != 0);
    let frac_bits = fmt.precision - 1;
    let len = (128 - sig.leading_zeros()) as i32;
    let top = exp + len - 1;
    let q = (top - frac_bits as i32).max(fmt.emin_lsb);
    let sh = q - exp;
    let m = if sh <= 0 {
        sig << (-sh) as u32
    } else if sh >= 128 {
        0
    } else {
        let sh = sh as u32;
        let m = sig >> sh;
        let rem = sig & ((1u128 << sh) - 1);
        let half = 1u128 << (sh - 1);
        if rem > half || (rem == half && m & 1 == 1) {
            m + 1
        } else {
            m
        }
    };
    let field_minus_one = (q - fmt.emin_lsb) as u128;
    let inf = (fmt.max_field as u128) << frac_bits;
    if field_minus_one >= fmt.max_field as u128 {
        return inf;
    }
    // A carry out of the significand bumps the exponent field for free.
    let bits = (field_minus_one << frac_bits) + m;
    bits.min(inf)
}

/// Narrows an exact wide value (plus an optional sticky remainder) to at
/// most 116 significant bits with the lost bits jammed into the lsb.
#[inline]
pub(crate) fn compress(exp: i32, sig: U256, sticky: bool) -> (i32, u128) {
    let len = sig.bits();
    if len <= 116 {
        debug_assert!(!sticky);
        return (exp, sig.lo);
    }
    let s = len - 116;
    let (v, lost) = sig.shr_sticky(s);
    (exp + s as i32, v.lo | (lost || sticky) as u128)
}
