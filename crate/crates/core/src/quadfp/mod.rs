//! IEEE 754 binary128 arithmetic in software.
//!
//! Every operation is a pure function of bit patterns and rounds to nearest,
//! ties to even. There are no status flags; infinities and NaNs travel as
//! values. Invalid operations produce [`QuadFloat::NAN`] (a quiet NaN with a
//! fixed payload); an input NaN is returned quieted, first operand first.

mod arith;
mod convert;
mod hex;
mod round;
mod wide;

use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};

pub use arith::{qabs, qadd, qcmp, qdiv, qfma, qmadd, qmul, qneg, qsub};
pub use convert::{from_f64, to_f64};
pub use hex::{format_hexfloat, parse_hexfloat, write_hexfloat, ParseHexError, ParseHexErrorKind};

pub(crate) const SIGN_MASK: u128 = 1 << 127;
pub(crate) const EXP_MASK: u128 = 0x7FFF << 112;
pub(crate) const FRAC_MASK: u128 = (1 << 112) - 1;
pub(crate) const HIDDEN: u128 = 1 << 112;
pub(crate) const QUIET: u128 = 1 << 111;

/// One binary128 value, stored as its 128-bit interchange pattern.
///
/// `PartialEq` and `PartialOrd` follow IEEE semantics (`-0 == +0`, NaN is
/// unordered). Use [`QuadFloat::to_bits`] for bit-exact comparisons.
#[derive(Clone, Copy, Default)]
#[repr(transparent)]
pub struct QuadFloat(u128);

/// How a processing element evaluates `a * b + c`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum MaddMode {
    /// Round the product, then round the sum.
    #[default]
    TwoRoundings,
    /// Round the exact `a * b + c` once.
    Fused,
}

impl QuadFloat {
    pub const ZERO: QuadFloat = QuadFloat(0);
    pub const NEG_ZERO: QuadFloat = QuadFloat(SIGN_MASK);
    pub const ONE: QuadFloat = QuadFloat(0x3FFF << 112);
    pub const NEG_ONE: QuadFloat = QuadFloat(SIGN_MASK | 0x3FFF << 112);
    pub const INFINITY: QuadFloat = QuadFloat(EXP_MASK);
    pub const NEG_INFINITY: QuadFloat = QuadFloat(SIGN_MASK | EXP_MASK);
    /// Canonical quiet NaN produced by invalid operations.
    pub const NAN: QuadFloat = QuadFloat(EXP_MASK | QUIET);
    /// Largest finite value.
    pub const MAX: QuadFloat = QuadFloat(EXP_MASK - 1);
    /// Smallest positive normal value, `2^-16382`.
    pub const MIN_POSITIVE: QuadFloat = QuadFloat(HIDDEN);
    /// Distance from 1.0 to the next larger value, `2^-112`.
    pub const EPSILON: QuadFloat = QuadFloat((0x3FFF - 112) << 112);

    #[inline]
    pub const fn from_bits(bits: u128) -> Self {
        QuadFloat(bits)
    }

    #[inline]
    pub const fn to_bits(self) -> u128 {
        self.0
    }

    /// The 16-byte little-endian interchange form.
    #[inline]
    pub const fn to_le_bytes(self) -> [u8; 16] {
        self.0.to_le_bytes()
    }

    #[inline]
    pub const fn from_le_bytes(bytes: [u8; 16]) -> Self {
        QuadFloat(u128::from_le_bytes(bytes))
    }

    /// Sign, biased exponent field and fraction field.
    pub const fn decode(self) -> (bool, u16, u128) {
        (self.0 & SIGN_MASK != 0, ((self.0 >> 112) & 0x7FFF) as u16, self.0 & FRAC_MASK)
    }

    /// Inverse of [`decode`](Self::decode); out-of-range fields are masked.
    pub const fn encode(sign: bool, exponent: u16, fraction: u128) -> Self {
        let s = if sign { SIGN_MASK } else { 0 };
        QuadFloat(s | ((exponent as u128 & 0x7FFF) << 112) | (fraction & FRAC_MASK))
    }

    /// `int * 2^exp`, correctly rounded.
    pub fn from_scaled_int(negative: bool, int: u128, exp: i32) -> Self {
        let s = if negative { SIGN_MASK } else { 0 };
        if int == 0 {
            return QuadFloat(s);
        }
        QuadFloat(s | round::round_pack(exp, int, &round::BINARY128))
    }

    #[inline]
    pub fn from_f64(x: f64) -> Self {
        from_f64(x)
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        to_f64(self)
    }

    #[inline]
    pub const fn is_nan(self) -> bool {
        self.0 & !SIGN_MASK > EXP_MASK
    }

    #[inline]
    pub const fn is_infinite(self) -> bool {
        self.0 & !SIGN_MASK == EXP_MASK
    }

    #[inline]
    pub const fn is_finite(self) -> bool {
        self.0 & EXP_MASK != EXP_MASK
    }

    #[inline]
    pub const fn is_zero(self) -> bool {
        self.0 & !SIGN_MASK == 0
    }

    #[inline]
    pub const fn is_subnormal(self) -> bool {
        self.0 & EXP_MASK == 0 && self.0 & FRAC_MASK != 0
    }

    #[inline]
    pub const fn is_sign_negative(self) -> bool {
        self.0 & SIGN_MASK != 0
    }

    #[inline]
    pub fn abs(self) -> Self {
        qabs(self)
    }

    #[inline]
    pub fn mul_add(self, b: Self, c: Self, mode: MaddMode) -> Self {
        qmadd(self, b, c, mode)
    }

    /// Bit-pattern equality, distinguishing `-0`/`+0` and NaN payloads.
    #[inline]
    pub const fn bits_eq(self, other: Self) -> bool {
        self.0 == other.0
    }
}

impl PartialEq for QuadFloat {
    fn eq(&self, other: &Self) -> bool {
        qcmp(*self, *other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for QuadFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        qcmp(*self, *other)
    }
}

impl Add for QuadFloat {
    type Output = QuadFloat;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        qadd(self, rhs)
    }
}

impl Sub for QuadFloat {
    type Output = QuadFloat;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        qsub(self, rhs)
    }
}

impl Mul for QuadFloat {
    type Output = QuadFloat;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        qmul(self, rhs)
    }
}

impl Div for QuadFloat {
    type Output = QuadFloat;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        qdiv(self, rhs)
    }
}

impl Neg for QuadFloat {
    type Output = QuadFloat;
    #[inline]
    fn neg(self) -> Self {
        qneg(self)
    }
}

impl From<f64> for QuadFloat {
    fn from(x: f64) -> Self {
        from_f64(x)
    }
}

impl fmt::Debug for QuadFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_hexfloat(f, *self)
    }
}

impl fmt::Display for QuadFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_hexfloat(f, *self)
    }
}

impl core::str::FromStr for QuadFloat {
    type Err = ParseHexError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_hexfloat(s)
    }
}
