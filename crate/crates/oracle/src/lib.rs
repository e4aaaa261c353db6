//! Exact reference arithmetic for IEEE 754 binary128 (and binary64 narrowing).
//!
//! Every operation here decodes its operands into exact rationals built from
//! arbitrary-precision integers, computes the exact result, and rounds it once
//! with round-to-nearest-even. Nothing in this crate shares code with the
//! production soft-float; it works directly on raw bit patterns.
//!
//! Special-value conventions (NaN propagation order, canonical NaN, signed
//! zero rules) are restated here from the IEEE 754 defaults plus the
//! project's fixed NaN policy:
//! - an input NaN is returned quieted, first operand wins;
//! - invalid operations return the canonical quiet NaN `0x7FFF8000...0`.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub const SIGN: u128 = 1 << 127;
pub const EXP_FIELD: u128 = 0x7FFF << 112;
pub const FRAC: u128 = (1 << 112) - 1;
pub const QUIET: u128 = 1 << 111;
pub const CANONICAL_NAN: u128 = EXP_FIELD | QUIET;

/// Target binary interchange format for the rounding step.
#[derive(Clone, Copy, Debug)]
pub struct Format {
    /// Significand precision including the hidden bit.
    pub precision: u32,
    /// Exponent bias.
    pub bias: i64,
    /// Width of the biased exponent field.
    pub exp_bits: u32,
}

pub const BINARY128: Format = Format { precision: 113, bias: 16383, exp_bits: 15 };
pub const BINARY64: Format = Format { precision: 53, bias: 1023, exp_bits: 11 };

impl Format {
    fn frac_bits(&self) -> u32 {
        self.precision - 1
    }
    fn max_field(&self) -> u128 {
        (1u128 << self.exp_bits) - 1
    }
    fn emin_lsb(&self) -> i64 {
        1 - self.bias - self.frac_bits() as i64
    }
}

/// A decoded binary128 datum.
#[derive(Clone, Debug)]
pub enum Value {
    Nan(u128),
    Inf(bool),
    Zero(bool),
    /// `(-1)^neg * mant * 2^exp`, exact.
    Finite {
        neg: bool,
        mant: BigUint,
        exp: i64,
    },
}

pub fn decode(bits: u128) -> Value {
    let neg = bits & SIGN != 0;
    let field = (bits >> 112) & 0x7FFF;
    let frac = bits & FRAC;
    if field == 0x7FFF {
        return if frac == 0 { Value::Inf(neg) } else { Value::Nan(bits) };
    }
    if field == 0 && frac == 0 {
        return Value::Zero(neg);
    }
    let (mant, exp) = if field == 0 { (frac, -16382 - 112) } else { (frac | (1 << 112), field as i64 - 16383 - 112) };
    Value::Finite { neg, mant: BigUint::from(mant), exp }
}

/// Round the exact rational `num / den` (both positive) into `fmt`,
/// returning the unsigned bit pattern (infinity on overflow).
pub fn round_rational(num: &BigUint, den: &BigUint, fmt: Format) -> u128 {
    assert!(!num.is_zero() && !den.is_zero());
    // floor(log2(num/den)): start from bit lengths and correct by comparison.
    let mut e = num.bits() as i64 - den.bits() as i64;
    // want 2^e <= num/den < 2^(e+1)
    loop {
        let (l, r) = scale_pair(num, den, e);
        if l < r {
            e -= 1;
            continue;
        }
        let (l2, r2) = scale_pair(num, den, e + 1);
        if l2 >= r2 {
            e += 1;
            continue;
        }
        break;
    }
    let p = fmt.frac_bits() as i64;
    let q = (e - p).max(fmt.emin_lsb());
    // m = round(num / den / 2^q)
    let (n2, d2) = if q >= 0 { (num.clone(), den << (q as u64)) } else { (num << ((-q) as u64), den.clone()) };
    let (mut m, r) = n2.div_rem(&d2);
    let twice = &r << 1u32;
    if twice > d2 || (twice == d2 && m.bit(0)) {
        m += 1u32;
    }
    let m: u128 = u128::try_from(&m).expect("rounded significand fits");
    let biased_minus_one = (q - fmt.emin_lsb()) as u128;
    if biased_minus_one >= fmt.max_field() {
        return fmt.max_field() << fmt.frac_bits();
    }
    let bits = (biased_minus_one << fmt.frac_bits()) + m;
    if bits >= fmt.max_field() << fmt.frac_bits() {
        fmt.max_field() << fmt.frac_bits()
    } else {
        bits
    }
}

// Returns (num, den * 2^e) or (num * 2^-e, den) so that comparing the two
// decides num/den >= 2^e.
fn scale_pair(num: &BigUint, den: &BigUint, e: i64) -> (BigUint, BigUint) {
    if e >= 0 {
        (num.clone(), den << (e as u64))
    } else {
        (num << ((-e) as u64), den.clone())
    }
}

fn quiet(bits: u128) -> u128 {
    bits | QUIET
}

/// Signed exact value as `num * 2^exp` with a signed integer numerator.
fn to_scaled(v: &Value) -> Option<(BigInt, i64)> {
    match v {
        Value::Finite { neg, mant, exp } => {
            let s = if *neg { Sign::Minus } else { Sign::Plus };
            Some((BigInt::from_biguint(s, mant.clone()), *exp))
        }
        Value::Zero(_) => Some((BigInt::zero(), 0)),
        _ => None,
    }
}

fn pack_signed(num: BigInt, exp: i64) -> u128 {
    // caller guarantees num != 0
    let neg = num.is_negative();
    let mag = num.abs().to_biguint().unwrap();
    let (n, d) =
        if exp >= 0 { (mag << (exp as u64), BigUint::one()) } else { (mag, BigUint::one() << ((-exp) as u64)) };
    let bits = round_rational(&n, &d, BINARY128);
    if neg {
        bits | SIGN
    } else {
        bits
    }
}

fn exact_sum(a: (BigInt, i64), b: (BigInt, i64)) -> (BigInt, i64) {
    let e = a.1.min(b.1);
    let x = a.0 << ((a.1 - e) as u64);
    let y = b.0 << ((b.1 - e) as u64);
    (x + y, e)
}

pub fn add(a: u128, b: u128) -> u128 {
    let (va, vb) = (decode(a), decode(b));
    if let Value::Nan(x) = va {
        return quiet(x);
    }
    if let Value::Nan(x) = vb {
        return quiet(x);
    }
    match (&va, &vb) {
        (Value::Inf(x), Value::Inf(y)) => {
            return if x == y { a } else { CANONICAL_NAN };
        }
        (Value::Inf(_), _) => return a,
        (_, Value::Inf(_)) => return b,
        (Value::Zero(x), Value::Zero(y)) => {
            return if *x && *y { SIGN } else { 0 };
        }
        _ => {}
    }
    let (n, e) = exact_sum(to_scaled(&va).unwrap(), to_scaled(&vb).unwrap());
    if n.is_zero() {
        return 0;
    }
    pack_signed(n, e)
}

pub fn mul(a: u128, b: u128) -> u128 {
    let (va, vb) = (decode(a), decode(b));
    if let Value::Nan(x) = va {
        return quiet(x);
    }
    if let Value::Nan(x) = vb {
        return quiet(x);
    }
    let sign = (a ^ b) & SIGN;
    match (&va, &vb) {
        (Value::Inf(_), Value::Zero(_)) | (Value::Zero(_), Value::Inf(_)) => CANONICAL_NAN,
        (Value::Inf(_), _) | (_, Value::Inf(_)) => EXP_FIELD | sign,
        (Value::Zero(_), _) | (_, Value::Zero(_)) => sign,
        _ => {
            let (x, ex) = to_scaled(&va).unwrap();
            let (y, ey) = to_scaled(&vb).unwrap();
            pack_signed(x * y, ex + ey)
        }
    }
}

pub fn div(a: u128, b: u128) -> u128 {
    let (va, vb) = (decode(a), decode(b));
    if let Value::Nan(x) = va {
        return quiet(x);
    }
    if let Value::Nan(x) = vb {
        return quiet(x);
    }
    let sign = (a ^ b) & SIGN;
    match (&va, &vb) {
        (Value::Inf(_), Value::Inf(_)) | (Value::Zero(_), Value::Zero(_)) => CANONICAL_NAN,
        (Value::Inf(_), _) => EXP_FIELD | sign,
        (_, Value::Inf(_)) => sign,
        (Value::Zero(_), _) => sign,
        (_, Value::Zero(_)) => EXP_FIELD | sign,
        (Value::Finite { mant: ma, exp: ea, .. }, Value::Finite { mant: mb, exp: eb, .. }) => {
            let e = ea - eb;
            let (n, d) = if e >= 0 { (ma << (e as u64), mb.clone()) } else { (ma.clone(), mb << ((-e) as u64)) };
            round_rational(&n, &d, BINARY128) | sign
        }
        _ => unreachable!(),
    }
}

/// Single-rounding `a * b + c`.
pub fn fma(a: u128, b: u128, c: u128) -> u128 {
    let (va, vb, vc) = (decode(a), decode(b), decode(c));
    for v in [&va, &vb, &vc] {
        if let Value::Nan(x) = v {
            return quiet(*x);
        }
    }
    let psign = (a ^ b) & SIGN != 0;
    let prod_inf = matches!(va, Value::Inf(_)) || matches!(vb, Value::Inf(_));
    let prod_zero = matches!(va, Value::Zero(_)) || matches!(vb, Value::Zero(_));
    if prod_inf && prod_zero {
        return CANONICAL_NAN;
    }
    if prod_inf {
        if let Value::Inf(cn) = vc {
            if cn != psign {
                return CANONICAL_NAN;
            }
        }
        return EXP_FIELD | if psign { SIGN } else { 0 };
    }
    if let Value::Inf(_) = vc {
        return c;
    }
    if prod_zero {
        if let Value::Zero(cn) = vc {
            return if psign && cn { SIGN } else { 0 };
        }
        return c;
    }
    let (x, ex) = to_scaled(&va).unwrap();
    let (y, ey) = to_scaled(&vb).unwrap();
    let p = (x * y, ex + ey);
    let (n, e) = match to_scaled(&vc) {
        Some(cv) => exact_sum(p, cv),
        None => unreachable!(),
    };
    if n.is_zero() {
        return 0;
    }
    pack_signed(n, e)
}

/// Narrow a binary128 pattern to binary64 with round-to-nearest-even.
pub fn to_f64_bits(a: u128) -> u64 {
    let sign64 = if a & SIGN != 0 { 1u64 << 63 } else { 0 };
    match decode(a) {
        Value::Nan(bits) => {
            let mut payload = ((bits & FRAC) >> 60) as u64;
            if payload == 0 {
                payload = 1 << 51;
            }
            sign64 | (0x7FFu64 << 52) | payload
        }
        Value::Inf(_) => sign64 | (0x7FFu64 << 52),
        Value::Zero(_) => sign64,
        Value::Finite { mant, exp, .. } => {
            let (n, d) = if exp >= 0 {
                (mant << (exp as u64), BigUint::one())
            } else {
                (mant, BigUint::one() << ((-exp) as u64))
            };
            sign64 | round_rational(&n, &d, BINARY64) as u64
        }
    }
}

/// Exact value of a binary128 pattern as a reduced rational `(num, den)`
/// with `den` a power of two. Panics on Inf/NaN.
pub fn to_rational(a: u128) -> (BigInt, BigUint) {
    match decode(a) {
        Value::Zero(_) => (BigInt::zero(), BigUint::one()),
        Value::Finite { neg, mant, exp } => {
            let s = if neg { Sign::Minus } else { Sign::Plus };
            if exp >= 0 {
                (BigInt::from_biguint(s, mant << (exp as u64)), BigUint::one())
            } else {
                let num = BigInt::from_biguint(s, mant);
                let den = BigUint::one() << ((-exp) as u64);
                let g = num.magnitude().gcd(&den);
                (num / BigInt::from(g.clone()), den / g)
            }
        }
        other => panic!("not a finite value: {other:?}"),
    }
}

/// Correctly rounded binary128 of the signed rational `num / den`.
pub fn from_rational(num: &BigInt, den: &BigUint) -> u128 {
    if num.is_zero() {
        return 0;
    }
    let bits = round_rational(num.magnitude(), den, BINARY128);
    if num.is_negative() {
        bits | SIGN
    } else {
        bits
    }
}

/// `1.0 * 2^e` for normal exponents.
pub fn pow2(e: i32) -> u128 {
    assert!((-16382..=16383).contains(&e));
    ((e + 16383) as u128) << 112
}


pub mod cases;
