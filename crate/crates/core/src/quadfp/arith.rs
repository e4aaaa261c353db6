//! Correctly rounded binary128 add, multiply, divide and multiply-add.

use super::round::{compress, round_pack, BINARY128};
use super::wide::U256;
use super::{MaddMode, QuadFloat, EXP_MASK, FRAC_MASK, HIDDEN, QUIET, SIGN_MASK};

const EMIN_LSB: i32 = BINARY128.emin_lsb;
const FIELD_INF: u32 = 0x7FFF;

#[inline]
fn field(bits: u128) -> u32 {
    ((bits >> 112) & 0x7FFF) as u32
}

/// Significand and lsb exponent of a finite nonzero pattern.
#[inline]
fn unpack(bits: u128) -> (u128, i32) {
    let f = field(bits);
    let frac = bits & FRAC_MASK;
    if f == 0 {
        (frac, EMIN_LSB)
    } else {
        (frac | HIDDEN, f as i32 + EMIN_LSB - 1)
    }
}

#[inline]
fn is_nan(bits: u128) -> bool {
    bits & !SIGN_MASK > EXP_MASK
}

#[inline]
fn pack(neg: bool, exp: i32, sig: u128) -> QuadFloat {
    let mag = round_pack(exp, sig, &BINARY128);
    QuadFloat(mag | if neg { SIGN_MASK } else { 0 })
}

#[inline]
fn quieted(bits: u128) -> QuadFloat {
    QuadFloat(bits | QUIET)
}

/// Correctly rounded sum.
pub fn qadd(a: QuadFloat, b: QuadFloat) -> QuadFloat {
    let (x, y) = (a.0, b.0);
    let (fx, fy) = (field(x), field(y));
    if fx == FIELD_INF || fy == FIELD_INF {
        if is_nan(x) {
            return quieted(x);
        }
        if is_nan(y) {
            return quieted(y);
        }
        if fx == FIELD_INF && fy == FIELD_INF {
            return if (x ^ y) & SIGN_MASK == 0 { a } else { QuadFloat::NAN };
        }
        return if fx == FIELD_INF { a } else { b };
    }
    let (zx, zy) = (x & !SIGN_MASK == 0, y & !SIGN_MASK == 0);
    if zx || zy {
        if zx && zy {
            return QuadFloat(x & y & SIGN_MASK);
        }
        return if zx { b } else { a };
    }
    add_finite(x, y)
}

#[inline]
fn add_finite(x: u128, y: u128) -> QuadFloat {
    let (nx, ny) = (x & SIGN_MASK != 0, y & SIGN_MASK != 0);
    let (mut mx, mut ex) = unpack(x);
    let (mut my, mut ey) = unpack(y);
    let (mut nx, mut ny) = (nx, ny);
    if ey > ex {
        core::mem::swap(&mut mx, &mut my);
        core::mem::swap(&mut ex, &mut ey);
        core::mem::swap(&mut nx, &mut ny);
    }
    let d = (ex - ey) as u32;
    // Three guard bits; anything shifted past them is jammed into the lsb.
    let bx = mx << 3;
    let by = if d == 0 {
        my << 3
    } else if d < 116 {
        let t = my << 3;
        (t >> d) | ((t & ((1u128 << d) - 1)) != 0) as u128
    } else {
        1
    };
    let exp = ex - 3;
    if nx == ny {
        return pack(nx, exp, bx + by);
    }
    if bx > by {
        pack(nx, exp, bx - by)
    } else if by > bx {
        pack(ny, exp, by - bx)
    } else {
        QuadFloat::ZERO
    }
}

/// Correctly rounded difference `a - b`.
#[inline]
pub fn qsub(a: QuadFloat, b: QuadFloat) -> QuadFloat {
    // NaN payload order must still favour `a`, and negation only flips the sign.
    if is_nan(b.0) && !is_nan(a.0) {
        return quieted(b.0);
    }
    qadd(a, qneg(b))
}

/// Correctly rounded product.
pub fn qmul(a: QuadFloat, b: QuadFloat) -> QuadFloat {
    let (x, y) = (a.0, b.0);
    let sign = (x ^ y) & SIGN_MASK;
    let (fx, fy) = (field(x), field(y));
    let (zx, zy) = (x & !SIGN_MASK == 0, y & !SIGN_MASK == 0);
    if fx == FIELD_INF || fy == FIELD_INF {
        if is_nan(x) {
            return quieted(x);
        }
        if is_nan(y) {
            return quieted(y);
        }
        if zx || zy {
            return QuadFloat::NAN;
        }
        return QuadFloat(EXP_MASK | sign);
    }
    if zx || zy {
        return QuadFloat(sign);
    }
    let (mx, ex) = unpack(x);
    let (my, ey) = unpack(y);
    let (exp, sig) = compress(ex + ey, U256::mul(mx, my), false);
    pack(sign != 0, exp, sig)
}

/// Correctly rounded quotient.
pub fn qdiv(a: QuadFloat, b: QuadFloat) -> QuadFloat {
    let (x, y) = (a.0, b.0);
    let sign = (x ^ y) & SIGN_MASK;
    if is_nan(x) {
        return quieted(x);
    }
    if is_nan(y) {
        return quieted(y);
    }
    let (ix, iy) = (field(x) == FIELD_INF, field(y) == FIELD_INF);
    let (zx, zy) = (x & !SIGN_MASK == 0, y & !SIGN_MASK == 0);
    if (ix && iy) || (zx && zy) {
        return QuadFloat::NAN;
    }
    if ix || zy {
        return QuadFloat(EXP_MASK | sign);
    }
    if iy || zx {
        return QuadFloat(sign);
    }
    let (mut mx, mut ex) = unpack(x);
    let (mut my, mut ey) = unpack(y);
    // Normalise both significands so the hidden bit sits at bit 112.
    let sx = mx.leading_zeros() - 15;
    mx <<= sx;
    ex -= sx as i32;
    let sy = my.leading_zeros() - 15;
    my <<= sy;
    ey -= sy as i32;
    // mx/my lies in (1/2, 2); produce 116 quotient bits after the point.
    let mut rem = mx;
    let mut quo: u128 = 0;
    if rem >= my {
        rem -= my;
        quo = 1;
    }
    for _ in 0..116 {
        rem <<= 1;
        quo <<= 1;
        if rem >= my {
            rem -= my;
            quo |= 1;
        }
    }
    let sig = quo | (rem != 0) as u128;
    pack(sign != 0, ex - ey - 116, sig)
}

/// Multiply-add `a * b + c` in the requested rounding mode.
#[inline]
pub fn qmadd(a: QuadFloat, b: QuadFloat, c: QuadFloat, mode: MaddMode) -> QuadFloat {
    match mode {
        MaddMode::TwoRoundings => qadd(qmul(a, b), c),
        MaddMode::Fused => qfma(a, b, c),
    }
}

/// Single-rounding `a * b + c`.
pub fn qfma(a: QuadFloat, b: QuadFloat, c: QuadFloat) -> QuadFloat {
    let (x, y, z) = (a.0, b.0, c.0);
    let (fx, fy, fz) = (field(x), field(y), field(z));
    let psign = (x ^ y) & SIGN_MASK;
    let (zx, zy, zz) = (x & !SIGN_MASK == 0, y & !SIGN_MASK == 0, z & !SIGN_MASK == 0);
    if fx == FIELD_INF || fy == FIELD_INF || fz == FIELD_INF {
        for v in [x, y, z] {
            if is_nan(v) {
                return quieted(v);
            }
        }
        if fx == FIELD_INF || fy == FIELD_INF {
            if zx || zy {
                return QuadFloat::NAN;
            }
            if fz == FIELD_INF && (z & SIGN_MASK) != psign {
                return QuadFloat::NAN;
            }
            return QuadFloat(EXP_MASK | psign);
        }
        return c;
    }
    if zx || zy {
        if zz {
            return QuadFloat(psign & z);
        }
        return c;
    }
    let (mx, ex) = unpack(x);
    let (my, ey) = unpack(y);
    let prod = U256::mul(mx, my);
    let pexp = ex + ey;
    if zz {
        let (exp, sig) = compress(pexp, prod, false);
        return pack(psign != 0, exp, sig);
    }
    let (mz, ez) = unpack(z);
    let (neg, exp, sum, sticky) = add_wide(psign != 0, pexp, prod, z & SIGN_MASK != 0, ez, U256::from_u128(mz));
    if sum.is_zero() {
        debug_assert!(!sticky);
        return QuadFloat::ZERO;
    }
    let (exp, sig) = compress(exp, sum, sticky);
    pack(neg, exp, sig)
}

/// Adds two exact values `m * 2^e` whose significands have at most 226
/// bits. The larger-topped operand is placed with its msb at bit 254; bits
/// of the other operand that fall below the frame become a sticky flag. The
/// result is exact unless `sticky` is set, in which case the true magnitude
/// lies strictly between `sum` and `sum + 1`.
fn add_wide(na: bool, ea: i32, ma: U256, nb: bool, eb: i32, mb: U256) -> (bool, i32, U256, bool) {
    let (la, lb) = (ma.bits() as i32, mb.bits() as i32);
    let ((nx, ex, mx, lx), (ny, ey, my)) =
        if eb + lb > ea + la { ((nb, eb, mb, lb), (na, ea, ma)) } else { ((na, ea, ma, la), (nb, eb, mb)) };
    let up = (255 - lx) as u32;
    let xs = mx.shl(up);
    let e = ex - up as i32;
    let d = e - ey;
    let (ys, sticky) = if d <= 0 { (my.shl((-d) as u32), false) } else { my.shr_sticky(d as u32) };
    if nx == ny {
        return (nx, e, xs.wrapping_add(ys), sticky);
    }
    if sticky {
        // ys is far below xs here, so the borrow cannot reach zero.
        let diff = xs.wrapping_sub(ys).wrapping_sub(U256::from_u128(1));
        return (nx, e, diff, true);
    }
    match xs.cmp(&ys) {
        core::cmp::Ordering::Greater => (nx, e, xs.wrapping_sub(ys), false),
        core::cmp::Ordering::Less => (ny, e, ys.wrapping_sub(xs), false),
        core::cmp::Ordering::Equal => (false, e, U256::ZERO, false),
    }
}

/// Sign-bit negation.
#[inline]
pub fn qneg(a: QuadFloat) -> QuadFloat {
    QuadFloat(a.0 ^ SIGN_MASK)
}

/// Sign-bit clear.
#[inline]
pub fn qabs(a: QuadFloat) -> QuadFloat {
    QuadFloat(a.0 & !SIGN_MASK)
}

/// IEEE comparison: `None` when either operand is NaN, `-0 == +0`.
pub fn qcmp(a: QuadFloat, b: QuadFloat) -> Option<core::cmp::Ordering> {
    if is_nan(a.0) || is_nan(b.0) {
        return None;
    }
    Some(order_key(a.0).cmp(&order_key(b.0)))
}

#[inline]
fn order_key(bits: u128) -> i128 {
    let mag = (bits & !SIGN_MASK) as i128;
    if bits & SIGN_MASK != 0 {
        -mag
    } else {
        mag
    }
}
