use super::round::{round_pack, BINARY128, BINARY64};
use super::{QuadFloat, EXP_MASK, FRAC_MASK, HIDDEN, QUIET};

const F64_FRAC: u64 = (1 << 52) - 1;

/// Exact widening from binary64.
pub fn from_f64(x: f64) -> QuadFloat {
    let bits = x.to_bits();
    let sign = ((bits >> 63) as u128) << 127;
    let field = ((bits >> 52) & 0x7FF) as i32;
    let frac = bits & F64_FRAC;
    if field == 0x7FF {
        return QuadFloat(sign | EXP_MASK | ((frac as u128) << 60));
    }
    if field == 0 && frac == 0 {
        return QuadFloat(sign);
    }
    let (sig, exp) = if field == 0 { (frac as u128, -1074) } else { ((frac | 1 << 52) as u128, field - 1075) };
    QuadFloat(sign | round_pack(exp, sig, &BINARY128))
}

/// Round-to-nearest-even narrowing to binary64.
pub fn to_f64(q: QuadFloat) -> f64 {
    let bits = q.0;
    let sign = ((bits >> 127) as u64) << 63;
    let field = ((bits >> 112) & 0x7FFF) as i32;
    let frac = bits & FRAC_MASK;
    if field == 0x7FFF {
        if frac == 0 {
            return f64::from_bits(sign | 0x7FF << 52);
        }
        let mut payload = (frac >> 60) as u64;
        if payload == 0 {
            payload = (QUIET >> 60) as u64;
        }
        return f64::from_bits(sign | 0x7FF << 52 | payload);
    }
    if field == 0 && frac == 0 {
        return f64::from_bits(sign);
    }
    let (sig, exp) =
        if field == 0 { (frac, BINARY128.emin_lsb) } else { (frac | HIDDEN, field + BINARY128.emin_lsb - 1) };
    f64::from_bits(sign | round_pack(exp, sig, &BINARY64) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadfp::SIGN_MASK;

    #[test]
    fn widening_is_exact() {
        assert_eq!(from_f64(1.5).to_bits(), 0x3FFF_8000 << 96);
        assert_eq!(from_f64(-0.0).to_bits(), SIGN_MASK);
        assert_eq!(from_f64(f64::INFINITY).to_bits(), EXP_MASK);
        let tiny = f64::from_bits(1);
        assert_eq!(to_f64(from_f64(tiny)).to_bits(), 1);
    }

    #[test]
    fn round_trip_specials() {
        for x in [0.0, -0.0, 1.0, -2.5, f64::MAX, f64::MIN_POSITIVE, 1e-310, f64::INFINITY, f64::NEG_INFINITY] {
            assert_eq!(to_f64(from_f64(x)).to_bits(), x.to_bits());
        }
        let snan = f64::from_bits(0x7FF0_0000_0000_0001);
        assert_eq!(to_f64(from_f64(snan)).to_bits(), snan.to_bits());
        assert!(to_f64(from_f64(f64::NAN)).is_nan());
    }

    #[test]
    fn narrowing_rounds_to_nearest() {
        // 1 + 2^-60 is far below half an ulp of binary64 at 1.0
        let q = QuadFloat::from_bits(QuadFloat::ONE.to_bits() + (1 << 52));
        assert_eq!(to_f64(q), 1.0);
        // 1 + 2^-53 + 2^-60 lies just above the binary64 midpoint
        let q = QuadFloat::from_bits(QuadFloat::ONE.to_bits() + (1 << 59) + (1 << 52));
        assert_eq!(to_f64(q), 1.0 + f64::EPSILON);
        // overflow and underflow
        let big = QuadFloat::from_bits(0x7FFE << 112);
        assert_eq!(to_f64(big), f64::INFINITY);
        assert_eq!(to_f64(QuadFloat::from_bits(1)), 0.0);
    }
}
