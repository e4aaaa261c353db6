use proptest::prelude::*;
use quadgemm::quadfp::{format_hexfloat, parse_hexfloat, qadd, qmul, qsub};
use quadgemm::{QuadFloat, SplitMix64};

fn finite() -> impl Strategy<Value = QuadFloat> {
    any::<u128>().prop_map(QuadFloat::from_bits).prop_filter("finite", |x| x.is_finite())
}

fn any_bits() -> impl Strategy<Value = QuadFloat> {
    any::<u128>().prop_map(QuadFloat::from_bits)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn add_and_mul_commute(a in any_bits(), b in any_bits()) {
        let (x, y) = (qadd(a, b), qadd(b, a));
        // NaN results may carry different payloads, everything else is exact.
        prop_assert!(x.bits_eq(y) || (x.is_nan() && y.is_nan()));
        let (x, y) = (qmul(a, b), qmul(b, a));
        prop_assert!(x.bits_eq(y) || (x.is_nan() && y.is_nan()));
    }

    #[test]
    fn rounding_is_monotone(a in finite(), b in finite(), c in finite()) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (s, t) = (qadd(lo, c), qadd(hi, c));
        if !s.is_nan() && !t.is_nan() {
            prop_assert!(s <= t);
        }
        if c >= QuadFloat::ZERO {
            let (s, t) = (qmul(lo, c), qmul(hi, c));
            if !s.is_nan() && !t.is_nan() {
                prop_assert!(s <= t);
            }
        }
    }

    #[test]
    fn self_subtraction_is_positive_zero(a in finite()) {
        prop_assert!(qsub(a, a).bits_eq(QuadFloat::ZERO));
    }

    #[test]
    fn negation_is_an_involution(a in any_bits()) {
        prop_assert!((-(-a)).bits_eq(a));
        prop_assert_eq!((-a).to_bits() ^ a.to_bits(), 1u128 << 127);
    }

    #[test]
    fn binary64_round_trip(x in any::<f64>()) {
        let back = QuadFloat::from_f64(x).to_f64();
        prop_assert!(back.to_bits() == x.to_bits() || (x.is_nan() && back.is_nan()));
    }
}

#[test]
fn hex_round_trip_over_ten_thousand_patterns() {
    let mut rng = SplitMix64::new(0x4E58);
    for i in 0..10_000u32 {
        let hi = rng.next_u64() as u128;
        let lo = rng.next_u64() as u128;
        let mut bits = hi << 64 | lo;
        // a quarter of the patterns are forced subnormal, Inf or NaN
        match i % 8 {
            0 => bits &= !(0x7FFFu128 << 112),
            1 => bits |= 0x7FFFu128 << 112,
            _ => {}
        }
        let x = QuadFloat::from_bits(bits);
        let text = format_hexfloat(x);
        let y = parse_hexfloat(&text).unwrap();
        assert_eq!(y.to_bits(), bits, "{text}");
    }
}
