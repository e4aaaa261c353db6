//! Operand generators for conformance runs: a directed list of boundary
//! patterns and a structured random source that favours nearby exponents.

/// SplitMix64, used only to drive case generation.
#[derive(Clone, Debug)]
pub struct CaseRng(u64);

impl CaseRng {
    pub fn new(seed: u64) -> Self {
        CaseRng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn next_u128(&mut self) -> u128 {
        (self.next_u64() as u128) << 64 | self.next_u64() as u128
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }
}

const ONE: u128 = 0x3FFF << 112;
const FRAC: u128 = (1 << 112) - 1;

/// Boundary patterns: signed zeros, subnormal extremes, normal extremes,
/// infinities, quiet and signalling NaNs, values around 1 and 2, and
/// half-ulp offsets that produce ties.
pub fn directed_values() -> Vec<u128> {
    let mut v = vec![
        0,
        1, // min subnormal
        2,
        3,
        FRAC,     // max subnormal
        1 << 111, // mid subnormal
        1 << 112, // min normal
        (1 << 112) | 1,
        (0x7FFE << 112) | FRAC, // max finite
        0x7FFE << 112,
        0x7FFF << 112,                // inf
        (0x7FFF << 112) | (1 << 111), // canonical qNaN
        (0x7FFF << 112) | 1,          // sNaN
        (0x7FFF << 112) | (1 << 111) | 0xABCD,
        ONE,
        ONE + 1,
        ONE - 1, // largest below 1
        ONE | FRAC,
        0x4000 << 112,                // 2
        (0x4000 << 112) | (1 << 111), // 3
        (0x3FFF - 113) << 112,        // 2^-113 (half ulp of 1)
        ((0x3FFF - 113) << 112) | 1,
        (0x3FFF - 112) << 112, // 2^-112
        (0x3FFF - 114) << 112,
        (0x3FFF + 113) << 112, // 2^113
        ((0x3FFF + 112) << 112) | FRAC,
        0x2000 << 112,   // tiny normal
        0x5FFF << 112,   // huge normal
        (0x0071) << 112, // products of these underflow to subnormals
        (0x0001) << 112 | (1 << 111),
    ];
    let neg: Vec<u128> = v.iter().map(|x| x | (1 << 127)).collect();
    v.extend(neg);
    v
}

/// A random operand: one quarter uniform bit patterns, the rest finite
/// values whose exponent lies within `window` of `base_exp`, occasionally
/// with sparse fraction bits so ties and exact cancellations occur.
pub fn structured(rng: &mut CaseRng, base_exp: u32, window: u32) -> u128 {
    let r = rng.below(16);
    if r < 4 {
        return rng.next_u128();
    }
    let sign = (rng.next_u64() & 1) as u128;
    let lo = base_exp.saturating_sub(window);
    let hi = (base_exp + window).min(0x7FFE);
    let e = lo as u64 + rng.below((hi - lo + 1) as u64);
    let frac = match r {
        4..=5 => {
            // few set bits at the top and bottom
            let k = rng.below(4) as u32;
            (rng.next_u128() >> (120 - k)) << (112 - k) | (rng.next_u64() & 3) as u128
        }
        6 => 0,
        _ => rng.next_u128() & FRAC,
    };
    sign << 127 | (e as u128) << 112 | frac & FRAC
}

/// A random exponent field, biased towards interesting regions.
pub fn base_exponent(rng: &mut CaseRng) -> u32 {
    match rng.below(8) {
        0 => rng.below(240) as u32,             // subnormal / tiny
        1 => 0x7FFE - rng.below(240) as u32,    // near overflow
        2 => 0x3FFF / 2 + rng.below(40) as u32, // square root of tiny
        3 => 0x3FFF + 0x3FFF / 2 - rng.below(40) as u32,
        _ => 0x3FFF - 60 + rng.below(120) as u32, // around 1
    }
}

/// [`structured`] around a freshly drawn [`base_exponent`].
pub fn any_operand(rng: &mut CaseRng, window: u32) -> u128 {
    let base = base_exponent(rng);
    structured(rng, base, window)
}

/// Two operands with nearby exponents (addition stress), or an unrelated
/// exponent one time in four.
pub fn near_pair(rng: &mut CaseRng) -> (u128, u128) {
    let base = base_exponent(rng);
    let a = structured(rng, base, 8);
    let other = if rng.below(4) == 0 { base_exponent(rng) } else { base };
    let b = structured(rng, other, 130);
    (a, b)
}

/// Multiply-add operands with the addend usually near the product's
/// magnitude, so cancellation is common.
pub fn fma_triple(rng: &mut CaseRng) -> (u128, u128, u128) {
    let a = any_operand(rng, 20);
    let b = any_operand(rng, 20);
    let ea = ((a >> 112) & 0x7FFF) as i64;
    let eb = ((b >> 112) & 0x7FFF) as i64;
    let ep = (ea + eb - 0x3FFF).clamp(1, 0x7FFE) as u32;
    let c = match rng.below(4) {
        0 => any_operand(rng, 20),
        _ => structured(rng, ep, 120),
    };
    (a, b, c)
}
