//! Lossless hexadecimal text form.
//!
//! Grammar accepted by [`parse_hexfloat`]:
//!
//! ```text
//! literal := sign? ( "0x" hexdigits ( "." hexdigits? )? "p" sign? decdigits
//!                  | "0x" "." hexdigits "p" sign? decdigits
//!                  | "inf" | "infinity"
//!                  | "nan" ( "(0x" hexdigits ")" )? )
//! ```
//!
//! Letters are case-insensitive. [`format_hexfloat`] emits normals as
//! `0x1.<frac>p<exp>`, subnormals as `0x0.<frac>p-16382`, and NaNs with their
//! full fraction field as `nan(0x...)`, so formatting then parsing
//! reproduces every bit pattern.

use alloc::string::String;
use core::fmt::{self, Write};

use super::round::{round_pack, BINARY128};
use super::{QuadFloat, EXP_MASK, FRAC_MASK, SIGN_MASK};

/// Why a hex-float literal was rejected.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParseHexErrorKind {
    Empty,
    MissingPrefix,
    NoDigits,
    MissingExponent,
    BadExponent,
    BadNanPayload,
    TrailingInput,
}

/// A malformed literal, with the byte offset where parsing stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParseHexError {
    pub position: usize,
    pub kind: ParseHexErrorKind,
}

impl fmt::Display for ParseHexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            ParseHexErrorKind::Empty => "empty literal",
            ParseHexErrorKind::MissingPrefix => "expected \"0x\"",
            ParseHexErrorKind::NoDigits => "expected hexadecimal digits",
            ParseHexErrorKind::MissingExponent => "expected binary exponent \"p\"",
            ParseHexErrorKind::BadExponent => "malformed exponent",
            ParseHexErrorKind::BadNanPayload => "malformed NaN payload",
            ParseHexErrorKind::TrailingInput => "unexpected trailing characters",
        };
        write!(f, "{what} at position {}", self.position)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ParseHexError {}

/// Formats `q` into `out` in the lossless hex form.
pub fn write_hexfloat<W: Write>(out: &mut W, q: QuadFloat) -> fmt::Result {
    let bits = q.to_bits();
    let neg = bits & SIGN_MASK != 0;
    let field = ((bits & EXP_MASK) >> 112) as i32;
    let frac = bits & FRAC_MASK;
    if neg {
        out.write_char('-')?;
    }
    if field == 0x7FFF {
        if frac == 0 {
            return out.write_str("inf");
        }
        return write!(out, "nan(0x{frac:x})");
    }
    if field == 0 && frac == 0 {
        return out.write_str("0x0p+0");
    }
    let (lead, exp) = if field == 0 { (0, -16382) } else { (1, field - 16383) };
    write!(out, "0x{lead}")?;
    if frac != 0 {
        // 112 fraction bits are exactly 28 hex digits
        let digits = 28 - frac.trailing_zeros() as usize / 4;
        let shown = frac >> ((28 - digits) * 4);
        write!(out, ".{shown:0digits$x}")?;
    }
    write!(out, "p{exp:+}")
}

/// Formats `q` in the lossless hex form.
pub fn format_hexfloat(q: QuadFloat) -> String {
    let mut s = String::with_capacity(40);
    write_hexfloat(&mut s, q).expect("writing to a String cannot fail");
    s
}

/// Parses a hex-float literal, rounding to nearest-even when the literal
/// carries more precision than binary128.
pub fn parse_hexfloat(text: &str) -> Result<QuadFloat, ParseHexError> {
    let s = text.as_bytes();
    let err = |position, kind| Err(ParseHexError { position, kind });
    if s.is_empty() {
        return err(0, ParseHexErrorKind::Empty);
    }
    let mut pos = 0;
    let mut neg = false;
    if s[0] == b'+' || s[0] == b'-' {
        neg = s[0] == b'-';
        pos = 1;
    }
    let sign = if neg { SIGN_MASK } else { 0 };
    let rest = &text[pos..];
    if starts_with_ci(rest, "inf") {
        let used = if starts_with_ci(rest, "infinity") { 8 } else { 3 };
        if rest.len() != used {
            return err(pos + used, ParseHexErrorKind::TrailingInput);
        }
        return Ok(QuadFloat::from_bits(sign | EXP_MASK));
    }
    if starts_with_ci(rest, "nan") {
        pos += 3;
        if pos == s.len() {
            return Ok(QuadFloat::from_bits(sign | QuadFloat::NAN.to_bits()));
        }
        if !text[pos..].starts_with("(0x") && !text[pos..].starts_with("(0X") {
            return err(pos, ParseHexErrorKind::BadNanPayload);
        }
        pos += 3;
        let start = pos;
        let mut payload: u128 = 0;
        while pos < s.len() && s[pos].is_ascii_hexdigit() {
            if payload >> 108 != 0 {
                return err(pos, ParseHexErrorKind::BadNanPayload);
            }
            payload = payload << 4 | hex_value(s[pos]) as u128;
            pos += 1;
        }
        if pos == start || payload == 0 || payload > FRAC_MASK {
            return err(start, ParseHexErrorKind::BadNanPayload);
        }
        if pos >= s.len() || s[pos] != b')' {
            return err(pos, ParseHexErrorKind::BadNanPayload);
        }
        pos += 1;
        if pos != s.len() {
            return err(pos, ParseHexErrorKind::TrailingInput);
        }
        return Ok(QuadFloat::from_bits(sign | EXP_MASK | payload));
    }
    if !(rest.starts_with("0x") || rest.starts_with("0X")) {
        return err(pos, ParseHexErrorKind::MissingPrefix);
    }
    pos += 2;

    // Up to 30 significant hex digits (120 bits) are kept exactly; anything
    // further only contributes a sticky bit.
    const KEEP: u32 = 30;
    let mut sig: u128 = 0;
    let mut kept = 0u32;
    let mut sticky = false;
    let mut scale: i64 = 0;
    let mut any_digit = false;
    let mut in_frac = false;
    while pos < s.len() {
        let c = s[pos];
        if c == b'.' && !in_frac {
            in_frac = true;
        } else if c.is_ascii_hexdigit() {
            any_digit = true;
            let d = hex_value(c);
            if sig == 0 && d == 0 {
                if in_frac {
                    scale -= 4;
                }
            } else if kept < KEEP {
                sig = sig << 4 | d as u128;
                kept += 1;
                if in_frac {
                    scale -= 4;
                }
            } else {
                sticky |= d != 0;
                if !in_frac {
                    scale += 4;
                }
            }
        } else {
            break;
        }
        pos += 1;
    }
    if !any_digit {
        return err(pos, ParseHexErrorKind::NoDigits);
    }
    if pos >= s.len() || (s[pos] != b'p' && s[pos] != b'P') {
        return err(pos, ParseHexErrorKind::MissingExponent);
    }
    pos += 1;
    let mut exp_neg = false;
    if pos < s.len() && (s[pos] == b'+' || s[pos] == b'-') {
        exp_neg = s[pos] == b'-';
        pos += 1;
    }
    let exp_start = pos;
    let mut exp: i64 = 0;
    while pos < s.len() && s[pos].is_ascii_digit() {
        // saturate far outside the representable range
        exp = (exp * 10 + (s[pos] - b'0') as i64).min(1 << 40);
        pos += 1;
    }
    if pos == exp_start {
        return err(pos, ParseHexErrorKind::BadExponent);
    }
    if pos != s.len() {
        return err(pos, ParseHexErrorKind::TrailingInput);
    }
    if sig == 0 {
        return Ok(QuadFloat::from_bits(sign));
    }
    let exp = if exp_neg { -exp } else { exp } + scale;
    let exp = exp.clamp(-100_000, 100_000) as i32;
    let sig = sig | sticky as u128;
    Ok(QuadFloat::from_bits(sign | round_pack(exp, sig, &BINARY128)))
}

fn starts_with_ci(s: &str, prefix: &str) -> bool {
    s.len() >= prefix.len() && s.as_bytes()[..prefix.len()].eq_ignore_ascii_case(prefix.as_bytes())
}

fn hex_value(c: u8) -> u8 {
    match c {
        b'0'..=b'9' => c - b'0',
        b'a'..=b'f' => c - b'a' + 10,
        _ => c - b'A' + 10,
    }
}
