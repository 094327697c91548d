//! Helpers for working-precision reals.
//!
//! All reals are MPFR floats at a caller-chosen precision `P`. Decisions that
//! compare a computed quantity against a boundary use the tolerance
//! `2^(-P/2)`; anything closer than that is reported as ambiguous rather
//! than silently rounded one way.

use rug::Float;

use crate::error::{Error, Result};

pub const DEFAULT_PRECISION: u32 = 256;
pub const MIN_PRECISION: u32 = 64;

/// Environment variable overriding the default working precision.
pub const PRECISION_ENV: &str = "BRS_PRECISION_BITS";

pub fn check_precision(bits: u32) -> Result<()> {
    if bits < MIN_PRECISION {
        return Err(Error::InvalidInput(format!(
            "precision must be at least {MIN_PRECISION} bits, got {bits}"
        )));
    }
    Ok(())
}

/// Smallest precision that keeps orbit points `n * alpha` for `|n| <= n_max`
/// resolvable against the `2^(-P/2)` boundary tolerance.
pub fn required_precision(n_max: u64) -> u32 {
    let log2 = 64 - n_max.max(1).leading_zeros();
    2 * log2 + 64
}

pub fn check_budget(bits: u32, n_max: u64) -> Result<()> {
    let required = required_precision(n_max);
    if bits < required {
        return Err(Error::PrecisionBudget { bits, n_max, required });
    }
    Ok(())
}

pub fn parse_real(text: &str, prec: u32) -> Result<Float> {
    let parsed = Float::parse(text.trim()).map_err(|_| Error::Parse(text.to_string()))?;
    Ok(Float::with_val(prec, parsed))
}

/// `2^(-P/2)`.
pub fn tolerance(prec: u32) -> Float {
    Float::with_val(prec, Float::i_exp(1, -((prec / 2) as i32)))
}

pub fn zero(prec: u32) -> Float {
    Float::new(prec)
}

pub fn frac(x: &Float) -> Float {
    let fl = Float::with_val(x.prec(), x.floor_ref());
    Float::with_val(x.prec(), x - &fl)
}

pub fn floor_i64(x: &Float) -> Result<i64> {
    let fl = Float::with_val(x.prec(), x.floor_ref());
    fl.to_integer().and_then(|i| i.to_i64()).ok_or(Error::Overflow)
}

pub fn round_i64(x: &Float) -> Result<i64> {
    let r = Float::with_val(x.prec(), x.round_ref());
    r.to_integer().and_then(|i| i.to_i64()).ok_or(Error::Overflow)
}

/// Distance from `x` to the nearest integer.
pub fn dist_to_integer(x: &Float) -> Float {
    let r = Float::with_val(x.prec(), x.round_ref());
    Float::with_val(x.prec(), x - &r).abs()
}

/// The fractional part of `x` as a 128-bit binary fixed-point torus coordinate.
///
/// Used only as a fast prefilter; every decision is confirmed at full precision.
pub fn to_fixed(x: &Float) -> u128 {
    let f = frac(x);
    let scaled = Float::with_val(f.prec().max(192), &f << 128u32);
    let floor = Float::with_val(scaled.prec(), scaled.floor_ref());
    floor.to_integer().map(|i| i.to_u128_wrapping()).unwrap_or(0)
}

pub fn fixed_to_f64(x: u128) -> f64 {
    const SCALE: f64 = 1.0 / 18_446_744_073_709_551_616.0;
    (x >> 64) as u64 as f64 * SCALE
}

/// Shortest decimal string that parses back to exactly `x` at its own
/// precision, written positionally (no exponent).
pub fn format_real(x: &Float) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let prec = x.prec();
    let round_trips = |digits: usize| {
        let (neg, mantissa, exp) = x.to_sign_string_exp(10, Some(digits));
        let text = format!("{}0.{}e{}", if neg { "-" } else { "" }, mantissa, exp.unwrap_or(0));
        let back = Float::with_val(prec, Float::parse(&text).expect("mpfr output parses"));
        back == *x
    };
    let max_digits = (prec as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2;
    let (mut lo, mut hi) = (1usize, max_digits);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if round_trips(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let mut digits = lo;
    while !round_trips(digits) && digits < max_digits + 8 {
        digits += 1;
    }
    let (neg, mantissa, exp) = x.to_sign_string_exp(10, Some(digits));
    positional(neg, mantissa.trim_end_matches('0'), exp.unwrap_or(0))
}

fn positional(neg: bool, digits: &str, exp: i32) -> String {
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    let len = digits.len() as i32;
    if exp <= 0 {
        out.push_str("0.");
        out.extend(std::iter::repeat('0').take((-exp) as usize));
        out.push_str(digits);
    } else if exp < len {
        out.push_str(&digits[..exp as usize]);
        out.push('.');
        out.push_str(&digits[exp as usize..]);
    } else {
        out.push_str(digits);
        out.extend(std::iter::repeat('0').take((exp - len) as usize));
    }
    out
}
