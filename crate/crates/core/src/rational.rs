//! Exact rational numbers used for every discrete measure.

use alloc::string::String;
use core::fmt::Write;

use num_traits::{Signed, ToPrimitive, Zero};

pub type Rational = num_rational::Ratio<i128>;

/// Longest digit string accepted as a number; anything longer is text.
const MAX_DIGITS: usize = 30;

/// Parses an exact decimal such as `3`, `-2.50` or `+0.125`.
///
/// Returns `None` for anything else (including exponents and bare dots), so
/// callers can fall back to treating the input as text.
pub fn parse_decimal(text: &str) -> Option<Rational> {
    let (negative, body) = match text.as_bytes().first()? {
        b'-' => (true, &text[1..]),
        b'+' => (false, &text[1..]),
        _ => (false, text),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (body, None),
    };
    if int_part.is_empty() || !int_part.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let frac = frac_part.unwrap_or("");
    if frac_part.is_some() && frac.is_empty() {
        return None;
    }
    if !frac.bytes().all(|b| b.is_ascii_digit()) || int_part.len() + frac.len() > MAX_DIGITS {
        return None;
    }
    let mut numer: i128 = 0;
    for b in int_part.bytes().chain(frac.bytes()) {
        numer = numer * 10 + i128::from(b - b'0');
    }
    let denom = 10i128.pow(frac.len() as u32);
    let value = Rational::new(numer, denom);
    Some(if negative { -value } else { value })
}

pub fn to_f64(value: &Rational) -> f64 {
    value.numer().to_f64().unwrap_or(f64::NAN) / value.denom().to_f64().unwrap_or(f64::NAN)
}

/// Formats a rational as a terminating decimal when possible, `p/q` otherwise.
pub fn format_rational(value: &Rational) -> String {
    let mut out = String::new();
    if value.denom() == &1 {
        let _ = write!(out, "{}", value.numer());
        return out;
    }
    let mut d = *value.denom();
    let mut scale = 0u32;
    while d % 10 == 0 {
        d /= 10;
        scale += 1;
    }
    let (mut twos, mut fives) = (0u32, 0u32);
    while d % 2 == 0 {
        d /= 2;
        twos += 1;
    }
    while d % 5 == 0 {
        d /= 5;
        fives += 1;
    }
    if d != 1 {
        let _ = write!(out, "{}/{}", value.numer(), value.denom());
        return out;
    }
    let places = scale + twos.max(fives);
    let scaled = value * Rational::from_integer(10i128.pow(places));
    let digits = scaled.to_integer().abs();
    let divisor = 10i128.pow(places);
    if value.is_negative() && !value.is_zero() {
        out.push('-');
    }
    let _ = write!(
        out,
        "{}.{:0width$}",
        digits / divisor,
        digits % divisor,
        width = places as usize
    );
    out
}
