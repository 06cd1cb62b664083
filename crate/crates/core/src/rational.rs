//! Exact rational numbers, their textual forms and decimal approximations.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::str::FromStr;

pub type Rational = num_rational::BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Renders `p/q`, omitting `/q` when the denominator is one.
pub fn render(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p`, `p/q`, or a decimal literal such as `-0.5` or `+2.0`.
pub fn parse(text: &str) -> Option<Rational> {
    let text = text.trim();
    let (neg, body) = match text.as_bytes().first()? {
        b'-' => (true, &text[1..]),
        b'+' => (false, &text[1..]),
        _ => (false, text),
    };
    if body.is_empty() {
        return None;
    }
    let value = if let Some((p, q)) = body.split_once('/') {
        let p = parse_unsigned_decimal(p)?;
        let q = parse_unsigned_decimal(q)?;
        if q.is_zero() {
            return None;
        }
        p / q
    } else {
        parse_unsigned_decimal(body)?
    };
    Some(if neg { -value } else { value })
}

fn parse_unsigned_decimal(text: &str) -> Option<Rational> {
    let (whole, frac) = match text.split_once('.') {
        Some((w, f)) => (w, f),
        None => (text, ""),
    };
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{whole}{frac}");
    let numer = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).ok()?;
    let denom = BigInt::from(10u32).pow(frac.len() as u32);
    Some(Rational::new(numer, denom))
}

/// Decimal approximation with `digits` significant digits, truncated toward zero
/// on the last digit and stripped of trailing zeros.
pub fn to_decimal(r: &Rational, digits: usize) -> String {
    if r.is_zero() {
        return "0".to_string();
    }
    let neg = r.is_negative();
    let abs = r.abs();
    let ten = BigInt::from(10u32);
    // scale so that the integer part has exactly `digits` digits
    let int_part = abs.to_integer();
    let int_digits = if int_part.is_zero() { 0 } else { int_part.to_string().len() as i64 };
    let mut exponent: i64 = digits as i64 - int_digits;
    if int_part.is_zero() {
        // count leading zeros after the decimal point
        let mut probe = abs.clone();
        while probe < Rational::one() {
            probe *= Rational::from_integer(ten.clone());
            exponent += 1;
        }
        exponent -= 1;
    }
    let scaled = if exponent >= 0 {
        abs * Rational::from_integer(ten.pow(exponent as u32))
    } else {
        abs / Rational::from_integer(ten.pow((-exponent) as u32))
    };
    let mantissa = scaled.numer().div_floor(scaled.denom());
    let mut s = mantissa.to_string();
    let out = if exponent <= 0 {
        s.push_str(&"0".repeat((-exponent) as usize));
        s
    } else {
        let exp = exponent as usize;
        if s.len() <= exp {
            s = format!("{}{}", "0".repeat(exp - s.len() + 1), s);
        }
        let split = s.len() - exp;
        let (a, b) = s.split_at(split);
        let b = b.trim_end_matches('0');
        if b.is_empty() {
            a.to_string()
        } else {
            format!("{a}.{b}")
        }
    };
    if neg {
        format!("-{out}")
    } else {
        out
    }
}

pub fn decimal20(r: &Rational) -> String {
    to_decimal(r, 20)
}

pub fn min(a: &Rational, b: &Rational) -> Rational {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}
