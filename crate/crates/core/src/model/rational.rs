//! Exact rational helpers on top of `num_rational::BigRational`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `0.34`, `.5`, `1`, `17/50` into an exact rational.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    if let Some((n, d)) = text.split_once('/') {
        let n = parse_digits(n)?;
        let d = parse_digits(d)?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    let (int_part, frac_part) = text.split_once('.').unwrap_or((text, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let int_val = if int_part.is_empty() { BigInt::zero() } else { parse_digits(int_part)? };
    if frac_part.is_empty() {
        return if text.ends_with('.') { None } else { Some(Rational::from_integer(int_val)) };
    }
    let frac_val = parse_digits(frac_part)?;
    let scale = num_traits::pow(BigInt::from(10), frac_part.len());
    Some(Rational::new(int_val * &scale + frac_val, scale))
}

fn parse_digits(s: &str) -> Option<BigInt> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

pub fn in_unit_interval(q: &Rational) -> bool {
    *q >= zero() && *q <= one()
}

/// Approximate decimal rendering for human-facing reports.
pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// `17/50 (0.34)` style rendering.
pub fn show(q: &Rational) -> String {
    if q.is_integer() {
        q.to_string()
    } else {
        format!("{} ({})", q, to_f64(q))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse_rational("0.34"), Some(ratio(17, 50)));
        assert_eq!(parse_rational(".5"), Some(ratio(1, 2)));
        assert_eq!(parse_rational("1"), Some(one()));
        assert_eq!(parse_rational("1.000"), Some(one()));
        assert_eq!(parse_rational("3/6"), Some(ratio(1, 2)));
        assert_eq!(parse_rational("0.1").unwrap().to_string(), "1/10");
    }

    #[test]
    fn garbage_is_rejected() {
        for bad in ["", "-0.3", "1/0", "a", "0.3.1", "1e3", ".", "1.", " 1/ 2"] {
            assert_eq!(parse_rational(bad), None, "{bad}");
        }
    }
}
