//! Exact rational scalars and their `p/q` text form.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Parses `"p/q"`, `"p"` or `"-p/q"`. Whitespace around the tokens is ignored.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("not an exact rational: {text:?}"));
    let trimmed = text.trim();
    let (num, den) = match trimmed.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (trimmed, "1"),
    };
    if num.is_empty() || den.is_empty() || num.contains(['.', 'e', 'E']) || den.contains(['.', 'e', 'E']) {
        return Err(bad());
    }
    let n: BigInt = num.parse().map_err(|_| bad())?;
    let d: BigInt = den.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {text:?}")));
    }
    Ok(Rational::new(n, d))
}

/// Canonical text form: `"p/q"` in lowest terms with positive denominator, or `"p"` for integers.
pub fn format_rational(value: &Rational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn factorial(k: u32) -> Rational {
    let mut acc = BigInt::one();
    for i in 2..=k {
        acc *= i;
    }
    Rational::from_integer(acc)
}

pub fn pow(base: &Rational, exp: u32) -> Rational {
    Pow::pow(base, exp)
}
