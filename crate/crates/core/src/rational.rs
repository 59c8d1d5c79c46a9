//! Helpers around exact rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Parses `P/Q`, a plain integer, or a decimal-free signed fraction.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num.parse().ok()?;
    let den: BigInt = den.parse().ok()?;
    if den.is_zero() {
        return None;
    }
    Some(BigRational::new(num, den))
}

/// Formats a rational as `P/Q`, or `P` when it is an integer.
pub fn format_rational(value: &BigRational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn int(value: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(value))
}

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// `base^exp` for a non-negative exponent.
pub fn pow(base: &BigRational, exp: usize) -> BigRational {
    let mut result = BigRational::one();
    let mut acc = base.clone();
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            result *= &acc;
        }
        acc = &acc * &acc;
        e >>= 1;
    }
    result
}

/// Smallest integer `>= value`.
pub fn ceil_to_bigint(value: &BigRational) -> BigInt {
    value.ceil().to_integer()
}

/// Splits `value = p/q` into `(p, q)` with `q > 0` as machine integers.
pub fn to_i64_parts(value: &BigRational) -> Option<(i64, i64)> {
    let (n, d) = (value.numer().clone(), value.denom().clone());
    let g = n.gcd(&d);
    let (n, d) = if g.is_zero() { (n, d) } else { (n / &g, d / &g) };
    let (n, d) = if d.is_negative() { (-n, -d) } else { (n, d) };
    Some((n.to_i64()?, d.to_i64()?))
}

/// `0 < lambda < 1`.
pub fn is_discount(lambda: &BigRational) -> bool {
    lambda.is_positive() && lambda < &BigRational::one()
}
