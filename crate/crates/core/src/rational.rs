//! Exact rational scalars and small vector helpers.
//!
//! Every quantity in the crate is a [`Q`]; there is no floating point on any
//! certified path.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt::Write;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub use num_rational::BigRational as Q;

/// A dense rational vector.
pub type Vector = Vec<Q>;

pub fn int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// `p/q`. Panics if `q == 0`.
pub fn frac(p: i64, q: i64) -> Q {
    Q::new(BigInt::from(p), BigInt::from(q))
}

pub fn zero() -> Q {
    Q::zero()
}

pub fn one() -> Q {
    Q::one()
}

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"-0.25"`.
pub fn parse(text: &str) -> Option<Q> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = num.trim().parse().ok()?;
        let den: BigInt = den.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(Q::new(num, den));
    }
    if let Some((whole, fraction)) = text.split_once('.') {
        if fraction.is_empty() || !fraction.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        let mut digits = String::from(if whole_digits.is_empty() { "0" } else { whole_digits });
        digits.push_str(fraction);
        let mut num: BigInt = digits.parse().ok()?;
        if negative {
            num = -num;
        }
        let mut den = BigInt::one();
        for _ in 0..fraction.len() {
            den *= 10;
        }
        return Some(Q::new(num, den));
    }
    let num: BigInt = text.parse().ok()?;
    Some(Q::from_integer(num))
}

/// Canonical `p/q` text (denominator omitted when it is one).
pub fn to_text(value: &Q) -> String {
    let mut out = String::new();
    if value.denom().is_one() {
        let _ = write!(out, "{}", value.numer());
    } else {
        let _ = write!(out, "{}/{}", value.numer(), value.denom());
    }
    out
}

pub fn abs(value: &Q) -> Q {
    value.abs()
}

pub fn max<'a>(a: &'a Q, b: &'a Q) -> &'a Q {
    if a >= b {
        a
    } else {
        b
    }
}

pub fn min<'a>(a: &'a Q, b: &'a Q) -> &'a Q {
    if a <= b {
        a
    } else {
        b
    }
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

pub fn add(a: &[Q], b: &[Q]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[Q], b: &[Q]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &[Q], s: &Q) -> Vector {
    a.iter().map(|x| x * s).collect()
}

pub fn neg(a: &[Q]) -> Vector {
    a.iter().map(|x| -x).collect()
}

pub fn is_zero(a: &[Q]) -> bool {
    a.iter().all(Zero::is_zero)
}

pub fn unit(dim: usize, index: usize) -> Vector {
    (0..dim).map(|k| if k == index { Q::one() } else { Q::zero() }).collect()
}

pub fn zeros(dim: usize) -> Vector {
    (0..dim).map(|_| Q::zero()).collect()
}

pub fn l1_norm(a: &[Q]) -> Q {
    a.iter().fold(Q::zero(), |acc, x| acc + x.abs())
}

pub fn linf_norm(a: &[Q]) -> Q {
    a.iter().map(Signed::abs).max().unwrap_or_else(Q::zero)
}

pub fn lex_cmp(a: &[Q], b: &[Q]) -> Ordering {
    a.cmp(b)
}

/// Rescales `a` by a positive factor so that it becomes a primitive integer
/// vector. The zero vector is returned unchanged.
pub fn primitive(a: &[Q]) -> Vector {
    if is_zero(a) {
        return a.to_vec();
    }
    let lcm = a.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = a.iter().map(|x| (x * Q::from_integer(lcm.clone())).to_integer()).collect();
    let gcd = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    ints.into_iter().map(|x| Q::from_integer(x / &gcd)).collect()
}

/// Largest denominator appearing in `a`.
pub fn max_denominator(a: &[Q]) -> BigInt {
    a.iter().map(|x| x.denom().clone()).max().unwrap_or_else(BigInt::one)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse("3/4"), Some(frac(3, 4)));
        assert_eq!(parse("-6/8"), Some(frac(-3, 4)));
        assert_eq!(parse("7"), Some(int(7)));
        assert_eq!(parse("-0.25"), Some(frac(-1, 4)));
        assert_eq!(parse("1/0"), None);
        assert_eq!(parse("abc"), None);
    }

    #[test]
    fn text_round_trip() {
        for v in [frac(-3, 7), int(0), int(12), frac(5, 2)] {
            assert_eq!(parse(&to_text(&v)), Some(v));
        }
    }

    #[test]
    fn primitive_clears_denominators() {
        let v = [frac(1, 2), frac(-3, 4), int(0)];
        assert_eq!(primitive(&v), [int(2), int(-3), int(0)]);
    }
}
