//! Exact representation of the sequence order `c`.
//!
//! Orders are never stored as floats. The grammar accepted by [`OrderSpec::from_str`] is
//!
//! ```text
//! order    := integer | integer "/" integer | decimal | "sqrt:" integer
//! decimal  := digits "." digits
//! ```
//!
//! and every accepted value must be `>= 1`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum OrderSpec {
    /// `p / s` in lowest terms.
    Rational { p: u64, s: u64 },
    /// `sqrt(m)` with `m` not a perfect square.
    SqrtInt { m: u64 },
    /// A decimal literal, kept verbatim next to the exact rational it denotes.
    Decimal { digits: String, p: u64, s: u64 },
}

fn invalid(input: &str, reason: impl Into<String>) -> Error {
    Error::InvalidOrder { input: input.to_string(), reason: reason.into() }
}

impl OrderSpec {
    pub fn rational(p: u64, s: u64) -> Result<Self> {
        let text = format!("{p}/{s}");
        if s == 0 {
            return Err(invalid(&text, "zero denominator"));
        }
        let g = p.gcd(&s);
        let (p, s) = (p / g.max(1), s / g.max(1));
        if p < s {
            return Err(invalid(&text, "order must be >= 1"));
        }
        Ok(OrderSpec::Rational { p, s })
    }

    pub fn integer(k: u64) -> Result<Self> {
        Self::rational(k, 1)
    }

    pub fn sqrt_int(m: u64) -> Result<Self> {
        let text = format!("sqrt:{m}");
        if m < 2 {
            return Err(invalid(&text, "radicand must be >= 2"));
        }
        let r = m.sqrt();
        if r * r == m {
            return Err(invalid(&text, "radicand is a perfect square; write the integer order instead"));
        }
        Ok(OrderSpec::SqrtInt { m })
    }

    pub fn decimal(digits: &str) -> Result<Self> {
        let digits = digits.trim();
        let (int_part, frac_part) = digits
            .split_once('.')
            .ok_or_else(|| invalid(digits, "decimal literal needs a '.'"))?;
        if int_part.is_empty()
            || frac_part.is_empty()
            || !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(invalid(digits, "expected digits '.' digits"));
        }
        let too_long = || invalid(digits, "decimal literal too long to represent exactly in 64 bits");
        let s = 10u64.checked_pow(frac_part.len() as u32).ok_or_else(too_long)?;
        let p: u64 = format!("{int_part}{frac_part}").parse().map_err(|_| too_long())?;
        match Self::rational(p, s) {
            Ok(OrderSpec::Rational { p, s }) => Ok(OrderSpec::Decimal { digits: digits.to_string(), p, s }),
            Ok(_) => unreachable!(),
            Err(_) => Err(invalid(digits, "order must be >= 1")),
        }
    }

    /// `(p, s)` for orders that are rational.
    pub fn ratio(&self) -> Option<(u64, u64)> {
        match *self {
            OrderSpec::Rational { p, s } | OrderSpec::Decimal { p, s, .. } => Some((p, s)),
            OrderSpec::SqrtInt { .. } => None,
        }
    }

    pub fn to_big_rational(&self) -> Option<BigRational> {
        self.ratio()
            .map(|(p, s)| BigRational::new(BigInt::from(p), BigInt::from(s)))
    }

    /// The order as an integer, when it is one.
    pub fn as_integer(&self) -> Option<u64> {
        match self.ratio() {
            Some((p, 1)) => Some(p),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match *self {
            OrderSpec::Rational { p, s } | OrderSpec::Decimal { p, s, .. } => p as f64 / s as f64,
            OrderSpec::SqrtInt { m } => (m as f64).sqrt(),
        }
    }

    pub fn floor(&self) -> u64 {
        match *self {
            OrderSpec::Rational { p, s } | OrderSpec::Decimal { p, s, .. } => p / s,
            OrderSpec::SqrtInt { m } => m.sqrt(),
        }
    }

    pub fn ceil(&self) -> u64 {
        match *self {
            OrderSpec::Rational { p, s } | OrderSpec::Decimal { p, s, .. } => p.div_ceil(s),
            OrderSpec::SqrtInt { m } => m.sqrt() + 1,
        }
    }

    /// Exact comparison of the order against a rational number.
    pub fn cmp_rational(&self, r: &BigRational) -> Ordering {
        match self {
            OrderSpec::SqrtInt { m } => {
                if !r.is_positive() {
                    return Ordering::Greater;
                }
                // sqrt(m) vs a/b  <=>  m b^2 vs a^2
                let lhs = BigInt::from(*m) * r.denom() * r.denom();
                let rhs = r.numer() * r.numer();
                lhs.cmp(&rhs)
            }
            _ => self.to_big_rational().unwrap().cmp(r),
        }
    }
}

impl Ord for OrderSpec {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.ratio(), other.ratio()) {
            (Some(_), _) => other.cmp_rational(&self.to_big_rational().unwrap()).reverse(),
            (None, Some(_)) => self.cmp_rational(&other.to_big_rational().unwrap()),
            (None, None) => match (self, other) {
                (OrderSpec::SqrtInt { m: a }, OrderSpec::SqrtInt { m: b }) => a.cmp(b),
                _ => unreachable!(),
            },
        }
    }
}

impl PartialOrd for OrderSpec {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl FromStr for OrderSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if let Some(rad) = t.strip_prefix("sqrt:") {
            let m = rad.trim().parse::<u64>().map_err(|_| invalid(t, "radicand must be a positive integer"))?;
            return Self::sqrt_int(m);
        }
        if let Some((num, den)) = t.split_once('/') {
            let p = num.trim().parse::<u64>().map_err(|_| invalid(t, "bad numerator"))?;
            let q = den.trim().parse::<u64>().map_err(|_| invalid(t, "bad denominator"))?;
            return Self::rational(p, q);
        }
        if t.contains('.') {
            return Self::decimal(t);
        }
        let k = t
            .parse::<u64>()
            .map_err(|_| invalid(t, "expected an integer, p/s, a decimal, or sqrt:m"))?;
        Self::integer(k)
    }
}

impl fmt::Display for OrderSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderSpec::Rational { p, s: 1 } => write!(f, "{p}"),
            OrderSpec::Rational { p, s } => write!(f, "{p}/{s}"),
            OrderSpec::SqrtInt { m } => write!(f, "sqrt:{m}"),
            OrderSpec::Decimal { digits, .. } => f.write_str(digits),
        }
    }
}

impl Serialize for OrderSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// `floor(x)` for a counting limit, rejecting `x < 1` and non-finite input.
pub fn counting_limit(x: f64) -> Result<u64> {
    if !x.is_finite() || x < 1.0 {
        return Err(Error::arg(format!("counting limit x must be a finite real >= 1, got {x}")));
    }
    if x >= u64::MAX as f64 {
        return Err(Error::Overflow(format!("counting limit {x} does not fit in 64 bits")));
    }
    Ok(x.floor() as u64)
}

/// Renders a big rational as `a/b` (or `a` when integral).
pub fn rational_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Best-effort conversion of a big rational to `f64`.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // Scale both sides down to avoid overflow of the individual parts.
            let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
            let n = (r.numer() >> shift).to_f64().unwrap_or(0.0);
            let d = (r.denom() >> shift).to_f64().unwrap_or(1.0);
            n / d
        }
    }
}

pub(crate) fn big_pow(n: u64, e: u64) -> BigUint {
    num_traits::pow(BigUint::from(n), e as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_grammar() {
        assert_eq!("3/2".parse::<OrderSpec>().unwrap(), OrderSpec::Rational { p: 3, s: 2 });
        assert_eq!("6/4".parse::<OrderSpec>().unwrap(), OrderSpec::Rational { p: 3, s: 2 });
        assert_eq!("2".parse::<OrderSpec>().unwrap(), OrderSpec::Rational { p: 2, s: 1 });
        assert_eq!("sqrt:2".parse::<OrderSpec>().unwrap(), OrderSpec::SqrtInt { m: 2 });
        let d = "2.7".parse::<OrderSpec>().unwrap();
        assert_eq!(d.ratio(), Some((27, 10)));
        assert_eq!(d.to_string(), "2.7");
        assert_eq!("1.25".parse::<OrderSpec>().unwrap().ratio(), Some((5, 4)));
    }

    #[test]
    fn rejects_invalid_orders() {
        for bad in ["1/2", "0", "sqrt:4", "sqrt:1", "0.5", "abc", "3/0", "1.", ".5", "-2", "sqrt:x"] {
            assert!(bad.parse::<OrderSpec>().is_err(), "{bad} should be rejected");
        }
    }

    #[test]
    fn exact_ordering() {
        let o = |s: &str| s.parse::<OrderSpec>().unwrap();
        assert!(o("sqrt:2") < o("3/2"));
        assert!(o("7/5") < o("sqrt:2"));
        assert!(o("sqrt:2") < o("sqrt:3"));
        assert_eq!(o("1.5").cmp(&o("3/2")), Ordering::Equal);
        assert_eq!(o("sqrt:2").ceil(), 2);
        assert_eq!(o("5/2").ceil(), 3);
        assert_eq!(o("2").ceil(), 2);
    }

    #[test]
    fn counting_limit_floors() {
        assert_eq!(counting_limit(10.7).unwrap(), 10);
        assert!(counting_limit(0.5).is_err());
        assert!(counting_limit(f64::NAN).is_err());
    }
}
