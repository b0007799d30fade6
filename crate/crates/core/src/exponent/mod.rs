//! Exact exponent algebra for the progression and coprime-tuple error terms.
//!
//! All results are rationals; nothing here rounds.

pub mod monomial;
pub mod optimize;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::order::OrderSpec;

pub use monomial::{parse_rational, LogMonomial, Var};
pub use optimize::{optimize, optimize_at, Bound, OptOutcome, OptProblem};

/// Largest derivative order considered.
pub const K_MAX: u32 = 64;

fn int(k: u32) -> BigRational {
    BigRational::from_integer(BigInt::from(k))
}

/// `2^k - 1` as a rational.
fn mersenne(k: u32) -> BigRational {
    BigRational::from_integer((BigInt::one() << k) - 1)
}

/// `2^-k`.
fn inv_pow2(k: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << k)
}

fn check_k(k: u32, min: u32) -> Result<()> {
    if !(min..=K_MAX).contains(&k) {
        return Err(Error::arg(format!("k = {k} outside {min}..={K_MAX}")));
    }
    Ok(())
}

/// `(1 - (k-c)/(2^k-1), -1/(2^k-1))`: the exponents of `x` and `q` in the
/// progression error term.
pub fn ap_exponent(k: u32, c: &BigRational) -> Result<(BigRational, BigRational)> {
    check_k(k, 1)?;
    let d = mersenne(k);
    Ok((BigRational::one() - (int(k) - c) / &d, -(BigRational::one() / d)))
}

/// The progression error exponent as a power of `x` when `q = x^theta`.
pub fn ap_bound_exponent(k: u32, c: &BigRational, theta: &BigRational) -> Result<BigRational> {
    let (xe, qe) = ap_exponent(k, c)?;
    Ok(xe + qe * theta)
}

/// `theta_k = c + 1 - k - 2^-k`: the bounds for `k` and `k+1` agree exactly at `q = x^theta_k`.
pub fn ap_crossing_theta(k: u32, c: &BigRational) -> BigRational {
    c + BigRational::one() - int(k) - inv_pow2(k)
}

/// The `k` minimizing the progression bound for `q = x^theta`: the unique `k` with
/// `theta_k < theta <= theta_{k-1}` (where `theta_0 = c`).
pub fn best_k_for_modulus(c: &BigRational, theta: &BigRational) -> Result<u32> {
    if theta.is_negative() || theta > c {
        return Err(Error::arg("need 0 <= theta <= c"));
    }
    for k in 1..=K_MAX {
        if ap_crossing_theta(k, c) < *theta {
            return Ok(k);
        }
    }
    Ok(K_MAX)
}

/// `r - (k-c)/(2^k-1)`.
pub fn pair_error_exponent(k: u32, c: &BigRational, r: u32) -> Result<BigRational> {
    check_k(k, 2)?;
    if r < 2 {
        return Err(Error::arg("r must be >= 2"));
    }
    if *c >= int(k) {
        return Err(Error::arg(format!("need c < k, got c = {c}, k = {k}")));
    }
    Ok(int(r) - (int(k) - c) / mersenne(k))
}

/// The `k >= 2` with `k - 2 + 2^-(k-1) < c <= k - 1 + 2^-k`.
pub fn choose_k_special(c: &BigRational) -> Result<u32> {
    if *c < BigRational::one() {
        return Err(Error::arg("need c >= 1"));
    }
    for k in 2..=K_MAX {
        let lo = int(k - 2) + inv_pow2(k - 1);
        let hi = int(k - 1) + inv_pow2(k);
        if lo < *c && *c <= hi {
            return Ok(k);
        }
    }
    Err(Error::arg(format!("c = {c} needs k > {K_MAX}")))
}

/// Rational order as required by the exact routines.
pub fn rational_order(c: &OrderSpec) -> Result<BigRational> {
    c.to_big_rational()
        .ok_or_else(|| Error::arg(format!("order {c} is irrational; exact exponents need a rational order")))
}

/// The `k` from [`choose_k_special`] for any order, compared exactly.
pub fn choose_k_for_order(c: &OrderSpec) -> Result<u32> {
    if let Some(r) = c.to_big_rational() {
        return choose_k_special(&r);
    }
    for k in 2..=K_MAX {
        let lo = int(k - 2) + inv_pow2(k - 1);
        let hi = int(k - 1) + inv_pow2(k);
        if c.cmp_rational(&lo).is_gt() && c.cmp_rational(&hi).is_le() {
            return Ok(k);
        }
    }
    Err(Error::arg(format!("c = {c} needs k > {K_MAX}")))
}

/// `r - (k-c)/(2^k-1)` in floating point, for irrational orders.
pub fn pair_error_exponent_f64(k: u32, c: &OrderSpec, r: u32) -> Result<f64> {
    check_k(k, 2)?;
    if c.cmp_rational(&int(k)).is_ge() {
        return Err(Error::arg(format!("need c < k, got c = {c}, k = {k}")));
    }
    Ok(r as f64 - (k as f64 - c.to_f64()) / ((1u64 << k) as f64 - 1.0))
}

/// Exponent of `x` in the divisor cut `D = x^((k - c_r)/(2^k - 2))`.
pub fn divisor_cut_exponent(k: u32, c_r: &BigRational) -> Result<BigRational> {
    check_k(k, 2)?;
    Ok((int(k) - c_r) / (mersenne(k) - BigRational::one()))
}

/// `epsilon = (k - c_r)/((2^k - 2)(2^k - 1))`.
pub fn slack_epsilon(k: u32, c_r: &BigRational) -> Result<BigRational> {
    Ok(divisor_cut_exponent(k, c_r)? / mersenne(k))
}

/// Exponents of `x` in the four error terms of the split at `D`, with `D` and
/// `epsilon` as above.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SplitExponents {
    /// `r - (k-c)/(2^k-1)`.
    pub main: String,
    pub small_d_tail: String,
    pub small_d_truncation: String,
    pub large_d: String,
    #[serde(skip)]
    pub values: [BigRational; 4],
}

pub fn split_exponents(k: u32, c_r: &BigRational, r: u32) -> Result<SplitExponents> {
    let main = pair_error_exponent(k, c_r, r)?;
    let a = int(k) - c_r;
    let m = mersenne(k);
    let d = divisor_cut_exponent(k, c_r)?;
    let eps = slack_epsilon(k, c_r)?;
    let rr = int(r);
    let one = BigRational::one();
    // x^(r - r(k-c)/(2^k-1)) D^(1 - r/(2^k-1))
    let tail = &rr - &rr * &a / &m + &d * (&one - &rr / &m);
    // x^r D^-(r-1)
    let trunc = &rr - (&rr - &one) * &d;
    // x^(r - (r-1)(k-c)/(2^k-1) + eps) D^(-(r-1)/(2^k-1))
    let large = &rr - (&rr - &one) * &a / &m + eps - &d * (&rr - &one) / &m;
    let s = crate::order::rational_string;
    Ok(SplitExponents {
        main: s(&main),
        small_d_tail: s(&tail),
        small_d_truncation: s(&trunc),
        large_d: s(&large),
        values: [main, tail, trunc, large],
    })
}

#[cfg(test)]
mod tests {
    use super::monomial::rat;
    use super::*;
    use num_traits::ToPrimitive;

    #[test]
    fn ap_exponent_examples() {
        let c = rat(3, 2);
        assert_eq!(ap_exponent(1, &c).unwrap(), (c.clone(), rat(-1, 1)));
        assert_eq!(ap_exponent(2, &c).unwrap(), (rat(5, 6), rat(-1, 3)));
        assert_eq!(ap_exponent(3, &c).unwrap().0, (&c + rat(4, 1)) / rat(7, 1));
        assert!(ap_exponent(0, &c).is_err());
    }

    #[test]
    fn crossing_theta_equalizes_bounds() {
        for (p, s) in [(1, 1), (3, 2), (7, 3), (5, 2)] {
            let c = rat(p, s);
            for k in 1..=8 {
                let t = ap_crossing_theta(k, &c);
                assert_eq!(ap_bound_exponent(k, &c, &t).unwrap(), ap_bound_exponent(k + 1, &c, &t).unwrap());
            }
        }
    }

    #[test]
    fn best_k_minimizes_bound() {
        let c = rat(3, 2);
        assert_eq!(best_k_for_modulus(&c, &c).unwrap(), 1);
        // theta_1 = c - 1/2
        assert_eq!(best_k_for_modulus(&c, &rat(1, 1)).unwrap(), 2);
        assert_eq!(best_k_for_modulus(&c, &(rat(1, 1) + rat(1, 1000))).unwrap(), 1);
        let mut prev = 1;
        for i in (0..=300).rev() {
            let theta = rat(i, 200);
            let k = best_k_for_modulus(&c, &theta).unwrap();
            assert!(k >= prev);
            prev = k;
            let best = ap_bound_exponent(k, &c, &theta).unwrap();
            for j in 1..=10 {
                assert!(best <= ap_bound_exponent(j, &c, &theta).unwrap(), "theta = {theta}, k = {k}, j = {j}");
            }
        }
        assert!(best_k_for_modulus(&c, &rat(2, 1)).is_err());
    }

    #[test]
    fn pair_exponents() {
        let c = rat(3, 2);
        assert_eq!(pair_error_exponent(2, &c, 2).unwrap(), rat(11, 6));
        assert_eq!(pair_error_exponent(3, &c, 2).unwrap(), (&c + rat(11, 1)) / rat(7, 1));
        assert!(pair_error_exponent(2, &rat(2, 1), 2).is_err());
        let x = pair_error_exponent_f64(3, &"sqrt:2".parse().unwrap(), 2).unwrap();
        assert!((x - (2.0 - (3.0 - 2f64.sqrt()) / 7.0)).abs() < 1e-15);
    }

    #[test]
    fn special_k() {
        assert_eq!(choose_k_special(&rat(3, 2)).unwrap(), 3);
        assert_eq!(choose_k_special(&rat(1, 1)).unwrap(), 2);
        assert_eq!(choose_k_special(&rat(5, 4)).unwrap(), 2);
        assert_eq!(choose_k_for_order(&"sqrt:2".parse().unwrap()).unwrap(), 3);
        for i in 0..=900 {
            let c = rat(100 + i, 100);
            let k = choose_k_special(&c).unwrap();
            assert!(int(k) > c);
            let ceil = c.ceil().to_integer().to_u32().unwrap();
            let target = rat(2, 1) - inv_pow2(ceil + 1);
            assert!(pair_error_exponent(k, &c, 2).unwrap() <= target, "c = {c}");
        }
    }

    #[test]
    fn split_terms_never_exceed_main() {
        for (p, s) in [(1, 1), (5, 4), (3, 2), (2, 1), (5, 2)] {
            let c = rat(p, s);
            for k in 2..=7 {
                if int(k) <= c {
                    continue;
                }
                for r in 2..=5 {
                    let e = split_exponents(k, &c, r).unwrap();
                    for v in &e.values[1..] {
                        assert!(*v <= e.values[0], "c = {c}, k = {k}, r = {r}");
                    }
                }
            }
        }
        assert_eq!(slack_epsilon(2, &rat(1, 1)).unwrap(), rat(1, 6));
        assert_eq!(divisor_cut_exponent(3, &rat(3, 2)).unwrap(), rat(1, 4));
    }
}
