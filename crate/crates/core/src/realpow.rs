//! Certified `n^c`, `[n^c]` and `{h n^c / q}`.
//!
//! Rational orders `p/s` are enclosed through an integer `s`-th root of `n^p`
//! scaled by `2^(s*bits)`; quadratic-surd orders go through `exp(sqrt(m) ln n)`
//! in directed-rounding interval arithmetic. Precision starts at
//! [`PrecisionPolicy::start_bits`] and doubles until the floor (or fractional part)
//! is pinned down, up to [`PrecisionPolicy::max_bits`].
//!
//! Exact integers are detected before any interval work: an interval can never
//! certify the floor of a value that sits exactly on an integer.

use num_bigint::BigUint;
use num_integer::Roots;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::{self, RealInterval};
use crate::order::{big_pow, OrderSpec};

pub const DEFAULT_START_BITS: u32 = 64;
pub const DEFAULT_MAX_BITS: u32 = 16384;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PrecisionPolicy {
    pub start_bits: u32,
    pub max_bits: u32,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy { start_bits: DEFAULT_START_BITS, max_bits: DEFAULT_MAX_BITS }
    }
}

impl PrecisionPolicy {
    pub fn with_max_bits(max_bits: u32) -> Self {
        PrecisionPolicy { max_bits, ..Self::default() }
    }

    fn levels(&self) -> impl Iterator<Item = u32> + '_ {
        std::iter::successors(Some(self.start_bits.max(8)), |b| b.checked_mul(2))
            .take_while(move |b| *b <= self.max_bits)
    }
}

/// `[n^c]` together with how it was proven.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CertifiedFloor {
    pub n: u64,
    pub value: u128,
    /// Precision level at which the enclosure resolved (0 for exact values).
    pub bits: u32,
    /// `n^c` is itself an integer.
    pub exact: bool,
}

/// `n^c` when it is an integer.
///
/// For `c = p/s` in lowest terms, `n^(p/s)` is an integer exactly when `n` is a
/// perfect `s`-th power. For `c = sqrt(m)` only `n = 1` qualifies.
pub fn is_exact_power(n: u64, c: &OrderSpec) -> Option<BigUint> {
    if n == 0 {
        return None;
    }
    if n == 1 {
        return Some(BigUint::one());
    }
    let (p, s) = c.ratio()?;
    let root = n.nth_root(s as u32);
    let back = (root as u128).checked_pow(s as u32)?;
    (back == n as u128).then(|| big_pow(root, p))
}

fn surd_frac_bits(n: u64, m: u64, bits: u32) -> u32 {
    // Leave headroom for the magnitude of n^sqrt(m), then round up to a multiple of
    // 64 so the shared constant tables are reused across n.
    let mag = (64 - n.leading_zeros()) * (m.sqrt() as u32 + 1);
    (bits + mag + 16).div_ceil(64) * 64
}

/// An enclosure of `n^c` with at least `bits` fractional bits.
pub fn enclose_pow(n: u64, c: &OrderSpec, bits: u32) -> RealInterval {
    assert!(n >= 1, "n must be positive");
    match *c {
        OrderSpec::Rational { p, s } | OrderSpec::Decimal { p, s, .. } => {
            let np = big_pow(n, p);
            if s == 1 {
                RealInterval::from_integer(&np, bits)
            } else {
                interval::root_uint(&np, s as u32, bits)
            }
        }
        OrderSpec::SqrtInt { m } => {
            if n == 1 {
                return RealInterval::from_integer(&BigUint::one(), bits);
            }
            let f = surd_frac_bits(n, m, bits);
            let y = interval::sqrt_uint(m, f).mul(&interval::ln_uint(n, f));
            interval::exp(&y)
        }
    }
}

fn to_u128(v: &BigUint, n: u64, c: &OrderSpec) -> Result<u128> {
    v.to_u128()
        .ok_or_else(|| Error::Overflow(format!("[{n}^{c}] does not fit in 128 bits")))
}

pub fn floor_pow(n: u64, c: &OrderSpec) -> Result<CertifiedFloor> {
    floor_pow_with(n, c, &PrecisionPolicy::default())
}

pub fn floor_pow_with(n: u64, c: &OrderSpec, policy: &PrecisionPolicy) -> Result<CertifiedFloor> {
    if n == 0 {
        return Err(Error::arg("floor_pow requires n >= 1"));
    }
    if let Some(v) = is_exact_power(n, c) {
        return Ok(CertifiedFloor { n, value: to_u128(&v, n, c)?, bits: 0, exact: true });
    }
    for bits in policy.levels() {
        if let Some(t) = enclose_pow(n, c, bits).resolved_floor() {
            return Ok(CertifiedFloor { n, value: to_u128(&t, n, c)?, bits, exact: false });
        }
    }
    Err(Error::PrecisionCap { cap: policy.max_bits, what: format!("[{n}^{c}]") })
}

/// A certified enclosure of `h n^c / q` whose fractional part is resolved.
#[derive(Clone, Debug)]
pub struct FracEnclosure {
    /// Enclosure of `h n^c / q` (a point interval when exact).
    pub interval: RealInterval,
    pub integer_part: BigUint,
    /// `{h n^c / q}` to within the requested tolerance.
    pub value: f64,
    pub bits: u32,
    pub exact: bool,
}

/// `{h n^c / q}` within absolute error `eps`.
pub fn frac_part_scaled(n: u64, h: u64, q: u64, c: &OrderSpec, eps: f64) -> Result<f64> {
    frac_enclosure(n, h, q, c, eps, &PrecisionPolicy::default()).map(|e| e.value)
}

fn largest_below_one(v: f64) -> f64 {
    if v >= 1.0 {
        1.0 - f64::EPSILON / 2.0
    } else {
        v
    }
}

pub fn frac_enclosure(
    n: u64,
    h: u64,
    q: u64,
    c: &OrderSpec,
    eps: f64,
    policy: &PrecisionPolicy,
) -> Result<FracEnclosure> {
    if n == 0 || h == 0 || q == 0 {
        return Err(Error::arg("frac_part_scaled requires n, h, q >= 1"));
    }
    if !(eps > 0.0) {
        return Err(Error::arg("tolerance must be positive"));
    }
    let (hb, qb) = (BigUint::from(h), BigUint::from(q));
    if let Some(v) = is_exact_power(n, c) {
        let num = v * &hb;
        let rem = &num % &qb;
        let value = rem.to_f64().unwrap() / q as f64;
        return Ok(FracEnclosure {
            interval: RealInterval::from_integer(&num, 64 + qb.bits() as u32).scale(&BigUint::one(), &qb),
            integer_part: num / qb,
            value: largest_below_one(value),
            bits: 0,
            exact: true,
        });
    }
    // width * 2^-f < eps is guaranteed by bitlen(width) - f <= floor(log2 eps).
    let eps_exp = eps.log2().floor() as i64;
    for bits in policy.levels() {
        let iv = enclose_pow(n, c, bits).scale(&hb, &qb);
        let Some(whole) = iv.resolved_floor() else { continue };
        let f = iv.frac_bits();
        if iv.width_raw().bits() as i64 - f as i64 > eps_exp {
            continue;
        }
        let base = &whole << f;
        let mid_frac = (iv.lo_raw() + iv.hi_raw() - (&base << 1u32)) >> 1u32;
        let value = interval::fixed_to_f64(&mid_frac, f);
        return Ok(FracEnclosure {
            interval: iv,
            integer_part: whole,
            value: largest_below_one(value),
            bits,
            exact: false,
        });
    }
    Err(Error::PrecisionCap {
        cap: policy.max_bits,
        what: format!("{{{h}*{n}^{c}/{q}}} to within {eps:e}"),
    })
}
