//! Fixed-point interval arithmetic over non-negative reals.
//!
//! An interval is a pair of big integers `lo <= hi` read as `[lo, hi] * 2^-frac_bits`.
//! Every operation rounds the lower endpoint down and the upper endpoint up, so the
//! true value is always enclosed. The transcendental kernels (`ln`, `exp`) bound
//! truncated power series from both sides and add an explicit tail bound on the
//! upper side.
//!
//! Argument reduction uses per-precision tables (`ln 2`, `ln(k/256)`, `exp(j/256)`)
//! that are built lazily and shared across threads.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealInterval {
    lo: BigUint,
    hi: BigUint,
    frac_bits: u32,
}

fn ceil_shr(x: &BigUint, k: u32) -> BigUint {
    if k == 0 {
        return x.clone();
    }
    let q = x >> k;
    if (&q << k) == *x {
        q
    } else {
        q + 1u32
    }
}

fn ceil_div(a: &BigUint, b: &BigUint) -> BigUint {
    let q = a / b;
    if &q * b == *a {
        q
    } else {
        q + 1u32
    }
}

impl RealInterval {
    pub fn new(lo: BigUint, hi: BigUint, frac_bits: u32) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        RealInterval { lo, hi, frac_bits }
    }

    /// The exact integer `v` as a degenerate interval.
    pub fn from_integer(v: &BigUint, frac_bits: u32) -> Self {
        let x = v << frac_bits;
        RealInterval { lo: x.clone(), hi: x, frac_bits }
    }

    pub fn lo_raw(&self) -> &BigUint {
        &self.lo
    }

    pub fn hi_raw(&self) -> &BigUint {
        &self.hi
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    /// `hi - lo` in units of `2^-frac_bits`.
    pub fn width_raw(&self) -> BigUint {
        &self.hi - &self.lo
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn floor_lo(&self) -> BigUint {
        &self.lo >> self.frac_bits
    }

    pub fn floor_hi(&self) -> BigUint {
        &self.hi >> self.frac_bits
    }

    /// `Some(t)` when every point of the interval has floor `t`.
    pub fn resolved_floor(&self) -> Option<BigUint> {
        let a = self.floor_lo();
        (a == self.floor_hi()).then_some(a)
    }

    /// True when an integer lies strictly inside the interval or at its upper end
    /// while the lower end is below it, i.e. the floor is not determined.
    pub fn straddles_integer(&self) -> bool {
        self.resolved_floor().is_none()
    }

    /// Multiplies by the positive rational `num / den`.
    pub fn scale(&self, num: &BigUint, den: &BigUint) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        RealInterval {
            lo: (&self.lo * num) / den,
            hi: ceil_div(&(&self.hi * num), den),
            frac_bits: self.frac_bits,
        }
    }

    pub fn mul(&self, other: &RealInterval) -> Self {
        assert_eq!(self.frac_bits, other.frac_bits, "mixed interval precisions");
        let f = self.frac_bits;
        RealInterval {
            lo: (&self.lo * &other.lo) >> f,
            hi: ceil_shr(&(&self.hi * &other.hi), f),
            frac_bits: f,
        }
    }

    pub fn add(&self, other: &RealInterval) -> Self {
        assert_eq!(self.frac_bits, other.frac_bits, "mixed interval precisions");
        RealInterval {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
            frac_bits: self.frac_bits,
        }
    }

    /// Re-expresses the interval with `bits` fractional bits (widening outward).
    pub fn with_frac_bits(&self, bits: u32) -> Self {
        if bits >= self.frac_bits {
            let d = bits - self.frac_bits;
            RealInterval { lo: &self.lo << d, hi: &self.hi << d, frac_bits: bits }
        } else {
            let d = self.frac_bits - bits;
            RealInterval { lo: &self.lo >> d, hi: ceil_shr(&self.hi, d), frac_bits: bits }
        }
    }

    /// Lower endpoint minus its floor, as a fixed-point fraction in `[0, 2^frac_bits)`.
    pub fn frac_of_lo_raw(&self) -> BigUint {
        let whole = self.floor_lo() << self.frac_bits;
        &self.lo - whole
    }

    pub fn lo_f64(&self) -> f64 {
        fixed_to_f64(&self.lo, self.frac_bits)
    }

    pub fn hi_f64(&self) -> f64 {
        fixed_to_f64(&self.hi, self.frac_bits)
    }

    pub fn mid_f64(&self) -> f64 {
        fixed_to_f64(&(&self.lo + &self.hi), self.frac_bits + 1)
    }

    /// Width as `f64` (rounded, for reporting only).
    pub fn width_f64(&self) -> f64 {
        fixed_to_f64(&self.width_raw(), self.frac_bits)
    }
}

/// `x * 2^-f` rounded to `f64`.
pub fn fixed_to_f64(x: &BigUint, f: u32) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return 0.0;
    }
    // Keep the 64 most significant bits, then rescale.
    let drop = bits.saturating_sub(64);
    let top = (x >> drop).to_u64().unwrap() as f64;
    let exp = drop as i64 - f as i64;
    top * 2f64.powi(exp.clamp(-2000, 2000) as i32)
}

// ---------------------------------------------------------------------------
// Power series kernels. All arguments and results are fixed point with `f` bits.
// ---------------------------------------------------------------------------

/// Lower and upper bounds of `atanh(a/b) * 2^f` for `0 <= a/b <= 1/2`.
fn atanh_bounds(a: &BigUint, b: &BigUint, f: u32) -> (BigUint, BigUint) {
    debug_assert!(a * 2u32 <= *b);
    if a.is_zero() {
        return (BigUint::zero(), BigUint::zero());
    }
    let scaled = a << f;

    // Lower: every product floored, series truncated; all terms are positive.
    let z_lo = &scaled / b;
    let z2_lo = (&z_lo * &z_lo) >> f;
    let mut lo = BigUint::zero();
    let mut pow = z_lo;
    let mut j = 0u32;
    loop {
        let term = &pow / (2 * j + 1);
        if term.is_zero() {
            break;
        }
        lo += term;
        pow = (&pow * &z2_lo) >> f;
        j += 1;
    }

    // Upper: every product ceiled; the tail after the last included term is at most
    // z^(2J+1) / (1 - z^2) <= (4/3) z^(2J+1), bounded here by 2 * pow.
    let z_hi = ceil_div(&scaled, b);
    let z2_hi = ceil_shr(&(&z_hi * &z_hi), f);
    let mut hi = BigUint::zero();
    let mut pow = z_hi;
    let mut j = 0u32;
    while pow > BigUint::from(2u32) {
        hi += ceil_div(&pow, &BigUint::from(2 * j + 1));
        pow = ceil_shr(&(&pow * &z2_hi), f);
        j += 1;
    }
    hi += pow * 2u32;
    (lo, hi)
}

/// Lower bound of `exp(s) * 2^f` for `0 <= s < 1`, `s = arg * 2^-f`.
fn exp_taylor_lower(arg: &BigUint, f: u32) -> BigUint {
    let one = BigUint::one() << f;
    let mut sum = one.clone();
    let mut term = one;
    let mut i = 1u32;
    loop {
        term = ((&term * arg) >> f) / i;
        if term.is_zero() {
            break;
        }
        sum += &term;
        i += 1;
    }
    sum
}

/// Upper bound of `exp(s) * 2^f` for `0 <= s < 1`, `s = arg * 2^-f`.
fn exp_taylor_upper(arg: &BigUint, f: u32) -> BigUint {
    debug_assert!(arg.bits() <= f as u64);
    let one = BigUint::one() << f;
    let mut sum = one.clone();
    let mut term = one;
    let mut i = 1u32;
    loop {
        term = ceil_div(&ceil_shr(&(&term * arg), f), &BigUint::from(i));
        sum += &term;
        i += 1;
        // With s < 1 and i >= 2 the remaining terms shrink by at least 1/2 each,
        // so the tail is bounded by the last term added.
        if i >= 3 && term <= BigUint::one() {
            sum += &term;
            break;
        }
        if term.is_zero() {
            break;
        }
    }
    sum
}

const LN_TABLE_BITS: u32 = 8;
const LN_TABLE_SIZE: usize = 1 << LN_TABLE_BITS;
// j/256 < ln 2 for j <= 177.
const EXP_TABLE_SIZE: usize = 178;

struct Constants {
    f: u32,
    ln2: (BigUint, BigUint),
    ln_k: Vec<OnceLock<(BigUint, BigUint)>>,
    exp_j: Vec<OnceLock<(BigUint, BigUint)>>,
}

impl Constants {
    fn new(f: u32) -> Self {
        let (l, h) = atanh_bounds(&BigUint::one(), &BigUint::from(3u32), f);
        Constants {
            f,
            ln2: (l << 1, h << 1),
            ln_k: (0..LN_TABLE_SIZE).map(|_| OnceLock::new()).collect(),
            exp_j: (0..EXP_TABLE_SIZE).map(|_| OnceLock::new()).collect(),
        }
    }

    /// Bounds of `ln((256 + i) / 256)`.
    fn ln_k(&self, i: usize) -> &(BigUint, BigUint) {
        self.ln_k[i].get_or_init(|| {
            let k = (LN_TABLE_SIZE + i) as u64;
            let a = BigUint::from(k - LN_TABLE_SIZE as u64);
            let b = BigUint::from(k + LN_TABLE_SIZE as u64);
            let (l, h) = atanh_bounds(&a, &b, self.f);
            (l << 1, h << 1)
        })
    }

    /// Bounds of `exp(j / 256)`.
    fn exp_j(&self, j: usize) -> &(BigUint, BigUint) {
        self.exp_j[j].get_or_init(|| {
            let arg = BigUint::from(j as u64) << (self.f - LN_TABLE_BITS);
            (exp_taylor_lower(&arg, self.f), exp_taylor_upper(&arg, self.f))
        })
    }
}

fn constants(f: u32) -> Arc<Constants> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Constants>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard.entry(f).or_insert_with(|| Arc::new(Constants::new(f))).clone()
}

/// Enclosure of `sqrt(m)`.
pub fn sqrt_uint(m: u64, f: u32) -> RealInterval {
    root_uint(&BigUint::from(m), 2, f)
}

/// Enclosure of `n^(1/k)` for `k >= 1`.
pub fn root_uint(n: &BigUint, k: u32, f: u32) -> RealInterval {
    assert!(k >= 1);
    let shifted = n << (k as u64 * f as u64);
    let r = shifted.nth_root(k);
    let hi = if num_traits::pow(r.clone(), k as usize) == shifted { r.clone() } else { &r + 1u32 };
    RealInterval { lo: r, hi, frac_bits: f }
}

/// Enclosure of `ln n` for an integer `n >= 1`. Requires `f >= 8`.
pub fn ln_uint(n: u64, f: u32) -> RealInterval {
    assert!(n >= 1 && f >= LN_TABLE_BITS);
    if n == 1 {
        return RealInterval { lo: BigUint::zero(), hi: BigUint::zero(), frac_bits: f };
    }
    let c = constants(f);
    // n = 2^e * t with t in [1, 2); t = (k/256)(1 + u) with k in [256, 512).
    let e = 63 - n.leading_zeros();
    let n256 = (n as u128) << LN_TABLE_BITS;
    let k = (n256 >> e) as u64;
    let k2e = (k as u128) << e;
    // ln t = ln(k/256) + 2 atanh((n*256 - k*2^e) / (n*256 + k*2^e))
    let a = BigUint::from(n256 - k2e);
    let b = BigUint::from(n256 + k2e);
    let (z_lo, z_hi) = atanh_bounds(&a, &b, f);
    let (lk_lo, lk_hi) = c.ln_k((k as usize) - LN_TABLE_SIZE);
    let lo = &c.ln2.0 * e + lk_lo + (z_lo << 1);
    let hi = &c.ln2.1 * e + lk_hi + (z_hi << 1);
    RealInterval { lo, hi, frac_bits: f }
}

fn exp_point(y: &BigUint, f: u32, upper: bool, c: &Constants) -> BigUint {
    // y = k ln2 + r; using the upper (lower) bound of ln 2 makes r a lower (upper)
    // bound of the true reduced argument.
    let ln2 = if upper { &c.ln2.0 } else { &c.ln2.1 };
    let k = y / ln2;
    let r = y - &k * ln2;
    let j = (&r >> (f - LN_TABLE_BITS)).to_usize().unwrap();
    let s = &r - (BigUint::from(j as u64) << (f - LN_TABLE_BITS));
    debug_assert!(j < EXP_TABLE_SIZE);
    let (ej_lo, ej_hi) = c.exp_j(j);
    let k = k.to_u64().expect("exponent argument too large") as usize;
    if upper {
        let t = exp_taylor_upper(&s, f);
        ceil_shr(&(ej_hi * t), f) << k
    } else {
        let t = exp_taylor_lower(&s, f);
        ((ej_lo * t) >> f) << k
    }
}

/// Enclosure of `exp(y)` for `y >= 0`. Requires `f >= 8`.
pub fn exp(y: &RealInterval) -> RealInterval {
    let f = y.frac_bits;
    assert!(f >= LN_TABLE_BITS);
    let c = constants(f);
    RealInterval {
        lo: exp_point(&y.lo, f, false, &c),
        hi: exp_point(&y.hi, f, true, &c),
        frac_bits: f,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn contains(iv: &RealInterval, v: f64) -> bool {
        iv.lo_f64() <= v && v <= iv.hi_f64()
    }

    #[test]
    fn sqrt_and_roots_enclose() {
        let s = sqrt_uint(2, 64);
        assert!(contains(&s, std::f64::consts::SQRT_2));
        assert_eq!(s.width_raw(), BigUint::one());
        let exact = root_uint(&BigUint::from(27u32), 3, 40);
        assert!(exact.is_point());
        assert_eq!(exact.resolved_floor(), Some(BigUint::from(3u32)));
    }

    #[test]
    fn ln_encloses_known_values() {
        for n in [2u64, 3, 10, 255, 256, 257, 1000, 65_537, 999_983, u64::MAX / 3] {
            let iv = ln_uint(n, 96);
            let v = (n as f64).ln();
            assert!((iv.lo_f64() - v).abs() < 1e-12 && (iv.hi_f64() - v).abs() < 1e-12, "ln {n}");
            assert!(iv.width_f64() < 1e-25, "ln {n} width {}", iv.width_f64());
        }
        let ln2 = ln_uint(2, 64);
        assert!(ln2.lo_f64() <= std::f64::consts::LN_2 && std::f64::consts::LN_2 <= ln2.hi_f64() + 1e-18);
    }

    #[test]
    fn exp_encloses_known_values() {
        for v in [0.0f64, 0.5, 1.0, 2.302585092994046, 10.0, 33.3] {
            let raw = BigUint::from((v * (1u64 << 40) as f64) as u64) << 24u32;
            let y = RealInterval::new(raw.clone(), raw, 64);
            let e = exp(&y);
            let yv = y.lo_f64();
            let want = yv.exp();
            assert!(((e.lo_f64() - want) / want).abs() < 1e-14, "exp {v}");
            assert!(e.lo_raw() <= e.hi_raw());
            assert!(e.width_f64() / want < 1e-15);
        }
    }

    #[test]
    fn exp_of_ln_roundtrips_integers() {
        for n in [2u64, 7, 1234, 1 << 20] {
            let e = exp(&ln_uint(n, 128));
            assert!(e.lo_f64() <= n as f64 && n as f64 <= e.hi_f64());
            assert!(e.width_f64() < 1e-20 * n as f64);
        }
    }

    #[test]
    fn directed_mul_and_scale() {
        let a = RealInterval::new(BigUint::from(3u32), BigUint::from(5u32), 1); // [1.5, 2.5]
        let b = a.mul(&a); // [2.25, 6.25] -> [2, 6.5] at 1 bit
        assert!(b.lo_f64() <= 2.25 && b.hi_f64() >= 6.25);
        let s = a.scale(&BigUint::from(1u32), &BigUint::from(3u32));
        assert!(s.lo_f64() <= 0.5 && s.hi_f64() >= 2.5 / 3.0);
    }
}
