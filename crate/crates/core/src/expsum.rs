//! Exponential sums over `[n^c]`-type phases and the two analytic bounds they feed.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::order::OrderSpec;
use crate::realpow::{frac_enclosure, PrecisionPolicy};

pub const DEFAULT_PHASE_EPS: f64 = 1e-12;
pub const MAX_SUM_TERMS: u64 = 100_000_000;

const CHUNK: u64 = 1 << 12;

/// The range `M < n <= M2` with `M <= M2 <= 2M`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DyadicBlock {
    pub m: f64,
    pub m2: f64,
}

impl DyadicBlock {
    pub fn new(m: f64, m2: f64) -> Result<Self> {
        if !(m >= 1.0 && m.is_finite()) {
            return Err(Error::arg(format!("block start M must be >= 1, got {m}")));
        }
        if !(m <= m2 && m2 <= 2.0 * m) {
            return Err(Error::arg(format!("block end must satisfy M <= M' <= 2M, got ({m}, {m2}]")));
        }
        Ok(DyadicBlock { m, m2 })
    }

    /// The `k`-th block `(M_k, M_{k+1}]` of the range `n <= x`, with `M_k = min(2^k, x)`.
    pub fn dyadic(k: u32, x: f64) -> Result<Self> {
        let mk = |j: u32| 2f64.powi(j as i32).min(x);
        Self::new(mk(k), mk(k + 1))
    }

    /// Every non-empty dyadic block covering `1 < n <= x`.
    pub fn cover(x: f64) -> Result<Vec<Self>> {
        let mut out = Vec::new();
        let mut k = 0;
        while 2f64.powi(k as i32) < x {
            out.push(Self::dyadic(k, x)?);
            k += 1;
        }
        Ok(out)
    }

    /// Integers `n` with `M < n <= M2`.
    pub fn range(&self) -> std::ops::RangeInclusive<u64> {
        (self.m.floor() as u64 + 1)..=(self.m2.floor() as u64)
    }

    pub fn len(&self) -> u64 {
        (self.m2.floor() - self.m.floor()) as u64
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Phase `f(n) = h n^c / q`, optionally negated.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseParams {
    pub h: u64,
    pub q: u64,
    pub c: OrderSpec,
    pub negate: bool,
}

impl PhaseParams {
    pub fn new(h: u64, q: u64, c: OrderSpec) -> Result<Self> {
        if h == 0 || q == 0 {
            return Err(Error::arg("phase needs h, q >= 1"));
        }
        Ok(PhaseParams { h, q, c, negate: false })
    }

    pub fn negated(mut self) -> Self {
        self.negate = !self.negate;
        self
    }
}

/// `e(t) = exp(2 pi i t)`.
pub fn e(t: f64) -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::TAU * t)
}

/// Balanced pairwise sum; the association order depends only on the length.
pub fn pairwise_sum(xs: &[Complex64]) -> Complex64 {
    match xs.len() {
        0 => Complex64::zero(),
        1 => xs[0],
        n => pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..]),
    }
}

/// `sum_{M < n <= M2} e(h n^c / q)` with every phase resolved to `eps`.
pub fn weyl_sum(block: &DyadicBlock, p: &PhaseParams, eps: f64) -> Result<Complex64> {
    weyl_sum_with(block, p, eps, &PrecisionPolicy::default())
}

pub fn weyl_sum_with(block: &DyadicBlock, p: &PhaseParams, eps: f64, policy: &PrecisionPolicy) -> Result<Complex64> {
    let len = block.len();
    if len > MAX_SUM_TERMS {
        return Err(Error::SizeGuard(format!("{len} terms exceeds the limit of {MAX_SUM_TERMS}")));
    }
    let start = *block.range().start();
    let sign = if p.negate { -1.0 } else { 1.0 };
    let chunks = len.div_ceil(CHUNK);
    let partial: Vec<Complex64> = (0..chunks)
        .into_par_iter()
        .map(|i| {
            let lo = start + i * CHUNK;
            let hi = (lo + CHUNK).min(start + len);
            let terms: Vec<Complex64> = (lo..hi)
                .map(|n| frac_enclosure(n, p.h, p.q, &p.c, eps, policy).map(|f| e(sign * f.value)))
                .collect::<Result<_>>()?;
            Ok(pairwise_sum(&terms))
        })
        .collect::<Result<_>>()?;
    Ok(pairwise_sum(&partial))
}

/// `F^(1/(2^k-2)) N^(1 - k/(2^k-2)) + N/F`, without the implicit constant.
pub fn vdc_bound(f: f64, n: f64, k: u32) -> Result<f64> {
    if !(f > 0.0) || !(n >= 1.0) {
        return Err(Error::arg(format!("need F > 0 and N >= 1, got F = {f}, N = {n}")));
    }
    if !(2..=62).contains(&k) {
        return Err(Error::arg(format!("derivative order k = {k} outside 2..=62")));
    }
    let d = 2f64.powi(k as i32) - 2.0;
    Ok(f.powf(1.0 / d) * n.powf(1.0 - k as f64 / d) + n / f)
}

/// `F = h M^c / q`.
pub fn phase_scale(p: &PhaseParams, m: f64) -> f64 {
    p.h as f64 * m.powf(p.c.to_f64()) / p.q as f64
}

/// `(c)_r = c (c-1) ... (c-r+1)`.
pub fn falling_product(c: &OrderSpec, r: u32) -> f64 {
    let c = c.to_f64();
    (0..r).map(|i| c - i as f64).product()
}

pub fn falling_product_exact(c: &BigRational, r: u32) -> BigRational {
    (0..r).fold(BigRational::one(), |acc, i| acc * (c - BigRational::from_integer(i.into())))
}

/// Smallest `A >= 1` with `A^-1 F M^-r <= |f^(r)(t)| <= A F M^-r` for `t` in `[M, 2M]`.
///
/// `None` when `(c)_r = 0`, i.e. the derivative vanishes identically.
pub fn derivative_constant(c: &OrderSpec, r: u32) -> Option<f64> {
    let fr = falling_product(c, r).abs();
    if fr == 0.0 {
        return None;
    }
    // |f^(r)(t)| = F M^-r |(c)_r| (t/M)^(c-r), and (t/M)^(c-r) lies between 1 and 2^(c-r).
    let s = 2f64.powf(c.to_f64() - r as f64);
    let (lo, hi) = (fr * s.min(1.0), fr * s.max(1.0));
    Some(hi.max(1.0 / lo).max(1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EtBoundInput {
    /// The points `x_n`; only their fractional parts matter.
    pub points: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub h_cut: f64,
}

impl EtBoundInput {
    pub fn new(points: Vec<f64>, alpha: f64, beta: f64, h_cut: f64) -> Result<Self> {
        if !(0.0 <= alpha && alpha <= beta && beta <= 1.0) {
            return Err(Error::arg(format!("need 0 <= alpha <= beta <= 1, got [{alpha}, {beta})")));
        }
        if !(h_cut > 0.0 && h_cut.is_finite()) {
            return Err(Error::arg("H must be a positive real"));
        }
        Ok(EtBoundInput { points, alpha, beta, h_cut })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EtSides {
    /// `|#{n : {x_n} in [alpha, beta)} - (beta - alpha) N|`.
    pub lhs: f64,
    /// `N/H + sum_{h <= H} (1/H + min(beta - alpha, 1/h)) |sum_n e(h x_n)|`.
    pub rhs: f64,
}

impl EtSides {
    pub fn ratio(&self) -> f64 {
        self.lhs / self.rhs
    }
}

fn frac(t: f64) -> f64 {
    t - t.floor()
}

fn et_combine(fracs: &[f64], alpha: f64, beta: f64, h_cut: f64, sums: &[f64]) -> EtSides {
    let n = fracs.len() as f64;
    let inside = fracs.iter().filter(|&&t| alpha <= t && t < beta).count() as f64;
    let width = beta - alpha;
    let rhs = n / h_cut
        + sums
            .iter()
            .enumerate()
            .map(|(i, s)| (1.0 / h_cut + width.min(1.0 / (i + 1) as f64)) * s)
            .sum::<f64>();
    EtSides { lhs: (inside - width * n).abs(), rhs }
}

/// Both sides of the discrepancy inequality for an explicit point set.
pub fn et_sides(input: &EtBoundInput) -> EtSides {
    let fracs: Vec<f64> = input.points.iter().map(|&t| frac(t)).collect();
    let h_max = input.h_cut.floor() as u64;
    let sums: Vec<f64> = (1..=h_max)
        .map(|h| {
            let terms: Vec<Complex64> = fracs.iter().map(|&t| e(frac(h as f64 * t))).collect();
            pairwise_sum(&terms).norm()
        })
        .collect();
    et_combine(&fracs, input.alpha, input.beta, input.h_cut, &sums)
}

/// [`et_sides`] for the points `x_n = n^c / q`, `n <= N`, with every exponential
/// sum evaluated from certified phases.
pub fn et_sides_ps(n_max: u64, c: &OrderSpec, q: u64, alpha: f64, beta: f64, h_cut: f64) -> Result<EtSides> {
    et_sides_ps_with(n_max, c, q, alpha, beta, h_cut, &PrecisionPolicy::default())
}

pub fn et_sides_ps_with(
    n_max: u64,
    c: &OrderSpec,
    q: u64,
    alpha: f64,
    beta: f64,
    h_cut: f64,
    policy: &PrecisionPolicy,
) -> Result<EtSides> {
    EtBoundInput::new(Vec::new(), alpha, beta, h_cut)?;
    if n_max == 0 || q == 0 {
        return Err(Error::arg("need N, q >= 1"));
    }
    let h_max = h_cut.floor() as u64;
    // {h t} = {h {t}} for integer h, so one phase per n resolved to eps / H
    // gives every {h n^c / q} to within eps.
    let eps = DEFAULT_PHASE_EPS / h_max.max(1) as f64;
    let fracs: Vec<f64> = (1..=n_max)
        .into_par_iter()
        .map(|n| frac_enclosure(n, 1, q, c, eps, policy).map(|f| f.value))
        .collect::<Result<_>>()?;
    let sums: Vec<f64> = (1..=h_max)
        .into_par_iter()
        .map(|h| {
            let terms: Vec<Complex64> = fracs.iter().map(|&t| e(frac(h as f64 * t))).collect();
            pairwise_sum(&terms).norm()
        })
        .collect();
    Ok(et_combine(&fracs, alpha, beta, h_cut, &sums))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(s: &str) -> OrderSpec {
        s.parse().unwrap()
    }

    #[test]
    fn integral_phases_count_terms() {
        let p = PhaseParams::new(1, 1, o("1")).unwrap();
        let b = DyadicBlock::new(10.0, 17.5).unwrap();
        assert_eq!(weyl_sum(&b, &p, 1e-12).unwrap(), Complex64::new(7.0, 0.0));
        let p = PhaseParams::new(3, 1, o("2")).unwrap();
        let b = DyadicBlock::new(100.0, 200.0).unwrap();
        assert_eq!(weyl_sum(&b, &p, 1e-12).unwrap(), Complex64::new(100.0, 0.0));
    }

    #[test]
    fn single_term_block() {
        // Only n = 2: e(2 * 2^(3/2)) = e(4 sqrt 2).
        let p = PhaseParams::new(2, 1, o("3/2")).unwrap();
        let s = weyl_sum(&DyadicBlock::new(1.0, 2.0).unwrap(), &p, 1e-12).unwrap();
        let t = 4.0 * std::f64::consts::SQRT_2;
        assert!((s - e(t - t.floor())).norm() < 1e-11);
    }

    #[test]
    fn negation_conjugates() {
        let p = PhaseParams::new(3, 7, o("sqrt:3")).unwrap();
        let b = DyadicBlock::new(64.0, 128.0).unwrap();
        let s = weyl_sum(&b, &p, 1e-12).unwrap();
        let t = weyl_sum(&b, &p.clone().negated(), 1e-12).unwrap();
        assert!((s.conj() - t).norm() < 1e-9);
        assert!(s.norm() <= b.len() as f64);
    }

    #[test]
    fn block_validation() {
        assert!(DyadicBlock::new(0.5, 1.0).is_err());
        assert!(DyadicBlock::new(4.0, 9.0).is_err());
        let blocks = DyadicBlock::cover(10.0).unwrap();
        let total: u64 = blocks.iter().map(DyadicBlock::len).sum();
        assert_eq!(total, 9);
        assert_eq!(blocks.last().unwrap().m2, 10.0);
    }

    #[test]
    fn bound_substitution() {
        let n = 1000.0;
        assert!((vdc_bound(n, n, 2).unwrap() - (n.sqrt() + 1.0)).abs() < 1e-9);
        assert!((vdc_bound(1.0, 100.0, 3).unwrap() - 110.0).abs() < 1e-9);
        assert!(vdc_bound(0.0, 10.0, 2).is_err());
        assert!(vdc_bound(1.0, 10.0, 1).is_err());
    }

    #[test]
    fn scale_and_falling_product() {
        assert_eq!(phase_scale(&PhaseParams::new(1, 1, o("3/2")).unwrap(), 1.0), 1.0);
        assert!((phase_scale(&PhaseParams::new(2, 4, o("3/2")).unwrap(), 4.0) - 4.0).abs() < 1e-12);
        let c = o("3/2");
        assert_eq!(falling_product(&c, 1), 1.5);
        assert_eq!(falling_product(&c, 2), 0.75);
        assert_eq!(falling_product(&c, 3), -0.375);
        let exact = falling_product_exact(&c.to_big_rational().unwrap(), 3);
        assert_eq!(exact, BigRational::new((-3).into(), 8.into()));
        assert_eq!(derivative_constant(&o("2"), 3), None);
    }

    #[test]
    fn derivative_sizes_within_constant() {
        let c = o("3/2");
        let (h, q, m) = (3.0, 7.0, 50.0f64);
        let f = h * m.powf(1.5) / q;
        for r in 1..=4 {
            let a = derivative_constant(&c, r).unwrap();
            let fr = falling_product(&c, r);
            for i in 0..=100 {
                let t = m * (1.0 + i as f64 / 100.0);
                let d = (h / q * fr * t.powf(1.5 - r as f64)).abs();
                let base = f * m.powi(-(r as i32));
                assert!(d >= base / a * (1.0 - 1e-12) && d <= base * a * (1.0 + 1e-12), "r = {r}, t = {t}");
            }
        }
    }

    #[test]
    fn et_examples() {
        let pts: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin()).collect();
        let full = et_sides(&EtBoundInput::new(pts, 0.0, 1.0, 4.0).unwrap());
        assert_eq!(full.lhs, 0.0);
        let n = 40.0;
        let zeros = et_sides(&EtBoundInput::new(vec![0.0; 40], 0.0, 0.5, 1.0).unwrap());
        assert_eq!(zeros.lhs, n / 2.0);
        assert!((zeros.rhs - (n + 1.5 * n)).abs() < 1e-9);
        let tiny = et_sides(&EtBoundInput::new(vec![0.0; 40], 0.0, 0.5, 0.5).unwrap());
        assert_eq!(tiny.rhs, n / 0.5);
    }

    #[test]
    fn ps_et_matches_generic() {
        let c = o("3/2");
        let ps = et_sides_ps(300, &c, 3, 0.1, 0.6, 5.0).unwrap();
        let pts: Vec<f64> = (1..=300).map(|n: u64| (n as f64).powf(1.5) / 3.0).collect();
        let generic = et_sides(&EtBoundInput::new(pts, 0.1, 0.6, 5.0).unwrap());
        assert!((ps.lhs - generic.lhs).abs() < 1e-9);
        assert!((ps.rhs - generic.rhs).abs() < 1e-6 * generic.rhs);
    }
}
