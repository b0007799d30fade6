//! Counting `[n^c]` in residue classes.

use std::collections::BTreeMap;

use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;

use crate::coprime::factor::{divisor_count as tau, FactorBudget, Factorizer};
use crate::error::{Error, Result};
use crate::order::{counting_limit, OrderSpec};
use crate::realpow::{floor_pow_with, PrecisionPolicy};

const CHUNK: u64 = 1 << 12;

/// `[n^c]` for `n = 1..=n_max`, in order.
pub fn sequence_values(n_max: u64, c: &OrderSpec, policy: &PrecisionPolicy) -> Result<Vec<u128>> {
    (1..=n_max)
        .into_par_iter()
        .map(|n| floor_pow_with(n, c, policy).map(|f| f.value))
        .collect()
}

/// As [`sequence_values`], rejecting values that do not fit in 64 bits.
pub fn sequence_values_u64(n_max: u64, c: &OrderSpec, policy: &PrecisionPolicy) -> Result<Vec<u64>> {
    sequence_values(n_max, c, policy)?
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            u64::try_from(v)
                .map_err(|_| Error::Overflow(format!("[{}^{c}] = {v} exceeds 64 bits", i + 1)))
        })
        .collect()
}

/// Sums `f(n)` over `1..=n_max` in fixed chunks so the result does not depend
/// on the worker count.
fn chunked_sum<F>(n_max: u64, f: F) -> Result<u64>
where
    F: Fn(u64) -> Result<u64> + Sync,
{
    let chunks = n_max.div_ceil(CHUNK);
    let partial: Vec<u64> = (0..chunks)
        .into_par_iter()
        .map(|i| {
            let lo = i * CHUNK + 1;
            let hi = ((i + 1) * CHUNK).min(n_max);
            (lo..=hi).try_fold(0u64, |acc, n| Ok(acc + f(n)?))
        })
        .collect::<Result<_>>()?;
    Ok(partial.iter().sum())
}

fn check_modulus(q: u64) -> Result<()> {
    if q == 0 {
        return Err(Error::arg("modulus q must be >= 1"));
    }
    Ok(())
}

/// `N_c(x; a, q) = #{n <= x : [n^c] = a (mod q)}`.
pub fn count_ap(x: f64, a: i64, q: u64, c: &OrderSpec) -> Result<u64> {
    count_ap_with(x, a, q, c, &PrecisionPolicy::default())
}

pub fn count_ap_with(x: f64, a: i64, q: u64, c: &OrderSpec, policy: &PrecisionPolicy) -> Result<u64> {
    check_modulus(q)?;
    let n_max = counting_limit(x)?;
    let a = (a as i128).rem_euclid(q as i128) as u128;
    if q == 1 {
        return Ok(n_max);
    }
    let q = q as u128;
    chunked_sum(n_max, |n| Ok((floor_pow_with(n, c, policy)?.value % q == a) as u64))
}

/// Counts by residue; dense when `q <= [x]`, sparse otherwise.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidueCounts {
    Dense(Vec<u64>),
    Sparse(BTreeMap<u64, u64>),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidueProfile {
    pub x: f64,
    pub q: u64,
    pub counts: ResidueCounts,
}

impl ResidueProfile {
    pub fn get(&self, a: i64) -> u64 {
        let a = (a as i128).rem_euclid(self.q as i128) as u64;
        match &self.counts {
            ResidueCounts::Dense(v) => v[a as usize],
            ResidueCounts::Sparse(m) => m.get(&a).copied().unwrap_or(0),
        }
    }

    pub fn total(&self) -> u64 {
        match &self.counts {
            ResidueCounts::Dense(v) => v.iter().sum(),
            ResidueCounts::Sparse(m) => m.values().sum(),
        }
    }

    /// Residues with a nonzero count, in increasing order.
    pub fn nonzero(&self) -> Vec<(u64, u64)> {
        match &self.counts {
            ResidueCounts::Dense(v) => v
                .iter()
                .enumerate()
                .filter(|(_, &n)| n > 0)
                .map(|(a, &n)| (a as u64, n))
                .collect(),
            ResidueCounts::Sparse(m) => m.iter().map(|(&a, &n)| (a, n)).collect(),
        }
    }
}

pub fn residue_profile(x: f64, q: u64, c: &OrderSpec) -> Result<ResidueProfile> {
    residue_profile_with(x, q, c, &PrecisionPolicy::default())
}

pub fn residue_profile_with(x: f64, q: u64, c: &OrderSpec, policy: &PrecisionPolicy) -> Result<ResidueProfile> {
    check_modulus(q)?;
    let n_max = counting_limit(x)?;
    let values = sequence_values(n_max, c, policy)?;
    Ok(profile_from_values(x, q, &values))
}

/// Builds the profile of the first `[x]` entries of a precomputed sequence.
pub fn profile_from_values(x: f64, q: u64, values: &[u128]) -> ResidueProfile {
    let n_max = (x.floor() as usize).min(values.len());
    let values = &values[..n_max];
    let counts = if q <= n_max as u64 {
        let mut v = vec![0u64; q as usize];
        for &t in values {
            v[(t % q as u128) as usize] += 1;
        }
        ResidueCounts::Dense(v)
    } else {
        let mut m = BTreeMap::new();
        for &t in values {
            *m.entry((t % q as u128) as u64).or_insert(0) += 1;
        }
        ResidueCounts::Sparse(m)
    };
    ResidueProfile { x, q, counts }
}

/// `#{n <= x : d | [n^c]}`.
pub fn divisor_count(x: f64, d: u64, c: &OrderSpec) -> Result<u64> {
    count_ap(x, 0, d, c)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApErrorReport {
    pub count: u64,
    /// `|N_c(x; a, q) - x/q|`.
    pub observed: f64,
    /// `x^(1 - (k-c)/(2^k-1)) q^(-1/(2^k-1))`.
    pub theoretical: f64,
    pub k: u32,
}

pub fn ap_error_report(x: f64, a: i64, q: u64, c: &OrderSpec, k: u32) -> Result<ApErrorReport> {
    ap_error_report_with(x, a, q, c, k, &PrecisionPolicy::default())
}

pub fn ap_error_report_with(
    x: f64,
    a: i64,
    q: u64,
    c: &OrderSpec,
    k: u32,
    policy: &PrecisionPolicy,
) -> Result<ApErrorReport> {
    check_modulus(q)?;
    counting_limit(x)?;
    if k == 0 {
        return Err(Error::arg("derivative order k must be >= 1"));
    }
    let cf = c.to_f64();
    if q as f64 > x.powf(cf) * (1.0 + 1e-12) {
        return Err(Error::arg(format!("modulus q = {q} exceeds x^c = {:e}", x.powf(cf))));
    }
    let count = count_ap_with(x, a, q, c, policy)?;
    let denom = (2f64).powi(k as i32) - 1.0;
    let theoretical = x.powf(1.0 - (k as f64 - cf) / denom) * (q as f64).powf(-1.0 / denom);
    Ok(ApErrorReport { count, observed: (count as f64 - x / q as f64).abs(), theoretical, k })
}

/// `#{n <= x : gcd(n, [n^c]) = 1}`.
pub fn dd_coprime_count(x: f64, c: &OrderSpec) -> Result<u64> {
    dd_coprime_count_with(x, c, &PrecisionPolicy::default())
}

pub fn dd_coprime_count_with(x: f64, c: &OrderSpec, policy: &PrecisionPolicy) -> Result<u64> {
    let n_max = counting_limit(x)?;
    chunked_sum(n_max, |n| {
        let v = floor_pow_with(n, c, policy)?.value;
        Ok(((n as u128).gcd(&v) == 1) as u64)
    })
}

/// `sum_{n <= x} tau([n^c])`.
pub fn tau_sum(x: f64, c: &OrderSpec) -> Result<u64> {
    tau_sum_with(x, c, &PrecisionPolicy::default(), FactorBudget::default())
}

pub fn tau_sum_with(x: f64, c: &OrderSpec, policy: &PrecisionPolicy, budget: FactorBudget) -> Result<u64> {
    let n_max = counting_limit(x)?;
    let values = sequence_values_u64(n_max, c, policy)?;
    let max = values.iter().copied().max().unwrap_or(1);
    let factorizer = Factorizer::for_max_value(max, budget);
    let parts: Vec<u64> = values
        .par_chunks(CHUNK as usize)
        .map(|chunk| chunk.iter().try_fold(0u64, |acc, &v| Ok(acc + tau(&factorizer.factor(v)?))))
        .collect::<Result<_>>()?;
    Ok(parts.iter().sum())
}
