//! Coprime pairs and tuples of sequence terms.
//!
//! Two independent routes compute
//! `S = #{(n_1, ..., n_r) : n_i <= x, gcd([n_1^c_1], ..., [n_r^c_r]) = 1}`:
//! a direct gcd sweep and the Mobius identity
//! `S = sum_d mu(d) prod_i #{n <= x : d | [n^c_i]}` summed over squarefree `d`.

pub mod factor;
pub mod ledger;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::order::{counting_limit, OrderSpec};
use crate::psseq::sequence_values_u64;
use crate::realpow::PrecisionPolicy;

pub use factor::{FactorBudget, Factorizer};
pub use ledger::{MobiusLedger, MobiusStream};

/// Resource limits shared by the counting routes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Budget {
    /// Largest number of tuples the brute-force route will visit.
    pub max_brute_tuples: u64,
    pub precision: PrecisionPolicy,
    pub factor: FactorBudget,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_brute_tuples: 100_000_000,
            precision: PrecisionPolicy::default(),
            factor: FactorBudget::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TupleSpec {
    pub x: f64,
    /// Sorted non-decreasing.
    pub orders: Vec<OrderSpec>,
}

impl TupleSpec {
    pub fn new(x: f64, mut orders: Vec<OrderSpec>) -> Result<Self> {
        if orders.len() < 2 {
            return Err(Error::arg("a tuple needs r >= 2 orders"));
        }
        counting_limit(x)?;
        orders.sort();
        Ok(TupleSpec { x, orders })
    }

    pub fn pairs(x: f64, c: OrderSpec) -> Result<Self> {
        Self::new(x, vec![c.clone(), c])
    }

    pub fn r(&self) -> usize {
        self.orders.len()
    }

    pub fn n_max(&self) -> u64 {
        self.x.floor() as u64
    }

    /// Distinct orders with their multiplicities.
    fn grouped(&self) -> Vec<(OrderSpec, usize)> {
        let mut out: Vec<(OrderSpec, usize)> = Vec::new();
        for c in &self.orders {
            match out.last_mut() {
                Some((prev, k)) if prev == c => *k += 1,
                _ => out.push((c.clone(), 1)),
            }
        }
        out
    }
}

fn values_by_order(spec: &TupleSpec, budget: &Budget) -> Result<BTreeMap<usize, Vec<u64>>> {
    let n_max = spec.n_max();
    let mut out = BTreeMap::new();
    let mut start = 0;
    for (c, k) in spec.grouped() {
        out.insert(start, sequence_values_u64(n_max, &c, &budget.precision)?);
        start += k;
    }
    Ok(out)
}

pub fn coprime_pairs_bruteforce(x: f64, c: &OrderSpec) -> Result<u64> {
    coprime_pairs_bruteforce_with(x, c, &Budget::default())
}

/// Direct gcd over all `[x]^2` ordered pairs, using the symmetry `(m, n) <-> (n, m)`.
pub fn coprime_pairs_bruteforce_with(x: f64, c: &OrderSpec, budget: &Budget) -> Result<u64> {
    let n_max = counting_limit(x)?;
    guard(n_max, 2, budget)?;
    let v = sequence_values_u64(n_max, c, &budget.precision)?;
    let off_diagonal: u64 = (0..v.len())
        .into_par_iter()
        .map(|i| v[..i].iter().filter(|&&w| w.gcd(&v[i]) == 1).count() as u64)
        .sum();
    let diagonal = v.iter().filter(|&&w| w == 1).count() as u64;
    Ok(2 * off_diagonal + diagonal)
}

fn guard(n_max: u64, r: usize, budget: &Budget) -> Result<()> {
    let tuples = (n_max as u128).checked_pow(r as u32).unwrap_or(u128::MAX);
    if tuples > budget.max_brute_tuples as u128 {
        return Err(Error::SizeGuard(format!(
            "brute force over {n_max}^{r} tuples exceeds the limit of {}",
            budget.max_brute_tuples
        )));
    }
    Ok(())
}

/// Direct gcd over all `[x]^r` tuples.
pub fn coprime_tuples_bruteforce(spec: &TupleSpec, budget: &Budget) -> Result<u128> {
    let n_max = spec.n_max();
    guard(n_max, spec.r(), budget)?;
    let by_order = values_by_order(spec, budget)?;
    let mut slots: Vec<&[u64]> = Vec::with_capacity(spec.r());
    for (_, k) in spec.grouped() {
        let v = &by_order[&slots.len()];
        for _ in 0..k {
            slots.push(v);
        }
    }
    let n = n_max as u128;
    let rest = &slots[1..];
    Ok(slots[0].par_iter().map(|&v| count_tail(v, rest, n)).sum())
}

/// Tuples drawn from `rest` whose values are jointly coprime with `g`.
fn count_tail(g: u64, rest: &[&[u64]], n: u128) -> u128 {
    if g == 1 {
        return n.pow(rest.len() as u32);
    }
    match rest {
        [] => 0,
        [last] => last.iter().filter(|&&v| v.gcd(&g) == 1).count() as u128,
        [head, tail @ ..] => head.iter().map(|&v| count_tail(v.gcd(&g), tail, n)).sum(),
    }
}

pub fn coprime_tuples_mobius(spec: &TupleSpec) -> Result<u128> {
    coprime_tuples_mobius_with(spec, &Budget::default())
}

/// `sum_d mu(d) prod_i cnt_i(d)` from factorizations of every term.
pub fn coprime_tuples_mobius_with(spec: &TupleSpec, budget: &Budget) -> Result<u128> {
    let by_order = values_by_order(spec, budget)?;
    let ledgers = build_ledgers(&by_order, budget)?;
    let mut refs: Vec<&MobiusLedger> = Vec::with_capacity(spec.r());
    for (_, k) in spec.grouped() {
        let l = &ledgers[&refs.len()];
        for _ in 0..k {
            refs.push(l);
        }
    }
    let s = MobiusLedger::mobius_sum(&refs);
    u128::try_from(s).map_err(|_| Error::Overflow(format!("negative Mobius total {s}")))
}

fn build_ledgers(by_order: &BTreeMap<usize, Vec<u64>>, budget: &Budget) -> Result<BTreeMap<usize, MobiusLedger>> {
    let max = by_order.values().flat_map(|v| v.iter().copied()).max().unwrap_or(1);
    let factorizer = Factorizer::for_max_value(max, budget.factor);
    by_order
        .iter()
        .map(|(&slot, v)| Ok((slot, MobiusLedger::build(v, &factorizer)?)))
        .collect()
}

/// Ledger of divisor counts for a single order.
pub fn mobius_ledger(x: f64, c: &OrderSpec, budget: &Budget) -> Result<MobiusLedger> {
    let n_max = counting_limit(x)?;
    let v = sequence_values_u64(n_max, c, &budget.precision)?;
    let factorizer = Factorizer::for_max_value(v.iter().copied().max().unwrap_or(1), budget.factor);
    MobiusLedger::build(&v, &factorizer)
}

/// Exact tuple counts at every point of an increasing grid of limits, in one pass.
pub fn coprime_counts_on_grid(grid: &[u64], orders: &[OrderSpec], budget: &Budget) -> Result<Vec<u128>> {
    if grid.windows(2).any(|w| w[0] >= w[1]) || grid.first().is_some_and(|&g| g == 0) {
        return Err(Error::arg("grid must be strictly increasing and start at >= 1"));
    }
    let Some(&last) = grid.last() else { return Ok(Vec::new()) };
    let spec = TupleSpec::new(last as f64, orders.to_vec())?;
    let by_order = values_by_order(&spec, budget)?;
    let max = by_order.values().flat_map(|v| v.iter().copied()).max().unwrap_or(1);
    let factorizer = Factorizer::for_max_value(max, budget.factor);

    // Divisor lists per distinct order, computed in parallel up front.
    let divisors: BTreeMap<usize, Vec<Vec<(u64, i8)>>> = by_order
        .iter()
        .map(|(&slot, v)| {
            let d = v
                .par_iter()
                .map(|&t| factorizer.factor(t).map(|f| factor::squarefree_divisors(&f)))
                .collect::<Result<Vec<_>>>()?;
            Ok((slot, d))
        })
        .collect::<Result<_>>()?;
    let mut slot_source = Vec::with_capacity(spec.r());
    let mut start = 0;
    for (_, k) in spec.grouped() {
        slot_source.extend(std::iter::repeat_n(start, k));
        start += k;
    }

    let mut stream = MobiusStream::new(spec.r());
    let mut out = Vec::with_capacity(grid.len());
    let mut next = grid.iter().peekable();
    for n in 1..=last as usize {
        for (slot, &src) in slot_source.iter().enumerate() {
            stream.push(slot, &divisors[&src][n - 1]);
        }
        while next.peek().is_some_and(|&&g| g as usize == n) {
            next.next();
            out.push(u128::try_from(stream.total()).expect("tuple counts are non-negative"));
        }
    }
    Ok(out)
}

/// Classical count of coprime `r`-tuples of integers up to `n`, by Mobius over `d <= n`.
pub fn classical_coprime_count(n: u64, r: u32) -> i128 {
    let mu = mobius_table(n as usize);
    (1..=n as usize)
        .filter(|&d| mu[d] != 0)
        .map(|d| mu[d] as i128 * ((n as usize / d) as i128).pow(r))
        .sum()
}

/// `mu(0..=n)` by a linear sieve.
pub fn mobius_table(n: usize) -> Vec<i8> {
    let mut mu = vec![1i8; n + 1];
    let mut is_comp = vec![false; n + 1];
    let mut primes = Vec::new();
    if n >= 1 {
        mu[0] = 0;
    }
    for i in 2..=n {
        if !is_comp[i] {
            primes.push(i);
            mu[i] = -1;
        }
        for &p in &primes {
            if i * p > n {
                break;
            }
            is_comp[i * p] = true;
            if i % p == 0 {
                mu[i * p] = 0;
                break;
            }
            mu[i * p] = -mu[i];
        }
    }
    mu
}

/// Rigorous bounds `lo <= zeta(r) <= hi`, up to floating-point rounding.
///
/// Partial sum to `N` plus the integral bounds on the tail:
/// `1/((r-1)(N+1)^(r-1)) <= sum_{n>N} n^-r <= 1/((r-1) N^(r-1))`.
pub fn zeta_bounds(r: u32) -> Result<(f64, f64)> {
    if r < 2 {
        return Err(Error::arg("zeta(r) needs r >= 2"));
    }
    let rf = r as f64;
    let n_terms = (10f64.powf(14.0 / rf).ceil() as u64).clamp(16, 10_000_000);
    let partial: f64 = (1..=n_terms).rev().map(|n| (n as f64).powi(-(r as i32))).sum();
    let nf = n_terms as f64;
    let lo = partial + 1.0 / ((rf - 1.0) * (nf + 1.0).powf(rf - 1.0));
    let hi = partial + 1.0 / ((rf - 1.0) * nf.powf(rf - 1.0));
    Ok((lo, hi))
}

pub fn zeta(r: u32) -> Result<f64> {
    if r == 2 {
        return Ok(PI * PI / 6.0);
    }
    let (lo, hi) = zeta_bounds(r)?;
    Ok(0.5 * (lo + hi))
}

/// `x^r / zeta(r)`.
pub fn main_term(x: f64, r: u32) -> Result<f64> {
    Ok(x.powi(r as i32) / zeta(r)?)
}
