//! Factorization of sequence values.
//!
//! Small values come from a smallest-prime-factor table; larger ones go through
//! trial division by sieved primes followed by deterministic Miller-Rabin and
//! Brent's variant of Pollard rho with a fixed seed schedule, so every run factors
//! the same way.

use num_integer::Roots;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FactorBudget {
    /// Trial division uses primes up to this bound.
    pub trial_limit: u64,
    /// Maximum rho iterations per attempt.
    pub rho_iterations: u64,
    /// Number of rho attempts (polynomial constants 1, 2, ...).
    pub rho_attempts: u64,
    /// Values up to this bound are factored through a smallest-prime-factor table.
    pub table_limit: u64,
}

impl Default for FactorBudget {
    fn default() -> Self {
        FactorBudget {
            trial_limit: 1_000_000,
            rho_iterations: 1 << 22,
            rho_attempts: 16,
            table_limit: 1 << 23,
        }
    }
}

pub fn primes_up_to(n: u64) -> Vec<u32> {
    let n = n as usize;
    if n < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u32);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic primality test for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let d = (n - 1) >> (n - 1).trailing_zeros();
    let s = (n - 1).trailing_zeros();
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Brent's cycle-finding rho for `x -> x^2 + c mod n`, seed 2.
fn rho_brent(n: u64, c: u64, max_iters: u64) -> Option<u64> {
    let f = |x: u64| (mul_mod(x, x, n) + c) % n;
    let (mut y, mut r, mut q) = (2u64, 1u64, 1u64);
    let (mut x, mut ys);
    let mut g = 1;
    let mut iters = 0u64;
    const BATCH: u64 = 128;
    loop {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        while k < r && g == 1 {
            ys = y;
            for _ in 0..BATCH.min(r - k) {
                y = f(y);
                q = mul_mod(q, x.abs_diff(y), n);
            }
            g = gcd(q, n);
            k += BATCH;
            if g == n {
                // Backtrack one step at a time from the saved point.
                loop {
                    ys = f(ys);
                    g = gcd(x.abs_diff(ys), n);
                    if g > 1 {
                        break;
                    }
                }
            }
        }
        iters += r;
        r *= 2;
        if g != 1 || iters > max_iters {
            break;
        }
    }
    (g > 1 && g < n).then_some(g)
}

pub struct Factorizer {
    budget: FactorBudget,
    primes: Vec<u32>,
    spf: Vec<u32>,
}

impl Factorizer {
    /// Prepares tables sized for values up to `max_value`.
    pub fn for_max_value(max_value: u64, budget: FactorBudget) -> Self {
        let table_len = if max_value <= budget.table_limit { max_value } else { 0 };
        let spf = if table_len > 0 { spf_table(table_len as usize) } else { Vec::new() };
        let trial = budget.trial_limit.min(max_value.sqrt() + 1);
        let primes = if table_len > 0 { Vec::new() } else { primes_up_to(trial) };
        Factorizer { budget, primes, spf }
    }

    /// Prime factorization as `(prime, exponent)` pairs in increasing prime order.
    pub fn factor(&self, v: u64) -> Result<Vec<(u64, u32)>> {
        let mut out = Vec::new();
        if v <= 1 {
            return Ok(out);
        }
        if (v as usize) < self.spf.len() {
            let mut rem = v as usize;
            while rem > 1 {
                let p = self.spf[rem] as usize;
                let mut e = 0;
                while rem.is_multiple_of(p) {
                    rem /= p;
                    e += 1;
                }
                out.push((p as u64, e));
            }
            return Ok(out);
        }
        let mut rem = v;
        for (i, &p) in self.primes.iter().enumerate() {
            let p = p as u64;
            if p * p > rem {
                break;
            }
            if rem.is_multiple_of(p) {
                let mut e = 0;
                while rem.is_multiple_of(p) {
                    rem /= p;
                    e += 1;
                }
                out.push((p, e));
            }
            // A large prime cofactor would otherwise cost a full trial sweep.
            if i == 168 && is_prime(rem) {
                break;
            }
        }
        if rem > 1 {
            let last = self.primes.last().copied().unwrap_or(1) as u64;
            if last * last >= rem || is_prime(rem) {
                out.push((rem, 1));
            } else {
                let mut big = Vec::new();
                self.split(rem, &mut big)?;
                big.sort_unstable();
                for p in big {
                    match out.last_mut() {
                        Some((q, e)) if *q == p => *e += 1,
                        _ => out.push((p, 1)),
                    }
                }
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    fn split(&self, n: u64, acc: &mut Vec<u64>) -> Result<()> {
        if n == 1 {
            return Ok(());
        }
        if is_prime(n) {
            acc.push(n);
            return Ok(());
        }
        let r = n.sqrt();
        if r * r == n {
            self.split(r, acc)?;
            return self.split(r, acc);
        }
        for c in 1..=self.budget.rho_attempts {
            if let Some(d) = rho_brent(n, c, self.budget.rho_iterations) {
                self.split(d, acc)?;
                return self.split(n / d, acc);
            }
        }
        Err(Error::Factorization { value: n })
    }
}

fn spf_table(n: usize) -> Vec<u32> {
    let mut spf = vec![0u32; n + 1];
    for i in 2..=n {
        if spf[i] == 0 {
            let mut j = i;
            while j <= n {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    spf
}

/// `tau(v)` from a factorization.
pub fn divisor_count(factors: &[(u64, u32)]) -> u64 {
    factors.iter().map(|&(_, e)| e as u64 + 1).product()
}

/// All squarefree divisors with their Mobius signs, `1` first.
pub fn squarefree_divisors(factors: &[(u64, u32)]) -> Vec<(u64, i8)> {
    let mut out = Vec::with_capacity(1 << factors.len());
    out.push((1u64, 1i8));
    for &(p, _) in factors {
        for i in 0..out.len() {
            let (d, mu) = out[i];
            out.push((d * p, -mu));
        }
    }
    out
}
