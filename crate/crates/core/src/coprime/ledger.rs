use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use super::factor::{squarefree_divisors, Factorizer};
use crate::error::Result;

/// Divisor counts `#{n <= x : d | v_n}` for every squarefree `d` dividing some `v_n`.
#[derive(Clone, Debug, Default, Serialize)]
pub struct MobiusLedger {
    /// `d -> (mu(d), count)`.
    entries: HashMap<u64, (i8, u64)>,
    terms: u64,
}

const CHUNK: usize = 1 << 12;

impl MobiusLedger {
    /// Factors every value and tallies its squarefree divisors.
    ///
    /// Chunks are factored in parallel and merged in chunk order.
    pub fn build(values: &[u64], factorizer: &Factorizer) -> Result<Self> {
        let partials: Vec<HashMap<u64, (i8, u64)>> = values
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut local = HashMap::new();
                for &v in chunk {
                    for (d, mu) in squarefree_divisors(&factorizer.factor(v)?) {
                        local.entry(d).or_insert((mu, 0)).1 += 1;
                    }
                }
                Ok(local)
            })
            .collect::<Result<_>>()?;
        let mut entries: HashMap<u64, (i8, u64)> = HashMap::new();
        for part in partials {
            for (d, (mu, n)) in part {
                entries.entry(d).or_insert((mu, 0)).1 += n;
            }
        }
        Ok(MobiusLedger { entries, terms: values.len() as u64 })
    }

    pub fn count(&self, d: u64) -> u64 {
        self.entries.get(&d).map_or(0, |e| e.1)
    }

    pub fn mu(&self, d: u64) -> Option<i8> {
        self.entries.get(&d).map(|e| e.0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of sequence terms tallied; equals `count(1)` when non-empty.
    pub fn terms(&self) -> u64 {
        self.terms
    }

    /// Keys in increasing order.
    pub fn keys(&self) -> Vec<u64> {
        let mut k: Vec<u64> = self.entries.keys().copied().collect();
        k.sort_unstable();
        k
    }

    /// `sum_d mu(d) prod_i cnt_i(d)` over the keys common to all ledgers.
    pub fn mobius_sum(ledgers: &[&MobiusLedger]) -> i128 {
        let Some(smallest) = ledgers.iter().min_by_key(|l| l.len()) else {
            return 0;
        };
        let mut keys: Vec<u64> = smallest.entries.keys().copied().collect();
        keys.sort_unstable();
        keys.par_chunks(CHUNK)
            .map(|ks| {
                let mut s = 0i128;
                'key: for &d in ks {
                    let mut prod = smallest.entries[&d].0 as i128;
                    for l in ledgers {
                        match l.entries.get(&d) {
                            Some(&(_, n)) => prod *= n as i128,
                            None => continue 'key,
                        }
                    }
                    s += prod;
                }
                s
            })
            .sum()
    }
}

/// Streaming form of the Mobius sum: terms of each order are appended one `n`
/// at a time and the running total is available after every step.
#[derive(Clone, Debug)]
pub struct MobiusStream {
    counts: HashMap<u64, (i8, Vec<u64>)>,
    slots: usize,
    total: i128,
}

impl MobiusStream {
    pub fn new(slots: usize) -> Self {
        MobiusStream { counts: HashMap::new(), slots, total: 0 }
    }

    /// Adds one term to `slot` given the squarefree divisors of its value.
    pub fn push(&mut self, slot: usize, divisors: &[(u64, i8)]) {
        for &(d, mu) in divisors {
            let entry = self.counts.entry(d).or_insert_with(|| (mu, vec![0; self.slots]));
            let others: i128 = entry
                .1
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != slot)
                .map(|(_, &c)| c as i128)
                .product();
            self.total += mu as i128 * others;
            entry.1[slot] += 1;
        }
    }

    pub fn total(&self) -> i128 {
        self.total
    }
}
