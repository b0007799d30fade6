//! Minimizing the maximum of monotone monomials in one variable.
//!
//! In log coordinates every term is affine in `t = log H`, so the infimum of the
//! upper envelope is the largest of: the limits of the increasing terms at the
//! left end, the limits of the decreasing terms at the right end, and the values
//! at which an increasing term meets a decreasing one. Crossings that fall
//! outside the interval never exceed an endpoint limit, so all of them can be
//! kept symbolically.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::monomial::{LogMonomial, Var};
use crate::error::{Error, Result};
use crate::order::rational_to_f64;

/// An endpoint of the range of the optimization variable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// `0` on the left, `+inf` on the right.
    Infinite,
    /// The variable equals this monomial in the other variables.
    At(LogMonomial),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptProblem {
    pub var: Var,
    /// Terms with a positive exponent of `var`.
    pub increasing: Vec<LogMonomial>,
    /// Terms with a non-positive exponent of `var`.
    pub decreasing: Vec<LogMonomial>,
    pub lower: Bound,
    pub upper: Bound,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Source {
    LowerLimit { term: usize },
    UpperLimit { term: usize },
    /// `at` is the value of the variable where the two terms meet.
    Crossing { increasing: usize, decreasing: usize, at: LogMonomial },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Candidate {
    pub value: LogMonomial,
    pub source: Source,
}

/// The infimum is the largest candidate; which one that is depends on the sizes
/// of the remaining variables.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptOutcome {
    pub candidates: Vec<Candidate>,
}

impl OptOutcome {
    /// Candidate values with duplicates removed, in first-seen order.
    pub fn distinct_values(&self) -> Vec<LogMonomial> {
        let mut out: Vec<LogMonomial> = Vec::new();
        for c in &self.candidates {
            if !out.contains(&c.value) {
                out.push(c.value.clone());
            }
        }
        out
    }

    /// The largest candidate when the other variables have the given logs.
    pub fn dominant_at(&self, logs: &BTreeMap<Var, f64>) -> &Candidate {
        let mut best = &self.candidates[0];
        for c in &self.candidates[1..] {
            if c.value.eval_log(logs) > best.value.eval_log(logs) {
                best = c;
            }
        }
        best
    }
}

impl OptProblem {
    pub fn validate(&self) -> Result<()> {
        for (i, t) in self.increasing.iter().enumerate() {
            if !t.exp(self.var).is_positive() {
                return Err(Error::arg(format!("increasing term {i} ({t}) has no positive power of {}", self.var)));
            }
        }
        for (i, t) in self.decreasing.iter().enumerate() {
            if t.exp(self.var).is_positive() {
                return Err(Error::arg(format!("decreasing term {i} ({t}) has a positive power of {}", self.var)));
            }
        }
        for b in [&self.lower, &self.upper] {
            if let Bound::At(m) = b {
                if m.contains(self.var) {
                    return Err(Error::arg(format!("endpoint {m} depends on {}", self.var)));
                }
            }
        }
        if self.increasing.is_empty() && self.decreasing.is_empty() {
            return Err(Error::arg("problem has no terms"));
        }
        Ok(())
    }

    fn crossing(&self, f: &LogMonomial, g: &LogMonomial) -> (LogMonomial, LogMonomial) {
        let (a, b) = (f.exp(self.var), g.exp(self.var));
        let d = &a - &b;
        let (fo, go) = (f.without(self.var), g.without(self.var));
        let at = go.div(&fo).pow(&(BigRational::one() / &d));
        let value = fo.pow(&(-&b / &d)).mul(&go.pow(&(&a / &d)));
        (value, at)
    }
}

/// Exact candidate set for `inf max(terms)`.
pub fn optimize(p: &OptProblem) -> Result<OptOutcome> {
    p.validate()?;
    let mut candidates = Vec::new();
    if let Bound::At(lo) = &p.lower {
        for (i, f) in p.increasing.iter().enumerate() {
            candidates.push(Candidate { value: f.substitute(p.var, lo), source: Source::LowerLimit { term: i } });
        }
    }
    for (j, g) in p.decreasing.iter().enumerate() {
        let value = match &p.upper {
            Bound::At(hi) => g.substitute(p.var, hi),
            Bound::Infinite if g.exp(p.var).is_zero() => g.clone(),
            Bound::Infinite => continue,
        };
        candidates.push(Candidate { value, source: Source::UpperLimit { term: j } });
    }
    for (i, f) in p.increasing.iter().enumerate() {
        for (j, g) in p.decreasing.iter().enumerate() {
            let (value, at) = p.crossing(f, g);
            candidates.push(Candidate { value, source: Source::Crossing { increasing: i, decreasing: j, at } });
        }
    }
    if candidates.is_empty() {
        return Err(Error::UnboundedBelow);
    }
    Ok(OptOutcome { candidates })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NumericOpt {
    /// Log of the infimum.
    pub log_value: f64,
    /// Log of the minimizing value of the variable (an endpoint when the infimum
    /// is a limit).
    pub argmin: f64,
}

fn bound_log(b: &Bound, logs: &BTreeMap<Var, f64>, inf: f64) -> f64 {
    match b {
        Bound::Infinite => inf,
        Bound::At(m) => m.eval_log(logs),
    }
}

/// Log-space value of `max(terms)` at `log var = t`.
pub fn phi(p: &OptProblem, logs: &BTreeMap<Var, f64>, t: f64) -> f64 {
    p.increasing
        .iter()
        .chain(&p.decreasing)
        .map(|m| m.without(p.var).eval_log(logs) + rational_to_f64(&m.exp(p.var)) * t)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// The infimum for concrete values of the other variables (given as logs).
pub fn optimize_at(p: &OptProblem, logs: &BTreeMap<Var, f64>) -> Result<NumericOpt> {
    p.validate()?;
    let a = bound_log(&p.lower, logs, f64::NEG_INFINITY);
    let b = bound_log(&p.upper, logs, f64::INFINITY);
    if !(a < b) {
        return Err(Error::arg(format!("empty range: log {} in ({a}, {b})", p.var)));
    }
    let slope = |m: &LogMonomial| rational_to_f64(&m.exp(p.var));
    let rest = |m: &LogMonomial| m.without(p.var).eval_log(logs);

    let mut best = NumericOpt { log_value: f64::NEG_INFINITY, argmin: f64::NAN };
    let mut offer = |v: f64, t: f64| {
        if v > best.log_value {
            best = NumericOpt { log_value: v, argmin: t };
        }
    };
    if a.is_finite() {
        for f in &p.increasing {
            offer(rest(f) + slope(f) * a, a);
        }
    }
    for g in &p.decreasing {
        if b.is_finite() {
            offer(rest(g) + slope(g) * b, b);
        } else if slope(g) == 0.0 {
            offer(rest(g), b);
        }
    }
    for f in &p.increasing {
        for g in &p.decreasing {
            let t = (rest(g) - rest(f)) / (slope(f) - slope(g));
            offer(rest(f) + slope(f) * t, t.clamp(a, b));
        }
    }
    if best.log_value == f64::NEG_INFINITY {
        return Err(Error::UnboundedBelow);
    }
    Ok(best)
}

/// The block problem in `H` for counting `[n^c]` in a progression mod `q` over `(M, 2M]`.
///
/// Terms: `M H^-1`, `(H/q)^(1/(2^k-2)) M^(1+(c-k)/(2^k-2))`,
/// `M^(1-c) q H^-1 log(qM+2)` and `M^(1-c) log(q+2)`, with `0 < H <= qM`.
pub fn ap_block_problem(k: u32, c: &BigRational) -> Result<OptProblem> {
    if !(2..=62).contains(&k) {
        return Err(Error::arg(format!("derivative order k = {k} outside 2..=62")));
    }
    let one = BigRational::one();
    let alpha = BigRational::new(1.into(), ((1i64 << k) - 2).into());
    let vdc = LogMonomial::one()
        .with(Var::H, alpha.clone())
        .with(Var::Q, -alpha.clone())
        .with(Var::M, &one + (c - BigRational::from_integer(k.into())) * &alpha);
    let trivial = LogMonomial::one().with(Var::M, one.clone()).with(Var::H, -one.clone());
    let tail = LogMonomial::one()
        .with(Var::M, &one - c)
        .with(Var::Q, one.clone())
        .with(Var::H, -one.clone())
        .with_log(one.clone());
    let constant = LogMonomial::one().with(Var::M, &one - c).with_log(one.clone());
    Ok(OptProblem {
        var: Var::H,
        increasing: vec![vdc],
        decreasing: vec![trivial, tail, constant],
        lower: Bound::Infinite,
        upper: Bound::At(LogMonomial::one().with(Var::Q, one.clone()).with(Var::M, one)),
    })
}

/// The `(M, q)` exponents of the leading candidate of [`ap_block_problem`] for large `M`
/// and `q = 1`.
pub fn ap_block_exponents(k: u32, c: &BigRational) -> Result<(BigRational, BigRational)> {
    let outcome = optimize(&ap_block_problem(k, c)?)?;
    let logs = BTreeMap::from([(Var::M, 1e6), (Var::Q, 0.0)]);
    let lead = &outcome.dominant_at(&logs).value;
    Ok((lead.exp(Var::M), lead.exp(Var::Q)))
}
