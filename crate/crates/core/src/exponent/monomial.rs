use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::order::{rational_string, rational_to_f64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    X,
    Q,
    M,
    H,
}

impl Var {
    pub const ALL: [Var; 4] = [Var::X, Var::Q, Var::M, Var::H];

    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Q => "q",
            Var::M => "M",
            Var::H => "H",
        }
    }
}

impl FromStr for Var {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" => Ok(Var::X),
            "q" => Ok(Var::Q),
            "M" => Ok(Var::M),
            "H" => Ok(Var::H),
            _ => Err(Error::arg(format!("unknown variable `{s}` (expected x, q, M or H)"))),
        }
    }
}

impl Serialize for Var {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parses `a`, `-a`, `a/b` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let t = s.trim();
    let bad = || Error::arg(format!("`{s}` is not a rational number"));
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// `prod_v v^(e_v)`, kept in log space as a vector of exact exponents.
///
/// `log_power` records a `log(...)^e` factor that the algebra carries along but
/// never compares: it is slack, not part of the exponent.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct LogMonomial {
    exps: BTreeMap<Var, BigRational>,
    pub log_power: BigRational,
}

impl LogMonomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn var(v: Var, e: BigRational) -> Self {
        Self::one().with(v, e)
    }

    /// Builder: sets the exponent of `v`.
    pub fn with(mut self, v: Var, e: BigRational) -> Self {
        if e.is_zero() {
            self.exps.remove(&v);
        } else {
            self.exps.insert(v, e);
        }
        self
    }

    pub fn with_log(mut self, e: BigRational) -> Self {
        self.log_power = e;
        self
    }

    /// From `(name, exponent)` pairs; the name `log` sets the log annotation.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self> {
        let mut m = Self::one();
        for (k, v) in pairs {
            let e = parse_rational(v)?;
            if k == "log" {
                m.log_power += e;
            } else {
                let var: Var = k.parse()?;
                let cur = m.exp(var);
                m = m.with(var, cur + e);
            }
        }
        Ok(m)
    }

    pub fn exp(&self, v: Var) -> BigRational {
        self.exps.get(&v).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn exponents(&self) -> impl Iterator<Item = (Var, &BigRational)> {
        self.exps.iter().map(|(v, e)| (*v, e))
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty() && self.log_power.is_zero()
    }

    pub fn contains(&self, v: Var) -> bool {
        self.exps.contains_key(&v)
    }

    /// The monomial with `v` removed.
    pub fn without(&self, v: Var) -> Self {
        let mut m = self.clone();
        m.exps.remove(&v);
        m
    }

    /// Product of monomials (sum of exponent vectors).
    pub fn mul(&self, other: &Self) -> Self {
        let mut m = self.clone();
        for (v, e) in &other.exps {
            let s = m.exp(*v) + e;
            m = m.with(*v, s);
        }
        m.log_power += &other.log_power;
        m
    }

    /// `self^k`.
    pub fn pow(&self, k: &BigRational) -> Self {
        let mut m = Self::one();
        for (v, e) in &self.exps {
            m = m.with(*v, e * k);
        }
        m.log_power = &self.log_power * k;
        m
    }

    pub fn div(&self, other: &Self) -> Self {
        self.mul(&other.pow(&-BigRational::one()))
    }

    /// Replaces `v` by the monomial `by`.
    pub fn substitute(&self, v: Var, by: &Self) -> Self {
        let e = self.exp(v);
        self.without(v).mul(&by.pow(&e))
    }

    /// Log of the value, given the logs of the variables (log factors ignored).
    pub fn eval_log(&self, logs: &BTreeMap<Var, f64>) -> f64 {
        self.exps
            .iter()
            .map(|(v, e)| rational_to_f64(e) * logs.get(v).copied().unwrap_or(0.0))
            .sum()
    }

    /// Same exponents, ignoring the log annotation.
    pub fn same_power(&self, other: &Self) -> bool {
        self.exps == other.exps
    }
}

impl fmt::Display for LogMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .exps
            .iter()
            .map(|(v, e)| if e.is_one() { v.to_string() } else { format!("{v}^({})", rational_string(e)) })
            .collect();
        if !self.log_power.is_zero() {
            parts.push(format!("log^({})", rational_string(&self.log_power)));
        }
        if parts.is_empty() {
            f.write_str("1")
        } else {
            f.write_str(&parts.join(" "))
        }
    }
}

impl Serialize for LogMonomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m: BTreeMap<&str, String> =
            self.exps.iter().map(|(v, e)| (v.name(), rational_string(e))).collect();
        if !self.log_power.is_zero() {
            m.insert("log", rational_string(&self.log_power));
        }
        m.serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algebra() {
        let a = LogMonomial::from_pairs([("M", "1"), ("H", "-1")]).unwrap();
        let b = LogMonomial::from_pairs([("H", "1/2"), ("q", "-1/2"), ("log", "1")]).unwrap();
        let p = a.mul(&b);
        assert_eq!(p.exp(Var::H), rat(-1, 2));
        assert_eq!(p.log_power, rat(1, 1));
        assert_eq!(p.to_string(), "q^(-1/2) M H^(-1/2) log^(1)");
        let s = a.substitute(Var::H, &LogMonomial::from_pairs([("q", "1"), ("M", "1")]).unwrap());
        assert_eq!(s, LogMonomial::var(Var::Q, rat(-1, 1)));
        assert!(a.div(&a).is_one());
    }

    #[test]
    fn parsing() {
        assert_eq!(parse_rational(" -3/6 ").unwrap(), rat(-1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert!(LogMonomial::from_pairs([("y", "1")]).is_err());
    }
}
