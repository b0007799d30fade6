//! JSON rendering: every number carries an exact form where one exists and a decimal form always.

use std::fmt::Display;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use ps_core::exponent::LogMonomial;
use ps_core::order::rational_string;
use serde_json::{json, Map, Value};

/// Fractional digits in decimal renderings of rationals.
const PLACES: usize = 20;

/// `r` rounded half away from zero to [`PLACES`] digits, trailing zeros trimmed.
pub fn decimal(r: &BigRational) -> String {
    let scale = BigInt::from(10u32).pow(PLACES as u32);
    let scaled = r.abs() * BigRational::from_integer(scale.clone());
    let mut n = scaled.floor().to_integer();
    if (scaled - BigRational::from_integer(n.clone())) * BigInt::from(2) >= BigRational::from_integer(1.into()) {
        n += 1;
    }
    let (int, frac) = (&n / &scale, &n % &scale);
    let sign = if r.is_negative() && !n.is_zero() { "-" } else { "" };
    let frac = format!("{:0>width$}", frac.to_string(), width = PLACES);
    let frac = frac.trim_end_matches('0');
    if frac.is_empty() {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac}")
    }
}

pub fn float_string(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-6..1e16).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn rational(r: &BigRational) -> Value {
    json!({ "exact": rational_string(r), "decimal": decimal(r) })
}

pub fn integer(v: impl Display) -> Value {
    let s = v.to_string();
    json!({ "exact": s.clone(), "decimal": s })
}

/// A floating-point value: no exact form.
pub fn float(v: f64) -> Value {
    json!({ "decimal": float_string(v) })
}

pub fn monomial(m: &LogMonomial) -> Value {
    let exps: Map<String, Value> = m.exponents().map(|(v, e)| (v.name().to_string(), rational(e))).collect();
    json!({
        "display": m.to_string(),
        "exponents": exps,
        "log_power": rational(&m.log_power),
    })
}
