//! Error curves against the main terms, log-log slope fits and constant fits.

use num_integer::Integer;
use num_rational::BigRational;
use serde::Serialize;

use crate::coprime::{coprime_counts_on_grid, main_term, zeta, Budget};
use crate::error::{Error, Result};
use crate::order::{counting_limit, rational_to_f64, OrderSpec};
use crate::psseq::sequence_values;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    /// Coprime tuples against `x^r / zeta(r)`.
    Tuples,
    /// Progression counts against `x / q`.
    Progression,
    /// `#{n <= x : gcd(n, [n^c]) = 1}` against `x / zeta(2)`.
    SelfCoprime,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub x: f64,
    /// The exact count at `x`.
    pub count: f64,
    /// `|count - main term|`.
    pub observed: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorCurve {
    pub kind: CurveKind,
    pub orders: Vec<OrderSpec>,
    pub modulus: Option<u64>,
    pub residue: Option<i64>,
    pub samples: Vec<Sample>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in log space.
    pub residual_rms: f64,
    pub n_points: usize,
    /// Samples skipped because the error was exactly zero.
    pub dropped_zero: usize,
}

/// One output row: `x, observed, theoretical, ratio`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurveRow {
    pub x: f64,
    pub observed: f64,
    pub theoretical: f64,
    pub ratio: f64,
}

/// `start, start*ratio, ...` rounded to integers and capped at `end`.
pub fn geometric_grid(start: f64, end: f64, ratio: f64) -> Result<Vec<f64>> {
    if !(start >= 1.0 && end >= start && ratio > 1.0 && end.is_finite()) {
        return Err(Error::arg(format!("invalid grid {start}:{end}:{ratio}")));
    }
    let mut out: Vec<f64> = Vec::new();
    let mut x = start;
    while x <= end * (1.0 + 1e-12) {
        let v = x.round().min(end);
        if out.last().is_none_or(|&l| v > l) {
            out.push(v);
        }
        x *= ratio;
    }
    Ok(out)
}

fn check_grid(grid: &[f64]) -> Result<Vec<u64>> {
    if grid.is_empty() {
        return Err(Error::InsufficientData("empty grid".into()));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::arg("grid must be strictly increasing"));
    }
    grid.iter().map(|&x| counting_limit(x)).collect()
}

/// Exact counts at the distinct floors of the grid, mapped back to every grid point.
fn at_floors(floors: &[u64], eval: impl FnOnce(&[u64]) -> Result<Vec<f64>>) -> Result<Vec<f64>> {
    let mut distinct = floors.to_vec();
    distinct.dedup();
    let values = eval(&distinct)?;
    Ok(floors.iter().map(|f| values[distinct.binary_search(f).unwrap()]).collect())
}

/// `|S(x) - x^r / zeta(r)|` for coprime tuples of the given orders.
pub fn error_curve_tuples(grid: &[f64], orders: &[OrderSpec], budget: &Budget) -> Result<ErrorCurve> {
    let floors = check_grid(grid)?;
    let r = orders.len() as u32;
    let counts = at_floors(&floors, |d| {
        Ok(coprime_counts_on_grid(d, orders, budget)?.into_iter().map(|s| s as f64).collect())
    })?;
    let samples = grid
        .iter()
        .zip(counts)
        .map(|(&x, s)| Ok(Sample { x, count: s, observed: (s - main_term(x, r)?).abs() }))
        .collect::<Result<_>>()?;
    let mut sorted = orders.to_vec();
    sorted.sort();
    Ok(ErrorCurve { kind: CurveKind::Tuples, orders: sorted, modulus: None, residue: None, samples })
}

pub fn error_curve_pairs(grid: &[f64], c: &OrderSpec, budget: &Budget) -> Result<ErrorCurve> {
    error_curve_tuples(grid, &[c.clone(), c.clone()], budget)
}

/// `|N_c(x; a, q) - x/q|`.
pub fn error_curve_ap(grid: &[f64], a: i64, q: u64, c: &OrderSpec, budget: &Budget) -> Result<ErrorCurve> {
    if q == 0 {
        return Err(Error::arg("modulus q must be >= 1"));
    }
    let floors = check_grid(grid)?;
    let values = sequence_values(*floors.last().unwrap(), c, &budget.precision)?;
    let target = (a as i128).rem_euclid(q as i128) as u128;
    let prefix = prefix_counts(&values, |_, v| v % q as u128 == target);
    let samples = grid
        .iter()
        .zip(&floors)
        .map(|(&x, &f)| {
            let n = prefix[f as usize] as f64;
            Sample { x, count: n, observed: (n - x / q as f64).abs() }
        })
        .collect();
    Ok(ErrorCurve {
        kind: CurveKind::Progression,
        orders: vec![c.clone()],
        modulus: Some(q),
        residue: Some(a),
        samples,
    })
}

/// `|#{n <= x : gcd(n, [n^c]) = 1} - x / zeta(2)|`.
pub fn error_curve_dd(grid: &[f64], c: &OrderSpec, budget: &Budget) -> Result<ErrorCurve> {
    let floors = check_grid(grid)?;
    let values = sequence_values(*floors.last().unwrap(), c, &budget.precision)?;
    let prefix = prefix_counts(&values, |n, v| (n as u128).gcd(&v) == 1);
    let z2 = zeta(2)?;
    let samples = grid
        .iter()
        .zip(&floors)
        .map(|(&x, &f)| {
            let n = prefix[f as usize] as f64;
            Sample { x, count: n, observed: (n - x / z2).abs() }
        })
        .collect();
    Ok(ErrorCurve { kind: CurveKind::SelfCoprime, orders: vec![c.clone()], modulus: None, residue: None, samples })
}

/// `prefix[m] = #{n <= m : keep(n, [n^c])}`.
fn prefix_counts(values: &[u128], keep: impl Fn(u64, u128) -> bool) -> Vec<u64> {
    let mut prefix = Vec::with_capacity(values.len() + 1);
    prefix.push(0);
    let mut acc = 0;
    for (i, &v) in values.iter().enumerate() {
        acc += keep(i as u64 + 1, v) as u64;
        prefix.push(acc);
    }
    prefix
}

/// Least squares for `log(observed) = slope log(x) + intercept`.
pub fn fit_slope(curve: &ErrorCurve) -> Result<SlopeFit> {
    let pts: Vec<(f64, f64)> = curve
        .samples
        .iter()
        .filter(|s| s.observed > 0.0)
        .map(|s| (s.x.ln(), s.observed.ln()))
        .collect();
    let dropped_zero = curve.samples.len() - pts.len();
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "slope fit needs at least 3 nonzero errors, got {} ({dropped_zero} zero)",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("slope fit needs distinct x values".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum();
    Ok(SlopeFit { slope, intercept, residual_rms: (rss / n).sqrt(), n_points: pts.len(), dropped_zero })
}

/// Smallest `C` with `observed <= C * scale(x)` at every sample.
pub fn constant_fit_with(curve: &ErrorCurve, scale: impl Fn(f64) -> f64) -> f64 {
    curve.samples.iter().map(|s| s.observed / scale(s.x)).fold(0.0, f64::max)
}

/// Smallest `C` with `observed <= C * x^exponent` at every sample.
pub fn constant_fit(curve: &ErrorCurve, exponent: &BigRational) -> f64 {
    let e = rational_to_f64(exponent);
    constant_fit_with(curve, |x| x.powf(e))
}

/// Rows `x, observed, x^exponent, observed / x^exponent`.
pub fn curve_rows(curve: &ErrorCurve, exponent: f64) -> Vec<CurveRow> {
    curve
        .samples
        .iter()
        .map(|s| {
            let theoretical = s.x.powf(exponent);
            CurveRow { x: s.x, observed: s.observed, theoretical, ratio: s.observed / theoretical }
        })
        .collect()
}
