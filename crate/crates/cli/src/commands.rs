use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};
use ps_core::analysis::{self, CurveKind, ErrorCurve, Sample};
use ps_core::coprime::{self, TupleSpec};
use ps_core::exponent::optimize::{ap_block_problem, Source};
use ps_core::exponent::{self as ex, parse_rational, Bound, LogMonomial, OptProblem, Var};
use ps_core::expsum::{self, DyadicBlock, EtBoundInput, PhaseParams};
use ps_core::order::rational_to_f64;
use ps_core::psseq::{self, ResidueCounts};
use ps_core::realpow::{floor_pow_with, frac_enclosure};
use ps_core::OrderSpec;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::render::{self, float, integer, rational};
use crate::{Body, CliError, Command, Ctx, Format, Reply, Route};

type Out = Result<Reply, CliError>;

fn echo<T: Serialize>(args: &T) -> Value {
    serde_json::to_value(args).expect("arguments serialize")
}

pub fn dispatch(ctx: &Ctx, cmd: &Command) -> Result<(&'static str, Value, Reply), CliError> {
    use Command::*;
    let (name, input, reply) = match cmd {
        Floor(a) => ("floor", echo(a), floor(ctx, a)?),
        Frac(a) => ("frac", echo(a), frac(ctx, a)?),
        CountAp(a) => ("count-ap", echo(a), count_ap(ctx, a)?),
        ResidueProfile(a) => ("residue-profile", echo(a), residue_profile(ctx, a)?),
        DivisorCount(a) => ("divisor-count", echo(a), divisor_count(ctx, a)?),
        ApError(a) => ("ap-error", echo(a), ap_error(ctx, a)?),
        CoprimePairs(a) => ("coprime-pairs", echo(a), coprime_pairs(ctx, a)?),
        CoprimeTuples(a) => ("coprime-tuples", echo(a), coprime_tuples(ctx, a)?),
        DdCount(a) => ("dd-count", echo(a), dd_count(ctx, a)?),
        TauSum(a) => ("tau-sum", echo(a), tau_sum(ctx, a)?),
        Zeta(a) => ("zeta", echo(a), zeta(a)?),
        WeylSum(a) => ("weyl-sum", echo(a), weyl_sum(ctx, a)?),
        VdcBound(a) => ("vdc-bound", echo(a), vdc_bound(a)?),
        EtSides(a) => ("et-sides", echo(a), et_sides(ctx, a)?),
        Optimize(a) => ("optimize", echo(a), optimize(a)?),
        ApExponent(a) => ("ap-exponent", echo(a), ap_exponent(a)?),
        BestK(a) => ("best-k", echo(a), best_k(a)?),
        PairExponent(a) => ("pair-exponent", echo(a), pair_exponent(a)?),
        ChooseK(a) => ("choose-k", echo(a), choose_k(a)?),
        Split(a) => ("split", echo(a), split(a)?),
        ErrorCurve(a) => ("error-curve", echo(a), error_curve(ctx, a)?),
        Fit(a) => ("fit", echo(a), fit(a)?),
    };
    Ok((name, input, reply))
}

fn floor(ctx: &Ctx, a: &crate::FloorArgs) -> Out {
    let f = floor_pow_with(a.n, &a.c, ctx.policy())?;
    Ok(json!({ "value": integer(f.value), "bits": f.bits, "exact": f.exact }).into())
}

fn frac(ctx: &Ctx, a: &crate::FracArgs) -> Out {
    let f = frac_enclosure(a.n, a.h, a.q, &a.c, a.eps, ctx.policy())?;
    Ok(json!({
        "value": float(f.value),
        "integer_part": integer(&f.integer_part),
        "bits": f.bits,
        "exact": f.exact,
        "enclosure": { "lo": float(f.interval.lo_f64()), "hi": float(f.interval.hi_f64()) },
    })
    .into())
}

fn count_ap(ctx: &Ctx, a: &crate::CountApArgs) -> Out {
    let n = psseq::count_ap_with(a.x, a.a, a.q, &a.c, ctx.policy())?;
    Ok(json!({ "count": integer(n) }).into())
}

fn residue_profile(ctx: &Ctx, a: &crate::ProfileArgs) -> Out {
    let p = psseq::residue_profile_with(a.x, a.q, &a.c, ctx.policy())?;
    let storage = match p.counts {
        ResidueCounts::Dense(_) => "dense",
        ResidueCounts::Sparse(_) => "sparse",
    };
    let counts: Vec<Value> = p.nonzero().into_iter().map(|(r, n)| json!({ "a": r, "count": integer(n) })).collect();
    Ok(json!({ "total": integer(p.total()), "storage": storage, "nonzero": counts }).into())
}

fn divisor_count(ctx: &Ctx, a: &crate::DivisorArgs) -> Out {
    let n = psseq::count_ap_with(a.x, 0, a.d, &a.c, ctx.policy())?;
    Ok(json!({ "count": integer(n) }).into())
}

fn ap_error(ctx: &Ctx, a: &crate::ApErrorArgs) -> Out {
    let r = psseq::ap_error_report_with(a.x, a.a, a.q, &a.c, a.k, ctx.policy())?;
    Ok(json!({
        "count": integer(r.count),
        "observed": float(r.observed),
        "theoretical": float(r.theoretical),
        "ratio": float(r.observed / r.theoretical),
        "k": r.k,
    })
    .into())
}

/// Runs the requested routes and reports agreement.
fn routed(
    route: Route,
    brute: impl FnOnce() -> Result<u128, ps_core::Error>,
    mobius: impl FnOnce() -> Result<u128, ps_core::Error>,
    x: f64,
    r: u32,
) -> Out {
    let b = matches!(route, Route::Brute | Route::Both).then(brute).transpose()?;
    let m = matches!(route, Route::Mobius | Route::Both).then(mobius).transpose()?;
    let count = m.or(b).expect("at least one route runs");
    let agreement = match (b, m) {
        (Some(b), Some(m)) => Some(b == m),
        _ => None,
    };
    let main = coprime::main_term(x, r)?;
    let result = json!({
        "count": integer(count),
        "routes": { "brute": b.map(integer), "mobius": m.map(integer) },
        "agreement": agreement,
        "main_term": float(main),
        "error": float(count as f64 - main),
    });
    Ok(Reply { body: Body::Json(result), disagreement: agreement == Some(false) })
}

fn coprime_pairs(ctx: &Ctx, a: &crate::PairsArgs) -> Out {
    let spec = TupleSpec::pairs(a.x, a.c.clone())?;
    routed(
        a.route,
        || coprime::coprime_pairs_bruteforce_with(a.x, &a.c, &ctx.budget).map(u128::from),
        || coprime::coprime_tuples_mobius_with(&spec, &ctx.budget),
        a.x,
        2,
    )
}

fn coprime_tuples(ctx: &Ctx, a: &crate::TuplesArgs) -> Out {
    let spec = TupleSpec::new(a.x, a.orders.clone())?;
    routed(
        a.route,
        || coprime::coprime_tuples_bruteforce(&spec, &ctx.budget),
        || coprime::coprime_tuples_mobius_with(&spec, &ctx.budget),
        a.x,
        spec.r() as u32,
    )
}

fn dd_count(ctx: &Ctx, a: &crate::SeqArgs) -> Out {
    let n = psseq::dd_coprime_count_with(a.x, &a.c, ctx.policy())?;
    let floor = a.x.floor();
    Ok(json!({
        "count": integer(n),
        "density": float(n as f64 / floor),
        "limit": float(1.0 / coprime::zeta(2)?),
    })
    .into())
}

fn tau_sum(ctx: &Ctx, a: &crate::SeqArgs) -> Out {
    let n = psseq::tau_sum_with(a.x, &a.c, ctx.policy(), ctx.budget.factor)?;
    Ok(json!({ "sum": integer(n) }).into())
}

fn zeta(a: &crate::ZetaArgs) -> Out {
    let (lo, hi) = coprime::zeta_bounds(a.r)?;
    Ok(json!({ "value": float(coprime::zeta(a.r)?), "lower": float(lo), "upper": float(hi) }).into())
}

fn weyl_sum(ctx: &Ctx, a: &crate::WeylArgs) -> Out {
    let block = DyadicBlock::new(a.m, a.m2.unwrap_or(2.0 * a.m))?;
    let mut p = PhaseParams::new(a.h, a.q, a.c.clone())?;
    if a.negate {
        p = p.negated();
    }
    let s = expsum::weyl_sum_with(&block, &p, a.eps, ctx.policy())?;
    Ok(json!({
        "re": float(s.re),
        "im": float(s.im),
        "abs": float(s.norm()),
        "terms": integer(block.len()),
    })
    .into())
}

fn vdc_bound(a: &crate::VdcArgs) -> Out {
    Ok(json!({ "bound": float(expsum::vdc_bound(a.f, a.n, a.k)?) }).into())
}

fn et_sides(ctx: &Ctx, a: &crate::EtArgs) -> Out {
    let sides = match (&a.points, &a.c, a.n) {
        (Some(points), None, None) => {
            let h = a.h.unwrap_or((points.len() as f64).sqrt().max(1.0));
            expsum::et_sides(&EtBoundInput::new(points.clone(), a.alpha, a.beta, h)?)
        }
        (None, Some(c), Some(n)) => {
            let h = a.h.unwrap_or((n as f64).sqrt());
            expsum::et_sides_ps_with(n, c, a.q, a.alpha, a.beta, h, ctx.policy())?
        }
        _ => return Err(CliError::Usage("give either --points or both --c and --N".into())),
    };
    Ok(json!({ "lhs": float(sides.lhs), "rhs": float(sides.rhs), "ratio": float(sides.ratio()) }).into())
}

/// A problem file: monomials are maps from variable name (or `log`) to a rational exponent.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    var: String,
    #[serde(default)]
    increasing: Vec<BTreeMap<String, String>>,
    #[serde(default)]
    decreasing: Vec<BTreeMap<String, String>>,
    /// Absent or null for 0.
    #[serde(default)]
    lower: Option<BTreeMap<String, String>>,
    /// Absent or null for +infinity.
    #[serde(default)]
    upper: Option<BTreeMap<String, String>>,
}

fn mono(m: &BTreeMap<String, String>) -> Result<LogMonomial, CliError> {
    Ok(LogMonomial::from_pairs(m.iter().map(|(k, v)| (k.as_str(), v.as_str())))?)
}

fn load_problem(path: &std::path::Path) -> Result<OptProblem, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let f: ProblemFile =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("bad problem file {}: {e}", path.display())))?;
    let bound = |b: &Option<BTreeMap<String, String>>| -> Result<Bound, CliError> {
        Ok(match b {
            None => Bound::Infinite,
            Some(m) => Bound::At(mono(m)?),
        })
    };
    Ok(OptProblem {
        var: f.var.parse()?,
        increasing: f.increasing.iter().map(mono).collect::<Result<_, _>>()?,
        decreasing: f.decreasing.iter().map(mono).collect::<Result<_, _>>()?,
        lower: bound(&f.lower)?,
        upper: bound(&f.upper)?,
    })
}

fn parse_logs(items: &[String]) -> Result<BTreeMap<Var, f64>, CliError> {
    items
        .iter()
        .map(|s| {
            let (k, v) = s.split_once('=').ok_or_else(|| CliError::Usage(format!("expected VAR=LOG, got `{s}`")))?;
            let v: f64 = v.trim().parse().map_err(|_| CliError::Usage(format!("bad log value in `{s}`")))?;
            Ok((k.trim().parse::<Var>()?, v))
        })
        .collect()
}

fn source(s: &Source) -> Value {
    match s {
        Source::LowerLimit { term } => json!({ "kind": "lower_limit", "term": term }),
        Source::UpperLimit { term } => json!({ "kind": "upper_limit", "term": term }),
        Source::Crossing { increasing, decreasing, at } => {
            json!({ "kind": "crossing", "increasing": increasing, "decreasing": decreasing, "at": render::monomial(at) })
        }
    }
}

fn bound_json(b: &Bound) -> Value {
    match b {
        Bound::Infinite => Value::Null,
        Bound::At(m) => render::monomial(m),
    }
}

fn optimize(a: &crate::OptimizeArgs) -> Out {
    let p = match (&a.instance, &a.problem) {
        (Some(crate::Instance::ApBlock), None) => {
            let k = a.k.ok_or_else(|| CliError::Usage("--instance ap-block needs --k".into()))?;
            let c = parse_rational(a.c.as_deref().ok_or_else(|| CliError::Usage("--instance ap-block needs --c".into()))?)?;
            ap_block_problem(k, &c)?
        }
        (None, Some(path)) => load_problem(path)?,
        _ => return Err(CliError::Usage("give exactly one of --instance and --problem".into())),
    };
    let outcome = ex::optimize(&p)?;
    let candidates: Vec<Value> = outcome
        .candidates
        .iter()
        .map(|c| json!({ "value": render::monomial(&c.value), "source": source(&c.source) }))
        .collect();
    let mut result = json!({
        "problem": {
            "var": p.var.name(),
            "increasing": p.increasing.iter().map(render::monomial).collect::<Vec<_>>(),
            "decreasing": p.decreasing.iter().map(render::monomial).collect::<Vec<_>>(),
            "lower": bound_json(&p.lower),
            "upper": bound_json(&p.upper),
        },
        "candidates": candidates,
        "distinct_values": outcome.distinct_values().iter().map(render::monomial).collect::<Vec<_>>(),
    });
    if !a.logs.is_empty() {
        let logs = parse_logs(&a.logs)?;
        let lead = outcome.dominant_at(&logs);
        let numeric = ex::optimize_at(&p, &logs)?;
        result["at"] = json!({
            "dominant": render::monomial(&lead.value),
            "log_value": float(numeric.log_value),
            "log_argmin": float(numeric.argmin),
        });
    }
    Ok(result.into())
}

fn ap_exponent(a: &crate::KcArgs) -> Out {
    let c = parse_rational(&a.c)?;
    let (xe, qe) = ex::ap_exponent(a.k, &c)?;
    Ok(json!({ "x": rational(&xe), "q": rational(&qe), "crossing_theta": rational(&ex::ap_crossing_theta(a.k, &c)) }).into())
}

fn best_k(a: &crate::BestKArgs) -> Out {
    let (c, theta) = (parse_rational(&a.c)?, parse_rational(&a.theta)?);
    let k = ex::best_k_for_modulus(&c, &theta)?;
    Ok(json!({ "k": k, "exponent": rational(&ex::ap_bound_exponent(k, &c, &theta)?) }).into())
}

fn pair_exponent(a: &crate::PairExpArgs) -> Out {
    let value = match a.c.to_big_rational() {
        Some(c) => rational(&ex::pair_error_exponent(a.k, &c, a.r)?),
        None => float(ex::pair_error_exponent_f64(a.k, &a.c, a.r)?),
    };
    Ok(json!({ "exponent": value }).into())
}

fn choose_k(a: &crate::OrderArg) -> Out {
    let k = ex::choose_k_for_order(&a.c)?;
    let value = match a.c.to_big_rational() {
        Some(c) => rational(&ex::pair_error_exponent(k, &c, 2)?),
        None => float(ex::pair_error_exponent_f64(k, &a.c, 2)?),
    };
    Ok(json!({ "k": k, "pair_exponent": value }).into())
}

fn split(a: &crate::PairExpArgs) -> Out {
    let c = ex::rational_order(&a.c)?;
    let s = ex::split_exponents(a.k, &c, a.r)?;
    let [main, tail, trunc, large] = &s.values;
    Ok(json!({
        "divisor_cut": rational(&ex::divisor_cut_exponent(a.k, &c)?),
        "epsilon": rational(&ex::slack_epsilon(a.k, &c)?),
        "main": rational(main),
        "small_d_tail": rational(tail),
        "small_d_truncation": rational(trunc),
        "large_d": rational(large),
    })
    .into())
}

fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("bad grid `{s}`")));
    let (start, end, ratio) = match parts.as_slice() {
        [a, b] => (num(a)?, num(b)?, 2.0),
        [a, b, r] => (num(a)?, num(b)?, num(r)?),
        _ => return Err(CliError::Usage(format!("grid must be start:end[:ratio], got `{s}`"))),
    };
    Ok(analysis::geometric_grid(start, end, ratio)?)
}

/// The exponent of `x` the theory predicts for a curve, exact when the order is rational.
struct Theory {
    exact: Option<BigRational>,
    value: f64,
}

impl Theory {
    fn exact(r: BigRational) -> Self {
        Theory { value: rational_to_f64(&r), exact: Some(r) }
    }

    fn json(&self) -> Value {
        match &self.exact {
            Some(r) => rational(r),
            None => float(self.value),
        }
    }
}

fn tuple_theory(orders: &[OrderSpec], k: Option<u32>) -> Result<Theory, CliError> {
    let c = orders.iter().max().expect("orders are non-empty");
    let k = match k {
        Some(k) => k,
        None => ex::choose_k_for_order(c)?,
    };
    let r = orders.len() as u32;
    Ok(match c.to_big_rational() {
        Some(cr) => Theory::exact(ex::pair_error_exponent(k, &cr, r)?),
        None => Theory { exact: None, value: ex::pair_error_exponent_f64(k, c, r)? },
    })
}

/// Progression exponent of `x` at fixed `q`; `k` defaults to the best choice as `x` grows.
fn ap_theory(c: &OrderSpec, k: Option<u32>) -> Result<Theory, CliError> {
    match c.to_big_rational() {
        Some(cr) => {
            let k = match k {
                Some(k) => k,
                None => ex::best_k_for_modulus(&cr, &BigRational::zero())?,
            };
            Ok(Theory::exact(ex::ap_exponent(k, &cr)?.0))
        }
        None => {
            let cf = c.to_f64();
            let k = k.unwrap_or_else(|| {
                (1..=ex::K_MAX).find(|&k| cf + 1.0 - k as f64 - 0.5f64.powi(k as i32) < 0.0).unwrap_or(ex::K_MAX)
            });
            Ok(Theory { exact: None, value: 1.0 - (k as f64 - cf) / (2f64.powi(k as i32) - 1.0) })
        }
    }
}

fn need_c(c: &Option<OrderSpec>) -> Result<&OrderSpec, CliError> {
    c.as_ref().ok_or_else(|| CliError::Usage("this curve kind needs --c".into()))
}

fn error_curve(ctx: &Ctx, a: &crate::CurveArgs) -> Out {
    use crate::CurveKindArg as K;
    let grid = parse_grid(&a.grid)?;
    let (curve, theory) = match a.kind {
        K::Pairs => {
            let c = need_c(&a.c)?;
            (analysis::error_curve_pairs(&grid, c, &ctx.budget)?, tuple_theory(&[c.clone(), c.clone()], a.k)?)
        }
        K::Tuples => {
            if a.orders.len() < 2 {
                return Err(CliError::Usage("tuples need --orders with at least two orders".into()));
            }
            (analysis::error_curve_tuples(&grid, &a.orders, &ctx.budget)?, tuple_theory(&a.orders, a.k)?)
        }
        K::Ap => {
            let c = need_c(&a.c)?;
            let q = a.q.ok_or_else(|| CliError::Usage("ap curves need --q".into()))?;
            (analysis::error_curve_ap(&grid, a.a, q, c, &ctx.budget)?, ap_theory(c, a.k)?)
        }
        K::Dd => {
            let c = need_c(&a.c)?;
            (analysis::error_curve_dd(&grid, c, &ctx.budget)?, Theory::exact(BigRational::one()))
        }
    };
    let theory = match &a.exponent {
        Some(e) => Theory::exact(parse_rational(e)?),
        None => theory,
    };
    let rows = analysis::curve_rows(&curve, theory.value);
    if a.format == Format::Csv {
        return Ok(Reply { body: Body::Csv(csv_rows(&rows)?), disagreement: false });
    }
    let fit = match analysis::fit_slope(&curve) {
        Ok(f) => json!({
            "slope": float(f.slope),
            "intercept": float(f.intercept),
            "residual_rms": float(f.residual_rms),
            "n_points": f.n_points,
            "dropped_zero": f.dropped_zero,
        }),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let constant = match &theory.exact {
        Some(e) => analysis::constant_fit(&curve, e),
        None => analysis::constant_fit_with(&curve, |x| x.powf(theory.value)),
    };
    let rows: Vec<Value> = curve
        .samples
        .iter()
        .zip(&rows)
        .map(|(s, r)| {
            json!({
                "x": float(r.x),
                "count": integer(s.count as u128),
                "observed": float(r.observed),
                "theoretical": float(r.theoretical),
                "ratio": float(r.ratio),
            })
        })
        .collect();
    Ok(json!({
        "kind": curve.kind,
        "orders": curve.orders,
        "modulus": curve.modulus,
        "residue": curve.residue,
        "exponent": theory.json(),
        "rows": rows,
        "fit": fit,
        "constant": float(constant),
    })
    .into())
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    x: f64,
    observed: f64,
    #[serde(default)]
    theoretical: Option<f64>,
    #[serde(default)]
    ratio: Option<f64>,
}

fn csv_rows(rows: &[analysis::CurveRow]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(CsvRow { x: r.x, observed: r.observed, theoretical: Some(r.theoretical), ratio: Some(r.ratio) })
            .map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn fit(a: &crate::FitArgs) -> Out {
    let mut reader =
        csv::Reader::from_path(&a.input).map_err(|e| CliError::Io(format!("cannot read {}: {e}", a.input.display())))?;
    let rows: Vec<CsvRow> = reader
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Usage(format!("bad CSV {}: {e}", a.input.display())))?;
    if rows.windows(2).any(|w| !(w[0].x < w[1].x)) {
        return Err(CliError::Usage("x values must be strictly increasing".into()));
    }
    let samples = rows.iter().map(|r| Sample { x: r.x, count: 0.0, observed: r.observed }).collect();
    let curve = ErrorCurve { kind: CurveKind::Tuples, orders: vec![], modulus: None, residue: None, samples };
    let f = analysis::fit_slope(&curve)?;
    let constant = match &a.exponent {
        Some(e) => Some(analysis::constant_fit(&curve, &parse_rational(e)?)),
        None if rows.iter().all(|r| r.theoretical.is_some()) => {
            Some(rows.iter().map(|r| r.observed / r.theoretical.unwrap()).fold(0.0, f64::max))
        }
        None => None,
    };
    Ok(json!({
        "slope": float(f.slope),
        "intercept": float(f.intercept),
        "residual_rms": float(f.residual_rms),
        "n_points": f.n_points,
        "dropped_zero": f.dropped_zero,
        "constant": constant.map(float),
    })
    .into())
}
