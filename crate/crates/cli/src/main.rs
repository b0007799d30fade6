mod commands;
mod render;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ps_core::coprime::{Budget, FactorBudget};
use ps_core::realpow::{PrecisionPolicy, DEFAULT_MAX_BITS};
use ps_core::OrderSpec;
use serde::Serialize;
use serde_json::json;

/// Output schema version.
const SCHEMA: u32 = 1;

pub const EXIT_OTHER: u8 = 1;
pub const EXIT_PARSE: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;
pub const EXIT_DISAGREE: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "ps-toolkit", version, about = "Piatetski-Shapiro sequences: certified counts, coprime tuples, exponential sums and exponents")]
struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: available parallelism). Results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Precision cap in bits for certified floors (overrides PS_TOOLKIT_MAX_BITS).
    #[arg(long, global = true)]
    max_bits: Option<u32>,
    /// Largest number of tuples the brute-force route may visit.
    #[arg(long, global = true, default_value_t = 100_000_000)]
    max_pairs: u64,
    /// Trial-division bound used before Pollard rho.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    trial_limit: u64,
    /// Pollard rho iterations per attempt.
    #[arg(long, global = true, default_value_t = 1 << 22)]
    rho_iterations: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// [n^c] with its certificate.
    Floor(FloorArgs),
    /// {h n^c / q} to a given tolerance.
    Frac(FracArgs),
    /// #{n <= x : [n^c] = a mod q}.
    CountAp(CountApArgs),
    /// Counts of [n^c] mod q for every residue.
    ResidueProfile(ProfileArgs),
    /// #{n <= x : d | [n^c]}.
    DivisorCount(DivisorArgs),
    /// Progression count against x/q and the theoretical error size.
    ApError(ApErrorArgs),
    /// Coprime pairs ([m^c], [n^c]) with m, n <= x.
    CoprimePairs(PairsArgs),
    /// Coprime r-tuples for a list of orders.
    CoprimeTuples(TuplesArgs),
    /// #{n <= x : gcd(n, [n^c]) = 1}.
    DdCount(SeqArgs),
    /// sum_{n <= x} tau([n^c]).
    TauSum(SeqArgs),
    /// zeta(r) with rigorous bounds.
    Zeta(ZetaArgs),
    /// sum_{M < n <= M'} e(h n^c / q).
    WeylSum(WeylArgs),
    /// F^(1/(2^k-2)) N^(1-k/(2^k-2)) + N/F.
    VdcBound(VdcArgs),
    /// Both sides of the discrepancy inequality.
    EtSides(EtArgs),
    /// Symbolic min-max of monotone monomials.
    Optimize(OptimizeArgs),
    /// Exponents (of x, of q) in the progression error for a given k.
    ApExponent(KcArgs),
    /// The k minimizing the progression bound for q = x^theta.
    BestK(BestKArgs),
    /// r - (k-c)/(2^k-1).
    PairExponent(PairExpArgs),
    /// The k used for the coprime-tuple error term.
    ChooseK(OrderArg),
    /// Exponents of the four terms of the divisor split.
    Split(PairExpArgs),
    /// Error curve over a geometric grid.
    ErrorCurve(CurveArgs),
    /// Slope and constant fits for a curve in CSV form.
    Fit(FitArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct FloorArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub c: OrderSpec,
}

#[derive(Args, Debug, Serialize)]
pub struct FracArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long, default_value_t = 1)]
    pub h: u64,
    #[arg(long, default_value_t = 1)]
    pub q: u64,
    #[arg(long)]
    pub c: OrderSpec,
    #[arg(long, default_value_t = 1e-12)]
    pub eps: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct CountApArgs {
    #[arg(long)]
    pub x: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub a: i64,
    #[arg(long)]
    pub q: u64,
    #[arg(long)]
    pub c: OrderSpec,
}

#[derive(Args, Debug, Serialize)]
pub struct ProfileArgs {
    #[arg(long)]
    pub x: f64,
    #[arg(long)]
    pub q: u64,
    #[arg(long)]
    pub c: OrderSpec,
}

#[derive(Args, Debug, Serialize)]
pub struct DivisorArgs {
    #[arg(long)]
    pub x: f64,
    #[arg(long)]
    pub d: u64,
    #[arg(long)]
    pub c: OrderSpec,
}

#[derive(Args, Debug, Serialize)]
pub struct ApErrorArgs {
    #[arg(long)]
    pub x: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub a: i64,
    #[arg(long)]
    pub q: u64,
    #[arg(long)]
    pub c: OrderSpec,
    #[arg(long)]
    pub k: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Brute,
    Mobius,
    Both,
}

#[derive(Args, Debug, Serialize)]
pub struct PairsArgs {
    #[arg(long)]
    pub x: f64,
    #[arg(long)]
    pub c: OrderSpec,
    #[arg(long, value_enum, default_value_t = Route::Mobius)]
    pub route: Route,
}

#[derive(Args, Debug, Serialize)]
pub struct TuplesArgs {
    #[arg(long)]
    pub x: f64,
    /// Comma-separated orders, e.g. `1,3/2,sqrt:2`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub orders: Vec<OrderSpec>,
    #[arg(long, value_enum, default_value_t = Route::Mobius)]
    pub route: Route,
}

#[derive(Args, Debug, Serialize)]
pub struct SeqArgs {
    #[arg(long)]
    pub x: f64,
    #[arg(long)]
    pub c: OrderSpec,
}

#[derive(Args, Debug, Serialize)]
pub struct ZetaArgs {
    #[arg(long)]
    pub r: u32,
}

#[derive(Args, Debug, Serialize)]
pub struct WeylArgs {
    #[arg(long)]
    pub c: OrderSpec,
    #[arg(long, default_value_t = 1)]
    pub h: u64,
    #[arg(long, default_value_t = 1)]
    pub q: u64,
    /// Block start M.
    #[arg(long)]
    pub m: f64,
    /// Block end M' (default 2M).
    #[arg(long)]
    pub m2: Option<f64>,
    /// Negate the phase.
    #[arg(long)]
    pub negate: bool,
    #[arg(long, default_value_t = 1e-12)]
    pub eps: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct VdcArgs {
    /// Size F of the derivative.
    #[arg(long = "F")]
    pub f: f64,
    /// Length N of the sum.
    #[arg(long = "N")]
    pub n: f64,
    #[arg(long)]
    pub k: u32,
}

#[derive(Args, Debug, Serialize)]
pub struct EtArgs {
    /// Explicit points, comma-separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with_all = ["c", "n"])]
    pub points: Option<Vec<f64>>,
    /// Order for the points n^c / q, n <= N.
    #[arg(long, requires = "n")]
    pub c: Option<OrderSpec>,
    #[arg(long = "N", requires = "c")]
    pub n: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub q: u64,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub beta: f64,
    /// Cut-off H (default sqrt(N)).
    #[arg(long = "H")]
    pub h: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Instance {
    /// The progression block problem in H.
    ApBlock,
}

#[derive(Args, Debug, Serialize)]
pub struct OptimizeArgs {
    #[arg(long, value_enum, required_unless_present = "problem", conflicts_with = "problem")]
    pub instance: Option<Instance>,
    /// JSON problem file.
    #[arg(long)]
    pub problem: Option<PathBuf>,
    #[arg(long, requires = "instance")]
    pub k: Option<u32>,
    /// Rational order for the instance.
    #[arg(long, requires = "instance")]
    pub c: Option<String>,
    /// Logs of the other variables, e.g. `M=20,q=3`, to pick the dominant candidate.
    #[arg(long, value_delimiter = ',')]
    pub logs: Vec<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct KcArgs {
    #[arg(long)]
    pub k: u32,
    /// Rational order.
    #[arg(long)]
    pub c: String,
}

#[derive(Args, Debug, Serialize)]
pub struct BestKArgs {
    #[arg(long)]
    pub c: String,
    /// q = x^theta.
    #[arg(long)]
    pub theta: String,
}

#[derive(Args, Debug, Serialize)]
pub struct PairExpArgs {
    #[arg(long)]
    pub k: u32,
    /// Order; irrational orders give a decimal result only.
    #[arg(long)]
    pub c: OrderSpec,
    #[arg(long, default_value_t = 2)]
    pub r: u32,
}

#[derive(Args, Debug, Serialize)]
pub struct OrderArg {
    #[arg(long)]
    pub c: OrderSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKindArg {
    Pairs,
    Tuples,
    Ap,
    Dd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Serialize)]
pub struct CurveArgs {
    #[arg(long, value_enum)]
    pub kind: CurveKindArg,
    /// Order for pairs, ap and dd.
    #[arg(long)]
    pub c: Option<OrderSpec>,
    /// Orders for tuples, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub orders: Vec<OrderSpec>,
    /// `start:end[:ratio]`, ratio defaulting to 2.
    #[arg(long)]
    pub grid: String,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0)]
    pub a: i64,
    #[arg(long)]
    pub q: Option<u64>,
    /// Derivative order behind the theoretical exponent.
    #[arg(long)]
    pub k: Option<u32>,
    /// Override the theoretical exponent (rational).
    #[arg(long)]
    pub exponent: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args, Debug, Serialize)]
pub struct FitArgs {
    /// CSV with at least the columns `x` and `observed`.
    #[arg(long)]
    pub input: PathBuf,
    /// Exponent for the constant fit (rational); otherwise the `theoretical` column is used.
    #[arg(long)]
    pub exponent: Option<String>,
}

/// Everything a command needs besides its own arguments.
pub struct Ctx {
    pub budget: Budget,
}

impl Ctx {
    pub fn policy(&self) -> &PrecisionPolicy {
        &self.budget.precision
    }
}

pub enum Body {
    Json(serde_json::Value),
    Csv(String),
}

pub struct Reply {
    pub body: Body,
    /// Two counting routes gave different answers.
    pub disagreement: bool,
}

impl From<serde_json::Value> for Reply {
    fn from(v: serde_json::Value) -> Self {
        Reply { body: Body::Json(v), disagreement: false }
    }
}

#[derive(Debug)]
pub enum CliError {
    Core(ps_core::Error),
    Usage(String),
    Io(String),
}

impl From<ps_core::Error> for CliError {
    fn from(e: ps_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_budget() => EXIT_BUDGET,
            CliError::Core(ps_core::Error::InvalidOrder { .. } | ps_core::Error::InvalidArgument(_)) => EXIT_PARSE,
            CliError::Usage(_) => EXIT_PARSE,
            CliError::Core(_) | CliError::Io(_) => EXIT_OTHER,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

fn max_bits(flag: Option<u32>) -> Result<u32, CliError> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var("PS_TOOLKIT_MAX_BITS") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("PS_TOOLKIT_MAX_BITS must be a positive integer, got `{v}`"))),
        Err(_) => Ok(DEFAULT_MAX_BITS),
    }
}

fn build_ctx(cli: &Cli) -> Result<Ctx, CliError> {
    let bits = max_bits(cli.max_bits)?;
    if bits == 0 || cli.max_pairs == 0 || cli.trial_limit == 0 || cli.rho_iterations == 0 {
        return Err(CliError::Usage("budgets must be positive".into()));
    }
    let factor = FactorBudget { trial_limit: cli.trial_limit, rho_iterations: cli.rho_iterations, ..FactorBudget::default() };
    Ok(Ctx {
        budget: Budget { max_brute_tuples: cli.max_pairs, precision: PrecisionPolicy::with_max_bits(bits), factor },
    })
}

fn write_out(path: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(CliError::Usage("--workers must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Io(e.to_string()))?;
    }
    let ctx = build_ctx(&cli)?;
    let start = Instant::now();
    let (name, input, reply) = commands::dispatch(&ctx, &cli.command)?;
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    let text = match reply.body {
        Body::Csv(s) => s,
        Body::Json(result) => {
            let doc = json!({
                "schema": SCHEMA,
                "command": name,
                "input": input,
                "result": result,
                "timing": { "elapsed_ms": elapsed_ms },
            });
            serde_json::to_string_pretty(&doc).expect("reports serialize") + "\n"
        }
    };
    write_out(cli.out.as_ref(), &text)?;
    Ok(if reply.disagreement { EXIT_DISAGREE } else { 0 })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_PARSE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
