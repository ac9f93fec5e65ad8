//! Command-line front end.
//!
//! Every subcommand builds a JSON object; `--format` decides whether it is
//! printed as JSON, as a one-row CSV table or as `key: value` lines. Exact
//! rationals are printed as `"p/q"` strings and complex values as
//! `{re, im, abs_error}`.
//!
//! Exit codes: 0 on success, 2 on invalid input (including out-of-range
//! weights), 3 when a work limit stops an evaluation.

use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::bounds::{
    self, alpha, assembly_pipeline, c_g, dominance_check, improvement_delta, in_jacobi_range, in_siegel_range,
    optimal_b_check, rational_string, theorem1_exponent, tk_exponent_formula, SweepFamily, SweepKind,
};
use crate::error::{Error, Result};
use crate::forms::{min_submatrix_det, reduction_ratio, HalfIntegralMatrix, JacobiDatum, Rational};
use crate::gauss::{gauss_sum, gauss_sum_brute};
use crate::kloosterman::{kloosterman, EvalConfig, KloostermanParams, Strategy, DEFAULT_WORK_LIMIT};
use crate::poincare::{
    bessel, delta_term, poincare_coefficient, poincare_coefficient_adaptive, poincare_coefficient_pm,
    PoincareParams,
};

#[derive(Debug, Parser)]
#[command(name = "siegel-bounds", version, about = "Exponential sums, Poincaré coefficients and bound exponents")]
#[command(args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Maximum number of enumerated terms per brute-force exponential sum.
    #[arg(long, global = true, default_value_t = DEFAULT_WORK_LIMIT)]
    work_limit: u128,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Plain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GaussMethod {
    Brute,
    Closed,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Brute,
    Crt,
    Fast,
}

impl From<Method> for Strategy {
    fn from(m: Method) -> Strategy {
        match m {
            Method::Brute => Strategy::Brute,
            Method::Crt => Strategy::Crt,
            Method::Fast => Strategy::Fast,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepKindArg {
    Kloosterman,
    Coefficient,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Quadratic Gauss sum G(a, b; c).
    #[command(allow_negative_numbers = true)]
    Gauss {
        #[arg(long)]
        a: i64,
        #[arg(long)]
        b: i64,
        #[arg(long)]
        c: u64,
        #[arg(long, value_enum, default_value_t = GaussMethod::Both)]
        method: GaussMethod,
    },
    /// Kloosterman sum H_{m,c}(n, r, n', r').
    #[command(allow_negative_numbers = true)]
    Kloosterman {
        #[command(flatten)]
        index: IndexArgs,
        #[arg(long)]
        c: u64,
        #[arg(long)]
        n2: i64,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        r2: Vec<i64>,
        #[arg(long, value_enum, default_value_t = Method::Fast)]
        method: Method,
    },
    /// Fourier coefficient of a Jacobi Poincaré series.
    #[command(allow_negative_numbers = true)]
    Poincare {
        #[arg(long)]
        k: u32,
        #[command(flatten)]
        index: IndexArgs,
        /// Defaults to n.
        #[arg(long)]
        n2: Option<i64>,
        /// Defaults to r.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        r2: Option<Vec<i64>>,
        #[arg(long, default_value_t = 100)]
        c_max: u64,
        /// Return g(n', r') + (-1)^k g(n', -r') instead of g(n', r').
        #[arg(long)]
        pm: bool,
        /// Double c_max until successive values agree within --tol.
        #[arg(long)]
        adaptive: bool,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Accept weights k <= g/2 + 2 with a warning.
        #[arg(long)]
        permissive: bool,
        #[arg(long, value_enum, default_value_t = Method::Fast)]
        method: Method,
    },
    /// The delta term of the coefficient formula.
    #[command(allow_negative_numbers = true)]
    Delta {
        #[command(flatten)]
        index: IndexArgs,
        #[arg(long)]
        n2: i64,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        r2: Vec<i64>,
    },
    /// Bessel function J_nu(t).
    Bessel {
        #[arg(long)]
        nu: f64,
        #[arg(long)]
        t: f64,
    },
    /// Exact exponents alpha_g, c_g and the coefficient-bound exponents.
    Exponents {
        #[arg(long)]
        g: u32,
        #[arg(long)]
        k: Option<u32>,
    },
    /// Split-point balance, dominance comparison and exponent reassembly.
    Bcheck {
        #[arg(long)]
        g: u32,
        #[arg(long)]
        k: u32,
    },
    /// Determinants, discriminants and the reduction-theory minimum.
    #[command(allow_negative_numbers = true)]
    Forms {
        /// Matrix as {"g": .., "twice_m": [[..]]}.
        #[arg(long)]
        m: String,
        #[arg(long, requires = "r")]
        n: Option<i64>,
        #[arg(long, value_delimiter = ',', requires = "n", allow_hyphen_values = true)]
        r: Option<Vec<i64>>,
        /// Entry bound for the column search in the minimum.
        #[arg(long, default_value_t = 2)]
        bound: u32,
    },
    /// Empirical sweep over a parameter family.
    Sweep {
        /// Family spec as inline JSON or a path to a JSON file.
        #[arg(long)]
        spec: String,
        #[arg(long, value_enum, default_value_t = SweepKindArg::Kloosterman)]
        kind: SweepKindArg,
    },
}

#[derive(Debug, Args)]
struct IndexArgs {
    /// Matrix as {"g": .., "twice_m": [[..]]}.
    #[arg(long)]
    m: String,
    #[arg(long)]
    n: i64,
    /// Comma-separated vector of length g.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    r: Vec<i64>,
}

impl IndexArgs {
    fn matrix(&self) -> Result<HalfIntegralMatrix> {
        HalfIntegralMatrix::from_json(&self.m)
    }
}

/// Parses `args` (including the program name), runs the subcommand and
/// writes its result to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    // Output is buffered so the work can run inside a dedicated pool.
    let mut buffer = Vec::new();
    let result = match cli.global.threads {
        Some(0) => Err(Error::invalid("--threads must be positive")),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(&cli, &mut buffer)),
            Err(e) => Err(Error::invalid(format!("thread pool: {e}"))),
        },
        None => execute(&cli, &mut buffer),
    }
    .and_then(|()| out.write_all(&buffer).map_err(|e| Error::invalid(format!("writing output: {e}"))));
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::WorkLimit { .. } => 3,
                _ => 2,
            }
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let cfg = |method: Method| EvalConfig { strategy: method.into(), work_limit: cli.global.work_limit };
    let value = match &cli.command {
        Command::Gauss { a, b, c, method } => gauss(*a, *b, *c, *method)?,
        Command::Kloosterman { index, c, n2, r2, method } => {
            let p = KloostermanParams::new(index.matrix()?, *c, index.n, index.r.clone(), *n2, r2.clone())?;
            let h = kloosterman(&p, &cfg(*method))?;
            let mut v = to_value(&h);
            v["method"] = json!(format!("{method:?}").to_lowercase());
            v
        }
        Command::Poincare { k, index, n2, r2, c_max, pm, adaptive, tol, permissive, method } => {
            let datum = JacobiDatum::new(index.n, index.r.clone(), index.matrix()?)?;
            let n2 = n2.unwrap_or(index.n);
            let r2 = r2.clone().unwrap_or_else(|| index.r.clone());
            let mut p = PoincareParams {
                k: *k,
                datum,
                n2,
                r2,
                tol: *tol,
                permissive: *permissive,
            };
            p.validate()?;
            p = p.with_tol(*tol);
            let cfg = cfg(*method);
            let coefficient = match (*pm, *adaptive) {
                (false, false) => poincare_coefficient(&p, *c_max, &cfg)?,
                (false, true) => poincare_coefficient_adaptive(&p, 25, *c_max, &cfg)?,
                (true, false) => poincare_coefficient_pm(&p, *c_max, &cfg)?,
                (true, true) => return Err(Error::invalid("--pm and --adaptive cannot be combined")),
            };
            let mut v = to_value(&coefficient);
            v["tail_is_heuristic"] = json!(true);
            v
        }
        Command::Delta { index, n2, r2 } => {
            let m = index.matrix()?;
            json!({ "delta": delta_term(&m, index.n, &index.r, *n2, r2)? })
        }
        Command::Bessel { nu, t } => {
            let value = bessel::bessel_j(*nu, *t)?;
            let scale = value.abs().max(bessel::envelope(*nu, *t));
            json!({
                "nu": nu,
                "t": t,
                "value": value,
                "abs_error": bessel::BESSEL_REL_ERROR * scale,
                "envelope": bessel::envelope(*nu, *t),
            })
        }
        Command::Exponents { g, k } => exponents(*g, *k)?,
        Command::Bcheck { g, k } => bcheck(*g, *k)?,
        Command::Forms { m, n, r, bound } => forms(m, *n, r.as_deref(), *bound)?,
        Command::Sweep { spec, kind } => return sweep(spec, *kind, &cfg(Method::Fast), cli.global.format, out),
    };
    emit(&value, cli.global.format, out)
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("result serializes")
}

fn gauss(a: i64, b: i64, c: u64, method: GaussMethod) -> Result<Value> {
    let mut v = json!({ "a": a, "b": b, "c": c });
    let brute = matches!(method, GaussMethod::Brute | GaussMethod::Both).then(|| gauss_sum_brute(a, b, c)).transpose()?;
    let closed = matches!(method, GaussMethod::Closed | GaussMethod::Both).then(|| gauss_sum(a, b, c)).transpose()?;
    if let Some(x) = &brute {
        v["brute"] = to_value(x);
    }
    if let Some(x) = &closed {
        v["closed"] = to_value(x);
    }
    if let (Some(x), Some(y)) = (brute, closed) {
        v["diff"] = json!((x.value - y.value).norm());
    }
    Ok(v)
}

fn exponents(g: u32, k: Option<u32>) -> Result<Value> {
    let mut v = json!({
        "g": g,
        "alpha": rational_string(&alpha(g)?),
        "c_g": rational_string(&c_g(g)?),
    });
    if let Some(k) = k {
        v["k"] = json!(k);
        v["theorem1"] = json!(rational_string(&theorem1_exponent(g, k)?));
        v["tk"] = json!(rational_string(&tk_exponent_formula(g, k)?));
        v["tk_in_range"] = json!(in_jacobi_range(g, k));
        v["improvement"] = json!(rational_string(&improvement_delta(g, k)?));
    }
    Ok(v)
}

fn bcheck(g: u32, k: u32) -> Result<Value> {
    if !in_siegel_range(g, k) && !in_jacobi_range(g, k) {
        return Err(Error::OutOfRange(format!("(g, k) = ({g}, {k}) is outside both g/2+1 < k < g and (g+3)/2 < k < g")));
    }
    let part = |r: Result<Value>| r.unwrap_or_else(|e| json!({ "error": e.to_string() }));
    Ok(json!({
        "g": g,
        "k": k,
        "optimal_b": part(optimal_b_check(g, k).map(|x| to_value(&x))),
        "dominance": part(dominance_check(g, k).map(|x| to_value(&x))),
        "pipeline": part(assembly_pipeline(g, k).map(|x| to_value(&x))),
    }))
}

fn ratio_string(x: &Rational) -> String {
    x.to_string()
}

fn forms(m: &str, n: Option<i64>, r: Option<&[i64]>, bound: u32) -> Result<Value> {
    let m = HalfIntegralMatrix::from_json(m)?;
    let mut v = json!({ "g": m.dim(), "det2m": m.det_twice().to_string() });
    // With (n, r) the quantities refer to T = ((n, rᵀ/2), (r/2, m)).
    let t = match (n, r) {
        (Some(n), Some(r)) => {
            let datum = JacobiDatum::new_unchecked(n, r.to_vec(), m.clone())?;
            v["discriminant"] = json!(datum.discriminant().to_string());
            v["discriminant_split"] = json!(ratio_string(&datum.discriminant_split()));
            let mut rows = vec![std::iter::once(2 * n).chain(r.iter().copied()).collect::<Vec<i64>>()];
            for (i, ri) in r.iter().enumerate() {
                rows.push(std::iter::once(*ri).chain(m.rows()[i].iter().copied()).collect());
            }
            match HalfIntegralMatrix::new(rows) {
                Ok(t) => Some(t),
                Err(_) => {
                    v["min_submatrix_det"] = Value::Null;
                    v["note"] = json!("T is not positive definite; no reduction minimum");
                    None
                }
            }
        }
        _ => Some(m),
    };
    if let Some(t) = t.filter(|t| t.dim() >= 2) {
        v["min_submatrix_det"] = json!(ratio_string(&min_submatrix_det(&t, bound)?));
        v["reduction_ratio"] = json!(reduction_ratio(&t, bound)?);
        v["search_bound"] = json!(bound);
    }
    Ok(v)
}

fn sweep(spec: &str, kind: SweepKindArg, cfg: &EvalConfig, format: Format, out: &mut dyn Write) -> Result<()> {
    let text = if spec.trim_start().starts_with('{') {
        spec.to_string()
    } else {
        std::fs::read_to_string(spec).map_err(|e| Error::invalid(format!("reading {spec}: {e}")))?
    };
    let family = SweepFamily::from_json(&text)?;
    let kind = match kind {
        SweepKindArg::Kloosterman => SweepKind::Kloosterman,
        SweepKindArg::Coefficient => SweepKind::Coefficient,
    };
    let report = bounds::empirical_exponent_sweep(&family, kind, cfg)?;
    match format {
        Format::Csv => report.write_csv(out),
        Format::Json => {
            let mut v = report.summary_json();
            v["rows"] = to_value(&report.rows);
            emit(&v, Format::Json, out)
        }
        Format::Plain => emit(&report.summary_json(), Format::Plain, out),
    }
}

fn emit(v: &Value, format: Format, out: &mut dyn Write) -> Result<()> {
    let io = |e: std::io::Error| Error::invalid(format!("writing output: {e}"));
    match format {
        Format::Json => writeln!(out, "{v}").map_err(io),
        Format::Plain => {
            for (key, val) in flatten(v) {
                writeln!(out, "{key}: {val}").map_err(io)?;
            }
            Ok(())
        }
        Format::Csv => {
            let pairs = flatten(v);
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
            let err = |e: csv::Error| Error::invalid(format!("writing CSV: {e}"));
            w.write_record(pairs.iter().map(|p| p.0.as_str())).map_err(err)?;
            w.write_record(pairs.iter().map(|p| p.1.as_str())).map_err(err)?;
            w.flush().map_err(io)
        }
    }
}

/// Dotted keys for nested objects; arrays and scalars are leaves.
fn flatten(v: &Value) -> Vec<(String, String)> {
    fn walk(prefix: &str, v: &Value, acc: &mut Vec<(String, String)>) {
        match v {
            Value::Object(map) => walk_map(prefix, map, acc),
            Value::String(s) => acc.push((prefix.to_string(), s.clone())),
            other => acc.push((prefix.to_string(), other.to_string())),
        }
    }
    fn walk_map(prefix: &str, map: &Map<String, Value>, acc: &mut Vec<(String, String)>) {
        for (k, v) in map {
            let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
            walk(&key, v, acc);
        }
    }
    let mut acc = Vec::new();
    walk("", v, &mut acc);
    acc
}
