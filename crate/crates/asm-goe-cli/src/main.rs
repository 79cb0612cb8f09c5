//! `asm-goe`: command-line front end for the `asm-goe` library.
//!
//! Every output is self-describing: JSON and NDJSON carry a header with the
//! tool version, command and full configuration; CSV starts with a `#`
//! comment line holding the same header. Scalar results print bare on
//! stdout unless `--format json` is given.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::anyhow;
use asm_goe::asymptotics::{self as asy, DEFAULT_SIZES};
use asm_goe::combinatorics::{
    asm_to_gog, asm_to_pcsm, count_asm, count_gog_trapezoids, count_magog_trapezoids,
    enumerate_asm, enumerate_gog_trapezoids, enumerate_matchings, enumerate_pcsm, gog_to_asm,
    matching_to_magog, pcsm_to_asm, top_path, x_gog, x_magog, AsmMatrix, PcsmMatrix,
    DEFAULT_COUNT_CAP, DEFAULT_ENUM_CAP,
};
use asm_goe::goetw::{f1, QuadratureRule, DEFAULT_NODES, DEFAULT_TRUNCATION};
use asm_goe::kasteleyn::{build_kasteleyn, kinverse_matrix};
use asm_goe::kernel::{law_of_max_t, KernelTables, PrecisionPolicy};
use asm_goe::numeric::{rational_string, Rational};
use asm_goe::sampler::{default_sweeps, empirical_max_law, empirical_max_law_chains, sample_many, ChainPlan};
use asm_goe::{verify, Error as LibError};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug, Serialize)]
#[command(name = "asm-goe", version, about = "Frozen boundary of uniform alternating sign matrices")]
struct Cli {
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = "ASM_GOE_THREADS", default_value_t = 0)]
    threads: usize,
    /// Write output to `<dir>/<command>.<ext>` instead of stdout.
    #[arg(long, global = true, env = "ASM_GOE_OUT_DIR")]
    out_dir: Option<PathBuf>,
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Text,
    Json,
    Csv,
    Ndjson,
}

impl Format {
    fn ext(self) -> &'static str {
        match self {
            Format::Text => "txt",
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Ndjson => "ndjson",
        }
    }
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// |A_n| by the product formula, or Gog(n,k) and Magog(n,k) with --k.
    Count(CountArgs),
    /// All objects of a kind for size n, one JSON object per line.
    Enumerate(EnumerateArgs),
    /// Apply the ASM, PCSM and gog bijections to one ASM.
    Biject(BijectArgs),
    /// P[no particle in {0, ..., s-1}].
    Gap(GapArgs),
    /// Law of max T_n.
    Law(LawArgs),
    /// Pfaffian and inverse checks of the Kasteleyn matrix.
    KasteleynCheck(KasteleynArgs),
    /// F1(s), or a CSV table with --from/--to/--step.
    TwGoe(TwArgs),
    /// Rescaled kernel against K_GOE.
    Converge(ConvergeArgs),
    /// Saddle points, second derivatives and decay exponent at a.
    Saddle(SaddleArgs),
    /// Points of the limit shape of the top path.
    LimitShape(LimitShapeArgs),
    /// Glauber samples of uniform PCSMs.
    Sample(SampleArgs),
    /// Empirical law of rescaled max T_n with its KS distance to F1.
    MaxLaw(MaxLawArgs),
    /// Run the acceptance suite.
    VerifyAll(VerifyArgs),
}

#[derive(Args, Debug, Serialize)]
struct CountArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_COUNT_CAP)]
    cap: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Kind {
    Asm,
    Pcsm,
    Gog,
    Matching,
}

#[derive(Args, Debug, Serialize)]
struct EnumerateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value = "asm")]
    kind: Kind,
    /// Trapezoid width for `--kind gog` (defaults to n).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_ENUM_CAP)]
    cap: usize,
}

#[derive(Args, Debug, Serialize)]
struct BijectArgs {
    /// ASM as a JSON array of rows, e.g. '[[0,1,0],[1,-1,1],[0,1,0]]'.
    #[arg(long)]
    asm: String,
}

#[derive(Args, Debug, Serialize)]
struct PrecisionArgs {
    /// Exact rational arithmetic (the default).
    #[arg(long, conflicts_with = "bits")]
    exact: bool,
    /// Big-float arithmetic with this many mantissa bits.
    #[arg(long)]
    bits: Option<usize>,
}

impl PrecisionArgs {
    fn policy(&self) -> Result<PrecisionPolicy, Failure> {
        match self.bits {
            Some(b) if b < 64 => Err(Failure::Config(format!("--bits must be at least 64, got {b}"))),
            Some(b) => Ok(PrecisionPolicy::big_float(b)),
            None => Ok(PrecisionPolicy::exact()),
        }
    }

    fn label(&self) -> String {
        self.bits.map_or("exact".into(), |b| format!("bigfloat-{b}"))
    }
}

#[derive(Args, Debug, Serialize)]
struct GapArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    s: usize,
    #[command(flatten)]
    precision: PrecisionArgs,
}

#[derive(Args, Debug, Serialize)]
struct LawArgs {
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    precision: PrecisionArgs,
}

#[derive(Args, Debug, Serialize)]
struct KasteleynArgs {
    #[arg(long)]
    n: usize,
    /// Also check K K^-1 = I (exact; practical for n <= 5).
    #[arg(long)]
    inverse: bool,
}

#[derive(Args, Debug, Serialize)]
struct TwArgs {
    #[arg(long, allow_negative_numbers = true, required_unless_present = "from")]
    s: Option<f64>,
    #[arg(long, allow_negative_numbers = true, requires_all = ["to", "step"])]
    from: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    to: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_NODES)]
    nodes: usize,
    #[arg(long, default_value_t = DEFAULT_TRUNCATION)]
    truncation: f64,
}

#[derive(Args, Debug, Serialize)]
struct ConvergeArgs {
    #[arg(long, default_value_t = 1)]
    i: usize,
    #[arg(long, default_value_t = 1)]
    j: usize,
    /// Largest n of the sequence 50, 100, 200, 400.
    #[arg(long, default_value_t = 400)]
    nmax: usize,
    /// Explicit sizes, overriding --nmax.
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    #[arg(long, allow_negative_numbers = true, default_value_t = -3.0)]
    lo: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 3.0)]
    hi: f64,
    #[arg(long, default_value_t = 0.5)]
    step: f64,
}

#[derive(Args, Debug, Serialize)]
struct SaddleArgs {
    #[arg(long)]
    a: f64,
    /// Include the steepest-descent trace from w+(a).
    #[arg(long)]
    trace: bool,
    #[arg(long, default_value_t = 1e-3)]
    trace_step: f64,
}

#[derive(Args, Debug, Serialize)]
struct LimitShapeArgs {
    #[arg(long, default_value_t = 101)]
    points: usize,
}

#[derive(Args, Debug, Serialize)]
struct SampleArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Sweeps per sample (default 10 n).
    #[arg(long)]
    sweeps: Option<usize>,
    #[arg(long, env = "ASM_GOE_SEED", default_value_t = 0)]
    seed: u64,
    /// Emit max T_n, T_n(0) and x_gog per sample instead of the PCSM.
    #[arg(long)]
    summary: bool,
}

#[derive(Args, Debug, Serialize)]
struct MaxLawArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1000)]
    count: usize,
    /// Sweeps per independent chain (default 10 n).
    #[arg(long, conflicts_with = "chains")]
    sweeps: Option<usize>,
    /// Draw from this many long chains with burn-in and thinning instead.
    #[arg(long)]
    chains: Option<usize>,
    /// Burn-in sweeps per chain (default 2 n^2).
    #[arg(long, requires = "chains")]
    burn_in: Option<usize>,
    /// Sweeps between kept samples (default 4 n).
    #[arg(long, requires = "chains")]
    thin: Option<usize>,
    #[arg(long, env = "ASM_GOE_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    /// Only these criteria.
    #[arg(long, value_delimiter = ',')]
    only: Vec<usize>,
    /// Skip these criteria.
    #[arg(long, value_delimiter = ',')]
    skip: Vec<usize>,
}

/// Exit 2 for invalid configuration, 1 for failed computation or validation.
#[derive(Debug)]
enum Failure {
    Config(String),
    Compute(anyhow::Error),
}

impl From<LibError> for Failure {
    fn from(e: LibError) -> Self {
        match e {
            LibError::OutOfRange(_)
            | LibError::Domain(_)
            | LibError::CapExceeded { .. }
            | LibError::InvalidMatrix(_)
            | LibError::InvalidArray(_)
            | LibError::InvalidMatching(_) => Failure::Config(e.to_string()),
            _ => Failure::Compute(e.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Compute(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Compute(e.into())
    }
}

type Run<T> = Result<T, Failure>;

/// One artifact: a body in some format, plus whether validation passed.
struct Output {
    format: Format,
    body: String,
    ok: bool,
}

struct Ctx<'a> {
    cli: &'a Cli,
    name: &'static str,
}

impl Ctx<'_> {
    fn header(&self) -> Value {
        json!({
            "tool": "asm-goe",
            "version": VERSION,
            "command": self.name,
            "config": serde_json::to_value(self.cli).unwrap_or(Value::Null),
        })
    }

    fn format(&self, default: Format) -> Format {
        self.cli.format.unwrap_or(default)
    }

    fn json(&self, precision: &str, result: Value) -> String {
        let mut v = self.header();
        v["precision"] = json!(precision);
        v["result"] = result;
        serde_json::to_string_pretty(&v).unwrap()
    }

    fn csv(&self, columns: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
        let mut s = format!("# {}\n{}\n", self.header(), columns.join(","));
        for r in rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }

    fn ndjson(&self, rows: impl IntoIterator<Item = Value>) -> String {
        let mut s = format!("{}\n", self.header());
        for r in rows {
            s.push_str(&r.to_string());
            s.push('\n');
        }
        s
    }

    /// A scalar: bare text by default, the JSON envelope on request.
    fn scalar(&self, text: String, precision: &str, result: Value, ok: bool) -> Run<Output> {
        match self.format(Format::Text) {
            Format::Text => Ok(Output { format: Format::Text, body: format!("{text}\n"), ok }),
            Format::Json => Ok(Output { format: Format::Json, body: self.json(precision, result), ok }),
            f => Err(Failure::Config(format!("{} output is not available for {}", f.ext(), self.name))),
        }
    }

    fn only(&self, allowed: &[Format], default: Format) -> Run<Format> {
        let f = self.format(default);
        if allowed.contains(&f) {
            Ok(f)
        } else {
            Err(Failure::Config(format!("{} output is not available for {}", f.ext(), self.name)))
        }
    }
}

fn positive(name: &str, v: usize) -> Run<()> {
    if v == 0 {
        Err(Failure::Config(format!("--{name} must be positive")))
    } else {
        Ok(())
    }
}

fn finite(name: &str, v: f64) -> Run<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Failure::Config(format!("--{name} must be finite")))
    }
}

fn count(ctx: &Ctx, a: &CountArgs) -> Run<Output> {
    positive("n", a.n)?;
    positive("cap", a.cap)?;
    match a.k {
        None => {
            let c = count_asm(a.n).to_string();
            ctx.scalar(c.clone(), "exact", json!({ "n": a.n, "asm": c }), true)
        }
        Some(k) => {
            if k == 0 || k > a.n {
                return Err(Failure::Config(format!("--k must lie in 1..={}", a.n)));
            }
            let g = count_gog_trapezoids(a.n, k, a.cap)?.to_string();
            let m = count_magog_trapezoids(a.n, k, a.cap)?.to_string();
            let ok = g == m;
            let text = if ok { g.clone() } else { format!("gog {g} != magog {m}") };
            ctx.scalar(text, "exact", json!({ "n": a.n, "k": k, "gog": g, "magog": m, "equal": ok }), ok)
        }
    }
}

fn enumerate(ctx: &Ctx, a: &EnumerateArgs) -> Run<Output> {
    positive("n", a.n)?;
    positive("cap", a.cap)?;
    ctx.only(&[Format::Ndjson], Format::Ndjson)?;
    let rows: Vec<Value> = match a.kind {
        Kind::Asm => enumerate_asm(a.n, a.cap)?.iter().map(|x| json!(x)).collect(),
        Kind::Pcsm => enumerate_pcsm(a.n, a.cap)?
            .iter()
            .map(|c| json!({ "pcsm": c, "x_gog": x_gog(c), "max_t": top_path(c).max() }))
            .collect(),
        Kind::Gog => {
            let k = a.k.unwrap_or(a.n);
            if k == 0 || k > a.n {
                return Err(Failure::Config(format!("--k must lie in 1..={}", a.n)));
            }
            enumerate_gog_trapezoids(a.n, k, a.cap)?.iter().map(|x| json!(x)).collect()
        }
        Kind::Matching => enumerate_matchings(a.n, a.cap)?
            .iter()
            .map(|m| -> Run<Value> {
                Ok(json!({ "matching": m, "x_magog": x_magog(m), "magog": matching_to_magog(m)? }))
            })
            .collect::<Run<_>>()?,
    };
    Ok(Output { format: Format::Ndjson, body: ctx.ndjson(rows), ok: true })
}

fn biject(ctx: &Ctx, a: &BijectArgs) -> Run<Output> {
    ctx.only(&[Format::Json], Format::Json)?;
    let rows: Vec<Vec<i8>> =
        serde_json::from_str(&a.asm).map_err(|e| Failure::Config(format!("--asm is not a JSON array of rows: {e}")))?;
    let refs: Vec<&[i8]> = rows.iter().map(|r| r.as_slice()).collect();
    let asm = AsmMatrix::from_rows(&refs)?;
    let pcsm: PcsmMatrix = asm_to_pcsm(&asm)?;
    let gog = asm_to_gog(&asm)?;
    let via_pcsm = pcsm_to_asm(&pcsm)?;
    let via_gog = gog_to_asm(&gog)?;
    let ok = via_pcsm == asm && via_gog == asm;
    let path = top_path(&pcsm);
    let result = json!({
        "asm": asm,
        "pcsm": pcsm,
        "gog": gog,
        "top_path": path.values(),
        "max_t": path.max(),
        "x_gog": x_gog(&pcsm),
        "round_trip": ok,
    });
    Ok(Output { format: Format::Json, body: ctx.json("exact", result), ok })
}

fn gap(ctx: &Ctx, a: &GapArgs) -> Run<Output> {
    positive("n", a.n)?;
    if a.s > a.n {
        return Err(Failure::Config(format!("--s must lie in 0..={}", a.n)));
    }
    let policy = a.precision.policy()?;
    let label = a.precision.label();
    match a.precision.bits {
        None => {
            let g = asm_goe::kernel::gap_probability(a.n, a.s)?;
            let s = rational_string(&g);
            ctx.scalar(s.clone(), &label, json!({ "n": a.n, "s": a.s, "value": s }), true)
        }
        Some(bits) => {
            let g = KernelTables::big_float(a.n, bits).gap_probabilities(&policy)?[a.s].to_f64();
            ctx.scalar(format!("{g:e}"), &label, json!({ "n": a.n, "s": a.s, "value": g }), true)
        }
    }
}

fn law(ctx: &Ctx, a: &LawArgs) -> Run<Output> {
    positive("n", a.n)?;
    let policy = a.precision.policy()?;
    let law = law_of_max_t(a.n, &policy)?;
    let total: f64 = law.table.iter().map(|p| p.1).sum();
    let ok = (total - 1.0).abs() < 1e-9 && law.table.iter().all(|p| p.1 > -1e-12);
    match ctx.only(&[Format::Json, Format::Csv], Format::Json)? {
        Format::Csv => {
            let exact = law.exact.clone();
            let rows = law.table.iter().enumerate().map(|(k, (v, p))| {
                let mut r = vec![v.to_string(), format!("{p:e}"), format!("{:e}", law.cdf(*v as f64))];
                if let Some(e) = &exact {
                    r.push(e[k].clone());
                }
                r
            });
            let cols: &[&str] = if law.exact.is_some() {
                &["max_t", "probability", "cdf", "exact"]
            } else {
                &["max_t", "probability", "cdf"]
            };
            Ok(Output { format: Format::Csv, body: ctx.csv(cols, rows), ok })
        }
        _ => Ok(Output { format: Format::Json, body: ctx.json(&a.precision.label(), json!(law)), ok }),
    }
}

fn kasteleyn_check(ctx: &Ctx, a: &KasteleynArgs) -> Run<Output> {
    positive("n", a.n)?;
    ctx.only(&[Format::Json], Format::Json)?;
    let k = build_kasteleyn(a.n)?;
    let pf = k.pfaffian()?;
    let target = count_asm(a.n + 1);
    let pf_ok = pf.numer().magnitude() == &target && pf.is_integer();
    let mut result = json!({
        "n": a.n,
        "pfaffian": rational_string(&pf),
        "asm_count": target.to_string(),
        "pfaffian_matches": pf_ok,
    });
    let mut ok = pf_ok;
    if a.inverse {
        let m = k.to_rational();
        let inv = kinverse_matrix(a.n)?;
        let size = m.len();
        let zero = Rational::from_integer(0.into());
        let one = Rational::from_integer(1.into());
        let mut bad = 0usize;
        for i in 0..size {
            for j in 0..size {
                let s = (0..size).fold(zero.clone(), |acc, l| acc + &m[i][l] * &inv[l][j]);
                if s != if i == j { one.clone() } else { zero.clone() } {
                    bad += 1;
                }
            }
        }
        result["inverse_mismatches"] = json!(bad);
        ok &= bad == 0;
    }
    Ok(Output { format: Format::Json, body: ctx.json("exact", result), ok })
}

fn tw_goe(ctx: &Ctx, a: &TwArgs) -> Run<Output> {
    positive("nodes", a.nodes)?;
    finite("truncation", a.truncation)?;
    let rule = QuadratureRule::new(a.nodes, a.truncation)?;
    if let (Some(from), Some(to), Some(step)) = (a.from, a.to, a.step) {
        if !(step > 0.0 && from.is_finite() && to.is_finite() && from <= to) {
            return Err(Failure::Config("need finite --from <= --to and --step > 0".into()));
        }
        let grid = asy::grid(from, to, step);
        let vals = grid.iter().map(|&s| f1(s, &rule)).collect::<Result<Vec<_>, _>>()?;
        let ok = vals.windows(2).all(|w| w[1].value >= w[0].value - w[0].error);
        return match ctx.only(&[Format::Csv, Format::Json], Format::Csv)? {
            Format::Json => Ok(Output { format: Format::Json, body: ctx.json("f64", json!(vals)), ok }),
            _ => {
                let rows = vals.iter().map(|r| vec![r.s.to_string(), format!("{:e}", r.value), format!("{:e}", r.error)]);
                Ok(Output { format: Format::Csv, body: ctx.csv(&["s", "f1", "error"], rows), ok })
            }
        };
    }
    let s = a.s.ok_or_else(|| Failure::Config("need --s or --from/--to/--step".into()))?;
    finite("s", s)?;
    let r = f1(s, &rule)?;
    let ok = (-1e-9..=1.0 + 1e-9).contains(&r.value);
    ctx.scalar(format!("{}", r.value), "f64", json!(r), ok)
}

fn converge(ctx: &Ctx, a: &ConvergeArgs) -> Run<Output> {
    if !(1..=2).contains(&a.i) || !(1..=2).contains(&a.j) {
        return Err(Failure::Config("--i and --j must be 1 or 2".into()));
    }
    if !(a.step > 0.0 && a.lo.is_finite() && a.hi.is_finite() && a.lo <= a.hi) {
        return Err(Failure::Config("need finite --lo <= --hi and --step > 0".into()));
    }
    let sizes: Vec<usize> = if a.sizes.is_empty() {
        DEFAULT_SIZES.iter().copied().filter(|&n| n <= a.nmax).collect()
    } else {
        a.sizes.clone()
    };
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Failure::Config("no positive sizes selected".into()));
    }
    let rows = asy::convergence_study(&[(a.i, a.j)], &sizes, &asy::grid(a.lo, a.hi, a.step))?;
    match ctx.only(&[Format::Csv, Format::Json], Format::Csv)? {
        Format::Json => {
            let sup: Vec<Value> =
                asy::sup_errors(&rows).iter().map(|e| json!({ "n": e.0, "sup_error": e.3 })).collect();
            Ok(Output { format: Format::Json, body: ctx.json("bigfloat-128", json!({ "rows": rows, "sup": sup })), ok: true })
        }
        _ => {
            let lines = rows.iter().map(|r| {
                vec![
                    r.n.to_string(),
                    r.xi.to_string(),
                    r.eta.to_string(),
                    format!("{:e}", r.rescaled),
                    format!("{:e}", r.goe),
                    format!("{:e}", r.abs_err),
                ]
            });
            Ok(Output { format: Format::Csv, body: ctx.csv(&["n", "xi", "eta", "rescaled", "goe", "abs_err"], lines), ok: true })
        }
    }
}

fn saddle(ctx: &Ctx, a: &SaddleArgs) -> Run<Output> {
    finite("a", a.a)?;
    ctx.only(&[Format::Json], Format::Json)?;
    let report = asy::saddle_report(a.a)?;
    let mut result = json!(report);
    let mut ok = true;
    if a.trace {
        let t = asy::steepest_descent_trace(a.a, a.trace_step, 1e-9)?;
        let miss = (t.endpoint() - a.a).norm();
        ok = miss < 1e-6;
        result["trace"] = json!(t);
        result["trace_landing_error"] = json!(miss);
    }
    Ok(Output { format: Format::Json, body: ctx.json("f64", result), ok })
}

fn limit_shape(ctx: &Ctx, a: &LimitShapeArgs) -> Run<Output> {
    if a.points < 2 {
        return Err(Failure::Config("--points must be at least 2".into()));
    }
    let pts = asy::limit_shape(a.points)?;
    let ok = pts.iter().all(|&(x, y)| asy::limit_shape_residual(x, y).abs() < 1e-9);
    match ctx.only(&[Format::Csv, Format::Json], Format::Csv)? {
        Format::Json => Ok(Output { format: Format::Json, body: ctx.json("f64", json!(pts)), ok }),
        _ => {
            let rows = pts.iter().map(|(x, y)| vec![x.to_string(), y.to_string()]);
            Ok(Output { format: Format::Csv, body: ctx.csv(&["x", "y"], rows), ok })
        }
    }
}

fn sample(ctx: &Ctx, a: &SampleArgs) -> Run<Output> {
    if a.n < 2 {
        return Err(Failure::Config("--n must be at least 2".into()));
    }
    positive("count", a.count)?;
    ctx.only(&[Format::Ndjson], Format::Ndjson)?;
    let sweeps = a.sweeps.unwrap_or_else(|| default_sweeps(a.n));
    let samples = sample_many(a.n, a.count, sweeps, a.seed)?;
    let rows = samples.iter().enumerate().map(|(k, c)| {
        let path = top_path(c);
        let stats = json!({ "index": k, "max_t": path.max(), "t0": path.at(0), "x_gog": x_gog(c) });
        if a.summary {
            stats
        } else {
            json!({ "index": k, "max_t": path.max(), "t0": path.at(0), "x_gog": x_gog(c), "pcsm": c })
        }
    });
    Ok(Output { format: Format::Ndjson, body: ctx.ndjson(rows.collect::<Vec<_>>()), ok: true })
}

fn max_law(ctx: &Ctx, a: &MaxLawArgs) -> Run<Vec<Output>> {
    if a.n < 2 {
        return Err(Failure::Config("--n must be at least 2".into()));
    }
    positive("count", a.count)?;
    let e = match a.chains {
        Some(chains) => {
            positive("chains", chains)?;
            let d = ChainPlan::for_size(a.n);
            let plan = ChainPlan { chains, burn_in: a.burn_in.unwrap_or(d.burn_in), thin: a.thin.unwrap_or(d.thin) };
            positive("thin", plan.thin)?;
            empirical_max_law_chains(a.n, a.count, plan, a.seed)?
        }
        None => empirical_max_law(a.n, a.count, a.sweeps.unwrap_or_else(|| default_sweeps(a.n)), a.seed)?,
    };
    let ks = e.ks_to_f1(&QuadratureRule::default_rule())?;
    let rows = e.steps().into_iter().map(|(s, c)| vec![s.to_string(), format!("{c}")]);
    let csv = Output { format: Format::Csv, body: ctx.csv(&["s", "ecdf"], rows), ok: true };
    let t0_mean = e.t0.iter().sum::<f64>() / e.t0.len() as f64;
    let t0_var = e.t0.iter().map(|v| (v - t0_mean).powi(2)).sum::<f64>() / e.t0.len() as f64;
    let summary = json!({
        "n": e.n,
        "samples": e.samples,
        "center": e.center,
        "scale": e.scale,
        "ks_to_f1": ks,
        "t0_mean": t0_mean,
        "t0_variance": t0_var,
    });
    let js = Output { format: Format::Json, body: ctx.json("f64", summary), ok: true };
    Ok(vec![csv, js])
}

fn verify_all(ctx: &Ctx, a: &VerifyArgs) -> Run<Output> {
    ctx.only(&[Format::Json], Format::Json)?;
    let ids: Vec<usize> = verify::CRITERIA
        .iter()
        .map(|c| c.0)
        .filter(|id| (a.only.is_empty() || a.only.contains(id)) && !a.skip.contains(id))
        .collect();
    let mut reports = Vec::new();
    for id in ids {
        let r = verify::run(id);
        eprintln!("{}", r.line());
        reports.push(r);
    }
    let ok = reports.iter().all(|r| r.passed);
    Ok(Output { format: Format::Json, body: ctx.json("mixed", json!({ "passed": ok, "criteria": reports })), ok })
}

fn dispatch(cli: &Cli) -> Run<Vec<Output>> {
    let name = match &cli.command {
        Command::Count(_) => "count",
        Command::Enumerate(_) => "enumerate",
        Command::Biject(_) => "biject",
        Command::Gap(_) => "gap",
        Command::Law(_) => "law",
        Command::KasteleynCheck(_) => "kasteleyn-check",
        Command::TwGoe(_) => "tw-goe",
        Command::Converge(_) => "converge",
        Command::Saddle(_) => "saddle",
        Command::LimitShape(_) => "limit-shape",
        Command::Sample(_) => "sample",
        Command::MaxLaw(_) => "max-law",
        Command::VerifyAll(_) => "verify-all",
    };
    let ctx = Ctx { cli, name };
    let one = |o: Run<Output>| o.map(|o| vec![o]);
    match &cli.command {
        Command::Count(a) => one(count(&ctx, a)),
        Command::Enumerate(a) => one(enumerate(&ctx, a)),
        Command::Biject(a) => one(biject(&ctx, a)),
        Command::Gap(a) => one(gap(&ctx, a)),
        Command::Law(a) => one(law(&ctx, a)),
        Command::KasteleynCheck(a) => one(kasteleyn_check(&ctx, a)),
        Command::TwGoe(a) => one(tw_goe(&ctx, a)),
        Command::Converge(a) => one(converge(&ctx, a)),
        Command::Saddle(a) => one(saddle(&ctx, a)),
        Command::LimitShape(a) => one(limit_shape(&ctx, a)),
        Command::Sample(a) => one(sample(&ctx, a)),
        Command::MaxLaw(a) => max_law(&ctx, a),
        Command::VerifyAll(a) => one(verify_all(&ctx, a)),
    }
}

fn command_name(cli: &Cli) -> String {
    serde_json::to_value(&cli.command)
        .ok()
        .and_then(|v| v.as_object().and_then(|o| o.keys().next().cloned()))
        .unwrap_or_else(|| "output".into())
}

fn emit(cli: &Cli, outputs: &[Output]) -> Run<()> {
    match &cli.out_dir {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let name = command_name(cli);
            for o in outputs {
                let path = dir.join(format!("{name}.{}", o.format.ext()));
                fs::write(&path, &o.body)?;
                eprintln!("wrote {}", path.display());
            }
        }
        None => {
            let mut out = std::io::stdout().lock();
            for o in outputs {
                out.write_all(o.body.as_bytes())?;
                if !o.body.ends_with('\n') {
                    out.write_all(b"\n")?;
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
        eprintln!("error: {}", anyhow!(e));
        return ExitCode::from(1);
    }
    let result = dispatch(&cli).and_then(|outs| {
        emit(&cli, &outs)?;
        Ok(outs.iter().all(|o| o.ok))
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: internal validation failed");
            ExitCode::from(1)
        }
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
