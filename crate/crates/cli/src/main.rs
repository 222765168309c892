//! `popbelief`: command-line front end for the feasibility library.

mod plot;

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use popbelief::feasibility::check_feasible;
use popbelief::json::{encode_scalar, Json, NumberFormat, Problem};
use popbelief::measures::total_variation;
use popbelief::persuasion::{grid_concavification, persuasion_policy};
use popbelief::polarization::{max_polarization, search_polarization};
use popbelief::product::{binary_product_criterion, product_feasible, threshold_curve};
use popbelief::structures::{
    expand_scheme, induced_population_law, simulate_sharded, synthesize, DEFAULT_PROFILE_BOUND,
};
use popbelief::{
    Error, InformationStructure, PersuasionInstance, Prior, Rational, Scalar, SenderUtility,
    SymmetricProduct,
};

const BOUND_VAR: &str = "POPBELIEF_MAX_PROFILES";

const PROBLEM_SCHEMA: &str = "\
Input schema (feasible, synthesize, simulate):
  {\"mu\": PRIOR, \"law\": {\"n\": N, \"atoms\": [{\"empirical\": EMPIRICAL, \"weight\": NUM}, ...]}}
  NUM       exact number: \"p/q\", integer, or decimal literal (string or JSON number)
  PRIOR     belief with full support
  BELIEF    [NUM, ...] state probabilities, or a bare NUM p meaning [1-p, p]
  EMPIRICAL {\"n\": N, \"counts\": [{\"belief\": BELIEF, \"count\": K}, ...]} or [BELIEF, ...]
Pass a file path, '-' for stdin, or inline JSON.";

const STRUCTURE_SCHEMA: &str = "\
Input schema (oracle):
  {\"n\": N, \"m\": M, \"mu\": PRIOR, \"signal_sets\": [[\"s\", ...], ...],
   \"kernel\": [{\"state\": W, \"profiles\": [{\"signals\": [\"s\", ...], \"prob\": NUM}, ...]}, ...]}
Each state's profile probabilities must sum to 1.";

const PRODUCT_SCHEMA: &str = "\
Input schema (product-check):
  {\"mu\": PRIOR, \"n\": N, \"q\": [{\"belief\": BELIEF, \"weight\": NUM}, ...]}";

const UTILITY_HELP: &str = "\
Utility: a JSON array of n+1 non-decreasing values on the grid 0, 1/n, ..., 1,
'linear' for u(x) = x, or 'threshold:k' for 1 once at least k agents adopt.";

#[derive(Parser)]
#[command(name = "popbelief", version, about = "Feasibility of population posterior-belief laws")]
struct Cli {
    /// Render numbers as decimals with this many digits (display only).
    #[arg(long, global = true, value_name = "D")]
    decimal: Option<usize>,

    /// Write the JSON result here instead of stdout.
    #[arg(short, long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide feasibility of a law under a prior.
    #[command(after_long_help = PROBLEM_SCHEMA)]
    Feasible { input: String },

    /// Build the symmetric scheme realizing a feasible law.
    #[command(after_long_help = PROBLEM_SCHEMA)]
    Synthesize {
        input: String,
        /// Emit the explicit information structure instead of the compact scheme.
        #[arg(long)]
        expand: bool,
    },

    /// Induced law of an explicit information structure.
    #[command(after_long_help = STRUCTURE_SCHEMA)]
    Oracle { input: String },

    /// Monte-Carlo estimate of the law produced by the synthesized scheme.
    #[command(after_long_help = PROBLEM_SCHEMA)]
    Simulate {
        input: String,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Worker count; the output does not depend on it.
        #[arg(long, default_value_t = 1)]
        shards: usize,
    },

    /// Maximal expected polarization and its bracket.
    Polarize(PolarizeArgs),

    /// Feasibility of an agent-symmetric product law.
    #[command(name = "product-check", after_long_help = PRODUCT_SCHEMA)]
    ProductCheck { input: String },

    /// Thresholds on `a` for the symmetric two-posterior product family.
    #[command(name = "product-threshold-curve")]
    ProductThresholdCurve(CurveArgs),

    /// Product-law commands, grouped.
    #[command(subcommand)]
    Product(ProductCommand),

    /// Optimal private persuasion of n agents.
    #[command(after_long_help = UTILITY_HELP)]
    Persuade(PersuadeArgs),
}

#[derive(Subcommand)]
enum ProductCommand {
    #[command(after_long_help = PRODUCT_SCHEMA)]
    Check { input: String },
    #[command(name = "threshold-curve")]
    ThresholdCurve(CurveArgs),
}

#[derive(Args)]
struct PolarizeArgs {
    #[arg(long)]
    n: usize,
    /// Prior: probability of state 1, or a JSON belief.
    #[arg(long)]
    mu: String,
    /// Also search two-signal structures with probabilities on a 1/D grid (n <= 4).
    #[arg(long, value_name = "D")]
    search: Option<usize>,
    /// CSV of (n, lower, upper, achieved) for 1..=n; '-' for stdout.
    #[arg(long)]
    csv: Option<String>,
}

#[derive(Args)]
struct CurveArgs {
    #[arg(long)]
    n_max: usize,
    /// CSV of (n, threshold); '-' for stdout.
    #[arg(long)]
    csv: Option<String>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct PersuadeArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    mu: String,
    #[arg(long)]
    tau: String,
    #[arg(long)]
    u: String,
    /// CSV of (grid, u, cav); '-' for stdout.
    #[arg(long)]
    csv: Option<String>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

/// Failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::ResourceLimit { .. }) { 1 } else { 2 };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

type Outcome<T> = Result<T, Failure>;

struct Ctx {
    format: NumberFormat,
    output: Option<PathBuf>,
    stdout_taken: bool,
}

impl Ctx {
    fn num(&self, x: &Rational) -> Value {
        encode_scalar(x, self.format)
    }

    fn cell(&self, x: &Rational) -> String {
        match self.format {
            NumberFormat::Exact => x.to_canonical_string(),
            NumberFormat::Decimal(d) => x.to_decimal_string(d),
        }
    }

    fn emit(&self, v: &Value) -> Outcome<()> {
        let text = serde_json::to_string_pretty(v).expect("serializable") + "\n";
        match &self.output {
            Some(path) => write_file(path, &text),
            None if self.stdout_taken => Ok(()),
            None => write_stdout(&text),
        }
    }

    /// Writes a CSV to a path or stdout; stdout CSV replaces the JSON.
    fn table(&mut self, target: &str, header: &str, rows: Vec<Vec<String>>) -> Outcome<()> {
        let mut text = String::from(header);
        text.push('\n');
        for row in rows {
            text.push_str(&row.join(","));
            text.push('\n');
        }
        if target == "-" {
            self.stdout_taken = self.output.is_none();
            write_stdout(&text)
        } else {
            write_file(Path::new(target), &text)
        }
    }
}

fn write_stdout(text: &str) -> Outcome<()> {
    io::stdout()
        .write_all(text.as_bytes())
        .map_err(|e| Failure { code: 1, message: e.to_string() })
}

fn write_file(path: &Path, text: &str) -> Outcome<()> {
    fs::write(path, text).map_err(|e| Failure {
        code: 1,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

fn read_input(input: &str) -> Outcome<Value> {
    let text = if input == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| usage(format!("cannot read stdin: {e}")))?;
        s
    } else if input.trim_start().starts_with(['{', '[']) {
        input.to_owned()
    } else {
        fs::read_to_string(input).map_err(|e| usage(format!("cannot read {input}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| usage(format!("malformed JSON in {input}: {e}")))
}

fn decode<X: Json>(v: &Value) -> Outcome<X> {
    Ok(X::decode(v)?)
}

/// Reads a number or JSON value given on the command line.
fn arg_value(s: &str) -> Value {
    serde_json::from_str(s).unwrap_or_else(|_| Value::String(s.to_owned()))
}

fn arg_scalar(name: &str, s: &str) -> Outcome<Rational> {
    Rational::parse_exact(s).ok_or_else(|| usage(format!("--{name}: not an exact number: {s:?}")))
}

fn profile_bound() -> Outcome<u128> {
    match std::env::var(BOUND_VAR) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| usage(format!("{BOUND_VAR} must be a non-negative integer, got {s:?}"))),
        Err(_) => Ok(DEFAULT_PROFILE_BOUND),
    }
}

fn feasible_scheme(problem: &Problem<Rational>) -> Outcome<popbelief::SymmetricScheme> {
    let v = check_feasible(&problem.law, &problem.mu);
    let Some(d) = &v.decomposition else {
        let kind = v.certificate.as_ref().map_or("unknown", |c| c.kind());
        return Err(usage(format!("law is not feasible under the prior ({kind})")));
    };
    Ok(synthesize(&problem.law, &problem.mu, d)?)
}

fn utility(preset: &str, n: usize) -> Outcome<SenderUtility> {
    let u = if preset == "linear" {
        SenderUtility::linear(n)?
    } else if let Some(k) = preset.strip_prefix("threshold:") {
        let k = k.parse().map_err(|_| usage(format!("bad threshold in {preset:?}")))?;
        SenderUtility::threshold(n, k)?
    } else {
        let v: Value = serde_json::from_str(preset).map_err(|e| usage(format!("--u: {e}")))?;
        SenderUtility::decode(&v)?
    };
    if u.n() != n {
        return Err(usage(format!("--u has {} values, expected {}", u.values().len(), n + 1)));
    }
    Ok(u)
}

fn curve(ctx: &mut Ctx, args: &CurveArgs) -> Outcome<()> {
    let rows = threshold_curve::<Rational>(args.n_max)?;
    if let Some(path) = &args.svg {
        let bars: Vec<(String, f64)> = rows.iter().map(|(n, t)| (n.to_string(), t.to_f64())).collect();
        write_file(path, &plot::bars(&bars, "n", "threshold a", (0.0, 0.5)))?;
    }
    if let Some(target) = &args.csv {
        let cells = rows.iter().map(|(n, t)| vec![n.to_string(), ctx.cell(t)]).collect();
        ctx.table(target, "n,threshold", cells)?;
    }
    let out = json!({
        "rows": rows.iter().map(|(n, t)| json!({"n": n, "threshold": ctx.num(t)})).collect::<Vec<_>>(),
    });
    ctx.emit(&out)
}

fn product_check(ctx: &Ctx, input: &str) -> Outcome<()> {
    let v = read_input(input)?;
    let mu: Prior = decode(v.get("mu").ok_or_else(|| usage("missing field \"mu\""))?)?;
    let sp: SymmetricProduct = decode(&v)?;
    let verdict = product_feasible(&sp, &mu, profile_bound()?)?;
    let mut out = verdict.encode(ctx.format);
    // two-posterior marginals also get the one-dimensional criterion
    if let [(x, _), (y, _)] = sp.q().atoms() {
        let (lo, hi) = if x.coord(1) < y.coord(1) { (x, y) } else { (y, x) };
        if mu.states() == 2 && lo.coord(1) < mu.mass(1) && mu.mass(1) < hi.coord(1) {
            out["criterion"] = json!(binary_product_criterion(sp.n(), lo.coord(1), hi.coord(1), mu.mass(1))?);
        }
    }
    ctx.emit(&out)
}

fn run(cli: Cli) -> Outcome<()> {
    let mut ctx = Ctx {
        format: cli.decimal.map_or(NumberFormat::Exact, NumberFormat::Decimal),
        output: cli.output,
        stdout_taken: false,
    };
    let f = ctx.format;
    match cli.command {
        Command::Feasible { input } => {
            let p: Problem<Rational> = decode(&read_input(&input)?)?;
            ctx.emit(&check_feasible(&p.law, &p.mu).encode(f))
        }
        Command::Synthesize { input, expand } => {
            let p: Problem<Rational> = decode(&read_input(&input)?)?;
            let scheme = feasible_scheme(&p)?;
            if expand {
                ctx.emit(&expand_scheme(&scheme, profile_bound()?)?.encode(f))
            } else {
                ctx.emit(&scheme.encode(f))
            }
        }
        Command::Oracle { input } => {
            let g: InformationStructure = decode(&read_input(&input)?)?;
            ctx.emit(&induced_population_law(&g)?.encode(f))
        }
        Command::Simulate { input, seed, samples, shards } => {
            let p: Problem<Rational> = decode(&read_input(&input)?)?;
            let scheme = feasible_scheme(&p)?;
            let est = simulate_sharded(&scheme, samples, seed, shards)?;
            let tv = total_variation(est.measure(), p.law.measure());
            ctx.emit(&json!({
                "seed": seed,
                "samples": samples,
                "law": est.encode(f),
                "total_variation": ctx.num(&tv),
            }))
        }
        Command::Polarize(args) => {
            let mu: Prior = decode(&arg_value(&args.mu))?;
            let report = match args.search {
                Some(d) => search_polarization(args.n, &mu, d)?,
                None => max_polarization(args.n, &mu)?,
            };
            if let Some(target) = &args.csv {
                let rows = (1..=args.n)
                    .map(|n| {
                        let r = if n == args.n { report.clone() } else { max_polarization(n, &mu)? };
                        Ok(vec![n.to_string(), ctx.cell(&r.lower_bound), ctx.cell(&r.upper_bound), ctx.cell(&r.value)])
                    })
                    .collect::<Outcome<Vec<_>>>()?;
                ctx.table(target, "n,lower,upper,achieved", rows)?;
            }
            ctx.emit(&report.encode(f))
        }
        Command::ProductCheck { input } | Command::Product(ProductCommand::Check { input }) => {
            product_check(&ctx, &input)
        }
        Command::ProductThresholdCurve(args) | Command::Product(ProductCommand::ThresholdCurve(args)) => {
            curve(&mut ctx, &args)
        }
        Command::Persuade(args) => {
            let mu = arg_scalar("mu", &args.mu)?;
            let tau = arg_scalar("tau", &args.tau)?;
            let u = utility(&args.u, args.n)?;
            let inst = PersuasionInstance::new(mu, tau, u.clone())?;
            let sol = persuasion_policy(&inst)?;
            let grid: Vec<Rational> = (0..=args.n).map(|i| Rational::from_usize(i) / Rational::from_usize(args.n)).collect();
            let cav = grid
                .iter()
                .map(|y| Ok(grid_concavification(&u, y)?.0))
                .collect::<Outcome<Vec<_>>>()?;
            if let Some(path) = &args.svg {
                let pts = |ys: &[Rational]| grid.iter().zip(ys).map(|(x, y)| (x.to_f64(), y.to_f64())).collect::<Vec<_>>();
                write_file(path, &plot::lines(&[("u", pts(u.values()), true), ("cav", pts(&cav), false)], "fraction adopting", "sender utility"))?;
            }
            if let Some(target) = &args.csv {
                let rows = grid
                    .iter()
                    .zip(u.values())
                    .zip(&cav)
                    .map(|((x, v), c)| vec![ctx.cell(x), ctx.cell(v), ctx.cell(c)])
                    .collect();
                ctx.table(target, "grid,u,cav", rows)?;
            }
            ctx.emit(&sol.encode(f))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
