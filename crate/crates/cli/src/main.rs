use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use serde::Serialize;

use nearpoly::bench::{run_experiment_with, summarize, summary_lines, write_csv, RandomSpec};
use nearpoly::hexfloat::{format_hex, parse_value};
use nearpoly::nearby::{build_plan_with, plan_to_json, DeltaReduction, SerendipityMode};
use nearpoly::{
    build_plan, check_conditions, deflate, eval_plan, horner_eval, polish_root, reference_eval,
    Error, FloatSpec, PlanOptions, Polynomial, RootResult,
};

/// Accurate polynomial evaluation near zeros, in emulated binary32.
#[derive(Parser)]
#[command(name = "nearpoly", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a polynomial at one point.
    Eval {
        #[arg(long)]
        poly: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        #[arg(long, value_enum, default_value_t = Method::Accurate)]
        method: Method,
        /// Print a JSON object instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Dump the nearby-polynomial plan built at a point.
    Plan {
        #[arg(long)]
        poly: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
    },
    /// Divide a root out of the polynomial using a plan built at a point.
    Deflate {
        #[arg(long)]
        poly: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        #[arg(long, allow_hyphen_values = true)]
        root: String,
    },
    /// Polish each initial guess with Newton's method.
    Roots {
        #[arg(long)]
        poly: PathBuf,
        /// JSON array of initial guesses (numbers or decimal/hex strings).
        #[arg(long)]
        guesses: PathBuf,
    },
    /// Random-polynomial accuracy benchmark; writes per-root rows as CSV.
    Bench {
        #[arg(long, default_value_t = 8)]
        order: usize,
        /// Comma-separated orders; writes one file per order, `<stem>_n<order>.<ext>`.
        #[arg(long, value_delimiter = ',')]
        orders: Option<Vec<usize>>,
        #[arg(long, default_value_t = 1.0)]
        difficulty: f64,
        #[arg(long, default_value_t = 128)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Reduce the bit budget by the largest absolute exponent gap.
        #[arg(long)]
        delta_abs: bool,
        /// Search trailing zeros at the full mantissa width.
        #[arg(long)]
        literal_serendipity: bool,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Horner,
    Accurate,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Overflow { .. } => 3,
            Error::Stalled { .. } => 4,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: io::Error, code: u8) -> Failure {
    Failure {
        code,
        message: format!("{}: {e}", path.display()),
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

const SPEC: FloatSpec = FloatSpec::SINGLE;

/// Print a line; a closed stdout (e.g. piped into `head`) is not an error.
fn emit(text: impl std::fmt::Display) {
    let _ = writeln!(io::stdout().lock(), "{text}");
}

fn read_poly(path: &Path) -> CliResult<Polynomial> {
    let text = std::fs::read_to_string(path).map_err(|e| io_failure(path, e, 2))?;
    Ok(Polynomial::from_json(&text, &SPEC)?)
}

fn read_value(text: &str) -> CliResult<f64> {
    Ok(parse_value(text, &SPEC)?)
}

/// Value through the plan, or `P_0` where no plan exists (constants, `x = 0`).
fn accurate_value(p: &Polynomial, x: f64) -> CliResult<f64> {
    if p.degree() == 0 || x == 0.0 {
        return Ok(p.coeffs()[0]);
    }
    let plan = build_plan(p, x, &SPEC)?;
    Ok(eval_plan(&plan, x, &SPEC)?)
}

fn eval(poly: &Path, at: &str, method: Method, json: bool) -> CliResult<()> {
    let p = read_poly(poly)?;
    let x = read_value(at)?;
    let v = match method {
        Method::Horner => horner_eval(&p, x, &SPEC)?,
        Method::Accurate => accurate_value(&p, x)?,
    };
    if json {
        let name = match method {
            Method::Horner => "horner",
            Method::Accurate => "accurate",
        };
        emit(serde_json::json!({
            "method": name,
            "at": format_hex(x),
            "value": format_hex(v),
            "decimal": format!("{v:e}"),
        }));
    } else {
        emit(format_args!("{} {v:e}", format_hex(v)));
    }
    Ok(())
}

#[derive(Serialize)]
struct RootOut {
    root: String,
    residual: String,
    iterations: u32,
    converged: bool,
}

impl From<RootResult> for RootOut {
    fn from(r: RootResult) -> Self {
        RootOut {
            root: format_hex(r.root),
            residual: format_hex(r.residual),
            iterations: r.iterations,
            converged: r.converged,
        }
    }
}

fn read_guesses(path: &Path) -> CliResult<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| io_failure(path, e, 2))?;
    let values: Vec<serde_json::Value> =
        serde_json::from_str(&text).map_err(|e| Failure::from(Error::Parse(e.to_string())))?;
    values
        .iter()
        .map(|v| match v {
            serde_json::Value::String(s) => read_value(s),
            serde_json::Value::Number(n) => read_value(&n.to_string()),
            other => Err(Error::Parse(format!("guess {other} is not a number")).into()),
        })
        .collect()
}

fn roots(poly: &Path, guesses: &Path) -> CliResult<()> {
    let p = read_poly(poly)?;
    let mut out = Vec::new();
    for x0 in read_guesses(guesses)? {
        let result = match polish_root(&p, x0, &SPEC) {
            Ok((r, _)) => r,
            Err(Error::Stalled { best, iterations }) => RootResult {
                root: best,
                residual: reference_eval(&p, best)?,
                iterations,
                converged: false,
            },
            Err(e) => return Err(e.into()),
        };
        out.push(RootOut::from(result));
    }
    let all_converged = out.iter().all(|r| r.converged);
    emit(serde_json::to_string_pretty(&out).expect("plain values serialize"));
    if all_converged {
        Ok(())
    } else {
        Err(Failure {
            code: 4,
            message: "at least one guess did not converge".into(),
        })
    }
}

fn order_path(out: &Path, order: usize) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("bench");
    let name = match out.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}_n{order}.{ext}"),
        None => format!("{stem}_n{order}"),
    };
    out.with_file_name(name)
}

fn bench_one(spec: &RandomSpec, options: &PlanOptions, out: &Path) -> CliResult<()> {
    let ex = run_experiment_with(spec, &SPEC, options)?;
    let summary = summarize(&ex.rows)?;
    let file = File::create(out).map_err(|e| io_failure(out, e, 1))?;
    write_csv(BufWriter::new(file), &ex.rows, Some(&summary)).map_err(|e| io_failure(out, e, 1))?;
    info!(
        "order {}: {} rows, {} polynomials and {} roots skipped",
        spec.order, summary.rows, ex.skipped_polys, ex.skipped_roots
    );
    emit(format_args!("order={} file={}", spec.order, out.display()));
    for line in summary_lines(&summary) {
        emit(format_args!("  {line}"));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn bench(
    order: usize,
    orders: Option<Vec<usize>>,
    difficulty: f64,
    count: usize,
    seed: u64,
    out: &Path,
    delta_abs: bool,
    literal_serendipity: bool,
) -> CliResult<()> {
    let options = PlanOptions {
        delta: if delta_abs {
            DeltaReduction::Absolute
        } else {
            DeltaReduction::Signed
        },
        serendipity: if literal_serendipity {
            SerendipityMode::Literal
        } else {
            SerendipityMode::BudgetRelative
        },
    };
    match orders {
        None => {
            let spec = RandomSpec::new(order, difficulty, seed, count, &SPEC)?;
            bench_one(&spec, &options, out)
        }
        Some(list) => {
            for n in list {
                let spec = RandomSpec::new(n, difficulty, seed, count, &SPEC)?;
                bench_one(&spec, &options, &order_path(out, n))?;
            }
            Ok(())
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Eval {
            poly,
            at,
            method,
            json,
        } => eval(&poly, &at, method, json),
        Command::Plan { poly, at } => {
            let p = read_poly(&poly)?;
            let x = read_value(&at)?;
            let plan = build_plan_with(&p, x, &SPEC, &PlanOptions::default())?;
            let report = check_conditions(&plan, &p, &SPEC);
            emit(plan_to_json(&plan, &report));
            Ok(())
        }
        Command::Deflate { poly, at, root } => {
            let p = read_poly(&poly)?;
            let x = read_value(&at)?;
            let r = read_value(&root)?;
            let plan = build_plan(&p, x, &SPEC)?;
            emit(deflate(&plan, r, &SPEC)?.to_json());
            Ok(())
        }
        Command::Roots { poly, guesses } => roots(&poly, &guesses),
        Command::Bench {
            order,
            orders,
            difficulty,
            count,
            seed,
            out,
            delta_abs,
            literal_serendipity,
        } => bench(
            order,
            orders,
            difficulty,
            count,
            seed,
            &out,
            delta_abs,
            literal_serendipity,
        ),
    }
}


fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
