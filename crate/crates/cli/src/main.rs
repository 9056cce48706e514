//! `ncloewner`: runs monotonicity checks and writes JSON reports.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use ncloewner_core::expr::{catalog, catalog_names, parse, FreeExpr, FreeFunction};
use ncloewner_core::linalg::{psd_margin, HMatrix, C64};
use ncloewner_core::loewner1d::{loewner_matrix, pick_matrix, scalar_catalog};
use ncloewner_core::opsys::{DomainKind, NCPoint, OpSysBasis};
use ncloewner_core::suite::{resolve_scalar, run_suite, RunConfig, Suite, SCHEMA_VERSION};
use ncloewner_core::Error;

const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "ncloewner", version, about = "Matrix monotonicity checks for free functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a suite of checks and write a report.
    Check(CheckArgs),
    /// Evaluate a function at a point, or build Löwner/Pick matrices of a scalar function.
    Eval(EvalArgs),
    /// Parse an expression and print its tree.
    Parse(ParseArgs),
    /// List the catalog functions.
    Catalog(OutputArgs),
}

#[derive(Args)]
struct OutputArgs {
    /// Write JSON here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Add a timestamp and host data to the output.
    #[arg(long)]
    annotate: bool,
}

#[derive(Args)]
struct CheckArgs {
    /// Catalog function name.
    #[arg(long, conflicts_with = "expr")]
    function: Option<String>,
    /// Expression text over the input system given by --system.
    #[arg(long, requires = "system", allow_hyphen_values = true)]
    expr: Option<String>,
    #[arg(long)]
    system: Option<String>,
    #[arg(long, default_value = "equivalence", value_parser = parse_suite)]
    suite: Suite,
    /// Inclusive level range A..B.
    #[arg(long, default_value = "1..3", value_parser = parse_levels)]
    levels: [usize; 2],
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Failure tolerance on scaled margins. Each check has its own default.
    #[arg(long)]
    tol: Option<f64>,
    /// Worker threads. Does not affect the report.
    #[arg(long)]
    jobs: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct EvalArgs {
    /// Catalog function name (free catalog for --point, scalar catalog for --nodes/--pick).
    #[arg(long, conflicts_with = "expr")]
    function: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    expr: Option<String>,
    /// Input system for --expr. Defaults to the system of the point.
    #[arg(long)]
    system: Option<String>,
    /// JSON file holding a point.
    #[arg(long, group = "input")]
    point: Option<PathBuf>,
    /// JSON array of real nodes; prints the Löwner matrix.
    #[arg(long, group = "input")]
    nodes: Option<PathBuf>,
    /// JSON array of [re, im] pairs in the upper half-plane; prints the Pick matrix.
    #[arg(long, group = "input")]
    pick: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ParseArgs {
    #[arg(long, allow_hyphen_values = true)]
    expr: String,
    #[arg(long, default_value = "scalar")]
    system: String,
    #[command(flatten)]
    output: OutputArgs,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|_| format!("expected one of {}", Suite::NAMES.join(", ")))
}

fn parse_levels(s: &str) -> Result<[usize; 2], String> {
    let bad = || format!("expected A..B with integers, got `{s}`");
    let (a, b) = s.split_once("..").unwrap_or((s, s));
    let a = a.trim().parse().map_err(|_| bad())?;
    let b = b.trim().parse().map_err(|_| bad())?;
    Ok([a, b])
}

/// A failure that maps to an exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }

    /// Usage for malformed input; numerical for points the function cannot be evaluated at.
    fn from_error(e: Error) -> Self {
        let code = if e.is_out_of_domain() || e.is_numerical_failure() { EXIT_NUMERICAL } else { EXIT_USAGE };
        Failure { code, message: e.to_string() }
    }
}

type Outcome = Result<u8, Failure>;

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn annotations(jobs: Option<usize>) -> Value {
    let now = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let host = std::env::var("HOSTNAME")
        .ok()
        .or_else(|| std::fs::read_to_string("/etc/hostname").ok().map(|s| s.trim().to_string()))
        .unwrap_or_default();
    json!({
        "unix_time": now,
        "host": host,
        "jobs": jobs.unwrap_or_else(rayon::current_num_threads),
        "version": env!("CARGO_PKG_VERSION"),
    })
}

fn emit<T: Serialize>(doc: &T, output: &OutputArgs, jobs: Option<usize>) -> Result<(), Failure> {
    let mut value = serde_json::to_value(doc).map_err(|e| Failure::usage(e.to_string()))?;
    if output.annotate {
        value["annotations"] = annotations(jobs);
    }
    let mut text = serde_json::to_string_pretty(&value).map_err(|e| Failure::usage(e.to_string()))?;
    text.push('\n');
    match &output.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::usage(format!("{}: {e}", path.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::usage(e.to_string())),
    }
}

fn check(args: CheckArgs) -> Outcome {
    let config = RunConfig {
        command: "check".into(),
        suite: args.suite,
        function: args.function,
        expr: args.expr,
        system: args.system,
        levels: args.levels,
        trials: args.trials,
        seed: args.seed,
        tol: args.tol,
    };
    config.validate().map_err(|e| Failure::usage(e.to_string()))?;
    let doc = match args.jobs {
        Some(0) => return Err(Failure::usage("--jobs must be at least 1")),
        Some(j) => {
            let pool =
                rayon::ThreadPoolBuilder::new().num_threads(j).build().map_err(|e| Failure::usage(e.to_string()))?;
            pool.install(|| run_suite(&config))
        }
        None => run_suite(&config),
    }
    .map_err(|e| Failure::usage(e.to_string()))?;
    emit(&doc, &args.output, args.jobs)?;
    Ok(doc.exit_code() as u8)
}

#[derive(Serialize)]
struct EvalDocument {
    schema_version: u32,
    command: &'static str,
    function: String,
    #[serde(flatten)]
    result: EvalResult,
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum EvalResult {
    Point { input: NCPoint, output: NCPoint },
    Loewner { nodes: Vec<f64>, matrix: HMatrix, min_eigenvalue: f64 },
    Pick { points: Vec<[f64; 2]>, matrix: HMatrix, min_eigenvalue: f64 },
}

fn eval_function(args: &EvalArgs, point: &NCPoint) -> Result<FreeFunction, Failure> {
    match (&args.function, &args.expr) {
        (Some(name), _) => catalog(name).map_err(Failure::from_error),
        (None, Some(text)) => {
            let name = args.system.as_deref().unwrap_or(point.system());
            let input = OpSysBasis::builtin(name).map_err(Failure::from_error)?;
            FreeFunction::from_text("expr", text, input, OpSysBasis::scalar())
                .map_err(|e| Failure::usage(e.to_string()))
        }
        (None, None) => Err(Failure::usage("eval needs --function or --expr")),
    }
}

fn eval(args: EvalArgs) -> Outcome {
    let result = if let Some(path) = &args.point {
        let input: NCPoint = read_json(path)?;
        let f = eval_function(&args, &input)?;
        if f.input().name() != input.system() {
            return Err(Failure::usage(format!(
                "point lives in `{}` but the function takes `{}`",
                input.system(),
                f.input().name()
            )));
        }
        let output = f.eval(&input).map_err(Failure::from_error)?;
        (f.name().to_string(), EvalResult::Point { input, output })
    } else {
        let name = args.function.as_deref().ok_or_else(|| Failure::usage("--nodes and --pick need --function"))?;
        let f = resolve_scalar(name).map_err(|e| Failure::usage(e.to_string()))?;
        let result = if let Some(path) = &args.nodes {
            let nodes: Vec<f64> = read_json(path)?;
            let l = loewner_matrix(&f, &nodes).map_err(Failure::from_error)?;
            let min_eigenvalue = psd_margin(&l.matrix).map_err(Failure::from_error)?;
            EvalResult::Loewner { nodes: l.nodes, matrix: l.matrix, min_eigenvalue }
        } else if let Some(path) = &args.pick {
            let points: Vec<[f64; 2]> = read_json(path)?;
            let zs: Vec<C64> = points.iter().map(|&[re, im]| C64::new(re, im)).collect();
            let matrix = pick_matrix(&f, &zs).map_err(Failure::from_error)?;
            let min_eigenvalue = psd_margin(&matrix).map_err(Failure::from_error)?;
            EvalResult::Pick { points, matrix, min_eigenvalue }
        } else {
            return Err(Failure::usage("eval needs one of --point, --nodes, --pick"));
        };
        (f.name.to_string(), result)
    };
    let doc = EvalDocument { schema_version: SCHEMA_VERSION, command: "eval", function: result.0, result: result.1 };
    emit(&doc, &args.output, None)?;
    Ok(0)
}

#[derive(Serialize)]
struct ParseDocument {
    schema_version: u32,
    command: &'static str,
    system: String,
    expr: String,
    canonical: String,
    ast: FreeExpr,
}

fn parse_cmd(args: ParseArgs) -> Outcome {
    let sys = OpSysBasis::builtin(&args.system).map_err(|e| Failure::usage(e.to_string()))?;
    let ast = parse(&args.expr, &sys).map_err(|e| Failure::usage(e.to_string()))?;
    let doc = ParseDocument {
        schema_version: SCHEMA_VERSION,
        command: "parse",
        system: args.system,
        canonical: ast.to_string(),
        expr: args.expr,
        ast,
    };
    emit(&doc, &args.output, None)?;
    Ok(0)
}

#[derive(Serialize)]
struct CatalogEntry {
    name: String,
    input: String,
    output: String,
    domain: DomainKind,
    body: Vec<String>,
}

#[derive(Serialize)]
struct ScalarEntry {
    name: &'static str,
    domain: (f64, f64),
    expr: &'static str,
}

#[derive(Serialize)]
struct CatalogDocument {
    schema_version: u32,
    command: &'static str,
    functions: Vec<CatalogEntry>,
    scalar_functions: Vec<ScalarEntry>,
}

fn catalog_cmd(output: OutputArgs) -> Outcome {
    let mut functions = Vec::new();
    for name in catalog_names() {
        let f = catalog(name).map_err(Failure::from_error)?;
        functions.push(CatalogEntry {
            name: f.name().to_string(),
            input: f.input().name().to_string(),
            output: f.output().name().to_string(),
            domain: f.domain(),
            body: f.texts(),
        });
    }
    let scalar_functions =
        scalar_catalog().iter().map(|f| ScalarEntry { name: f.name, domain: f.domain, expr: f.expr }).collect();
    let doc = CatalogDocument { schema_version: SCHEMA_VERSION, command: "catalog", functions, scalar_functions };
    emit(&doc, &output, None)?;
    Ok(0)
}

/// Parses `argv` and runs the command; returns the process exit code.
fn run(argv: impl IntoIterator<Item = OsString>) -> u8 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    let outcome = match cli.command {
        Command::Check(a) => check(a),
        Command::Eval(a) => eval(a),
        Command::Parse(a) => parse_cmd(a),
        Command::Catalog(a) => catalog_cmd(a),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            if f.code == EXIT_USAGE {
                eprintln!("run `ncloewner --help` for usage");
            }
            f.code
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os()))
}
