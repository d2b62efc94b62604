use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use cnlhv_core::departure::{self, DEFAULT_SWEEP_POINTS};
use cnlhv_core::logic::{self, FiniteJoint, PredicateReport};
use cnlhv_core::ontic::{self, Method, SOLVER_TOL};
use cnlhv_core::quantum::{self, Outcome};
use cnlhv_core::{Error, Setting, TwoQubitState};

const EXIT_INVALID: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_VIOLATION: u8 = 4;

/// Quadrature tolerance for the recovery integrals reported by `model`.
const RECOVERY_TOL: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(name = "cnlhv", version, about = "Crypto-nonlocal hidden-variable model laboratory")]
struct Cli {
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, env = "CNLHV_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Quantum marginals, correlation and outcome distribution.
    Oracle(StateArgs),
    /// Effective setting, model versus quantum correlation, recovery integrals.
    Model {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, value_enum, default_value_t = MethodArg::Quadrature)]
        method: MethodArg,
        /// Monte Carlo sample count.
        #[arg(long, default_value_t = 1_000_000)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Departure metric and its bound on a theta grid, as CSV.
    Sweep {
        #[arg(long, default_value_t = DEFAULT_SWEEP_POINTS)]
        n_theta: usize,
        #[arg(long, default_value = "0,0,1", value_parser = parse_setting)]
        a: Setting,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Finite-table checks of the FR, FW, NS and ST conditions.
    #[command(subcommand)]
    Logic(LogicCommand),
}

#[derive(Debug, clap::Args)]
struct StateArgs {
    /// State parameter in radians, within [0, pi/2].
    #[arg(long, allow_negative_numbers = true)]
    theta: f64,
    /// Alice's setting as "x,y,z".
    #[arg(long, value_parser = parse_setting, allow_hyphen_values = true)]
    a: Setting,
    /// Bob's setting as "x,y,z".
    #[arg(long, value_parser = parse_setting, allow_hyphen_values = true)]
    b: Setting,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum MethodArg {
    Quadrature,
    MonteCarlo,
}

#[derive(Debug, Subcommand)]
enum LogicCommand {
    /// Search generated compliant tables for FR violations.
    Scan {
        #[arg(long, default_value_t = 1000)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check FW, NS and ST on generated tables with the ontic state taken as Z.
    Converse {
        #[arg(long, default_value_t = 1000)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Predicates of the fixed table satisfying FW and NS but not FR.
    Counterexample,
    /// Predicates of a table read from a JSON file.
    Check { file: PathBuf },
}

fn parse_setting(s: &str) -> Result<Setting, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [x, y, z] = parts[..] else {
        return Err(format!("expected three comma-separated components, got {s:?}"));
    };
    let num = |p: &str| p.parse::<f64>().map_err(|e| format!("{p:?}: {e}"));
    Setting::new(num(x)?, num(y)?, num(z)?).map_err(|e| e.to_string())
}

/// Failure of a command, carrying its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NoRoot { .. } | Error::QuadratureNotConverged { .. } => EXIT_SOLVER,
            _ => EXIT_INVALID,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure { code: 1, message: e.to_string() }
    }
}

type CmdResult = Result<u8, Failure>;

fn print_json(v: &Value) -> io::Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)
}

fn cmd_oracle(args: &StateArgs) -> CmdResult {
    let state = TwoQubitState::new(args.theta)?;
    let d = quantum::outcome_distribution(&state, &args.a, &args.b);
    let p = |x, y| d.prob(x, y);
    use Outcome::{Minus, Plus};
    print_json(&json!({
        "theta": args.theta,
        "a": args.a.components(),
        "b": args.b.components(),
        "marginal_x": quantum::marginal_x(&state, &args.a),
        "marginal_y": quantum::marginal_y(&state, &args.b),
        "correlation": quantum::joint_correlation(&state, &args.a, &args.b),
        "distribution": {
            "++": p(Plus, Plus),
            "+-": p(Plus, Minus),
            "-+": p(Minus, Plus),
            "--": p(Minus, Minus),
        },
    }))?;
    Ok(0)
}

fn cmd_model(args: &StateArgs, method: MethodArg, n: u64, seed: u64) -> CmdResult {
    let state = TwoQubitState::new(args.theta)?;
    let method = match method {
        MethodArg::Quadrature => Method::Quadrature,
        MethodArg::MonteCarlo => Method::MonteCarlo { samples: n, seed },
    };
    let eff = ontic::solve_a_hat(&state, &args.a, &args.b, SOLVER_TOL)?;
    let th = ontic::thresholds_for(&state, &args.a, &args.b);
    let model = ontic::model_joint_correlation(&th, &eff.a_hat, &args.b, method)?;
    let rx = ontic::verify_quantum_recovery(&state, &args.a, RECOVERY_TOL)?;
    let ry = ontic::verify_quantum_recovery_y(&state, &args.b, RECOVERY_TOL)?;
    print_json(&json!({
        "theta": args.theta,
        "a": args.a.components(),
        "b": args.b.components(),
        "method": method,
        "a_hat": eff.a_hat.as_array(),
        "alpha": eff.alpha,
        "residual": eff.residual,
        "thresholds": th,
        "correlation": {
            "model": model.value,
            "model_uncertainty": model.uncertainty,
            "quantum": quantum::joint_correlation(&state, &args.a, &args.b),
        },
        "recovery": { "x": rx, "y": ry },
    }))?;
    Ok(0)
}

fn cmd_sweep(a: &Setting, n_theta: usize, out: Option<&PathBuf>) -> CmdResult {
    let rows = departure::figure1_sweep(a, n_theta)?;
    match out {
        Some(path) => {
            let mut w = BufWriter::new(fs::File::create(path)?);
            departure::write_csv(&mut w, &rows)?;
            w.flush()?;
        }
        None => departure::write_csv(io::stdout().lock(), &rows)?,
    }
    Ok(0)
}

fn report_json(r: Result<PredicateReport, Error>) -> Result<Value, Failure> {
    match r {
        Ok(r) => Ok(json!(r)),
        Err(Error::MissingVariable(_)) => Ok(Value::Null),
        Err(e) => Err(e.into()),
    }
}

fn predicates_json(j: &FiniteJoint) -> Result<Value, Failure> {
    let lambda = logic::ontic_variable(j);
    Ok(json!({
        "ontic_variable": lambda,
        "FR": report_json(logic::check_FR(j))?,
        "FW": report_json(logic::check_FW(j, lambda))?,
        "NS": report_json(logic::check_NS(j))?,
        "ST": report_json(logic::check_ST(j))?,
        "factorization": report_json(logic::check_factorization(j, lambda))?,
    }))
}

fn cmd_logic(cmd: &LogicCommand) -> CmdResult {
    match cmd {
        LogicCommand::Scan { n, seed } => {
            let s = logic::theorem_scan(*n, *seed)?;
            print_json(&json!({
                "instances": s.instances,
                "compliant": s.compliant,
                "non_compliant": s.non_compliant,
                "max_fr": s.max_fr,
                "violations": s.violation_count(),
                "violation_details": s.violations,
            }))?;
            Ok(if s.violation_count() == 0 { 0 } else { EXIT_VIOLATION })
        }
        LogicCommand::Converse { n, seed } => {
            let s = logic::converse_scan(*n, *seed)?;
            print_json(&json!(s))?;
            Ok(0)
        }
        LogicCommand::Counterexample => {
            let j = logic::strictness_counterexample();
            let mut v = predicates_json(&j)?;
            v["table"] = json!(j);
            print_json(&v)?;
            Ok(0)
        }
        LogicCommand::Check { file } => {
            let text = fs::read_to_string(file).map_err(|e| Failure {
                code: EXIT_INVALID,
                message: format!("{}: {e}", file.display()),
            })?;
            let j = FiniteJoint::from_json(&text)?;
            let mut v = predicates_json(&j)?;
            let class = match logic::classify(&j) {
                Ok(c) => Some(c),
                Err(Error::MissingVariable(_)) => None,
                Err(e) => return Err(e.into()),
            };
            let violation = matches!(class, Some(logic::Classification::Violation { .. }));
            v["classification"] = json!(class);
            print_json(&v)?;
            Ok(if violation { EXIT_VIOLATION } else { 0 })
        }
    }
}

fn run(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Oracle(args) => cmd_oracle(args),
        Command::Model { state, method, n, seed } => cmd_model(state, *method, *n, *seed),
        Command::Sweep { n_theta, a, out } => cmd_sweep(a, *n_theta, out.as_ref()),
        Command::Logic(cmd) => cmd_logic(cmd),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
