use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use rdnm::driver::SccTrace;
use rdnm::{
    build_graph, clean, compute_bounds, decompose, parse_rational, solve, termination_probabilities, to_snf,
    value_iterate, Error, Mode, MonotoneSystem, P1ca, P1caOptions, Rational, SolveOptions,
};

#[derive(Parser)]
#[command(name = "rdnm", about = "Certified least fixed points of monotone polynomial systems")]
#[command(version = concat!(env!("CARGO_PKG_VERSION"), " (schemas: mps 1, p1ca 1, solve-report 1, g-matrix 1)"))]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Certified,
    Adaptive,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Certified => Mode::Certified,
            ModeArg::Adaptive => Mode::Adaptive,
        }
    }
}

#[derive(Args)]
struct Input {
    /// Model file; standard input when omitted or `-`.
    input: Option<PathBuf>,
}

#[derive(Args)]
struct Run {
    /// Absolute error bound as an exact rational `p/q`.
    #[arg(long, value_parser = rational)]
    epsilon: Rational,
    #[arg(long, value_enum, default_value = "certified")]
    mode: ModeArg,
    /// Ceiling on the rounding parameter.
    #[arg(long, default_value_t = 65536)]
    max_h: u64,
    /// Emit per-iteration records as JSON lines on standard error.
    #[arg(long)]
    trace: bool,
    /// Worker threads for independent SCCs.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Approximate the least fixed point.
    Solve {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        run: Run,
        /// The least fixed point is known to be at most 1.
        #[arg(long)]
        assume_prob: bool,
        /// The least fixed point is known to be at most `2^E`.
        #[arg(long, value_name = "E", allow_negative_numbers = true)]
        assume_qmax_exp: Option<i64>,
        /// Rounding parameter of the reported grid.
        #[arg(long)]
        h: Option<u32>,
        /// Newton iterations per nonlinear SCC.
        #[arg(long)]
        iters: Option<u32>,
        #[arg(long)]
        no_snf: bool,
    },
    /// Remove variables whose least fixed point is zero.
    Clean(Input),
    /// Rewrite into simple normal form.
    Snf(Input),
    /// Strongly connected components, depth and nonlinear depth.
    Decompose(Input),
    /// Certified bounds on the least fixed point.
    Bounds {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        assume_prob: bool,
        #[arg(long, value_name = "E", allow_negative_numbers = true)]
        assume_qmax_exp: Option<i64>,
        #[arg(long)]
        no_snf: bool,
    },
    /// Exact value iteration `P^k(0)`.
    ValueIter {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        steps: usize,
    },
    /// Termination probabilities of a probabilistic one-counter automaton.
    P1caTerm {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        run: Run,
    },
    /// Check a probabilistic one-counter automaton.
    P1caValidate(Input),
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

enum Failure {
    Library(Error),
    Io(String),
    Invalid(Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Library(e)
    }
}

fn read_input(input: &Input) -> Result<String, Failure> {
    let mut text = String::new();
    match input.input.as_deref() {
        Some(p) if p.as_os_str() != "-" => {
            text = std::fs::read_to_string(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?
        }
        _ => {
            io::stdin().read_to_string(&mut text).map_err(|e| Failure::Io(format!("stdin: {e}")))?;
        }
    }
    Ok(text)
}

fn read_system(input: &Input) -> Result<MonotoneSystem, Failure> {
    Ok(MonotoneSystem::parse(&read_input(input)?)?)
}

fn read_model(input: &Input) -> Result<P1ca, Failure> {
    Ok(P1ca::parse(&read_input(input)?)?)
}

fn emit_trace(traces: &[SccTrace]) {
    let stderr = io::stderr();
    let mut out = stderr.lock();
    for t in traces {
        for r in &t.records {
            let line = json!({"scc": t.scc, "variables": t.variables, "k": r.k, "iterate": r.iterate, "residual": r.residual.to_string()});
            let _ = writeln!(out, "{line}");
        }
    }
}

fn names(sys: &MonotoneSystem, idx: &[usize]) -> Vec<String> {
    idx.iter().map(|&i| sys.name(i).to_string()).collect()
}

fn doc(sys: &MonotoneSystem) -> Value {
    serde_json::to_value(sys.to_doc()).expect("document serializes")
}

fn run(cmd: Command) -> Result<Value, Failure> {
    let value = match cmd {
        Command::Solve { input, run, assume_prob, assume_qmax_exp, h, iters, no_snf } => {
            let sys = read_system(&input)?;
            let opts = SolveOptions {
                mode: run.mode.into(),
                assume_probabilistic: assume_prob,
                assert_qmax_exponent: assume_qmax_exp,
                snf: !no_snf,
                h,
                iters,
                max_h: run.max_h,
                trace: run.trace,
                jobs: run.jobs,
                ..SolveOptions::default()
            };
            let report = solve(&sys, &run.epsilon, &opts)?;
            if run.trace {
                emit_trace(&report.traces);
            }
            to_value(&report)
        }
        Command::Clean(input) => {
            let sys = read_system(&input)?;
            let c = clean(&sys);
            json!({
                "system": doc(&c.system),
                "zero_variables": names(&sys, &c.zero),
            })
        }
        Command::Snf(input) => {
            let sys = read_system(&input)?;
            let s = to_snf(&sys);
            json!({
                "system": doc(&s.system),
                "forms": s.forms,
                "projection": names(&s.system, &s.projection),
            })
        }
        Command::Decompose(input) => {
            let sys = read_system(&input)?;
            let dec = decompose(&build_graph(&sys), &sys);
            let sccs: Vec<Value> = dec
                .sccs
                .iter()
                .map(|s| {
                    json!({
                        "variables": names(&sys, &s.vars),
                        "nonlinear": s.nonlinear,
                        "height": s.height,
                        "nonlinear_height": s.nonlinear_height,
                        "successors": s.successors,
                    })
                })
                .collect();
            json!({"sccs": sccs, "levels": dec.levels(), "depth": dec.depth, "nonlinear_depth": dec.nonlinear_depth})
        }
        Command::Bounds { input, assume_prob, assume_qmax_exp, no_snf } => {
            let sys = read_system(&input)?;
            let work = if no_snf { sys } else { to_snf(&sys).system };
            let cleaned = clean(&work).system;
            let opts = SolveOptions {
                assume_probabilistic: assume_prob,
                assert_qmax_exponent: assume_qmax_exp,
                ..SolveOptions::default()
            };
            let bounds = compute_bounds(&cleaned, &opts)?;
            let mut v = to_value(&bounds);
            v["variables"] = json!(cleaned.names());
            v
        }
        Command::ValueIter { input, steps } => {
            let sys = read_system(&input)?;
            let x = value_iterate(&sys, steps);
            json!({
                "variables": sys.names(),
                "steps": steps,
                "iterate": x.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            })
        }
        Command::P1caTerm { input, run } => {
            let model = read_model(&input)?;
            let opts = P1caOptions { mode: run.mode.into(), max_h: run.max_h, trace: run.trace, jobs: run.jobs };
            let g = termination_probabilities(&model, &run.epsilon, &opts)?;
            if run.trace {
                emit_trace(&g.report.traces);
            }
            to_value(&g)
        }
        Command::P1caValidate(input) => {
            let model = read_model(&input)?;
            match model.validate() {
                Ok(()) => json!({"valid": true, "violations": []}),
                Err(Error::InvalidModel(v)) => return Err(Failure::Invalid(json!({"valid": false, "violations": v}))),
                Err(e) => return Err(e.into()),
            }
        }
    };
    Ok(value)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("output serializes")
}

fn print(v: &Value) {
    let text = serde_json::to_string_pretty(v).expect("output serializes");
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let _ = writeln!(out, "{text}");
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::DivergenceCertified { .. } | Error::NoFiniteLfp => 2,
        Error::SingularMatrix { .. } => 3,
        Error::ParamsInfeasible { .. } => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(v) => {
            print(&v);
            ExitCode::SUCCESS
        }
        Err(Failure::Invalid(v)) => {
            print(&v);
            eprintln!("error: invalid model");
            ExitCode::from(1)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Library(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
