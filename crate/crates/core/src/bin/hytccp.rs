use clap::{Args, Parser, Subcommand, ValueEnum};
use hytccp::constraints::Var;
use hytccp::cstore::ContinuousStore;
use hytccp::engine::EngineError;
use hytccp::explorer::{self, Limits, Policy};
use hytccp::hstore::HybridStore;
use hytccp::lang::{self, Agent, LangError, Program};
use hytccp::rational::{self, Rational};
use hytccp::trace_io::{self, Provenance};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Simulator for hybrid timed concurrent constraint programs.
#[derive(Parser)]
#[command(name = "hytccp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a program and print its declarations and normalized text.
    Parse { file: PathBuf },
    /// Simulate one run and print the trace.
    Run {
        #[command(flatten)]
        setup: SetupArgs,
        #[command(flatten)]
        sim: SimArgs,
        /// Keep adjacent continuous steps separate.
        #[arg(long)]
        raw: bool,
        #[arg(long, value_enum, default_value_t = Format::Jsonl)]
        format: Format,
    },
    /// Enumerate bounded behaviours and summarize their outcomes.
    Explore {
        #[command(flatten)]
        setup: SetupArgs,
        #[arg(long, default_value_t = 40)]
        max_depth: usize,
        /// Extra candidate durations: multiples of this step.
        #[arg(long, value_parser = positive_rational)]
        grid: Option<Rational>,
        #[arg(long, value_parser = positive_rational)]
        max_time: Option<Rational>,
    },
    /// Simulate one run and print its trajectory as CSV.
    Sample {
        #[command(flatten)]
        setup: SetupArgs,
        #[command(flatten)]
        sim: SimArgs,
        /// Sampling period.
        #[arg(long, value_parser = positive_rational, default_value = "1")]
        every: Rational,
    },
}

#[derive(Args)]
struct SetupArgs {
    file: PathBuf,
    /// Agent to run instead of the body of `init`.
    #[arg(long)]
    entry: Option<String>,
    /// Initial discrete store, e.g. "St = [off|_] /\ T >= 26".
    #[arg(long)]
    store: Option<String>,
    /// Initial continuous entry NAME=VALUE:FLOW (repeatable).
    #[arg(long = "cvar", value_parser = cvar_entry)]
    cvars: Vec<(Var, Rational, Rational)>,
    /// Run the call `init` as written, keeping its `exists` variables local.
    #[arg(long)]
    scoped: bool,
}

#[derive(Args)]
struct SimArgs {
    #[arg(long, value_enum, default_value_t = PolicyName::Urgent)]
    policy: PolicyName,
    #[arg(long, env = "HYTCCP_SEED", default_value_t = 0)]
    seed: u64,
    /// Duration grid of the random policy.
    #[arg(long, value_parser = positive_rational, default_value = "1")]
    step: Rational,
    #[arg(long, default_value_t = 10_000)]
    max_steps: usize,
    #[arg(long, value_parser = positive_rational)]
    max_time: Option<Rational>,
    #[arg(long, default_value_t = 40)]
    max_depth: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyName {
    Urgent,
    Lazy,
    Random,
    Exhaustive,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Jsonl,
    Text,
}

fn positive_rational(s: &str) -> Result<Rational, String> {
    match rational::parse(s) {
        Some(r) if r > Rational::from_integer(0.into()) => Ok(r),
        Some(_) => Err("must be positive".into()),
        None => Err(format!("not a number: {s}")),
    }
}

fn cvar_entry(s: &str) -> Result<(Var, Rational, Rational), String> {
    let (name, rest) = s.split_once('=').ok_or("expected NAME=VALUE:FLOW")?;
    let (value, flow) = rest.split_once(':').ok_or("expected NAME=VALUE:FLOW")?;
    let num = |t: &str| rational::parse(t.trim()).ok_or(format!("not a number: {t}"));
    Ok((Var::new(name.trim()), num(value)?, num(flow)?))
}

enum Failure {
    Program(String),
    Runtime(String),
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn lang_failure(path: &Path, e: LangError) -> Failure {
    // the message already carries line:col where there is one
    Failure::Program(format!("{}: {e}", path.display()))
}

struct Loaded {
    name: String,
    source: String,
    program: Program,
    entry: Agent,
    store: HybridStore,
}

fn load_program(path: &Path) -> Result<(String, Program), Failure> {
    let source = fs::read_to_string(path).map_err(|e| Failure::Program(format!("{}: {e}", path.display())))?;
    let program = lang::parse(&source).map_err(|e| lang_failure(path, e))?;
    Ok((source, program))
}

fn load(args: &SetupArgs) -> Result<Loaded, Failure> {
    let (source, program) = load_program(&args.file)?;
    let inline = |e: LangError| Failure::Program(format!("command line: {e}"));
    let entry = match &args.entry {
        Some(text) => lang::parse_agent(text, &program).map_err(inline)?,
        None if args.scoped => program.entry.clone(),
        None => program.open_entry(),
    };
    let discrete = match &args.store {
        Some(text) => lang::parse_constraint(text).map_err(inline)?,
        None => Default::default(),
    };
    let continuous = ContinuousStore::from_entries(
        args.cvars.iter().map(|(x, v, f)| (x.clone(), hytccp::cstore::Entry::new(v.clone(), f.clone()))),
    );
    let name = args.file.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(Loaded { name, source, program, entry, store: HybridStore::new(discrete, continuous) })
}

fn policy(sim: &SimArgs) -> Policy {
    match sim.policy {
        PolicyName::Urgent => Policy::Urgent { seed: sim.seed },
        PolicyName::Lazy => Policy::Lazy { seed: sim.seed },
        PolicyName::Random => Policy::Random { seed: sim.seed, step: sim.step.clone() },
        PolicyName::Exhaustive => Policy::Exhaustive { max_depth: sim.max_depth, grid: None },
    }
}

fn limits(sim: &SimArgs) -> Limits {
    Limits { max_steps: sim.max_steps, max_time: sim.max_time.clone(), max_depth: sim.max_depth, ..Limits::default() }
}

fn simulate(setup: &SetupArgs, sim: &SimArgs) -> Result<(Loaded, explorer::Trace, Provenance), Failure> {
    let l = load(setup)?;
    let (policy, limits) = (policy(sim), limits(sim));
    let trace = explorer::run(&l.program, &l.entry, l.store.clone(), &policy, &limits)?;
    let prov = Provenance {
        program: l.name.clone(),
        source: l.source.clone(),
        policy: policy.to_string(),
        limits: limits.to_string(),
    };
    Ok((l, trace, prov))
}

fn execute(cli: Cli) -> Result<String, Failure> {
    match cli.command {
        Command::Parse { file } => {
            let (_, program) = load_program(&file)?;
            let mut out = String::from("declarations:\n");
            for s in program.signatures() {
                out.push_str(&format!("  {s}\n"));
            }
            out.push('\n');
            out.push_str(&program.to_string());
            Ok(out)
        }
        Command::Run { setup, sim, raw, format } => {
            let (_, trace, prov) = simulate(&setup, &sim)?;
            let trace = if raw { trace } else { trace.coalesce() };
            Ok(match format {
                Format::Jsonl => trace_io::to_document(&trace, &prov).to_jsonl(),
                Format::Text => trace_io::to_text(&trace),
            })
        }
        Command::Sample { setup, sim, every } => {
            let (_, trace, _) = simulate(&setup, &sim)?;
            Ok(trace_io::samples_csv(&trace_io::to_samples(&trace.coalesce(), &every)))
        }
        Command::Explore { setup, max_depth, grid, max_time } => {
            let l = load(&setup)?;
            let limits = Limits { max_depth, grid, max_time, ..Limits::default() };
            let ex = explorer::enumerate(&l.program, &l.entry, l.store, &limits)?;
            let mut out = format!("traces: {}\n", ex.traces.len());
            out.push_str(&format!("depth limit hit: {}\n", if ex.truncated { "yes" } else { "no" }));
            out.push_str("terminals:\n");
            for (t, n) in ex.terminal_histogram() {
                out.push_str(&format!("  {t}: {n}\n"));
            }
            let outcomes = ex.outcomes();
            out.push_str(&format!("outcome classes: {}\n", outcomes.len()));
            for (store, n) in outcomes {
                out.push_str(&format!("  {n} x {store}\n"));
            }
            Ok(out)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Program(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("run-time error: {msg}");
            ExitCode::from(2)
        }
    }
}
