//! Command-line front end for the process engine.
//!
//! Every subcommand reads its inputs from files named on the command line,
//! prints a human-readable report to stdout, and ends the report with a
//! machine-readable `VERDICT: <word>` line.  The exit status always agrees
//! with the verdict:
//!
//! * `0` — success: the model is well-formed, the trace conforms, the
//!   formula holds, the goal is reachable, or the command simply succeeded.
//! * `1` — a clean negative answer: ill-formed, non-conforming, fails,
//!   or unreachable.
//! * `2` — usage, parse, or I/O error; a diagnostic naming the offending
//!   file (and position, where known) goes to stderr.
//!
//! The only exception to the verdict line is a command that streams its
//! payload to stdout (`export-dot` or `simulate` without `-o`): appending a
//! verdict would corrupt the payload, so the line is omitted and the exit
//! status alone carries the answer.
//!
//! Nothing is ever written outside the files named by `-o` flags, except
//! for `init-example`, whose whole point is to drop a named example bundle
//! into the current directory (and it refuses to overwrite existing files).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use mlproc::catalog;
use mlproc::conformance::{check_trace, parse_trace, serialize_trace, Trace};
use mlproc::dot::export_dot;
use mlproc::dsl::parse_model;
use mlproc::ltl::{eval, parse_formula, Formula};
use mlproc::model::ProcessModel;
use mlproc::search::{enumerate, reach};
use mlproc::simulate::{simulate, SimulationPolicy};
use mlproc::validate::validate;

#[derive(Parser)]
#[command(
    name = "mlproc",
    version,
    about = "Define, simulate, and check development process models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model file for well-formedness (rules W1-W7).
    Validate {
        /// Process model file (.proc).
        model_file: PathBuf,
    },
    /// Render a model as a Graphviz digraph clustered by phase.
    ExportDot {
        /// Process model file (.proc).
        model_file: PathBuf,
        /// Write the graph here instead of stdout.
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Run the step semantics forward and record the resulting trace.
    Simulate {
        /// Process model file (.proc).
        model_file: PathBuf,
        /// Scheduling policy for each step.
        #[arg(long, value_enum)]
        policy: PolicyArg,
        /// RNG seed for the random policy (ignored by eager).
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of steps to simulate (the trace covers t=0..steps).
        #[arg(long)]
        steps: u64,
        /// Write the trace here instead of stdout.
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Check a recorded trace against a model (rules R1-R6).
    CheckTrace {
        /// Process model file (.proc).
        model_file: PathBuf,
        /// Recorded trace file (.trace).
        trace_file: PathBuf,
    },
    /// Evaluate an LTL formula over a recorded trace.
    CheckLtl {
        /// Process model file (.proc).
        model_file: PathBuf,
        /// Recorded trace file (.trace).
        trace_file: PathBuf,
        /// Formula text, e.g. "F done(trained_ml_model)".
        #[arg(
            long,
            value_name = "TEXT",
            required_unless_present = "formula_file",
            conflicts_with = "formula_file"
        )]
        formula: Option<String>,
        /// Read the formula from a file instead.
        #[arg(long, value_name = "FILE")]
        formula_file: Option<PathBuf>,
    },
    /// Search for a shortest conforming trace that reaches a goal state.
    Reach {
        /// Process model file (.proc).
        model_file: PathBuf,
        /// State predicate, e.g. "done(factory_quality_seal)".
        #[arg(long, value_name = "PREDICATE")]
        goal: String,
        /// Maximum number of steps to explore.
        #[arg(long)]
        depth: u64,
    },
    /// Enumerate every conforming trace of exactly the given length.
    Enumerate {
        /// Process model file (.proc).
        model_file: PathBuf,
        /// Trace length in steps.
        #[arg(long)]
        depth: u64,
        /// Print only the number of traces.
        #[arg(long)]
        count_only: bool,
        /// Enumerate even when the model is above the size guard.
        #[arg(long)]
        force: bool,
    },
    /// Write a bundled example (model plus traces) into the current directory.
    InitExample {
        /// Example name: ml_dev or marl.
        name: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    /// Activate every enabled element as early as possible.
    Eager,
    /// Choose uniformly among legal successor states.
    Random,
}

/// A usage, parse, or I/O failure: diagnostic to stderr, exit status 2.
struct Failure(String);

type CmdResult = Result<ExitCode, Failure>;

fn fail(message: impl Into<String>) -> Failure {
    Failure(message.into())
}

/// Restore the default SIGPIPE disposition so that piping into `head` and
/// friends ends the process quietly instead of panicking on a closed stdout.
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn main() -> ExitCode {
    reset_sigpipe();
    match run(Cli::parse().command) {
        Ok(code) => code,
        Err(Failure(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> CmdResult {
    match command {
        Command::Validate { model_file } => cmd_validate(&model_file),
        Command::ExportDot { model_file, output } => cmd_export_dot(&model_file, output.as_deref()),
        Command::Simulate {
            model_file,
            policy,
            seed,
            steps,
            output,
        } => cmd_simulate(&model_file, policy, seed, steps, output.as_deref()),
        Command::CheckTrace {
            model_file,
            trace_file,
        } => cmd_check_trace(&model_file, &trace_file),
        Command::CheckLtl {
            model_file,
            trace_file,
            formula,
            formula_file,
        } => cmd_check_ltl(&model_file, &trace_file, formula, formula_file.as_deref()),
        Command::Reach {
            model_file,
            goal,
            depth,
        } => cmd_reach(&model_file, &goal, depth),
        Command::Enumerate {
            model_file,
            depth,
            count_only,
            force,
        } => cmd_enumerate(&model_file, depth, count_only, force),
        Command::InitExample { name } => cmd_init_example(&name),
    }
}

// ---------------------------------------------------------------- loading

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| fail(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, content: &str) -> Result<(), Failure> {
    fs::write(path, content).map_err(|e| fail(format!("{}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<ProcessModel, Failure> {
    let text = read_file(path)?;
    parse_model(&text).map_err(|e| fail(format!("{}: {e}", path.display())))
}

/// Load a model and insist it is well-formed.  Used by the commands that
/// derive artifacts from the model alone (`export-dot`, `simulate`), where
/// an ill-formed model is an input error rather than a negative answer.
fn load_valid_model(path: &Path) -> Result<ProcessModel, Failure> {
    let model = load_model(path)?;
    let report = validate(&model);
    if report.is_well_formed() {
        Ok(model)
    } else {
        let mut message = format!("{}: model is ill-formed:", path.display());
        for v in &report.violations {
            write!(message, "\n  {v}").unwrap();
        }
        Err(fail(message))
    }
}

fn load_trace(path: &Path) -> Result<Trace, Failure> {
    let text = read_file(path)?;
    parse_trace(&text).map_err(|e| fail(format!("{}: {e}", path.display())))
}

// ---------------------------------------------------------------- commands

fn cmd_validate(model_file: &Path) -> CmdResult {
    let model = load_model(model_file)?;
    let report = validate(&model);
    println!("model: {}", model.name);
    println!(
        "elements: {} ({} activities, {} artifacts)",
        model.elements.len(),
        model.activities().count(),
        model.artifacts().count()
    );
    for warning in &report.warnings {
        println!("{warning}");
    }
    if report.is_well_formed() {
        println!("violations: none");
        println!("VERDICT: well-formed");
        Ok(ExitCode::SUCCESS)
    } else {
        for violation in &report.violations {
            println!("{violation}");
        }
        println!("VERDICT: ill-formed");
        Ok(ExitCode::from(1))
    }
}

fn cmd_export_dot(model_file: &Path, output: Option<&Path>) -> CmdResult {
    let model = load_valid_model(model_file)?;
    let dot = export_dot(&model);
    match output {
        Some(path) => {
            write_file(path, &dot)?;
            println!("model: {}", model.name);
            println!("wrote {}", path.display());
            println!("VERDICT: ok");
        }
        None => print!("{dot}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(
    model_file: &Path,
    policy: PolicyArg,
    seed: u64,
    steps: u64,
    output: Option<&Path>,
) -> CmdResult {
    let model = load_valid_model(model_file)?;
    let policy = match policy {
        PolicyArg::Eager => SimulationPolicy::Eager { dwell: 1 },
        PolicyArg::Random => SimulationPolicy::UniformRandom { seed },
    };
    let trace = simulate(&model, &policy, steps, None)
        .map_err(|e| fail(format!("{}: {e}", model_file.display())))?;
    let text = serialize_trace(&trace);
    match output {
        Some(path) => {
            write_file(path, &text)?;
            println!("model: {}", model.name);
            println!("steps: {steps}");
            println!("wrote {}", path.display());
            println!("VERDICT: ok");
        }
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_check_trace(model_file: &Path, trace_file: &Path) -> CmdResult {
    let model = load_model(model_file)?;
    let trace = load_trace(trace_file)?;
    let report =
        check_trace(&model, &trace).map_err(|e| fail(format!("{}: {e}", trace_file.display())))?;
    println!(
        "trace: {} (t={}..{}, {} states)",
        trace.model_name,
        trace.start(),
        trace.t_end(),
        trace.len()
    );
    if report.is_conforming() {
        println!("violations: none");
        println!("VERDICT: conforming");
        Ok(ExitCode::SUCCESS)
    } else {
        for violation in &report.violations {
            println!("{violation}");
        }
        println!("VERDICT: non-conforming");
        Ok(ExitCode::from(1))
    }
}

fn cmd_check_ltl(
    model_file: &Path,
    trace_file: &Path,
    formula_text: Option<String>,
    formula_file: Option<&Path>,
) -> CmdResult {
    let model = load_model(model_file)?;
    let trace = load_trace(trace_file)?;
    let (source, text) = match (formula_text, formula_file) {
        (Some(text), None) => ("formula".to_string(), text),
        (None, Some(path)) => (path.display().to_string(), read_file(path)?),
        // clap guarantees exactly one of the two is present.
        _ => unreachable!("clap enforces exactly one formula source"),
    };
    let formula = parse_formula(&text).map_err(|e| fail(format!("{source}: {e}")))?;
    let holds = eval(&model, &formula, &trace)
        .map_err(|e| fail(format!("{}: {e}", trace_file.display())))?;
    println!("formula: {formula}");
    println!(
        "trace: {} (t={}..{}, {} states)",
        trace.model_name,
        trace.start(),
        trace.t_end(),
        trace.len()
    );
    if holds {
        println!("VERDICT: holds");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("VERDICT: fails");
        Ok(ExitCode::from(1))
    }
}

fn cmd_reach(model_file: &Path, goal: &str, depth: u64) -> CmdResult {
    let model = load_model(model_file)?;
    let goal: Formula = parse_formula(goal).map_err(|e| fail(format!("goal: {e}")))?;
    let witness = reach(&model, &goal, depth).map_err(|e| fail(format!("goal: {e}")))?;
    println!("goal: {goal}");
    match witness {
        Some(trace) => {
            println!("reachable in {} steps:", trace.t_end());
            print!("{}", serialize_trace(&trace));
            println!("VERDICT: reachable");
            Ok(ExitCode::SUCCESS)
        }
        None => {
            println!("no conforming trace of at most {depth} steps reaches the goal");
            println!("VERDICT: unreachable");
            Ok(ExitCode::from(1))
        }
    }
}

fn cmd_enumerate(model_file: &Path, depth: u64, count_only: bool, force: bool) -> CmdResult {
    let model = load_model(model_file)?;
    let traces = enumerate(&model, depth, force)
        .map_err(|e| fail(format!("{}: {e}", model_file.display())))?;
    println!("model: {}", model.name);
    println!("depth: {depth}");
    let mut count: u64 = 0;
    for trace in traces {
        count += 1;
        if !count_only {
            println!("# trace {count}");
            print!("{}", serialize_trace(&trace));
        }
    }
    println!("traces: {count}");
    println!("VERDICT: ok");
    Ok(ExitCode::SUCCESS)
}

fn cmd_init_example(name: &str) -> CmdResult {
    let files = catalog::example_files(name).ok_or_else(|| {
        fail(format!(
            "unknown example `{name}`; known examples: ml_dev, marl"
        ))
    })?;
    for (file_name, _) in &files {
        let path = Path::new(file_name);
        if path.exists() {
            return Err(fail(format!(
                "refusing to overwrite existing file `{file_name}`"
            )));
        }
    }
    for (file_name, content) in &files {
        write_file(Path::new(file_name), content)?;
        println!("wrote {file_name}");
    }
    println!("VERDICT: ok");
    Ok(ExitCode::SUCCESS)
}
