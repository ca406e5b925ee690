//! Subcommands. Each returns the text for stdout and an exit code, so the binary and the tests
//! share one code path.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use markov_trace::combs::{ctx_equiv, ext_equiv};
use markov_trace::contraction::{contract, is_nonsignalling};
use markov_trace::interp::{check_trace_soundness, interpret, SoundnessVerdict};
use markov_trace::laws::{exhaustive_confluence, run_law, LawOutcome, LAWS};
use markov_trace::{Comb, CombError, Diagram, Kernel, Model, TracePartition, Tolerances};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::dsl::{self, Source};
use crate::{dot, json};

const TOL: Tolerances = Tolerances::DEFAULT;

#[derive(Debug, Parser)]
#[command(name = "mtrace", version, about = "Markov string diagrams, contraction and causal traces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct DiagArgs {
    /// Source file in the diagram language.
    pub file: PathBuf,
    /// Diagram to use; defaults to the only one in the file.
    #[arg(long)]
    pub diag: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Form {
    /// A source file with a term.
    Term,
    /// A source file with a wire-level graph block.
    Graph,
    /// The canonical byte string.
    Canonical,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a file and check every diagram in it.
    Validate { file: PathBuf },
    /// Print a diagram in normal form.
    Normalize {
        #[command(flatten)]
        src: DiagArgs,
        #[arg(long, value_enum, default_value = "term")]
        form: Form,
    },
    /// Contract the trailing K boundary wires.
    Contract {
        #[command(flatten)]
        src: DiagArgs,
        #[arg(long)]
        feedback: usize,
        #[arg(long, value_enum, default_value = "term")]
        form: Form,
    },
    /// Structural non-signalling check for the trailing K wires.
    Nonsignalling {
        #[command(flatten)]
        src: DiagArgs,
        #[arg(long)]
        feedback: usize,
    },
    /// Evaluate a diagram under a model, printing kernel JSON.
    Eval {
        #[command(flatten)]
        src: DiagArgs,
        #[arg(long)]
        model: PathBuf,
    },
    /// Compare the contraction with the causal trace of the evaluation.
    TraceCheck {
        #[command(flatten)]
        src: DiagArgs,
        #[arg(long)]
        feedback: usize,
        #[arg(long)]
        model: PathBuf,
    },
    /// Comb operations on JSON files.
    #[command(subcommand)]
    Comb(CombCommand),
    /// Run the randomized law suite and print a JSON report.
    Laws {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        cases: usize,
        /// Only run laws whose name starts with this prefix.
        #[arg(long)]
        only: Option<String>,
        /// Also check normalization confluence exhaustively up to this many boxes.
        #[arg(long)]
        confluence: Option<usize>,
    },
    /// Draw a diagram.
    Render {
        #[command(flatten)]
        src: DiagArgs,
        /// Graphviz output (the only format).
        #[arg(long, required = true)]
        dot: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum CombCommand {
    /// The kernel obtained by plugging a swap into the hole.
    Extend { comb: PathBuf },
    /// Plug a kernel `B ⊗ K -> B' ⊗ K'` into the hole.
    Insert {
        comb: PathBuf,
        #[arg(long)]
        context: PathBuf,
    },
    /// Extensional equivalence, audited on random contexts.
    Equiv {
        first: PathBuf,
        second: PathBuf,
        #[arg(long, default_value_t = 50)]
        contexts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Split a kernel non-signalling from its last inputs to its last outputs into a comb.
    FromNonsignalling {
        kernel: PathBuf,
        /// Number of trailing inputs forming the hole output B'.
        #[arg(long)]
        b_out: usize,
        /// Number of trailing outputs forming the hole input B.
        #[arg(long)]
        b: usize,
    },
}

/// A failure with its exit code: 1 for an invalid input or violated check, 2 for bad usage.
#[derive(Debug, Error)]
#[error("{kind}: {message}")]
pub struct CliError {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> CliError {
        CliError {
            code: 2,
            kind: "usage",
            message: message.into(),
        }
    }

    fn invalid(kind: &'static str, message: impl ToString) -> CliError {
        CliError {
            code: 1,
            kind,
            message: message.to_string(),
        }
    }
}

/// Text for stdout and the exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub code: i32,
}

fn ok(stdout: String) -> Result<Output, CliError> {
    Ok(Output { stdout, code: 0 })
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Source, CliError> {
    dsl::parse(&read(path)?).map_err(|e| CliError::invalid("parse", format!("{}:{e}", path.display())))
}

fn pick<'a>(src: &'a Source, name: &Option<String>) -> Result<(&'a str, &'a Diagram), CliError> {
    match name {
        Some(n) => src
            .diagrams
            .iter()
            .find(|(m, _)| m == n)
            .map(|(m, d)| (m.as_str(), d))
            .ok_or_else(|| CliError::usage(format!("no diagram named `{n}`"))),
        None => match src.diagrams.as_slice() {
            [(m, d)] => Ok((m.as_str(), d)),
            [] => Err(CliError::usage("the file declares no diagrams")),
            _ => Err(CliError::usage("the file declares several diagrams, choose one with --diag")),
        },
    }
}

fn load_model(path: &Path, src: &Source) -> Result<Model, CliError> {
    json::parse_model(&read(path)?, &src.signature).map_err(|e| CliError::invalid("model", e))
}

fn load_comb(path: &Path) -> Result<Comb, CliError> {
    json::parse_comb(&read(path)?).map_err(|e| CliError::invalid("comb", e))
}

fn comb_error(e: CombError) -> CliError {
    CliError::invalid("comb", e)
}

fn partition(d: &Diagram, feedback: usize) -> Result<TracePartition, CliError> {
    TracePartition::new(d.clone(), feedback).map_err(|e| CliError::usage(e.to_string()))
}

fn print(src: &Source, name: &str, d: &Diagram, form: Form) -> String {
    match form {
        Form::Term => dsl::print_source(&src.signature, [(name, d)]),
        Form::Graph => format!("{}\ndiag {name} = {}", dsl::print_signature(&src.signature), dsl::print_graph(d)),
        Form::Canonical => String::from_utf8(d.canonical_form()).expect("canonical form is ASCII"),
    }
}

pub fn run(cli: Cli) -> Result<Output, CliError> {
    match cli.command {
        Command::Validate { file } => {
            let src = load(&file)?;
            let mut out = String::new();
            for (name, d) in &src.diagrams {
                writeln!(
                    out,
                    "{name}: [{}] -> [{}], {} boxes, {} wires",
                    d.type_list(&d.dom()),
                    d.type_list(&d.cod()),
                    d.num_boxes(),
                    d.num_wires()
                )
                .unwrap();
            }
            ok(out)
        }
        Command::Normalize { src, form } => {
            let source = load(&src.file)?;
            let (name, d) = pick(&source, &src.diag)?;
            ok(print(&source, name, d, form))
        }
        Command::Contract { src, feedback, form } => {
            let source = load(&src.file)?;
            let (name, d) = pick(&source, &src.diag)?;
            let c = contract(&partition(d, feedback)?).map_err(|e| CliError::invalid("contract", e))?;
            ok(print(&source, name, &c, form))
        }
        Command::Nonsignalling { src, feedback } => {
            let source = load(&src.file)?;
            let (_, d) = pick(&source, &src.diag)?;
            let ns = is_nonsignalling(&partition(d, feedback)?);
            Ok(Output {
                stdout: format!("{ns}\n"),
                code: if ns { 0 } else { 1 },
            })
        }
        Command::Eval { src, model } => {
            let source = load(&src.file)?;
            let (_, d) = pick(&source, &src.diag)?;
            let m = load_model(&model, &source)?;
            let k = interpret(d, &m, &TOL).map_err(|e| CliError::invalid("eval", e))?;
            ok(json::kernel_to_json(&k))
        }
        Command::TraceCheck { src, feedback, model } => {
            let source = load(&src.file)?;
            let (_, d) = pick(&source, &src.diag)?;
            let m = load_model(&model, &source)?;
            let t = partition(d, feedback)?;
            let verdict = check_trace_soundness(&t, &m, &TOL).map_err(|e| CliError::invalid("trace-check", e))?;
            let code = if verdict.holds() { 0 } else { 1 };
            Ok(Output {
                stdout: verdict_json(&verdict),
                code,
            })
        }
        Command::Comb(c) => run_comb(c),
        Command::Laws {
            seed,
            cases,
            only,
            confluence,
        } => laws(seed, cases, only.as_deref(), confluence),
        Command::Render { src, dot: _ } => {
            let source = load(&src.file)?;
            let (name, d) = pick(&source, &src.diag)?;
            ok(dot::render(d, name))
        }
    }
}

fn verdict_json(v: &SoundnessVerdict) -> String {
    let mut out = String::from("{\n");
    match v {
        SoundnessVerdict::Holds { contracted, residual } => {
            writeln!(out, "  \"verdict\": \"holds\",\n  \"residual\": {},", json::json_number(*residual)).unwrap();
            json::kernel_field(&mut out, "kernel", contracted, 2);
        }
        SoundnessVerdict::SemanticallySignalling => {
            out.push_str("  \"verdict\": \"semantically-signalling\"");
        }
        SoundnessVerdict::Mismatch {
            contracted,
            traced,
            residual,
        } => {
            writeln!(out, "  \"verdict\": \"mismatch\",\n  \"residual\": {},", json::json_number(*residual)).unwrap();
            json::kernel_field(&mut out, "contracted", contracted, 2);
            out.push_str(",\n");
            json::kernel_field(&mut out, "traced", traced, 2);
        }
    }
    out.push_str("\n}\n");
    out
}

fn run_comb(c: CombCommand) -> Result<Output, CliError> {
    match c {
        CombCommand::Extend { comb } => {
            let k = load_comb(&comb)?.extension().map_err(comb_error)?;
            ok(json::kernel_to_json(&k))
        }
        CombCommand::Insert { comb, context } => {
            let c = load_comb(&comb)?;
            let h = json::parse_kernel(&read(&context)?).map_err(|e| CliError::invalid("kernel", e))?;
            ok(json::kernel_to_json(&c.insert(&h).map_err(comb_error)?))
        }
        CombCommand::Equiv {
            first,
            second,
            contexts,
            seed,
        } => {
            let (c1, c2) = (load_comb(&first)?, load_comb(&second)?);
            let ext = ext_equiv(&c1, &c2, &TOL).map_err(comb_error)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let checked = if ext {
                ctx_equiv(&c1, &c2, contexts, &mut rng, &TOL).map_err(comb_error)?;
                contexts
            } else {
                0
            };
            Ok(Output {
                stdout: format!("{{\"extensional\": {ext}, \"contexts_checked\": {checked}}}\n"),
                code: if ext { 0 } else { 1 },
            })
        }
        CombCommand::FromNonsignalling { kernel, b_out, b } => {
            let k: Kernel = json::parse_kernel(&read(&kernel)?).map_err(|e| CliError::invalid("kernel", e))?;
            if b_out > k.dom().len() || b > k.cod().len() {
                return Err(CliError::usage("hole wider than the kernel boundary"));
            }
            let c = Comb::from_nonsignalling(&k, b_out, b, &TOL).map_err(comb_error)?;
            ok(json::comb_to_json(&c))
        }
    }
}

#[derive(Debug, Serialize)]
struct LawJson {
    name: &'static str,
    tolerance: f64,
    cases: usize,
    violations: usize,
    max_residual: f64,
    first_failure: Option<FailureJson>,
}

#[derive(Debug, Serialize)]
struct FailureJson {
    seed: u64,
    message: String,
}

#[derive(Debug, Serialize)]
struct ConfluenceJson {
    max_boxes: usize,
    cospans: usize,
    failures: usize,
}

#[derive(Debug, Serialize)]
struct ReportJson {
    seed: u64,
    cases: usize,
    violations: usize,
    laws: Vec<LawJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    confluence: Option<ConfluenceJson>,
}

impl From<LawOutcome> for LawJson {
    fn from(o: LawOutcome) -> Self {
        LawJson {
            name: o.name,
            tolerance: o.tolerance,
            cases: o.cases,
            violations: o.violations,
            max_residual: o.max_residual,
            first_failure: o.first_failure.map(|(seed, message)| FailureJson { seed, message }),
        }
    }
}

/// Runs the selected laws, one thread per law. Case seeds depend only on the master seed and
/// the law's position in the table, so the report does not depend on scheduling.
pub fn laws(seed: u64, cases: usize, only: Option<&str>, confluence: Option<usize>) -> Result<Output, CliError> {
    let selected: Vec<(usize, _)> = LAWS
        .iter()
        .enumerate()
        .filter(|(_, l)| only.is_none_or(|p| l.name.starts_with(p)))
        .collect();
    if selected.is_empty() {
        return Err(CliError::usage(format!("no law matches `{}`", only.unwrap_or(""))));
    }
    let outcomes: Vec<LawOutcome> = std::thread::scope(|s| {
        let handles: Vec<_> = selected
            .iter()
            .map(|&(i, law)| s.spawn(move || run_law(law, i as u64, seed, cases)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("law thread panicked")).collect()
    });
    let confluence = match confluence {
        Some(n) => {
            let (cospans, failures) = exhaustive_confluence(n).map_err(|e| CliError::invalid("confluence", e))?;
            Some(ConfluenceJson {
                max_boxes: n,
                cospans,
                failures,
            })
        }
        None => None,
    };
    let violations = outcomes.iter().map(|o| o.violations).sum::<usize>()
        + confluence.as_ref().map_or(0, |c| c.failures);
    let report = ReportJson {
        seed,
        cases,
        violations,
        laws: outcomes.into_iter().map(LawJson::from).collect(),
        confluence,
    };
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    Ok(Output {
        stdout: text,
        code: if violations == 0 { 0 } else { 1 },
    })
}
