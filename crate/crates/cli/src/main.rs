//! `qrbs`: compile rule networks to reversible circuits, simulate them, reduce
//! categorical logic bases and stage IDC from TNM classes.
//!
//! Exit status: 0 on success, 1 on a domain error, 2 on a usage error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use qrbs_core::categorical::Complex;
use qrbs_core::sim::MAX_QUBITS_ENV;
use qrbs_core::{Engine, TnmClass};

#[derive(Debug, Parser)]
#[command(name = "qrbs", version, about = "Quantum rule-based systems toolkit")]
struct Cli {
    /// Emit machine-readable JSON on standard output.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Stage an IDC case from a TNM class or clinical findings.
    Stage(StageArgs),
    /// Reduce an expanded logic base by constraints and optionally diagnose a case.
    Rlb(RlbArgs),
    /// Compile a rule file to an OpenQASM circuit.
    Compile(CompileArgs),
    /// Run an OpenQASM circuit from a basis state.
    Simulate(SimulateArgs),
    /// Write the IDC circuit (or a compiled rule file) as OpenQASM or JSON metadata.
    Export(ExportArgs),
    /// Check the fifteen reference IDC staging results.
    VerifyIdc(VerifyIdcArgs),
    /// Check a compiled rule file against forward chaining on every input.
    VerifyCompile(VerifyCompileArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("case").required(true).args(["tnm", "findings"])))]
struct StageArgs {
    /// TNM class such as `T2,N1,M0`.
    #[arg(long, value_parser = parse_tnm)]
    tnm: Option<TnmClass>,
    /// JSON file with clinical findings.
    #[arg(long)]
    findings: Option<PathBuf>,
    #[arg(long, value_parser = parse_engine, default_value = "fast")]
    engine: Engine,
    /// Print the activated qubit, bit string and stage set.
    #[arg(long)]
    explain: bool,
}

#[derive(Debug, Args)]
struct RlbArgs {
    /// Constraint file (`symptoms:`, `diagnoses:` and `rule` lines).
    #[arg(long)]
    constraints: PathBuf,
    #[arg(long)]
    symptoms: usize,
    #[arg(long)]
    diagnoses: usize,
    /// Symptom complex to diagnose, first symptom first (e.g. `01`).
    #[arg(long, value_parser = parse_complex)]
    case: Option<Complex>,
}

#[derive(Debug, Args)]
struct CompileOpts {
    /// Give every subexpression its own ancilla.
    #[arg(long)]
    no_share: bool,
    /// Maximum number of ancilla qubits.
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Debug, Args)]
struct CompileArgs {
    #[arg(long)]
    rules: PathBuf,
    #[command(flatten)]
    opts: CompileOpts,
    /// Output QASM file; standard output when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Write the input/output qubit map as JSON.
    #[arg(long)]
    map: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    circuit: PathBuf,
    /// Initial basis state, highest qubit first; a shorter string sets the
    /// low qubits and leaves the rest at 0.
    #[arg(long, value_parser = parse_bits)]
    input: String,
    #[arg(long, value_parser = parse_engine, default_value = "fast")]
    engine: Engine,
    /// Statevector width cap.
    #[arg(long, env = MAX_QUBITS_ENV)]
    max_qubits: Option<usize>,
    /// Dump the final state (circuits of at most 8 qubits).
    #[arg(long)]
    state: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExportFormat {
    Qasm,
    Json,
}

#[derive(Debug, Args)]
struct ExportArgs {
    /// Rule file to compile instead of the bundled IDC stage rules.
    #[arg(long)]
    rules: Option<PathBuf>,
    #[command(flatten)]
    opts: CompileOpts,
    #[arg(long, value_enum, default_value = "qasm")]
    format: ExportFormat,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyIdcArgs {
    #[arg(long, value_parser = parse_engine, default_value = "fast")]
    engine: Engine,
    #[command(flatten)]
    opts: CompileOpts,
}

#[derive(Debug, Args)]
struct VerifyCompileArgs {
    #[arg(long)]
    rules: PathBuf,
    #[command(flatten)]
    opts: CompileOpts,
}

fn parse_tnm(s: &str) -> Result<TnmClass, String> {
    s.parse::<TnmClass>().map_err(|e| e.to_string())
}

fn parse_engine(s: &str) -> Result<Engine, String> {
    s.parse()
}

fn parse_complex(s: &str) -> Result<Complex, String> {
    s.parse::<Complex>().map_err(|e| e.to_string())
}

fn parse_bits(s: &str) -> Result<String, String> {
    if !s.is_empty() && s.chars().all(|c| c == '0' || c == '1') {
        Ok(s.to_string())
    } else {
        Err(format!("`{s}` is not a bit string"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.json;
    let result = match cli.command {
        Command::Stage(args) => commands::stage(args, json),
        Command::Rlb(args) => commands::rlb(args, json),
        Command::Compile(args) => commands::compile(args, json),
        Command::Simulate(args) => commands::simulate(args, json),
        Command::Export(args) => commands::export(args, json),
        Command::VerifyIdc(args) => commands::verify_idc(args, json),
        Command::VerifyCompile(args) => commands::verify_compile(args, json),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
