//! Command-line surface: compile circuits, run benchmark sweeps, recompute
//! shuttle-fidelity sweeps, render layouts and validate schedules.
//!
//! Exit codes: 0 success, 1 internal/IO error, 2 parse error, 3 no valid
//! transport, 4 compile budget exceeded, 5 artifact has no schedule.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use atomroute_core::metrics::sweep_fsh;
use atomroute_core::pipeline::{compile, CompileArtifact, CompileOptions, Outcome};
use atomroute_core::qasm::parse_qasm;
use atomroute_core::render::render_svg;
use atomroute_core::transpile::{validate_schedule, Method};
use atomroute_core::CompileError;

const CONFIG_ENV: &str = "ATOMROUTE_CONFIG";

#[derive(Parser)]
#[command(
    name = "atomroute",
    version,
    about = "Compile 1Q+CZ circuits onto a single-zone neutral-atom device"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compile one QASM file into a JSON artifact.
    Compile(CompileArgs),
    /// Run a manifest of circuits across method configurations into a CSV.
    Bench(BenchArgs),
    /// Recompute the log fidelity of an artifact under swept F_sh values.
    Sweep(SweepArgs),
    /// Render an artifact's layout and routing as SVG.
    Render(RenderArgs),
    /// Replay an artifact's schedule through the validator.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct CompileArgs {
    /// OpenQASM 2.0 input file.
    input: PathBuf,
    /// Pipeline configuration: proposed-ring | proposed | no-eviction | no-hub.
    #[arg(long, value_parser = clap::value_parser!(Method))]
    method: Option<Method>,
    /// Hub trap budget.
    #[arg(long)]
    n_hub: Option<usize>,
    /// Placement optimizer seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Wall-clock compile budget in seconds.
    #[arg(long)]
    budget_seconds: Option<f64>,
    /// Per-shuttle fidelity factor.
    #[arg(long)]
    fsh: Option<f64>,
    /// JSON config file (fallback: the ATOMROUTE_CONFIG env var).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Artifact output path (default: input with .artifact.json).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Manifest JSON listing circuits and methods.
    manifest: PathBuf,
    /// Output directory for per-compile artifacts and bench.csv.
    out_dir: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    artifact: PathBuf,
    /// Comma-separated F_sh values in (0, 1].
    #[arg(long, default_value = "1.0,0.999,0.99")]
    values: String,
    /// CSV output path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    artifact: PathBuf,
    out_svg: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    artifact: PathBuf,
}

#[derive(Deserialize)]
#[serde(default)]
struct BenchManifest {
    circuits: Vec<PathBuf>,
    methods: Vec<String>,
    budget_seconds: Option<f64>,
    seed: Option<u64>,
    n_hub: Option<usize>,
}

impl Default for BenchManifest {
    fn default() -> Self {
        Self {
            circuits: Vec::new(),
            methods: vec!["proposed-ring".into()],
            budget_seconds: None,
            seed: None,
            n_hub: None,
        }
    }
}

/// Error printed as a machine-readable object plus a process exit code.
struct CliFailure {
    code: u8,
    json: serde_json::Value,
}

impl CliFailure {
    fn new(code: u8, kind: &str, message: String) -> Self {
        Self {
            code,
            json: serde_json::json!({ "error": { "kind": kind, "message": message } }),
        }
    }

    fn io(message: String) -> Self {
        Self::new(1, "io", message)
    }

    fn emit(self) -> ExitCode {
        eprintln!("{}", self.json);
        ExitCode::from(self.code)
    }
}

fn failure_of(err: &CompileError) -> CliFailure {
    match err {
        CompileError::Parse { line, .. } => {
            let mut f = CliFailure::new(2, "parse", err.to_string());
            f.json["error"]["line"] = (*line).into();
            f
        }
        CompileError::UnsupportedGate { name, line } => {
            let mut f = CliFailure::new(2, "unsupported-gate", err.to_string());
            f.json["error"]["gate"] = name.clone().into();
            f.json["error"]["line"] = (*line).into();
            f
        }
        CompileError::NoValidTransport {
            pair,
            gate_index,
            reasons,
        } => {
            let mut f = CliFailure::new(3, "no-valid-transport", err.to_string());
            f.json["error"]["pair"] = serde_json::json!([pair.0, pair.1]);
            f.json["error"]["gate_index"] = serde_json::json!(gate_index);
            f.json["error"]["reasons"] = serde_json::to_value(reasons).unwrap();
            f
        }
        CompileError::BudgetExceeded { .. } => {
            CliFailure::new(4, "budget-exceeded", err.to_string())
        }
        other => CliFailure::new(1, "internal", other.to_string()),
    }
}

fn load_options(config: &Option<PathBuf>) -> Result<CompileOptions, CliFailure> {
    let path = config
        .clone()
        .or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    let Some(path) = path else {
        return Ok(CompileOptions::default());
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliFailure::io(format!("cannot read config {path:?}: {e}")))?;
    serde_json::from_str(&text)
        .map_err(|e| CliFailure::new(2, "config", format!("malformed config {path:?}: {e}")))
}

fn circuit_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "circuit".into())
}

fn compile_file(input: &Path, opts: &CompileOptions) -> Result<CompileArtifact, CliFailure> {
    let text = std::fs::read_to_string(input)
        .map_err(|e| CliFailure::io(format!("cannot read {input:?}: {e}")))?;
    let mut circuit = parse_qasm(&text).map_err(|e| failure_of(&e))?;
    circuit.name = circuit_name(input);
    compile(&circuit, opts).map_err(|e| failure_of(&e))
}

fn outcome_failure(artifact: &CompileArtifact) -> Option<CliFailure> {
    match &artifact.outcome {
        Outcome::Ok => None,
        Outcome::NoValidTransport {
            pair,
            gate_index,
            reasons,
        } => Some(failure_of(&CompileError::NoValidTransport {
            pair: *pair,
            gate_index: *gate_index,
            reasons: *reasons,
        })),
        Outcome::BudgetExceeded {
            elapsed_seconds,
            budget_seconds,
        } => Some(failure_of(&CompileError::BudgetExceeded {
            elapsed_seconds: *elapsed_seconds,
            budget_seconds: *budget_seconds,
        })),
    }
}

fn cmd_compile(args: &CompileArgs) -> Result<ExitCode, CliFailure> {
    let mut opts = load_options(&args.config)?;
    if let Some(method) = args.method {
        method.apply(&mut opts.compile);
    }
    if let Some(n) = args.n_hub {
        opts.hubs.n_hub = n;
    }
    if let Some(seed) = args.seed {
        opts.anneal.seed = seed;
    }
    if let Some(budget) = args.budget_seconds {
        opts.compile.budget_seconds = budget;
    }
    if let Some(fsh) = args.fsh {
        if !(fsh > 0.0 && fsh <= 1.0) {
            return Err(CliFailure::new(
                1,
                "config",
                format!("--fsh must lie in (0, 1], got {fsh}"),
            ));
        }
        opts.operating_point.f_sh = fsh;
    }

    let artifact = compile_file(&args.input, &opts)?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| args.input.with_extension("artifact.json"));
    artifact.write_file(&out).map_err(|e| failure_of(&e))?;

    match &artifact.metrics {
        Some(m) => println!(
            "compiled {}: {} layers, {} swaps, {} shuttles, exec {:.3} us, log-fidelity {:.6} -> {}",
            artifact.circuit_name,
            m.counts.layers,
            m.counts.swaps,
            m.counts.shuttles,
            m.exec_time_us,
            m.log_fidelity,
            out.display()
        ),
        None => println!(
            "compile of {} failed ({}) -> {}",
            artifact.circuit_name,
            outcome_label(&artifact.outcome),
            out.display()
        ),
    }
    if let Some(failure) = outcome_failure(&artifact) {
        return Ok(failure.emit());
    }
    Ok(ExitCode::SUCCESS)
}

fn outcome_label(outcome: &Outcome) -> &'static str {
    match outcome {
        Outcome::Ok => "ok",
        Outcome::NoValidTransport { .. } => "no-valid-transport",
        Outcome::BudgetExceeded { .. } => "budget-exceeded",
    }
}

fn csv_f64(v: f64) -> String {
    format!("{v}")
}

fn cmd_bench(args: &BenchArgs) -> Result<ExitCode, CliFailure> {
    let base_opts = load_options(&args.config)?;
    let text = std::fs::read_to_string(&args.manifest)
        .map_err(|e| CliFailure::io(format!("cannot read manifest {:?}: {e}", args.manifest)))?;
    let manifest: BenchManifest = serde_json::from_str(&text)
        .map_err(|e| CliFailure::new(2, "manifest", format!("malformed manifest: {e}")))?;
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliFailure::io(format!("cannot create {:?}: {e}", args.out_dir)))?;

    let mut csv = String::from(
        "circuit,method,qubits,cz,swaps,shuttles,layers,exec_time_us,m2_exec_time_us,log_fidelity,outcome,compile_seconds\n",
    );
    for circuit_path in &manifest.circuits {
        let name = circuit_name(circuit_path);
        for method_name in &manifest.methods {
            let method: Method = method_name
                .parse()
                .map_err(|e: String| CliFailure::new(2, "manifest", e))?;
            let mut opts = base_opts.clone();
            method.apply(&mut opts.compile);
            if let Some(b) = manifest.budget_seconds {
                opts.compile.budget_seconds = b;
            }
            if let Some(s) = manifest.seed {
                opts.anneal.seed = s;
            }
            if let Some(n) = manifest.n_hub {
                opts.hubs.n_hub = n;
            }

            // one failing row never aborts the run
            let row = match compile_file(circuit_path, &opts) {
                Ok(artifact) => {
                    let file = args
                        .out_dir
                        .join(format!("{name}__{}.artifact.json", method.as_str()));
                    artifact.write_file(&file).map_err(|e| failure_of(&e))?;
                    match &artifact.metrics {
                        Some(m) => format!(
                            "{},{},{},{},{},{},{},{},{},{},{},{:.3}\n",
                            name,
                            method.as_str(),
                            artifact.num_qubits,
                            artifact.cz_gates,
                            m.counts.swaps,
                            m.counts.shuttles,
                            m.counts.layers,
                            csv_f64(m.exec_time_us),
                            csv_f64(m.m2_exec_time_us),
                            csv_f64(m.log_fidelity),
                            outcome_label(&artifact.outcome),
                            artifact.compile_seconds,
                        ),
                        None => format!(
                            "{},{},{},{},,,,,,,{},{:.3}\n",
                            name,
                            method.as_str(),
                            artifact.num_qubits,
                            artifact.cz_gates,
                            outcome_label(&artifact.outcome),
                            artifact.compile_seconds,
                        ),
                    }
                }
                Err(failure) => {
                    eprintln!("{}", failure.json);
                    format!(
                        "{},{},,,,,,,,,{},\n",
                        name,
                        method.as_str(),
                        match failure.code {
                            2 => "parse-error",
                            _ => "error",
                        }
                    )
                }
            };
            csv.push_str(&row);
        }
    }
    let csv_path = args.out_dir.join("bench.csv");
    std::fs::write(&csv_path, &csv)
        .map_err(|e| CliFailure::io(format!("cannot write {csv_path:?}: {e}")))?;
    println!("wrote {}", csv_path.display());
    Ok(ExitCode::SUCCESS)
}

fn read_artifact_with_schedule(path: &Path) -> Result<CompileArtifact, CliFailure> {
    let artifact = CompileArtifact::read_file(path).map_err(|e| failure_of(&e))?;
    if artifact.schedule.is_none() {
        return Err(CliFailure::new(
            5,
            "no-schedule",
            format!(
                "artifact {path:?} carries no schedule (outcome {})",
                outcome_label(&artifact.outcome)
            ),
        ));
    }
    Ok(artifact)
}

fn cmd_sweep(args: &SweepArgs) -> Result<ExitCode, CliFailure> {
    let artifact = read_artifact_with_schedule(&args.artifact)?;
    let mut values = Vec::new();
    for tok in args.values.split(',') {
        let v: f64 = tok
            .trim()
            .parse()
            .map_err(|_| CliFailure::new(1, "values", format!("not a number: `{tok}`")))?;
        if !(v > 0.0 && v <= 1.0) {
            return Err(CliFailure::new(
                1,
                "values",
                format!("F_sh must lie in (0, 1], got {v}"),
            ));
        }
        values.push(v);
    }
    let schedule = artifact.schedule.as_ref().unwrap();
    let table = sweep_fsh(schedule, &artifact.config.operating_point, &values);
    let mut csv = String::from("f_sh,log_fidelity\n");
    for (v, lf) in table {
        csv.push_str(&format!("{v},{lf}\n"));
    }
    match &args.out {
        Some(path) => std::fs::write(path, &csv)
            .map_err(|e| CliFailure::io(format!("cannot write {path:?}: {e}")))?,
        None => print!("{csv}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_render(args: &RenderArgs) -> Result<ExitCode, CliFailure> {
    let artifact = read_artifact_with_schedule(&args.artifact)?;
    let svg = render_svg(&artifact).map_err(|e| failure_of(&e))?;
    std::fs::write(&args.out_svg, svg)
        .map_err(|e| CliFailure::io(format!("cannot write {:?}: {e}", args.out_svg)))?;
    println!("wrote {}", args.out_svg.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(args: &ValidateArgs) -> Result<ExitCode, CliFailure> {
    let artifact = read_artifact_with_schedule(&args.artifact)?;
    let schedule = artifact.schedule.as_ref().unwrap();
    let report = validate_schedule(
        schedule,
        &artifact.circuit,
        &artifact.layout,
        &artifact.config.operating_point,
    );
    match report.first_violation {
        None => {
            println!(
                "OK: {} layers, {} ops replayed cleanly",
                report.layers_checked, report.ops_checked
            );
            Ok(ExitCode::SUCCESS)
        }
        Some(v) => Err(CliFailure::new(1, "validation", v.to_string())),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Compile(args) => cmd_compile(args),
        Cmd::Bench(args) => cmd_bench(args),
        Cmd::Sweep(args) => cmd_sweep(args),
        Cmd::Render(args) => cmd_render(args),
        Cmd::Validate(args) => cmd_validate(args),
    };
    match result {
        Ok(code) => code,
        Err(failure) => failure.emit(),
    }
}
