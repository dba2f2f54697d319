mod commands;
mod config;
mod error;
mod output;

use clap::{Args, Parser, Subcommand};
use config::{load_file, overlay, CommandTag, FileConfig, RunConfig};
use error::{CliError, CliResult};
use output::Format;
use serde::Serialize;
use serde_json::{json, Map, Value};
use std::path::PathBuf;
use std::process::ExitCode;

/// Decay bounds for level-set recursions, brute-force envelopes,
/// counterexample checks and a degenerate elliptic solver.
#[derive(Debug, Parser)]
#[command(name = "levelset-decay", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Option<Commands>,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (standard output when absent).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Seed for randomized checks (default 0).
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Commands {
    /// Check the growth-function axioms on a sample lattice.
    Gcheck(GcheckFlags),
    /// Compute the decay conclusion for one recursion.
    Bound(LemmaFlags),
    /// Extremal envelope against the computed bound.
    Envelope(EnvelopeFlags),
    /// Doubling form against full form for 0 < beta < 1.
    Equivalence(EquivalenceFlags),
    /// The two explicit counterexamples.
    Counterexample(CounterexampleFlags),
    /// Solve the degenerate Dirichlet problem.
    PdeSolve(PdeFlags),
    /// Solve, then classify the level-set decay of the solution.
    PdeAnalyze(PdeFlags),
}

#[derive(Debug, Args, Serialize)]
struct GcheckFlags {
    /// identity, loglinear or power:<p>
    #[arg(long)]
    growth: Option<String>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
struct LemmaFlags {
    /// classical, power-weighted, first-generalized or second-generalized
    #[arg(long)]
    variant: Option<String>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    k0: Option<f64>,
    #[arg(long)]
    phi0: Option<f64>,
    /// identity, loglinear or power:<p>
    #[arg(long)]
    growth: Option<String>,
    /// strict or permissive
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    tau_hint: Option<f64>,
    #[arg(long)]
    theta_tilde: Option<f64>,
    #[arg(long)]
    eps0: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
struct EnvelopeFlags {
    #[command(flatten)]
    #[serde(flatten)]
    lemma: LemmaFlags,
    #[arg(long)]
    k_max: Option<f64>,
    /// Number of geometric grid levels.
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    slack: Option<f64>,
    /// Also check the grid with halved spacing.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    refine: Option<bool>,
    /// JSON array of parameter sets, run concurrently.
    #[arg(long)]
    sweep: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct EquivalenceFlags {
    #[arg(long)]
    c_tilde: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    k0: Option<f64>,
    #[arg(long)]
    phi0: Option<f64>,
    #[arg(long)]
    growth: Option<String>,
    #[arg(long)]
    pairs: Option<usize>,
    #[arg(long)]
    octaves: Option<usize>,
    #[arg(long)]
    per_octave: Option<usize>,
    #[arg(long)]
    random_profiles: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
struct CounterexampleFlags {
    /// beta1 or beta-gt-1
    kind: Option<String>,
    #[arg(long)]
    k_min: Option<f64>,
    #[arg(long)]
    k_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    real_threshold: Option<bool>,
}

#[derive(Debug, Args, Serialize)]
struct PdeFlags {
    #[arg(long)]
    n: Option<usize>,
    /// Interior grid points per axis (odd, >= 9).
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    a_low: Option<f64>,
    #[arg(long)]
    a_high: Option<f64>,
    #[arg(long)]
    theta_deg: Option<f64>,
    /// zero, constant or radial
    #[arg(long)]
    #[serde(skip)]
    source: Option<String>,
    /// Constant source value.
    #[arg(long)]
    #[serde(skip)]
    value: Option<f64>,
    /// Integrability exponent of the radial source.
    #[arg(long)]
    #[serde(skip)]
    m_target: Option<f64>,
    /// arithmetic or harmonic
    #[arg(long)]
    averaging: Option<String>,
    #[arg(long)]
    picard_tol: Option<f64>,
    #[arg(long)]
    linear_tol: Option<f64>,
    #[arg(long)]
    max_picard: Option<usize>,
    /// Binary field output (pde-solve).
    #[arg(long)]
    field_output: Option<PathBuf>,
    /// JSON agreement report (pde-analyze).
    #[arg(long)]
    report: Option<PathBuf>,
}

impl PdeFlags {
    /// Fold the flat source flags into the nested `source` object.
    fn apply_source(&self, params: &mut Map<String, Value>) {
        if self.source.is_none() && self.value.is_none() && self.m_target.is_none() {
            return;
        }
        let mut src = match params.remove("source") {
            Some(Value::Object(m)) => m,
            _ => Map::new(),
        };
        if let Some(kind) = &self.source {
            let kind = match kind.as_str() {
                "radial" | "radial-singular" => "radial_singular",
                k => k,
            };
            if src.get("kind").and_then(Value::as_str) != Some(kind) {
                src.clear();
            }
            src.insert("kind".into(), json!(kind));
        }
        if let Some(v) = self.value {
            src.insert("value".into(), json!(v));
        }
        if let Some(m) = self.m_target {
            src.insert("m_target".into(), json!(m));
        }
        params.insert("source".into(), Value::Object(src));
    }
}

fn flags_json<T: Serialize>(flags: &T) -> CliResult<Value> {
    serde_json::to_value(flags).map_err(|e| CliError::Config(e.to_string()))
}

impl Commands {
    fn tag(&self) -> CommandTag {
        match self {
            Commands::Gcheck(_) => CommandTag::Gcheck,
            Commands::Bound(_) => CommandTag::Bound,
            Commands::Envelope(_) => CommandTag::Envelope,
            Commands::Equivalence(_) => CommandTag::Equivalence,
            Commands::Counterexample(_) => CommandTag::Counterexample,
            Commands::PdeSolve(_) => CommandTag::PdeSolve,
            Commands::PdeAnalyze(_) => CommandTag::PdeAnalyze,
        }
    }

    fn apply(&self, params: &mut Map<String, Value>) -> CliResult<()> {
        match self {
            Commands::Gcheck(f) => overlay(params, flags_json(f)?),
            Commands::Bound(f) => overlay(params, flags_json(f)?),
            Commands::Envelope(f) => overlay(params, flags_json(f)?),
            Commands::Equivalence(f) => overlay(params, flags_json(f)?),
            Commands::Counterexample(f) => overlay(params, flags_json(f)?),
            Commands::PdeSolve(f) | Commands::PdeAnalyze(f) => {
                overlay(params, flags_json(f)?);
                f.apply_source(params);
            }
        }
        Ok(())
    }
}

fn parse_config(cli: Cli) -> CliResult<RunConfig> {
    let file = match &cli.global.config {
        Some(p) => load_file(p)?,
        None => FileConfig::default(),
    };
    let command = match (&cli.command, file.command) {
        (Some(c), Some(f)) if c.tag() != f => {
            return Err(CliError::Usage(format!(
                "subcommand {} conflicts with command {} in the config file",
                c.tag().name(),
                f.name()
            )))
        }
        (Some(c), _) => c.tag(),
        (None, Some(f)) => f,
        (None, None) => return Err(CliError::Usage("no subcommand given (see --help)".into())),
    };
    let mut params = file.params;
    if let Some(c) = &cli.command {
        c.apply(&mut params)?;
    }
    Ok(RunConfig {
        command,
        params,
        output_path: cli.global.output.or(file.output_path),
        format: cli.global.format.or(file.format).unwrap_or(command.default_format()),
        seed: cli.global.seed.or(file.seed).unwrap_or(0),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match parse_config(cli).and_then(commands::execute) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("levelset-decay: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
