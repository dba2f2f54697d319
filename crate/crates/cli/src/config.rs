//! Run configuration: a JSON file, command-line flags layered on top, and
//! the typed parameter sets each command deserializes from the merge.

use crate::error::{CliError, CliResult};
use crate::output::Format;
use levelset_decay::growth::GrowthSpec;
use levelset_decay::lemma::{AxiomMode, BoundOptions};
use levelset_decay::pde::{FaceAveraging, SourceSpec};
use levelset_decay::{GrowthFunction, LemmaParams, Variant};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::{Map, Value};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandTag {
    Gcheck,
    Bound,
    Envelope,
    Equivalence,
    Counterexample,
    PdeSolve,
    PdeAnalyze,
}

impl CommandTag {
    pub fn name(self) -> &'static str {
        match self {
            CommandTag::Gcheck => "gcheck",
            CommandTag::Bound => "bound",
            CommandTag::Envelope => "envelope",
            CommandTag::Equivalence => "equivalence",
            CommandTag::Counterexample => "counterexample",
            CommandTag::PdeSolve => "pde-solve",
            CommandTag::PdeAnalyze => "pde-analyze",
        }
    }

    pub fn default_format(self) -> Format {
        match self {
            CommandTag::Envelope | CommandTag::PdeAnalyze => Format::Csv,
            _ => Format::Json,
        }
    }
}

/// What a config file may contain.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub command: Option<CommandTag>,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(alias = "output")]
    pub output_path: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
}

/// Fully merged configuration, ready to execute.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CommandTag,
    pub params: Map<String, Value>,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
}

pub fn read_json_file(path: &Path) -> CliResult<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn load_file(path: &Path) -> CliResult<FileConfig> {
    let v = read_json_file(path)?;
    typed(v, &format!("{}", path.display()))
}

/// Deserialize with the failing path in the message.
pub fn typed<T: DeserializeOwned>(v: Value, context: &str) -> CliResult<T> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." || path.is_empty() {
            CliError::Config(format!("{context}: {inner}"))
        } else {
            CliError::Config(format!("{context}: field `{path}`: {inner}"))
        }
    })
}

/// Copy every non-null entry of `flags` (a JSON object) over `base`.
pub fn overlay(base: &mut Map<String, Value>, flags: Value) {
    if let Value::Object(m) = flags {
        for (k, v) in m {
            if !v.is_null() {
                base.insert(k, v);
            }
        }
    }
}

/// Move the listed keys out of `params` into a new object.
pub fn split_keys(params: &mut Map<String, Value>, keys: &[&str]) -> Value {
    let mut out = Map::new();
    for k in keys {
        if let Some(v) = params.remove(*k) {
            out.insert((*k).to_string(), v);
        }
    }
    Value::Object(out)
}

fn de_growth<'de, D: Deserializer<'de>>(d: D) -> Result<GrowthFunction, D::Error> {
    use serde::de::Error;
    match Value::deserialize(d)? {
        Value::String(s) => GrowthFunction::from_name(&s).map_err(D::Error::custom),
        v @ Value::Object(_) => {
            let spec: GrowthSpec = serde_json::from_value(v).map_err(D::Error::custom)?;
            GrowthFunction::from_spec(spec).map_err(D::Error::custom)
        }
        other => Err(D::Error::custom(format!("expected a growth name or object, got {other}"))),
    }
}

fn identity() -> GrowthFunction {
    GrowthFunction::identity()
}

fn loglinear() -> GrowthFunction {
    GrowthFunction::loglinear()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GcheckInput {
    #[serde(default = "loglinear", deserialize_with = "de_growth")]
    pub growth: GrowthFunction,
    #[serde(default = "GcheckInput::t_max")]
    pub t_max: f64,
    #[serde(default = "GcheckInput::samples")]
    pub samples: usize,
    #[serde(default = "GcheckInput::tol")]
    pub tol: f64,
}

impl GcheckInput {
    fn t_max() -> f64 {
        1e3
    }
    fn samples() -> usize {
        10_000
    }
    fn tol() -> f64 {
        1e-12
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaInput {
    pub variant: Variant,
    pub c: f64,
    pub alpha: f64,
    pub beta: f64,
    #[serde(default)]
    pub theta: f64,
    pub k0: f64,
    pub phi0: f64,
    #[serde(default = "identity", deserialize_with = "de_growth")]
    pub growth: GrowthFunction,
    #[serde(default)]
    pub mode: AxiomMode,
    pub tau_hint: Option<f64>,
    pub theta_tilde: Option<f64>,
    pub eps0: Option<f64>,
}

impl LemmaInput {
    pub fn params(&self) -> LemmaParams {
        LemmaParams::new(self.variant, self.c, self.alpha, self.beta, self.theta, self.k0, self.phi0)
            .with_growth(self.growth.clone())
            .with_mode(self.mode)
    }

    pub fn options(&self) -> BoundOptions {
        BoundOptions { tau_hint: self.tau_hint, theta_tilde: self.theta_tilde, eps0: self.eps0 }
    }
}

pub const ENVELOPE_KEYS: [&str; 5] = ["k_max", "levels", "slack", "refine", "sweep"];

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeOptions {
    pub k_max: Option<f64>,
    #[serde(default = "EnvelopeOptions::levels")]
    pub levels: usize,
    #[serde(default = "EnvelopeOptions::slack")]
    pub slack: f64,
    #[serde(default)]
    pub refine: bool,
    pub sweep: Option<PathBuf>,
}

impl EnvelopeOptions {
    fn levels() -> usize {
        128
    }
    fn slack() -> f64 {
        0.05
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquivalenceInput {
    pub c_tilde: f64,
    pub alpha: f64,
    pub beta: f64,
    pub k0: f64,
    pub phi0: f64,
    #[serde(default = "identity", deserialize_with = "de_growth")]
    pub growth: GrowthFunction,
    #[serde(default = "EquivalenceInput::pairs")]
    pub pairs: usize,
    #[serde(default = "EquivalenceInput::octaves")]
    pub octaves: usize,
    #[serde(default = "EquivalenceInput::per_octave")]
    pub per_octave: usize,
    #[serde(default)]
    pub random_profiles: usize,
}

impl EquivalenceInput {
    fn pairs() -> usize {
        10_000
    }
    fn octaves() -> usize {
        20
    }
    fn per_octave() -> usize {
        16
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum CounterKind {
    #[serde(rename = "beta1", alias = "beta-1", alias = "beta_1")]
    BetaOne,
    #[serde(rename = "beta-gt-1", alias = "beta_gt_1", alias = "betagt1")]
    BetaGtOne,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleInput {
    pub kind: CounterKind,
    #[serde(default = "CounterexampleInput::k_min")]
    pub k_min: f64,
    #[serde(default = "CounterexampleInput::k_max")]
    pub k_max: f64,
    #[serde(default = "CounterexampleInput::points")]
    pub points: usize,
    #[serde(default = "CounterexampleInput::lambdas")]
    pub lambdas: Vec<f64>,
    #[serde(default = "CounterexampleInput::alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub real_threshold: bool,
}

impl CounterexampleInput {
    fn k_min() -> f64 {
        1.0
    }
    fn k_max() -> f64 {
        1e6
    }
    fn points() -> usize {
        200
    }
    fn lambdas() -> Vec<f64> {
        levelset_decay::counterexample::DEFAULT_LAMBDAS.to_vec()
    }
    fn alpha() -> f64 {
        1.0
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdeInput {
    #[serde(default = "PdeInput::n")]
    pub n: usize,
    #[serde(default = "PdeInput::resolution")]
    pub resolution: usize,
    #[serde(default = "PdeInput::a_low")]
    pub a_low: f64,
    pub a_high: Option<f64>,
    #[serde(default)]
    pub theta_deg: f64,
    pub source: SourceSpec,
    #[serde(default)]
    pub averaging: FaceAveraging,
    #[serde(default = "PdeInput::picard_tol")]
    pub picard_tol: f64,
    #[serde(default = "PdeInput::linear_tol")]
    pub linear_tol: f64,
    #[serde(default = "PdeInput::max_picard")]
    pub max_picard: usize,
    /// pde-solve: where to write the binary field.
    pub field_output: Option<PathBuf>,
    /// pde-analyze: where to write the JSON agreement report.
    pub report: Option<PathBuf>,
}

impl PdeInput {
    fn n() -> usize {
        3
    }
    fn resolution() -> usize {
        33
    }
    fn a_low() -> f64 {
        1.0
    }
    fn picard_tol() -> f64 {
        1e-8
    }
    fn linear_tol() -> f64 {
        1e-10
    }
    fn max_picard() -> usize {
        500
    }

    pub fn problem(&self) -> levelset_decay::pde::PdeProblem {
        levelset_decay::pde::PdeProblem {
            n: self.n,
            grid_points_per_axis: self.resolution,
            a_low: self.a_low,
            a_high: self.a_high.unwrap_or(self.a_low),
            theta_deg: self.theta_deg,
            source: self.source.clone(),
            averaging: self.averaging,
        }
    }
}
