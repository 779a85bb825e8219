use std::path::PathBuf;

use dixtrace_core::dixmier::ClassifyPolicy;
use dixtrace_core::fourier::weierstrass_symbol;
use dixtrace_core::nc_torus::LatticeSymbol;
use dixtrace_core::{CSequence, FourierSymbol, WeierstrassParams};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// One experiment: `{"kind": ..., "params": {...}, "output": {...}, "limits": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub experiment: Experiment,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub limits: Limits,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum Experiment {
    WeierstrassTrace(WeierstrassTraceParams),
    Measurability(MeasurabilityParams),
    SingularValueSweep(SweepParams),
    KernelCheck(KernelCheckParams),
    Winding(WindingParams),
    NcTorus(NcTorusParams),
    HnCheck(HnCheckParams),
    FourierTrace(FourierTraceParams),
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::WeierstrassTrace(_) => "weierstrass_trace",
            Experiment::Measurability(_) => "measurability",
            Experiment::SingularValueSweep(_) => "singular_value_sweep",
            Experiment::KernelCheck(_) => "kernel_check",
            Experiment::Winding(_) => "winding",
            Experiment::NcTorus(_) => "nc_torus",
            Experiment::HnCheck(_) => "hn_check",
            Experiment::FourierTrace(_) => "fourier_trace",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OutputSpec {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
}

impl OutputSpec {
    /// Explicit format, else inferred from a `.csv` extension, else JSON.
    pub fn resolved_format(&self) -> Format {
        self.format.unwrap_or_else(|| match &self.path {
            Some(p) if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) => Format::Csv,
            _ => Format::Json,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Limits {
    #[serde(default = "default_max_matrix")]
    pub max_matrix: usize,
    #[serde(default = "default_max_tuples")]
    pub max_tuples: u64,
    #[serde(default = "default_max_sequence")]
    pub max_sequence: usize,
}

fn default_max_matrix() -> usize {
    4096
}

fn default_max_tuples() -> u64 {
    10_000_000
}

fn default_max_sequence() -> usize {
    1 << 26
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_matrix: default_max_matrix(),
            max_tuples: default_max_tuples(),
            max_sequence: default_max_sequence(),
        }
    }
}

/// A circle symbol, either explicit modes or a truncated Weierstrass series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SymbolSpec {
    Modes(FourierSymbol),
    Weierstrass {
        alpha: f64,
        gamma: u64,
        c: CSequence,
        /// Largest mode kept; defaults to what the experiment needs.
        #[serde(default)]
        cutoff: Option<u64>,
    },
}

impl SymbolSpec {
    pub fn build(&self, default_cutoff: u64) -> Result<FourierSymbol, CliError> {
        match self {
            SymbolSpec::Modes(s) => Ok(s.clone()),
            SymbolSpec::Weierstrass { alpha, gamma, c, cutoff } => {
                let p = WeierstrassParams::new(*alpha, *gamma, c.clone())?;
                Ok(weierstrass_symbol(&p, cutoff.unwrap_or(default_cutoff))?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeierstrassTraceParams {
    #[serde(default = "half")]
    pub alpha: f64,
    pub gamma: u64,
    pub c: CSequence,
    /// Defaults to `c`.
    #[serde(default)]
    pub d: Option<CSequence>,
    pub n_max: u64,
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    #[default]
    Cesaro,
    MTransform,
    Raw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurabilityParams {
    pub c: CSequence,
    /// Sequence length; indices `1..=len` of `c_n²` are used.
    pub len: usize,
    #[serde(default)]
    pub transform: Transform,
    #[serde(default)]
    pub policy: ClassifyPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepParams {
    pub symbol: SymbolSpec,
    pub sizes: Vec<usize>,
    /// Inclusive index window for the log-log slope.
    #[serde(default)]
    pub fit: Option<(usize, usize)>,
    /// Exponent `p` of the weak quasinorm.
    #[serde(default)]
    pub p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelCheckParams {
    pub a: SymbolSpec,
    pub b: SymbolSpec,
    pub n: u64,
    pub r: f64,
    pub grid: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindingParams {
    pub a: SymbolSpec,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TKind {
    Identity,
    Grading,
    Phase,
    GradingPhase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NcTorusParams {
    pub dim: usize,
    pub t: TKind,
    pub symbols: Vec<LatticeSymbol>,
    pub n_max: u64,
    /// When given, the run is repeated at `θ = 0` and the deviation reported.
    #[serde(default)]
    pub theta: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HnCheckParams {
    pub n_values: Vec<u64>,
    pub m_max: u32,
    pub t_grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierTraceParams {
    pub a: SymbolSpec,
    pub b: SymbolSpec,
    /// Hardy truncation size.
    pub n: usize,
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
}

pub fn parse_batch(text: &str) -> Result<Vec<ExperimentConfig>, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Validation(format!("batch config: {e}")))
}
