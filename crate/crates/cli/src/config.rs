//! TOML/flag configuration resolution.
//!
//! A run is described by three TOML sections — `[run]`, `[noise]`, `[sweep]` —
//! whose keys are mirrored 1:1 by command-line flags. Flags override file
//! values; the fully resolved result is a [`ResolvedConfig`], which every
//! artifact embeds verbatim.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use qecsim_core::code_steane::SteaneCode;
use qecsim_core::code_surface17::Surface17Code;
use qecsim_core::harness::{FailureCriterion, InputStatePolicy, RunConfig};
use qecsim_core::{NoiseModel, QecCode, SimError};
use serde::{Deserialize, Serialize};

/// Errors surfaced to the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, bad config file, bad input data: exit 2.
    Usage(String),
    /// Internal invariant violation or simulation failure: exit 3.
    Internal(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Internal(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Which code is simulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CodeChoice {
    Steane,
    Surface17,
}

impl CodeChoice {
    pub fn build(self) -> Box<dyn QecCode> {
        match self {
            CodeChoice::Steane => Box::new(SteaneCode::new()),
            CodeChoice::Surface17 => Box::new(Surface17Code::new()),
        }
    }
}

/// Which error model is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    None,
    Pauli,
    PulseArea,
}

/// Input-state policy selector; `fixed` reads `theta`/`phi` alongside.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum InputKind {
    Random,
    StabilizerSix,
    Fixed,
}

/// Local mirror of the failure criterion so it can double as a clap value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CriterionChoice {
    PFailL,
    PFailL1,
    PFailPsi1,
    PFailPsi2,
    Infidelity,
}

impl From<CriterionChoice> for FailureCriterion {
    fn from(c: CriterionChoice) -> Self {
        match c {
            CriterionChoice::PFailL => FailureCriterion::PFailL,
            CriterionChoice::PFailL1 => FailureCriterion::PFailL1,
            CriterionChoice::PFailPsi1 => FailureCriterion::PFailPsi1,
            CriterionChoice::PFailPsi2 => FailureCriterion::PFailPsi2,
            CriterionChoice::Infidelity => FailureCriterion::Infidelity,
        }
    }
}

/// `[run]` section of the config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub code: Option<CodeChoice>,
    pub trials: Option<u64>,
    pub cycles: Option<usize>,
    pub seed: Option<u64>,
    pub criterion: Option<CriterionChoice>,
    pub threshold: Option<f64>,
    pub input: Option<InputKind>,
    pub theta: Option<f64>,
    pub phi: Option<f64>,
    pub output: Option<PathBuf>,
}

/// `[noise]` section of the config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub model: Option<NoiseKind>,
    pub p: Option<f64>,
    pub sigma: Option<f64>,
}

/// `[sweep]` section of the config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub grid: Option<Vec<f64>>,
}

/// The whole config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub sweep: SweepSection,
}

impl FileConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| usage(format!("config file: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("config file {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// Flags shared by `trial`, `chain`, and `sweep`; each flag mirrors a config
/// file key and overrides it.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct RunArgs {
    /// TOML config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Code to simulate [file key: run.code].
    #[arg(long)]
    pub code: Option<CodeChoice>,
    /// Error model [file key: noise.model].
    #[arg(long)]
    pub noise: Option<NoiseKind>,
    /// Pauli fault probability; a comma list forms a sweep grid
    /// [file keys: noise.p / sweep.grid].
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub p: Option<Vec<f64>>,
    /// Pulse-area spread; a comma list forms a sweep grid
    /// [file keys: noise.sigma / sweep.grid].
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub sigma: Option<Vec<f64>>,
    /// Monte Carlo trials per point [file key: run.trials].
    #[arg(long)]
    pub trials: Option<u64>,
    /// QEC cycles per trial [file key: run.cycles].
    #[arg(long)]
    pub cycles: Option<usize>,
    /// Master seed [file key: run.seed].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Metric that defines a trial failure [file key: run.criterion].
    #[arg(long)]
    pub criterion: Option<CriterionChoice>,
    /// Failure threshold on the criterion metric [file key: run.threshold].
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Input-state policy [file key: run.input].
    #[arg(long)]
    pub input: Option<InputKind>,
    /// Polar angle for the fixed input policy [file key: run.theta].
    #[arg(long)]
    pub theta: Option<f64>,
    /// Phase angle for the fixed input policy [file key: run.phi].
    #[arg(long)]
    pub phi: Option<f64>,
    /// Artifact output path; standard output when absent [file key: run.output].
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Trial index to run (trial/chain subcommands).
    #[arg(long)]
    pub trial_index: Option<u64>,
}

/// Fully resolved, validated run description. Serialized into every artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub code: CodeChoice,
    pub model: NoiseKind,
    /// Noise strengths; empty exactly when `model` is `none`.
    pub grid: Vec<f64>,
    pub trials: u64,
    pub cycles: usize,
    pub seed: u64,
    pub criterion: CriterionChoice,
    pub threshold: f64,
    pub input: InputKind,
    pub theta: f64,
    pub phi: f64,
    /// Where the artifact goes; invocation plumbing, not experiment
    /// provenance, so it stays out of the serialized artifact (results must
    /// be byte-identical regardless of where they are written).
    #[serde(skip)]
    pub output: Option<PathBuf>,
    pub trial_index: u64,
}

impl ResolvedConfig {
    /// Merges the optional config file with flag overrides and validates.
    pub fn resolve(args: &RunArgs) -> CliResult<Self> {
        let file = match &args.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };

        let model = args
            .noise
            .or(file.noise.model)
            .unwrap_or(NoiseKind::None);

        // Strength grid: a flag list wins, then [sweep] grid, then the single
        // [noise] strength.
        let (flag_grid, flag_name) = match model {
            NoiseKind::Pauli => (args.p.clone(), "noise.p"),
            NoiseKind::PulseArea => (args.sigma.clone(), "noise.sigma"),
            NoiseKind::None => (None, "noise"),
        };
        match model {
            NoiseKind::Pauli if args.sigma.is_some() => {
                return Err(usage("noise.sigma is not a pauli-model parameter (use noise.p)"));
            }
            NoiseKind::PulseArea if args.p.is_some() => {
                return Err(usage("noise.p is not a pulse-area parameter (use noise.sigma)"));
            }
            NoiseKind::None if args.p.is_some() || args.sigma.is_some() => {
                return Err(usage("noise.p / noise.sigma require a noise model"));
            }
            _ => {}
        }
        let file_single = match model {
            NoiseKind::Pauli => file.noise.p,
            NoiseKind::PulseArea => file.noise.sigma,
            NoiseKind::None => None,
        };
        let grid: Vec<f64> = match model {
            NoiseKind::None => {
                if file.sweep.grid.as_deref().is_some_and(|g| !g.is_empty()) {
                    return Err(usage("sweep.grid requires a noise model"));
                }
                Vec::new()
            }
            _ => flag_grid
                .or_else(|| file.sweep.grid.clone())
                .or_else(|| file_single.map(|v| vec![v]))
                .ok_or_else(|| usage(format!("{flag_name} is required for this noise model")))?,
        };

        let trials = args.trials.or(file.run.trials).unwrap_or(100_000);
        let cycles = args.cycles.or(file.run.cycles).unwrap_or(1);
        let seed = args.seed.or(file.run.seed).unwrap_or(0);
        let criterion = args
            .criterion
            .or(file.run.criterion)
            .unwrap_or(CriterionChoice::PFailPsi1);
        let threshold = args.threshold.or(file.run.threshold).unwrap_or(1e-6);
        let input = args.input.or(file.run.input).unwrap_or(InputKind::Random);
        let theta = args.theta.or(file.run.theta).unwrap_or(0.0);
        let phi = args.phi.or(file.run.phi).unwrap_or(0.0);
        let code = args.code.or(file.run.code).unwrap_or(CodeChoice::Steane);
        let output = args.output.clone().or(file.run.output);
        let trial_index = args.trial_index.unwrap_or(0);

        let resolved = Self {
            code,
            model,
            grid,
            trials,
            cycles,
            seed,
            criterion,
            threshold,
            input,
            theta,
            phi,
            output,
            trial_index,
        };
        resolved.validate()?;
        Ok(resolved)
    }

    fn validate(&self) -> CliResult<()> {
        if self.trials < 1 {
            return Err(usage("run.trials must be at least 1"));
        }
        if self.cycles < 1 {
            return Err(usage("run.cycles must be at least 1"));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(usage("run.threshold must lie strictly between 0 and 1"));
        }
        if self.grid.is_empty() != matches!(self.model, NoiseKind::None) {
            return Err(usage("sweep.grid must be non-empty exactly when a noise model is set"));
        }
        for &v in &self.grid {
            if !(v > 0.0) || !v.is_finite() {
                return Err(usage("sweep.grid values must be positive and finite"));
            }
            if matches!(self.model, NoiseKind::Pauli) && v > 1.0 {
                return Err(usage("noise.p must lie in (0, 1]"));
            }
        }
        if matches!(self.input, InputKind::Fixed)
            && !(self.theta.is_finite() && self.phi.is_finite())
        {
            return Err(usage("run.theta and run.phi must be finite for input = fixed"));
        }
        Ok(())
    }

    /// The policy value handed to the harness.
    pub fn input_policy(&self) -> InputStatePolicy {
        match self.input {
            InputKind::Random => InputStatePolicy::Random,
            InputKind::StabilizerSix => InputStatePolicy::StabilizerSix,
            InputKind::Fixed => InputStatePolicy::Fixed {
                theta: self.theta,
                phi: self.phi,
            },
        }
    }

    /// The noise model at strength `s` (ignored for the `none` model).
    pub fn noise_at(&self, s: f64) -> NoiseModel {
        match self.model {
            NoiseKind::None => NoiseModel::None,
            NoiseKind::Pauli => NoiseModel::StochasticPauli { p: s },
            NoiseKind::PulseArea => NoiseModel::PulseArea { sigma: s },
        }
    }

    /// Strengths to iterate over; the `none` model contributes one dummy point.
    pub fn strengths(&self) -> Vec<f64> {
        if self.grid.is_empty() {
            vec![0.0]
        } else {
            self.grid.clone()
        }
    }

    /// Harness config for one point.
    pub fn run_config(&self, strength: f64) -> RunConfig {
        RunConfig {
            master_seed: self.seed,
            n_trials: self.trials,
            cycles: self.cycles,
            noise: self.noise_at(strength),
            input: self.input_policy(),
            criterion: self.criterion.into(),
            failure_threshold: self.threshold,
        }
    }

    /// Dumps the config back into file form (for the round-trip guarantee).
    pub fn to_file_config(&self) -> FileConfig {
        FileConfig {
            run: RunSection {
                code: Some(self.code),
                trials: Some(self.trials),
                cycles: Some(self.cycles),
                seed: Some(self.seed),
                criterion: Some(self.criterion),
                threshold: Some(self.threshold),
                input: Some(self.input),
                theta: Some(self.theta),
                phi: Some(self.phi),
                output: self.output.clone(),
            },
            noise: NoiseSection {
                model: Some(self.model),
                p: None,
                sigma: None,
            },
            sweep: SweepSection {
                grid: if self.grid.is_empty() {
                    None
                } else {
                    Some(self.grid.clone())
                },
            },
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_file_config()).expect("config serializes")
    }
}
