//! Experiment configuration: a JSON file, dotted-path overrides, and the
//! `COMPOUND_SIM_SEED` environment variable, applied in that order.

use std::path::PathBuf;

use compound_feedback::channel::CompoundFamily;
use compound_feedback::detection::{EstimationRule, SlackSchedule};
use compound_feedback::info::{capacity_vector, DEFAULT_TOL};
use compound_feedback::scheme::{
    derive_params, ParamSpec, PhaseLengths, SchemeParams, DEFAULT_BACKOFF, DEFAULT_CHUNK,
    DEFAULT_KAPPA_MAX, DEFAULT_MAX_EPOCHS,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

/// Environment variable that replaces the configured seed.
pub const SEED_ENV: &str = "COMPOUND_SIM_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    /// `{BSC(p), BSC(1 - p)}`.
    BscPair(f64),
    /// One row-stochastic matrix per channel, `matrix[x][y] = Q(y | x)`.
    Matrices(Vec<Vec<Vec<f64>>>),
}

/// Target rates in bits per channel use. A single entry applies to every channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RateSpec {
    Absolute(Vec<f64>),
    /// Fractions of each channel's capacity.
    FractionOfCapacity(Vec<f64>),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    /// JSON lines with one session transcript each.
    pub transcripts: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: FamilySpec,
    pub rates: RateSpec,
    /// Threshold of the message-phase estimator (BSC pairs only).
    pub q_m: Option<f64>,
    /// Threshold of the control-phase estimator (BSC pairs only).
    pub q_c: Option<f64>,
    /// Use maximum-likelihood estimation in both training phases.
    pub ml: bool,
    /// Strictly increasing block scales.
    pub n: Vec<usize>,
    /// Sessions per (n, channel) cell.
    pub sessions: u64,
    pub seed: u64,
    pub outputs: Outputs,
    /// Sessions per parallel work unit.
    pub chunk: u64,
    /// Explicit tiny phase lengths, used by `oracle-check` instead of the schedule.
    pub lengths: Option<PhaseLengths>,
    pub max_epochs: usize,
    pub backoff: f64,
    pub kappa_max: f64,
    pub reference: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            family: FamilySpec::BscPair(0.1),
            rates: RateSpec::FractionOfCapacity(vec![0.25]),
            q_m: Some(0.5),
            q_c: Some(0.5),
            ml: false,
            n: vec![128, 256, 512],
            sessions: 10_000,
            seed: 0,
            outputs: Outputs::default(),
            chunk: DEFAULT_CHUNK,
            lengths: None,
            max_epochs: DEFAULT_MAX_EPOCHS,
            backoff: DEFAULT_BACKOFF,
            kappa_max: DEFAULT_KAPPA_MAX,
            reference: 0,
        }
    }
}

/// A validated configuration with its derived objects.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub family: CompoundFamily,
    pub capacities: Vec<f64>,
    pub rates: Vec<f64>,
    pub message_rule: EstimationRule,
    pub control_rule: EstimationRule,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Loads `path` (or the defaults), then applies `overrides` and the seed
    /// environment variable.
    pub fn load(path: Option<&std::path::Path>, overrides: &[String], env_seed: Option<&str>) -> Result<Self, CliError> {
        let mut value = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| CliError::Io {
                    path: p.display().to_string(),
                    source,
                })?;
                // Typed parse first, so schema errors carry a line and column.
                let file: ExperimentConfig = serde_json::from_str(&text)
                    .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                serde_json::to_value(file).expect("config serializes")
            }
            None => serde_json::to_value(ExperimentConfig::default()).expect("config serializes"),
        };
        if let Some(s) = env_seed {
            let seed: u64 = s
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("{SEED_ENV}: `{s}` is not an unsigned integer")))?;
            set_path(&mut value, "seed", Value::from(seed))?;
        }
        for o in overrides {
            let (key, raw) = o
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("override `{o}` is not of the form key=value")))?;
            let v = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
            set_path(&mut value, key.trim(), v)?;
        }
        serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Checks every invariant and builds the family, rates and estimators.
    pub fn validate(&self) -> Result<Experiment, CliError> {
        let family = match &self.family {
            FamilySpec::BscPair(p) => CompoundFamily::bsc_pair(*p),
            FamilySpec::Matrices(m) => CompoundFamily::from_matrices(m.clone()),
        }
        .map_err(|e| CliError::Config(format!("family: {e}")))?;
        let l = family.len();
        let capacities = capacity_vector(&family, DEFAULT_TOL)?;

        let (values, fraction) = match &self.rates {
            RateSpec::Absolute(v) => (v, false),
            RateSpec::FractionOfCapacity(v) => (v, true),
        };
        let values: Vec<f64> = match values.len() {
            1 => vec![values[0]; l],
            k if k == l => values.clone(),
            k => return Err(CliError::Config(format!("rates: {k} entries given for {l} channels"))),
        };
        let rates: Vec<f64> = values
            .iter()
            .zip(&capacities)
            .map(|(v, c)| if fraction { v * c } else { *v })
            .collect();
        for (i, (r, c)) in rates.iter().zip(&capacities).enumerate() {
            if !(*r >= 0.0 && r < c) {
                return Err(CliError::Config(format!(
                    "rates[{i}]: rate {r} for channel {i} must lie in [0, {c})"
                )));
            }
        }

        if self.n.is_empty() {
            return Err(CliError::Config("n: schedule is empty".into()));
        }
        if let Some(w) = self.n.windows(2).find(|w| w[0] >= w[1]) {
            return Err(CliError::Config(format!(
                "n: schedule must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if self.sessions == 0 {
            return Err(CliError::Config("sessions: at least one session is required".into()));
        }
        if self.chunk == 0 {
            return Err(CliError::Config("chunk: must be positive".into()));
        }
        if self.max_epochs == 0 {
            return Err(CliError::Config("max_epochs: must be positive".into()));
        }
        if self.reference >= l {
            return Err(CliError::Config(format!("reference: channel {} of {l} does not exist", self.reference)));
        }

        let (message_rule, control_rule) = if self.ml {
            (EstimationRule::MaximumLikelihood, EstimationRule::MaximumLikelihood)
        } else {
            let rule = |name: &str, q: Option<f64>| -> Result<EstimationRule, CliError> {
                let q = q.ok_or_else(|| CliError::Config(format!("{name}: required unless ml is set")))?;
                EstimationRule::bsc_threshold(&family, q).map_err(|e| CliError::Config(format!("{name}: {e}")))
            };
            (rule("q_m", self.q_m)?, rule("q_c", self.q_c)?)
        };

        Ok(Experiment {
            config: self.clone(),
            family,
            capacities,
            rates,
            message_rule,
            control_rule,
        })
    }
}

impl Experiment {
    /// Scheme parameters at block scale `n`.
    pub fn params(&self, n: usize) -> Result<SchemeParams, CliError> {
        let mut spec = ParamSpec::new(self.rates.clone(), n, self.message_rule, self.control_rule);
        spec.reference_index = self.config.reference;
        spec.backoff = self.config.backoff;
        spec.kappa_max = self.config.kappa_max;
        derive_params(&self.family, &spec).map_err(|e| CliError::Config(format!("n = {n}: {e}")))
    }

    /// Parameters of the explicit tiny configuration, or of the first block scale.
    pub fn oracle_params(&self) -> Result<SchemeParams, CliError> {
        match &self.config.lengths {
            Some(lengths) => SchemeParams::from_lengths(
                &self.family,
                lengths.clone(),
                self.message_rule,
                self.control_rule,
                SlackSchedule::default(),
            )
            .map_err(|e| CliError::Config(format!("lengths: {e}"))),
            None => self.params(self.config.n[0]),
        }
    }
}

/// Sets `key` (dotted, with numeric segments indexing arrays) inside `root`.
fn set_path(root: &mut Value, key: &str, v: Value) -> Result<(), CliError> {
    if key.is_empty() {
        return Err(CliError::Config("empty override key".into()));
    }
    let mut cur = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        if cur.is_null() {
            *cur = Value::Object(Default::default());
        }
        cur = match cur {
            Value::Object(map) => {
                if last {
                    map.insert(part.to_string(), v);
                    return Ok(());
                }
                map.entry(part.to_string()).or_insert(Value::Null)
            }
            Value::Array(items) => {
                let idx: usize = part
                    .parse()
                    .map_err(|_| CliError::Config(format!("{key}: `{part}` is not an array index")))?;
                let len = items.len();
                let slot = items
                    .get_mut(idx)
                    .ok_or_else(|| CliError::Config(format!("{key}: index {idx} out of range for {len} entries")))?;
                if last {
                    *slot = v;
                    return Ok(());
                }
                slot
            }
            _ => return Err(CliError::Config(format!("{key}: `{part}` is inside a scalar"))),
        };
    }
    unreachable!("loop returns on the last segment")
}
