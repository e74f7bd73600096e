//! Experiment descriptions: what to simulate, with which policies and
//! oracles, over which grid of budgets and horizons.
//!
//! Configurations are JSON documents carrying `"schema": 1`. A document may
//! name a `preset`; its fields then override the preset's, and every field
//! the preset supplies becomes optional.

use std::path::{Path, PathBuf};

use bwk_core::demand::fixture_lemma2;
use bwk_core::nrm::{nrm_opt_lp, NrmSpec};
use bwk_core::{
    opt_lp_value, sliding_window_ucb, Ar1RidgeOracle, BwkEnvironment, ChoiceModel, DemandModel,
    Environment, EnvironmentSpec, GreedyUcb, LeastSquaresOracle, NrmEnvironment, OaUcb,
    OaUcbConfig, OaUcbDp, OaUcbDpConfig, OutcomeNoise, PdbConfig, Policy, PowerOfTwo,
    PredictionOracle, PrimalDualBwk, StaticOracle,
};
use serde::{Deserialize, Serialize};

use crate::error::{config_error, HarnessError, Result};
use crate::presets;

pub const SCHEMA_VERSION: u32 = 1;

/// A fully specified experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub name: String,
    /// The preset this configuration started from, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub instance: Instance,
    #[serde(default)]
    pub policies: Vec<PolicySpec>,
    /// Oracles paired with every policy that consumes predictions.
    #[serde(default)]
    pub oracles: Vec<OracleSpec>,
    pub replications: usize,
    pub seed: u64,
    /// Normalized budgets `b`; the budget of a cell is `b·T`.
    pub budgets: Vec<f64>,
    pub horizons: Vec<usize>,
    /// Confidence parameter; `None` means `1/T`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

/// The same document with every field optional, as read from disk.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDocument {
    schema: Option<u32>,
    name: Option<String>,
    preset: Option<String>,
    instance: Option<Instance>,
    policies: Option<Vec<PolicySpec>>,
    oracles: Option<Vec<OracleSpec>>,
    replications: Option<usize>,
    seed: Option<u64>,
    budgets: Option<Vec<f64>>,
    horizons: Option<Vec<usize>>,
    delta: Option<f64>,
    out_dir: Option<PathBuf>,
}

/// The environment family, without the budget and horizon that the sweep grid supplies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Instance {
    /// Per-unit outcomes with means `rewards` and `costs`.
    Generic {
        rewards: Vec<f64>,
        costs: Vec<Vec<f64>>,
        null_index: usize,
        demand: DemandModel,
        #[serde(default)]
        noise: OutcomeNoise,
    },
    /// Pricing over a finite menu of price vectors.
    Nrm {
        prices: Vec<Vec<f64>>,
        consumption: Vec<Vec<f64>>,
        choice: ChoiceModel,
        demand: DemandModel,
    },
    /// One of the two deterministic instances that share a demand prefix.
    LowerBound { which: u8 },
}

/// Policies the harness can run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PolicySpec {
    /// The advice-driven primal-dual UCB policy (its pricing variant on pricing instances).
    OaUcb,
    /// Multiplicative-weights primal-dual baseline.
    Pdb {
        #[serde(default)]
        epsilon: Option<f64>,
    },
    /// Windowed statistics with running-mean demand extrapolation.
    SwUcb {
        #[serde(default)]
        window: Option<usize>,
    },
    /// Optimistic reward maximization that ignores resources.
    GreedyUcb,
}

impl PolicySpec {
    /// Whether the policy is run once per configured oracle.
    pub fn uses_oracle(&self) -> bool {
        matches!(self, PolicySpec::OaUcb)
    }
}

fn one() -> f64 {
    1.0
}

/// Forecasters of the total demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OracleSpec {
    /// Least-squares line through the observed prefix.
    LeastSquares {
        #[serde(default = "one")]
        prior: f64,
    },
    /// Ridge-fitted AR(1) extrapolation.
    Ar1Ridge {
        #[serde(default = "one")]
        lambda: f64,
        #[serde(default = "one")]
        prior: f64,
    },
    /// Recomputes the inner forecast only at `t = 1` and powers of two.
    Pow2 { inner: Box<OracleSpec> },
    /// Returns the realized total.
    Clairvoyant,
    /// Returns the realized total shifted by `x·T`.
    Offset { x: f64 },
}

impl OracleSpec {
    /// The default forecaster: power-of-two refreshes of the ridge AR(1) fit.
    pub fn pow2_ar1() -> Self {
        OracleSpec::Pow2 {
            inner: Box::new(OracleSpec::Ar1Ridge {
                lambda: 1.0,
                prior: 1.0,
            }),
        }
    }

    /// Instantiates the oracle for a run whose realized total is `total`.
    pub fn build(&self, total: f64, horizon: usize) -> Box<dyn PredictionOracle> {
        match self {
            OracleSpec::LeastSquares { prior } => Box::new(LeastSquaresOracle::new(*prior)),
            OracleSpec::Ar1Ridge { lambda, prior } => {
                Box::new(Ar1RidgeOracle::new(*lambda, *prior))
            }
            OracleSpec::Pow2 { inner } => Box::new(PowerOfTwo::new(inner.build(total, horizon))),
            OracleSpec::Clairvoyant => Box::new(StaticOracle::clairvoyant(total)),
            OracleSpec::Offset { x } => Box::new(StaticOracle::offset(total, *x, horizon)),
        }
    }

    /// The label written to result files.
    pub fn label(&self) -> String {
        self.build(0.0, 1).label()
    }

    fn validate(&self) -> Result<()> {
        match self {
            OracleSpec::LeastSquares { prior } => check_prior(*prior),
            OracleSpec::Ar1Ridge { lambda, prior } => {
                if !(lambda.is_finite() && *lambda > 0.0) {
                    return Err(config_error(format!(
                        "ridge lambda must be > 0, got {lambda}"
                    )));
                }
                check_prior(*prior)
            }
            OracleSpec::Pow2 { inner } => inner.validate(),
            OracleSpec::Clairvoyant => Ok(()),
            OracleSpec::Offset { x } if x.is_finite() => Ok(()),
            OracleSpec::Offset { x } => {
                Err(config_error(format!("offset must be finite, got {x}")))
            }
        }
    }
}

fn check_prior(prior: f64) -> Result<()> {
    if prior.is_finite() && prior >= 0.0 {
        Ok(())
    } else {
        Err(config_error(format!(
            "oracle prior must be finite and >= 0, got {prior}"
        )))
    }
}

/// The concrete environment of one `(b, T)` grid cell.
#[derive(Debug, Clone, PartialEq)]
pub enum CellSpec {
    Bwk(EnvironmentSpec),
    Nrm(NrmSpec),
}

impl CellSpec {
    pub fn demand(&self) -> &DemandModel {
        match self {
            CellSpec::Bwk(s) => &s.demand,
            CellSpec::Nrm(s) => &s.demand,
        }
    }

    pub fn horizon(&self) -> usize {
        match self {
            CellSpec::Bwk(s) => s.horizon,
            CellSpec::Nrm(s) => s.horizon,
        }
    }

    pub fn normalized_budget(&self) -> f64 {
        match self {
            CellSpec::Bwk(s) => s.normalized_budget,
            CellSpec::Nrm(s) => s.normalized_budget,
        }
    }

    pub fn validate(&self) -> bwk_core::Result<()> {
        match self {
            CellSpec::Bwk(s) => s.validate(),
            CellSpec::Nrm(s) => s.validate(),
        }
    }

    /// The LP benchmark for a realized total demand.
    pub fn opt_lp(&self, total_demand: f64) -> bwk_core::Result<f64> {
        match self {
            CellSpec::Bwk(s) => opt_lp_value(&s.rewards, &s.costs, total_demand, s.budget()),
            CellSpec::Nrm(s) => Ok(nrm_opt_lp(s, total_demand)?.value),
        }
    }

    pub fn environment(&self, seed: u64) -> bwk_core::Result<Box<dyn Environment>> {
        Ok(match self {
            CellSpec::Bwk(s) => Box::new(BwkEnvironment::new(s.clone(), seed)?),
            CellSpec::Nrm(s) => Box::new(NrmEnvironment::new(s.clone(), seed)?),
        })
    }

    /// A fresh policy for this cell.
    pub fn build_policy(&self, policy: &PolicySpec, delta: Option<f64>) -> Result<Box<dyn Policy>> {
        match (self, policy) {
            (CellSpec::Bwk(s), PolicySpec::OaUcb) => Ok(Box::new(OaUcb::new(
                s.shape(),
                OaUcbConfig {
                    delta,
                    ..OaUcbConfig::default()
                },
            )?)),
            (CellSpec::Bwk(s), PolicySpec::Pdb { epsilon }) => Ok(Box::new(PrimalDualBwk::new(
                s.shape(),
                PdbConfig {
                    delta,
                    epsilon: *epsilon,
                    ..PdbConfig::default()
                },
            )?)),
            (CellSpec::Bwk(s), PolicySpec::SwUcb { window }) => {
                Ok(Box::new(sliding_window_ucb(s.shape(), *window, delta)?))
            }
            (CellSpec::Bwk(s), PolicySpec::GreedyUcb) => {
                Ok(Box::new(GreedyUcb::new(s.shape(), delta)?))
            }
            (CellSpec::Nrm(s), PolicySpec::OaUcb) => Ok(Box::new(OaUcbDp::new(
                s,
                OaUcbDpConfig {
                    delta,
                    ..OaUcbDpConfig::default()
                },
            )?)),
            (CellSpec::Nrm(s), PolicySpec::GreedyUcb) => Ok(Box::new(OaUcbDp::greedy(s, delta)?)),
            (CellSpec::Nrm(_), other) => Err(config_error(format!(
                "policy {other:?} is not available on pricing instances"
            ))),
        }
    }
}

impl Instance {
    /// The environment for normalized budget `b` and horizon `T`.
    pub fn cell(&self, b: f64, horizon: usize) -> Result<CellSpec> {
        Ok(match self {
            Instance::Generic {
                rewards,
                costs,
                null_index,
                demand,
                noise,
            } => CellSpec::Bwk(EnvironmentSpec {
                rewards: rewards.clone(),
                costs: costs.clone(),
                null_index: *null_index,
                normalized_budget: b,
                horizon,
                demand: demand.clone(),
                noise: *noise,
            }),
            Instance::Nrm {
                prices,
                consumption,
                choice,
                demand,
            } => CellSpec::Nrm(NrmSpec {
                prices: prices.clone(),
                consumption: consumption.clone(),
                choice: choice.clone(),
                normalized_budget: b,
                horizon,
                demand: demand.clone(),
            }),
            Instance::LowerBound { which } => {
                let mut spec =
                    fixture_lemma2(*which, horizon).map_err(|e| config_error(e.to_string()))?;
                spec.normalized_budget = b;
                CellSpec::Bwk(spec)
            }
        })
    }
}

impl ExperimentConfig {
    /// Parses a JSON document, resolving a referenced preset.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ConfigDocument =
            serde_json::from_str(text).map_err(|e| config_error(e.to_string()))?;
        Self::from_document(doc)
    }

    /// Reads and parses a configuration file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
        let doc: ConfigDocument =
            serde_json::from_str(&text).map_err(|source| HarnessError::Parse {
                path: path.to_path_buf(),
                source,
            })?;
        Self::from_document(doc)
    }

    fn from_document(doc: ConfigDocument) -> Result<Self> {
        match doc.schema {
            Some(SCHEMA_VERSION) => {}
            Some(other) => return Err(config_error(format!("unsupported schema version {other}"))),
            None => return Err(config_error("missing field `schema`")),
        }
        let base = match &doc.preset {
            Some(name) => Some(presets::preset(name).ok_or_else(|| unknown_preset(name))?),
            None => None,
        };
        fn pick<T>(value: Option<T>, base: Option<T>, field: &str) -> Result<T> {
            value
                .or(base)
                .ok_or_else(|| config_error(format!("missing field `{field}`")))
        }
        let b = base.as_ref();
        let config = ExperimentConfig {
            schema: SCHEMA_VERSION,
            name: pick(doc.name, b.map(|b| b.name.clone()), "name")?,
            preset: doc.preset,
            instance: pick(doc.instance, b.map(|b| b.instance.clone()), "instance")?,
            policies: doc
                .policies
                .or(b.map(|b| b.policies.clone()))
                .unwrap_or_default(),
            oracles: doc
                .oracles
                .or(b.map(|b| b.oracles.clone()))
                .unwrap_or_default(),
            replications: pick(doc.replications, b.map(|b| b.replications), "replications")?,
            seed: pick(doc.seed, b.map(|b| b.seed), "seed")?,
            budgets: pick(doc.budgets, b.map(|b| b.budgets.clone()), "budgets")?,
            horizons: pick(doc.horizons, b.map(|b| b.horizons.clone()), "horizons")?,
            delta: doc.delta.or(b.and_then(|b| b.delta)),
            out_dir: doc.out_dir.or(b.and_then(|b| b.out_dir.clone())),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }

    /// Checks everything that can be checked without simulating.
    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(config_error(format!(
                "unsupported schema version {}",
                self.schema
            )));
        }
        if let Some(name) = &self.preset {
            presets::preset(name).ok_or_else(|| unknown_preset(name))?;
        }
        if self.replications == 0 {
            return Err(config_error("replications must be >= 1"));
        }
        if self.budgets.is_empty() || self.horizons.is_empty() {
            return Err(config_error(
                "budgets and horizons must each list at least one value",
            ));
        }
        if let Some(d) = self.delta {
            if !(d > 0.0 && d < 1.0) {
                return Err(config_error(format!("delta must lie in (0, 1), got {d}")));
            }
        }
        for oracle in &self.oracles {
            oracle.validate()?;
        }
        if self.policies.iter().any(PolicySpec::uses_oracle) && self.oracles.is_empty() {
            return Err(config_error("oa-ucb needs at least one oracle"));
        }
        for cell in self.cells()? {
            cell.validate().map_err(|e| config_error(e.to_string()))?;
            cell.demand()
                .validate(cell.horizon())
                .map_err(|e| config_error(e.to_string()))?;
            for policy in &self.policies {
                cell.build_policy(policy, self.delta).map_err(|e| match e {
                    HarnessError::Simulation(inner) => config_error(inner.to_string()),
                    other => other,
                })?;
            }
        }
        Ok(())
    }

    /// Grid cells in `(b, T)` order, budgets outermost.
    pub fn cells(&self) -> Result<Vec<CellSpec>> {
        let mut cells = Vec::with_capacity(self.budgets.len() * self.horizons.len());
        for &b in &self.budgets {
            if !(b.is_finite() && b > 0.0) {
                return Err(config_error(format!(
                    "normalized budget must be > 0, got {b}"
                )));
            }
            for &horizon in &self.horizons {
                if horizon == 0 {
                    return Err(config_error("horizon must be >= 1"));
                }
                cells.push(self.instance.cell(b, horizon)?);
            }
        }
        Ok(cells)
    }

    /// Applies a sweep axis `b=…`, `T=…` or `x=…` (comma-separated values).
    /// An `x` axis replaces the oracle list with static offsets `Q + x·T`.
    pub fn apply_axis(&mut self, axis: &str) -> Result<()> {
        let (key, values) = axis
            .split_once('=')
            .ok_or_else(|| config_error(format!("axis '{axis}' is not of the form NAME=V1,V2")))?;
        let values: Vec<&str> = values
            .split(',')
            .map(str::trim)
            .filter(|v| !v.is_empty())
            .collect();
        if values.is_empty() {
            return Err(config_error(format!("axis '{axis}' lists no values")));
        }
        let parse_f64 = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| config_error(format!("'{v}' is not a number")))
        };
        match key.trim() {
            "b" => self.budgets = values.into_iter().map(parse_f64).collect::<Result<_>>()?,
            "T" => {
                self.horizons = values
                    .into_iter()
                    .map(|v| {
                        v.parse::<usize>()
                            .map_err(|_| config_error(format!("'{v}' is not a horizon")))
                    })
                    .collect::<Result<_>>()?
            }
            "x" => {
                self.oracles = values
                    .into_iter()
                    .map(|v| parse_f64(v).map(|x| OracleSpec::Offset { x }))
                    .collect::<Result<_>>()?
            }
            other => {
                return Err(config_error(format!(
                    "unknown axis '{other}'; expected b, T or x"
                )))
            }
        }
        self.validate()
    }
}

fn unknown_preset(name: &str) -> HarnessError {
    let known: Vec<&str> = presets::catalog().iter().map(|(n, _)| *n).collect();
    config_error(format!(
        "unknown preset '{name}'; available: {}",
        known.join(", ")
    ))
}
