//! Shipped experiment presets.
//!
//! The bandit presets use four arms with per-unit means
//! `r = (1, .8, .5, .3)`, `c = (.95, .7, .4, .2)` plus the null arm, truncated
//! Gaussian outcome noise, and AR(1) demand `q_t = 12 + q_{t-1}/2 + N(0, 4)`.
//! They run at desk scale (`T = 2000`, 20 replications) and use `δ = 0.1`:
//! with `δ = 1/T` the cost lower bounds stay near zero for long enough that
//! the dual weights never price the resource and every policy degenerates to
//! greedy reward maximization.

use bwk_core::nrm::{preset_multi_product, preset_single_product};
use bwk_core::{Ar1DemandParams, DemandModel, LinearDemandParams, OutcomeNoise};

use crate::config::{ExperimentConfig, Instance, OracleSpec, PolicySpec, SCHEMA_VERSION};

/// Master seed shared by the presets.
pub const PRESET_SEED: u64 = 2024;
/// Confidence parameter shared by the bandit presets.
pub const PRESET_DELTA: f64 = 0.1;

const CATALOG: &[(&str, &str)] = &[
    (
        "paper-bwk-d1",
        "four arms, one resource, AR(1) demand; OA-UCB with several oracles vs PDB, SW-UCB, greedy",
    ),
    (
        "paper-ar1",
        "AR(1) demand; forecast error of the ridge AR(1) oracle and its power-of-two variant",
    ),
    (
        "paper-linear",
        "linearly trending demand; forecast error of the least-squares oracle",
    ),
    (
        "nrm-single",
        "single-product pricing over six prices, b = 10",
    ),
    (
        "nrm-multi-linear",
        "two products, three resources, linear choice model, b = 20",
    ),
    (
        "nrm-multi-exp",
        "two products, three resources, exponential choice model, b = 20",
    ),
    (
        "nrm-multi-logit",
        "two products, three resources, logit choice model, b = 20",
    ),
    (
        "lemma2-i1",
        "deterministic instance whose demand drops to 1/16 halfway",
    ),
    (
        "lemma2-i2",
        "deterministic instance with unit demand throughout",
    ),
];

/// `(name, description)` of every preset.
pub fn catalog() -> &'static [(&'static str, &'static str)] {
    CATALOG
}

fn ar1() -> DemandModel {
    DemandModel::Ar1(Ar1DemandParams::new(12.0, 0.5, 2.0))
}

fn bwk_instance(demand: DemandModel) -> Instance {
    Instance::Generic {
        rewards: vec![1.0, 0.8, 0.5, 0.3, 0.0],
        costs: vec![vec![0.95], vec![0.7], vec![0.4], vec![0.2], vec![0.0]],
        null_index: 4,
        demand,
        noise: OutcomeNoise::TruncatedGaussian { sigma: 1.0 },
    }
}

fn offsets(xs: &[f64]) -> impl Iterator<Item = OracleSpec> + '_ {
    xs.iter().map(|&x| OracleSpec::Offset { x })
}

fn base(name: &str, instance: Instance) -> ExperimentConfig {
    ExperimentConfig {
        schema: SCHEMA_VERSION,
        name: name.to_string(),
        preset: Some(name.to_string()),
        instance,
        policies: Vec::new(),
        oracles: Vec::new(),
        replications: 20,
        seed: PRESET_SEED,
        budgets: vec![15.0],
        horizons: vec![2000],
        delta: Some(PRESET_DELTA),
        out_dir: None,
    }
}

fn nrm(name: &str, spec: bwk_core::NrmSpec, b: f64) -> ExperimentConfig {
    ExperimentConfig {
        policies: vec![PolicySpec::OaUcb, PolicySpec::GreedyUcb],
        oracles: vec![OracleSpec::pow2_ar1()],
        budgets: vec![b],
        ..base(
            name,
            Instance::Nrm {
                prices: spec.prices,
                consumption: spec.consumption,
                choice: spec.choice,
                demand: spec.demand,
            },
        )
    }
}

/// The preset called `name`.
pub fn preset(name: &str) -> Option<ExperimentConfig> {
    let config = match name {
        "paper-bwk-d1" => ExperimentConfig {
            policies: vec![
                PolicySpec::OaUcb,
                PolicySpec::Pdb { epsilon: None },
                PolicySpec::SwUcb { window: None },
                PolicySpec::GreedyUcb,
            ],
            oracles: [OracleSpec::pow2_ar1(), OracleSpec::Clairvoyant]
                .into_iter()
                .chain(offsets(&[5.0, 10.0, 15.0, 20.0, -5.0, -10.0, -15.0, -20.0]))
                .collect(),
            ..base(name, bwk_instance(ar1()))
        },
        "paper-ar1" => ExperimentConfig {
            oracles: vec![
                OracleSpec::pow2_ar1(),
                OracleSpec::Ar1Ridge {
                    lambda: 1.0,
                    prior: 1.0,
                },
            ],
            replications: 50,
            horizons: vec![4096],
            ..base(name, bwk_instance(ar1()))
        },
        "paper-linear" => ExperimentConfig {
            oracles: vec![
                OracleSpec::LeastSquares { prior: 1.0 },
                OracleSpec::Pow2 {
                    inner: Box::new(OracleSpec::LeastSquares { prior: 1.0 }),
                },
            ],
            replications: 50,
            horizons: vec![8192],
            ..base(
                name,
                bwk_instance(DemandModel::Linear(LinearDemandParams {
                    alpha: 5.0,
                    beta: 0.5,
                    noise: 2.0,
                })),
            )
        },
        "nrm-single" => nrm(name, preset_single_product(10.0, 2000, ar1()), 10.0),
        "nrm-multi-linear" => nrm(
            name,
            preset_multi_product("linear", 20.0, 2000, ar1()).ok()?,
            20.0,
        ),
        "nrm-multi-exp" => nrm(
            name,
            preset_multi_product("exponential", 20.0, 2000, ar1()).ok()?,
            20.0,
        ),
        "nrm-multi-logit" => nrm(
            name,
            preset_multi_product("logit", 20.0, 2000, ar1()).ok()?,
            20.0,
        ),
        "lemma2-i1" | "lemma2-i2" => ExperimentConfig {
            policies: vec![PolicySpec::OaUcb, PolicySpec::GreedyUcb],
            oracles: vec![OracleSpec::Clairvoyant],
            replications: 1,
            budgets: vec![0.5],
            horizons: vec![1000],
            ..base(
                name,
                Instance::LowerBound {
                    which: if name == "lemma2-i1" { 1 } else { 2 },
                },
            )
        },
        _ => return None,
    };
    Some(config)
}
